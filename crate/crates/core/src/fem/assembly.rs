//! Assembly of the P1 bilinear forms and load vectors.
//!
//! Everything here is integrated exactly: the integrands are products of at
//! most two P1 functions with element-wise constants.

use super::field::{vdof, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::mesh::StructuredTriMesh;
use crate::sparse::CsrMatrix;

/// `∫_K φ_i φ_j = |K| (1 + δ_ij) / 12`
#[inline]
pub(crate) fn local_mass(area: f64, i: usize, j: usize) -> f64 {
    if i == j {
        area / 6.0
    } else {
        area / 12.0
    }
}

/// Diagonal of the lumped mass matrix, `D_ii = Σ_{K∋i} |K|/3`.
pub fn lumped_weights(mesh: &StructuredTriMesh) -> Vec<f64> {
    let mut d = vec![0.0; mesh.num_nodes()];
    for (e, tri) in mesh.elements().iter().enumerate() {
        let w = mesh.geom(e).area / 3.0;
        for &a in tri {
            d[a] += w;
        }
    }
    d
}

pub fn lumped_mass(mesh: &StructuredTriMesh) -> CsrMatrix {
    CsrMatrix::diagonal(&lumped_weights(mesh))
}

fn assemble_scalar(mesh: &StructuredTriMesh, local: impl Fn(usize, usize, usize) -> f64) -> CsrMatrix {
    let mut trip = Vec::with_capacity(9 * mesh.num_elements());
    for (e, tri) in mesh.elements().iter().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                trip.push((tri[i], tri[j], local(e, i, j)));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.num_nodes(), &trip)
}

pub fn consistent_mass(mesh: &StructuredTriMesh) -> CsrMatrix {
    assemble_scalar(mesh, |e, i, j| local_mass(mesh.geom(e).area, i, j))
}

pub fn stiffness(mesh: &StructuredTriMesh) -> CsrMatrix {
    assemble_scalar(mesh, |e, i, j| {
        let g = mesh.geom(e);
        g.area * (g.grads[i][0] * g.grads[j][0] + g.grads[i][1] * g.grads[j][1])
    })
}

/// `(A_h v, w) = (∇v, ∇w) + (v, w)`
pub fn op_ah(mesh: &StructuredTriMesh) -> CsrMatrix {
    assemble_scalar(mesh, |e, i, j| {
        let g = mesh.geom(e);
        g.area * (g.grads[i][0] * g.grads[j][0] + g.grads[i][1] * g.grads[j][1])
            + local_mass(g.area, i, j)
    })
}

/// DOFs of the interleaved vector space fixed by `σ·n = 0` on the rectangle.
pub fn normal_constraints(mesh: &StructuredTriMesh) -> Vec<bool> {
    mesh.boundary_flags()
        .iter()
        .flat_map(|f| [f.fixes_x(), f.fixes_y()])
        .collect()
}

fn assemble_vector_op(mesh: &StructuredTriMesh, local: impl Fn(usize, usize, usize, usize, usize) -> f64) -> CsrMatrix {
    let mut trip = Vec::with_capacity(36 * mesh.num_elements());
    for (e, tri) in mesh.elements().iter().enumerate() {
        for i in 0..3 {
            for a in 0..2 {
                for j in 0..3 {
                    for b in 0..2 {
                        let v = local(e, i, a, j, b);
                        if v != 0.0 {
                            trip.push((vdof(tri[i], a), vdof(tri[j], b), v));
                        }
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(2 * mesh.num_nodes(), &trip)
}

/// Consistent mass on the interleaved vector space, without constraints.
pub fn vector_mass(mesh: &StructuredTriMesh) -> CsrMatrix {
    assemble_vector_op(mesh, |e, i, a, j, b| {
        if a == b {
            local_mass(mesh.geom(e).area, i, j)
        } else {
            0.0
        }
    })
}

/// `(B_h σ, τ) = (rot σ, rot τ) + (div σ, div τ) + (σ, τ)` without constraints.
pub fn op_bh_unconstrained(mesh: &StructuredTriMesh) -> CsrMatrix {
    assemble_vector_op(mesh, |e, i, a, j, b| {
        let g = mesh.geom(e);
        // divergence and rotational of the basis function φ_i e_a
        let div = |k: usize, c: usize| g.grads[k][c];
        let rot = |k: usize, c: usize| if c == 0 { -g.grads[k][1] } else { g.grads[k][0] };
        let mut v = g.area * (div(i, a) * div(j, b) + rot(i, a) * rot(j, b));
        if a == b {
            v += local_mass(g.area, i, j);
        }
        v
    })
}

/// `B_h` with the normal-component DOFs eliminated (identity rows).
pub fn op_bh(mesh: &StructuredTriMesh) -> CsrMatrix {
    let mut b = op_bh_unconstrained(mesh);
    b.constrain_zero(&normal_constraints(mesh));
    b
}

/// Frozen transport field of the convection form.
#[derive(Debug, Clone, Copy)]
pub enum ConvectingField<'a> {
    /// One constant vector per element, e.g. the gradient of a P1 function.
    PerElement(&'a [[f64; 2]]),
    /// A P1 vector field.
    Nodal(&'a VectorField),
}

/// `C(w)_ij = ∫ φ_j w·∇φ_i`, so that `(C u)_i = (u w, ∇φ_i)`.
pub fn convection(mesh: &StructuredTriMesh, w: ConvectingField<'_>) -> Result<CsrMatrix> {
    match w {
        ConvectingField::PerElement(we) => {
            if we.len() != mesh.num_elements() {
                return Err(Error::DimensionMismatch { expected: mesh.num_elements(), got: we.len() });
            }
            Ok(assemble_scalar(mesh, |e, i, _j| {
                let g = mesh.geom(e);
                g.area / 3.0 * (we[e][0] * g.grads[i][0] + we[e][1] * g.grads[i][1])
            }))
        }
        ConvectingField::Nodal(wn) => {
            if wn.len() != mesh.num_nodes() {
                return Err(Error::DimensionMismatch { expected: mesh.num_nodes(), got: wn.len() });
            }
            let elements = mesh.elements();
            Ok(assemble_scalar(mesh, |e, i, j| {
                let g = mesh.geom(e);
                let tri = elements[e];
                (0..3)
                    .map(|k| {
                        let wk = wn.0[tri[k]];
                        (wk[0] * g.grads[i][0] + wk[1] * g.grads[i][1]) * local_mass(g.area, j, k)
                    })
                    .sum()
            }))
        }
    }
}

/// `b_i = (w, ∇φ_i)` for an element-wise constant vector field `w`.
pub fn gradient_load(mesh: &StructuredTriMesh, w: &[[f64; 2]]) -> Result<Vec<f64>> {
    if w.len() != mesh.num_elements() {
        return Err(Error::DimensionMismatch { expected: mesh.num_elements(), got: w.len() });
    }
    let mut b = vec![0.0; mesh.num_nodes()];
    for (e, tri) in mesh.elements().iter().enumerate() {
        let g = mesh.geom(e);
        for i in 0..3 {
            b[tri[i]] += g.area * (w[e][0] * g.grads[i][0] + w[e][1] * g.grads[i][1]);
        }
    }
    Ok(b)
}

/// Interleaved load `b_(k,d) = (u g, φ_k e_d)` with `u` P1 and `g` constant
/// per element, integrated exactly. For a P1 vector field `τ` and `g = ∇w`,
/// `τ·b = (u τ, ∇w)`, the same integral [`convection`] produces.
pub fn weighted_vector_load(mesh: &StructuredTriMesh, u: &ScalarField, g: &[[f64; 2]]) -> Result<Vec<f64>> {
    if u.len() != mesh.num_nodes() {
        return Err(Error::DimensionMismatch { expected: mesh.num_nodes(), got: u.len() });
    }
    if g.len() != mesh.num_elements() {
        return Err(Error::DimensionMismatch { expected: mesh.num_elements(), got: g.len() });
    }
    let mut b = vec![0.0; 2 * mesh.num_nodes()];
    for (e, tri) in mesh.elements().iter().enumerate() {
        let area = mesh.geom(e).area;
        for k in 0..3 {
            let uk: f64 = (0..3).map(|j| u.0[tri[j]] * local_mass(area, j, k)).sum();
            b[vdof(tri[k], 0)] += uk * g[e][0];
            b[vdof(tri[k], 1)] += uk * g[e][1];
        }
    }
    Ok(b)
}

/// Element-wise gradient of a P1 field.
pub fn grad_p1(mesh: &StructuredTriMesh, u: &ScalarField) -> Vec<[f64; 2]> {
    assert_eq!(u.len(), mesh.num_nodes(), "field does not match mesh");
    mesh.elements()
        .iter()
        .enumerate()
        .map(|(e, tri)| {
            let g = mesh.geom(e);
            let mut out = [0.0; 2];
            for i in 0..3 {
                out[0] += u.0[tri[i]] * g.grads[i][0];
                out[1] += u.0[tri[i]] * g.grads[i][1];
            }
            out
        })
        .collect()
}

/// Element averages of the nodal values, i.e. `|K|⁻¹ ∫_K Π^h u`.
pub fn element_means(mesh: &StructuredTriMesh, u: &ScalarField) -> Vec<f64> {
    mesh.elements()
        .iter()
        .map(|tri| (u.0[tri[0]] + u.0[tri[1]] + u.0[tri[2]]) / 3.0)
        .collect()
}

/// `∫ c |w|²` for element-wise constant `c` and `w`.
pub fn weighted_sq_integral(mesh: &StructuredTriMesh, c: &[f64], w: &[[f64; 2]]) -> f64 {
    (0..mesh.num_elements())
        .map(|e| mesh.geom(e).area * c[e] * (w[e][0] * w[e][0] + w[e][1] * w[e][1]))
        .sum()
}
