//! Interpolation and projection operators onto the P1 spaces.

use super::assembly::{consistent_mass, local_mass, lumped_weights, normal_constraints, op_ah, vector_mass};
use super::field::{vdof, ScalarField, VectorField};
use super::quadrature::{degree5, to_cartesian};
use crate::error::{Error, Result};
use crate::linsolve::{solve_spd, SolverConfig};
use crate::mesh::StructuredTriMesh;

/// Lagrange interpolation `Π^h g`.
pub fn interp(mesh: &StructuredTriMesh, g: impl Fn(f64, f64) -> f64) -> ScalarField {
    ScalarField(mesh.nodes().iter().map(|p| g(p[0], p[1])).collect())
}

/// Load vector `b_i = ∫ g φ_i` by the degree-5 element rule.
pub fn function_load(mesh: &StructuredTriMesh, g: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let rule = degree5();
    let mut b = vec![0.0; mesh.num_nodes()];
    for (e, tri) in mesh.elements().iter().enumerate() {
        let area = mesh.element_geometry(e).expect("valid element").area;
        let verts = tri.map(|a| mesh.nodes()[a]);
        for (bary, w) in &rule {
            let [x, y] = to_cartesian(bary, &verts);
            let gv = g(x, y) * w * area;
            for i in 0..3 {
                b[tri[i]] += gv * bary[i];
            }
        }
    }
    b
}

/// `∫ g` by the degree-5 element rule.
pub fn integrate(mesh: &StructuredTriMesh, g: impl Fn(f64, f64) -> f64) -> f64 {
    function_load(mesh, g).iter().sum()
}

/// Source data for `Q^h`.
pub enum L2Source<'a> {
    Field(&'a ScalarField),
    Function(&'a dyn Fn(f64, f64) -> f64),
}

/// L² projection with respect to the lumped product: `(Q^h u, w)^h = (u, w)`.
pub fn project_qh(mesh: &StructuredTriMesh, src: L2Source<'_>) -> Result<ScalarField> {
    let b = match src {
        L2Source::Field(u) => {
            if u.len() != mesh.num_nodes() {
                return Err(Error::DimensionMismatch { expected: mesh.num_nodes(), got: u.len() });
            }
            consistent_mass(mesh).mul_vec(&u.0)
        }
        L2Source::Function(g) => function_load(mesh, g),
    };
    let d = lumped_weights(mesh);
    Ok(ScalarField(b.iter().zip(&d).map(|(bi, di)| bi / di).collect()))
}

/// L² projection of an element-wise constant vector field onto the P1 vector
/// space with `σ·n = 0`.
pub fn project_qh_vec(mesh: &StructuredTriMesh, w: &[[f64; 2]], cfg: &SolverConfig) -> Result<VectorField> {
    if w.len() != mesh.num_elements() {
        return Err(Error::DimensionMismatch { expected: mesh.num_elements(), got: w.len() });
    }
    let fixed = normal_constraints(mesh);
    let mut b = vec![0.0; 2 * mesh.num_nodes()];
    for (e, tri) in mesh.elements().iter().enumerate() {
        let area = mesh.element_geometry(e)?.area;
        for &a in tri {
            b[vdof(a, 0)] += w[e][0] * area / 3.0;
            b[vdof(a, 1)] += w[e][1] * area / 3.0;
        }
    }
    project_vec_load(mesh, b, &fixed, cfg)
}

/// Constrained L² projection of a P1 vector field (used to check idempotence).
pub fn project_qh_vec_nodal(mesh: &StructuredTriMesh, s: &VectorField, cfg: &SolverConfig) -> Result<VectorField> {
    if s.len() != mesh.num_nodes() {
        return Err(Error::DimensionMismatch { expected: mesh.num_nodes(), got: s.len() });
    }
    let b = vector_mass(mesh).mul_vec(&s.to_dofs());
    project_vec_load(mesh, b, &normal_constraints(mesh), cfg)
}

fn project_vec_load(mesh: &StructuredTriMesh, mut b: Vec<f64>, fixed: &[bool], cfg: &SolverConfig) -> Result<VectorField> {
    let mut m = vector_mass(mesh);
    m.constrain_zero(fixed);
    for (bi, &f) in b.iter_mut().zip(fixed) {
        if f {
            *bi = 0.0;
        }
    }
    let sol = solve_spd(&m, &b, None, cfg)?;
    Ok(VectorField::from_dofs(&sol.x))
}

/// H¹ projection `(∇R^h v, ∇w) + (R^h v, w) = (∇v, ∇w) + (v, w)`.
pub fn project_rh(
    mesh: &StructuredTriMesh,
    v: impl Fn(f64, f64) -> f64,
    grad_v: impl Fn(f64, f64) -> [f64; 2],
    cfg: &SolverConfig,
) -> Result<ScalarField> {
    let rule = degree5();
    let mut b = vec![0.0; mesh.num_nodes()];
    for (e, tri) in mesh.elements().iter().enumerate() {
        let g = mesh.element_geometry(e)?;
        let verts = tri.map(|a| mesh.nodes()[a]);
        for (bary, w) in &rule {
            let [x, y] = to_cartesian(bary, &verts);
            let wa = w * g.area;
            let val = v(x, y);
            let gr = grad_v(x, y);
            for i in 0..3 {
                b[tri[i]] += wa * (val * bary[i] + gr[0] * g.grads[i][0] + gr[1] * g.grads[i][1]);
            }
        }
    }
    let a = op_ah(mesh);
    let sol = solve_spd(&a, &b, None, cfg)?;
    Ok(ScalarField(sol.x))
}

/// `R^h` of a P1 field; the right-hand side is exactly `A_h v`.
pub fn project_rh_field(mesh: &StructuredTriMesh, v: &ScalarField, cfg: &SolverConfig) -> Result<ScalarField> {
    let a = op_ah(mesh);
    let b = a.apply(&v.0)?;
    Ok(ScalarField(solve_spd(&a, &b, Some(&v.0), cfg)?.x))
}

/// `‖u‖₀` of a P1 field.
pub fn l2_norm(mesh: &StructuredTriMesh, u: &ScalarField) -> f64 {
    let mut acc = 0.0;
    for (e, tri) in mesh.elements().iter().enumerate() {
        let area = mesh.element_geometry(e).expect("valid element").area;
        for i in 0..3 {
            for j in 0..3 {
                acc += u.0[tri[i]] * u.0[tri[j]] * local_mass(area, i, j);
            }
        }
    }
    acc.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assembly::grad_p1;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn interpolation_is_nodal() {
        let mesh = StructuredTriMesh::new(3, 2, 1.0, 1.0).unwrap();
        let u = interp(&mesh, |x, y| 2.0 * x - y + 0.5);
        // interpolating the P1 field itself returns the same coefficients
        let again = interp(&mesh, |x, y| {
            let e = mesh.nodes().iter().position(|p| p[0] == x && p[1] == y).unwrap();
            u.0[e]
        });
        assert_eq!(u, again);
        let c = interp(&mesh, |_, _| 3.0);
        assert!(c.0.iter().all(|&x| x == 3.0));
        let sq = interp(&mesh, |x, y| (2.0 * x - y + 0.5).powi(2));
        for (a, b) in sq.0.iter().zip(&u.0) {
            assert!((a - b * b).abs() < 1e-14);
        }
    }

    #[test]
    fn qh_preserves_constants_and_mass() {
        let mesh = StructuredTriMesh::new(5, 4, 2.0, 2.0).unwrap();
        let c = project_qh(&mesh, L2Source::Function(&|_, _| 1.7)).unwrap();
        assert!(c.0.iter().all(|&x| (x - 1.7).abs() < 1e-13));
        let u = ScalarField((0..mesh.num_nodes()).map(|i| ((i * 7919) % 13) as f64 * 0.1).collect());
        let q = project_qh(&mesh, L2Source::Field(&u)).unwrap();
        let d = lumped_weights(&mesh);
        let mass_q: f64 = q.0.iter().zip(&d).map(|(a, b)| a * b).sum();
        let mass_u: f64 = consistent_mass(&mesh).row_sums().iter().zip(&u.0).map(|(a, b)| a * b).sum();
        assert!((mass_q - mass_u).abs() < 1e-13);
    }

    #[test]
    fn qh_hat_on_unit_square() {
        // dense oracle: D⁻¹ M e_corner with M, D assembled by hand
        let mesh = StructuredTriMesh::new(1, 1, 1.0, 1.0).unwrap();
        let mut e1 = ScalarField::zeros(4);
        e1.0[1] = 1.0; // SE corner belongs only to the first triangle
        let q = project_qh(&mesh, L2Source::Field(&e1)).unwrap();
        let k = 0.5 / 12.0;
        let m_col = [k, 2.0 * k, 0.0, k];
        let d = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0];
        for i in 0..4 {
            assert!((q.0[i] - m_col[i] / d[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn vector_projection_idempotent_and_orthogonal() {
        let mesh = StructuredTriMesh::new(4, 3, 2.0, 1.0).unwrap();
        let v = interp(&mesh, |x, y| (x * y).sin() + x * x);
        let g = grad_p1(&mesh, &v);
        let s = project_qh_vec(&mesh, &g, &cfg()).unwrap();
        let fixed = normal_constraints(&mesh);
        let dofs = s.to_dofs();
        for (d, &f) in dofs.iter().zip(&fixed) {
            if f {
                assert_eq!(*d, 0.0);
            }
        }
        let again = project_qh_vec_nodal(&mesh, &s, &cfg()).unwrap();
        for (a, b) in again.to_dofs().iter().zip(&dofs) {
            assert!((a - b).abs() < 1e-11);
        }
        // residual (σ - ∇v, τ) vanishes for every admissible τ
        let mut b = vec![0.0; 2 * mesh.num_nodes()];
        for (e, tri) in mesh.elements().iter().enumerate() {
            let area = mesh.element_geometry(e).unwrap().area;
            for &a in tri {
                b[vdof(a, 0)] += g[e][0] * area / 3.0;
                b[vdof(a, 1)] += g[e][1] * area / 3.0;
            }
        }
        let ms = vector_mass(&mesh).mul_vec(&dofs);
        for i in 0..b.len() {
            if !fixed[i] {
                assert!((ms[i] - b[i]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn rh_reproduces_p1_and_constants() {
        let mesh = StructuredTriMesh::new(4, 4, 1.0, 1.0).unwrap();
        let c = project_rh(&mesh, |_, _| 2.0, |_, _| [0.0, 0.0], &cfg()).unwrap();
        assert!(c.0.iter().all(|&x| (x - 2.0).abs() < 1e-11));
        let lin = project_rh(&mesh, |x, y| 1.0 + x - 2.0 * y, |_, _| [1.0, -2.0], &cfg()).unwrap();
        let exact = interp(&mesh, |x, y| 1.0 + x - 2.0 * y);
        for (a, b) in lin.0.iter().zip(&exact.0) {
            assert!((a - b).abs() < 1e-11);
        }
        let rf = project_rh_field(&mesh, &exact, &cfg()).unwrap();
        for (a, b) in rf.0.iter().zip(&exact.0) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn rh_error_decreases_under_refinement() {
        use std::f64::consts::PI;
        let v = |x: f64, y: f64| (PI * x).cos() * (PI * y).cos();
        let gv = |x: f64, y: f64| [-PI * (PI * x).sin() * (PI * y).cos(), -PI * (PI * x).cos() * (PI * y).sin()];
        let mut errs = Vec::new();
        for n in [4, 8, 16] {
            let mesh = StructuredTriMesh::new(n, n, 1.0, 1.0).unwrap();
            let r = project_rh(&mesh, v, gv, &cfg()).unwrap();
            // ‖R^h v - v‖₀ via the degree-5 rule on each element
            let rule = degree5();
            let mut err = 0.0;
            for (e, tri) in mesh.elements().iter().enumerate() {
                let area = mesh.element_geometry(e).unwrap().area;
                let verts = tri.map(|a| mesh.nodes()[a]);
                for (bary, w) in &rule {
                    let [x, y] = to_cartesian(bary, &verts);
                    let rh: f64 = (0..3).map(|i| bary[i] * r.0[tri[i]]).sum();
                    err += w * area * (rh - v(x, y)).powi(2);
                }
            }
            errs.push(err.sqrt());
        }
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn lumped_and_consistent_norms_are_equivalent() {
        // extreme ratios |u|_h / ‖u‖₀ from the generalized eigenproblem (M, D)
        let mut bands = Vec::new();
        for n in [4, 8, 16] {
            let mesh = StructuredTriMesh::new(n, n, 2.0, 2.0).unwrap();
            let d = lumped_weights(&mesh);
            let m = consistent_mass(&mesh).to_dense();
            let k = d.len();
            let scaled = nalgebra::DMatrix::from_fn(k, k, |i, j| m[i][j] / (d[i] * d[j]).sqrt());
            let eig = scaled.symmetric_eigenvalues();
            let (emin, emax) = eig.iter().fold((f64::INFINITY, 0.0f64), |a, &e| (a.0.min(e), a.1.max(e)));
            bands.push((1.0 / emax.sqrt(), 1.0 / emin.sqrt()));
        }
        for &(c, big_c) in &bands {
            assert!((c - 1.0).abs() < 1e-12);
            assert!(big_c > 1.0 && big_c < 2.5);
        }
        let hs: Vec<f64> = bands.iter().map(|b| b.1).collect();
        let spread = hs.iter().cloned().fold(0.0, f64::max) / hs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread <= 1.1, "{bands:?}");

        // random fields stay inside the band
        let mesh = StructuredTriMesh::new(8, 8, 2.0, 2.0).unwrap();
        let d = lumped_weights(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let u = ScalarField((0..mesh.num_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let lumped: f64 = u.0.iter().zip(&d).map(|(a, b)| a * a * b).sum::<f64>().sqrt();
            let r = lumped / l2_norm(&mesh, &u);
            assert!(r >= 1.0 - 1e-12 && r <= bands[1].1 + 1e-12);
        }
    }

    #[test]
    fn interpolated_square_dominates_square_of_interpolant() {
        let mesh = StructuredTriMesh::new(6, 6, 2.0, 2.0).unwrap();
        let u = interp(&mesh, |x, y| (3.0 * x).sin() - y);
        let u2 = u.map(|x| x * x);
        let lhs = l2_norm(&mesh, &u).powi(2);
        let rhs: f64 = consistent_mass(&mesh).row_sums().iter().zip(&u2.0).map(|(a, b)| a * b).sum();
        assert!(lhs <= rhs);
    }
}
