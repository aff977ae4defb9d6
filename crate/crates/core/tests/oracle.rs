use chemrep_core::fem::{
    convection, gradient_load, grad_p1, weighted_vector_load, ConvectingField, Operators, ScalarField, VectorField,
};
use chemrep_core::{Scheme, StructuredTriMesh};
use chemrep_verify::dense::{max_diff, oracle_step_error, Dense};
use nalgebra::DMatrix;

fn mesh() -> StructuredTriMesh {
    StructuredTriMesh::new(3, 2, 1.5, 1.0).unwrap()
}

fn field(n: usize, seed: usize) -> Vec<f64> {
    (0..n).map(|i| (((i + seed) * 37 % 23) as f64) * 0.1 - 0.7).collect()
}

fn dense_of(a: &chemrep_core::sparse::CsrMatrix) -> DMatrix<f64> {
    let rows = a.to_dense();
    DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])
}

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    (a - b).abs().max() <= 1e-13 * b.abs().max().max(1.0)
}

#[test]
fn scalar_forms_match_quadrature() {
    let m = mesh();
    let d = Dense::new(&m);
    let ops = Operators::new(&m);
    assert!(close(&dense_of(&ops.mass), &d.mass()));
    assert!(close(&dense_of(&ops.stiffness), &d.stiffness()));
    assert!(close(&dense_of(&ops.ah), &(d.stiffness() + d.mass())));
    assert!(max_diff(&ops.lumped, d.lumped().as_slice()) < 1e-15);
}

#[test]
fn vector_forms_match_quadrature() {
    let m = mesh();
    let d = Dense::new(&m);
    let ops = Operators::new(&m);
    assert!(close(&dense_of(&ops.vmass), &d.vec_mass()));
    let fixed = d.normal_dofs();
    assert_eq!(fixed, ops.constraints);
    let b = dense_of(&ops.bh);
    let want = d.bh();
    for i in 0..fixed.len() {
        for j in 0..fixed.len() {
            let w = if fixed[i] || fixed[j] { if i == j { 1.0 } else { 0.0 } } else { want[(i, j)] };
            assert!((b[(i, j)] - w).abs() < 1e-13, "({i}, {j})");
        }
    }
}

#[test]
fn bh_is_spd_on_free_dofs() {
    let m = StructuredTriMesh::new(4, 4, 2.0, 2.0).unwrap();
    let d = Dense::new(&m);
    let fixed = d.normal_dofs();
    let free: Vec<usize> = (0..fixed.len()).filter(|&i| !fixed[i]).collect();
    let b = d.bh();
    let bf = DMatrix::from_fn(free.len(), free.len(), |i, j| b[(free[i], free[j])]);
    let eig = bf.symmetric_eigenvalues();
    // the zero-order term bounds the spectrum below by the smallest mass eigenvalue
    assert!(eig.min() > 0.0);
    let ah = d.stiffness() + d.mass();
    assert!(ah.symmetric_eigenvalues().min() > 0.0);
}

#[test]
fn convection_and_loads_match_quadrature() {
    let m = mesh();
    let d = Dense::new(&m);
    let n = m.num_nodes();
    let v = ScalarField(field(n, 3));
    let gv = grad_p1(&m, &v);
    assert!(max_diff(&gv.concat(), &d.grad(&v.0).concat()) < 1e-13);
    let c = convection(&m, ConvectingField::PerElement(&gv)).unwrap();
    assert!(close(&dense_of(&c), &d.convection_elem(&gv)));

    let s: Vec<[f64; 2]> = (0..n).map(|i| [field(n, 5)[i], field(n, 8)[i]]).collect();
    let cn = convection(&m, ConvectingField::Nodal(&VectorField(s.clone()))).unwrap();
    assert!(close(&dense_of(&cn), &d.convection_nodal(&s)));
    // transport of constants by a gradient field has zero column sums
    let u = ScalarField(field(n, 11));
    let load = gradient_load(&m, &gv).unwrap();
    assert!(max_diff(&load, d.grad_load(&gv).as_slice()) < 1e-13);
    let wl = weighted_vector_load(&m, &u, &gv).unwrap();
    assert!(max_diff(&wl, d.weighted_vec_load(&u.0, &gv).as_slice()) < 1e-13);
}

#[test]
fn convection_rows_sum_to_zero_against_constants() {
    // (1·w, ∇φ_i) summed over i vanishes since Σ φ_i = 1
    let m = mesh();
    let n = m.num_nodes();
    let gv = grad_p1(&m, &ScalarField(field(n, 2)));
    let c = convection(&m, ConvectingField::PerElement(&gv)).unwrap();
    let col_sums = c.transpose().row_sums();
    assert!(col_sums.iter().all(|s| s.abs() < 1e-13), "{col_sums:?}");
}

#[test]
fn one_step_matches_dense_fixed_point() {
    for scheme in Scheme::ALL {
        let err = oracle_step_error(scheme);
        assert!(err <= 1e-9, "{scheme}: {err:e}");
    }
}

