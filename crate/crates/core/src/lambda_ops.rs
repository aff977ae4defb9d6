//! Element-wise matrices realizing the discrete chain rules
//!
//! ```text
//! Λ¹(u) ∇Π^h F'(u) = ∇u
//! Λ²(u) ∇Π^h F'(u) = (p-1) ∇Π^h F(u)
//! ```
//!
//! On a right-angled element with axis-aligned legs `a0 -> a1` (x) and
//! `a0 -> a2` (y), the gradient of a P1 function is the pair of leg difference
//! quotients, so both matrices are diagonal in the global frame with one 1D
//! divided difference per leg.

use crate::fem::ScalarField;
use crate::mesh::StructuredTriMesh;
use crate::regularization::RegularizedPotential;

/// Diagonal entries `(Λ_xx, Λ_yy)` of one symmetric 2x2 matrix per element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrixField(pub Vec<[f64; 2]>);

impl ElementMatrixField {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Applies the element matrices to one vector per element.
    pub fn apply(&self, w: &[[f64; 2]]) -> Vec<[f64; 2]> {
        self.0
            .iter()
            .zip(w)
            .map(|(l, g)| [l[0] * g[0], l[1] * g[1]])
            .collect()
    }
}

/// Values closer than this (relative to `max(1, |u(a0)|)`) use the derivative
/// branch instead of the divided difference.
const EQUAL_TOL: f64 = 1e-12;

fn leg_entry(a: f64, b: f64, quotient: impl Fn(f64, f64) -> f64, limit: impl Fn(f64) -> f64) -> f64 {
    if (b - a).abs() > EQUAL_TOL * a.abs().max(1.0) {
        let q = quotient(a, b);
        if q.is_finite() {
            return q;
        }
    }
    limit(a)
}

fn build(
    mesh: &StructuredTriMesh,
    u: &ScalarField,
    quotient: impl Fn(f64, f64) -> f64,
    limit: impl Fn(f64) -> f64,
) -> ElementMatrixField {
    assert_eq!(u.len(), mesh.num_nodes(), "field does not match mesh");
    ElementMatrixField(
        mesh.elements()
            .iter()
            .map(|&[a0, a1, a2]| {
                let (u0, u1, u2) = (u.0[a0], u.0[a1], u.0[a2]);
                [
                    leg_entry(u0, u1, &quotient, &limit),
                    leg_entry(u0, u2, &quotient, &limit),
                ]
            })
            .collect(),
    )
}

/// `Λ¹_ε(u)`: per leg `(u_i - u_0) / (F'(u_i) - F'(u_0))`, or `1/F''(u_0)`.
pub fn lambda1(pot: &RegularizedPotential, mesh: &StructuredTriMesh, u: &ScalarField) -> ElementMatrixField {
    build(
        mesh,
        u,
        |a, b| (b - a) / (pot.f_prime(b) - pot.f_prime(a)),
        |a| 1.0 / pot.f_second(a),
    )
}

/// `Λ²_ε(u)`: per leg `(p-1)(F(u_i) - F(u_0)) / (F'(u_i) - F'(u_0))`, or `a_ε(u_0)`.
pub fn lambda2(pot: &RegularizedPotential, mesh: &StructuredTriMesh, u: &ScalarField) -> ElementMatrixField {
    let pm1 = pot.p() - 1.0;
    build(
        mesh,
        u,
        |a, b| pm1 * (pot.f_value(b) - pot.f_value(a)) / (pot.f_prime(b) - pot.f_prime(a)),
        |a| pot.a_eps(a),
    )
}

/// Partial derivatives of the `Λ²_ε(u)` leg entries with respect to the nodal
/// values: per element `[[∂/∂u(a0), ∂/∂u(a1)], [∂/∂u(a0), ∂/∂u(a2)]]`,
/// by central differences.
pub fn lambda2_jacobian(pot: &RegularizedPotential, mesh: &StructuredTriMesh, u: &ScalarField) -> Vec<[[f64; 2]; 2]> {
    assert_eq!(u.len(), mesh.num_nodes(), "field does not match mesh");
    let pm1 = pot.p() - 1.0;
    let entry = |a: f64, b: f64| {
        leg_entry(
            a,
            b,
            |a, b| pm1 * (pot.f_value(b) - pot.f_value(a)) / (pot.f_prime(b) - pot.f_prime(a)),
            |a| pot.a_eps(a),
        )
    };
    let d = |f: &dyn Fn(f64) -> f64, x: f64| {
        let h = 1e-4 * x.abs().max(1.0);
        (f(x + h) - f(x - h)) / (2.0 * h)
    };
    let leg = |a: f64, b: f64| [d(&|t| entry(t, b), a), d(&|t| entry(a, t), b)];
    mesh.elements()
        .iter()
        .map(|&[a0, a1, a2]| {
            let (u0, u1, u2) = (u.0[a0], u.0[a1], u.0[a2]);
            [leg(u0, u1), leg(u0, u2)]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::grad_p1;

    fn mesh() -> StructuredTriMesh {
        StructuredTriMesh::new(1, 1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_field_gives_identity() {
        let pot = RegularizedPotential::new(1.5, 0.01).unwrap();
        let m = mesh();
        let u = ScalarField::constant(4, 1.0);
        for l in [lambda1(&pot, &m, &u), lambda2(&pot, &m, &u)] {
            for e in &l.0 {
                assert!((e[0] - 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn divided_differences_on_middle_branch() {
        // first element is [SE, SW, NE] = nodes [1, 0, 3]; put u(a0) = 1, u(a1) = 4
        let pot = RegularizedPotential::new(1.5, 0.01).unwrap();
        let m = mesh();
        let u = ScalarField(vec![4.0, 1.0, 0.0, 1.0]);
        let l1 = lambda1(&pot, &m, &u);
        let l2 = lambda2(&pot, &m, &u);
        assert!((l1.0[0][0] - 1.5).abs() < 1e-13);
        assert!((l2.0[0][0] - 7.0 / 3.0).abs() < 1e-13);
        // the y leg has equal values: derivative branch
        assert!((l1.0[0][1] - 1.0).abs() < 1e-15);
        assert!((l2.0[0][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chain_rules_hold_per_element() {
        let pot = RegularizedPotential::new(1.3, 1e-3).unwrap();
        let m = StructuredTriMesh::new(4, 3, 2.0, 1.0).unwrap();
        let u = ScalarField((0..m.num_nodes()).map(|i| ((i * 31) % 17) as f64 * 0.2 - 0.5).collect());
        let gu = grad_p1(&m, &u);
        let gfp = grad_p1(&m, &u.map(|s| pot.f_prime(s)));
        let gf = grad_p1(&m, &u.map(|s| pot.f_value(s)));
        let r1 = lambda1(&pot, &m, &u).apply(&gfp);
        let r2 = lambda2(&pot, &m, &u).apply(&gfp);
        for e in 0..m.num_elements() {
            for d in 0..2 {
                assert!((r1[e][d] - gu[e][d]).abs() <= 1e-12 * gu[e][d].abs().max(1.0));
                let target = (pot.p() - 1.0) * gf[e][d];
                assert!((r2[e][d] - target).abs() <= 1e-12 * target.abs().max(1.0));
            }
        }
    }

    #[test]
    fn jacobian_on_middle_branch() {
        // a_ε(s) = s in the middle branch, so equal values give derivative ½ per node
        let pot = RegularizedPotential::new(1.5, 1e-3).unwrap();
        let m = mesh();
        let j = lambda2_jacobian(&pot, &m, &ScalarField::constant(4, 2.0));
        for leg in j[0].iter().chain(j[1].iter()) {
            assert!((leg[0] - 0.5).abs() < 1e-6 && (leg[1] - 0.5).abs() < 1e-6, "{leg:?}");
        }
    }
}
