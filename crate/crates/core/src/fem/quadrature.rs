//! Symmetric 7-point triangle rule, exact for polynomials of degree 5.

use crate::mesh::Point;

/// Barycentric points and weights (weights sum to one).
pub fn degree5() -> [([f64; 3], f64); 7] {
    let r = 15f64.sqrt();
    let (a1, b1, w1) = ((9.0 - 2.0 * r) / 21.0, (6.0 + r) / 21.0, (155.0 + r) / 1200.0);
    let (a2, b2, w2) = ((9.0 + 2.0 * r) / 21.0, (6.0 - r) / 21.0, (155.0 - r) / 1200.0);
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 9.0 / 40.0),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
}

pub fn to_cartesian(bary: &[f64; 3], verts: &[Point; 3]) -> Point {
    [
        bary[0] * verts[0][0] + bary[1] * verts[1][0] + bary[2] * verts[2][0],
        bary[0] * verts[0][1] + bary[1] * verts[1][1] + bary[2] * verts[2][1],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_monomials_on_reference_triangle() {
        // ∫ x^a y^b over the unit right triangle = a! b! / (a + b + 2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let q: f64 = degree5()
                    .iter()
                    .map(|(bc, w)| {
                        let [x, y] = to_cartesian(bc, &verts);
                        w * 0.5 * x.powi(a as i32) * y.powi(b as i32)
                    })
                    .sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((q - exact).abs() < 1e-14, "x^{a} y^{b}: {q} vs {exact}");
            }
        }
    }
}
