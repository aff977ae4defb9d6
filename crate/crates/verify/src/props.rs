//! Sampled checks of the potential and the element matrices. Each returns a
//! worst residual or a violation count so callers can print or assert it.

use chemrep_core::fem::{grad_p1, ScalarField};
use chemrep_core::lambda_ops::{lambda1, lambda2};
use chemrep_core::{RegularizedPotential, StructuredTriMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PS: [f64; 3] = [1.1, 1.5, 1.9];
pub const EPSS: [f64; 3] = [1e-1, 1e-3, 1e-5];

/// Nodal value in `[-2ε, 2/ε]`, each branch of the potential equally likely.
pub fn sample_value(rng: &mut impl Rng, eps: f64) -> f64 {
    match rng.gen_range(0..3) {
        0 => rng.gen_range(-2.0 * eps..eps),
        1 => (rng.gen_range(eps.ln()..(-eps.ln()))).exp(),
        _ => rng.gen_range(1.0 / eps..2.0 / eps),
    }
}

pub fn random_field(rng: &mut impl Rng, n: usize, eps: f64) -> ScalarField {
    ScalarField((0..n).map(|_| sample_value(rng, eps)).collect())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Worst relative residuals of `Λ¹∇ΠF' = ∇u` and `Λ²∇ΠF' = (p-1)∇ΠF`,
/// taken per element over the vector norm.
pub fn identity_residuals(p: f64, eps: f64, fields: usize, seed: u64) -> (f64, f64) {
    let pot = RegularizedPotential::new(p, eps).unwrap();
    let mesh = StructuredTriMesh::new(8, 8, 2.0, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for _ in 0..fields {
        let u = random_field(&mut rng, mesh.num_nodes(), eps);
        let gu = grad_p1(&mesh, &u);
        let gfp = grad_p1(&mesh, &u.map(|s| pot.f_prime(s)));
        let gf = grad_p1(&mesh, &u.map(|s| pot.f_value(s)));
        let a = lambda1(&pot, &mesh, &u).apply(&gfp);
        let b = lambda2(&pot, &mesh, &u).apply(&gfp);
        for e in 0..mesh.num_elements() {
            let n1 = gu[e][0].hypot(gu[e][1]);
            let t2 = [(p - 1.0) * gf[e][0], (p - 1.0) * gf[e][1]];
            let n2 = t2[0].hypot(t2[1]);
            if n1 > 0.0 {
                r1 = r1.max((a[e][0] - gu[e][0]).hypot(a[e][1] - gu[e][1]) / n1);
            }
            if n2 > 0.0 {
                r2 = r2.max((b[e][0] - t2[0]).hypot(b[e][1] - t2[1]) / n2);
            }
        }
    }
    (r1, r2)
}

/// Λ¹ entries outside `[ε^{2-p}, ε^{p-2}]`, allowing the rounding of the
/// divided difference `|F'| ε_mach / |ΔF'|`.
pub fn spectral_violations(p: f64, eps: f64, fields: usize, seed: u64) -> usize {
    let pot = RegularizedPotential::new(p, eps).unwrap();
    let mesh = StructuredTriMesh::new(8, 8, 2.0, 2.0).unwrap();
    let (lo, hi) = (eps.powf(2.0 - p), eps.powf(p - 2.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..fields {
        let u = random_field(&mut rng, mesh.num_nodes(), eps);
        let l1 = lambda1(&pot, &mesh, &u);
        for (e, tri) in mesh.elements().iter().enumerate() {
            for d in 0..2 {
                let (a, b) = (pot.f_prime(u.0[tri[0]]), pot.f_prime(u.0[tri[d + 1]]));
                let slack = 1e-12 + 4.0 * f64::EPSILON * a.abs().max(b.abs()) / (b - a).abs();
                let x = l1.0[e][d];
                if !(x >= lo * (1.0 - slack) && x <= hi * (1.0 + slack)) {
                    bad += 1;
                }
            }
        }
    }
    bad
}

/// Elements where `‖Λ²(u₁) - Λ²(u₂)‖` exceeds the Lipschitz bound. Half of the
/// pairs are independent fields, half are small perturbations.
pub fn lipschitz_violations(p: f64, eps: f64, fields: usize, seed: u64) -> usize {
    let pot = RegularizedPotential::new(p, eps).unwrap();
    let mesh = StructuredTriMesh::new(8, 8, 2.0, 2.0).unwrap();
    let e2 = eps.powf(2.0 * (p - 2.0));
    let c = 3.0 * e2 * 1f64.max((p - 1.0) * e2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for f in 0..fields {
        let u1 = random_field(&mut rng, mesh.num_nodes(), eps);
        let u2 = if f % 2 == 0 {
            random_field(&mut rng, mesh.num_nodes(), eps)
        } else {
            ScalarField(u1.0.iter().map(|&s| s + rng.gen_range(-1.0..1.0) * 1e-3 * s.abs().max(eps)).collect())
        };
        let (l1, l2) = (lambda2(&pot, &mesh, &u1), lambda2(&pot, &mesh, &u2));
        for (e, &[a0, a1, a2]) in mesh.elements().iter().enumerate() {
            // diagonal difference: the spectral norm is the largest entry
            let norm = (l1.0[e][0] - l2.0[e][0]).abs().max((l1.0[e][1] - l2.0[e][1]).abs());
            let d = |a: usize| (u1.0[a] - u2.0[a]).abs();
            let bound = c * (d(a1) + d(a0)).max(d(a2) + d(a0));
            if norm > bound * (1.0 + 1e-12) {
                bad += 1;
            }
        }
    }
    bad
}

/// Per gap `10^-k` (k = 4..12), the largest ratio between the change of the
/// Λ entries from the derivative limit and the expected size of that change:
/// first order in the gap plus the rounding of the divided differences.
pub fn continuity_gap(p: f64, eps: f64) -> Vec<(i32, f64)> {
    let pot = RegularizedPotential::new(p, eps).unwrap();
    let mesh = StructuredTriMesh::new(1, 1, 1.0, 1.0).unwrap();
    let [a0, a1, _] = mesh.elements()[0];
    (4..=12)
        .map(|k| {
            let worst = [0.5 * eps, 0.3, 1.0, 0.5 / eps]
                .iter()
                .map(|&base| {
                    let gap = 10f64.powi(-k) * base.max(1.0);
                    let mut u = ScalarField::constant(4, base);
                    let flat = (lambda1(&pot, &mesh, &u).0[0][0], lambda2(&pot, &mesh, &u).0[0][0]);
                    u.0[a1] = u.0[a0] + gap;
                    let l1 = lambda1(&pot, &mesh, &u).0[0][0];
                    let l2 = lambda2(&pot, &mesh, &u).0[0][0];
                    let (f, f1, f2) = (pot.f_value(base), pot.f_prime(base), pot.f_second(base));
                    let truncation = 2.0 * gap * (1.0 / base + f2 / f1);
                    let rounding = 4.0 * f64::EPSILON * (f1 / (f2 * gap) + f / (f1 * gap));
                    rel(l1, flat.0).max(rel(l2, flat.1)) / (truncation + rounding)
                })
                .fold(0.0, f64::max);
            (k, worst)
        })
        .collect()
}

fn ulp_neighbours(b: f64) -> (f64, f64) {
    (f64::from_bits(b.to_bits() - 1), f64::from_bits(b.to_bits() + 1))
}

/// Largest relative jump of `F`, `F'`, `F''` across the breakpoints `ε` and `1/ε`.
pub fn c2_jump(p: f64, eps: f64) -> f64 {
    let pot = RegularizedPotential::new(p, eps).unwrap();
    let mut worst = 0.0f64;
    for b in [eps, 1.0 / eps] {
        let (lo, hi) = ulp_neighbours(b);
        let fs: [&dyn Fn(f64) -> f64; 3] = [&|s| pot.f_value(s), &|s| pot.f_prime(s), &|s| pot.f_second(s)];
        for f in fs {
            let scale = f(b).abs().max(1.0);
            worst = worst.max((f(hi) - f(lo)).abs() / scale).max((f(b) - f(lo)).abs() / scale);
        }
    }
    worst
}

/// `10⁴`-point grid: half uniform on `[-2, ε]`, half geometric on `(ε, 2/ε]`.
pub fn s_grid(eps: f64) -> Vec<f64> {
    let low = (0..5000).map(move |i| -2.0 + (2.0 + eps) * i as f64 / 4999.0);
    let r = (2.0 / eps / eps).ln();
    let high = (1..=5000).map(move |i| eps * (r * i as f64 / 5000.0).exp());
    low.chain(high).collect()
}

/// Violations of `F ≥ ε^{p-2}s²/4` for `s ≤ ε` and `F ≥ s^p/(p(p-1))` for `s > ε`.
pub fn lower_bound_violations(p: f64, eps: f64) -> usize {
    let pot = RegularizedPotential::new(p, eps).unwrap();
    s_grid(eps)
        .into_iter()
        .filter(|&s| {
            let f = pot.f_value(s);
            let lower = if s <= eps { eps.powf(p - 2.0) * s * s / 4.0 } else { s.powf(p) / (p * (p - 1.0)) };
            f < lower * (1.0 - 1e-14)
        })
        .count()
}

/// Violations of `|s|^p ≤ K₁F(s) + K₂` with `K₁ = 4p(p-1)`, `K₂ = 1`.
pub fn growth_violations(p: f64, eps: f64) -> usize {
    let pot = RegularizedPotential::new(p, eps).unwrap();
    s_grid(eps)
        .into_iter()
        .filter(|&s| s.abs().powf(p) > 4.0 * p * (p - 1.0) * pot.f_value(s) + 1.0)
        .count()
}

/// Error of `F` and `F'` against a trapezoid integration of `F''` anchored at
/// `F'(1) = 1/(p-1)` and the closed-form `F(1)`, relative to
/// `max(|F(s)|, |F(1)|)` (and likewise for `F'`): near the minimum of `F` the
/// cancellation against the anchor alone exceeds a pointwise relative bound.
/// The step is `10⁻⁵ max(|s|, ε)`, which resolves `s^{p-2}` near the origin.
pub fn integration_error(p: f64, eps: f64) -> f64 {
    let pot = RegularizedPotential::new(p, eps).unwrap();
    let fp1 = 1.0 / (p - 1.0);
    let f1 = 1.0 / (p * (p - 1.0)) + pot.middle_constant() * eps.powf(p);
    let mut worst = 0.0f64;
    let mut check = |s: f64, fp: f64, f: f64| {
        let e1 = (fp - pot.f_prime(s)).abs() / pot.f_prime(s).abs().max(fp1);
        let e0 = (f - pot.f_value(s)).abs() / pot.f_value(s).abs().max(f1);
        worst = worst.max(e0).max(e1);
    };
    let h = 1e-5;
    for end in [-2.0, 2.0 / eps] {
        let dir: f64 = if end < 1.0 { -1.0 } else { 1.0 };
        let (mut s, mut fp, mut f) = (1.0f64, fp1, f1);
        let mut i = 0usize;
        while dir * (end - s) > 0.0 {
            let step = dir * (h * s.abs().max(eps)).min(dir * (end - s));
            let fp_next = fp + 0.5 * step * (pot.f_second(s) + pot.f_second(s + step));
            f += 0.5 * step * (fp + fp_next);
            fp = fp_next;
            s += step;
            i += 1;
            if i % 97 == 0 {
                check(s, fp, f);
            }
        }
        check(s, fp, f);
    }
    worst
}
