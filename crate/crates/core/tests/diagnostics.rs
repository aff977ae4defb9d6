use chemrep_core::diagnostics::{
    energy_exact, energy_modified, mass, min_nodal, residual_re, LaplacianNorm, RunRecord,
};
use chemrep_core::fem::{grad_p1, integrate, ScalarField};
use chemrep_core::presets::IcPreset;
use chemrep_core::Scheme;
use chemrep_verify::dense::Dense;
use chemrep_verify::runs::{run_with, RunSettings};

fn simpson_2d(f: impl Fn(f64, f64) -> f64, n: usize) -> f64 {
    let h = 2.0 / n as f64;
    let w = |i: usize| if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
    let mut sum = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            sum += w(i) * w(j) * f(i as f64 * h, j as f64 * h);
        }
    }
    sum * h * h / 9.0
}

#[test]
fn initial_mass_matches_fine_quadrature() {
    let exact = simpson_2d(|x, y| IcPreset::Gauss.u0(x, y), 1600);
    for nx in [20, 40] {
        let s = RunSettings::new(nx, 1.5, 1e-3, 1e-3, 0);
        let sim = s.simulator(Scheme::Uv);
        let st = sim.init_preset(&IcPreset::Gauss).unwrap();
        // the lumped L² projection keeps ∫u₀ up to the element quadrature error
        let m = mass(sim.ops(), &st.u);
        assert!((m - exact).abs() <= 1e-6 * exact, "nx={nx}: {m} vs {exact}");
        assert!((m - integrate(sim.mesh(), |x, y| IcPreset::Gauss.u0(x, y))).abs() <= 1e-12 * exact);
    }
}

#[test]
fn gauss_minimum_at_centre() {
    let s = RunSettings::new(20, 1.5, 1e-3, 1e-3, 0);
    let sim = s.simulator(Scheme::Uv);
    let u = ScalarField(sim.mesh().nodes().iter().map(|p| IcPreset::Gauss.u0(p[0], p[1])).collect());
    assert!((min_nodal(&u) - 1e-4).abs() < 1e-12);
}

#[test]
fn residual_terms_recompute_independently() {
    let p = 1.4;
    let s = RunSettings::new(6, p, 1e-3, 1e-3, 3);
    run_with(Scheme::Uv, IcPreset::Cosine, &s, |sim, prev, curr| {
        let solver = sim.config().solver;
        let t = residual_re(
            sim.mesh(),
            sim.ops(),
            p,
            s.dt,
            (&prev.u, &prev.v),
            (&curr.u, &curr.v),
            LaplacianNorm::Lumped,
            &solver,
        )
        .unwrap();
        let d = Dense::new(sim.mesh());
        let dl = d.lumped();
        let stiff = d.stiffness();
        let ee = |u: &ScalarField, v: &ScalarField| {
            let cells: f64 = u.0.iter().enumerate().map(|(i, x)| dl[i] * x.max(0.0).powf(p)).sum();
            let vv = nalgebra::DVector::from_column_slice(&v.0);
            cells / (p - 1.0) + 0.5 * vv.dot(&(&stiff * &vv))
        };
        let rate = (ee(&curr.u, &curr.v) - ee(&prev.u, &prev.v)) / s.dt;
        let g = d.grad(&curr.u.0.iter().map(|x| x.max(0.0).powf(p / 2.0)).collect::<Vec<_>>());
        let diss: f64 = g.iter().zip(&d.area).map(|(g, a)| a * (g[0] * g[0] + g[1] * g[1])).sum::<f64>() * 4.0 / p;
        let vv = nalgebra::DVector::from_column_slice(&curr.v.0);
        let sv = &stiff * &vv;
        let lap: f64 = sv.iter().zip(dl.iter()).map(|(s, d)| s * s / d).sum();
        let grad = vv.dot(&sv);
        let sum = rate + diss + lap + grad;
        for (a, b) in [(t.energy_rate, rate), (t.cell_dissipation, diss), (t.laplacian, lap), (t.gradient, grad)] {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} {b}");
        }
        assert!((t.total() - sum).abs() <= 1e-12 * sum.abs().max(t.energy_rate.abs()).max(1.0));
    })
    .unwrap();
}

#[test]
fn consistent_laplacian_uses_mass_solve() {
    let s = RunSettings::new(6, 1.4, 1e-3, 1e-3, 1);
    run_with(Scheme::Uv, IcPreset::Cosine, &s, |sim, prev, curr| {
        let solver = sim.config().solver;
        let args = |n| {
            residual_re(sim.mesh(), sim.ops(), 1.4, s.dt, (&prev.u, &prev.v), (&curr.u, &curr.v), n, &solver).unwrap()
        };
        let (c, l) = (args(LaplacianNorm::Consistent), args(LaplacianNorm::Lumped));
        let d = Dense::new(sim.mesh());
        let vv = nalgebra::DVector::from_column_slice(&curr.v.0);
        let m = d.mass();
        let w = m.clone().lu().solve(&(d.stiffness() * &vv)).unwrap();
        let want = w.dot(&(&m * &w));
        assert!((c.laplacian - want).abs() <= 1e-8 * want);
        assert_eq!(c.energy_rate, l.energy_rate);
        eprintln!("laplacian norms: consistent {} lumped {}", c.laplacian, l.laplacian);
    })
    .unwrap();
}

#[test]
fn exact_and_modified_energy_agree_for_uv() {
    let s = RunSettings::new(6, 1.5, 1e-3, 1e-3, 2);
    run_with(Scheme::Uv, IcPreset::Gauss, &s, |sim, _, curr| {
        let a = energy_modified(sim, curr);
        let b = energy_exact(sim.ops(), 1.5, &curr.u, &curr.v);
        assert_eq!(a, b);
    })
    .unwrap();
}

#[test]
fn records_are_finite_and_ordered() {
    let s = RunSettings::new(6, 1.5, 1e-3, 1e-3, 3);
    let sim = s.simulator(Scheme::UsEps);
    let mut st = sim.init_preset(&IcPreset::Cosine).unwrap();
    let first = RunRecord::new(&sim, None, &st, None).unwrap();
    assert!(first.residual_re.is_none() && first.is_finite());
    for n in 1..=3 {
        let (next, rep) = sim.step(&st).unwrap();
        let rec = RunRecord::new(&sim, Some(&st), &next, Some(&rep)).unwrap();
        assert_eq!(rec.step, n);
        assert!(rec.residual_re.is_some() && rec.is_finite());
        assert!(rec.picard_iters >= 1);
        st = next;
    }
    let _ = grad_p1(sim.mesh(), &st.u);
}
