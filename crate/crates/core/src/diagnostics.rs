//! Energies, energy-law balances, the residual `RE` and per-step records.

use crate::error::{Error, Result};
use crate::fem::{element_means, grad_p1, weighted_sq_integral, Operators, ScalarField};
use crate::linsolve::{solve_spd, SolverConfig};
use crate::mesh::StructuredTriMesh;
use crate::schemes::{PicardReport, Scheme, SchemeState, Simulator};

fn pos_pow(s: f64, r: f64) -> f64 {
    if s > 0.0 {
        s.powf(r)
    } else {
        0.0
    }
}

/// `(u, 1)^h`
pub fn mass(ops: &Operators, u: &ScalarField) -> f64 {
    ops.lumped.iter().zip(&u.0).map(|(d, x)| d * x).sum()
}

pub fn min_nodal(field: &ScalarField) -> f64 {
    field.min()
}

/// `‖Π^h u₋‖₀` with `u₋ = min(u, 0)`.
pub fn negative_part_norm(ops: &Operators, u: &ScalarField) -> f64 {
    ops.l2_sq(&u.negative_part().0).sqrt()
}

/// `1/(p-1) ((u₊)^p, 1)^h + ½‖∇v‖₀²`
pub fn energy_exact(ops: &Operators, p: f64, u: &ScalarField, v: &ScalarField) -> f64 {
    let cells: f64 = ops.lumped.iter().zip(&u.0).map(|(d, &s)| d * pos_pow(s, p)).sum();
    cells / (p - 1.0) + 0.5 * ops.grad_sq(&v.0)
}

/// The energy each scheme dissipates; the exact energy for `UV`.
pub fn energy_modified(sim: &Simulator, state: &SchemeState) -> f64 {
    let ops = sim.ops();
    let p = sim.config().p;
    let sigma_sq = || 0.5 * state.sigma.as_ref().map_or(0.0, |s| ops.vl2_sq(&s.to_dofs()));
    match sim.config().scheme {
        Scheme::Uv => energy_exact(ops, p, &state.u, &state.v),
        Scheme::UvEps => cell_energy(sim, &state.u) + 0.5 * ops.grad_sq(&state.v.0),
        Scheme::UsEps | Scheme::Us0 => cell_energy(sim, &state.u) + sigma_sq(),
    }
}

/// `p (F_ε(u), 1)^h` or `1/(p-1) ((u₊)^p, 1)^h`.
fn cell_energy(sim: &Simulator, u: &ScalarField) -> f64 {
    let ops = sim.ops();
    let p = sim.config().p;
    match sim.potential() {
        Some(pot) => p * ops.lumped.iter().zip(&u.0).map(|(d, &s)| d * pot.f_value(s)).sum::<f64>(),
        None => ops.lumped.iter().zip(&u.0).map(|(d, &s)| d * pos_pow(s, p)).sum::<f64>() / (p - 1.0),
    }
}

/// Discrete Laplacian used in `RE`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaplacianNorm {
    /// `|D⁻¹ S v|_h²`
    Lumped,
    /// `‖M⁻¹ S v‖₀² = ‖(A_h - I) v‖₀²`
    #[default]
    Consistent,
}

/// The four terms of `RE = δt E_e + (4/p)‖∇Π^h (u₊)^{p/2}‖² + ‖Δ_h v‖² + ‖∇v‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReTerms {
    pub energy_rate: f64,
    pub cell_dissipation: f64,
    pub laplacian: f64,
    pub gradient: f64,
}

impl ReTerms {
    pub fn total(&self) -> f64 {
        self.energy_rate + self.cell_dissipation + self.laplacian + self.gradient
    }
}

/// `RE` between two consecutive `(u, v)` states.
#[allow(clippy::too_many_arguments)]
pub fn residual_re(
    mesh: &StructuredTriMesh,
    ops: &Operators,
    p: f64,
    dt: f64,
    prev: (&ScalarField, &ScalarField),
    curr: (&ScalarField, &ScalarField),
    norm: LaplacianNorm,
    solver: &SolverConfig,
) -> Result<ReTerms> {
    let n = mesh.num_nodes();
    for f in [prev.0, prev.1, curr.0, curr.1] {
        if f.len() != n || ops.lumped.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.len() });
        }
    }
    let (u, v) = curr;
    let energy_rate = (energy_exact(ops, p, u, v) - energy_exact(ops, p, prev.0, prev.1)) / dt;
    let g = grad_p1(mesh, &u.map(|s| pos_pow(s, 0.5 * p)));
    let cell_dissipation = 4.0 / p * weighted_sq_integral(mesh, &vec![1.0; mesh.num_elements()], &g);
    let sv = ops.stiffness.mul_vec(&v.0);
    let laplacian = match norm {
        LaplacianNorm::Lumped => sv.iter().zip(&ops.lumped).map(|(s, d)| s * s / d).sum(),
        LaplacianNorm::Consistent => {
            let w = solve_spd(&ops.mass, &sv, None, solver)?.x;
            ops.l2_sq(&w)
        }
    };
    let gradient = ops.grad_sq(&v.0);
    Ok(ReTerms { energy_rate, cell_dissipation, laplacian, gradient })
}

/// `δt(∫v) + ∫v - (production, 1)` for the step `prev -> curr`, with
/// `∫v = (v, 1)` and the production of the scheme's v-equation.
pub fn mean_v_balance(sim: &Simulator, prev: &SchemeState, curr: &SchemeState) -> f64 {
    let ops = sim.ops();
    let cfg = sim.config();
    let p = cfg.p;
    let int = |v: &ScalarField| mass(ops, v);
    let production: f64 = match sim.potential() {
        Some(pot) => p * (p - 1.0) * int(&curr.u.map(|s| pot.f_value(s))),
        None => int(&curr.u.map(|s| pos_pow(s, p))),
    };
    (int(&curr.v) - int(&prev.v)) / cfg.dt + int(&curr.v) - production
}

/// One step of a discrete energy law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLaw {
    /// The law's left-hand side, with the dissipation bounded from below as
    /// stated for the scheme; nonpositive up to solver tolerances.
    pub lhs: f64,
    /// The same balance with every term evaluated exactly; vanishes up to
    /// solver tolerances.
    pub balance: f64,
    pub energy_prev: f64,
    pub energy: f64,
}

/// Energy law of the step `prev -> curr`; `None` for `UV`, which has none.
pub fn energy_law(sim: &Simulator, prev: &SchemeState, curr: &SchemeState) -> Result<Option<EnergyLaw>> {
    let cfg = sim.config();
    let (k, p) = (cfg.dt, cfg.p);
    let mesh = sim.mesh();
    let ops = sim.ops();
    let energy_prev = energy_modified(sim, prev);
    let energy = energy_modified(sim, curr);
    let rate = (energy - energy_prev) / k;
    let du: Vec<f64> = curr.u.0.iter().zip(&prev.u.0).map(|(a, b)| (a - b) / k).collect();

    let sigma_terms = || -> Result<(f64, f64)> {
        let (s, s0) = match (&curr.sigma, &prev.sigma) {
            (Some(s), Some(s0)) => (s.to_dofs(), s0.to_dofs()),
            _ => return Err(Error::InvalidParameter("σ-scheme state without σ".into())),
        };
        let ds: Vec<f64> = s.iter().zip(&s0).map(|(a, b)| (a - b) / k).collect();
        Ok((0.5 * k * ops.vl2_sq(&ds), ops.bh.bilinear(&s, &s)))
    };

    let law = match cfg.scheme {
        Scheme::Uv => return Ok(None),
        Scheme::UvEps | Scheme::UsEps => {
            let pot = sim.potential().expect("regularized scheme");
            let e2p = pot.min_curvature();
            // p Σ D (F'(u) δt u - δt F(u)) ≥ (k p ε^{2-p}/2) |δt u|_h² ≥ (k p ε^{2-p}/2) ‖δt u‖₀²
            let convexity: f64 = p * ops
                .lumped
                .iter()
                .zip(curr.u.0.iter().zip(&prev.u.0))
                .map(|(d, (&a, &b))| d * (pot.f_prime(a) * (a - b) - (pot.f_value(a) - pot.f_value(b))) / k)
                .sum::<f64>();
            let convexity_bound = 0.5 * k * p * e2p * ops.l2_sq(&du);
            let fp = curr.u.map(|s| pot.f_prime(s));
            let diffusion = p * ops.stiffness.bilinear(&curr.u.0, &fp.0);
            let diffusion_bound = p * e2p * ops.grad_sq(&curr.u.0);
            let (chem_num, chem) = if cfg.scheme == Scheme::UvEps {
                let dv: Vec<f64> = curr.v.0.iter().zip(&prev.v.0).map(|(a, b)| (a - b) / k).collect();
                let sv = ops.stiffness.mul_vec(&curr.v.0);
                let w = solve_spd(&ops.mass, &sv, None, &cfg.solver)?.x;
                (0.5 * k * ops.grad_sq(&dv), ops.l2_sq(&w) + ops.grad_sq(&curr.v.0))
            } else {
                sigma_terms()?
            };
            EnergyLaw {
                lhs: rate + convexity_bound + chem_num + diffusion_bound + chem,
                balance: rate + convexity + chem_num + diffusion + chem,
                energy_prev,
                energy,
            }
        }
        Scheme::Us0 => {
            let c = p / (p - 1.0);
            let convexity: f64 = ops
                .lumped
                .iter()
                .zip(curr.u.0.iter().zip(&prev.u.0))
                .map(|(d, (&a, &b))| {
                    d * (c * pos_pow(a, p - 1.0) * (a - b) - (pos_pow(a, p) - pos_pow(b, p)) / (p - 1.0)) / k
                })
                .sum();
            let coef = element_means(mesh, &curr.u.map(|s| pos_pow(s, 2.0 - p)));
            let g = grad_p1(mesh, &curr.u.map(|s| pos_pow(s, p - 1.0)));
            let diffusion = p / ((p - 1.0) * (p - 1.0)) * weighted_sq_integral(mesh, &coef, &g);
            let (num, bh) = sigma_terms()?;
            EnergyLaw {
                lhs: rate + num + diffusion + bh,
                balance: rate + convexity + num + diffusion + bh,
                energy_prev,
                energy,
            }
        }
    };
    Ok(Some(law))
}

/// Tracked quantities of one completed step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    pub energy_modified: f64,
    pub energy_exact: f64,
    /// Undefined for the initial state.
    pub residual_re: Option<f64>,
    pub min_u: f64,
    pub min_v: f64,
    pub picard_iters: usize,
    pub max_solver_iters: usize,
}

impl RunRecord {
    /// Record of `state`, reached from `prev` (if any) with `report`.
    pub fn new(
        sim: &Simulator,
        prev: Option<&SchemeState>,
        state: &SchemeState,
        report: Option<&PicardReport>,
    ) -> Result<Self> {
        Self::with_re_norm(sim, prev, state, report, Some(LaplacianNorm::Consistent))
    }

    /// As [`RunRecord::new`], with `RE` built on `re_norm`; `None` skips `RE`.
    pub fn with_re_norm(
        sim: &Simulator,
        prev: Option<&SchemeState>,
        state: &SchemeState,
        report: Option<&PicardReport>,
        re_norm: Option<LaplacianNorm>,
    ) -> Result<Self> {
        let ops = sim.ops();
        let cfg = sim.config();
        let residual_re = match (prev, re_norm) {
            (Some(prev), Some(norm)) => Some(
                residual_re(
                    sim.mesh(),
                    ops,
                    cfg.p,
                    cfg.dt,
                    (&prev.u, &prev.v),
                    (&state.u, &state.v),
                    norm,
                    &cfg.solver,
                )?
                .total(),
            ),
            _ => None,
        };
        Ok(Self {
            step: state.step,
            time: state.time,
            mass: mass(ops, &state.u),
            energy_modified: energy_modified(sim, state),
            energy_exact: energy_exact(ops, cfg.p, &state.u, &state.v),
            residual_re,
            min_u: min_nodal(&state.u),
            min_v: min_nodal(&state.v),
            picard_iters: report.map_or(0, |r| r.iterations),
            max_solver_iters: report.map_or(0, |r| r.max_solver_iters),
        })
    }

    pub fn is_finite(&self) -> bool {
        [self.time, self.mass, self.energy_modified, self.energy_exact, self.min_u, self.min_v]
            .iter()
            .chain(self.residual_re.iter())
            .all(|x| x.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::interp;
    use crate::presets::IcPreset;
    use crate::schemes::SchemeConfig;

    fn square(n: usize) -> (StructuredTriMesh, Operators) {
        let m = StructuredTriMesh::new(n, n, 2.0, 2.0).unwrap();
        let ops = Operators::new(&m);
        (m, ops)
    }

    #[test]
    fn mass_examples() {
        let (m, ops) = square(4);
        assert!((mass(&ops, &ScalarField::constant(m.num_nodes(), 1.0)) - 4.0).abs() < 1e-14);
        let mut hat = ScalarField::zeros(m.num_nodes());
        hat.0[7] = 1.0;
        assert!((mass(&ops, &hat) - ops.lumped[7]).abs() < 1e-16);
    }

    #[test]
    fn exact_energy_examples() {
        let (m, ops) = square(5);
        let n = m.num_nodes();
        let e = energy_exact(&ops, 1.5, &ScalarField::constant(n, 2.0), &ScalarField::constant(n, 3.0));
        assert!((e - 2.0 * 2f64.powf(1.5) * 4.0).abs() < 1e-12);
        assert!((e - 22.627).abs() < 1e-3);
        let x = interp(&m, |x, _| x);
        let e = energy_exact(&ops, 1.5, &ScalarField::constant(n, -1.0), &x);
        assert!((e - 2.0).abs() < 1e-13);
    }

    #[test]
    fn modified_energy_constant_uveps() {
        let m = StructuredTriMesh::new(4, 4, 2.0, 2.0).unwrap();
        let sim = Simulator::new(m, SchemeConfig::new(Scheme::UvEps, 1.5, 0.01, 0.1)).unwrap();
        let st = sim.init_preset(&IcPreset::Constant { u: 1.0, v: 5.0 }).unwrap();
        let f1 = 1.0 / 0.75 + 0.875 / 0.75 * 0.01f64.powf(1.5);
        assert!((energy_modified(&sim, &st) - 1.5 * f1 * 4.0).abs() < 1e-10);
        assert!((energy_modified(&sim, &st) - 8.007).abs() < 1e-3);
    }

    #[test]
    fn modified_energy_zero_for_us0_at_rest() {
        let m = StructuredTriMesh::new(3, 3, 2.0, 2.0).unwrap();
        let sim = Simulator::new(m, SchemeConfig::new(Scheme::Us0, 1.5, 0.0, 0.1)).unwrap();
        let st = sim.init_preset(&IcPreset::Constant { u: 0.0, v: 0.0 }).unwrap();
        assert_eq!(energy_modified(&sim, &st), 0.0);
    }

    #[test]
    fn re_vanishes_on_constant_steady_state() {
        let (m, ops) = square(3);
        let u = ScalarField::constant(m.num_nodes(), 0.0);
        let v = ScalarField::constant(m.num_nodes(), 0.0);
        for norm in [LaplacianNorm::Lumped, LaplacianNorm::Consistent] {
            let re = residual_re(&m, &ops, 1.5, 0.1, (&u, &v), (&u, &v), norm, &SolverConfig::default()).unwrap();
            assert_eq!(re.total(), 0.0);
        }
    }

    #[test]
    fn re_rejects_mismatched_fields() {
        let (m, ops) = square(3);
        let a = ScalarField::zeros(m.num_nodes());
        let b = ScalarField::zeros(3);
        let cfg = SolverConfig::default();
        assert!(residual_re(&m, &ops, 1.5, 0.1, (&a, &a), (&a, &b), LaplacianNorm::Lumped, &cfg).is_err());
    }

    #[test]
    fn initial_record_has_no_residual() {
        let m = StructuredTriMesh::new(6, 6, 2.0, 2.0).unwrap();
        let sim = Simulator::new(m, SchemeConfig::new(Scheme::Uv, 1.5, 0.0, 1e-4)).unwrap();
        let st = sim.init_preset(&IcPreset::Gauss).unwrap();
        let r = RunRecord::new(&sim, None, &st, None).unwrap();
        assert!(r.residual_re.is_none() && r.is_finite());
        assert_eq!((r.step, r.picard_iters), (0, 0));
        assert!((r.energy_modified - r.energy_exact).abs() == 0.0);
    }
}
