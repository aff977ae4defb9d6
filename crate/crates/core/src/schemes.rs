//! Fully discrete backward Euler schemes and their Picard linearizations.
//!
//! | scheme  | unknowns | u time term | cross-diffusion                 | production         |
//! |---------|----------|-------------|---------------------------------|--------------------|
//! | `UV`    | (u, v)   | consistent  | `(u ∇v, ∇ū)`                    | `((u₊)^p, v̄)`      |
//! | `UVEPS` | (u, v)   | lumped      | `(Λ²_ε(u) ∇v, ∇ū)`              | `p(p-1)(Π^h F_ε(u), v̄)` |
//! | `USEPS` | (u, σ)   | lumped      | `(u σ, ∇ū)`                     | `p(u ∇Π^h F'_ε(u), σ̄)` |
//! | `US0`   | (u, σ)   | lumped      | `(u σ, ∇ū)`                     | `p/(p-1)(u ∇Π^h (u₊)^(p-1), σ̄)` |
//!
//! The σ-schemes recover `v` after every step from a scalar parabolic solve.
//! Each Picard sweep first updates `u`, then `v` (resp. `σ`) with the new `u`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::{
    convection, element_means, grad_p1, gradient_load, project_qh, project_qh_vec, project_rh, weighted_vector_load,
    ConvectingField, L2Source, Operators, ScalarField, VectorField,
};
use crate::lambda_ops::{lambda2, lambda2_jacobian};
use crate::linsolve::{solve_general, solve_spd, Solution, SolverConfig};
use crate::mesh::StructuredTriMesh;
use crate::presets::IcPreset;
use crate::regularization::RegularizedPotential;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Uv,
    UvEps,
    UsEps,
    Us0,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Uv, Scheme::UvEps, Scheme::UsEps, Scheme::Us0];

    pub fn uses_eps(self) -> bool {
        matches!(self, Scheme::UvEps | Scheme::UsEps)
    }

    pub fn uses_sigma(self) -> bool {
        matches!(self, Scheme::UsEps | Scheme::Us0)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Uv => "UV",
            Scheme::UvEps => "UVEPS",
            Scheme::UsEps => "USEPS",
            Scheme::Us0 => "US0",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "UV" => Ok(Scheme::Uv),
            "UVEPS" | "UVE" => Ok(Scheme::UvEps),
            "USEPS" | "USE" => Ok(Scheme::UsEps),
            "US0" => Ok(Scheme::Us0),
            _ => Err(Error::InvalidParameter(format!("unknown scheme '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub p: f64,
    /// Ignored by `UV` and `US0`.
    pub eps: f64,
    pub dt: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    /// History length of the Anderson acceleration; 0 gives plain Picard sweeps.
    pub anderson_depth: usize,
    pub solver: SolverConfig,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, p: f64, eps: f64, dt: f64) -> Self {
        Self {
            scheme,
            p,
            eps,
            dt,
            picard_tol: 1e-3,
            picard_max: 200,
            anderson_depth: 5,
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.p > 1.0 && self.p < 2.0) {
            return Err(Error::InvalidParameter(format!("p must lie in (1, 2), got {}", self.p)));
        }
        if self.scheme.uses_eps() && !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("picard_tol must be positive, got {}", self.picard_tol)));
        }
        if self.picard_max == 0 {
            return Err(Error::InvalidParameter("picard_max must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeState {
    pub u: ScalarField,
    /// Solved for by the (u, v) schemes, recovered by the σ-schemes.
    pub v: ScalarField,
    pub sigma: Option<VectorField>,
    pub step: usize,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardReport {
    pub iterations: usize,
    /// Relative change of the last sweep.
    pub change: f64,
    /// Largest Krylov iteration count among the linear solves of the step.
    pub max_solver_iters: usize,
}

/// Production term used when recovering `v` in the σ-schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recovery {
    /// `p(p-1) F_ε(u)`
    Regularized,
    /// `(u₊)^p`
    PositivePower,
}

const ZERO_NORM_FLOOR: f64 = 1e-14;

fn relative_change(new: &[f64], old: &[f64], norm_sq: impl Fn(&[f64]) -> f64) -> f64 {
    let diff: Vec<f64> = new.iter().zip(old).map(|(a, b)| a - b).collect();
    norm_sq(&diff).sqrt() / norm_sq(old).sqrt().max(ZERO_NORM_FLOOR)
}

fn axpy_vec(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| a * xi + yi).collect()
}

/// Positive power with `0^r = 0` for `r > 0` and negative arguments clipped.
fn pos_pow(s: f64, r: f64) -> f64 {
    if s > 0.0 {
        s.powf(r)
    } else {
        0.0
    }
}

/// Anderson mixing for `x = G(x)` in the inner product weighted by `weights`.
struct Anderson<'a> {
    depth: usize,
    weights: &'a [f64],
    prev: Option<(Vec<f64>, Vec<f64>)>,
    df: Vec<Vec<f64>>,
    dg: Vec<Vec<f64>>,
}

impl<'a> Anderson<'a> {
    fn new(depth: usize, weights: &'a [f64]) -> Self {
        Self { depth, weights, prev: None, df: Vec::new(), dg: Vec::new() }
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * x * y).sum()
    }

    /// Next iterate from the current `x` and `g = G(x)`.
    fn next(&mut self, x: &[f64], g: Vec<f64>) -> Vec<f64> {
        if self.depth == 0 {
            return g;
        }
        let f: Vec<f64> = g.iter().zip(x).map(|(a, b)| a - b).collect();
        if let Some((f_old, g_old)) = self.prev.take() {
            self.df.push(f.iter().zip(&f_old).map(|(a, b)| a - b).collect());
            self.dg.push(g.iter().zip(&g_old).map(|(a, b)| a - b).collect());
            if self.df.len() > self.depth {
                self.df.remove(0);
                self.dg.remove(0);
            }
        }
        let m = self.df.len();
        let mut out = g.clone();
        if m > 0 {
            // normal equations of min ‖f - ΔF γ‖, lightly regularized
            let mut a = vec![vec![0.0; m]; m];
            let mut b = vec![0.0; m];
            for i in 0..m {
                for j in 0..=i {
                    a[i][j] = self.dot(&self.df[i], &self.df[j]);
                    a[j][i] = a[i][j];
                }
                b[i] = self.dot(&self.df[i], &f);
            }
            let trace: f64 = (0..m).map(|i| a[i][i]).sum();
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += 1e-12 * trace;
            }
            if let Some(gamma) = solve_dense(a, b) {
                for (gi, dg) in gamma.iter().zip(&self.dg) {
                    out.iter_mut().zip(dg).for_each(|(o, d)| *o -= gi * d);
                }
            }
        }
        self.prev = Some((f, g));
        out
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular or non-finite.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if !(a[piv][c].abs() > 0.0) {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Time integrator for one scheme on one mesh.
#[derive(Debug, Clone)]
pub struct Simulator {
    mesh: StructuredTriMesh,
    ops: Operators,
    cfg: SchemeConfig,
    pot: Option<RegularizedPotential>,
    /// `D/k + S`
    lumped_heat: CsrMatrix,
    /// `M/k + S`
    consistent_heat: CsrMatrix,
    /// `M/k + A_h`
    v_matrix: CsrMatrix,
    /// `M/k + B_h` on the constrained vector space
    sigma_matrix: CsrMatrix,
}

impl Simulator {
    pub fn new(mesh: StructuredTriMesh, cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let ops = Operators::new(&mesh);
        let pot = if cfg.scheme.uses_eps() {
            Some(RegularizedPotential::new(cfg.p, cfg.eps)?)
        } else {
            None
        };
        let inv_k = 1.0 / cfg.dt;
        let lumped = CsrMatrix::diagonal(&ops.lumped);
        let lumped_heat = CsrMatrix::linear_combination(&[(inv_k, &lumped), (1.0, &ops.stiffness)]);
        let consistent_heat = CsrMatrix::linear_combination(&[(inv_k, &ops.mass), (1.0, &ops.stiffness)]);
        let v_matrix = CsrMatrix::linear_combination(&[(inv_k, &ops.mass), (1.0, &ops.ah)]);
        let mut sigma_matrix = CsrMatrix::linear_combination(&[
            (inv_k, &ops.vmass),
            (1.0, &crate::fem::op_bh_unconstrained(&mesh)),
        ]);
        sigma_matrix.constrain_zero(&ops.constraints);
        Ok(Self {
            mesh,
            ops,
            cfg,
            pot,
            lumped_heat,
            consistent_heat,
            v_matrix,
            sigma_matrix,
        })
    }

    pub fn mesh(&self) -> &StructuredTriMesh {
        &self.mesh
    }

    pub fn ops(&self) -> &Operators {
        &self.ops
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn potential(&self) -> Option<&RegularizedPotential> {
        self.pot.as_ref()
    }

    fn pot(&self) -> &RegularizedPotential {
        self.pot.as_ref().expect("regularized scheme carries a potential")
    }

    /// `u⁰ = Q^h u₀`, `v⁰ = R^h v₀` and, for the σ-schemes, `σ⁰ = Q̃^h ∇v⁰`.
    pub fn init_state(
        &self,
        u0: &dyn Fn(f64, f64) -> f64,
        v0: &dyn Fn(f64, f64) -> f64,
        grad_v0: &dyn Fn(f64, f64) -> [f64; 2],
    ) -> Result<SchemeState> {
        for p in self.mesh.nodes() {
            let (uu, vv) = (u0(p[0], p[1]), v0(p[0], p[1]));
            if !(uu >= 0.0) || !(vv >= 0.0) {
                return Err(Error::NegativeInitialData(format!(
                    "u0 = {uu}, v0 = {vv} at ({}, {})",
                    p[0], p[1]
                )));
            }
        }
        let u = project_qh(&self.mesh, L2Source::Function(u0))?;
        let v = project_rh(&self.mesh, v0, grad_v0, &self.cfg.solver)?;
        let sigma = if self.cfg.scheme.uses_sigma() {
            Some(project_qh_vec(&self.mesh, &grad_p1(&self.mesh, &v), &self.cfg.solver)?)
        } else {
            None
        };
        Ok(SchemeState { u, v, sigma, step: 0, time: 0.0 })
    }

    pub fn init_preset(&self, ic: &IcPreset) -> Result<SchemeState> {
        self.init_state(&|x, y| ic.u0(x, y), &|x, y| ic.v0(x, y), &|x, y| ic.grad_v0(x, y))
    }

    pub fn step(&self, state: &SchemeState) -> Result<(SchemeState, PicardReport)> {
        self.check_state(state)?;
        let out = match self.cfg.scheme {
            Scheme::Uv => self.step_uv(state),
            Scheme::UvEps => self.step_uveps(state),
            Scheme::UsEps => self.step_useps(state),
            Scheme::Us0 => self.step_us0(state),
        }?;
        if !out.0.u.is_finite() || !out.0.v.is_finite() || !out.0.sigma.as_ref().map_or(true, VectorField::is_finite) {
            return Err(Error::NonFinite(format!("state at step {}", out.0.step)));
        }
        Ok(out)
    }

    fn check_state(&self, state: &SchemeState) -> Result<()> {
        let n = self.mesh.num_nodes();
        for len in [state.u.len(), state.v.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        if self.cfg.scheme.uses_sigma() {
            match &state.sigma {
                Some(s) if s.len() == n => {}
                Some(s) => return Err(Error::DimensionMismatch { expected: n, got: s.len() }),
                None => return Err(Error::InvalidParameter("σ-scheme state without σ".into())),
            }
        }
        Ok(())
    }

    fn next_state(&self, state: &SchemeState, u: Vec<f64>, v: Vec<f64>, sigma: Option<Vec<f64>>) -> SchemeState {
        let step = state.step + 1;
        SchemeState {
            u: ScalarField(u),
            v: ScalarField(v),
            sigma: sigma.map(|s| VectorField::from_dofs(&s)),
            step,
            time: step as f64 * self.cfg.dt,
        }
    }

    fn spd(&self, a: &CsrMatrix, b: &[f64], x0: &[f64], iters: &mut usize) -> Result<Vec<f64>> {
        let Solution { x, iterations, .. } = solve_spd(a, b, Some(x0), &self.cfg.solver)?;
        *iters = (*iters).max(iterations);
        Ok(x)
    }

    fn general(&self, a: &CsrMatrix, b: &[f64], x0: &[f64], iters: &mut usize) -> Result<Vec<f64>> {
        let Solution { x, iterations, .. } = solve_general(a, b, Some(x0), &self.cfg.solver)?;
        *iters = (*iters).max(iterations);
        Ok(x)
    }

    fn lumped_times(&self, u: &[f64], scale: f64) -> Vec<f64> {
        self.ops.lumped.iter().zip(u).map(|(d, x)| scale * d * x).collect()
    }

    /// Right-hand side `M_vec σ^{n-1}/k + load` with constrained rows zeroed.
    fn sigma_rhs(&self, sigma_prev: &[f64], load: &[f64]) -> Vec<f64> {
        let ms = self.ops.vmass.mul_vec(sigma_prev);
        ms.iter()
            .zip(load)
            .zip(&self.ops.constraints)
            .map(|((m, l), &fixed)| if fixed { 0.0 } else { m / self.cfg.dt + l })
            .collect()
    }

    fn vl2(&self) -> impl Fn(&[f64]) -> f64 + '_ {
        |x| self.ops.vl2_sq(x)
    }

    fn l2(&self) -> impl Fn(&[f64]) -> f64 + '_ {
        |x| self.ops.l2_sq(x)
    }

    /// Picard sweeps `u^{l+1} = U(u^l, w^l)`, `w^{l+1} = W(u^{l+1}, w^l)`.
    ///
    /// Since `w^l` is determined by `u^l`, the sweep is a fixed-point map in `u`
    /// alone; with `anderson_depth > 0` it is Anderson-accelerated, which leaves
    /// the fixed points unchanged. The stopping test uses the plain sweep.
    fn picard(
        &self,
        u_start: &[f64],
        w_start: &[f64],
        w_norm_sq: impl Fn(&[f64]) -> f64,
        mut solve_u: impl FnMut(&[f64], &[f64], &mut usize) -> Result<Vec<f64>>,
        mut solve_w: impl FnMut(&[f64], &[f64], &mut usize) -> Result<Vec<f64>>,
    ) -> Result<(Vec<f64>, Vec<f64>, PicardReport)> {
        let (mut u_l, mut w_l) = (u_start.to_vec(), w_start.to_vec());
        let mut solver_iters = 0;
        let mut change = f64::INFINITY;
        let mut accel = Anderson::new(self.cfg.anderson_depth, &self.ops.lumped);
        for it in 1..=self.cfg.picard_max {
            let u_hat = solve_u(&u_l, &w_l, &mut solver_iters)?;
            let u_change = relative_change(&u_hat, &u_l, self.l2());
            let u_new = accel.next(&u_l, u_hat);
            let w_new = solve_w(&u_new, &w_l, &mut solver_iters)?;
            change = u_change.max(relative_change(&w_new, &w_l, &w_norm_sq));
            u_l = u_new;
            w_l = w_new;
            if !change.is_finite() {
                break;
            }
            if change <= self.cfg.picard_tol {
                let report = PicardReport { iterations: it, change, max_solver_iters: solver_iters };
                return Ok((u_l, w_l, report));
            }
        }
        Err(Error::PicardNotConverged { iterations: self.cfg.picard_max, change })
    }

    /// Standard backward Euler; Picard method with frozen `∇v^l` in the u-equation.
    pub fn step_uv(&self, state: &SchemeState) -> Result<(SchemeState, PicardReport)> {
        let k = self.cfg.dt;
        let p = self.cfg.p;
        let rhs_u: Vec<f64> = self.ops.mass.mul_vec(&state.u.0).iter().map(|x| x / k).collect();
        let mv_prev = self.ops.mass.mul_vec(&state.v.0);
        let (u, v, report) = self.picard(
            &state.u.0,
            &state.v.0,
            self.l2(),
            |u_l, v_l, iters| {
                let grad_v = grad_p1(&self.mesh, &ScalarField(v_l.to_vec()));
                let c = convection(&self.mesh, ConvectingField::PerElement(&grad_v))?;
                let a = CsrMatrix::linear_combination(&[(1.0, &self.consistent_heat), (1.0, &c)]);
                self.general(&a, &rhs_u, u_l, iters)
            },
            |u, v_l, iters| {
                let prod: Vec<f64> = u.iter().map(|&s| pos_pow(s, p)).collect();
                let rhs_v = axpy_vec(1.0 / k, &mv_prev, &self.lumped_times(&prod, 1.0));
                self.spd(&self.v_matrix, &rhs_v, v_l, iters)
            },
        )?;
        Ok((self.next_state(state, u, v, None), report))
    }

    /// Regularized scheme in (u, v); Picard method with the cross-diffusion
    /// `Λ²_ε(u^l) ∇v^l` on the right-hand side. If these sweeps fail, the step
    /// is redone with `Λ²_ε(u)` linearized about `u^l` in the u-equation.
    pub fn step_uveps(&self, state: &SchemeState) -> Result<(SchemeState, PicardReport)> {
        match self.uveps_sweeps(state, false) {
            Err(Error::PicardNotConverged { .. } | Error::SolverNotConverged { .. } | Error::NonFinite(_)) => {
                self.uveps_sweeps(state, true)
            }
            other => other,
        }
    }

    fn uveps_sweeps(&self, state: &SchemeState, linearized: bool) -> Result<(SchemeState, PicardReport)> {
        let k = self.cfg.dt;
        let pot = self.pot();
        let p = pot.p();
        let du_prev = self.lumped_times(&state.u.0, 1.0 / k);
        let mv_prev = self.ops.mass.mul_vec(&state.v.0);
        let (u, v, report) = self.picard(
            &state.u.0,
            &state.v.0,
            self.l2(),
            |u_l, v_l, iters| {
                let ul = ScalarField(u_l.to_vec());
                let grad_v = grad_p1(&self.mesh, &ScalarField(v_l.to_vec()));
                let flux = lambda2(pot, &self.mesh, &ul).apply(&grad_v);
                let rhs_u = axpy_vec(-1.0, &gradient_load(&self.mesh, &flux)?, &du_prev);
                if !linearized {
                    return self.spd(&self.lumped_heat, &rhs_u, u_l, iters);
                }
                let jac = self.cross_diffusion_jacobian(&ul, &grad_v);
                let a = CsrMatrix::linear_combination(&[(1.0, &self.lumped_heat), (1.0, &jac)]);
                let rhs = axpy_vec(1.0, &jac.mul_vec(u_l), &rhs_u);
                self.general(&a, &rhs, u_l, iters)
            },
            |u, v_l, iters| {
                let f_u: Vec<f64> = u.iter().map(|&s| p * (p - 1.0) * pot.f_value(s)).collect();
                let rhs_v = axpy_vec(1.0 / k, &mv_prev, &self.ops.mass.mul_vec(&f_u));
                self.spd(&self.v_matrix, &rhs_v, v_l, iters)
            },
        )?;
        Ok((self.next_state(state, u, v, None), report))
    }

    /// Derivative of `u ↦ (Λ²_ε(u) ∇v, ∇φ_i)` at `u`.
    fn cross_diffusion_jacobian(&self, u: &ScalarField, grad_v: &[[f64; 2]]) -> CsrMatrix {
        let jl = lambda2_jacobian(self.pot(), &self.mesh, u);
        let mut trip = Vec::with_capacity(self.mesh.num_elements() * 12);
        for (e, tri) in self.mesh.elements().iter().enumerate() {
            let g = self.mesh.geom(e);
            let [gx, gy] = grad_v[e];
            for i in 0..3 {
                let cx = g.area * gx * g.grads[i][0];
                let cy = g.area * gy * g.grads[i][1];
                trip.push((tri[i], tri[0], cx * jl[e][0][0] + cy * jl[e][1][0]));
                trip.push((tri[i], tri[1], cx * jl[e][0][1]));
                trip.push((tri[i], tri[2], cy * jl[e][1][1]));
            }
        }
        CsrMatrix::from_triplets(self.mesh.num_nodes(), &trip)
    }

    /// Regularized σ-scheme; Picard method with frozen `σ^l` in the u-equation.
    pub fn step_useps(&self, state: &SchemeState) -> Result<(SchemeState, PicardReport)> {
        let pot = self.pot();
        let p = pot.p();
        let load = |u: &[f64]| -> Result<Vec<f64>> {
            let g = grad_p1(&self.mesh, &ScalarField(u.iter().map(|&s| pot.f_prime(s)).collect()));
            let mut load = weighted_vector_load(&self.mesh, &ScalarField(u.to_vec()), &g)?;
            load.iter_mut().for_each(|x| *x *= p);
            Ok(load)
        };
        self.sigma_step(state, load, None, Recovery::Regularized)
    }

    /// σ-scheme without regularization. The nonlinear diffusion is lagged and
    /// `(∇(u^{l+1} - u^l), ∇ū)` is added to the u-equation.
    pub fn step_us0(&self, state: &SchemeState) -> Result<(SchemeState, PicardReport)> {
        let p = self.cfg.p;
        let load = |u: &[f64]| -> Result<Vec<f64>> {
            let g = grad_p1(&self.mesh, &ScalarField(u.iter().map(|&s| pos_pow(s, p - 1.0)).collect()));
            let mut load = weighted_vector_load(&self.mesh, &ScalarField(u.to_vec()), &g)?;
            load.iter_mut().for_each(|x| *x *= p / (p - 1.0));
            Ok(load)
        };
        let diffusion = |u: &[f64]| -> Result<Vec<f64>> {
            let mut g = gradient_load(&self.mesh, &self.us0_nonlinear_flux(&ScalarField(u.to_vec())))?;
            g.iter_mut().for_each(|x| *x /= p - 1.0);
            Ok(g)
        };
        self.sigma_step(state, load, Some(&diffusion), Recovery::PositivePower)
    }

    /// Element-wise `mean_K((u₊)^{2-p}) ∇Π^h((u₊)^{p-1})`.
    pub fn us0_nonlinear_flux(&self, u: &ScalarField) -> Vec<[f64; 2]> {
        let p = self.cfg.p;
        let coef = element_means(&self.mesh, &u.map(|s| pos_pow(s, 2.0 - p)));
        let g = grad_p1(&self.mesh, &u.map(|s| pos_pow(s, p - 1.0)));
        coef.iter().zip(&g).map(|(c, gv)| [c * gv[0], c * gv[1]]).collect()
    }

    fn sigma_step(
        &self,
        state: &SchemeState,
        sigma_load: impl Fn(&[f64]) -> Result<Vec<f64>>,
        lagged_diffusion: Option<&dyn Fn(&[f64]) -> Result<Vec<f64>>>,
        mode: Recovery,
    ) -> Result<(SchemeState, PicardReport)> {
        let k = self.cfg.dt;
        let sigma_prev = state.sigma.as_ref().expect("checked").to_dofs();
        let du_prev = self.lumped_times(&state.u.0, 1.0 / k);
        let (u, s, mut report) = self.picard(
            &state.u.0,
            &sigma_prev,
            self.vl2(),
            |u_l, s_l, iters| {
                let c = convection(&self.mesh, ConvectingField::Nodal(&VectorField::from_dofs(s_l)))?;
                let a = CsrMatrix::linear_combination(&[(1.0, &self.lumped_heat), (1.0, &c)]);
                let rhs_u = match lagged_diffusion {
                    None => du_prev.clone(),
                    Some(diff) => {
                        let su = self.ops.stiffness.mul_vec(u_l);
                        let nl = diff(u_l)?;
                        du_prev.iter().zip(&su).zip(&nl).map(|((d, s), n)| d + s - n).collect()
                    }
                };
                self.general(&a, &rhs_u, u_l, iters)
            },
            |u, s_l, iters| {
                let rhs_s = self.sigma_rhs(&sigma_prev, &sigma_load(u)?);
                self.spd(&self.sigma_matrix, &rhs_s, s_l, iters)
            },
        )?;
        let u = ScalarField(u);
        let (v, iters) = self.recover_v(&u, &state.v, mode)?;
        report.max_solver_iters = report.max_solver_iters.max(iters);
        Ok((self.next_state(state, u.0, v.0, Some(s)), report))
    }

    /// Solves `(δt v, v̄) + (∇v, ∇v̄) + (v, v̄) = (g(u), v̄)` with the
    /// production integrated by vertex quadrature.
    pub fn recover_v(&self, u: &ScalarField, v_prev: &ScalarField, mode: Recovery) -> Result<(ScalarField, usize)> {
        let n = self.mesh.num_nodes();
        if u.len() != n || v_prev.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: u.len().min(v_prev.len()) });
        }
        let p = self.cfg.p;
        let prod: Vec<f64> = match mode {
            Recovery::Regularized => {
                let pot = self.pot.as_ref().ok_or_else(|| {
                    Error::InvalidParameter("regularized recovery needs a regularized scheme".into())
                })?;
                u.0.iter().map(|&s| p * (p - 1.0) * pot.f_value(s)).collect()
            }
            Recovery::PositivePower => u.0.iter().map(|&s| pos_pow(s, p)).collect(),
        };
        let mv = self.ops.mass.mul_vec(&v_prev.0);
        let rhs = axpy_vec(1.0 / self.cfg.dt, &mv, &self.lumped_times(&prod, 1.0));
        let sol = solve_spd(&self.v_matrix, &rhs, Some(&v_prev.0), &self.cfg.solver)?;
        Ok((ScalarField(sol.x), sol.iterations))
    }
}
