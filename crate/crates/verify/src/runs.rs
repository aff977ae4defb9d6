//! Short simulations shared by the tests and the acceptance checks.

use chemrep_core::presets::IcPreset;
use chemrep_core::{Result, Scheme, SchemeConfig, SchemeState, Simulator, StructuredTriMesh};

#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub nx: usize,
    pub p: f64,
    pub eps: f64,
    pub dt: f64,
    pub steps: usize,
    pub picard_tol: f64,
    pub linear_tol: f64,
}

impl RunSettings {
    pub fn new(nx: usize, p: f64, eps: f64, dt: f64, steps: usize) -> Self {
        Self { nx, p, eps, dt, steps, picard_tol: 1e-10, linear_tol: 1e-12 }
    }

    pub fn simulator(&self, scheme: Scheme) -> Simulator {
        let mesh = StructuredTriMesh::new(self.nx, self.nx, 2.0, 2.0).unwrap();
        let mut cfg = SchemeConfig::new(scheme, self.p, self.eps, self.dt);
        cfg.picard_tol = self.picard_tol;
        cfg.solver.rel_tol = self.linear_tol;
        Simulator::new(mesh, cfg).unwrap()
    }
}

/// Runs `steps` steps from `ic`, calling `visit(sim, prev, curr)` after each.
pub fn run_with(
    scheme: Scheme,
    ic: IcPreset,
    s: &RunSettings,
    mut visit: impl FnMut(&Simulator, &SchemeState, &SchemeState),
) -> Result<SchemeState> {
    let sim = s.simulator(scheme);
    let mut state = sim.init_preset(&ic)?;
    for _ in 0..s.steps {
        let (next, _) = sim.step(&state)?;
        visit(&sim, &state, &next);
        state = next;
    }
    Ok(state)
}
