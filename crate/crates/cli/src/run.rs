//! A single time-stepping run with CSV time series.

use std::fs;
use std::path::Path;

use chemrep_core::diagnostics::RunRecord;
use chemrep_core::{PicardReport, SchemeState, Simulator};

use crate::config::RunConfig;
use crate::{vtk, CliError};

pub const SERIES_HEADER: [&str; 10] = [
    "step",
    "t",
    "mass",
    "energy_modified",
    "energy_exact",
    "residual_RE",
    "min_u",
    "min_v",
    "picard_iters",
    "solver_iters",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps_completed: usize,
    pub last: RunRecord,
}

pub fn simulator(cfg: &RunConfig) -> Result<Simulator, CliError> {
    cfg.validate()?;
    Simulator::new(cfg.mesh()?, cfg.scheme_config()).map_err(|e| CliError::Config(e.to_string()))
}

pub fn initial_state(sim: &Simulator, cfg: &RunConfig) -> Result<SchemeState, CliError> {
    sim.init_preset(&cfg.ic).map_err(|e| CliError::Config(e.to_string()))
}

fn row(r: &RunRecord) -> [String; 10] {
    [
        r.step.to_string(),
        r.time.to_string(),
        r.mass.to_string(),
        r.energy_modified.to_string(),
        r.energy_exact.to_string(),
        r.residual_re.map_or_else(String::new, |x| x.to_string()),
        r.min_u.to_string(),
        r.min_v.to_string(),
        r.picard_iters.to_string(),
        r.max_solver_iters.to_string(),
    ]
}

fn snapshot(dir: &Path, sim: &Simulator, state: &SchemeState) -> Result<(), CliError> {
    let path = dir.join(format!("step_{:06}.vtk", state.step));
    vtk::write_file(&path, sim.mesh(), state)
}

/// Runs `cfg`, writing `config.echo`, `series.csv` and optional snapshots
/// into `cfg.out_dir`. On a failed step the last completed step is still
/// written before the error is returned.
pub fn execute(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let sim = simulator(cfg)?;
    let out = &cfg.out_dir;
    fs::create_dir_all(out).map_err(CliError::io(out))?;
    fs::write(out.join("config.echo"), cfg.echo()).map_err(CliError::io(out.join("config.echo")))?;
    let snap_dir = out.join("snapshots");
    if cfg.snapshot_every > 0 {
        fs::create_dir_all(&snap_dir).map_err(CliError::io(&snap_dir))?;
    }

    let mut csv = csv::Writer::from_path(out.join("series.csv"))?;
    csv.write_record(SERIES_HEADER)?;
    let re_norm = cfg.track_re.then_some(cfg.re_laplacian);
    let record = |prev: Option<&SchemeState>, state: &SchemeState, report: Option<&PicardReport>| {
        RunRecord::with_re_norm(&sim, prev, state, report, re_norm)
            .map_err(|source| CliError::Step { step: state.step, source })
    };

    let mut state = initial_state(&sim, cfg)?;
    let mut last = record(None, &state, None)?;
    csv.write_record(row(&last))?;
    if cfg.snapshot_every > 0 {
        snapshot(&snap_dir, &sim, &state)?;
    }
    let mut last_written = 0;

    let mut failure = None;
    for n in 1..=cfg.steps {
        let (next, report) = match sim.step(&state) {
            Ok(x) => x,
            Err(source) => {
                failure = Some(CliError::Step { step: n, source });
                break;
            }
        };
        let rec = record(Some(&state), &next, Some(&report))?;
        if !rec.is_finite() {
            failure = Some(CliError::NonFinite { step: n });
            break;
        }
        state = next;
        last = rec;
        if n % cfg.output_every == 0 || n == cfg.steps {
            csv.write_record(row(&last))?;
            last_written = n;
        }
        if cfg.snapshot_every > 0 && n % cfg.snapshot_every == 0 {
            snapshot(&snap_dir, &sim, &state)?;
        }
    }
    if failure.is_some() && last_written != last.step {
        csv.write_record(row(&last))?;
    }
    csv.flush().map_err(CliError::io(out.join("series.csv")))?;
    match failure {
        Some(e) => Err(e),
        None => Ok(RunSummary { steps_completed: last.step, last }),
    }
}

/// Advances `cfg` to `step` without writing a series.
pub fn state_at(cfg: &RunConfig, step: usize) -> Result<(Simulator, SchemeState), CliError> {
    let sim = simulator(cfg)?;
    let mut state = initial_state(&sim, cfg)?;
    for n in 1..=step {
        state = sim.step(&state).map_err(|source| CliError::Step { step: n, source })?.0;
    }
    Ok((sim, state))
}
