//! Cartesian parameter sweeps run in parallel.

use std::path::PathBuf;

use chemrep_core::Scheme;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::run::execute;
use crate::{CliError, EXIT_OK};

#[derive(Debug, Clone, Default)]
pub struct SweepAxes {
    pub schemes: Vec<Scheme>,
    pub ps: Vec<f64>,
    pub epss: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub index: usize,
    pub config: RunConfig,
    pub status: Result<usize, (i32, String)>,
}

impl SweepAxes {
    /// Empty axes fall back to the base value.
    pub fn expand(&self, base: &RunConfig) -> Vec<RunConfig> {
        let or_base = |v: &Vec<f64>, b: f64| if v.is_empty() { vec![b] } else { v.clone() };
        let schemes = if self.schemes.is_empty() { vec![base.scheme] } else { self.schemes.clone() };
        let ps = or_base(&self.ps, base.p);
        let epss = or_base(&self.epss, base.eps);
        let mut out = Vec::new();
        for &scheme in &schemes {
            for &p in &ps {
                for &eps in &epss {
                    let index = out.len();
                    let mut c = base.clone();
                    c.scheme = scheme;
                    c.p = p;
                    c.eps = eps;
                    c.out_dir = base.out_dir.join(format!("{index:03}_{scheme}_p{p}_eps{eps}"));
                    out.push(c);
                }
            }
        }
        out
    }
}

/// Runs every point of the sweep under `base.out_dir` and writes
/// `manifest.csv`. Failed runs are recorded and do not stop the others.
pub fn sweep(base: &RunConfig, axes: &SweepAxes) -> Result<Vec<SweepEntry>, CliError> {
    let configs = axes.expand(base);
    for c in &configs {
        c.validate()?;
    }
    std::fs::create_dir_all(&base.out_dir).map_err(CliError::io(&base.out_dir))?;
    let entries: Vec<SweepEntry> = configs
        .into_par_iter()
        .enumerate()
        .map(|(index, config)| {
            let status = execute(&config)
                .map(|s| s.steps_completed)
                .map_err(|e| (e.exit_code(), e.to_string()));
            SweepEntry { index, config, status }
        })
        .collect();

    let manifest: PathBuf = base.out_dir.join("manifest.csv");
    let mut w = csv::Writer::from_path(&manifest)?;
    w.write_record(["index", "scheme", "p", "eps", "dir", "status", "steps_completed", "exit_code", "message"])?;
    for e in &entries {
        let dir = e.config.out_dir.file_name().map(|d| d.to_string_lossy().into_owned()).unwrap_or_default();
        let (status, steps, code, msg) = match &e.status {
            Ok(steps) => ("ok", steps.to_string(), EXIT_OK, String::new()),
            Err((code, msg)) => ("failed", String::new(), *code, msg.clone()),
        };
        w.write_record([
            e.index.to_string(),
            e.config.scheme.to_string(),
            e.config.p.to_string(),
            e.config.eps.to_string(),
            dir,
            status.to_string(),
            steps,
            code.to_string(),
            msg,
        ])?;
    }
    w.flush().map_err(CliError::io(&manifest))?;
    Ok(entries)
}
