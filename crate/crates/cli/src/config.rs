//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chemrep_core::diagnostics::LaplacianNorm;
use chemrep_core::presets::IcPreset;
use chemrep_core::{Scheme, SchemeConfig, SolverConfig, StructuredTriMesh};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub p: f64,
    pub eps: f64,
    pub dt: f64,
    pub steps: usize,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub ic: IcPreset,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub linear_tol: f64,
    pub anderson_depth: usize,
    pub output_every: usize,
    pub out_dir: PathBuf,
    pub track_re: bool,
    pub re_laplacian: LaplacianNorm,
    /// Write a VTK snapshot every this many steps; 0 disables snapshots.
    pub snapshot_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::UvEps,
            p: 1.5,
            eps: 1e-3,
            dt: 1e-4,
            steps: 500,
            nx: 20,
            ny: 20,
            lx: 2.0,
            ly: 2.0,
            ic: IcPreset::Gauss,
            picard_tol: 1e-3,
            picard_max: 200,
            linear_tol: 1e-10,
            anderson_depth: 5,
            output_every: 1,
            out_dir: PathBuf::from("out"),
            track_re: true,
            re_laplacian: LaplacianNorm::Consistent,
            snapshot_every: 0,
        }
    }
}

pub const KEYS: [&str; 19] = [
    "scheme",
    "p",
    "eps",
    "dt",
    "steps",
    "nx",
    "ny",
    "lx",
    "ly",
    "ic",
    "picard_tol",
    "picard_max",
    "linear_tol",
    "anderson_depth",
    "output_every",
    "out_dir",
    "track_re",
    "re_laplacian",
    "snapshot_every",
];

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key} = {value}: {why}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| bad(key, value, e))
}

fn laplacian_name(n: LaplacianNorm) -> &'static str {
    match n {
        LaplacianNorm::Lumped => "lumped",
        LaplacianNorm::Consistent => "consistent",
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key.trim() {
            "scheme" => self.scheme = value.parse().map_err(|e| bad(key, value, e))?,
            "p" => self.p = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "steps" => self.steps = num(key, value)?,
            "nx" => self.nx = num(key, value)?,
            "ny" => self.ny = num(key, value)?,
            "lx" => self.lx = num(key, value)?,
            "ly" => self.ly = num(key, value)?,
            "ic" => self.ic = value.parse().map_err(|e| bad(key, value, e))?,
            "picard_tol" => self.picard_tol = num(key, value)?,
            "picard_max" => self.picard_max = num(key, value)?,
            "linear_tol" => self.linear_tol = num(key, value)?,
            "anderson_depth" => self.anderson_depth = num(key, value)?,
            "output_every" => self.output_every = num(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "track_re" => self.track_re = num(key, value)?,
            "re_laplacian" => {
                self.re_laplacian = match value {
                    "lumped" => LaplacianNorm::Lumped,
                    "consistent" => LaplacianNorm::Consistent,
                    _ => return Err(bad(key, value, "expected lumped or consistent")),
                }
            }
            "snapshot_every" => self.snapshot_every = num(key, value)?,
            other => return Err(CliError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got '{raw}'", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn get(&self, key: &str) -> String {
        match key {
            "scheme" => self.scheme.to_string(),
            "p" => self.p.to_string(),
            "eps" => self.eps.to_string(),
            "dt" => self.dt.to_string(),
            "steps" => self.steps.to_string(),
            "nx" => self.nx.to_string(),
            "ny" => self.ny.to_string(),
            "lx" => self.lx.to_string(),
            "ly" => self.ly.to_string(),
            "ic" => self.ic.to_string(),
            "picard_tol" => self.picard_tol.to_string(),
            "picard_max" => self.picard_max.to_string(),
            "linear_tol" => self.linear_tol.to_string(),
            "anderson_depth" => self.anderson_depth.to_string(),
            "output_every" => self.output_every.to_string(),
            "out_dir" => self.out_dir.display().to_string(),
            "track_re" => self.track_re.to_string(),
            "re_laplacian" => laplacian_name(self.re_laplacian).to_string(),
            "snapshot_every" => self.snapshot_every.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Every key with its resolved value, in a form [`RunConfig::apply_text`] reads back.
    pub fn echo(&self) -> String {
        let mut s = String::from("# resolved configuration\n");
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.get(key));
        }
        s
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let mut cfg = SchemeConfig::new(self.scheme, self.p, self.eps, self.dt);
        cfg.picard_tol = self.picard_tol;
        cfg.picard_max = self.picard_max;
        cfg.anderson_depth = self.anderson_depth;
        cfg.solver = SolverConfig { rel_tol: self.linear_tol, ..SolverConfig::default() };
        cfg
    }

    pub fn mesh(&self) -> Result<StructuredTriMesh, CliError> {
        StructuredTriMesh::new(self.nx, self.ny, self.lx, self.ly).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.scheme_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.mesh()?;
        if self.steps == 0 {
            return Err(CliError::Config("steps must be at least 1".into()));
        }
        if self.output_every == 0 {
            return Err(CliError::Config("output_every must be at least 1".into()));
        }
        if !(self.linear_tol > 0.0) {
            return Err(CliError::Config(format!("linear_tol must be positive, got {}", self.linear_tol)));
        }
        Ok(())
    }
}
