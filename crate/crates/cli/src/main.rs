use std::path::PathBuf;
use std::process::ExitCode;

use chemrep_cli::run::state_at;
use chemrep_cli::{config::RunConfig, execute, sweep, vtk, CliError, SweepAxes, EXIT_BAD_CONFIG};
use chemrep_core::Scheme;
use chemrep_verify::Level;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chemrep", version, about = "Chemo-repulsion with nonlinear production: FE schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write series.csv.
    Run(RunArgs),
    /// Run the Cartesian product of scheme, p and eps values in parallel.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma separated schemes (UV, UVEPS, USEPS, US0).
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<Scheme>,
        #[arg(long, value_delimiter = ',')]
        ps: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        epss: Vec<f64>,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Run the acceptance criteria.
    Verify {
        #[arg(default_value = "fast")]
        level: Level,
    },
    /// Write the state at a given step as legacy VTK.
    Dump {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 0)]
        step: usize,
        #[arg(long, short)]
        output: PathBuf,
    },
}

/// Overrides of configuration file keys.
#[derive(Args)]
#[command(next_help_heading = "Configuration")]
struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    scheme: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    steps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    nx: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    ny: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lx: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    ly: Option<String>,
    /// gauss, cosine or constant:U:V.
    #[arg(long, allow_hyphen_values = true)]
    ic: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    picard_tol: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    picard_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    linear_tol: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    anderson_depth: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    output_every: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    out_dir: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    track_re: Option<String>,
    /// consistent or lumped.
    #[arg(long, allow_hyphen_values = true)]
    re_laplacian: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    snapshot_every: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let pairs = [
            ("scheme", &self.scheme),
            ("p", &self.p),
            ("eps", &self.eps),
            ("dt", &self.dt),
            ("steps", &self.steps),
            ("nx", &self.nx),
            ("ny", &self.ny),
            ("lx", &self.lx),
            ("ly", &self.ly),
            ("ic", &self.ic),
            ("picard_tol", &self.picard_tol),
            ("picard_max", &self.picard_max),
            ("linear_tol", &self.linear_tol),
            ("anderson_depth", &self.anderson_depth),
            ("output_every", &self.output_every),
            ("out_dir", &self.out_dir),
            ("track_re", &self.track_re),
            ("re_laplacian", &self.re_laplacian),
            ("snapshot_every", &self.snapshot_every),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let s = execute(&cfg)?;
            println!(
                "{} steps to t = {}: mass {}, modified energy {}, min u {}",
                s.steps_completed, s.last.time, s.last.mass, s.last.energy_modified, s.last.min_u
            );
        }
        Command::Sweep { run, schemes, ps, epss, jobs } => {
            let base = run.resolve()?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global()
                .map_err(|e| CliError::Config(e.to_string()))?;
            let entries = sweep(&base, &SweepAxes { schemes, ps, epss })?;
            let failed = entries.iter().filter(|e| e.status.is_err()).count();
            for e in &entries {
                match &e.status {
                    Ok(n) => println!("{} ok ({n} steps)", e.config.out_dir.display()),
                    Err((_, msg)) => println!("{} failed: {msg}", e.config.out_dir.display()),
                }
            }
            if failed > 0 {
                return Err(CliError::Sweep { failed, total: entries.len() });
            }
        }
        Command::Verify { level } => {
            let outcomes = chemrep_verify::run(level, |o| println!("{o}"));
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} of {} criteria pass", outcomes.len() - failed, outcomes.len());
            if failed > 0 {
                return Err(CliError::Verify { failed });
            }
        }
        Command::Dump { run, step, output } => {
            let cfg = run.resolve()?;
            let (sim, state) = state_at(&cfg, step)?;
            vtk::write_file(&output, sim.mesh(), &state)?;
            println!("wrote {}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_BAD_CONFIG as u8) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chemrep: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
