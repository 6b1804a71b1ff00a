use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fluxon_cli::commands::{self, Axis};
use fluxon_cli::schema::{PathSpec, RunManifest, WordSpec};
use fluxon_cli::verify::{verify, Level};
use fluxon_cli::CliError;

/// Zero modes, metric, curvature and braiding holonomy of point fluxons.
#[derive(Parser)]
#[command(name = "fluxon", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Quadrature tolerance for metric and Ψ integrals.
    #[arg(long, global = true, allow_hyphen_values = true)]
    quad_tol: Option<f64>,
    /// DOPRI5 tolerance for parallel transport.
    #[arg(long, global = true, allow_hyphen_values = true)]
    ode_tol: Option<f64>,
    /// Finite-difference step as a fraction of the nearest fluxon distance.
    #[arg(long, global = true, allow_hyphen_values = true)]
    fd_step: Option<f64>,
    /// Minimum fluxon separation along paths and around curvature cells.
    #[arg(long, global = true, allow_hyphen_values = true)]
    collision_guard: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Zero-mode counts and fluxon classification.
    Modes { config: PathBuf },
    /// Metric on the free modes by contour factorization and brute-force quadrature.
    Metric {
        config: PathBuf,
        #[arg(long)]
        factorized_only: bool,
    },
    /// Abelian curvature as one fluxon sweeps a grid (CSV x,y,R).
    CurvatureMap {
        config: PathBuf,
        /// 1-based index of the moving fluxon.
        #[arg(long)]
        mover: usize,
        /// min:max:n
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// min:max:n
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Holonomy of a closed path (numeric) and/or a braid word (analytic).
    Holonomy {
        config: PathBuf,
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long)]
        word: Option<PathBuf>,
    },
    /// Randomized invariant suite.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        level: Level,
    },
}

const DEFAULT_SEED: u64 = 1;

fn manifest(name: &str, config: Option<&PathBuf>, g: &Global) -> Result<RunManifest, CliError> {
    let m = RunManifest {
        command: name.into(),
        config: config.map(|p| p.display().to_string()),
        quad_tol: g.quad_tol,
        ode_tol: g.ode_tol,
        fd_step: g.fd_step,
        collision_guard: g.collision_guard,
        output: g.output.as_ref().map(|p| p.display().to_string()),
        seed: g.seed,
    };
    m.check()?;
    Ok(m)
}

fn json<T: serde::Serialize>(report: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| CliError::Validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    let (text, failed) = match &cli.command {
        Command::Modes { config } => {
            let m = manifest("modes", Some(config), g)?;
            (json(&commands::modes(commands::load_config(config)?, m)?)?, None)
        }
        Command::Metric { config, factorized_only } => {
            let m = manifest("metric", Some(config), g)?;
            (json(&commands::metric(commands::load_config(config)?, *factorized_only, m)?)?, None)
        }
        Command::CurvatureMap { config, mover, x, y } => {
            let m = manifest("curvature-map", Some(config), g)?;
            let (x, y) = (Axis::parse(x)?, Axis::parse(y)?);
            (commands::curvature_map(commands::load_config(config)?, *mover, x, y, &m)?, None)
        }
        Command::Holonomy { config, path, word } => {
            let m = manifest("holonomy", Some(config), g)?;
            let path: Option<PathSpec> = path.as_deref().map(commands::read_json).transpose()?;
            let word: Option<WordSpec> = word.as_deref().map(commands::read_json).transpose()?;
            let report = commands::holonomy_report(commands::load_config(config)?, path.as_ref(), word.as_ref(), m)?;
            (json(&report)?, None)
        }
        Command::Verify { level } => {
            let mut m = manifest("verify", None, g)?;
            let seed = g.seed.unwrap_or(DEFAULT_SEED);
            m.seed = Some(seed);
            let report = verify(*level, seed, m);
            let failed: Vec<String> = report.properties.iter().filter(|p| !p.passed).map(|p| p.name.clone()).collect();
            (json(&report)?, (!failed.is_empty()).then(|| failed.join(", ")))
        }
    };
    match &g.output {
        Some(p) => std::fs::write(p, &text)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    match failed {
        Some(names) => Err(CliError::Property(names)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fluxon: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
