use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kirchhoff_cli::config::{load, load_experiment, load_sweep};
use kirchhoff_cli::quadform_cmd::render_quadform;
use kirchhoff_cli::run::{MANIFEST_FILE, TIMESERIES_FILE};
use kirchhoff_cli::{report_from_files, run_experiment, run_sweep, verify_quadform_cmd, QuadformConfig, RunError};

/// Spectral simulator and invariant checks for the Kirchhoff-Pokhozhaev equation.
#[derive(Parser)]
#[command(name = "kpsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; defaults apply to every missing field.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the `output` field).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a field by dotted path, e.g. `--set params.a=0.25`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Seed for randomized initial data.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check the quadratic-form coefficients and derivative identity.
    VerifyQuadform {
        #[command(flatten)]
        common: Common,
    },
    /// Recompute verdicts from an existing run directory.
    Report {
        /// Run directory holding the manifest and time series.
        #[arg(long)]
        out: PathBuf,
        /// Time series to read instead of the one in the run directory.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VERDICT: u8 = 4;

fn fail(e: RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(match e {
        RunError::Config(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    })
}

fn with_flags(mut overrides: Vec<String>, prefix: &str, out: &Option<PathBuf>, seed: Option<u64>) -> Vec<String> {
    if let Some(out) = out {
        overrides.push(format!(
            "{prefix}output={}",
            serde_json::Value::String(out.display().to_string())
        ));
    }
    if let Some(seed) = seed {
        overrides.push(format!("{prefix}seed={seed}"));
    }
    overrides
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| RunError::io(path, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { common, seed } => {
            let overrides = with_flags(common.overrides, "", &common.out, seed);
            let cfg = match load_experiment(common.config.as_deref(), &overrides) {
                Ok(c) => c,
                Err(e) => return fail(e.into()),
            };
            let out = PathBuf::from(&cfg.output);
            match run_experiment(&cfg, &out) {
                Ok(art) => {
                    print!("{}", art.report);
                    println!("status: {}", art.status.name());
                    ExitCode::from(art.status.exit_code())
                }
                Err(e) => fail(e),
            }
        }
        Command::Sweep { common, seed, workers } => {
            let mut overrides = with_flags(common.overrides, "base.", &None, seed);
            if let Some(w) = workers {
                overrides.push(format!("workers={w}"));
            }
            let sweep = match load_sweep(common.config.as_deref(), &overrides) {
                Ok(s) => s,
                Err(e) => return fail(e.into()),
            };
            let out = common.out.unwrap_or_else(|| PathBuf::from(&sweep.base.output));
            match run_sweep(&sweep, &out) {
                Ok(summary) => {
                    print!("{summary}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::VerifyQuadform { common } => {
            let cfg: QuadformConfig = match load(common.config.as_deref(), &common.overrides) {
                Ok(c) => c,
                Err(e) => return fail(e.into()),
            };
            let rows = verify_quadform_cmd(&cfg);
            let table = render_quadform(&rows, &cfg);
            print!("{table}");
            if let Some(out) = common.out {
                if let Err(e) = write(&out.join("quadform.csv"), &table) {
                    return fail(e);
                }
            }
            if rows.iter().any(|r| r.passed(&cfg) == Some(false)) {
                ExitCode::from(EXIT_VERDICT)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Report { out, csv } => {
            let csv = csv.unwrap_or_else(|| out.join(TIMESERIES_FILE));
            match report_from_files(&out.join(MANIFEST_FILE), &csv) {
                Ok((status, report)) => {
                    print!("{report}");
                    println!("status: {}", status.name());
                    ExitCode::from(status.exit_code())
                }
                Err(e) => fail(e),
            }
        }
    }
}
