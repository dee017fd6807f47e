use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use urllc_cli::presets::{load_preset, preset_names};
use urllc_cli::{run_sweep, CliError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "urllc", version, about = "Availability and range analysis for short-packet links")]
struct Cli {
    /// Worker threads for sweeps (defaults to all cores).
    #[arg(long, env = "URLLC_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML scenario file.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in figure preset.
    Preset {
        name: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the preset's TOML instead of running it.
        #[arg(long)]
        show: bool,
    },
    /// Maximize the range for every mode in a scenario file.
    Range { config: PathBuf },
    /// Run the analytic-vs-oracle checks and print a report.
    Oracle {
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_config(path: &PathBuf) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(text.parse()?)
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(&p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Sweep { config, out } => {
            let cfg = read_config(&config)?;
            let out = out.or_else(|| cfg.output.clone().map(PathBuf::from));
            emit(&run_sweep(&cfg)?, out)
        }
        Command::Preset { name, seed, out, show } => {
            let mut cfg = load_preset(&name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown preset `{name}`; choose from {}",
                    preset_names().collect::<Vec<_>>().join(", ")
                ))
            })??;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if show {
                return emit(&cfg.to_toml()?, out);
            }
            emit(&run_sweep(&cfg)?, out)
        }
        Command::Range { config } => {
            let cfg = read_config(&config)?;
            emit(&urllc_cli::range_report(&cfg)?, None)
        }
        Command::Oracle { tolerance_scale, out } => {
            let opts = urllc_cli::oracle::OracleOptions {
                tolerance_scale,
                ..Default::default()
            };
            let report = urllc_cli::oracle::run_oracle_suite(&opts)?;
            emit(&report.to_csv(), out)?;
            if report.all_pass() {
                Ok(())
            } else {
                Err(CliError::Oracle(report.failures()))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
