//! Scenario files, sweeps and oracle checks on top of `urllc_core`.

pub mod config;
pub mod mc_range;
pub mod oracle;
pub mod presets;
pub mod suites;
pub mod sweep;

use std::fmt::Write as _;
use urllc_core::range::{maximize_range, solve_fixed_split, R_MAX};
use urllc_core::Error;

pub use config::{ConfigError, Method, Quantity, ScenarioConfig, SweepVar};
pub use sweep::{run_sweep, run_table, Cell, SweepError, SweepTable, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    #[error("oracle checks failed: {}", .0.join(", "))]
    Oracle(Vec<String>),
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(c) => CliError::Config(c),
            SweepError::Numeric { context, source } => {
                CliError::Numeric(Error::Domain(format!("{context}: {source}")))
            }
        }
    }
}

impl CliError {
    /// 1 for bad input, 2 for numeric failures, 3 for failed oracle checks.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Oracle(_) => 3,
        }
    }
}

/// Range maximization for every mode of `cfg`, as text.
///
/// Fixed `T1`/`T2` in the config restrict the scan to that split.
pub fn range_report(cfg: &ScenarioConfig) -> Result<String, CliError> {
    cfg.validate_base()?;
    let mut out = String::new();
    for mode in cfg.mode_ids()? {
        let sc = cfg.scenario(mode);
        let res = match cfg.t1.zip(cfg.t2) {
            Some((t1, t2)) if !mode.is_af() => solve_fixed_split(t1, t2, &sc),
            _ => maximize_range(&sc),
        };
        let _ = writeln!(out, "mode {mode}");
        match res {
            Ok(r) => {
                if r.r_star >= R_MAX {
                    let _ = writeln!(out, "  r_star      unbounded");
                } else {
                    let _ = writeln!(out, "  r_star      {:.4} m", r.r_star);
                }
                let _ = writeln!(out, "  T1*, T2*    {:.1e} s, {:.1e} s", r.t1_star, r.t2_star);
                let _ = writeln!(out, "  residual    {:.3e}", r.residual);
                let _ = writeln!(out, "  iterations  {}", r.iterations);
                let _ = writeln!(out, "  candidates");
                for c in &r.candidates {
                    let range = match c.range {
                        Some(v) if v >= R_MAX => "unbounded".to_string(),
                        Some(v) => format!("{v:.4}"),
                        None => "infeasible".to_string(),
                    };
                    let _ = writeln!(out, "    {:.1e} {:.1e} {range}", c.t1, c.t2);
                }
            }
            Err(Error::Infeasible(why)) => {
                let _ = writeln!(out, "  infeasible: {why}");
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}
