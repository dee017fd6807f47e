//! Parameter sweeps written as CSV.

use crate::config::{ConfigError, Method, Quantity, ScenarioConfig, SweepVar};
use crate::mc_range::{mc_range, McRange};
use rayon::prelude::*;
use urllc_core::availability::unavailability;
use urllc_core::modes::{
    packet_loss_af_cellular, packet_loss_af_multi, packet_loss_d2d, packet_loss_df_cellular,
    packet_loss_df_multi, AfSamples, LargeScaleTriple,
};
use urllc_core::range::{largest_feasible_range, maximize_range, solve_fixed_split, R_MAX};
use urllc_core::special::q_inverse;
use urllc_core::{AvailabilityScenario, Error, ModeId};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: Error,
    },
}

/// One mode at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub value: Value,
    pub t1: f64,
    pub t2: f64,
    pub iterations: usize,
    /// Monte Carlo standard error of `value`, zero when analytic.
    pub se: f64,
    pub mc: Option<McRange>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Number(f64),
    Infeasible,
    Unbounded,
}

impl Value {
    pub fn number(self) -> Option<f64> {
        match self {
            Value::Number(v) => Some(v),
            _ => None,
        }
    }
}

/// Shadowing value that a fraction `1 - P_A` of links fall below.
pub fn quantile_shadowing(p_a: f64, sigma: f64) -> f64 {
    -sigma * q_inverse(1.0 - p_a).expect("P_A validated to lie in (0, 1)")
}

fn gain(sc: &AvailabilityScenario, d: f64, delta: f64) -> Result<f64, Error> {
    sc.channel.gain(d, delta)
}

/// Loss of `sc.mode` at range `r` when every link sees shadowing `delta`.
///
/// AF modes average over `af` when given, otherwise they draw a fresh
/// estimate with its standard error.
pub fn mode_loss(
    sc: &AvailabilityScenario,
    r: f64,
    delta: f64,
    t1: f64,
    t2: f64,
    af: Option<&AfSamples>,
) -> Result<(f64, f64), Error> {
    let sys = &sc.sys;
    let mu = gain(sc, r, delta)?;
    let mu_c = gain(sc, sc.r_cell, delta)?;
    Ok(match sc.mode {
        ModeId::D2d => (packet_loss_d2d(mu, t1, t2, sys)?, 0.0),
        ModeId::DfCellular => (packet_loss_df_cellular(mu, mu, t1, t2, sys)?, 0.0),
        ModeId::DfMulti => (packet_loss_df_multi(mu_c, mu_c, mu, t1, t2, sys)?, 0.0),
        ModeId::AfCellular | ModeId::AfMulti => {
            let g = LargeScaleTriple {
                mu_sb: if sc.mode == ModeId::AfCellular { mu } else { mu_c },
                mu_br: if sc.mode == ModeId::AfCellular { mu } else { mu_c },
                mu_sr: mu,
            };
            match af {
                Some(s) => {
                    let m_b = sys.code(t1)?.m_b();
                    let v = if sc.mode == ModeId::AfCellular {
                        s.af_cellular_error(g.mu_sb, g.mu_br, m_b, sys)
                    } else {
                        let e1 = urllc_core::modes::d2d_phase_error(mu, t1, sys);
                        e1 * s.af_multi_error(&g, m_b, sys)
                    };
                    (v, 0.0)
                }
                None => {
                    let d_t = sc.transmission_budget();
                    let est = if sc.mode == ModeId::AfCellular {
                        packet_loss_af_cellular(g.mu_sb, g.mu_br, d_t, sys, &sc.mc)?
                    } else {
                        packet_loss_af_multi(g.mu_sb, g.mu_br, g.mu_sr, d_t, sys, &sc.mc)?
                    };
                    (est.mean, est.std_error)
                }
            }
        }
    })
}

fn phases(cfg: &ScenarioConfig, sc: &AvailabilityScenario) -> Option<(f64, f64)> {
    if sc.mode.is_af() {
        return Some(sc.af_phases());
    }
    cfg.t1.zip(cfg.t2)
}

fn range_value(r: f64) -> Value {
    if r >= R_MAX {
        Value::Unbounded
    } else {
        Value::Number(r)
    }
}

fn infeasible(t1: f64, t2: f64, iterations: usize) -> Cell {
    Cell {
        value: Value::Infeasible,
        t1,
        t2,
        iterations,
        se: 0.0,
        mc: None,
    }
}

/// Evaluates one mode for a fully resolved config.
pub fn evaluate(cfg: &ScenarioConfig, mode: ModeId) -> Result<Cell, Error> {
    let sc = cfg.scenario(mode);
    let fixed = phases(cfg, &sc);
    match cfg.quantity {
        Quantity::Range => match cfg.method {
            Method::Integral => {
                let res = match fixed {
                    Some((t1, t2)) => solve_fixed_split(t1, t2, &sc),
                    None => maximize_range(&sc),
                };
                match res {
                    Ok(res) => Ok(Cell {
                        value: range_value(res.r_star),
                        t1: res.t1_star,
                        t2: res.t2_star,
                        iterations: res.iterations,
                        se: 0.0,
                        mc: None,
                    }),
                    Err(Error::Infeasible(_)) => {
                        let (t1, t2) = fixed.unwrap_or((f64::NAN, f64::NAN));
                        Ok(infeasible(t1, t2, 0))
                    }
                    Err(e) => Err(e),
                }
            }
            Method::Quantile => {
                let (t1, t2) = fixed.expect("validated: quantile ranges need fixed phases");
                sc.validate()?;
                let delta = quantile_shadowing(sc.qos.p_a, sc.channel.sigma_db);
                let af = sc.mode.is_af().then(|| AfSamples::draw(sc.sys.nt, &sc.mc));
                let found = largest_feasible_range(|r| {
                    Ok(mode_loss(&sc, r, delta, t1, t2, af.as_ref())?.0 <= sc.qos.eps_max)
                });
                let mc = if cfg.mc_range {
                    Some(mc_range(&sc, delta, t1, t2)?)
                } else {
                    None
                };
                match found {
                    Ok((r, iterations)) => Ok(Cell {
                        value: range_value(r),
                        t1,
                        t2,
                        iterations,
                        se: 0.0,
                        mc,
                    }),
                    Err(Error::Infeasible(_)) => Ok(Cell {
                        mc,
                        ..infeasible(t1, t2, 0)
                    }),
                    Err(e) => Err(e),
                }
            }
        },
        Quantity::Availability => {
            let (t1, t2) = fixed.expect("validated: availability needs fixed phases");
            let r = cfg.r.expect("validated: availability needs r");
            sc.validate()?;
            let u = unavailability(&sc, r, t1, t2, None)?;
            Ok(Cell {
                value: Value::Number(1.0 - u),
                t1,
                t2,
                iterations: 1,
                se: 0.0,
                mc: None,
            })
        }
        Quantity::Loss => {
            let (t1, t2) = fixed.expect("validated: loss needs fixed phases");
            let r = cfg.r.expect("validated: loss needs r");
            let (v, se) = mode_loss(&sc, r, 0.0, t1, t2, None)?;
            Ok(Cell {
                value: Value::Number(v),
                t1,
                t2,
                iterations: 1,
                se,
                mc: None,
            })
        }
    }
}

/// Evaluated sweep: one row per grid value, cells ordered facet-major then by mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub grid: Vec<f64>,
    pub facets: Vec<Option<f64>>,
    pub modes: Vec<ModeId>,
    pub rows: Vec<Vec<Cell>>,
}

impl SweepTable {
    pub fn cell(&self, row: usize, facet: usize, mode: ModeId) -> Option<&Cell> {
        let m = self.modes.iter().position(|x| *x == mode)?;
        self.rows.get(row)?.get(facet * self.modes.len() + m)
    }
}

fn label(var: SweepVar, v: f64) -> String {
    match var {
        SweepVar::Nt => format!("{}", v.round() as u64),
        _ => format!("{v}"),
    }
}

fn quantity_name(q: Quantity) -> &'static str {
    match q {
        Quantity::Range => "range",
        Quantity::Availability => "availability",
        Quantity::Loss => "loss",
    }
}

fn validate_sweep(cfg: &ScenarioConfig) -> Result<(), ConfigError> {
    cfg.validate()?;
    let needs_phases = cfg.quantity != Quantity::Range || cfg.method == Method::Quantile;
    if needs_phases && cfg.t1.is_none() && cfg.mode_ids()?.iter().any(|m| !m.is_af()) {
        return Err(ConfigError::Field {
            field: "T1",
            message: "fixed T1 and T2 are needed for this quantity or method".to_string(),
        });
    }
    Ok(())
}

/// Evaluates every `(grid value, facet value, mode)` cell, in parallel.
pub fn run_table(cfg: &ScenarioConfig) -> Result<SweepTable, SweepError> {
    validate_sweep(cfg)?;
    let modes = cfg.mode_ids()?;
    let facets: Vec<Option<f64>> = match cfg.facet {
        Some(_) => cfg.facet_grid.iter().map(|v| Some(*v)).collect(),
        None => vec![None],
    };
    let mut header = vec![cfg.sweep.key().to_string()];
    for f in &facets {
        let suffix = match (cfg.facet, f) {
            (Some(var), Some(v)) => format!("@{}={}", var.key(), label(var, *v)),
            _ => String::new(),
        };
        for m in &modes {
            let q = quantity_name(cfg.quantity);
            header.push(format!("{m}_{q}{suffix}"));
            for col in ["t1", "t2", "iterations", "se"] {
                header.push(format!("{m}_{col}{suffix}"));
            }
            if cfg.mc_range {
                header.push(format!("{m}_range_mc{suffix}"));
            }
        }
    }

    let jobs: Vec<(usize, f64, Option<f64>, ModeId)> = cfg
        .grid
        .iter()
        .enumerate()
        .flat_map(|(i, &v)| {
            let modes = &modes;
            facets
                .iter()
                .flat_map(move |&f| modes.iter().map(move |&m| (i, v, f, m)))
        })
        .collect();
    let configs: Vec<ScenarioConfig> = jobs
        .iter()
        .map(|&(_, v, f, _)| {
            let mut c = cfg.with_value(cfg.sweep, v);
            if let (Some(var), Some(fv)) = (cfg.facet, f) {
                c = c.with_value(var, fv);
            }
            c
        })
        .collect();
    // Jobs whose resolved inputs coincide (AF modes ignore D_p) share one evaluation.
    let keys: Vec<_> = configs
        .iter()
        .zip(&jobs)
        .map(|(c, &(.., m))| (c.scenario(m), c.t1, c.t2, c.r))
        .collect();
    let first: Vec<usize> = (0..jobs.len())
        .map(|i| (0..i).find(|&j| keys[j] == keys[i]).unwrap_or(i))
        .collect();
    let unique: Vec<usize> = (0..jobs.len()).filter(|&i| first[i] == i).collect();
    let evaluated: Vec<Result<Cell, SweepError>> = unique
        .par_iter()
        .map(|&i| {
            let (_, v, f, m) = jobs[i];
            evaluate(&configs[i], m).map_err(|source| SweepError::Numeric {
                context: format!(
                    "{m} at {}={v}{}",
                    cfg.sweep,
                    f.map(|x| format!(", facet {x}")).unwrap_or_default()
                ),
                source,
            })
        })
        .collect();
    let cells: Vec<Result<Cell, SweepError>> = first
        .iter()
        .map(|&j| {
            let k = unique.binary_search(&j).expect("first occurrences are unique");
            match &evaluated[k] {
                Ok(c) => Ok(c.clone()),
                Err(SweepError::Numeric { context, source }) => Err(SweepError::Numeric {
                    context: context.clone(),
                    source: source.clone(),
                }),
                Err(SweepError::Config(e)) => Err(SweepError::Config(e.clone())),
            }
        })
        .collect();
    let per_row = facets.len() * modes.len();
    let mut rows = Vec::with_capacity(cfg.grid.len());
    let mut it = cells.into_iter();
    for _ in 0..cfg.grid.len() {
        let row: Result<Vec<Cell>, SweepError> = it.by_ref().take(per_row).collect();
        rows.push(row?);
    }
    Ok(SweepTable {
        header,
        grid: cfg.grid.clone(),
        facets,
        modes,
        rows,
    })
}

fn num(v: f64) -> String {
    format!("{v:.8e}")
}

fn value_text(v: Value) -> String {
    match v {
        Value::Number(x) => num(x),
        Value::Infeasible => "infeasible".to_string(),
        Value::Unbounded => "unbounded".to_string(),
    }
}

fn phase_text(t: f64) -> String {
    if t.is_finite() {
        num(t)
    } else {
        "infeasible".to_string()
    }
}

/// CSV text of a table: header plus one LF-terminated line per grid value.
pub fn to_csv(table: &SweepTable, mc_range: bool) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.header).expect("in-memory write");
    for (v, row) in table.grid.iter().zip(&table.rows) {
        let mut rec = vec![num(*v)];
        for c in row {
            rec.push(value_text(c.value));
            rec.push(phase_text(c.t1));
            rec.push(phase_text(c.t2));
            rec.push(c.iterations.to_string());
            rec.push(num(c.se));
            if mc_range {
                rec.push(match &c.mc {
                    Some(McRange::Range(r)) => value_text(range_value(*r)),
                    Some(McRange::Infeasible) => "infeasible".to_string(),
                    Some(McRange::Unresolved) | None => "unresolved".to_string(),
                });
            }
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

/// Runs the sweep and returns the CSV text.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<String, SweepError> {
    let table = run_table(cfg)?;
    Ok(to_csv(&table, cfg.mc_range))
}
