//! Available-range search over distances and phase splits.

use crate::availability::{unavailability, AvailabilityScenario};
use crate::error::{Error, Result};
use crate::modes::{
    packet_loss_af_cellular, packet_loss_af_multi, packet_loss_d2d, packet_loss_df_cellular,
    packet_loss_df_multi, snr_af_cellular, snr_af_multi, snr_df_multi, uplink_snr_beta, AfSamples,
    LargeScaleTriple, McBudget, SystemParams,
};
use rayon::prelude::*;

/// Initial range guess for the bracketing search, in m.
pub const R_SEED: f64 = 1.0;
pub const RANGE_TOL: f64 = 0.01;
pub const R_MIN: f64 = 1e-3;
/// Reported when the target holds at every range tried.
pub const R_MAX: f64 = 1e6;

/// One scanned split.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub t1: f64,
    pub t2: f64,
    /// `None` when the split cannot meet the target at any range.
    pub range: Option<f64>,
}

/// Outcome of a range maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeResult {
    pub r_star: f64,
    pub t1_star: f64,
    pub t2_star: f64,
    pub candidates: Vec<Candidate>,
    /// `A(r_star) - P_A`.
    pub residual: f64,
    /// Availability evaluations spent by the winning candidate's search.
    pub iterations: usize,
}

struct Search<'a> {
    scenario: &'a AvailabilityScenario,
    t1: f64,
    t2: f64,
    af: Option<AfSamples>,
    evals: usize,
}

impl Search<'_> {
    fn unavailability(&mut self, r: f64) -> Result<f64> {
        self.evals += 1;
        unavailability(self.scenario, r, self.t1, self.t2, self.af.as_ref())
    }

    fn feasible(&mut self, r: f64) -> Result<bool> {
        Ok(self.unavailability(r)? <= 1.0 - self.scenario.qos.p_a)
    }

    fn solve(&mut self) -> Result<f64> {
        largest_feasible_range(|r| self.feasible(r)).map(|(r, _)| r)
    }
}

/// Largest range where a predicate that holds up to some distance still
/// holds: doubling/halving from [`R_SEED`] to a bracket, then bisection to
/// [`RANGE_TOL`]. Returns the range and the number of predicate calls.
///
/// Gives [`R_MAX`] when the predicate holds everywhere and
/// [`Error::Infeasible`] when it fails down to [`R_MIN`].
pub fn largest_feasible_range<F>(mut feasible: F) -> Result<(f64, usize)>
where
    F: FnMut(f64) -> Result<bool>,
{
    let mut calls = 0;
    let mut check = |r: f64| {
        calls += 1;
        feasible(r)
    };
    let mut r = R_SEED;
    let (mut lo, mut hi);
    if check(r)? {
        lo = r;
        loop {
            r *= 2.0;
            if r > R_MAX {
                return Ok((R_MAX, calls));
            }
            if !check(r)? {
                hi = r;
                break;
            }
            lo = r;
        }
    } else {
        hi = r;
        loop {
            r *= 0.5;
            if r < R_MIN {
                return Err(Error::Infeasible(
                    "availability target missed even at zero range".to_string(),
                ));
            }
            if check(r)? {
                lo = r;
                break;
            }
            hi = r;
        }
    }
    while hi - lo > RANGE_TOL {
        let mid = 0.5 * (lo + hi);
        if check(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, calls))
}

fn af_samples(scenario: &AvailabilityScenario) -> Option<AfSamples> {
    scenario
        .mode
        .is_af()
        .then(|| AfSamples::draw(scenario.sys.nt, &scenario.mc))
}

/// Largest range meeting the availability target with phases `t1`, `t2`.
pub fn available_range_fixed_split(
    t1: f64,
    t2: f64,
    scenario: &AvailabilityScenario,
) -> Result<f64> {
    range_with_count(t1, t2, scenario).map(|(r, _)| r)
}

/// [`available_range_fixed_split`] reported as a one-candidate [`RangeResult`].
pub fn solve_fixed_split(t1: f64, t2: f64, scenario: &AvailabilityScenario) -> Result<RangeResult> {
    let (r, iterations) = range_with_count(t1, t2, scenario)?;
    let u = unavailability(scenario, r, t1, t2, af_samples(scenario).as_ref())?;
    Ok(RangeResult {
        r_star: r,
        t1_star: t1,
        t2_star: t2,
        candidates: vec![Candidate {
            t1,
            t2,
            range: Some(r),
        }],
        residual: (1.0 - u) - scenario.qos.p_a,
        iterations,
    })
}

fn range_with_count(t1: f64, t2: f64, scenario: &AvailabilityScenario) -> Result<(f64, usize)> {
    scenario.validate()?;
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(crate::error::invalid("t1", "phases must be positive"));
    }
    let mut s = Search {
        scenario,
        t1,
        t2,
        af: af_samples(scenario),
        evals: 0,
    };
    let r = s.solve()?;
    Ok((r, s.evals))
}

/// Phase splits scanned for a mode: every `T1 = k T_f` with `T2 = D_t - T1`,
/// or the single equal split of the AF modes.
pub fn candidate_splits(scenario: &AvailabilityScenario) -> Vec<(f64, f64)> {
    let t_f = scenario.sys.t_f;
    if scenario.mode.is_af() {
        let (t1, t2) = scenario.af_phases();
        return vec![(t1, t2)];
    }
    let frames = (scenario.transmission_budget() / t_f + 1e-9).floor() as u32;
    (1..frames)
        .map(|k| (k as f64 * t_f, (frames - k) as f64 * t_f))
        .collect()
}

/// Exhaustive scan of phase splits, keeping the longest range and the
/// smallest `T1` among ties.
pub fn maximize_range(scenario: &AvailabilityScenario) -> Result<RangeResult> {
    scenario.validate()?;
    let splits = candidate_splits(scenario);
    if splits.is_empty() {
        return Err(Error::Infeasible(format!(
            "transmission budget {:.3e} s holds fewer than two frames",
            scenario.transmission_budget()
        )));
    }
    let outcomes: Vec<Result<(f64, usize)>> = splits
        .par_iter()
        .map(|&(t1, t2)| match range_with_count(t1, t2, scenario) {
            Err(Error::Infeasible(_)) => Ok((f64::NAN, 0)),
            other => other,
        })
        .collect();
    let mut candidates = Vec::with_capacity(splits.len());
    let mut best: Option<(usize, f64, usize)> = None;
    for (i, (&(t1, t2), out)) in splits.iter().zip(outcomes).enumerate() {
        let (r, evals) = out?;
        let range = (!r.is_nan()).then_some(r);
        if let Some(r) = range {
            if best.is_none_or(|b| r > b.1) {
                best = Some((i, r, evals));
            }
        }
        candidates.push(Candidate { t1, t2, range });
    }
    let (i, r_star, iterations) = best.ok_or_else(|| {
        Error::Infeasible("no phase split meets the availability target".to_string())
    })?;
    let (t1, t2) = splits[i];
    let u = unavailability(scenario, r_star, t1, t2, af_samples(scenario).as_ref())?;
    Ok(RangeResult {
        r_star,
        t1_star: t1,
        t2_star: t2,
        candidates,
        residual: (1.0 - u) - scenario.qos.p_a,
        iterations,
    })
}

/// Packet loss of every mode at one set of gains and equal phases.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeComparison {
    pub gains: LargeScaleTriple,
    pub t: f64,
    pub loss_d2d: f64,
    pub loss_df_cellular: f64,
    pub loss_df_multi: f64,
    pub loss_af_cellular: (f64, f64),
    pub loss_af_multi: (f64, f64),
    /// Ordering checks that failed at this point.
    pub violations: Vec<&'static str>,
}

/// Loss table for all five modes with the ordering checks of the mode
/// comparison; AF entries carry `(mean, std_error)`.
pub fn compare_modes(
    grid: &[LargeScaleTriple],
    t: f64,
    sys: &SystemParams,
    mc: &McBudget,
) -> Result<Vec<ModeComparison>> {
    grid.iter()
        .map(|g| {
            let d2d = packet_loss_d2d(g.mu_sr, t, t, sys)?;
            let dfc = packet_loss_df_cellular(g.mu_sb, g.mu_br, t, t, sys)?;
            let dfm = packet_loss_df_multi(g.mu_sb, g.mu_br, g.mu_sr, t, t, sys)?;
            let afc = packet_loss_af_cellular(g.mu_sb, g.mu_br, 2.0 * t, sys, mc)?;
            let afm = packet_loss_af_multi(g.mu_sb, g.mu_br, g.mu_sr, 2.0 * t, sys, mc)?;
            let mut violations = Vec::new();
            let slack = 1e-12;
            if dfm > d2d * (1.0 + 1e-9) + slack {
                violations.push("df_multi>d2d");
            }
            if dfm > dfc * (1.0 + 1e-9) + slack {
                violations.push("df_multi>df_cellular");
            }
            if afm.mean > afc.mean + 3.0 * (afm.std_error + afc.std_error) + slack {
                violations.push("af_multi>af_cellular");
            }
            Ok(ModeComparison {
                gains: *g,
                t,
                loss_d2d: d2d,
                loss_df_cellular: dfc,
                loss_df_multi: dfm,
                loss_af_cellular: (afc.mean, afc.std_error),
                loss_af_multi: (afm.mean, afm.std_error),
                violations,
            })
        })
        .collect()
}

/// Pointwise SNR ordering: AF multi over AF cellular, DF multi over AF multi.
pub fn snr_ordering_holds(
    beta_gain: f64,
    g: &LargeScaleTriple,
    g_br: f64,
    g_sr: f64,
    sys: &SystemParams,
) -> bool {
    let beta = uplink_snr_beta(g.mu_sb, beta_gain, sys);
    let afc = snr_af_cellular(beta, g.mu_br, g_br, sys);
    let afm = snr_af_multi(beta, g.mu_br, g_br, g.mu_sr, g_sr, sys);
    let dfm = snr_df_multi(g.mu_br, g_br, g.mu_sr, g_sr, sys);
    let tol = 1e-12;
    afm >= afc * (1.0 - tol) && dfm >= afm * (1.0 - tol)
}
