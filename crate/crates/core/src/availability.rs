//! Network availability over correlated lognormal shadowing.
//!
//! Every evaluation works with the unavailability `U = 1 - A` so the tiny
//! values near a `1 - 1e-5` target keep their relative precision. Two-link
//! integrals use the conditional-Gaussian reduction: for an outer shadowing
//! value `d`, the inner one is Gaussian with mean `rho d` and deviation
//! `sigma sqrt(1 - rho^2)`, so the inner integral is a single `Phi`.

use crate::channel::{
    db_to_linear, large_scale_gain_db, shadowing_correlation, ChannelParams, MERGED_RHO,
};
use crate::error::{invalid, Error, Result};
use crate::modes::{
    af_phase, combine_series, df_multi_combine, df_multi_second_phase, downlink_error,
    uplink_error, AfSamples, DelayBudget, LargeScaleTriple, McBudget, ModeId, SystemParams,
};
use crate::quadrature::gauss_kronrod;
use crate::special::normal_cdf;
use std::collections::BTreeMap;

/// Reliability and availability targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosRequirement {
    pub eps_max: f64,
    pub p_a: f64,
}

impl Default for QosRequirement {
    fn default() -> Self {
        QosRequirement {
            eps_max: 1e-7,
            p_a: 0.99999,
        }
    }
}

impl QosRequirement {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_max > 0.0 && self.eps_max < 1.0) {
            return Err(invalid("eps_max", "must lie in (0, 1)"));
        }
        if !(self.p_a > 0.0 && self.p_a < 1.0) {
            return Err(invalid("p_a", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Half-width of the threshold search bracket, in shadowing deviations.
pub const BRACKET_SIGMAS: f64 = 20.0;
/// Truncation of shadowing integrals, in deviations.
pub const TRUNCATION_SIGMAS: f64 = 8.0;
pub const THRESHOLD_TOL_DB: f64 = 1e-6;
const QUAD_REL_TOL: f64 = 1e-6;
const QUAD_MAX_PANELS: usize = 4000;

fn residual(loss: f64, ln_eps: f64) -> f64 {
    loss.max(1e-300).ln() - ln_eps
}

/// Shadowing value where a decreasing loss curve crosses `eps_max`.
///
/// Returns `+inf` when even `+20 sigma` leaves the loss above `eps_max`, and
/// `-inf` when the loss is already below it at `-20 sigma`.
pub fn shadow_threshold<F: FnMut(f64) -> f64>(loss_fn: F, eps_max: f64, sigma: f64) -> f64 {
    shadow_threshold_near(loss_fn, eps_max, sigma, None)
}

/// [`shadow_threshold`] with a starting guess used to grow a local bracket.
pub fn shadow_threshold_near<F: FnMut(f64) -> f64>(
    mut loss_fn: F,
    eps_max: f64,
    sigma: f64,
    guess: Option<f64>,
) -> f64 {
    let ln_eps = eps_max.ln();
    let lo_lim = -BRACKET_SIGMAS * sigma;
    let hi_lim = BRACKET_SIGMAS * sigma;
    let mut h = |d: f64| residual(loss_fn(d), ln_eps);

    let bracket = match guess.filter(|g| g.is_finite() && *g > lo_lim && *g < hi_lim) {
        Some(g) => {
            let hg = h(g);
            if hg == 0.0 {
                return g;
            }
            let dir = if hg > 0.0 { 1.0 } else { -1.0 };
            let mut step = 0.25;
            let (mut a, mut ha) = (g, hg);
            loop {
                let b = (a + dir * step).clamp(lo_lim, hi_lim);
                let hb = h(b);
                if (hb > 0.0) != (hg > 0.0) || hb == 0.0 {
                    break if dir > 0.0 {
                        (a, ha, b, hb)
                    } else {
                        (b, hb, a, ha)
                    };
                }
                if b == lo_lim {
                    return f64::NEG_INFINITY;
                }
                if b == hi_lim {
                    return f64::INFINITY;
                }
                a = b;
                ha = hb;
                step *= 2.0;
            }
        }
        None => {
            let hh = h(hi_lim);
            if hh > 0.0 {
                return f64::INFINITY;
            }
            let hl = h(lo_lim);
            if hl < 0.0 {
                return f64::NEG_INFINITY;
            }
            (lo_lim, hl, hi_lim, hh)
        }
    };
    refine_root(&mut h, bracket)
}

/// Illinois false position with a bisection every fourth step.
fn refine_root<H: FnMut(f64) -> f64>(h: &mut H, bracket: (f64, f64, f64, f64)) -> f64 {
    let (mut a, mut ha, mut b, mut hb) = bracket;
    if ha == 0.0 {
        return a;
    }
    if hb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    for it in 0..200 {
        if b - a <= THRESHOLD_TOL_DB {
            break;
        }
        let mut c = if it % 4 == 3 || !ha.is_finite() || !hb.is_finite() {
            0.5 * (a + b)
        } else {
            b - hb * (b - a) / (hb - ha)
        };
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let hc = h(c);
        if hc == 0.0 || hc.abs() < 1e-13 {
            return c;
        }
        if hc > 0.0 {
            a = c;
            ha = hc;
            if side == 1 {
                hb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            hb = hc;
            if side == -1 {
                ha *= 0.5;
            }
            side = -1;
        }
    }
    0.5 * (a + b)
}

/// Availability of one link whose threshold is `f_delta`: `Q(F / sigma)`.
pub fn availability_from_threshold(f_delta: f64, sigma: f64) -> f64 {
    normal_cdf(-f_delta / sigma)
}

/// Single-link availability at distance `r` for a loss curve in the link gain.
pub fn availability_single_link<L: Fn(f64) -> f64>(
    r: f64,
    channel: &ChannelParams,
    eps_max: f64,
    loss_at_gain: L,
) -> Result<f64> {
    large_scale_gain_db(r, 0.0, channel)?;
    let f = shadow_threshold(
        |d| {
            loss_at_gain(db_to_linear(
                large_scale_gain_db(r, d, channel).unwrap_or(f64::NEG_INFINITY),
            ))
        },
        eps_max,
        channel.sigma_db,
    );
    Ok(availability_from_threshold(f, channel.sigma_db))
}

/// Threshold curve over an outer shadowing variable, memoized on the nodes
/// already visited and warm-started from the nearest one.
struct ThresholdCurve<P> {
    prepare: P,
    eps: f64,
    sigma: f64,
    memo: BTreeMap<i64, f64>,
}

impl<P> ThresholdCurve<P>
where
    P: FnMut(f64) -> Box<dyn Fn(f64) -> f64>,
{
    fn at(&mut self, outer: f64) -> f64 {
        let key = (outer * 1e9).round() as i64;
        if let Some(v) = self.memo.get(&key) {
            return *v;
        }
        let below = self.memo.range(..key).next_back().map(|(k, v)| (*k, *v));
        let above = self.memo.range(key..).next().map(|(k, v)| (*k, *v));
        let guess = match (below, above) {
            (Some(b), Some(a)) => Some(if key - b.0 <= a.0 - key { b.1 } else { a.1 }),
            (Some(b), None) => Some(b.1),
            (None, Some(a)) => Some(a.1),
            (None, None) => None,
        };
        let loss = (self.prepare)(outer);
        let v = shadow_threshold_near(|d| loss(d), self.eps, self.sigma, guess);
        self.memo.insert(key, v);
        v
    }
}

/// `U = Phi(lower/sigma) + \int_lower^{8 sigma} phi_sigma(d) Phi((F(d) - rho d) / (sigma sqrt(1-rho^2))) dd`.
pub fn conditional_unavailability<P>(
    prepare: P,
    eps: f64,
    sigma: f64,
    rho: f64,
    lower: f64,
) -> Result<f64>
where
    P: FnMut(f64) -> Box<dyn Fn(f64) -> f64>,
{
    if rho.abs() >= MERGED_RHO {
        return Err(Error::Degenerate(rho.abs()));
    }
    let top = TRUNCATION_SIGMAS * sigma;
    if lower >= top {
        return Ok(normal_cdf(lower / sigma).min(1.0));
    }
    let start = lower.max(-top);
    let s2 = sigma * (1.0 - rho * rho).sqrt();
    let mut curve = ThresholdCurve {
        prepare,
        eps,
        sigma,
        memo: BTreeMap::new(),
    };
    let integral = gauss_kronrod(
        |d| {
            let f = curve.at(d);
            let inner = if f == f64::INFINITY {
                1.0
            } else if f == f64::NEG_INFINITY {
                0.0
            } else {
                normal_cdf((f - rho * d) / s2)
            };
            crate::special::normal_pdf(d / sigma) / sigma * inner
        },
        start,
        top,
        QUAD_REL_TOL,
        1e-20,
        QUAD_MAX_PANELS,
    )?;
    let below = if lower > -top {
        normal_cdf(lower / sigma)
    } else {
        0.0
    };
    Ok((below + integral).clamp(0.0, 1.0))
}

/// Deployment and correlation settings for an availability evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityScenario {
    pub mode: ModeId,
    pub channel: ChannelParams,
    pub sys: SystemParams,
    pub qos: QosRequirement,
    pub budget: DelayBudget,
    /// Cell radius, the cellular link distance of the multi-connectivity modes.
    pub r_cell: f64,
    /// Uplink/downlink shadowing correlation; `None` merges them.
    pub rho_c: Option<f64>,
    /// Cellular/direct shadowing correlation; `None` uses `exp(-R_cell / r0)`.
    pub rho_d: Option<f64>,
    /// Fading draws for the AF modes.
    pub mc: McBudget,
}

impl AvailabilityScenario {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.sys.validate()?;
        self.qos.validate()?;
        if !(self.r_cell > 0.0) {
            return Err(invalid("r_cell", "must be positive"));
        }
        for (name, rho) in [("rho_c", self.rho_c), ("rho_d", self.rho_d)] {
            if let Some(v) = rho {
                if !(0.0..=1.0).contains(&v) {
                    return Err(invalid(name, "must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    pub fn rho_c(&self) -> f64 {
        self.rho_c.unwrap_or(1.0)
    }

    pub fn rho_d(&self) -> f64 {
        self.rho_d
            .unwrap_or_else(|| shadowing_correlation(self.r_cell, self.channel.r0))
    }

    fn gain(&self, d: f64, delta: f64) -> f64 {
        db_to_linear(large_scale_gain_db(d, delta, &self.channel).unwrap_or(f64::NEG_INFINITY))
    }

    /// Transmission budget for this mode: D2D ignores the BS delays and AF
    /// relaying has no processing delay.
    pub fn transmission_budget(&self) -> f64 {
        match self.mode {
            ModeId::D2d => self.budget.d_max,
            ModeId::AfCellular | ModeId::AfMulti => self.budget.d_max - self.budget.d_b,
            ModeId::DfCellular | ModeId::DfMulti => self.budget.d_t(),
        }
    }

    /// AF phases, both `af_phase(D_t)`.
    pub fn af_phases(&self) -> (f64, f64) {
        let t = af_phase(self.transmission_budget(), self.sys.t_f);
        (t, t)
    }
}

/// Unavailability of `scenario.mode` at range `r` with phases `t1`, `t2`.
///
/// `af` carries the fading draws for the AF modes; pass `None` to draw them
/// from `scenario.mc`.
pub fn unavailability(
    scenario: &AvailabilityScenario,
    r: f64,
    t1: f64,
    t2: f64,
    af: Option<&AfSamples>,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("range must be positive, got {r}")));
    }
    let sys = scenario.sys;
    let (l1, l2) = (sys.code(t1)?.linearized(), sys.code(t2)?.linearized());
    let eps = scenario.qos.eps_max;
    let sigma = scenario.channel.sigma_db;
    match scenario.mode {
        ModeId::D2d => {
            let f = shadow_threshold(
                |d| {
                    let mu = scenario.gain(r, d);
                    crate::modes::d2d_phase_error(mu, t1, &sys)
                        * crate::modes::d2d_phase_error(mu, t2, &sys)
                },
                eps,
                sigma,
            );
            Ok(normal_cdf(f / sigma))
        }
        ModeId::DfCellular => {
            let rho = scenario.rho_c();
            if rho >= MERGED_RHO {
                let f = shadow_threshold(
                    |d| {
                        let mu = scenario.gain(r, d);
                        combine_series(uplink_error(mu, &l1, &sys), downlink_error(mu, &l2, &sys))
                    },
                    eps,
                    sigma,
                );
                return Ok(normal_cdf(f / sigma));
            }
            let lb = shadow_threshold(
                |d| downlink_error(scenario.gain(r, d), &l2, &sys),
                eps,
                sigma,
            );
            if lb == f64::INFINITY {
                return Ok(1.0);
            }
            let sc = scenario.clone();
            conditional_unavailability(
                move |d_br| {
                    let e_br = downlink_error(sc.gain(r, d_br), &l2, &sc.sys);
                    let sc = sc.clone();
                    Box::new(move |d_sb| {
                        combine_series(uplink_error(sc.gain(r, d_sb), &l1, &sc.sys), e_br)
                    })
                },
                eps,
                sigma,
                rho,
                lb,
            )
        }
        ModeId::DfMulti => {
            let rho = scenario.rho_d();
            let r_cell = scenario.r_cell;
            if rho >= MERGED_RHO {
                let f = shadow_threshold(
                    |d| {
                        let mu_c = scenario.gain(r_cell, d);
                        let mu_sr = scenario.gain(r, d);
                        df_multi_loss(mu_c, mu_sr, &l1, &l2, &sys)
                    },
                    eps,
                    sigma,
                );
                return Ok(normal_cdf(f / sigma));
            }
            let sc = scenario.clone();
            conditional_unavailability(
                move |d_sr| {
                    let mu_sr = sc.gain(r, d_sr);
                    let e1 = crate::blocklength::simo_error(mu_sr * sc.sys.sender_scale(), 1, &l1);
                    let e2d = crate::blocklength::simo_error(mu_sr * sc.sys.sender_scale(), 1, &l2);
                    let sc = sc.clone();
                    Box::new(move |d_c| {
                        let mu_c = sc.gain(r_cell, d_c);
                        let e_sb = uplink_error(mu_c, &l1, &sc.sys);
                        let e2 = df_multi_second_phase(mu_c, mu_sr, &l2, &sc.sys);
                        df_multi_combine(e1, e_sb, e2, e2d)
                    })
                },
                eps,
                sigma,
                rho,
                f64::NEG_INFINITY,
            )
        }
        ModeId::AfCellular | ModeId::AfMulti => {
            let owned;
            let samples = match af {
                Some(s) => s,
                None => {
                    owned = AfSamples::draw(sys.nt, &scenario.mc);
                    &owned
                }
            };
            af_unavailability(scenario, r, t1, samples)
        }
    }
}

fn df_multi_loss(
    mu_c: f64,
    mu_sr: f64,
    l1: &crate::blocklength::LinearizedQ,
    l2: &crate::blocklength::LinearizedQ,
    sys: &SystemParams,
) -> f64 {
    let s = sys.sender_scale();
    let e1 = crate::blocklength::simo_error(mu_sr * s, 1, l1);
    let e2d = crate::blocklength::simo_error(mu_sr * s, 1, l2);
    let e_sb = uplink_error(mu_c, l1, sys);
    let e2 = df_multi_second_phase(mu_c, mu_sr, l2, sys);
    df_multi_combine(e1, e_sb, e2, e2d)
}

fn af_unavailability(
    scenario: &AvailabilityScenario,
    r: f64,
    t: f64,
    samples: &AfSamples,
) -> Result<f64> {
    let sys = scenario.sys;
    let m_b = sys.code(t)?.m_b();
    let eps = scenario.qos.eps_max;
    let sigma = scenario.channel.sigma_db;
    let shared = std::sync::Arc::new(samples.clone());
    match scenario.mode {
        ModeId::AfCellular => {
            let rho = scenario.rho_c();
            if rho >= MERGED_RHO {
                let f = shadow_threshold(
                    |d| {
                        let mu = scenario.gain(r, d);
                        shared.af_cellular_error(mu, mu, m_b, &sys)
                    },
                    eps,
                    sigma,
                );
                return Ok(normal_cdf(f / sigma));
            }
            let lb = shadow_threshold(
                |d| shared.af_cellular_error(f64::INFINITY, scenario.gain(r, d), m_b, &sys),
                eps,
                sigma,
            );
            if lb == f64::INFINITY {
                return Ok(1.0);
            }
            let sc = scenario.clone();
            conditional_unavailability(
                move |d_br| {
                    let mu_br = sc.gain(r, d_br);
                    let (sc, s) = (sc.clone(), shared.clone());
                    Box::new(move |d_sb| s.af_cellular_error(sc.gain(r, d_sb), mu_br, m_b, &sc.sys))
                },
                eps,
                sigma,
                rho,
                lb,
            )
        }
        _ => {
            let rho = scenario.rho_d();
            let r_cell = scenario.r_cell;
            let e1_of = |mu_sr: f64| {
                crate::blocklength::simo_error(mu_sr * sys.sender_scale(), 1, &sys.lq(t))
            };
            if rho >= MERGED_RHO {
                let f = shadow_threshold(
                    |d| {
                        let mu_c = scenario.gain(r_cell, d);
                        let mu_sr = scenario.gain(r, d);
                        let g = LargeScaleTriple {
                            mu_sb: mu_c,
                            mu_br: mu_c,
                            mu_sr,
                        };
                        e1_of(mu_sr) * shared.af_multi_error(&g, m_b, &sys)
                    },
                    eps,
                    sigma,
                );
                return Ok(normal_cdf(f / sigma));
            }
            let sc = scenario.clone();
            conditional_unavailability(
                move |d_sr| {
                    let mu_sr = sc.gain(r, d_sr);
                    let e1 = crate::blocklength::simo_error(
                        mu_sr * sc.sys.sender_scale(),
                        1,
                        &sc.sys.lq(t),
                    );
                    let (sc, s) = (sc.clone(), shared.clone());
                    Box::new(move |d_c| {
                        let mu_c = sc.gain(r_cell, d_c);
                        let g = LargeScaleTriple {
                            mu_sb: mu_c,
                            mu_br: mu_c,
                            mu_sr,
                        };
                        e1 * s.af_multi_error(&g, m_b, &sc.sys)
                    })
                },
                eps,
                sigma,
                rho,
                f64::NEG_INFINITY,
            )
        }
    }
}

/// Availability `1 - U`.
pub fn availability(scenario: &AvailabilityScenario, r: f64, t1: f64, t2: f64) -> Result<f64> {
    unavailability(scenario, r, t1, t2, None).map(|u| 1.0 - u)
}

/// DF cellular availability at range `r` with uplink/downlink correlation `rho_c`.
pub fn availability_df_cellular(
    r: f64,
    rho_c: f64,
    scenario: &AvailabilityScenario,
) -> Result<f64> {
    let sc = AvailabilityScenario {
        mode: ModeId::DfCellular,
        rho_c: Some(rho_c),
        ..scenario.clone()
    };
    availability(&sc, r, scenario.budget.t1, scenario.budget.t2)
}

/// DF multi-connectivity availability at direct range `r_d`.
pub fn availability_df_multi(
    r_d: f64,
    r_cell: f64,
    rho_d: f64,
    scenario: &AvailabilityScenario,
) -> Result<f64> {
    let sc = AvailabilityScenario {
        mode: ModeId::DfMulti,
        r_cell,
        rho_d: Some(rho_d),
        ..scenario.clone()
    };
    availability(&sc, r_d, scenario.budget.t1, scenario.budget.t2)
}
