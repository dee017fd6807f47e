//! Ranges from exact-Q Monte Carlo losses at a fixed shadowing value.
//!
//! The fading draws are fixed per run, so the sampled loss is a monotone
//! function of distance and the usual range search applies.

use urllc_core::blocklength::exact_q_error;
use urllc_core::channel::sample_fading;
use urllc_core::modes::LOW_CONFIDENCE_REL;
use urllc_core::range::largest_feasible_range;
use urllc_core::rng::Moments;
use urllc_core::{AvailabilityScenario, Error, FadingKind, ModeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McRange {
    Range(f64),
    Infeasible,
    /// The sampled loss at the returned range is too noisy to trust.
    Unresolved,
}

impl McRange {
    pub fn range(self) -> Option<f64> {
        match self {
            McRange::Range(r) => Some(r),
            _ => None,
        }
    }
}

struct Phase {
    gains: Vec<f64>,
    m_b: f64,
}

impl Phase {
    fn error(&self, s: f64, b: f64) -> (f64, f64) {
        let xs: Vec<f64> = self
            .gains
            .iter()
            .map(|g| exact_q_error(s * g, self.m_b, b))
            .collect();
        let m = Moments::of(&xs);
        (m.mean, m.std_error())
    }
}

/// Monte Carlo range of `sc.mode` (D2D or DF cellular) at shadowing `delta`.
pub fn mc_range(sc: &AvailabilityScenario, delta: f64, t1: f64, t2: f64) -> Result<McRange, Error> {
    let sys = sc.sys;
    let (n, seed) = (sc.mc.samples, sc.mc.seed);
    let kind = match sc.mode {
        ModeId::D2d => FadingKind::Siso,
        ModeId::DfCellular => FadingKind::Simo(sys.nt),
        m => {
            return Err(Error::Domain(format!(
                "Monte Carlo ranges cover d2d and df_cellular, not {m}"
            )))
        }
    };
    let p1 = Phase {
        gains: sample_fading(kind, n, seed)?,
        m_b: sys.code(t1)?.m_b(),
    };
    let p2 = Phase {
        gains: sample_fading(kind, n, seed.wrapping_add(1))?,
        m_b: sys.code(t2)?.m_b(),
    };
    let loss = |r: f64| -> Result<(f64, f64), Error> {
        let mu = sc.channel.gain(r, delta)?;
        Ok(match sc.mode {
            ModeId::D2d => {
                let s = mu * sys.sender_scale();
                let (a, sa) = p1.error(s, sys.b);
                let (b, sb) = p2.error(s, sys.b);
                (a * b, ((a * sb).powi(2) + (b * sa).powi(2)).sqrt())
            }
            _ => {
                let (a, sa) = p1.error(mu * sys.sender_scale(), sys.b);
                let (b, sb) = p2.error(mu * sys.bs_scale(), sys.b);
                (
                    a + b - a * b,
                    (((1.0 - b) * sa).powi(2) + ((1.0 - a) * sb).powi(2)).sqrt(),
                )
            }
        })
    };
    let eps = sc.qos.eps_max;
    match largest_feasible_range(|r| Ok(loss(r)?.0 <= eps)) {
        Ok((r, _)) => {
            let (m, se) = loss(r)?;
            if m == 0.0 || se > LOW_CONFIDENCE_REL * m {
                Ok(McRange::Unresolved)
            } else {
                Ok(McRange::Range(r))
            }
        }
        Err(Error::Infeasible(_)) => Ok(McRange::Infeasible),
        Err(e) => Err(e),
    }
}
