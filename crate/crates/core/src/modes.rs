//! Per-mode SNRs and packet-loss probabilities given large-scale gains.

use crate::blocklength::{exact_q_error, simo_error, CodeSpec, DfMultiSnr, LinearizedQ};
use crate::channel::dbm_to_watt;
use crate::error::{invalid, Result};
use crate::oracle::McEstimate;
use crate::rng::{gamma_pair, open01, sample_moments, StreamRng};
use std::fmt;
use std::str::FromStr;

/// The five ways a packet can travel from sender to receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeId {
    D2d,
    AfCellular,
    DfCellular,
    AfMulti,
    DfMulti,
}

impl ModeId {
    pub const ALL: [ModeId; 5] = [
        ModeId::D2d,
        ModeId::AfCellular,
        ModeId::DfCellular,
        ModeId::AfMulti,
        ModeId::DfMulti,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModeId::D2d => "d2d",
            ModeId::AfCellular => "af_cellular",
            ModeId::DfCellular => "df_cellular",
            ModeId::AfMulti => "af_multi",
            ModeId::DfMulti => "df_multi",
        }
    }

    pub fn is_af(self) -> bool {
        matches!(self, ModeId::AfCellular | ModeId::AfMulti)
    }

    pub fn is_multi(self) -> bool {
        matches!(self, ModeId::AfMulti | ModeId::DfMulti)
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModeId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ModeId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

/// Radio parameters shared by all modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Sender transmit power in W.
    pub p_s: f64,
    /// Total BS transmit power in W, split evenly over the `k` subchannels.
    pub p_b_total: f64,
    /// Noise spectral density in W/Hz.
    pub n0: f64,
    /// Total bandwidth in Hz.
    pub w_total: f64,
    /// Number of senders sharing the bandwidth.
    pub k: u32,
    /// BS antennas.
    pub nt: u32,
    /// Frame duration in s.
    pub t_f: f64,
    /// Packet size in bits.
    pub b: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            p_s: dbm_to_watt(23.0),
            p_b_total: dbm_to_watt(46.0),
            n0: dbm_to_watt(-173.0),
            w_total: 20e6,
            k: 10,
            nt: 8,
            t_f: 1e-4,
            b: 160.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p_s", self.p_s),
            ("p_b_total", self.p_b_total),
            ("n0", self.n0),
            ("w_total", self.w_total),
            ("t_f", self.t_f),
            ("b", self.b),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, "must be positive and finite"));
            }
        }
        if self.k == 0 {
            return Err(invalid("k", "must be at least 1"));
        }
        if self.nt == 0 {
            return Err(invalid("nt", "must be at least 1"));
        }
        Ok(())
    }

    /// Bandwidth of one virtual subchannel.
    pub fn w(&self) -> f64 {
        self.w_total / self.k as f64
    }

    pub fn n0w(&self) -> f64 {
        self.n0 * self.w()
    }

    /// Sender SNR per unit linear gain.
    pub fn sender_scale(&self) -> f64 {
        self.p_s / self.n0w()
    }

    /// BS power on one subchannel.
    pub fn p_b(&self) -> f64 {
        self.p_b_total / self.k as f64
    }

    /// Downlink SNR per unit gain per antenna, `P_b / (Nt N0 W)`.
    pub fn bs_scale(&self) -> f64 {
        self.p_b() / (self.nt as f64 * self.n0w())
    }

    pub fn code(&self, t: f64) -> Result<CodeSpec> {
        CodeSpec::new(self.b, self.w(), t)
    }

    pub fn lq(&self, t: f64) -> LinearizedQ {
        LinearizedQ::new(t * self.w(), self.b)
    }
}

/// Split of the end-to-end delay bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayBudget {
    pub d_max: f64,
    pub d_p: f64,
    pub d_b: f64,
    pub t1: f64,
    pub t2: f64,
}

impl DelayBudget {
    /// Transmission budget `D_max - D_p - D_b`.
    pub fn d_t(&self) -> f64 {
        self.d_max - self.d_p - self.d_b
    }

    /// Number of whole frames in the transmission budget.
    pub fn frames(&self, t_f: f64) -> u32 {
        (self.d_t() / t_f + 1e-9).floor().max(0.0) as u32
    }
}

fn frame_multiple(t: f64, t_f: f64) -> bool {
    let k = (t / t_f).round();
    k >= 1.0 && (t - k * t_f).abs() <= 1e-9 * t_f
}

/// Positive frame-multiple phases that fit within `D_max`.
pub fn delay_feasible(budget: &DelayBudget, t_f: f64) -> bool {
    frame_multiple(budget.t1, t_f)
        && frame_multiple(budget.t2, t_f)
        && budget.d_p >= 0.0
        && budget.d_b >= 0.0
        && budget.d_p + budget.d_b + budget.t1 + budget.t2 <= budget.d_max * (1.0 + 1e-12)
}

/// Budget check that also enforces the zero processing delay of AF relaying.
pub fn delay_feasible_for(mode: ModeId, budget: &DelayBudget, t_f: f64) -> bool {
    if mode.is_af() && budget.d_p > 0.0 {
        return false;
    }
    delay_feasible(budget, t_f)
}

/// Phase length used by the AF modes: half the budget, rounded down to frames.
pub fn af_phase(d_t: f64, t_f: f64) -> f64 {
    ((d_t / (2.0 * t_f) + 1e-9).floor()).max(0.0) * t_f
}

/// Processor-sharing server parameters at the BS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessingModel {
    /// Cycles to decode one short packet.
    pub omega_p: f64,
    /// Cycles available per frame.
    pub omega_b: f64,
    /// Long packets in service.
    pub k_l: f64,
    /// Per-packet sharing overhead in cycles.
    pub delta: f64,
}

/// `(K + K_L)(Omega_p + Delta) / Omega_b * T_f`.
pub fn processing_delay_bound(pm: &ProcessingModel, k: u32, t_f: f64) -> Result<f64> {
    if !(pm.omega_b > 0.0) {
        return Err(invalid("omega_b", "must be positive"));
    }
    if pm.omega_p < 0.0 || pm.k_l < 0.0 || pm.delta < 0.0 {
        return Err(invalid("omega_p", "cycle counts must be non-negative"));
    }
    Ok((k as f64 + pm.k_l) * (pm.omega_p + pm.delta) / pm.omega_b * t_f)
}

/// Linear large-scale gains of the three links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScaleTriple {
    pub mu_sb: f64,
    pub mu_br: f64,
    pub mu_sr: f64,
}

/// Uplink SNR at the BS, `mu_sb g_sb P_s / (N0 W)`.
pub fn uplink_snr_beta(mu_sb: f64, g_sb: f64, sys: &SystemParams) -> f64 {
    mu_sb * g_sb * sys.sender_scale()
}

/// End-to-end SNR when the BS amplifies and forwards.
pub fn snr_af_cellular(beta: f64, mu_br: f64, g_br: f64, sys: &SystemParams) -> f64 {
    let dl = mu_br * g_br * sys.p_b();
    if beta.is_infinite() {
        return dl / (sys.nt as f64 * sys.n0w());
    }
    let den = dl + (beta + 1.0) * sys.nt as f64 * sys.n0w();
    if den == 0.0 {
        return 0.0;
    }
    beta * dl / den
}

/// Receiver SNR combining the AF relayed copy with the direct copy.
pub fn snr_af_multi(
    beta: f64,
    mu_br: f64,
    g_br: f64,
    mu_sr: f64,
    g_sr: f64,
    sys: &SystemParams,
) -> f64 {
    let dl = mu_br * g_br * sys.p_b();
    let nt = sys.nt as f64;
    if beta.is_infinite() {
        return (dl + nt * mu_sr * g_sr * sys.p_s) / (nt * sys.n0w());
    }
    let den = dl + (beta + 1.0) * nt * sys.n0w();
    (beta * dl + (beta + 1.0) * nt * mu_sr * g_sr * sys.p_s) / den
}

/// Receiver SNR combining the DF relayed copy with the direct copy.
pub fn snr_df_multi(mu_br: f64, g_br: f64, mu_sr: f64, g_sr: f64, sys: &SystemParams) -> f64 {
    (mu_br * g_br * sys.p_b() / sys.nt as f64 + mu_sr * g_sr * sys.p_s) / sys.n0w()
}

fn siso(mu_sr: f64, lq: &LinearizedQ, sys: &SystemParams) -> f64 {
    simo_error(mu_sr * sys.sender_scale(), 1, lq)
}

/// D2D uplink-free loss: both broadcast phases fail.
pub fn packet_loss_d2d(mu_sr: f64, t1: f64, t2: f64, sys: &SystemParams) -> Result<f64> {
    let (c1, c2) = (sys.code(t1)?, sys.code(t2)?);
    Ok(siso(mu_sr, &c1.linearized(), sys) * siso(mu_sr, &c2.linearized(), sys))
}

/// Uplink error of the DF cellular and DF multi modes.
pub fn uplink_error(mu_sb: f64, lq: &LinearizedQ, sys: &SystemParams) -> f64 {
    simo_error(mu_sb * sys.sender_scale(), sys.nt, lq)
}

/// Downlink error without CSI: power split over `Nt` antennas.
pub fn downlink_error(mu_br: f64, lq: &LinearizedQ, sys: &SystemParams) -> f64 {
    simo_error(mu_br * sys.bs_scale(), sys.nt, lq)
}

/// Loss when uplink or downlink fails.
pub fn packet_loss_df_cellular(
    mu_sb: f64,
    mu_br: f64,
    t1: f64,
    t2: f64,
    sys: &SystemParams,
) -> Result<f64> {
    let (c1, c2) = (sys.code(t1)?, sys.code(t2)?);
    let e_sb = uplink_error(mu_sb, &c1.linearized(), sys);
    let e_br = downlink_error(mu_br, &c2.linearized(), sys);
    Ok(combine_series(e_sb, e_br))
}

/// `a + b - ab` without cancellation when both are tiny.
pub fn combine_series(a: f64, b: f64) -> f64 {
    (a + b * (1.0 - a)).clamp(0.0, 1.0)
}

/// Second-phase error at the receiver of the DF multi mode.
pub fn df_multi_second_phase(mu_br: f64, mu_sr: f64, lq: &LinearizedQ, sys: &SystemParams) -> f64 {
    DfMultiSnr {
        c_sr: mu_sr * sys.sender_scale(),
        c_br: mu_br * sys.bs_scale(),
        nt: sys.nt,
    }
    .error(lq)
}

/// DF multi loss: first phase fails at the receiver, then either the BS decoded
/// and the combined second phase fails, or the BS did not and the direct
/// retransmission fails.
pub fn packet_loss_df_multi(
    mu_sb: f64,
    mu_br: f64,
    mu_sr: f64,
    t1: f64,
    t2: f64,
    sys: &SystemParams,
) -> Result<f64> {
    let (c1, c2) = (sys.code(t1)?, sys.code(t2)?);
    let (l1, l2) = (c1.linearized(), c2.linearized());
    let e1 = siso(mu_sr, &l1, sys);
    let e2d = siso(mu_sr, &l2, sys);
    let e_sb = uplink_error(mu_sb, &l1, sys);
    let e2 = df_multi_second_phase(mu_br, mu_sr, &l2, sys);
    Ok(df_multi_combine(e1, e_sb, e2, e2d))
}

pub fn df_multi_combine(e1: f64, e_sb: f64, e2: f64, e2d: f64) -> f64 {
    (e1 * ((1.0 - e_sb) * e2 + e_sb * e2d)).clamp(0.0, 1.0)
}

/// Sample budget for the AF expectations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McBudget {
    /// Fading draws; drawn as antithetic pairs, so `samples / 2` pair means.
    pub samples: usize,
    pub seed: u64,
}

impl Default for McBudget {
    fn default() -> Self {
        McBudget {
            samples: 10_000_000,
            seed: 0,
        }
    }
}

/// Relative standard error above which an estimate is flagged.
pub const LOW_CONFIDENCE_REL: f64 = 0.1;

fn af_cellular_pair(
    rng: &mut StreamRng,
    mu_sb: f64,
    mu_br: f64,
    m_b: f64,
    sys: &SystemParams,
) -> f64 {
    let (sb, sb_a) = gamma_pair(rng, sys.nt);
    let (br, br_a) = gamma_pair(rng, sys.nt);
    let one = |g_sb: f64, g_br: f64| {
        let beta = uplink_snr_beta(mu_sb, g_sb, sys);
        exact_q_error(snr_af_cellular(beta, mu_br, g_br, sys), m_b, sys.b)
    };
    0.5 * (one(sb, br) + one(sb_a, br_a))
}

fn af_multi_pair(rng: &mut StreamRng, g: &LargeScaleTriple, m_b: f64, sys: &SystemParams) -> f64 {
    let (sb, sb_a) = gamma_pair(rng, sys.nt);
    let (br, br_a) = gamma_pair(rng, sys.nt);
    let u = open01(rng);
    let (sr, sr_a) = (-u.ln(), -(-u).ln_1p());
    let one = |g_sb: f64, g_br: f64, g_sr: f64| {
        let beta = uplink_snr_beta(g.mu_sb, g_sb, sys);
        exact_q_error(
            snr_af_multi(beta, g.mu_br, g_br, g.mu_sr, g_sr, sys),
            m_b,
            sys.b,
        )
    };
    0.5 * (one(sb, br, sr) + one(sb_a, br_a, sr_a))
}

fn estimate(m: crate::rng::Moments, scale: f64, budget: &McBudget) -> McEstimate {
    let mean = (scale * m.mean).clamp(0.0, 1.0);
    let se = scale * m.std_error();
    McEstimate {
        mean,
        std_error: se,
        n: budget.samples,
        seed: budget.seed,
        low_confidence: mean == 0.0 || se > LOW_CONFIDENCE_REL * mean,
    }
}

/// Monte Carlo AF cellular loss with equal phases of `af_phase(d_t)`.
pub fn packet_loss_af_cellular(
    mu_sb: f64,
    mu_br: f64,
    d_t: f64,
    sys: &SystemParams,
    budget: &McBudget,
) -> Result<McEstimate> {
    let t = af_phase(d_t, sys.t_f);
    let m_b = sys.code(t)?.m_b();
    let units = (budget.samples / 2).max(1);
    let m = sample_moments(units, budget.seed, |rng| {
        af_cellular_pair(rng, mu_sb, mu_br, m_b, sys)
    });
    Ok(estimate(m, 1.0, budget))
}

/// AF multi loss: analytic direct first phase times the Monte Carlo
/// combined second phase.
pub fn packet_loss_af_multi(
    mu_sb: f64,
    mu_br: f64,
    mu_sr: f64,
    d_t: f64,
    sys: &SystemParams,
    budget: &McBudget,
) -> Result<McEstimate> {
    let t = af_phase(d_t, sys.t_f);
    let code = sys.code(t)?;
    let e1 = siso(mu_sr, &code.linearized(), sys);
    let g = LargeScaleTriple {
        mu_sb,
        mu_br,
        mu_sr,
    };
    let units = (budget.samples / 2).max(1);
    let m = sample_moments(units, budget.seed, |rng| {
        af_multi_pair(rng, &g, code.m_b(), sys)
    });
    Ok(estimate(m, e1, budget))
}

/// Fixed fading draws reused across shadowing values, so an AF loss curve is
/// a deterministic, monotone function of the large-scale gains.
#[derive(Debug, Clone)]
pub struct AfSamples {
    pub g_sb: Vec<f64>,
    pub g_br: Vec<f64>,
    pub g_sr: Vec<f64>,
}

impl AfSamples {
    pub fn draw(nt: u32, budget: &McBudget) -> AfSamples {
        let units = (budget.samples / 2).max(1);
        let pairs = crate::rng::sample_vec(units, budget.seed, |rng| {
            let (sb, sb_a) = gamma_pair(rng, nt);
            let (br, br_a) = gamma_pair(rng, nt);
            let u = open01(rng);
            [sb, sb_a, br, br_a, -u.ln(), -(-u).ln_1p()]
        });
        let mut s = AfSamples {
            g_sb: Vec::with_capacity(2 * units),
            g_br: Vec::with_capacity(2 * units),
            g_sr: Vec::with_capacity(2 * units),
        };
        for p in pairs {
            s.g_sb.extend([p[0], p[1]]);
            s.g_br.extend([p[2], p[3]]);
            s.g_sr.extend([p[4], p[5]]);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.g_sb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g_sb.is_empty()
    }

    /// Mean exact-Q error of the AF cellular SNR.
    pub fn af_cellular_error(&self, mu_sb: f64, mu_br: f64, m_b: f64, sys: &SystemParams) -> f64 {
        let vals: Vec<f64> = (0..self.len())
            .map(|i| {
                let beta = uplink_snr_beta(mu_sb, self.g_sb[i], sys);
                exact_q_error(snr_af_cellular(beta, mu_br, self.g_br[i], sys), m_b, sys.b)
            })
            .collect();
        crate::rng::pairwise_sum(&vals) / vals.len() as f64
    }

    /// Mean exact-Q error of the AF multi second-phase SNR.
    pub fn af_multi_error(&self, g: &LargeScaleTriple, m_b: f64, sys: &SystemParams) -> f64 {
        let vals: Vec<f64> = (0..self.len())
            .map(|i| {
                let beta = uplink_snr_beta(g.mu_sb, self.g_sb[i], sys);
                exact_q_error(
                    snr_af_multi(beta, g.mu_br, self.g_br[i], g.mu_sr, self.g_sr[i], sys),
                    m_b,
                    sys.b,
                )
            })
            .collect();
        crate::rng::pairwise_sum(&vals) / vals.len() as f64
    }
}

/// D2D error for one phase of length `t`.
pub fn d2d_phase_error(mu_sr: f64, t: f64, sys: &SystemParams) -> f64 {
    siso(mu_sr, &sys.lq(t), sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn processing_bound_examples() {
        let pm = ProcessingModel {
            omega_p: 1.0,
            omega_b: 1.0,
            k_l: 0.0,
            delta: 0.0,
        };
        assert_relative_eq!(processing_delay_bound(&pm, 1, 1e-4).unwrap(), 1e-4);
        let pm = ProcessingModel {
            omega_p: 1e5,
            omega_b: 2e6,
            k_l: 2.0,
            delta: 1e3,
        };
        assert_relative_eq!(
            processing_delay_bound(&pm, 10, 1e-4).unwrap(),
            6.06e-5,
            max_relative = 1e-12
        );
        let bad = ProcessingModel { omega_b: 0.0, ..pm };
        assert!(processing_delay_bound(&bad, 10, 1e-4).is_err());
    }

    #[test]
    fn delay_checks() {
        let tf = 1e-4;
        let mut b = DelayBudget {
            d_max: 10.0 * tf,
            d_p: 0.0,
            d_b: 0.0,
            t1: 5.0 * tf,
            t2: 5.0 * tf,
        };
        assert!(delay_feasible(&b, tf));
        b.t2 = 6.0 * tf;
        assert!(!delay_feasible(&b, tf));
        b.t2 = 4.0 * tf;
        b.d_p = tf;
        assert!(delay_feasible_for(ModeId::DfMulti, &b, tf));
        assert!(!delay_feasible_for(ModeId::AfMulti, &b, tf));
        b.t1 = 0.0;
        assert!(!delay_feasible(&b, tf));
    }

    #[test]
    fn snr_edge_cases() {
        let sys = SystemParams::default();
        assert_eq!(uplink_snr_beta(1e-9, 0.0, &sys), 0.0);
        assert_eq!(snr_af_cellular(0.0, 1e-9, 1.0, &sys), 0.0);
        let d2d = 1e-10 * 0.7 * sys.sender_scale();
        assert_relative_eq!(
            snr_af_multi(5.0, 0.0, 1.0, 1e-10, 0.7, &sys),
            d2d,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            snr_af_multi(5.0, 1e30, 1.0, 1e-10, 0.7, &sys),
            5.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn mode_names_round_trip() {
        for m in ModeId::ALL {
            assert_eq!(m.name().parse::<ModeId>().unwrap(), m);
        }
        assert!("relay".parse::<ModeId>().is_err());
    }

    #[test]
    fn af_phase_rounds_down() {
        assert_relative_eq!(af_phase(1e-3, 1e-4), 5e-4, max_relative = 1e-12);
        assert_relative_eq!(af_phase(7e-4, 1e-4), 3e-4, max_relative = 1e-12);
    }
}
