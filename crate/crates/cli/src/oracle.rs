//! Analytic results against independent estimates.
//!
//! Every check returns one row. Sampling checks use the linearized error
//! curve, so the analytic and sampled values estimate the same quantity and
//! only sampling noise separates them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma_lr;
use urllc_core::availability::{
    availability_single_link, conditional_unavailability, unavailability,
};
use urllc_core::blocklength::{cdf_snr_df_multi, error_from_snr_cdf, linearized_q, simo_error};
use urllc_core::modes::{
    d2d_phase_error, df_multi_combine, packet_loss_d2d, packet_loss_df_cellular,
    packet_loss_df_multi,
};
use urllc_core::oracle::{ks_critical_99, mc_availability};
use urllc_core::rng::{gamma_draw, open01, sample_moments, sample_vec, StreamRng};
use urllc_core::special::normal_cdf;
use urllc_core::{
    AvailabilityScenario, ChannelParams, EmpiricalCdf, Error, LinearizedQ, ModeId,
    SystemParams,
};

use crate::config::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Multiplies every tolerance.
    pub tolerance_scale: f64,
    /// Draws for the sampling checks.
    pub samples: usize,
    pub seed: u64,
    /// Test hook: evaluates the DF multi CDF with a 2% error in the direct-link scale.
    pub corrupt_df_multi_cdf: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            tolerance_scale: 1.0,
            samples: 1_000_000,
            seed: 0,
            corrupt_df_multi_cdf: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub id: String,
    pub analytic: f64,
    pub oracle: f64,
    pub std_error: f64,
    /// Largest accepted `|analytic - oracle|`, after scaling.
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleRow {
    fn new(id: &str, analytic: f64, oracle: f64, std_error: f64, tolerance: f64) -> OracleRow {
        OracleRow {
            id: id.to_string(),
            analytic,
            oracle,
            std_error,
            tolerance,
            pass: (analytic - oracle).abs() <= tolerance,
        }
    }

    /// Three standard errors, with a floor for bit-level noise.
    fn sampled(id: &str, analytic: f64, oracle: f64, se: f64, opts: &OracleOptions) -> OracleRow {
        let tol = opts.tolerance_scale * (3.0 * se + 1e-12 * analytic.abs());
        OracleRow::new(id, analytic, oracle, se, tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
}

impl OracleReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        self.rows
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.id.clone())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["check", "analytic", "oracle", "std_error", "tolerance", "verdict"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.id.clone(),
                format!("{:.8e}", r.analytic),
                format!("{:.8e}", r.oracle),
                format!("{:.8e}", r.std_error),
                format!("{:.8e}", r.tolerance),
                if r.pass { "pass" } else { "fail" }.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }
}

type CheckFn = fn(&OracleOptions, u64) -> Result<OracleRow, Error>;

struct Check {
    id: &'static str,
    run: CheckFn,
}

macro_rules! checks {
    ($($id:literal => $f:expr),* $(,)?) => {
        &[$(Check { id: $id, run: $f }),*]
    };
}

const CHECKS: &[Check] = checks![
    "simo_closed_form_vs_quadrature" => simo_quadrature,
    "simo_mc_nt1" => |o, s| simo_mc(o, s, 0),
    "simo_mc_nt4" => |o, s| simo_mc(o, s, 1),
    "simo_mc_nt8" => |o, s| simo_mc(o, s, 2),
    "df_multi_cdf_ks_nt1" => |o, s| df_multi_ks(o, s, 1),
    "df_multi_cdf_ks_nt4" => |o, s| df_multi_ks(o, s, 4),
    "df_multi_cdf_ks_nt8" => |o, s| df_multi_ks(o, s, 8),
    "d2d_loss_mc_a" => |o, s| d2d_mc(o, s, 0),
    "d2d_loss_mc_b" => |o, s| d2d_mc(o, s, 1),
    "d2d_loss_mc_c" => |o, s| d2d_mc(o, s, 2),
    "df_cellular_loss_mc_nt2" => |o, s| df_cellular_mc(o, s, 2),
    "df_cellular_loss_mc_nt4" => |o, s| df_cellular_mc(o, s, 4),
    "df_cellular_loss_mc_nt8" => |o, s| df_cellular_mc(o, s, 8),
    "df_multi_loss_mc_nt1" => |o, s| df_multi_mc(o, s, 1),
    "df_multi_loss_mc_nt4" => |o, s| df_multi_mc(o, s, 4),
    "df_multi_loss_mc_nt16" => |o, s| df_multi_mc(o, s, 16),
    "single_link_availability_mc_r14" => |o, s| single_link_mc(o, s, 14.0),
    "single_link_availability_mc_r16" => |o, s| single_link_mc(o, s, 16.0),
    "single_link_availability_mc_r18" => |o, s| single_link_mc(o, s, 18.0),
    "df_cellular_availability_mc_rho0" => |o, s| df_cellular_availability_mc(o, s, 0.0),
    "df_cellular_availability_mc_rho05" => |o, s| df_cellular_availability_mc(o, s, 0.5),
    "df_cellular_availability_mc_rho09" => |o, s| df_cellular_availability_mc(o, s, 0.9),
    "df_multi_availability_mc_nt8" => |o, s| df_multi_availability_mc(o, s, 8),
    "df_multi_availability_mc_nt32" => |o, s| df_multi_availability_mc(o, s, 32),
    "df_multi_availability_mc_nt128" => |o, s| df_multi_availability_mc(o, s, 128),
    "df_multi_independent_grid" => df_multi_grid,
    "gaussian_mixture_identity" => gaussian_mixture,
];

/// Identifiers of the registered checks, in report order.
pub fn check_ids() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.id).collect()
}

/// Runs every registered check, one row each.
pub fn run_oracle_suite(opts: &OracleOptions) -> Result<OracleReport, Error> {
    let rows = CHECKS
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let seed = opts.seed.wrapping_mul(1000).wrapping_add(i as u64);
            let mut row = (c.run)(opts, seed)?;
            row.id = c.id.to_string();
            Ok(row)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(OracleReport { rows })
}

fn sys(nt: u32) -> SystemParams {
    SystemParams {
        nt,
        ..SystemParams::default()
    }
}

fn exp1(r: &mut StreamRng) -> f64 {
    -open01(r).ln()
}

fn db_gain(ch: &ChannelParams, d: f64, delta: f64) -> f64 {
    ch.gain(d, delta).unwrap_or(0.0)
}

/// Base scenario with the default parameters.
pub(crate) fn scenario(mode: ModeId, nt: u32) -> AvailabilityScenario {
    let cfg = ScenarioConfig {
        n_t: nt,
        ..ScenarioConfig::default()
    };
    cfg.scenario(mode)
}

/// Smallest `x` on `[lo, hi]` with `ok(x)` for a monotone predicate; infinite
/// when the predicate holds or fails everywhere.
pub(crate) fn bisect(mut lo: f64, mut hi: f64, ok: impl Fn(f64) -> bool) -> f64 {
    if ok(lo) {
        return f64::NEG_INFINITY;
    }
    if !ok(hi) {
        return f64::INFINITY;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub(crate) fn simo_quadrature(opts: &OracleOptions, seed: u64) -> Result<OracleRow, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut at) = (0.0f64, (0.0, 0.0));
    let mut checked = 0;
    while checked < 20 {
        let nt = rng.random_range(1..=128u32);
        let lq = LinearizedQ::new(rng.random_range(1..=9u32) as f64 * 200.0, 160.0);
        let s = lq.theta / (nt as f64 * 10f64.powf(rng.random_range(-1.5..0.3)));
        let closed = simo_error(s, nt, &lq);
        if !(1e-14..1.0 - 1e-9).contains(&closed) {
            continue;
        }
        let quad = error_from_snr_cdf(|x| gamma_lr(nt as f64, x / s), &lq)?;
        let rel = (closed - quad).abs() / quad;
        if rel >= worst {
            worst = rel;
            at = (closed, quad);
        }
        checked += 1;
    }
    let tol = opts.tolerance_scale * 1e-9 * at.1;
    Ok(OracleRow::new("", at.0, at.1, 0.0, tol))
}

fn simo_mc(opts: &OracleOptions, seed: u64, point: usize) -> Result<OracleRow, Error> {
    let (nt, frames, knee) = [(1u32, 4u32, 0.05), (4, 3, 1.2), (8, 5, 3.0)][point];
    let lq = LinearizedQ::new(frames as f64 * 200.0, 160.0);
    let s = lq.theta / knee;
    let analytic = simo_error(s, nt, &lq);
    let m = sample_moments(opts.samples, seed, |r| linearized_q(s * gamma_draw(r, nt), &lq));
    Ok(OracleRow::sampled("", analytic, m.mean, m.std_error(), opts))
}

fn df_multi_ks(opts: &OracleOptions, seed: u64, nt: u32) -> Result<OracleRow, Error> {
    let (c_sr, c_br) = (1.0, 0.35);
    let xs = sample_vec(opts.samples, seed, |r| c_br * gamma_draw(r, nt) + c_sr * exp1(r));
    let ecdf = EmpiricalCdf::new(xs)?;
    let c_model = if opts.corrupt_df_multi_cdf { c_sr * 1.02 } else { c_sr };
    let d = ecdf.ks_distance(|x| cdf_snr_df_multi(x, c_model, c_br, nt));
    let crit = opts.tolerance_scale * ks_critical_99(opts.samples);
    Ok(OracleRow {
        id: String::new(),
        analytic: d,
        oracle: crit,
        std_error: 0.0,
        tolerance: crit,
        pass: d <= crit,
    })
}

fn d2d_mc(opts: &OracleOptions, seed: u64, point: usize) -> Result<OracleRow, Error> {
    let (t1, t2, factor) = [(4e-4, 4e-4, 30.0), (6e-4, 2e-4, 20.0), (5e-4, 5e-4, 50.0)][point];
    let s = sys(1);
    let (l1, l2) = (s.lq(t1), s.lq(t2));
    let snr = l1.theta.max(l2.theta) * factor;
    let mu = snr / s.sender_scale();
    let analytic = packet_loss_d2d(mu, t1, t2, &s)?;
    // Frequency hopping: independent fading in the two phases.
    let m = sample_moments(opts.samples, seed, |r| {
        linearized_q(snr * exp1(r), &l1) * linearized_q(snr * exp1(r), &l2)
    });
    Ok(OracleRow::sampled("", analytic, m.mean, m.std_error(), opts))
}

fn df_cellular_mc(opts: &OracleOptions, seed: u64, nt: u32) -> Result<OracleRow, Error> {
    let (t1, t2) = (6e-4, 4e-4);
    let s = sys(nt);
    let (l1, l2) = (s.lq(t1), s.lq(t2));
    let knee = 0.4 * nt as f64;
    let (su, sd) = (l1.theta / knee, l2.theta / knee);
    let (mu_sb, mu_br) = (su / s.sender_scale(), sd / s.bs_scale());
    let analytic = packet_loss_df_cellular(mu_sb, mu_br, t1, t2, &s)?;
    let m = sample_moments(opts.samples, seed, |r| {
        let a = linearized_q(su * gamma_draw(r, nt), &l1);
        let b = linearized_q(sd * gamma_draw(r, nt), &l2);
        1.0 - (1.0 - a) * (1.0 - b)
    });
    Ok(OracleRow::sampled("", analytic, m.mean, m.std_error(), opts))
}

fn df_multi_mc(opts: &OracleOptions, seed: u64, nt: u32) -> Result<OracleRow, Error> {
    let (t1, t2) = (5e-4, 3e-4);
    let s = sys(nt);
    let (l1, l2) = (s.lq(t1), s.lq(t2));
    let s_sr = l1.theta * 4.0;
    let s_sb = l1.theta / (0.5 * nt as f64);
    let c_br = l2.theta / (0.8 * nt as f64);
    let c_sr2 = s_sr;
    let mu_sr = s_sr / s.sender_scale();
    let mu_sb = s_sb / s.sender_scale();
    let mu_br = c_br / s.bs_scale();
    let analytic = packet_loss_df_multi(mu_sb, mu_br, mu_sr, t1, t2, &s)?;
    let m = sample_moments(opts.samples, seed, |r| {
        let e1 = linearized_q(s_sr * exp1(r), &l1);
        let e_sb = linearized_q(s_sb * gamma_draw(r, nt), &l1);
        let g2 = exp1(r);
        let e2 = linearized_q(c_br * gamma_draw(r, nt) + c_sr2 * g2, &l2);
        let e2d = linearized_q(c_sr2 * g2, &l2);
        df_multi_combine(e1, e_sb, e2, e2d)
    });
    Ok(OracleRow::sampled("", analytic, m.mean, m.std_error(), opts))
}

fn availability_draws(opts: &OracleOptions) -> usize {
    (opts.samples / 4).max(urllc_core::oracle::MIN_SAMPLES)
}

fn single_link_mc(opts: &OracleOptions, seed: u64, r: f64) -> Result<OracleRow, Error> {
    let ch = ChannelParams::default();
    let s = sys(1);
    let t = 4e-4;
    let loss = |mu: f64| d2d_phase_error(mu, t, &s) * d2d_phase_error(mu, t, &s);
    let eps = 1e-7;
    let a = availability_single_link(r, &ch, eps, loss)?;
    let mc = mc_availability(
        |d, _| loss(db_gain(&ch, r, d)),
        0.0,
        ch.sigma_db,
        eps,
        opts.samples,
        seed,
    )?;
    Ok(OracleRow::sampled("", a, mc.mean, mc.std_error, opts))
}

fn df_cellular_availability_mc(opts: &OracleOptions, seed: u64, rho: f64) -> Result<OracleRow, Error> {
    let mut sc = scenario(ModeId::DfCellular, 8);
    sc.budget.d_p = 0.0;
    sc.budget.d_b = 0.0;
    sc.rho_c = Some(rho);
    let (r, t1, t2) = (95.0, 6e-4, 4e-4);
    let u = unavailability(&sc, r, t1, t2, None)?;
    let (ch, s, eps) = (sc.channel, sc.sys, sc.qos.eps_max);
    let mc = mc_availability(
        |d_sb, d_br| {
            packet_loss_df_cellular(db_gain(&ch, r, d_sb), db_gain(&ch, r, d_br), t1, t2, &s)
                .unwrap_or(1.0)
        },
        rho,
        ch.sigma_db,
        eps,
        availability_draws(opts),
        seed,
    )?;
    Ok(OracleRow::sampled("", 1.0 - u, mc.mean, mc.std_error, opts))
}

fn df_multi_availability_mc(opts: &OracleOptions, seed: u64, nt: u32) -> Result<OracleRow, Error> {
    let sc = scenario(ModeId::DfMulti, nt);
    let (t1, t2) = (5e-4, 3e-4);
    let r = [75.0, 95.0, 110.0][[8, 32, 128].iter().position(|n| *n == nt).unwrap_or(0)];
    let u = unavailability(&sc, r, t1, t2, None)?;
    let (ch, s, eps, r_cell) = (sc.channel, sc.sys, sc.qos.eps_max, sc.r_cell);
    let mc = mc_availability(
        |d_sr, d_c| {
            let mu_c = db_gain(&ch, r_cell, d_c);
            packet_loss_df_multi(mu_c, mu_c, db_gain(&ch, r, d_sr), t1, t2, &s).unwrap_or(1.0)
        },
        sc.rho_d(),
        ch.sigma_db,
        eps,
        availability_draws(opts),
        seed,
    )?;
    Ok(OracleRow::sampled("", 1.0 - u, mc.mean, mc.std_error, opts))
}

/// `P(loss(outer, inner) > eps)` for independent shadowing: midpoint cells in
/// the outer variable, bisected inner threshold.
pub(crate) fn independent_grid(
    loss: impl Fn(f64, f64) -> f64,
    eps: f64,
    sigma: f64,
    cells: usize,
) -> f64 {
    let (lo, hi) = (-8.0 * sigma, 8.0 * sigma);
    let h = (hi - lo) / cells as f64;
    let mut u = 0.0;
    for i in 0..cells {
        let outer = lo + (i as f64 + 0.5) * h;
        let w = normal_cdf((outer + 0.5 * h) / sigma) - normal_cdf((outer - 0.5 * h) / sigma);
        let f = bisect(-20.0 * sigma, 20.0 * sigma, |inner| loss(outer, inner) <= eps);
        let inner = if f.is_finite() {
            normal_cdf(f / sigma)
        } else if f > 0.0 {
            1.0
        } else {
            0.0
        };
        u += w * inner;
    }
    u
}

fn df_multi_grid(opts: &OracleOptions, _seed: u64) -> Result<OracleRow, Error> {
    let mut sc = scenario(ModeId::DfMulti, 8);
    sc.rho_d = Some(0.0);
    let (r, t1, t2) = (23.0, 5e-4, 3e-4);
    let u = unavailability(&sc, r, t1, t2, None)?;
    let (ch, s) = (sc.channel, sc.sys);
    let grid = independent_grid(
        |d_sr, d_c| {
            let mu_c = db_gain(&ch, sc.r_cell, d_c);
            packet_loss_df_multi(mu_c, mu_c, db_gain(&ch, r, d_sr), t1, t2, &s).unwrap_or(1.0)
        },
        sc.qos.eps_max,
        ch.sigma_db,
        4000,
    );
    Ok(OracleRow::new("", u, grid, 0.0, opts.tolerance_scale * 1e-3 * grid))
}

fn gaussian_mixture(opts: &OracleOptions, _seed: u64) -> Result<OracleRow, Error> {
    // Threshold a + b d on the outer variable: U = Phi(a / (sigma sqrt(1 + b^2 - 2 b rho))).
    let (sigma, eps) = (8.0, 1e-7);
    let mut worst = (0.0f64, 0.0, 0.0);
    for &(a, b, rho) in &[(-20.0, 0.5, 0.3), (-10.0, -0.4, 0.0), (-25.0, 1.2, 0.8)] {
        let u = conditional_unavailability(
            move |outer: f64| {
                let f = a + b * outer;
                Box::new(move |inner: f64| eps * (f - inner).exp())
            },
            eps,
            sigma,
            rho,
            f64::NEG_INFINITY,
        )?;
        let exact = normal_cdf(a / (sigma * (1.0 + b * b - 2.0 * b * rho).sqrt()));
        let rel = (u - exact).abs() / exact;
        if rel >= worst.0 {
            worst = (rel, u, exact);
        }
    }
    Ok(OracleRow::new("", worst.1, worst.2, 0.0, opts.tolerance_scale * 1e-5 * worst.2))
}
