//! Large randomized property suites over the analytic models.
//!
//! Each suite reports a count of checked cases and violations, so it can run
//! from tests or from the acceptance target without panicking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use urllc_core::availability::unavailability;
use urllc_core::blocklength::cdf_snr_df_multi;
use urllc_core::channel::joint_shadowing_pdf;
use urllc_core::modes::{
    packet_loss_d2d, packet_loss_df_cellular, packet_loss_df_multi, snr_af_cellular,
    snr_af_multi, snr_df_multi, uplink_snr_beta,
};
use urllc_core::oracle::ks_critical_99;
use urllc_core::quadrature::{gauss_legendre, gauss_legendre_on};
use urllc_core::range::snr_ordering_holds;
use urllc_core::rng::{gamma_draw, open01, sample_vec};
use urllc_core::{EmpiricalCdf, Error, LargeScaleTriple, ModeId, SystemParams};

use crate::oracle::{bisect, scenario, simo_quadrature as simo_quadrature_row, OracleOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub id: &'static str,
    pub cases: usize,
    pub violations: usize,
    /// Worst observed discrepancy, in the suite's own units.
    pub worst: f64,
    pub detail: String,
}

impl SuiteResult {
    pub fn pass(&self) -> bool {
        self.violations == 0 && self.cases > 0
    }
}

fn sys(nt: u32) -> SystemParams {
    SystemParams {
        nt,
        ..SystemParams::default()
    }
}

/// Closed-form SIMO error against quadrature of the error integral.
pub fn simo_quadrature() -> Result<SuiteResult, Error> {
    let row = simo_quadrature_row(&OracleOptions::default(), 0)?;
    let rel = (row.analytic - row.oracle).abs() / row.oracle;
    Ok(SuiteResult {
        id: "simo_quadrature",
        cases: 20,
        violations: usize::from(!row.pass),
        worst: rel,
        detail: format!("worst relative difference {rel:.2e} over 20 tuples (limit 1e-9)"),
    })
}

/// Kolmogorov-Smirnov test of the DF multi SNR CDF at `n` samples per `Nt`.
pub fn df_multi_ks(n: usize, seed: u64) -> Result<SuiteResult, Error> {
    let (c_sr, c_br) = (1.0, 0.35);
    let crit = ks_critical_99(n);
    let mut worst = 0.0f64;
    let mut violations = 0;
    let mut parts = Vec::new();
    for (i, nt) in [1u32, 4, 8].into_iter().enumerate() {
        let xs = sample_vec(n, seed + i as u64, |r| {
            c_br * gamma_draw(r, nt) - c_sr * open01(r).ln()
        });
        let d = EmpiricalCdf::new(xs)?.ks_distance(|x| cdf_snr_df_multi(x, c_sr, c_br, nt));
        worst = worst.max(d);
        violations += usize::from(d > crit);
        parts.push(format!("Nt={nt} D={d:.2e}"));
    }
    Ok(SuiteResult {
        id: "df_multi_cdf_ks",
        cases: 3,
        violations,
        worst,
        detail: format!("{} (critical {crit:.2e}, n={n})", parts.join(", ")),
    })
}

/// `P(loss(outer, inner) > eps)` under the correlated shadowing density by a
/// tensor Gauss-Legendre rule, with the inner domain cut at the bisected
/// threshold.
pub fn tensor_unavailability(
    loss: impl Fn(f64, f64) -> f64,
    eps: f64,
    sigma: f64,
    rho: f64,
) -> Result<f64, Error> {
    let nodes = gauss_legendre(16);
    let lim = 8.0 * sigma;
    let panels = 256;
    let h = 2.0 * lim / panels as f64;
    let s_cond = sigma * (1.0 - rho * rho).sqrt();
    let inner_panel = 0.5 * s_cond;
    // Above `kink` some inner value meets the target; the threshold curve
    // diverges there, so panels are graded geometrically towards it.
    let kink = bisect(-20.0 * sigma, 20.0 * sigma, |outer| loss(outer, 20.0 * sigma) <= eps);
    let mut cuts: Vec<f64> = (0..=panels).map(|p| -lim + p as f64 * h).collect();
    if kink.abs() < lim {
        cuts.push(kink);
        cuts.extend((1..=40).map(|j| kink + h * 0.5f64.powi(j)));
        cuts.extend((1..=4).map(|j| kink - h * 0.5f64.powi(j)));
    }
    cuts.retain(|c| c.abs() <= lim);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut err = None;
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        total += gauss_legendre_on(
            |outer| {
                let f = bisect(-20.0 * sigma, 20.0 * sigma, |inner| loss(outer, inner) <= eps);
                let lo = rho * outer - 12.0 * s_cond;
                let hi = f.min(rho * outer + 12.0 * s_cond);
                if hi <= lo {
                    return 0.0;
                }
                let k = ((hi - lo) / inner_panel).ceil().max(1.0) as usize;
                let w = (hi - lo) / k as f64;
                (0..k)
                    .map(|j| {
                        let x0 = lo + j as f64 * w;
                        gauss_legendre_on(
                            |inner| match joint_shadowing_pdf(outer, inner, rho, sigma) {
                                Ok(v) => v,
                                Err(e) => {
                                    err.get_or_insert(e);
                                    0.0
                                }
                            },
                            x0,
                            x0 + w,
                            &nodes,
                        )
                    })
                    .sum::<f64>()
            },
            pair[0],
            pair[1],
            &nodes,
        );
    }
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Two-link unavailability against [`tensor_unavailability`] at `instances`
/// random correlated scenarios, relative tolerance `1e-5`.
pub fn tensor_quadrature(instances: usize, seed: u64) -> Result<SuiteResult, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let (mut violations, mut worst) = (0, 0.0f64);
    let mut parts = Vec::new();
    while done < instances {
        let multi = done % 2 == 0;
        let nt = [2u32, 4, 8, 16, 32, 64, 128][rng.random_range(0..7)];
        let rho = rng.random_range(0.0..0.95);
        let k1 = rng.random_range(2..=8u32);
        let (t1, t2) = (k1 as f64 * 1e-4, (10 - k1) as f64 * 1e-4);
        let mut sc = scenario(
            if multi { ModeId::DfMulti } else { ModeId::DfCellular },
            nt,
        );
        sc.budget.d_p = 0.0;
        sc.budget.d_b = 0.0;
        let r = if multi {
            sc.rho_d = Some(rho);
            rng.random_range(10.0..150.0)
        } else {
            sc.rho_c = Some(rho);
            rng.random_range(20.0..250.0)
        };
        let u = unavailability(&sc, r, t1, t2, None)?;
        if !(1e-7..0.5).contains(&u) {
            continue;
        }
        let (ch, s, eps) = (sc.channel, sc.sys, sc.qos.eps_max);
        let g = |d: f64, delta: f64| ch.gain(d, delta).unwrap_or(0.0);
        let oracle = if multi {
            // Outer: cellular shadowing; inner: direct link.
            tensor_unavailability(
                |d_c, d_sr| {
                    let mu_c = g(sc.r_cell, d_c);
                    packet_loss_df_multi(mu_c, mu_c, g(r, d_sr), t1, t2, &s).unwrap_or(1.0)
                },
                eps,
                ch.sigma_db,
                rho,
            )?
        } else {
            tensor_unavailability(
                |d_sb, d_br| packet_loss_df_cellular(g(r, d_sb), g(r, d_br), t1, t2, &s).unwrap_or(1.0),
                eps,
                ch.sigma_db,
                rho,
            )?
        };
        let rel = (u - oracle).abs() / oracle;
        worst = worst.max(rel);
        violations += usize::from(rel > 1e-5);
        parts.push(format!(
            "{}(Nt={nt},rho={rho:.2},r={r:.0}): {rel:.1e}",
            if multi { "df_multi" } else { "df_cellular" }
        ));
        done += 1;
    }
    Ok(SuiteResult {
        id: "tensor_quadrature",
        cases: instances,
        violations,
        worst,
        detail: parts.join("; "),
    })
}

/// Unavailability along 50-point range grids never decreases.
pub fn monotone_in_range() -> Result<SuiteResult, Error> {
    let rs: Vec<f64> = (1..=50).map(|i| i as f64 * 5.0).collect();
    let mut cases = 0;
    let mut violations = 0;
    let mut worst = 0.0f64;
    let mut d2d = scenario(ModeId::D2d, 1);
    d2d.budget.d_p = 0.0;
    d2d.budget.d_b = 0.0;
    let mut dfc = scenario(ModeId::DfCellular, 8);
    dfc.budget.d_p = 0.0;
    dfc.budget.d_b = 0.0;
    let mut dfc_half = dfc.clone();
    dfc_half.rho_c = Some(0.5);
    let dfm8 = scenario(ModeId::DfMulti, 8);
    let mut dfm32 = scenario(ModeId::DfMulti, 32);
    dfm32.rho_d = Some(0.5);
    let runs = [
        (d2d, 5e-4, 5e-4),
        (dfc, 6e-4, 4e-4),
        (dfc_half, 6e-4, 4e-4),
        (dfm8, 5e-4, 3e-4),
        (dfm32, 4e-4, 4e-4),
    ];
    for (sc, t1, t2) in &runs {
        let us = rs
            .iter()
            .map(|&r| unavailability(sc, r, *t1, *t2, None))
            .collect::<Result<Vec<f64>, Error>>()?;
        for w in us.windows(2) {
            cases += 1;
            // Quadrature noise allowance.
            let drop = w[0] - w[1];
            if drop > 1e-6 * w[0] + 1e-15 {
                violations += 1;
            }
            if w[0] > 0.0 {
                worst = worst.max(drop / w[0]);
            }
        }
    }
    Ok(SuiteResult {
        id: "monotone_in_range",
        cases,
        violations,
        worst,
        detail: format!("{} modes x 50 ranges, largest relative drop {worst:.1e}", runs.len()),
    })
}

fn nt_draw(rng: &mut ChaCha8Rng) -> u32 {
    [1u32, 2, 4, 8, 16, 32, 64, 128][rng.random_range(0..8)]
}

fn mu_for(log_snr: f64, s: &SystemParams) -> f64 {
    10f64.powf(log_snr) / s.sender_scale()
}

/// AF multi SNR lies between the relay and direct SNRs, and its slope in the
/// downlink gain has the predicted sign.
pub fn af_multi_bounds(n: usize, seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut violations, mut sign_cases) = (0, 0);
    for _ in 0..n {
        let s = sys(nt_draw(&mut rng));
        let beta = 10f64.powf(rng.random_range(-2.0..4.0));
        let mu_br = mu_for(rng.random_range(-4.0..2.0), &s);
        let mu_sr = mu_for(rng.random_range(-2.0..3.0), &s);
        let g_br = rng.random_range(1e-3..200.0);
        let g_sr = rng.random_range(1e-3..10.0);
        let direct = mu_sr * g_sr * s.p_s / s.n0w();
        let v = snr_af_multi(beta, mu_br, g_br, mu_sr, g_sr, &s);
        let tol = 1e-12 * beta.max(direct);
        if !(v >= beta.min(direct) - tol && v <= beta.max(direct) + tol) {
            violations += 1;
        }
        let dv = snr_af_multi(beta, mu_br * (1.0 + 1e-4), g_br, mu_sr, g_sr, &s) - v;
        let expected = beta * s.n0w() - mu_sr * g_sr * s.p_s;
        if expected.abs() > 1e-6 * (beta * s.n0w()).max(mu_sr * g_sr * s.p_s) {
            sign_cases += 1;
            if (dv > 0.0) != (expected > 0.0) {
                violations += 1;
            }
        }
    }
    SuiteResult {
        id: "af_multi_bounds",
        cases: n,
        violations,
        worst: violations as f64,
        detail: format!("{n} tuples, {sign_cases} with a resolvable slope sign"),
    }
}

/// Loss ordering between the DF modes and SNR dominance among the relay modes.
pub fn ordering_and_dominance(n: usize, seed: u64) -> Result<SuiteResult, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let slack = |x: f64| x * (1.0 + 1e-9) + 1e-15;
    for _ in 0..n {
        let s = sys(nt_draw(&mut rng));
        let t = rng.random_range(1..=9u32) as f64 * 1e-4;
        let g = LargeScaleTriple {
            mu_sb: mu_for(rng.random_range(-2.0..3.0), &s),
            mu_br: mu_for(rng.random_range(-4.0..2.0), &s),
            mu_sr: mu_for(rng.random_range(-2.0..3.0), &s),
        };
        let dfm = packet_loss_df_multi(g.mu_sb, g.mu_br, g.mu_sr, t, t, &s)?;
        let d2d = packet_loss_d2d(g.mu_sr, t, t, &s)?;
        let dfc = packet_loss_df_cellular(g.mu_sb, g.mu_br, t, t, &s)?;
        if dfm > slack(d2d) || dfm > slack(dfc) {
            violations += 1;
        }
        let g_sb = rng.random_range(1e-3..20.0);
        let g_br = rng.random_range(1e-3..200.0);
        let g_sr = rng.random_range(1e-3..10.0);
        if !snr_ordering_holds(g_sb, &g, g_br, g_sr, &s) {
            violations += 1;
        }
        let beta = uplink_snr_beta(g.mu_sb, g_sb, &s);
        let afc = snr_af_cellular(beta, g.mu_br, g_br, &s);
        let dl_only = g.mu_br * g_br * s.p_b() / (s.nt as f64 * s.n0w());
        if afc >= beta.min(dl_only) * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    Ok(SuiteResult {
        id: "ordering_and_dominance",
        cases: n,
        violations,
        worst: violations as f64,
        detail: format!("{n} tuples: loss ordering, SNR ordering, AF cellular bound"),
    })
}

/// AF multi SNR tends to the DF multi SNR as the uplink SNR grows.
pub fn large_beta_limit(n: usize, seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut violations, mut worst) = (0, 0.0f64);
    for _ in 0..n {
        let s = sys(nt_draw(&mut rng));
        let mu_br = mu_for(rng.random_range(-4.0..0.0), &s);
        let mu_sr = mu_for(rng.random_range(-2.0..3.0), &s);
        let g_br = rng.random_range(1e-3..200.0);
        let g_sr = rng.random_range(1e-3..10.0);
        let af = snr_af_multi(1e12, mu_br, g_br, mu_sr, g_sr, &s);
        let df = snr_df_multi(mu_br, g_br, mu_sr, g_sr, &s);
        let rel = (af - df).abs() / df;
        worst = worst.max(rel);
        violations += usize::from(rel > 1e-6);
    }
    SuiteResult {
        id: "large_beta_limit",
        cases: n,
        violations,
        worst,
        detail: format!("worst relative gap {worst:.1e} at beta = 1e12 over {n} tuples"),
    }
}
