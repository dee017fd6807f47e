//! Large-scale gains, shadowing correlation and fading samplers.

use crate::error::{invalid, Error, Result};
use crate::rng::{gamma_draw, open01, sample_vec, std_normal};
use std::f64::consts::PI;

/// Path loss and shadowing statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Path-loss exponent.
    pub alpha: f64,
    /// Gain at 1 m in dB.
    pub mu0_db: f64,
    /// Shadowing standard deviation in dB.
    pub sigma_db: f64,
    /// Shadowing decorrelation distance in m.
    pub r0: f64,
}

impl Default for ChannelParams {
    /// `35.3 + 37.6 log10(d)` path loss, 8 dB shadowing, 100 m decorrelation.
    fn default() -> Self {
        ChannelParams {
            alpha: 3.76,
            mu0_db: -35.3,
            sigma_db: 8.0,
            r0: 100.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(invalid("alpha", "must be positive"));
        }
        if !(self.sigma_db > 0.0) {
            return Err(invalid("sigma_db", "must be positive"));
        }
        if !(self.r0 > 0.0) {
            return Err(invalid("r0", "must be positive"));
        }
        if !self.mu0_db.is_finite() {
            return Err(invalid("mu0_db", "must be finite"));
        }
        Ok(())
    }

    /// Linear gain at distance `d` with shadowing `delta` dB.
    pub fn gain(&self, d: f64, delta: f64) -> Result<f64> {
        large_scale_gain_db(d, delta, self).map(db_to_linear)
    }
}

/// Sender-BS, BS-receiver and sender-receiver distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub r_sb: f64,
    pub r_br: f64,
    pub r_sr: f64,
}

/// Shadowing on the uplink, downlink and direct link, in dB.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShadowingDraw {
    pub delta_sb: f64,
    pub delta_br: f64,
    pub delta_sr: f64,
}

/// `-10 alpha log10(d) + delta + mu0` in dB.
pub fn large_scale_gain_db(d: f64, delta: f64, p: &ChannelParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {d}")));
    }
    Ok(-10.0 * p.alpha * d.log10() + delta + p.mu0_db)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// `exp(-d / r0)`.
pub fn shadowing_correlation(d: f64, r0: f64) -> f64 {
    (-d / r0).exp()
}

/// Correlations at or above this are treated as fully merged shadowing.
pub const MERGED_RHO: f64 = 1.0 - 1e-12;

/// Zero-mean bivariate Gaussian density with common deviation and correlation `rho`.
pub fn joint_shadowing_pdf(da: f64, db: f64, rho: f64, sigma: f64) -> Result<f64> {
    if rho.abs() >= MERGED_RHO {
        return Err(Error::Degenerate(rho.abs()));
    }
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let s2 = sigma * sigma;
    let one_m = 1.0 - rho * rho;
    let quad = (da * da + db * db - 2.0 * rho * (da * db)) / (s2 * one_m);
    Ok((-0.5 * quad).exp() / (2.0 * PI * s2 * one_m.sqrt()))
}

/// `n` pairs `(x, rho x + sqrt(1-rho^2) y)` of correlated shadowing values.
pub fn sample_correlated_shadowing(
    rho: f64,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if rho.abs() > 1.0 || !(sigma > 0.0) {
        return Err(Error::Domain(format!(
            "need |rho| <= 1 and sigma > 0, got rho={rho}, sigma={sigma}"
        )));
    }
    let merged = rho.abs() >= MERGED_RHO;
    let c = (1.0 - rho * rho).max(0.0).sqrt();
    Ok(sample_vec(n, seed, |rng| {
        let x = sigma * std_normal(rng);
        if merged {
            (x, rho.signum() * x)
        } else {
            (x, rho * x + c * sigma * std_normal(rng))
        }
    }))
}

/// Small-scale fading power gain model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadingKind {
    /// Unit-mean exponential.
    Siso,
    /// Sum of `Nt` unit exponentials.
    Simo(u32),
}

impl FadingKind {
    pub fn shape(self) -> u32 {
        match self {
            FadingKind::Siso => 1,
            FadingKind::Simo(n) => n,
        }
    }
}

pub fn sample_fading(kind: FadingKind, n: usize, seed: u64) -> Result<Vec<f64>> {
    let shape = kind.shape();
    if shape == 0 {
        return Err(invalid("nt", "antenna count must be at least 1"));
    }
    Ok(sample_vec(n, seed, |rng| {
        if shape == 1 {
            -open01(rng).ln()
        } else {
            gamma_draw(rng, shape)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gain_examples() {
        let p = ChannelParams::default();
        assert_abs_diff_eq!(
            large_scale_gain_db(1.0, 0.0, &p).unwrap(),
            -35.3,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            large_scale_gain_db(10.0, 0.0, &p).unwrap(),
            -72.9,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            large_scale_gain_db(100.0, 8.0, &p).unwrap(),
            -102.5,
            epsilon = 1e-12
        );
        assert!(large_scale_gain_db(0.0, 0.0, &p).is_err());
        assert!(large_scale_gain_db(-3.0, 0.0, &p).is_err());
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(shadowing_correlation(0.0, 100.0), 1.0);
        assert_abs_diff_eq!(
            shadowing_correlation(100.0, 100.0),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(shadowing_correlation(250.0, 100.0), 0.0821, epsilon = 5e-5);
    }

    #[test]
    fn pdf_origin_and_degenerate() {
        let v = joint_shadowing_pdf(0.0, 0.0, 0.0, 8.0).unwrap();
        assert_abs_diff_eq!(v, 1.0 / (2.0 * PI * 64.0), epsilon = 1e-15);
        assert!(matches!(
            joint_shadowing_pdf(0.0, 0.0, 1.0, 8.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn merged_pairs_identical() {
        for (a, b) in sample_correlated_shadowing(1.0, 8.0, 1000, 3).unwrap() {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
