//! Sampling estimators that check the analytic paths independently.

use crate::blocklength::{exact_q_error, CodeSpec};
use crate::channel::MERGED_RHO;
use crate::error::{invalid, Result};
use crate::rng::{sample_moments, std_normal, StreamRng};

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    pub seed: u64,
    /// Set when the standard error is large relative to the mean, or no
    /// sample contributed.
    pub low_confidence: bool,
}

impl McEstimate {
    /// `|value - mean| <= k * std_error`, with a floor for exact zero-variance cases.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (value - self.mean).abs() <= k * self.std_error + 1e-15 * value.abs().max(self.mean.abs())
    }
}

pub const MIN_SAMPLES: usize = 1000;

fn check_n(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(invalid(
            "n",
            format!("need at least {MIN_SAMPLES} samples, got {n}"),
        ));
    }
    Ok(())
}

/// Mean exact-Q decoding error over SNRs from `snr_sampler`.
pub fn mc_decoding_error<S>(
    snr_sampler: S,
    spec: &CodeSpec,
    n: usize,
    seed: u64,
) -> Result<McEstimate>
where
    S: Fn(&mut StreamRng) -> f64 + Sync,
{
    check_n(n)?;
    let m_b = spec.m_b();
    let m = sample_moments(n, seed, |rng| exact_q_error(snr_sampler(rng), m_b, spec.b));
    Ok(McEstimate {
        mean: m.mean.clamp(0.0, 1.0),
        std_error: m.std_error(),
        n,
        seed,
        low_confidence: m.mean == 0.0 || m.std_error() > 0.1 * m.mean,
    })
}

/// Fraction of correlated shadowing pairs `(da, db)` with `loss_fn(da, db) <= eps_max`.
pub fn mc_availability<L>(
    loss_fn: L,
    rho: f64,
    sigma: f64,
    eps_max: f64,
    n: usize,
    seed: u64,
) -> Result<McEstimate>
where
    L: Fn(f64, f64) -> f64 + Sync,
{
    check_n(n)?;
    if rho.abs() > 1.0 {
        return Err(invalid("rho", "must lie in [-1, 1]"));
    }
    let c = (1.0 - rho * rho).max(0.0).sqrt();
    let merged = rho.abs() >= MERGED_RHO;
    let m = sample_moments(n, seed, |rng| {
        let a = sigma * std_normal(rng);
        let b = if merged {
            rho.signum() * a
        } else {
            rho * a + c * sigma * std_normal(rng)
        };
        if loss_fn(a, b) <= eps_max {
            1.0
        } else {
            0.0
        }
    });
    Ok(McEstimate {
        mean: m.mean,
        std_error: m.std_error(),
        n,
        seed,
        low_confidence: m.mean == 0.0 || m.mean == 1.0,
    })
}

/// Right-continuous empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<EmpiricalCdf> {
        if samples.is_empty() {
            return Err(invalid(
                "samples",
                "empirical CDF needs at least one sample",
            ));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(invalid("samples", "NaN sample"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|s| *s <= x) as f64 / self.sorted.len() as f64
    }

    /// Smallest sample `s` with `F(s) >= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Kolmogorov-Smirnov distance to a continuous CDF.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// KS critical value at 99% confidence.
pub fn ks_critical_99(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_cdf() {
        let e = EmpiricalCdf::new(vec![2.0]).unwrap();
        assert_eq!(e.eval(1.999), 0.0);
        assert_eq!(e.eval(2.0), 1.0);
        assert_eq!(e.quantile(0.5), 2.0);
        assert!(EmpiricalCdf::new(vec![]).is_err());
    }

    #[test]
    fn quantiles_reproduce_samples() {
        let xs = vec![3.0, 1.0, 2.0, 5.0];
        let e = EmpiricalCdf::new(xs).unwrap();
        assert_eq!(e.quantile(0.25), 1.0);
        assert_eq!(e.quantile(0.5), 2.0);
        assert_eq!(e.quantile(0.75), 3.0);
        assert_eq!(e.quantile(1.0), 5.0);
    }

    #[test]
    fn availability_extremes() {
        let a = mc_availability(|_, _| 0.0, 0.3, 8.0, 1e-7, 2000, 1).unwrap();
        assert_eq!(a.mean, 1.0);
        let b = mc_availability(|_, _| 1.0, 0.3, 8.0, 1e-7, 2000, 1).unwrap();
        assert_eq!(b.mean, 0.0);
        assert!(mc_availability(|_, _| 1.0, 0.3, 8.0, 1e-7, 10, 1).is_err());
    }
}
