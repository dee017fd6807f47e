//! Gaussian tail functions and integer-shape incomplete gamma helpers.
//!
//! Poisson weights `y^n e^{-y} / n!` are formed in the log domain and then
//! walked by ratio recurrences, so shapes in the hundreds do not overflow.

use crate::error::{Error, Result};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::factorial::ln_factorial;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const SERIES_EPS: f64 = 1e-17;

/// Gaussian upper tail `Pr{Z > x}`.
pub fn q_function(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    q_function(-x)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Inverse of [`q_function`], polished with Newton steps.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("q_inverse needs 0 < p < 1, got {p}")));
    }
    if p > 0.5 {
        return q_inverse(1.0 - p).map(|x| -x);
    }
    let mut x = SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..3 {
        let d = normal_pdf(x);
        if d == 0.0 {
            break;
        }
        let step = (q_function(x) - p) / d;
        x += step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

/// `ln(y^n e^{-y} / n!)`.
pub fn ln_poisson_pmf(n: u64, y: f64) -> f64 {
    if y == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    n as f64 * y.ln() - y - ln_factorial(n)
}

pub fn poisson_pmf(n: u64, y: f64) -> f64 {
    ln_poisson_pmf(n, y).exp()
}

/// Regularized lower incomplete gamma `P(k, y)` for integer shape.
///
/// `incomplete_gamma_cdf(k, y) = 1 - e^{-y} sum_{n<k} y^n/n!`, the CDF of a sum
/// of `k` unit exponentials.
pub fn incomplete_gamma_cdf(k: u32, y: f64) -> f64 {
    gamma_pq(k, y).0
}

/// Complement `Q(k, y) = 1 - P(k, y)`.
pub fn incomplete_gamma_ccdf(k: u32, y: f64) -> f64 {
    gamma_pq(k, y).1
}

/// `(P(k, y), Q(k, y))`, each computed directly in the regime where it is small.
pub fn gamma_pq(k: u32, y: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    if y <= 0.0 {
        return (0.0, 1.0);
    }
    if y.is_infinite() {
        return (1.0, 0.0);
    }
    let kf = k as f64;
    if y < kf {
        let mut t = poisson_pmf(k as u64, y);
        let mut sum = t;
        let mut n = kf;
        while t > SERIES_EPS * sum {
            n += 1.0;
            t *= y / n;
            sum += t;
        }
        let p = sum.min(1.0);
        (p, 1.0 - p)
    } else {
        let q = lower_poisson_sum(k, y, |_| 1.0).min(1.0);
        (1.0 - q, q)
    }
}

/// `sum_{j<k} weight(j) * pmf(j, y)` walked downward from `k-1`, for `y >= k-1`
/// where the terms shrink going down.
fn lower_poisson_sum(k: u32, y: f64, weight: impl Fn(u32) -> f64) -> f64 {
    let mut j = k - 1;
    let mut t = poisson_pmf(j as u64, y);
    let mut sum = weight(j) * t;
    while j > 0 {
        t *= j as f64 / y;
        j -= 1;
        let term = weight(j) * t;
        sum += term;
        if t < SERIES_EPS * sum.abs() {
            break;
        }
    }
    sum
}

/// `H(k, g) = \int_0^g P(k, t) dt = g P(k, g) - k P(k+1, g)`.
///
/// Small `g` uses `sum_{j>k} (j-k) pmf(j, g)`; large `g` uses
/// `g - k + sum_{j<k} (k-j) pmf(j, g)`. Both are sums of positive terms.
pub fn ramp_integral(k: u32, g: f64) -> f64 {
    if g <= 0.0 {
        return 0.0;
    }
    if k == 0 {
        return g;
    }
    let kf = k as f64;
    if g < kf + 1.0 {
        let mut n = kf + 1.0;
        let mut t = poisson_pmf(k as u64 + 1, g);
        let mut sum = t;
        let mut m = 1.0;
        loop {
            n += 1.0;
            m += 1.0;
            t *= g / n;
            let term = m * t;
            sum += term;
            if term <= SERIES_EPS * sum {
                break;
            }
        }
        sum
    } else {
        g - kf + lower_poisson_sum(k, g, |j| (k - j) as f64)
    }
}

/// `H(1, y) = y - 1 + e^{-y}`, with a series near zero.
pub fn exp_ramp(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y < 0.1 {
        let mut t = y * y / 2.0;
        let mut sum = t;
        let mut n = 2.0;
        while t.abs() > SERIES_EPS * sum {
            n += 1.0;
            t *= -y / n;
            sum += t;
        }
        sum
    } else {
        y + (-y).exp_m1()
    }
}
