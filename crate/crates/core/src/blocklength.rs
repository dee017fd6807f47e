//! Finite-blocklength decoding error: normal approximation, the linearized
//! Q-function and the closed forms built on it.

use crate::error::{invalid, Error, Result};
use crate::quadrature::{adaptive_simpson, gauss_kronrod};
use crate::special::{
    exp_ramp, gamma_pq, incomplete_gamma_cdf, ln_poisson_pmf, poisson_pmf, q_function, q_inverse,
    ramp_integral,
};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{LN_2, PI};

/// Payload, bandwidth and duration of one transmission phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeSpec {
    /// Payload in bits.
    pub b: f64,
    /// Bandwidth in Hz.
    pub w: f64,
    /// Phase duration in s.
    pub t: f64,
}

impl CodeSpec {
    pub fn new(b: f64, w: f64, t: f64) -> Result<CodeSpec> {
        let spec = CodeSpec { b, w, t };
        if !(b > 0.0) {
            return Err(invalid("b", "payload must be positive"));
        }
        if !(w > 0.0) || !(t > 0.0) {
            return Err(invalid("t", "bandwidth and duration must be positive"));
        }
        if spec.m_b() < 1.0 - 1e-9 {
            return Err(invalid(
                "t",
                format!("blocklength {} is below one symbol", spec.m_b()),
            ));
        }
        Ok(spec)
    }

    /// Blocklength in symbols.
    pub fn m_b(&self) -> f64 {
        self.t * self.w
    }

    /// Code rate in bits per symbol.
    pub fn r_c(&self) -> f64 {
        self.b / self.m_b()
    }

    pub fn linearized(&self) -> LinearizedQ {
        LinearizedQ::new(self.m_b(), self.b)
    }
}

/// Piecewise-linear stand-in for the exact error curve in SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedQ {
    pub omega: f64,
    pub theta: f64,
    pub zeta: f64,
    pub xi: f64,
    pub m_b: f64,
}

impl LinearizedQ {
    pub fn new(m_b: f64, b: f64) -> LinearizedQ {
        let r_c = b / m_b;
        let omega = 1.0 / (2.0 * PI * ((2.0 * r_c).exp2() - 1.0).sqrt());
        let theta = r_c.exp2() - 1.0;
        let half = 1.0 / (2.0 * omega * m_b.sqrt());
        LinearizedQ {
            omega,
            theta,
            zeta: theta - half,
            xi: theta + half,
            m_b,
        }
    }

    /// `omega * sqrt(m_b)`, the slope of the linear segment.
    pub fn slope(&self) -> f64 {
        self.omega * self.m_b.sqrt()
    }
}

/// Dispersion `V(gamma) = 1 - (1+gamma)^-2`.
pub fn dispersion(snr: f64) -> f64 {
    1.0 - (1.0 + snr).powi(-2)
}

/// Normal-approximation rate in bit/s.
pub fn achievable_rate(snr: f64, spec: &CodeSpec, eps: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(Error::Domain(format!("snr must be positive, got {snr}")));
    }
    let qi = q_inverse(eps)?;
    let pen = (dispersion(snr) / spec.m_b()).sqrt() * qi;
    Ok(spec.w / LN_2 * (snr.ln_1p() - pen))
}

/// Exact normal-approximation decoding error at instantaneous SNR `snr`.
pub fn exact_q_error(snr: f64, m_b: f64, b: f64) -> f64 {
    if !(snr > 0.0) {
        return 1.0;
    }
    let v = dispersion(snr);
    let arg = (m_b / v).sqrt() * (snr.ln_1p() - b * LN_2 / m_b);
    q_function(arg)
}

/// `1` below `zeta`, `1/2 - omega sqrt(m_b) (gamma - theta)` between the knees,
/// `0` above `xi`.
pub fn linearized_q(gamma: f64, lq: &LinearizedQ) -> f64 {
    if gamma <= lq.zeta {
        1.0
    } else if gamma >= lq.xi {
        0.0
    } else {
        (0.5 - lq.slope() * (gamma - lq.theta)).clamp(0.0, 1.0)
    }
}

/// `omega sqrt(m_b) \int_zeta^xi F(x) dx` by adaptive Simpson.
pub fn error_from_snr_cdf<F: FnMut(f64) -> f64>(cdf: F, lq: &LinearizedQ) -> Result<f64> {
    let mut cdf = cdf;
    let lo = lq.zeta.max(0.0);
    if lo >= lq.xi {
        return Ok(0.0);
    }
    let integral = adaptive_simpson(&mut cdf, lo, lq.xi, 1e-11, 1_000_000)?;
    Ok((lq.slope() * integral).clamp(0.0, 1.0))
}

/// Linearized decoding error over a Gamma(`nt`) gain with mean SNR scale `s`
/// per unit gain: `omega sqrt(m_b) s [H(nt, xi/s) - H(nt, zeta/s)]`.
pub fn simo_error(s: f64, nt: u32, lq: &LinearizedQ) -> f64 {
    if !(s > 0.0) {
        return 1.0;
    }
    if s.is_infinite() {
        return 0.0;
    }
    let hi = ramp_integral(nt, lq.xi / s);
    let lo = ramp_integral(nt, lq.zeta.max(0.0) / s);
    (lq.slope() * s * (hi - lo)).clamp(0.0, 1.0)
}

/// SIMO decoding error for large-scale gain `mu`, transmit power `power` and
/// noise power `n0w`.
pub fn simo_error_closed_form(mu: f64, spec: &CodeSpec, nt: u32, power: f64, n0w: f64) -> f64 {
    simo_error(mu * power / n0w, nt, &spec.linearized())
}

/// Sum `c_br g_br + c_sr g_sr` with `g_br ~ Gamma(nt)` and `g_sr ~ Exp(1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfMultiSnr {
    pub c_sr: f64,
    pub c_br: f64,
    pub nt: u32,
}

/// `sum_{k>=0} pmf(k, z) * n / (n + k)`.
fn poisson_mean_ratio(n: u32, z: f64) -> f64 {
    let nf = n as f64;
    if z > 1e4 {
        let u = nf + z;
        return nf / u
            * (1.0 + z / (u * u) - z / (u * u * u) + (3.0 * z * z + z) / (u * u * u * u));
    }
    let mode = z.floor();
    let p0 = ln_poisson_pmf(mode as u64, z).exp();
    let mut sum = p0 * nf / (nf + mode);
    let mut p = p0;
    let mut k = mode;
    loop {
        k += 1.0;
        p *= z / k;
        let t = p * nf / (nf + k);
        sum += t;
        if t <= 1e-18 * sum {
            break;
        }
    }
    p = p0;
    k = mode;
    while k > 0.0 {
        p *= k / z;
        k -= 1.0;
        let t = p * nf / (nf + k);
        sum += t;
        if t <= 1e-18 * sum {
            break;
        }
    }
    sum
}

impl DfMultiSnr {
    fn bulk_window(&self) -> (f64, f64) {
        let n = self.nt as f64;
        (
            (n - 15.0 * n.sqrt() - 20.0).max(0.0),
            n + 15.0 * n.sqrt() + 60.0,
        )
    }

    /// `(F(x), G(x))` where `G(x) = E[(x - gamma)^+] = \int_0^x F`.
    pub fn cdf_and_partial(&self, x: f64) -> (f64, f64) {
        if !(x > 0.0) {
            return (0.0, 0.0);
        }
        let n = self.nt;
        if self.c_br == 0.0 {
            let y = x / self.c_sr;
            return (-(-y).exp_m1(), self.c_sr * exp_ramp(y));
        }
        if self.c_sr == 0.0 {
            let y = x / self.c_br;
            return (incomplete_gamma_cdf(n, y), self.c_br * ramp_integral(n, y));
        }
        let y = x / self.c_br;
        let q = self.c_br / self.c_sr;
        let r = 1.0 - q;
        if r < -1.0 {
            let z = (q - 1.0) * y;
            if z > 0.5 * n as f64 {
                let (p, _) = gamma_pq(n, y);
                let f = (p - poisson_pmf(n as u64, y) * poisson_mean_ratio(n, z)).max(0.0);
                let g = (self.c_br * ramp_integral(n, y) - self.c_sr * f).max(0.0);
                return (f.min(1.0), g);
            }
        } else if y > self.bulk_window().1 {
            if r > 0.0 && y * r > self.bulk_window().1 {
                return self.beyond_tilted_bulk(x, q);
            }
            return self.bulk_quadrature(x);
        }
        self.series(y, q)
    }

    /// Poisson-weighted series `F = sum_{j>n} (1 - r^{j-n}) pmf(j, y)`,
    /// `G = c_br sum_{j>n+1} S_{j-n-1} pmf(j, y)` with `S_m = sum_{k<=m} (1 - r^k)`.
    fn series(&self, y: f64, q: f64) -> (f64, f64) {
        let n = self.nt;
        let r = 1.0 - q;
        let ln_r = if r > 0.0 { (-q).ln_1p() } else { 0.0 };
        let ln_abs_r = if r < 0.0 { (-r).ln() } else { 0.0 };
        let weight = |m: f64| -> f64 {
            if r > 0.0 {
                -(m * ln_r).exp_m1()
            } else if r == 0.0 {
                1.0
            } else {
                let mag = (m * ln_abs_r).exp();
                if (m as u64) % 2 == 0 {
                    1.0 - mag
                } else {
                    1.0 + mag
                }
            }
        };
        let mut p = ln_poisson_pmf(n as u64 + 1, y).exp();
        let mut j = n as f64 + 1.0;
        let mut m = 1.0;
        let mut f = 0.0;
        let mut g = 0.0;
        let mut s_prev = 0.0;
        let cap = j + y + 60.0 * y.sqrt() + 400.0;
        loop {
            let w = weight(m);
            f += w * p;
            g += s_prev * p;
            let s = s_prev + w;
            if j > y && p * (w.abs() + s.abs()) <= 1e-17 * (f.abs() + g.abs()) {
                break;
            }
            if (j > y && p == 0.0) || j > cap {
                break;
            }
            s_prev = s;
            j += 1.0;
            m += 1.0;
            p *= y / j;
        }
        (f.clamp(0.0, 1.0), (self.c_br * g).max(0.0))
    }

    /// Gamma mass above `x / c_br` is negligible even after tilting by
    /// `e^{q g}`, so the MGF gives `F = 1 - e^a` and
    /// `G = c_sr H(1, -a) + n c_sr (-ln(1 - q) - q)` with
    /// `a = -x / c_sr - n ln(1 - q)`.
    fn beyond_tilted_bulk(&self, x: f64, q: f64) -> (f64, f64) {
        let n = self.nt as f64;
        let ln_1mq = (-q).ln_1p();
        let a = -x / self.c_sr - n * ln_1mq;
        let f = -a.exp_m1();
        let g = self.c_sr * exp_ramp(-a) + n * self.c_sr * (-ln_1mq - q);
        (f.clamp(0.0, 1.0), g.max(0.0))
    }

    /// Integrates over the Gamma bulk when `x / c_br` lies beyond it.
    fn bulk_quadrature(&self, x: f64) -> (f64, f64) {
        let (lo, hi) = self.bulk_window();
        let nf = self.nt as f64;
        let ln_norm = ln_gamma(nf);
        let pdf = |g: f64| -> f64 {
            if g <= 0.0 {
                return if self.nt == 1 { 1.0 } else { 0.0 };
            }
            ((nf - 1.0) * g.ln() - g - ln_norm).exp()
        };
        let f = gauss_kronrod(
            |g| pdf(g) * -(-(x - self.c_br * g) / self.c_sr).exp_m1(),
            lo,
            hi,
            1e-12,
            0.0,
            400,
        )
        .unwrap_or_else(|e| match e {
            Error::Quadrature { estimate, .. } => estimate,
            _ => f64::NAN,
        });
        let g = gauss_kronrod(
            |g| pdf(g) * self.c_sr * exp_ramp((x - self.c_br * g) / self.c_sr),
            lo,
            hi,
            1e-12,
            0.0,
            400,
        )
        .unwrap_or_else(|e| match e {
            Error::Quadrature { estimate, .. } => estimate,
            _ => f64::NAN,
        });
        (f.clamp(0.0, 1.0), g.max(0.0))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_and_partial(x).0
    }

    pub fn partial_expectation(&self, x: f64) -> f64 {
        self.cdf_and_partial(x).1
    }

    /// Linearized decoding error `omega sqrt(m_b) [G(xi) - G(zeta)]`.
    pub fn error(&self, lq: &LinearizedQ) -> f64 {
        let hi = self.partial_expectation(lq.xi);
        let lo = self.partial_expectation(lq.zeta.max(0.0));
        (lq.slope() * (hi - lo)).clamp(0.0, 1.0)
    }
}

/// CDF of the DF multi-connectivity SNR `c_br g_br + c_sr g_sr`.
pub fn cdf_snr_df_multi(x: f64, c_sr: f64, c_br: f64, nt: u32) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    if c_sr > 0.0 && ((c_sr - c_br) / c_sr).abs() < 1e-9 {
        return incomplete_gamma_cdf(nt + 1, x / c_sr);
    }
    DfMultiSnr { c_sr, c_br, nt }.cdf(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lq(mb: f64) -> LinearizedQ {
        LinearizedQ::new(mb, 160.0)
    }

    #[test]
    fn knees_are_consistent() {
        let l = lq(800.0);
        assert!(l.zeta < l.theta && l.theta < l.xi);
        assert_relative_eq!(l.xi - l.zeta, 1.0 / l.slope(), max_relative = 1e-14);
        assert_eq!(linearized_q(l.theta, &l), 0.5);
        assert_eq!(linearized_q(l.zeta, &l), 1.0);
        assert_eq!(linearized_q(l.xi, &l), 0.0);
        assert_relative_eq!(linearized_q(l.zeta + 1e-13, &l), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn flat_cdfs() {
        let l = lq(800.0);
        assert_eq!(error_from_snr_cdf(|_| 0.0, &l).unwrap(), 0.0);
        assert_relative_eq!(
            error_from_snr_cdf(|_| 1.0, &l).unwrap(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rate_at_half_is_shannon() {
        let spec = CodeSpec::new(160.0, 2e6, 4e-4).unwrap();
        let r = achievable_rate(10.0, &spec, 0.5).unwrap();
        assert_relative_eq!(r, 2e6 / LN_2 * 11f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn exact_q_at_threshold_is_half() {
        let l = lq(800.0);
        assert_relative_eq!(
            exact_q_error(l.theta, 800.0, 160.0),
            0.5,
            max_relative = 1e-12
        );
        assert_eq!(exact_q_error(0.0, 800.0, 160.0), 1.0);
    }

    #[test]
    fn simo_limits() {
        let l = lq(400.0);
        assert_eq!(simo_error(0.0, 4, &l), 1.0);
        assert!(simo_error(1e-6, 4, &l) > 1.0 - 1e-9);
        assert!(simo_error(1e9, 4, &l) < 1e-30);
        assert_eq!(simo_error(f64::INFINITY, 4, &l), 0.0);
    }

    #[test]
    fn df_multi_limits_and_degenerate_paths() {
        let d = DfMultiSnr {
            c_sr: 1.0,
            c_br: 0.5,
            nt: 4,
        };
        assert_eq!(d.cdf(0.0), 0.0);
        assert!(d.cdf(1e4) > 1.0 - 1e-12);
        let equal = DfMultiSnr {
            c_sr: 2.0,
            c_br: 2.0,
            nt: 3,
        };
        assert_relative_eq!(
            equal.cdf(5.0),
            incomplete_gamma_cdf(4, 2.5),
            max_relative = 1e-13
        );
    }
}
