//! One-dimensional quadrature rules.

use crate::error::{Error, Result};

/// Adaptive Simpson on `[a, b]` with relative tolerance `rel_tol` and a cap on
/// the number of subintervals.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // A coarse magnitude for the absolute floor: integrands here are bounded and
    // monotone, so the three-point estimate is within a small factor.
    let floor = whole.abs() * rel_tol;
    let mut stack = vec![(a, b, fa, fm, fb, whole, 0u32)];
    let mut total = 0.0;
    let mut intervals = 1usize;
    while let Some((lo, hi, flo, fmid, fhi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let fl = f(0.5 * (lo + mid));
        let fr = f(0.5 * (mid + hi));
        let left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid);
        let right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi);
        let refined = left + right;
        let diff = refined - est;
        let local_tol = (rel_tol * refined.abs()).max(floor * (hi - lo) / (b - a));
        if diff.abs() <= 15.0 * local_tol || depth >= 60 {
            total += refined + diff / 15.0;
            continue;
        }
        intervals += 1;
        if intervals > max_intervals {
            return Err(Error::Quadrature {
                a,
                b,
                estimate: total + refined,
                error: diff.abs(),
            });
        }
        stack.push((lo, mid, flo, fl, fmid, left, depth + 1));
        stack.push((mid, hi, fmid, fr, fhi, right, depth + 1));
    }
    Ok(total)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) with global error control.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol*|I|)`.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= max_panels {
            return Err(Error::Quadrature {
                a,
                b,
                estimate: total,
                error: err,
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, p)| {
                if p.3 > acc.1 {
                    (i, p.3)
                } else {
                    acc
                }
            });
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Fixed Gauss-Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    nodes: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    nodes
        .0
        .iter()
        .zip(&nodes.1)
        .map(|(x, w)| w * f(c + h * x))
        .sum::<f64>()
        * h
}
