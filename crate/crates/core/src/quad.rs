//! Quadrature rules: double-exponential (tanh-sinh, exp-sinh), Gauss-Legendre,
//! and the log-substituted trapezoid used for integrals over (0, ∞).

use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

const TS_TMAX: f64 = 6.0;
const TS_MAX_LEVEL: usize = 11;

/// Tanh-sinh quadrature on [a, b]. The integrand receives `(x, x - a, b - x)`
/// with both distances computed without cancellation, so endpoint
/// singularities like `(b - x)^{-p}` can be evaluated accurately.
pub fn tanh_sinh_ends<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64, f64, f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParams(format!("tanh_sinh on [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        let mut g = |x: f64, da: f64, db: f64| f(x, db, da);
        return tanh_sinh_impl(&mut g, b, a, rel_tol).map(|v| -v);
    }
    tanh_sinh_impl(&mut f, a, b, rel_tol)
}

fn tanh_sinh_impl(f: &mut dyn FnMut(f64, f64, f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let d = 0.5 * (b - a);
    let mut node = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let w = FRAC_PI_2 * t.cosh();
        // distances from the endpoints, d(1 ± tanh u) written stably
        let e = (-2.0 * u.abs()).exp();
        let small = 2.0 * d * e / (1.0 + e);
        let big = 2.0 * d / (1.0 + e);
        let (da, db) = if u >= 0.0 { (big, small) } else { (small, big) };
        if da == 0.0 || db == 0.0 {
            return 0.0;
        }
        let x = if u >= 0.0 { b - db } else { a + da };
        let ch = u.cosh();
        let weight = d * w / (ch * ch);
        if weight == 0.0 {
            return 0.0;
        }
        let v = f(x, da, db);
        if v.is_finite() {
            weight * v
        } else {
            f64::NAN
        }
    };
    let mut h = 0.5;
    let mut sum = node(0.0);
    let mut k = 1;
    while (k as f64) * h <= TS_TMAX {
        let t = k as f64 * h;
        sum += node(t) + node(-t);
        k += 1;
    }
    let mut prev = sum * h;
    let mut history = vec![prev];
    for _level in 1..=TS_MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= TS_TMAX {
            let t = k as f64 * h;
            sum += node(t) + node(-t);
            k += 2;
        }
        let cur = sum * h;
        if !cur.is_finite() {
            return Err(Error::NoConvergence {
                what: "tanh-sinh quadrature",
                detail: "non-finite integrand value".into(),
            });
        }
        history.push(cur);
        if (cur - prev).abs() <= rel_tol * cur.abs() || (cur - prev).abs() < 1e-300 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence {
        what: "tanh-sinh quadrature",
        detail: format!("level estimates {history:?}"),
    })
}

/// Tanh-sinh quadrature on [a, b] for a plain integrand.
pub fn tanh_sinh<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    tanh_sinh_ends(|x, _, _| f(x), a, b, rel_tol)
}

/// Exp-sinh quadrature on [a, ∞). The integrand receives `(x, x - a)`.
pub fn exp_sinh_ends<F>(mut f: F, a: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64, f64) -> f64,
{
    let tmax = 4.5;
    let mut node = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let da = u.exp();
        if da == 0.0 || !da.is_finite() {
            return 0.0;
        }
        let weight = da * FRAC_PI_2 * t.cosh();
        let v = f(a + da, da);
        if v == 0.0 {
            0.0
        } else {
            weight * v
        }
    };
    let mut h = 0.5;
    let mut sum = node(0.0);
    let mut k = 1;
    while (k as f64) * h <= tmax {
        let t = k as f64 * h;
        sum += node(t) + node(-t);
        k += 1;
    }
    let mut prev = sum * h;
    let mut history = vec![prev];
    for _ in 1..=TS_MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            let t = k as f64 * h;
            sum += node(t) + node(-t);
            k += 2;
        }
        let cur = sum * h;
        if !cur.is_finite() {
            return Err(Error::NoConvergence {
                what: "exp-sinh quadrature",
                detail: "non-finite integrand value".into(),
            });
        }
        history.push(cur);
        if (cur - prev).abs() <= rel_tol * cur.abs() || (cur - prev).abs() < 1e-300 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence {
        what: "exp-sinh quadrature",
        detail: format!("level estimates {history:?}"),
    })
}

/// Exp-sinh quadrature on [a, ∞) for a plain integrand.
pub fn exp_sinh<F>(mut f: F, a: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    exp_sinh_ends(|x, _| f(x), a, rel_tol)
}

/// Trapezoid rule for ∫ f(t) dt over t = e^u, u ∈ [u_lo, u_hi], with step h.
pub fn log_trapezoid<F>(mut f: F, u_lo: f64, u_hi: f64, h: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let n = ((u_hi - u_lo) / h).round().max(1.0) as usize;
    let h = (u_hi - u_lo) / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let u = u_lo + i as f64 * h;
        let t = u.exp();
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += w * f(t) * t;
    }
    sum * h
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
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

/// Fixed Gauss-Legendre rule mapped to [a, b].
pub fn gl_on<F: FnMut(f64) -> f64>(nodes: &(Vec<f64>, Vec<f64>), a: f64, b: f64, mut f: F) -> f64 {
    let c = 0.5 * (a + b);
    let d = 0.5 * (b - a);
    nodes.0.iter().zip(&nodes.1).map(|(x, w)| w * f(c + d * x)).sum::<f64>() * d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_polynomial_and_endpoint_singularity() {
        let v = tanh_sinh(|x| x * x, 0.0, 3.0, 1e-14).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        // ∫_0^1 (1-x)^{-0.9} dx = 10
        let v = tanh_sinh_ends(|_, _, db| db.powf(-0.9), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 10.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn exp_sinh_gamma_integral() {
        let v = exp_sinh(|x| x.powf(0.5) * (-x).exp(), 0.0, 1e-13).unwrap();
        assert!((v - 0.886_226_925_452_758).abs() < 1e-12, "{v}");
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let r = gauss_legendre(10);
        let v = gl_on(&r, 0.0, 2.0, |x| x.powi(19));
        assert!((v - 2f64.powi(20) / 20.0).abs() < 1e-9 * v);
        let s: f64 = r.1.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let r1 = gauss_legendre(1);
        assert_eq!(r1.0, vec![0.0]);
    }

    #[test]
    fn log_trapezoid_exponential() {
        let v = log_trapezoid(|t| (-t).exp(), -40.0, 4.5, 1.0 / 16.0);
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }
}
