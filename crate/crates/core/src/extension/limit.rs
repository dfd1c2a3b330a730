//! Convolution with P_m(t, ·) in one dimension and the limit t → 0.

use super::kernel::cprime;
use crate::error::{Error, Result};
use crate::linalg::linear_fit;
use crate::params::Params;
use crate::quad;
use crate::specfun::bessel_k;

/// (P_m(t,·) * u)(x) for N = 1 by quadrature in y = t v. The v-range is
/// split at the images of the points in `kinks` where u is not smooth.
pub fn convolve_point<F: Fn(f64) -> f64>(u: &F, params: &Params, t: f64, x: f64, kinks: &[f64]) -> Result<f64> {
    if params.n != 1 {
        return Err(Error::Unsupported("pointwise convolution is implemented for N = 1".into()));
    }
    if !(t > 0.0) || !(params.m > 0.0) {
        return Err(Error::InvalidParams(format!("need t > 0 and m > 0 (t = {t}, m = {})", params.m)));
    }
    let s = params.s;
    let m = params.m;
    let nu = (1.0 + 2.0 * s) / 2.0;
    let cp = cprime(1, s)?;
    let pre = cp * t.powf(2.0 * s) * m.powf(nu) * t;
    let integrand = |v: f64| {
        let z = t * v.hypot(1.0);
        if m * z > 740.0 {
            return 0.0;
        }
        let k = pre * z.powf(-nu) * bessel_k(nu, m * z).unwrap_or(0.0);
        k * (u(x - t * v) + u(x + t * v))
    };
    let mut breaks: Vec<f64> = kinks.iter().map(|k| (x - k).abs() / t).filter(|v| *v > 0.0).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut total = 0.0;
    let mut lo = 0.0;
    for &b in &breaks {
        total += quad::tanh_sinh(integrand, lo, b, 1e-11)?;
        lo = b;
    }
    Ok(total + quad::exp_sinh(integrand, lo, 1e-11)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub t: Vec<f64>,
    pub sup_error: Vec<f64>,
    pub decreasing: bool,
    /// Slope of log(sup_error) against log(t).
    pub fitted_rate: f64,
}

/// max_x |P_m(t,·)*u - u| over `x_points` for each t in `t_seq`.
pub fn pointwise_kernel_limit<F: Fn(f64) -> f64 + Sync>(
    u: &F,
    kinks: &[f64],
    params: &Params,
    x_points: &[f64],
    t_seq: &[f64],
) -> Result<LimitReport> {
    let mut sup_error = Vec::with_capacity(t_seq.len());
    for &t in t_seq {
        let mut worst = 0.0f64;
        for &x in x_points {
            worst = worst.max((convolve_point(u, params, t, x, kinks)? - u(x)).abs());
        }
        sup_error.push(worst);
    }
    let decreasing = sup_error.windows(2).all(|w| w[1] <= w[0]);
    let lx: Vec<f64> = t_seq.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = sup_error.iter().map(|e| e.max(1e-300).ln()).collect();
    let fitted_rate = if t_seq.len() >= 2 { linear_fit(&lx, &ly).0 } else { f64::NAN };
    Ok(LimitReport { t: t_seq.to_vec(), sup_error, decreasing, fitted_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::theta_profile;

    #[test]
    fn constant_reduces_to_normalization() {
        let p = Params::simple(1, 0.5, 1.0, 0.0).unwrap();
        let one = |_x: f64| 1.0;
        let v = convolve_point(&one, &p, 0.2, 0.3, &[]).unwrap();
        assert!((v - theta_profile(0.5, 0.2).unwrap()).abs() < 1e-9);
        let r = pointwise_kernel_limit(&one, &[], &p, &[0.0], &[0.1, 0.01, 0.001]).unwrap();
        assert!(r.decreasing);
        for (t, e) in r.t.iter().zip(&r.sup_error) {
            assert!((e - (1.0 - theta_profile(0.5, *t).unwrap())).abs() < 1e-9);
        }
    }
}
