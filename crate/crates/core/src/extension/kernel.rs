//! The Bessel (Poisson-type) kernel of the extension and its conjugate.

use crate::error::{Error, Result};
use crate::params::Params;
use crate::specfun::{bessel_k, cprime_by_normalization, sphere_area, theta_profile};
use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Mutex, OnceLock};

/// Samples of a radial kernel at distances |x| (signed offsets are accepted
/// for N = 1). `weights` is non-empty only for quadrature samples, in which
/// case Σ weights·values approximates ∫_{ℝ^N} P dx.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSample {
    pub t: f64,
    pub offsets: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl KernelSample {
    pub fn integral(&self) -> Option<f64> {
        if self.weights.len() != self.values.len() || self.weights.is_empty() {
            return None;
        }
        Some(self.weights.iter().zip(&self.values).map(|(w, v)| w * v).sum())
    }
}

/// C'_{N,s}, computed once per (N, s) by the normalization ∫P₁(1,x)dx = ϑ(1).
pub fn cprime(n: usize, s: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, s.to_bits());
    if let Some(v) = cache.lock().expect("cache lock").get(&key) {
        return Ok(*v);
    }
    let v = cprime_by_normalization(n, s)?;
    cache.lock().expect("cache lock").insert(key, v);
    Ok(v)
}

/// C' t^{2σ} m^ν |z|^{-ν} K_ν(m|z|), |z|² = t² + x², ν = (N+2σ)/2.
fn radial_kernel(n: usize, sigma: f64, m: f64, t: f64, x: f64, cp: f64) -> f64 {
    let nu = (n as f64 + 2.0 * sigma) / 2.0;
    let z = t.hypot(x);
    if m * z > 740.0 {
        return 0.0;
    }
    cp * t.powf(2.0 * sigma) * m.powf(nu) * z.powf(-nu) * bessel_k(nu, m * z).unwrap_or(0.0)
}

fn check(params: &Params, t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams(format!("kernel needs t > 0, got {t}")));
    }
    if !(params.m > 0.0) {
        return Err(Error::InvalidParams("the Bessel kernel needs m > 0".into()));
    }
    Ok(())
}

fn sample(params: &Params, sigma: f64, t: f64, offsets: &[f64]) -> Result<KernelSample> {
    check(params, t)?;
    let cp = cprime(params.n, sigma)?;
    let values = offsets.iter().map(|&x| radial_kernel(params.n, sigma, params.m, t, x.abs(), cp)).collect();
    Ok(KernelSample { t, offsets: offsets.to_vec(), weights: Vec::new(), values })
}

/// P_m(t, x) = C'_{N,s} t^{2s} m^{(N+2s)/2} |z|^{-(N+2s)/2} K_{(N+2s)/2}(m|z|).
pub fn kernel_eval(params: &Params, t: f64, offsets: &[f64]) -> Result<KernelSample> {
    sample(params, params.s, t, offsets)
}

/// Conjugate kernel: order 1-s with normalization C'_{N,1-s}, so that its
/// integral is ϑ_{1-s}(mt).
pub fn conjugate_kernel_eval(params: &Params, t: f64, offsets: &[f64]) -> Result<KernelSample> {
    sample(params, 1.0 - params.s, t, offsets)
}

fn quadrature_sample(params: &Params, sigma: f64, t: f64) -> Result<KernelSample> {
    check(params, t)?;
    let cp = cprime(params.n, sigma)?;
    let area = sphere_area(params.n);
    let h = 1.0 / 64.0;
    let kmax = (4.5 / h) as i64;
    let mut offsets = Vec::new();
    let mut weights = Vec::new();
    let mut values = Vec::new();
    for k in -kmax..=kmax {
        let tau = k as f64 * h;
        let rho = t * (FRAC_PI_2 * tau.sinh()).exp();
        if rho == 0.0 || !rho.is_finite() {
            continue;
        }
        let w = h * rho * FRAC_PI_2 * tau.cosh() * area * rho.powi(params.n as i32 - 1);
        offsets.push(rho);
        weights.push(w);
        values.push(radial_kernel(params.n, sigma, params.m, t, rho, cp));
    }
    Ok(KernelSample { t, offsets, weights, values })
}

/// Radial quadrature sample of P_m(t, ·) whose `integral()` approximates ∫P dx.
pub fn kernel_quadrature(params: &Params, t: f64) -> Result<KernelSample> {
    quadrature_sample(params, params.s, t)
}

/// Same for the conjugate kernel.
pub fn conjugate_kernel_quadrature(params: &Params, t: f64) -> Result<KernelSample> {
    quadrature_sample(params, 1.0 - params.s, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationCheck {
    pub integral: f64,
    pub theta: f64,
    pub abs_gap: f64,
}

/// ∫ P_m(t,x) dx against ϑ(mt) (or the conjugate pair with order 1-s).
pub fn normalization_check(params: &Params, t: f64, conjugate: bool) -> Result<NormalizationCheck> {
    let (sample, sigma) = if conjugate {
        (conjugate_kernel_quadrature(params, t)?, 1.0 - params.s)
    } else {
        (kernel_quadrature(params, t)?, params.s)
    };
    let integral = sample.integral().expect("quadrature sample has weights");
    let theta = theta_profile(sigma, params.m * t)?;
    Ok(NormalizationCheck { integral, theta, abs_gap: (integral - theta).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;
    use std::f64::consts::PI;

    #[test]
    fn normalization_and_symmetry() {
        let p = Params::simple(1, 0.5, 1.0, 0.0).unwrap();
        let c = normalization_check(&p, 0.5, false).unwrap();
        assert!(c.abs_gap < 1e-10, "{c:?}");
        let k = kernel_eval(&p, 0.5, &[-1.3, 1.3, 0.0]).unwrap();
        assert_eq!(k.values[0], k.values[1]);
        assert!(k.values.iter().all(|&v| v > 0.0));
        assert!(kernel_eval(&p, 0.0, &[1.0]).is_err());
        assert!(k.integral().is_none());
    }

    #[test]
    fn conjugate_is_self_at_half() {
        let p = Params::simple(1, 0.5, 1.0, 0.0).unwrap();
        let xs = [0.0, 0.3, 2.0];
        let a = kernel_eval(&p, 0.7, &xs).unwrap();
        let b = conjugate_kernel_eval(&p, 0.7, &xs).unwrap();
        assert_eq!(a.values, b.values);
        let p = Params::simple(2, 0.25, 0.5, 0.0).unwrap();
        let c = normalization_check(&p, 1.0, true).unwrap();
        assert!(c.abs_gap < 1e-10);
    }

    #[test]
    fn small_mass_matches_poisson_kernel() {
        let (n, s, t) = (1usize, 0.25, 1.0);
        let p = Params::simple(n, s, 1e-3, 0.0).unwrap();
        let nu = (n as f64 + 2.0 * s) / 2.0;
        let c0 = gamma(nu).unwrap() / (PI.powf(n as f64 / 2.0) * gamma(s).unwrap());
        let xs: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let k = kernel_eval(&p, t, &xs).unwrap();
        for (x, v) in xs.iter().zip(&k.values) {
            let poisson = c0 * t.powf(2.0 * s) / (t * t + x * x).powf(nu);
            assert!((v - poisson).abs() < 0.01 * poisson);
        }
    }
}
