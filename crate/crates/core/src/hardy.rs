//! Hardy-Herbst inequality Λ ∫u²/|x|^{2s} ≤ ∫|ξ|^{2s}|û|², probed on Gaussian
//! mixtures (closed forms) and on near-extremal radial profiles through the
//! Mellin multiplier of (-Δ)^s on radial functions.

use crate::error::{Error, Result};
use crate::extension::SpectralField;
use crate::quad;
use crate::specfun::{gamma, herbst_lambda, ln_gamma_complex, sphere_area};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One term c·exp(-|x - x₀|²/(2σ²)). Off-center terms are only used for N = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussTerm {
    pub coef: f64,
    pub sigma: f64,
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    pub dim: usize,
    pub terms: Vec<GaussTerm>,
}

impl GaussianMixture {
    pub fn centered(dim: usize, terms: &[(f64, f64)]) -> Self {
        let terms = terms.iter().map(|&(coef, sigma)| GaussTerm { coef, sigma, center: 0.0 }).collect();
        GaussianMixture { dim, terms }
    }

    pub fn is_centered(&self) -> bool {
        self.terms.iter().all(|t| t.center == 0.0)
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.terms.is_empty() {
            return Err(Error::InvalidParams("empty Gaussian mixture".into()));
        }
        if self.terms.iter().any(|t| !(t.sigma > 0.0) || !t.coef.is_finite() || !t.center.is_finite()) {
            return Err(Error::InvalidParams("mixture terms need σ > 0 and finite data".into()));
        }
        if self.dim > 1 && !self.is_centered() {
            return Err(Error::Unsupported("off-center mixtures are only implemented for N = 1".into()));
        }
        Ok(())
    }

    /// Value at a point in R^dim (for N = 1 only x[0] is read).
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2_at = |c: f64| {
            if self.dim == 1 {
                (x[0] - c).powi(2)
            } else {
                x.iter().map(|v| v * v).sum::<f64>()
            }
        };
        self.terms.iter().map(|t| t.coef * (-r2_at(t.center) / (2.0 * t.sigma * t.sigma)).exp()).sum()
    }

    /// Unitary Fourier transform of a 1-D mixture.
    fn fourier_1d(&self, xi: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let amp = t.coef * t.sigma * (-0.5 * (t.sigma * xi).powi(2)).exp();
                Complex64::from_polar(amp, -xi * t.center)
            })
            .sum()
    }

    /// ∫|ξ|^{2s}|û|² with the unitary transform.
    pub fn fourier_energy(&self, s: f64) -> Result<f64> {
        self.validate()?;
        let n = self.dim as f64;
        if self.is_centered() {
            let area = sphere_area(self.dim);
            let g = gamma((n + 2.0 * s) / 2.0)?;
            let mut total = 0.0;
            for a in &self.terms {
                for b in &self.terms {
                    let beta = 0.5 * (a.sigma * a.sigma + b.sigma * b.sigma);
                    total += a.coef * b.coef * (a.sigma * b.sigma).powf(n) * area * g
                        / (2.0 * beta.powf((n + 2.0 * s) / 2.0));
                }
            }
            return Ok(total);
        }
        // |û|² is even for real u
        let f = |xi: f64, _d: f64| 2.0 * xi.powf(2.0 * s) * self.fourier_1d(xi).norm_sqr();
        let smin = self.terms.iter().map(|t| t.sigma).fold(f64::INFINITY, f64::min);
        let cut = 12.0 / smin;
        let head = quad::tanh_sinh_ends(|x, da, _| f(x, da), 0.0, cut, 1e-13)?;
        let tail = quad::exp_sinh_ends(f, cut, 1e-13)?;
        Ok(head + tail)
    }

    /// ∫u²/|x|^{2s}; needs N > 2s.
    pub fn weighted_l2(&self, s: f64) -> Result<f64> {
        self.validate()?;
        let n = self.dim as f64;
        if n <= 2.0 * s {
            return Err(Error::InvalidParams(format!("|x|^(-2s) is not locally integrable for N = {n}, s = {s}")));
        }
        if self.is_centered() {
            let area = sphere_area(self.dim);
            let g = gamma((n - 2.0 * s) / 2.0)?;
            let mut total = 0.0;
            for a in &self.terms {
                for b in &self.terms {
                    let beta = 0.5 / (a.sigma * a.sigma) + 0.5 / (b.sigma * b.sigma);
                    total += a.coef * b.coef * area * g / (2.0 * beta.powf((n - 2.0 * s) / 2.0));
                }
            }
            return Ok(total);
        }
        let reach = self
            .terms
            .iter()
            .map(|t| t.center.abs() + 12.0 * t.sigma)
            .fold(0.0, f64::max);
        let left = quad::tanh_sinh_ends(|x, _, db| db.powf(-2.0 * s) * self.eval(&[x]).powi(2), -reach, 0.0, 1e-12)?;
        let right = quad::tanh_sinh_ends(|x, da, _| da.powf(-2.0 * s) * self.eval(&[x]).powi(2), 0.0, reach, 1e-12)?;
        Ok(left + right)
    }

    /// A random mixture with 1..=4 terms, coefficients in (-1, 1), σ in
    /// (0.3, 3) and, for N = 1, centers in (-2, 2).
    pub fn random<R: Rng>(rng: &mut R, dim: usize) -> Self {
        let count = rng.gen_range(1..=4);
        let terms = (0..count)
            .map(|_| GaussTerm {
                coef: rng.gen_range(-1.0..1.0),
                sigma: rng.gen_range(0.3..3.0),
                center: if dim == 1 { rng.gen_range(-2.0..2.0) } else { 0.0 },
            })
            .collect();
        GaussianMixture { dim, terms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyMargin {
    pub fourier: f64,
    pub weighted: f64,
    pub lambda: f64,
    /// fourier - Λ·weighted, which must be ≥ 0.
    pub margin: f64,
    /// fourier / weighted, which must be ≥ Λ.
    pub ratio: f64,
}

pub fn herbst_margin(mix: &GaussianMixture, s: f64) -> Result<HardyMargin> {
    let lambda = herbst_lambda(mix.dim, s)?;
    let fourier = mix.fourier_energy(s)?;
    let weighted = mix.weighted_l2(s)?;
    if !(weighted > 0.0) {
        return Err(Error::Degenerate("mixture has zero weighted norm".into()));
    }
    Ok(HardyMargin { fourier, weighted, lambda, margin: fourier - lambda * weighted, ratio: fourier / weighted })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomProbe {
    pub dim: usize,
    pub s: f64,
    pub mixture: GaussianMixture,
    pub result: HardyMargin,
}

/// `count` seeded random mixtures over N ∈ {1, 2, 3}, s ∈ {1/4, 1/2, 3/4}
/// (pairs with N ≤ 2s are skipped).
pub fn randomized_margins(count: usize, seed: u64) -> Result<Vec<RandomProbe>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let dim = rng.gen_range(1..=3usize);
        let s = [0.25, 0.5, 0.75][rng.gen_range(0..3usize)];
        if dim as f64 <= 2.0 * s {
            continue;
        }
        let mixture = GaussianMixture::random(&mut rng, dim);
        let result = herbst_margin(&mixture, s)?;
        out.push(RandomProbe { dim, s, mixture, result });
    }
    Ok(out)
}

/// ∫|ξ|^{2s}|û|² from a periodic field (1-D or 2-D), as the discrete sum.
pub fn fourier_energy_fft(u: &SpectralField, s: f64) -> f64 {
    let cell = u.spacing().powi(u.dim as i32);
    let total = u.len() as f64;
    u.modal
        .iter()
        .enumerate()
        .map(|(i, c)| u.xi_squared(i).powf(s) * c.norm_sqr())
        .sum::<f64>()
        * cell
        / total
}

/// Φ(τ) = 2^{2s}|Γ((N+2s)/4 + iτ/2)|²/|Γ((N-2s)/4 + iτ/2)|²: on radial
/// functions, ∫|ξ|^{2s}|û|² = |S^{N-1}|/(2π)∫Φ(τ)|Ĝ(τ)|²dτ where
/// G(y) = e^{(N-2s)y/2}u(e^y). Φ(0) = Λ_{N,s} is its minimum.
pub fn mellin_multiplier(n: usize, s: f64, tau: f64) -> Result<f64> {
    let nf = n as f64;
    if nf <= 2.0 * s {
        return Err(Error::InvalidParams(format!("Mellin multiplier needs N > 2s (N = {n}, s = {s})")));
    }
    let top = ln_gamma_complex(Complex64::new((nf + 2.0 * s) / 4.0, tau / 2.0))?;
    let bottom = ln_gamma_complex(Complex64::new((nf - 2.0 * s) / 4.0, tau / 2.0))?;
    Ok((2.0 * s * std::f64::consts::LN_2 + 2.0 * (top.re - bottom.re)).exp())
}

/// Ĝ(τ) = ∫₀^∞ r^{(N-2s)/2 - 1 - iτ} e^{-r²/(2σ²)} dr for a centered Gaussian.
pub fn gaussian_mellin(n: usize, s: f64, sigma: f64, tau: f64) -> Result<Complex64> {
    let a = Complex64::new((n as f64 - 2.0 * s) / 2.0, -tau);
    let lg = ln_gamma_complex(a / 2.0)?;
    Ok(0.5 * ((a / 2.0) * (2.0 * sigma * sigma).ln() + lg).exp())
}

/// Ĝ(τ) by the trapezoid rule in y = ln r for a radial profile u(r).
pub fn radial_mellin_quadrature<F: Fn(f64) -> f64>(u: F, n: usize, s: f64, tau: f64, y_range: (f64, f64), h: f64) -> Complex64 {
    let c = (n as f64 - 2.0 * s) / 2.0;
    let steps = ((y_range.1 - y_range.0) / h).ceil() as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=steps {
        let y = y_range.0 + j as f64 * h;
        let g = (c * y).exp() * u(y.exp());
        let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
        acc += Complex64::from_polar(w * g * h, -tau * y);
    }
    acc
}

/// ∫₀^∞ f over a grid refined toward 0 at scale `eps`, with an exp-sinh tail.
fn tau_integral<F: Fn(f64) -> f64>(f: F, eps: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = eps;
    while hi < 4.0 {
        total += quad::tanh_sinh(|t| f(t), lo, hi, 1e-12)?;
        lo = hi;
        hi *= 4.0;
    }
    total += quad::exp_sinh(|t| f(t), lo, 1e-12)?;
    Ok(total)
}

/// Radial energy ∫|ξ|^{2s}|û|² through the Mellin side, given |Ĝ|².
pub fn mellin_energy<F: Fn(f64) -> f64>(n: usize, s: f64, ghat_sq: F, scale: f64) -> Result<f64> {
    let err = std::cell::RefCell::new(None);
    let val = tau_integral(
        |t| match mellin_multiplier(n, s, t) {
            Ok(p) => p * ghat_sq(t),
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        scale,
    )?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    // even integrand, so ∫_R = 2∫_0^∞
    Ok(sphere_area(n) / std::f64::consts::PI * val)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearOptimizer {
    pub eps: f64,
    pub ratio: f64,
    pub lambda: f64,
    pub rel_gap: f64,
}

/// Quotient ∫|ξ|^{2s}|û|² / ∫u²/|x|^{2s} for u = |x|^{-(N-2s)/2+ε}e^{-|x|²},
/// which tends to Λ_{N,s} as ε → 0. Here Ĝ(τ) = ½Γ((ε - iτ)/2).
pub fn near_optimizer_ratio(n: usize, s: f64, eps: f64) -> Result<NearOptimizer> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParams(format!("ε = {eps} must be positive")));
    }
    let lambda = herbst_lambda(n, s)?;
    let ghat_sq = |t: f64| match ln_gamma_complex(Complex64::new(eps / 2.0, -t / 2.0)) {
        Ok(lg) => 0.25 * (2.0 * lg.re).exp(),
        Err(_) => f64::NAN,
    };
    let top = mellin_energy(n, s, ghat_sq, eps)?;
    // Plancherel in y: ∫u²/|x|^{2s} = |S|∫G² dy = |S|/(2π)∫|Ĝ|²dτ, and
    // ∫G²dy = ∫r^{2ε-1}e^{-2r²}dr = Γ(ε)2^{-ε}/2 in closed form.
    let bottom = sphere_area(n) * gamma(eps)? * 2f64.powf(-eps) / 2.0;
    let ratio = top / bottom;
    Ok(NearOptimizer { eps, ratio, lambda, rel_gap: (ratio - lambda) / lambda })
}
