//! Mode-wise extension w(t,·) with ŵ(t,ξ) = û(ξ) ϑ(√P t), P = |ξ|² + m², and
//! its weighted Neumann trace.

use super::field::SpectralField;
use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::params::Params;
use crate::quad;
use crate::specfun::{kappa_s, theta_deriv, theta_flux, theta_profile};
use std::collections::BTreeMap;

/// w(t_j, ·) for each level; the t = 0 level is u itself.
pub fn extend(u: &SpectralField, params: &Params, t_levels: &[f64]) -> Result<Vec<SpectralField>> {
    if t_levels.iter().any(|&t| !(t >= 0.0)) || t_levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams("t levels must be non-negative and sorted".into()));
    }
    let (s, m) = (params.s, params.m);
    t_levels
        .iter()
        .map(|&t| {
            if t == 0.0 {
                Ok(u.clone())
            } else {
                u.map_modes(|xi2| theta_profile(s, (xi2 + m * m).sqrt() * t).unwrap_or(f64::NAN))
            }
        })
        .collect()
}

/// -lim t^{1-2s} ∂_t w = κ_s (|ξ|² + m²)^s û.
pub fn neumann_trace(u: &SpectralField, params: &Params) -> Result<SpectralField> {
    let kappa = kappa_s(params.s)?;
    let (s, m) = (params.s, params.m);
    u.map_modes(|xi2| {
        let p = xi2 + m * m;
        if p == 0.0 {
            0.0
        } else {
            kappa * p.powf(s)
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceVerification {
    pub modes_checked: usize,
    pub max_rel_err: f64,
    pub t_levels: Vec<f64>,
}

const TRACE_LEVELS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// Extrapolated flux -t^{1-2s}∂_t ŵ(t) → value at t = 0 for one mode, from
/// the four levels t_j = τ_j / max(1, √P) and the model
/// c₀ + c₁x^{2-2s} + c₂x² + c₃x^{4-2s}, x = √P t.
pub fn extrapolated_mode_flux(s: f64, p: f64) -> Result<f64> {
    if p == 0.0 {
        return Ok(0.0);
    }
    let sp = p.sqrt();
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for &tau in &TRACE_LEVELS {
        let t = tau / sp.max(1.0);
        let x = sp * t;
        // -t^{1-2s} ∂_t ϑ(√P t) = P^s · [-(x)^{1-2s} ϑ'(x)]
        ys.push(p.powf(s) * theta_flux(s, x)?);
        rows.push(vec![1.0, x.powf(2.0 - 2.0 * s), x * x, x.powf(4.0 - 2.0 * s)]);
    }
    let c = solve_dense(rows, ys).ok_or_else(|| Error::Degenerate("singular trace extrapolation".into()))?;
    Ok(c[0])
}

/// Compares the extrapolated finite-t flux with κ_s P^s for every mode whose
/// coefficient exceeds 1e-14 of the largest.
pub fn verify_trace(u: &SpectralField, params: &Params) -> Result<TraceVerification> {
    let kappa = kappa_s(params.s)?;
    let m2 = params.m * params.m;
    let umax = u.modal.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let mut cache: BTreeMap<u64, f64> = BTreeMap::new();
    let mut worst = 0.0f64;
    let mut count = 0;
    for (idx, z) in u.modal.iter().enumerate() {
        if z.norm() <= 1e-14 * umax {
            continue;
        }
        let p = u.xi_squared(idx) + m2;
        if p == 0.0 {
            continue;
        }
        let err = match cache.get(&p.to_bits()) {
            Some(e) => *e,
            None => {
                let exact = kappa * p.powf(params.s);
                let e = (extrapolated_mode_flux(params.s, p)? - exact).abs() / exact;
                cache.insert(p.to_bits(), e);
                e
            }
        };
        worst = worst.max(err);
        count += 1;
    }
    Ok(TraceVerification { modes_checked: count, max_rel_err: worst, t_levels: TRACE_LEVELS.to_vec() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEnergy {
    /// κ_s ∫ (|ξ|²+m²)^s |û|².
    pub trace_norm: f64,
    /// ∫∫ t^{1-2s}(|∇w|² + m² w²) for the extension, by quadrature in t.
    pub extension_energy: f64,
    /// Same for w + ε t e^{-t} u.
    pub perturbed_energy: f64,
    pub eps: f64,
    pub rel_gap: f64,
}

/// ∫_0^∞ t^{1-2s}[(√Pϑ'(√Pt) + εφ')² + P(ϑ(√Pt) + εφ)²] dt with φ = t e^{-t}.
fn mode_energy(s: f64, p: f64, eps: f64) -> Result<f64> {
    let sp = p.sqrt();
    let f = |t: f64| -> f64 {
        let x = sp * t;
        let phi = t * (-t).exp();
        let dphi = (1.0 - t) * (-t).exp();
        let th = theta_profile(s, x).unwrap_or(f64::NAN);
        let dth = theta_deriv(s, x).unwrap_or(f64::NAN);
        t.powf(1.0 - 2.0 * s) * ((sp * dth + eps * dphi).powi(2) + p * (th + eps * phi).powi(2))
    };
    // t^{1-2s} (√P ϑ'(√P t))² ~ κ² P^{2s} t^{2s-1} below the cut
    let u_lo = -50.0 - 0.5 * p.ln().max(0.0);
    let t0 = u_lo.exp();
    let kappa = kappa_s(s)?;
    let tail = kappa * kappa * p.powf(2.0 * s) * t0.powf(2.0 * s) / (2.0 * s);
    let u_hi = (60.0 / sp.max(1e-3)).max(40.0).ln();
    let a = quad::log_trapezoid(f, u_lo, u_hi, 1.0 / 32.0) + tail;
    let b = quad::log_trapezoid(f, u_lo, u_hi, 1.0 / 16.0) + tail;
    if (a - b).abs() > 1e-9 * a.abs() {
        return Err(Error::NoConvergence { what: "mode energy", detail: format!("{a} vs {b}") });
    }
    Ok(a)
}

/// Energy equality κ_s‖u‖²_{H^s_m} = ‖H(u)‖² for the profile extension and
/// strict inequality for a perturbed extension.
pub fn trace_energy_check(u: &SpectralField, params: &Params, eps: f64) -> Result<TraceEnergy> {
    let (s, m2) = (params.s, params.m * params.m);
    let kappa = kappa_s(s)?;
    let weight = u.spacing().powi(u.dim as i32) / u.len() as f64;
    let umax = u.modal.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let mut cache: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let (mut trace_norm, mut ext, mut pert) = (0.0, 0.0, 0.0);
    for (idx, z) in u.modal.iter().enumerate() {
        let a2 = z.norm_sqr();
        if z.norm() <= 1e-14 * umax {
            continue;
        }
        let p = u.xi_squared(idx) + m2;
        if p == 0.0 {
            continue;
        }
        let (e0, e1) = match cache.get(&p.to_bits()) {
            Some(v) => *v,
            None => {
                let v = (mode_energy(s, p, 0.0)?, mode_energy(s, p, eps)?);
                cache.insert(p.to_bits(), v);
                v
            }
        };
        trace_norm += kappa * p.powf(s) * a2 * weight;
        ext += e0 * a2 * weight;
        pert += e1 * a2 * weight;
    }
    Ok(TraceEnergy {
        trace_norm,
        extension_energy: ext,
        perturbed_energy: pert,
        eps,
        rel_gap: (ext - trace_norm).abs() / trace_norm.abs().max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_extension_and_trace() {
        let l = 2.0 * PI;
        let p = Params::simple(1, 0.5, 1.0, 0.0).unwrap();
        let u = SpectralField::from_fn(1, l, 32, |x| (2.0 * x[0]).cos()).unwrap();
        let w = extend(&u, &p, &[0.0, 0.3]).unwrap();
        assert_eq!(w[0], u);
        let factor = (-(5f64.sqrt()) * 0.3).exp();
        for (a, b) in w[1].values.iter().zip(&u.values) {
            assert!((a - factor * b).abs() < 1e-13);
        }
        let tr = neumann_trace(&u, &p).unwrap();
        for (a, b) in tr.values.iter().zip(&u.values) {
            assert!((a - 5f64.sqrt() * b).abs() < 1e-12);
        }
        assert!(extend(&u, &p, &[0.3, 0.1]).is_err());
    }

    #[test]
    fn constant_field_extension() {
        let p = Params::simple(1, 0.25, 1.0, 0.0).unwrap();
        let u = SpectralField::from_fn(1, 10.0, 16, |_| 1.0).unwrap();
        let w = extend(&u, &p, &[0.7]).unwrap();
        let th = theta_profile(0.25, 0.7).unwrap();
        assert!(w[0].values.iter().all(|v| (v - th).abs() < 1e-14));
        let tr = neumann_trace(&u, &p).unwrap();
        let k = kappa_s(0.25).unwrap();
        assert!(tr.values.iter().all(|v| (v - k).abs() < 1e-13));
    }

    #[test]
    fn mode_flux_extrapolation() {
        for &s in &[0.1, 0.5, 0.9] {
            for &p in &[1.0, 37.0, 1e4] {
                let e = extrapolated_mode_flux(s, p).unwrap();
                let exact = kappa_s(s).unwrap() * f64::powf(p, s);
                assert!((e - exact).abs() < 1e-8 * exact, "s={s}, P={p}: {e} vs {exact}");
            }
        }
    }
}
