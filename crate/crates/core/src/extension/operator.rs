//! (-Δ+m²)^s on the periodic box: Fourier symbol and Bessel-kernel
//! principal value, plus the Dirichlet-form identity between them.

use super::field::SpectralField;
use crate::error::{Error, Result};
use crate::specfun::{bessel_k, c_ns, gamma, sphere_area};
use rayon::prelude::*;

/// Multiplies û by (|ξ|² + m²)^s; for m = 0 the zero mode is annihilated.
pub fn apply_symbol(u: &SpectralField, s: f64, m: f64) -> Result<SpectralField> {
    check_sm(s, m)?;
    u.map_modes(|xi2| symbol(xi2, s, m))
}

fn symbol(xi2: f64, s: f64, m: f64) -> f64 {
    let p = xi2 + m * m;
    if p == 0.0 {
        0.0
    } else {
        p.powf(s)
    }
}

/// Inverts the symbol. For m = 0 a field with nonzero mean has no preimage.
pub fn solve_symbol(f: &SpectralField, s: f64, m: f64) -> Result<SpectralField> {
    check_sm(s, m)?;
    if m == 0.0 && f.mean().abs() > 1e-12 * f.values.iter().fold(0.0f64, |a, v| a.max(v.abs())) {
        return Err(Error::Degenerate("m = 0 and the zero mode is nonzero: symbol is not invertible".into()));
    }
    f.map_modes(|xi2| {
        let p = symbol(xi2, s, m);
        if p == 0.0 {
            0.0
        } else {
            1.0 / p
        }
    })
}

fn check_sm(s: f64, m: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) || !(m >= 0.0) {
        return Err(Error::InvalidParams(format!("s = {s}, m = {m}")));
    }
    Ok(())
}

/// ∫_{ℝ^N} |z|² |z|^{-ν} K_ν(m|z|) dz = |S^{N-1}| 2^{N-ν} m^{ν-N-2} Γ(1-s) Γ((N+2)/2).
pub fn second_moment(n: usize, s: f64, m: f64) -> Result<f64> {
    let nf = n as f64;
    let nu = (nf + 2.0 * s) / 2.0;
    Ok(sphere_area(n) * 2f64.powf(nf - nu) * m.powf(nu - nf - 2.0) * gamma(1.0 - s)? * gamma((nf + 2.0) / 2.0)?)
}

fn bessel_weight(r: f64, nu: f64, m: f64) -> f64 {
    if m * r > 740.0 {
        return 0.0;
    }
    r.powf(-nu) * bessel_k(nu, m * r).unwrap_or(0.0)
}

/// Table of J(z_j) = |z|^{-ν}K_ν(m|z|) on lattice offsets, with and without
/// periodic images; indexed like the field (signed offsets via DFT indexing).
struct KernelTable {
    direct: Vec<f64>,
    periodic: Vec<f64>,
    /// Squared offset components per table entry.
    z: Vec<[f64; 2]>,
}

fn kernel_table(u: &SpectralField, nu: f64, m: f64) -> KernelTable {
    let n = u.grid_n;
    let h = u.spacing();
    let l = u.box_length;
    let signed = |k: usize| u.signed_index(k) as f64 * h;
    let images: Vec<i32> = (-2..=2).collect();
    let size = u.len();
    let entries: Vec<(f64, f64, [f64; 2])> = (0..size)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = if u.dim == 1 { (signed(idx), 0.0) } else { (signed(idx / n), signed(idx % n)) };
            let r0 = a.hypot(b);
            let direct = if idx == 0 { 0.0 } else { bessel_weight(r0, nu, m) };
            let mut per = 0.0;
            for &i in &images {
                let ys: &[i32] = if u.dim == 1 { &[0] } else { &images };
                for &j in ys {
                    let r = (a + i as f64 * l).hypot(b + j as f64 * l);
                    if r > 0.0 {
                        per += bessel_weight(r, nu, m);
                    }
                }
            }
            (direct, per, [a, b])
        })
        .collect();
    KernelTable {
        direct: entries.iter().map(|e| e.0).collect(),
        periodic: entries.iter().map(|e| e.1).collect(),
        z: entries.iter().map(|e| e.2).collect(),
    }
}

const D2: [f64; 7] = [1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0, 1.5, -3.0 / 20.0, 1.0 / 90.0];
const D1: [f64; 7] = [-1.0 / 60.0, 3.0 / 20.0, -0.75, 0.0, 0.75, -3.0 / 20.0, 1.0 / 60.0];

/// Periodic sixth-order difference along `axis` with the given stencil.
fn stencil_axis(u: &SpectralField, vals: &[f64], axis: usize, st: &[f64; 7], scale: f64) -> Vec<f64> {
    let n = u.grid_n as i64;
    let wrap = |k: i64| ((k % n + n) % n) as usize;
    (0..vals.len())
        .map(|idx| {
            let (i0, i1) = if u.dim == 1 { (idx as i64, 0) } else { ((idx / u.grid_n) as i64, (idx % u.grid_n) as i64) };
            st.iter()
                .enumerate()
                .map(|(k, c)| {
                    let o = k as i64 - 3;
                    let j = if u.dim == 1 {
                        wrap(i0 + o)
                    } else if axis == 0 {
                        wrap(i0 + o) * u.grid_n + i1 as usize
                    } else {
                        i0 as usize * u.grid_n + wrap(i1 + o)
                    };
                    c * vals[j]
                })
                .sum::<f64>()
                * scale
        })
        .collect()
}

/// Hessian entries (H00, H01, H11) of the field by sixth-order differences.
fn hessian(u: &SpectralField) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = u.spacing();
    let h00 = stencil_axis(u, &u.values, 0, &D2, 1.0 / (h * h));
    if u.dim == 1 {
        let z = vec![0.0; u.len()];
        return (h00, z.clone(), z);
    }
    let h11 = stencil_axis(u, &u.values, 1, &D2, 1.0 / (h * h));
    let d1 = stencil_axis(u, &u.values, 1, &D1, 1.0 / h);
    let h01 = stencil_axis(u, &d1, 0, &D1, 1.0 / h);
    (h00, h01, h11)
}

fn gradient(u: &SpectralField) -> (Vec<f64>, Vec<f64>) {
    let h = u.spacing();
    let g0 = stencil_axis(u, &u.values, 0, &D1, 1.0 / h);
    let g1 = if u.dim == 1 { vec![0.0; u.len()] } else { stencil_axis(u, &u.values, 1, &D1, 1.0 / h) };
    (g0, g1)
}

fn shifted_index(u: &SpectralField, i: usize, j: usize) -> usize {
    let n = u.grid_n;
    if u.dim == 1 {
        (i + j) % n
    } else {
        ((i / n + j / n) % n) * n + (i % n + j % n) % n
    }
}

/// c_{N,s} m^ν P.V.∫ (u(x) - u(y)) |x-y|^{-ν} K_ν(m|x-y|) dy + m^{2s} u(x), ν = (N+2s)/2.
///
/// The lattice sum of f(z) = (u(x) - u(x+z)) J(z) is singular at z = 0. With
/// q(z) = -½ zᵀ∇²u(x) z J(z) (the second-order Taylor model of f) we use
///   ∫ f = Σ_{z≠0} hᴺ (f - q)(z) + ∫ q,   ∫ q = -Δu(x) M / (2N),
/// where M = ∫|z|² J is the closed-form second moment. The remainder f - q is
/// O(|z|^{4-N-2s}), so the sum converges at O(h^{4-2s}). Lattice points with
/// 0 < |z| < cutoff are treated with the Taylor model alone (f - q ≈ 0).
pub fn apply_kernel_pv(u: &SpectralField, s: f64, m: f64, cutoff: f64) -> Result<SpectralField> {
    check_sm(s, m)?;
    if m <= 0.0 {
        return Err(Error::InvalidParams("the Bessel-kernel backend needs m > 0".into()));
    }
    let h = u.spacing();
    if !(cutoff > 0.0 && cutoff <= 10.0 * h) {
        return Err(Error::InvalidParams(format!("cutoff {cutoff} outside (0, 10h] with h = {h}")));
    }
    let n_dim = u.dim;
    let nu = (n_dim as f64 + 2.0 * s) / 2.0;
    let c = c_ns(n_dim, s)?;
    let moment = second_moment(n_dim, s, m)?;
    let table = kernel_table(u, nu, m);
    let (h00, h01, h11) = hessian(u);
    let cell = h.powi(n_dim as i32);
    let vals = &u.values;
    let out: Vec<f64> = (0..u.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 1..u.len() {
                let z = table.z[j];
                if z[0].hypot(z[1]) < cutoff {
                    continue;
                }
                let f = (vals[i] - vals[shifted_index(u, i, j)]) * table.periodic[j];
                let quad_form = h00[i] * z[0] * z[0] + 2.0 * h01[i] * z[0] * z[1] + h11[i] * z[1] * z[1];
                let q = -0.5 * quad_form * table.direct[j];
                acc += f - q;
            }
            let lap = h00[i] + h11[i];
            c * m.powf(nu) * (acc * cell - lap * moment / (2.0 * n_dim as f64)) + m.powf(2.0 * s) * vals[i]
        })
        .collect();
    SpectralField::from_values(n_dim, u.box_length, u.grid_n, out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_gap: f64,
}

/// ∫(|ξ|²+m²)^s|û|² - m^{2s}∫u² against
/// (c_{N,s}/2) m^ν ∬ (u(x)-u(y))² |x-y|^{-ν} K_ν(m|x-y|) dx dy.
pub fn dirichlet_form_identity(u: &SpectralField, s: f64, m: f64) -> Result<DirichletIdentity> {
    check_sm(s, m)?;
    if m <= 0.0 {
        return Err(Error::InvalidParams("the Bessel-kernel side needs m > 0".into()));
    }
    let umax = u.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if umax == 0.0 {
        return Ok(DirichletIdentity { lhs: 0.0, rhs: 0.0, rel_gap: 0.0 });
    }
    check_decay(u, umax)?;
    let n_dim = u.dim;
    let h = u.spacing();
    let cell = h.powi(n_dim as i32);
    let total = u.len() as f64;
    let lhs = u
        .modal
        .iter()
        .enumerate()
        .map(|(k, z)| (symbol(u.xi_squared(k), s, m) - m.powf(2.0 * s)) * z.norm_sqr())
        .sum::<f64>()
        * cell
        / total;
    let nu = (n_dim as f64 + 2.0 * s) / 2.0;
    let c = c_ns(n_dim, s)?;
    let moment = second_moment(n_dim, s, m)?;
    let table = kernel_table(u, nu, m);
    let (g0, g1) = gradient(u);
    let vals = &u.values;
    let inner: f64 = (0..u.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 1..u.len() {
                let z = table.z[j];
                let d = vals[i] - vals[shifted_index(u, i, j)];
                let lin = g0[i] * z[0] + g1[i] * z[1];
                acc += d * d * table.periodic[j] - lin * lin * table.direct[j];
            }
            let grad2 = g0[i] * g0[i] + g1[i] * g1[i];
            acc * cell + grad2 * moment / n_dim as f64
        })
        .sum();
    let rhs = 0.5 * c * m.powf(nu) * inner * cell;
    let rel_gap = (lhs - rhs).abs() / lhs.abs().max(rhs.abs());
    Ok(DirichletIdentity { lhs, rhs, rel_gap })
}

/// Whole-space identities need |u| < 1e-12 max|u| near the box boundary.
fn check_decay(u: &SpectralField, umax: f64) -> Result<()> {
    let n = u.grid_n;
    let band = (n / 50).max(1);
    let near = |k: usize| k < band || k >= n - band;
    let worst = (0..u.len())
        .filter(|&idx| if u.dim == 1 { near(idx) } else { near(idx / n) || near(idx % n) })
        .map(|idx| u.values[idx].abs())
        .fold(0.0f64, f64::max);
    if worst > 1e-12 * umax {
        return Err(Error::Degenerate(format!(
            "u does not decay inside the box (|u| = {worst:e} near the boundary, max {umax:e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use std::f64::consts::PI;

    #[test]
    fn moment_matches_quadrature() {
        for &(n, s, m) in &[(1usize, 0.25, 0.5), (1, 0.75, 2.0), (2, 0.5, 1.0)] {
            let nu = (n as f64 + 2.0 * s) / 2.0;
            let radial = quad::exp_sinh(|r| r.powi(n as i32 + 1) * bessel_weight(r, nu, m), 0.0, 1e-13).unwrap();
            let q = sphere_area(n) * radial;
            let closed = second_moment(n, s, m).unwrap();
            assert!((q - closed).abs() < 1e-10 * closed, "{q} vs {closed}");
        }
    }

    #[test]
    fn symbol_on_single_mode_and_constant() {
        let l = 2.0 * PI;
        let u = SpectralField::from_fn(1, l, 64, |x| (3.0 * x[0]).cos()).unwrap();
        let v = apply_symbol(&u, 0.5, 1.0).unwrap();
        for (a, b) in v.values.iter().zip(&u.values) {
            assert!((a - 10f64.sqrt() * b).abs() < 1e-12);
        }
        let one = SpectralField::from_fn(1, l, 16, |_| 1.0).unwrap();
        let v = apply_symbol(&one, 0.5, 2.0).unwrap();
        assert!(v.values.iter().all(|x| (x - 2.0).abs() < 1e-13));
        let z = apply_symbol(&one, 0.5, 0.0).unwrap();
        assert!(z.values.iter().all(|x| x.abs() < 1e-14));
        assert!(solve_symbol(&one, 0.5, 0.0).is_err());
    }

    #[test]
    fn kernel_backend_constant_and_cutoff_errors() {
        let u = SpectralField::from_fn(1, 40.0, 128, |_| 3.0).unwrap();
        let v = apply_kernel_pv(&u, 0.25, 1.0, u.spacing()).unwrap();
        for x in &v.values {
            assert!((x - 3.0).abs() < 1e-12);
        }
        assert!(apply_kernel_pv(&u, 0.25, 1.0, 0.0).is_err());
        assert!(apply_kernel_pv(&u, 0.25, 1.0, 11.0 * u.spacing()).is_err());
    }

    #[test]
    fn dirichlet_identity_zero_and_decay_check() {
        let z = SpectralField::from_fn(1, 40.0, 128, |_| 0.0).unwrap();
        let r = dirichlet_form_identity(&z, 0.5, 1.0).unwrap();
        assert_eq!((r.lhs, r.rhs, r.rel_gap), (0.0, 0.0, 0.0));
        let c = SpectralField::from_fn(1, 40.0, 128, |x| (x[0] * 0.1).cos() + 2.0).unwrap();
        assert!(dirichlet_form_identity(&c, 0.5, 1.0).is_err());
    }
}
