//! The weighted eigenvalue problem on the upper half-sphere
//!
//!   -div_S(θ₁^{1-2s} ∇_S ψ) = μ θ₁^{1-2s} ψ,   -lim θ₁^{1-2s} ∇ψ·e₁ = κ_s a ψ,
//!
//! reduced by θ = (cos α, sin α ω) to one Sturm–Liouville problem per
//! spherical-harmonic degree l, discretized with cell-centred finite volumes.

use crate::error::{Error, Result};
use crate::params::{AKind, Params};
use crate::quad::{self, gauss_legendre};
use crate::specfun::kappa_s;
use crate::tridiag;
use std::f64::consts::FRAC_PI_2;

pub const DEFAULT_GRID_N: usize = 2048;
const MIN_GRID_N: usize = 64;

/// Finite-volume data on the α-interval: (0, π/2) for N ≥ 2, (-π/2, π/2) for N = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFv {
    pub n_dim: usize,
    pub s: f64,
    pub centers: Vec<f64>,
    /// Cell integrals of the weight w = |sin α|^{N-1} cos^{1-2s} α.
    pub mass: Vec<f64>,
    /// Cell integrals of w / sin² α (N ≥ 2), used by the l(l+N-2) term.
    pub pot: Vec<f64>,
    /// Interior face coefficients 1/∫ dα/w between neighbouring centres.
    pub face: Vec<f64>,
    /// ∫ dα/w from the last centre to π/2.
    pub r_right: f64,
    /// ∫ dα/w from -π/2 to the first centre (N = 1 only).
    pub r_left: Option<f64>,
}

fn weight_at(n_dim: usize, s: f64, alpha: f64, dist_right: f64, dist_left: Option<f64>) -> f64 {
    // cos α evaluated through the distance to the nearest ±π/2 end
    let cos = match dist_left {
        Some(dl) if dl < dist_right => dl.sin(),
        _ => dist_right.sin(),
    };
    let c = cos.powf(1.0 - 2.0 * s);
    if n_dim == 1 {
        c
    } else {
        alpha.sin().powi(n_dim as i32 - 1) * c
    }
}

impl IntervalFv {
    /// `grid_n` cells per quarter circle: the N = 1 interval gets 2·grid_n cells.
    pub fn new(n_dim: usize, s: f64, grid_n: usize) -> Result<Self> {
        if grid_n < 4 {
            return Err(Error::GridTooCoarse(format!("grid_n = {grid_n}")));
        }
        let (lo, ncell) = if n_dim == 1 { (-FRAC_PI_2, 2 * grid_n) } else { (0.0, grid_n) };
        let h = FRAC_PI_2 / grid_n as f64;
        let gl = gauss_legendre(12);
        // α = lo + x with x the offset from the left end; the right end is at
        // offset L, so distances to both ends are exact for grid points
        let len = ncell as f64 * h;
        let w = |x: f64| -> f64 {
            let dl = if n_dim == 1 { Some(x) } else { None };
            weight_at(n_dim, s, lo + x, len - x, dl)
        };
        let singular_cell = |i: usize| i + 1 == ncell || (n_dim == 1 && i == 0);
        let mut centers = Vec::with_capacity(ncell);
        let mut mass = Vec::with_capacity(ncell);
        let mut pot = Vec::with_capacity(ncell);
        for i in 0..ncell {
            let (x0, x1) = (i as f64 * h, (i + 1) as f64 * h);
            let xc = (i as f64 + 0.5) * h;
            centers.push(lo + xc);
            let m = if singular_cell(i) {
                quad::tanh_sinh_ends(
                    |_, da, db| {
                        let x = x0 + da;
                        let (dr, dl) = if i + 1 == ncell { (db, x) } else { (len - x, da) };
                        let dl = if n_dim == 1 { Some(dl) } else { None };
                        weight_at(n_dim, s, lo + x, dr, dl)
                    },
                    x0,
                    x1,
                    1e-13,
                )?
            } else {
                quad::gl_on(&gl, x0, x1, w)
            };
            mass.push(m);
            if n_dim >= 2 {
                let p = if n_dim == 2 && i == 0 {
                    m / (lo + xc).sin().powi(2)
                } else if i + 1 == ncell {
                    quad::tanh_sinh_ends(
                        |a, _, db| weight_at(n_dim, s, lo + a, db, None) / (lo + a).sin().powi(2),
                        x0,
                        x1,
                        1e-13,
                    )?
                } else {
                    quad::gl_on(&gl, x0, x1, |x| w(x) / (lo + x).sin().powi(2))
                };
                pot.push(p);
            }
        }
        let mut face = Vec::with_capacity(ncell - 1);
        for i in 0..ncell - 1 {
            let (x0, x1) = ((i as f64 + 0.5) * h, (i as f64 + 1.5) * h);
            let inv = quad::gl_on(&gl, x0, x1, |x| 1.0 / w(x));
            face.push(1.0 / inv);
        }
        let half = 0.5 * h;
        let r_right = quad::tanh_sinh_ends(
            |_, da, db| {
                let x = len - half + da;
                1.0 / weight_at(n_dim, s, lo + x, db, if n_dim == 1 { Some(x) } else { None })
            },
            len - half,
            len,
            1e-13,
        )?;
        let r_left = if n_dim == 1 {
            Some(quad::tanh_sinh_ends(|x, da, _| 1.0 / weight_at(1, s, lo + x, len - x, Some(da)), 0.0, half, 1e-13)?)
        } else {
            None
        };
        Ok(IntervalFv { n_dim, s, centers, mass, pot, face, r_right, r_left })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Condensed Robin coefficient for a half cell of resistance `r` carrying
    /// the boundary term -κ a g_b²: returns (-κa/(1-κaR), g_b/g_edge).
    pub fn robin(kappa: f64, a: f64, r: f64) -> Result<(f64, f64)> {
        let q = kappa * a * r;
        if q >= 1.0 {
            return Err(Error::GridTooCoarse(format!(
                "Robin condensation needs κ a R < 1 (got {q}); refine the angular grid"
            )));
        }
        Ok((-kappa * a / (1.0 - q), 1.0 / (1.0 - q)))
    }

    /// Symmetric tridiagonal stiffness (diag, off) of sector l with Robin data
    /// (a at -π/2, a at π/2).
    pub fn stiffness(&self, l: usize, a_ends: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.len();
        let kappa = kappa_s(self.s)?;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for (i, &k) in self.face.iter().enumerate() {
            diag[i] += k;
            diag[i + 1] += k;
            off[i] = -k;
        }
        if l > 0 {
            if self.n_dim == 1 {
                return Err(Error::InvalidParams("N = 1 has no harmonic sectors beyond l = 0".into()));
            }
            let ll = (l * (l + self.n_dim - 2)) as f64;
            for (d, p) in diag.iter_mut().zip(&self.pot) {
                *d += ll * p;
            }
        }
        diag[n - 1] += Self::robin(kappa, a_ends.1, self.r_right)?.0;
        if let Some(rl) = self.r_left {
            diag[0] += Self::robin(kappa, a_ends.0, rl)?.0;
        }
        Ok((diag, off))
    }
}

/// A sampled angular profile g(α) on the cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub alpha: Vec<f64>,
    pub mass: Vec<f64>,
    pub g: Vec<f64>,
    /// Reconstructed values at α = -π/2 (N = 1) and α = π/2.
    pub boundary: (f64, f64),
}

impl Profile {
    pub fn weighted_dot(&self, other: &Profile) -> f64 {
        self.mass.iter().zip(self.g.iter().zip(&other.g)).map(|(m, (a, b))| m * a * b).sum()
    }

    /// Piecewise-linear interpolant through the centres and the reconstructed
    /// end values at ±π/2 (only π/2 for N ≥ 2, with g'(0) = 0 below the first centre).
    pub fn interpolate(&self, alpha: f64) -> f64 {
        let n = self.g.len();
        let (a0, an) = (self.alpha[0], self.alpha[n - 1]);
        if alpha >= an {
            let t = (alpha - an) / (FRAC_PI_2 - an);
            return self.g[n - 1] + t.min(1.0) * (self.boundary.1 - self.g[n - 1]);
        }
        if alpha <= a0 {
            if self.boundary.0.is_nan() {
                return self.g[0];
            }
            let t = (a0 - alpha) / (a0 + FRAC_PI_2);
            return self.g[0] + t.min(1.0) * (self.boundary.0 - self.g[0]);
        }
        let k = self.alpha.partition_point(|&a| a <= alpha).clamp(1, n - 1);
        let t = (alpha - self.alpha[k - 1]) / (self.alpha[k] - self.alpha[k - 1]);
        self.g[k - 1] + t * (self.g[k] - self.g[k - 1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularEigenpair {
    pub sector_l: usize,
    /// Global index (1-based), assigned by `spectrum`; within `solve_sector`
    /// it is the intra-sector index.
    pub k: usize,
    /// Eigenvalue after Richardson extrapolation (or the raw value if none).
    pub mu: f64,
    /// Eigenvalue of the discrete problem on `grid_n`.
    pub mu_discrete: f64,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub gamma: f64,
    pub bessel_nu: f64,
    pub admissible: bool,
    pub profile: Profile,
    pub norm_certificate: f64,
    pub grid_n: usize,
    pub extrapolated: bool,
    /// Number of linearly independent harmonics of degree l on S^{N-1}.
    pub multiplicity: usize,
}

impl AngularEigenpair {
    fn from_mu(params: &Params, l: usize, k: usize, mu: f64, mu_discrete: f64, profile: Profile, grid_n: usize, extrapolated: bool) -> Self {
        let c = params.c();
        let disc = c * c + mu;
        // eigensolver roundoff can push the borderline μ = -c² just below it
        let admissible = disc >= -1e-9;
        let nu = if admissible { disc.max(0.0).sqrt() } else { f64::NAN };
        let norm_certificate = profile.weighted_dot(&profile);
        AngularEigenpair {
            sector_l: l,
            k,
            mu,
            mu_discrete,
            sigma_plus: -c + nu,
            sigma_minus: -c - nu,
            gamma: -c + nu,
            bessel_nu: nu,
            admissible,
            profile,
            norm_certificate,
            grid_n,
            extrapolated,
            multiplicity: harmonic_dimension(params.n, l),
        }
    }
}

/// Dimension of the space of degree-l spherical harmonics on S^{N-1}.
pub fn harmonic_dimension(n: usize, l: usize) -> usize {
    if n == 1 {
        return 1;
    }
    let binom = |a: usize, b: usize| -> usize {
        if b > a {
            return 0;
        }
        (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1))
    };
    binom(l + n - 1, n - 1) - if l >= 2 { binom(l + n - 3, n - 1) } else { 0 }
}

fn check_sector_params(params: &Params) -> Result<()> {
    if params.n >= 2 {
        if let AKind::TwoPoint { .. } = params.potential.a {
            return Err(Error::Unsupported("two-point a for N ≥ 2".into()));
        }
    }
    Ok(())
}

/// Raw discrete eigenpairs of sector l on a given grid.
fn discrete_sector(params: &Params, fv: &IntervalFv, l: usize, count: usize) -> Result<Vec<(f64, Profile)>> {
    let (diag, off) = fv.stiffness(l, params.a_ends())?;
    let sq: Vec<f64> = fv.mass.iter().map(|m| m.sqrt()).collect();
    let d: Vec<f64> = diag.iter().zip(&sq).map(|(k, q)| k / (q * q)).collect();
    let e: Vec<f64> = off.iter().enumerate().map(|(i, k)| k / (sq[i] * sq[i + 1])).collect();
    let kappa = kappa_s(params.s)?;
    let (am, ap) = params.a_ends();
    let fac_r = IntervalFv::robin(kappa, ap, fv.r_right)?.1;
    let fac_l = match fv.r_left {
        Some(r) => IntervalFv::robin(kappa, am, r)?.1,
        None => f64::NAN,
    };
    let pairs = tridiag::lowest_eigenpairs(&d, &e, count);
    let mut out = Vec::with_capacity(count);
    for (lam, x) in pairs {
        let mut g: Vec<f64> = x.iter().zip(&sq).map(|(v, q)| v / q).collect();
        // sign convention: positive weighted mean, or positive boundary value
        let mean: f64 = g.iter().zip(&fv.mass).map(|(a, m)| a * m).sum();
        let n = g.len();
        let pick = if mean.abs() > 1e-8 { mean } else { g[n - 1] };
        if pick < 0.0 {
            g.iter_mut().for_each(|v| *v = -*v);
        }
        let nrm: f64 = g.iter().zip(&fv.mass).map(|(a, m)| a * a * m).sum::<f64>().sqrt();
        g.iter_mut().for_each(|v| *v /= nrm);
        let boundary = (if fv.r_left.is_some() { g[0] * fac_l } else { f64::NAN }, g[n - 1] * fac_r);
        out.push((lam, Profile { alpha: fv.centers.clone(), mass: fv.mass.clone(), g, boundary }));
    }
    Ok(out)
}

/// The `count` lowest eigenpairs of sector l, with eigenvalues Richardson-
/// extrapolated from grids (grid_n, 2·grid_n). Profiles live on grid_n.
pub fn solve_sector(params: &Params, l: usize, count: usize, grid_n: usize) -> Result<Vec<AngularEigenpair>> {
    check_sector_params(params)?;
    if grid_n < MIN_GRID_N {
        return Err(Error::GridTooCoarse(format!("grid_n = {grid_n} is below {MIN_GRID_N}")));
    }
    if count == 0 || count > 16 || 16 * count > grid_n {
        return Err(Error::GridTooCoarse(format!("cannot resolve {count} eigenpairs on {grid_n} cells")));
    }
    let coarse_fv = IntervalFv::new(params.n, params.s, grid_n)?;
    let fine_fv = IntervalFv::new(params.n, params.s, 2 * grid_n)?;
    let coarse = discrete_sector(params, &coarse_fv, l, count)?;
    let fine = discrete_sector(params, &fine_fv, l, count)?;
    Ok(coarse
        .into_iter()
        .zip(fine)
        .enumerate()
        .map(|(i, ((mu_n, prof), (mu_2n, _)))| {
            let mu = (4.0 * mu_2n - mu_n) / 3.0;
            AngularEigenpair::from_mu(params, l, i + 1, mu, mu_n, prof, grid_n, true)
        })
        .collect())
}

/// Eigenpairs of sectors 0..=l_max merged and ordered by (μ, l, intra-sector
/// index), with global indices assigned from 1.
pub fn spectrum(params: &Params, l_max: usize, per_sector: usize, grid_n: usize) -> Result<Vec<AngularEigenpair>> {
    let l_top = if params.n == 1 { 0 } else { l_max };
    let sectors: Vec<Result<Vec<AngularEigenpair>>> = {
        use rayon::prelude::*;
        (0..=l_top).into_par_iter().map(|l| solve_sector(params, l, per_sector, grid_n)).collect()
    };
    let mut all = Vec::new();
    for s in sectors {
        all.extend(s?);
    }
    all.sort_by(|a, b| a.mu.total_cmp(&b.mu).then(a.sector_l.cmp(&b.sector_l)).then(a.k.cmp(&b.k)));
    for (i, p) in all.iter_mut().enumerate() {
        p.k = i + 1;
    }
    Ok(all)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mu1 {
    pub mu1: f64,
    pub eigenpair: AngularEigenpair,
    /// Whether the minimum over l ≤ 4 was found in sector 0.
    pub attained_at_l0: bool,
    /// Whether the ground profile has no sign change.
    pub positive: bool,
}

/// μ₁(a) = min over sectors l ≤ 4 of the sector-lowest eigenvalue.
pub fn mu1(params: &Params, grid_n: usize) -> Result<Mu1> {
    let l_top = if params.n == 1 { 0 } else { 4 };
    let mut best: Option<AngularEigenpair> = None;
    for l in 0..=l_top {
        let p = solve_sector(params, l, 1, grid_n)?.remove(0);
        if best.as_ref().map_or(true, |b| p.mu < b.mu) {
            best = Some(p);
        }
    }
    let mut eigenpair = best.expect("at least one sector");
    let gmax = eigenpair.profile.g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let positive = eigenpair.profile.g.iter().all(|&v| v >= -1e-12 * gmax);
    eigenpair.k = 1;
    Ok(Mu1 { mu1: eigenpair.mu, attained_at_l0: eigenpair.sector_l == 0, positive, eigenpair })
}

/// Checks μ₁(a) > -((N-2s)/2)², returning μ₁.
pub fn check_admissible(params: &Params, grid_n: usize) -> Result<f64> {
    let m = mu1(params, grid_n)?.mu1;
    let bound = params.hardy_bound();
    if m > bound {
        Ok(m)
    } else {
        Err(Error::Inadmissible { mu1: m, bound })
    }
}

/// A sampled function on the half-sphere of the form g(α) Y_l(ω) with
/// L²-normalized Y_l, given on the cell centres of the module grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPsi {
    pub l: usize,
    pub grid_n: usize,
    pub g: Vec<f64>,
}

/// Q(ψ, ψ) / ∫ θ₁^{1-2s} ψ² for the discrete quadratic form.
pub fn rayleigh_quotient(params: &Params, psi: &SampledPsi) -> Result<f64> {
    check_sector_params(params)?;
    let fv = IntervalFv::new(params.n, params.s, psi.grid_n)?;
    if psi.g.len() != fv.len() {
        return Err(Error::InvalidParams(format!("expected {} samples, got {}", fv.len(), psi.g.len())));
    }
    let (diag, off) = fv.stiffness(psi.l, params.a_ends())?;
    let g = &psi.g;
    let mut num = 0.0;
    for i in 0..g.len() {
        num += diag[i] * g[i] * g[i];
        if i + 1 < g.len() {
            num += 2.0 * off[i] * g[i] * g[i + 1];
        }
    }
    let den: f64 = g.iter().zip(&fv.mass).map(|(v, m)| v * v * m).sum();
    if den == 0.0 {
        return Err(Error::Degenerate("zero denominator in Rayleigh quotient".into()));
    }
    Ok(num / den)
}

/// Bisection for the constant a₀ at which μ₁(a₀) = -((N-2s)/2)².
pub fn sharp_constant_root(template: &Params, bracket: (f64, f64), grid_n: usize) -> Result<f64> {
    template.require_n_gt_2s()?;
    let bound = template.hardy_bound();
    let f = |a0: f64| -> Result<f64> {
        let p = template.with_a(if template.n == 1 { AKind::TwoPoint { minus: a0, plus: a0 } } else { AKind::Constant(a0) });
        Ok(mu1(&p, grid_n)?.mu1 - bound)
    };
    let (mut lo, mut hi) = bracket;
    let (mut flo, fhi) = (f(lo)?, f(hi)?);
    if flo * fhi > 0.0 {
        return Err(Error::NoSignChange { lo, hi, f_lo: flo, f_hi: fhi });
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() <= 1e-7 || (hi - lo) < 1e-13 * mid.abs().max(1.0) {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// 1 - max(0, λ) where λ = max κ∫aψ² / (∫θ₁^{1-2s}|∇ψ|² + ((N-2s)/2)²∫θ₁^{1-2s}ψ²),
/// from the discrete form with explicit boundary unknowns, Richardson-extrapolated.
pub fn hardy_constant(params: &Params, grid_n: usize) -> Result<f64> {
    check_sector_params(params)?;
    params.require_n_gt_2s()?;
    check_admissible(params, grid_n)?;
    let lam_n = steklov_max(params, grid_n)?;
    let lam_2n = steklov_max(params, 2 * grid_n)?;
    let lam = (4.0 * lam_2n - lam_n) / 3.0;
    Ok(1.0 - lam.max(0.0))
}

fn steklov_max(params: &Params, grid_n: usize) -> Result<f64> {
    let fv = IntervalFv::new(params.n, params.s, grid_n)?;
    let c2 = params.c() * params.c();
    let kappa = kappa_s(params.s)?;
    let (am, ap) = params.a_ends();
    let n = fv.len();
    let two_ended = fv.r_left.is_some();
    // unknowns: [g_b-]? g_0 .. g_{n-1} g_b+
    let off0 = usize::from(two_ended);
    let size = n + 1 + off0;
    let mut diag = vec![0.0; size];
    let mut off = vec![0.0; size - 1];
    for (i, &k) in fv.face.iter().enumerate() {
        diag[off0 + i] += k;
        diag[off0 + i + 1] += k;
        off[off0 + i] = -k;
    }
    for i in 0..n {
        diag[off0 + i] += c2 * fv.mass[i];
    }
    let kr = 1.0 / fv.r_right;
    diag[off0 + n - 1] += kr;
    diag[off0 + n] += kr;
    off[off0 + n - 1] = -kr;
    let mut b_idx = vec![off0 + n];
    let mut a_vals = vec![ap];
    if let Some(rl) = fv.r_left {
        let kl = 1.0 / rl;
        diag[0] += kl;
        diag[1] += kl;
        off[0] = -kl;
        b_idx.insert(0, 0);
        a_vals.insert(0, am);
    }
    // S = (A^{-1}) restricted to the boundary unknowns
    let mut s = vec![vec![0.0; b_idx.len()]; b_idx.len()];
    for (j, &bj) in b_idx.iter().enumerate() {
        let mut rhs = vec![0.0; size];
        rhs[bj] = 1.0;
        let col = tridiag::thomas(&off, &diag, &off, &rhs);
        for (i, &bi) in b_idx.iter().enumerate() {
            s[i][j] = col[bi];
        }
    }
    // largest eigenvalue of κ diag(a) S
    if b_idx.len() == 1 {
        return Ok(kappa * a_vals[0] * s[0][0]);
    }
    let m00 = kappa * a_vals[0] * s[0][0];
    let m01 = kappa * a_vals[0] * s[0][1];
    let m10 = kappa * a_vals[1] * s[1][0];
    let m11 = kappa * a_vals[1] * s[1][1];
    let tr = m00 + m11;
    let det = m00 * m11 - m01 * m10;
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    Ok(0.5 * tr + disc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PotentialSpec;

    #[test]
    fn harmonic_dimensions() {
        assert_eq!(harmonic_dimension(2, 0), 1);
        assert_eq!(harmonic_dimension(2, 3), 2);
        assert_eq!(harmonic_dimension(3, 2), 5);
        assert_eq!(harmonic_dimension(4, 1), 4);
    }

    #[test]
    fn weights_integrate_to_half_sphere_measure() {
        // N = 2, s = 1/2: ∫_0^{π/2} sin α dα = 1
        let fv = IntervalFv::new(2, 0.5, 128).unwrap();
        let total: f64 = fv.mass.iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
        // N = 1, s = 1/4: ∫ cos^{1/2} = 2·√π Γ(3/4)/(2Γ(5/4))
        let fv = IntervalFv::new(1, 0.25, 128).unwrap();
        let total: f64 = fv.mass.iter().sum();
        assert!((total - 2.396_280_469_471_184).abs() < 1e-11, "{total}");
    }

    #[test]
    fn polynomial_oracle_low_sectors() {
        let p = Params::simple(2, 0.5, 0.0, 0.0).unwrap();
        for (l, target) in [(0usize, 0.0), (1, 2.0), (2, 6.0)] {
            let e = solve_sector(&p, l, 1, 256).unwrap();
            assert!((e[0].mu - target).abs() < 1e-4, "l={l}: {}", e[0].mu);
        }
    }

    #[test]
    fn eigenpairs_are_weighted_orthonormal() {
        let p = Params::simple(3, 0.25, 0.0, 0.3).unwrap();
        let e = solve_sector(&p, 1, 4, 256).unwrap();
        for a in &e {
            assert!((a.norm_certificate - 1.0).abs() < 1e-12);
            for b in &e {
                if a.k != b.k {
                    assert!(a.profile.weighted_dot(&b.profile).abs() < 1e-8);
                }
            }
            let lhs = a.sigma_plus * (a.sigma_plus + 3.0 - 0.5);
            assert!((lhs - a.mu).abs() < 1e-10);
        }
    }

    #[test]
    fn rayleigh_quotient_consistency() {
        let p = Params::simple(2, 0.5, 0.0, 0.2).unwrap();
        let e = solve_sector(&p, 0, 2, 128).unwrap();
        for pair in &e {
            let psi = SampledPsi { l: 0, grid_n: 128, g: pair.profile.g.clone() };
            assert!((rayleigh_quotient(&p, &psi).unwrap() - pair.mu_discrete).abs() < 1e-8);
        }
        let bad = SampledPsi { l: 0, grid_n: 128, g: vec![0.0; 128] };
        assert!(rayleigh_quotient(&p, &bad).is_err());
    }

    #[test]
    fn mu1_monotone_in_a0() {
        let p0 = Params::simple(2, 0.5, 0.0, 0.0).unwrap();
        let p1 = Params::simple(2, 0.5, 0.0, 0.1).unwrap();
        let m0 = mu1(&p0, 128).unwrap();
        let m1 = mu1(&p1, 128).unwrap();
        assert!(m0.mu1.abs() < 1e-10);
        assert!(m1.mu1 < m0.mu1);
        assert!(m1.attained_at_l0 && m1.positive);
    }

    #[test]
    fn two_point_rejected_in_higher_dimension() {
        let mut p = Params::simple(2, 0.5, 0.0, 0.0).unwrap();
        p.potential = PotentialSpec { a: AKind::TwoPoint { minus: 0.1, plus: 0.1 }, ..p.potential };
        assert!(matches!(solve_sector(&p, 0, 1, 128), Err(Error::Unsupported(_))));
    }

    #[test]
    fn hardy_constant_trivial_and_missing_root() {
        let p = Params::simple(3, 0.5, 0.0, 0.0).unwrap();
        assert!((hardy_constant(&p, 128).unwrap() - 1.0).abs() < 1e-14);
        let r = sharp_constant_root(&p, (-1.0, -0.5), 128);
        assert!(matches!(r, Err(Error::NoSignChange { .. })));
    }
}
