//! Finite-volume solver for the N = 1 extended problem on a half disk
//! B_R^+ ⊂ {(t, x): t > 0}, with the origin excised.
//!
//! In polar coordinates t = ρ cos α, x = ρ sin α and u = ln ρ the weighted
//! energy is
//!
//!   ∫∫ ρ^{1-2s} c(α) (w_u² + w_α²) + m² ρ^{3-2s} c(α) w²  du dα
//!     - κ_s Σ_± ∫ (a_± ρ^{1-2s} + h(ρ) ρ) w(ρ, ±π/2)² du,     c = cos^{1-2s} α,
//!
//! so each radial cell carries the angular operator of the `angular` module
//! scaled by ∫ρ^{1-2s}du, with Robin data a_± + c_h ρ^χ averaged over the
//! cell. The outer arc takes Dirichlet data; the inner arc ρ = ρ_min takes
//! Dirichlet data or a transparent condition that closes each angular mode
//! with its exact homogeneous (or Bessel) solution inside the excised ball.

use crate::angular::{check_admissible, solve_sector, IntervalFv, DEFAULT_GRID_N};
use crate::diagnostics::{make_separable, RadialKind, SeparableSolution};
use crate::error::{Error, Result};
use crate::params::{AKind, HKind, Params, PotentialSpec};
use crate::specfun::{bessel_i_ratio, kappa_s};
use crate::tridiag;
use rayon::prelude::*;

fn pow_integral(p: f64, u0: f64, u1: f64) -> f64 {
    if p.abs() < 1e-14 {
        u1 - u0
    } else {
        ((p * u1).exp() - (p * u0).exp()) / p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub s: f64,
    pub r_outer: f64,
    pub rho_min: f64,
    /// Geometric ratio between consecutive radial faces.
    pub ratio: f64,
    pub du: f64,
    pub rho_faces: Vec<f64>,
    pub rho_centers: Vec<f64>,
    pub angular: IntervalFv,
    /// ∫ρ^{1-2s} du over each radial cell.
    pub cell_weight: Vec<f64>,
    /// ∫ρ^{3-2s} du over each radial cell.
    pub mass_weight: Vec<f64>,
    /// ρ^{1-2s} at each radial face.
    pub face_weight: Vec<f64>,
}

impl PolarGrid {
    /// `n_rho` radial cells and 2·`grid_n` angular cells on (-π/2, π/2).
    pub fn new(s: f64, r_outer: f64, rho_min: f64, n_rho: usize, grid_n: usize) -> Result<Self> {
        if !(rho_min > 0.0 && r_outer > rho_min) {
            return Err(Error::InvalidParams(format!("need 0 < rho_min < R (got {rho_min}, {r_outer})")));
        }
        if n_rho < 4 {
            return Err(Error::GridTooCoarse(format!("n_rho = {n_rho}")));
        }
        let (u0, u1) = (rho_min.ln(), r_outer.ln());
        let du = (u1 - u0) / n_rho as f64;
        let ratio = du.exp();
        if ratio > 1.1 {
            return Err(Error::GridTooCoarse(format!(
                "radial ratio {ratio:.4} exceeds 1.1; use more than {n_rho} radial cells"
            )));
        }
        let angular = IntervalFv::new(1, s, grid_n)?;
        let uf: Vec<f64> = (0..=n_rho).map(|i| u0 + i as f64 * du).collect();
        let rho_faces: Vec<f64> = uf.iter().map(|u| u.exp()).collect();
        let rho_centers = (0..n_rho).map(|i| (uf[i] + 0.5 * du).exp()).collect();
        let cell_weight = (0..n_rho).map(|i| pow_integral(1.0 - 2.0 * s, uf[i], uf[i + 1])).collect();
        let mass_weight = (0..n_rho).map(|i| pow_integral(3.0 - 2.0 * s, uf[i], uf[i + 1])).collect();
        let face_weight = rho_faces.iter().map(|r| r.powf(1.0 - 2.0 * s)).collect();
        Ok(PolarGrid { s, r_outer, rho_min, ratio, du, rho_faces, rho_centers, angular, cell_weight, mass_weight, face_weight })
    }

    /// Default layout: ρ_min = 10⁻³R and ratio close to 1.03.
    pub fn default_for(s: f64, r_outer: f64, grid_n: usize) -> Result<Self> {
        let rho_min = 1e-3 * r_outer;
        let n_rho = ((r_outer / rho_min).ln() / 1.03f64.ln()).ceil() as usize;
        Self::new(s, r_outer, rho_min, n_rho, grid_n)
    }

    pub fn n_rho(&self) -> usize {
        self.rho_centers.len()
    }

    pub fn n_alpha(&self) -> usize {
        self.angular.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.angular.centers
    }

    pub fn sample_alpha<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.angular.centers.iter().map(|&a| f(a)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InnerCondition {
    /// Values on the inner arc at the angular cell centres.
    Dirichlet(Vec<f64>),
    /// Each angular mode continues inside ρ < ρ_min as its exact
    /// h-free solution (ρ^{σ⁺} for m = 0, ρ^{-(1-2s)/2} I_ν(mρ) otherwise).
    Transparent,
}

/// Robin data and reconstruction factors for one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndData {
    pub a_eff: (f64, f64),
    /// g_b / g_edge at the two ends.
    pub fac: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub params: Params,
    pub grid: PolarGrid,
    /// Row-major (ρ cell, α cell).
    pub values: Vec<f64>,
    pub boundary_data_source: String,
    /// ‖f - K w‖ / ‖f‖ of the assembled system.
    pub residual_norm: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub inner_face: Vec<f64>,
    pub outer_face: Vec<f64>,
    pub cell_ends: Vec<EndData>,
}

struct Modes {
    vals: Vec<f64>,
    /// Rows are M^{1/2}-scaled eigenvectors x_k, V_jk = x_kj / sqrt(M_j).
    vecs: Vec<Vec<f64>>,
    sqrt_mass: Vec<f64>,
}

impl Modes {
    fn project(&self, r: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = r.iter().zip(&self.sqrt_mass).map(|(v, q)| v / q).collect();
        self.vecs.iter().map(|x| x.iter().zip(&scaled).map(|(a, b)| a * b).sum()).collect()
    }

    fn expand(&self, c: &[f64]) -> Vec<f64> {
        let n = self.sqrt_mass.len();
        let mut out = vec![0.0; n];
        for (x, ck) in self.vecs.iter().zip(c) {
            for j in 0..n {
                out[j] += x[j] * ck;
            }
        }
        out.iter_mut().zip(&self.sqrt_mass).for_each(|(v, q)| *v /= q);
        out
    }
}

struct System<'a> {
    grid: &'a PolarGrid,
    m2: f64,
    base_diag: Vec<f64>,
    base_off: Vec<f64>,
    ends: Vec<EndData>,
    end_coef: Vec<(f64, f64)>,
    modes: Modes,
    /// Condensed inner coefficient per mode (transparent), or None for Dirichlet.
    inner_modal: Option<Vec<f64>>,
    /// σ per mode at ρ_min (transparent only).
    inner_sigma: Vec<f64>,
}

impl<'a> System<'a> {
    fn n(&self) -> (usize, usize) {
        (self.grid.n_rho(), self.grid.n_alpha())
    }

    fn angular_apply(&self, i: usize, v: &[f64], out: &mut [f64]) {
        let na = v.len();
        let a = self.grid.cell_weight[i];
        for j in 0..na {
            let mut acc = self.base_diag[j] * v[j];
            if j > 0 {
                acc += self.base_off[j - 1] * v[j - 1];
            }
            if j + 1 < na {
                acc += self.base_off[j] * v[j + 1];
            }
            out[j] = a * acc;
        }
        out[0] += a * self.end_coef[i].0 * v[0];
        out[na - 1] += a * self.end_coef[i].1 * v[na - 1];
    }

    fn apply(&self, w: &[f64]) -> Vec<f64> {
        let (nr, na) = self.n();
        let g = self.grid;
        let mass = &g.angular.mass;
        let mut y = vec![0.0; nr * na];
        y.par_chunks_mut(na).enumerate().for_each(|(i, yi)| {
            let wi = &w[i * na..(i + 1) * na];
            self.angular_apply(i, wi, yi);
            let mb = self.m2 * g.mass_weight[i];
            for j in 0..na {
                yi[j] += mb * mass[j] * wi[j];
            }
            if i > 0 {
                let c = g.face_weight[i] / g.du;
                for j in 0..na {
                    yi[j] += c * mass[j] * (wi[j] - w[(i - 1) * na + j]);
                }
            }
            if i + 1 < nr {
                let c = g.face_weight[i + 1] / g.du;
                for j in 0..na {
                    yi[j] += c * mass[j] * (wi[j] - w[(i + 1) * na + j]);
                }
            } else {
                let c = 2.0 * g.face_weight[nr] / g.du;
                for j in 0..na {
                    yi[j] += c * mass[j] * wi[j];
                }
            }
            if i == 0 {
                match &self.inner_modal {
                    None => {
                        let c = 2.0 * g.face_weight[0] / g.du;
                        for j in 0..na {
                            yi[j] += c * mass[j] * wi[j];
                        }
                    }
                    Some(b) => {
                        // M V diag(b) Vᵀ M w
                        let mw: Vec<f64> = wi.iter().zip(mass).map(|(a, m)| a * m).collect();
                        let c: Vec<f64> = self.modes.project(&mw).iter().zip(b).map(|(x, bk)| x * bk).collect();
                        let back = self.modes.expand(&c);
                        for j in 0..na {
                            yi[j] += mass[j] * back[j];
                        }
                    }
                }
            }
        });
        y
    }

    /// Exact solve of the h-free operator via per-mode radial tridiagonals.
    fn precondition(&self, r: &[f64]) -> Result<Vec<f64>> {
        let (nr, na) = self.n();
        let g = self.grid;
        let proj: Vec<Vec<f64>> = r.par_chunks(na).map(|ri| self.modes.project(ri)).collect();
        let solved: Vec<Result<Vec<f64>>> = (0..na)
            .into_par_iter()
            .map(|k| {
                let lam = self.modes.vals[k];
                let mut diag = vec![0.0; nr];
                let mut off = vec![0.0; nr - 1];
                for i in 0..nr {
                    diag[i] = g.cell_weight[i] * lam + self.m2 * g.mass_weight[i];
                }
                for i in 0..nr - 1 {
                    let c = g.face_weight[i + 1] / g.du;
                    diag[i] += c;
                    diag[i + 1] += c;
                    off[i] = -c;
                }
                diag[nr - 1] += 2.0 * g.face_weight[nr] / g.du;
                diag[0] += match &self.inner_modal {
                    None => 2.0 * g.face_weight[0] / g.du,
                    Some(b) => b[k],
                };
                let rhs: Vec<f64> = proj.iter().map(|p| p[k]).collect();
                spd_tridiag_solve(&diag, &off, &rhs).ok_or_else(|| {
                    Error::Inadmissible { mu1: lam, bound: -(0.5 - g.s).powi(2) }
                })
            })
            .collect();
        let mut modal = vec![vec![0.0; na]; nr];
        for (k, col) in solved.into_iter().enumerate() {
            let col = col?;
            for i in 0..nr {
                modal[i][k] = col[i];
            }
        }
        Ok(modal.par_iter().flat_map_iter(|c| self.modes.expand(c)).collect())
    }
}

/// Tridiagonal LDLᵀ solve that fails unless every pivot is positive.
fn spd_tridiag_solve(diag: &[f64], off: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut d = vec![0.0; n];
    let mut l = vec![0.0; n];
    d[0] = diag[0];
    if !(d[0] > 0.0) {
        return None;
    }
    for i in 1..n {
        l[i] = off[i - 1] / d[i - 1];
        d[i] = diag[i] - l[i] * off[i - 1];
        if !(d[i] > 0.0) {
            return None;
        }
    }
    let mut x = rhs.to_vec();
    for i in 1..n {
        x[i] -= l[i] * x[i - 1];
    }
    for i in 0..n {
        x[i] /= d[i];
    }
    for i in (0..n - 1).rev() {
        x[i] -= l[i + 1] * x[i + 1];
    }
    Some(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter().zip(b).map(|(x, y)| x * y).sum()
}

fn h_power(params: &Params) -> Option<(f64, f64)> {
    match params.potential.h {
        HKind::Zero => None,
        HKind::Power { c_h, chi } => Some((c_h, chi)),
    }
}

/// Robin data at a single radius (a_± + c_h ρ^χ).
pub fn end_data_at(params: &Params, angular: &IntervalFv, rho: f64) -> Result<EndData> {
    let (am, ap) = params.a_ends();
    let extra = h_power(params).map_or(0.0, |(c, chi)| c * rho.powf(chi));
    end_data(params, angular, (am + extra, ap + extra))
}

fn end_data(params: &Params, angular: &IntervalFv, a_eff: (f64, f64)) -> Result<EndData> {
    let kappa = kappa_s(params.s)?;
    let rl = angular.r_left.unwrap_or(angular.r_right);
    let fl = IntervalFv::robin(kappa, a_eff.0, rl)?.1;
    let fr = IntervalFv::robin(kappa, a_eff.1, angular.r_right)?.1;
    Ok(EndData { a_eff, fac: (fl, fr) })
}

fn validate(params: &Params, grid: &PolarGrid) -> Result<()> {
    if params.n != 1 {
        return Err(Error::Unsupported(format!("the half-disk solver is N = 1 only (got N = {})", params.n)));
    }
    if (params.s - grid.s).abs() > 0.0 {
        return Err(Error::InvalidParams(format!("grid built for s = {}, params have s = {}", grid.s, params.s)));
    }
    Ok(())
}

/// Checks that h is integrable against w² near 0 for the expected exponent γ.
pub fn check_h_integrability(params: &Params, gamma: f64) -> Result<()> {
    if let Some((_, chi)) = h_power(params) {
        let e = 2.0 * gamma - 2.0 * params.s + chi;
        if e <= -1.0 {
            return Err(Error::InvalidParams(format!(
                "h w² is not integrable at 0: 2γ - 2s + χ = {e} ≤ -1"
            )));
        }
    }
    Ok(())
}

fn build_system<'a>(params: &Params, grid: &'a PolarGrid, inner: &InnerCondition) -> Result<System<'a>> {
    let fv = &grid.angular;
    let na = fv.len();
    let nr = grid.n_rho();
    let (base_diag, base_off) = fv.stiffness(0, (0.0, 0.0))?;
    let (am, ap) = params.a_ends();
    let kappa = kappa_s(params.s)?;
    let rl = fv.r_left.unwrap_or(fv.r_right);
    let mut ends = Vec::with_capacity(nr);
    let mut end_coef = Vec::with_capacity(nr);
    for i in 0..nr {
        let extra = match h_power(params) {
            None => 0.0,
            Some((c_h, chi)) => {
                let u0 = grid.rho_faces[i].ln();
                c_h * pow_integral(1.0 - 2.0 * params.s + chi, u0, u0 + grid.du) / grid.cell_weight[i]
            }
        };
        let a_eff = (am + extra, ap + extra);
        ends.push(end_data(params, fv, a_eff)?);
        end_coef.push((IntervalFv::robin(kappa, a_eff.0, rl)?.0, IntervalFv::robin(kappa, a_eff.1, fv.r_right)?.0));
    }
    // h-free angular operator and its modes
    let mut d0 = base_diag.clone();
    d0[0] += IntervalFv::robin(kappa, am, rl)?.0;
    d0[na - 1] += IntervalFv::robin(kappa, ap, fv.r_right)?.0;
    let sqrt_mass: Vec<f64> = fv.mass.iter().map(|m| m.sqrt()).collect();
    let ds: Vec<f64> = d0.iter().zip(&sqrt_mass).map(|(k, q)| k / (q * q)).collect();
    let es: Vec<f64> = base_off.iter().enumerate().map(|(j, k)| k / (sqrt_mass[j] * sqrt_mass[j + 1])).collect();
    let (vals, vecs) = tridiag::full_eigen(&ds, &es)?;
    let modes = Modes { vals, vecs, sqrt_mass };
    let c = 0.5 - params.s;
    let (inner_modal, inner_sigma) = match inner {
        InnerCondition::Dirichlet(v) => {
            if v.len() != na {
                return Err(Error::InvalidParams(format!("inner data has {} values, grid has {na}", v.len())));
            }
            (None, Vec::new())
        }
        InnerCondition::Transparent => {
            let f0 = grid.face_weight[0];
            let r_half = grid.du / (2.0 * f0);
            let rho = grid.rho_min;
            let mut b = Vec::with_capacity(na);
            let mut sig = Vec::with_capacity(na);
            let lam_scale = modes.vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for &lam in &modes.vals {
                let mut disc = c * c + lam;
                // eigenvalue roundoff around a zero threshold
                if disc < 0.0 && disc > -1e-12 * lam_scale {
                    disc = 0.0;
                }
                if disc < 0.0 {
                    return Err(Error::Inadmissible { mu1: lam, bound: -c * c });
                }
                let nu = disc.sqrt();
                let sigma = if params.m == 0.0 {
                    -c + nu
                } else {
                    let x = params.m * rho;
                    -c + nu + x * bessel_i_ratio(nu, x)?
                };
                let beta = f0 * sigma;
                let q = 1.0 + beta * r_half;
                if q <= 0.0 {
                    return Err(Error::GridTooCoarse(format!("inner transparent condition degenerate (σ = {sigma})")));
                }
                b.push(beta / q);
                sig.push(sigma);
            }
            (Some(b), sig)
        }
    };
    Ok(System { grid, m2: params.m * params.m, base_diag, base_off, ends, end_coef, modes, inner_modal, inner_sigma })
}

const PCG_TOL: f64 = 1e-12;
const PCG_MAX_IT: usize = 200;

/// Solves the extended problem with Dirichlet data on the outer arc (values at
/// the angular cell centres) and the given inner condition.
pub fn solve(params: &Params, grid: &PolarGrid, outer: &[f64], inner: InnerCondition, source: &str) -> Result<GridSolution> {
    validate(params, grid)?;
    // with a ≤ 0 and h ≤ 0 the form is manifestly nonnegative
    let (am, ap) = params.a_ends();
    let h_nonpos = h_power(params).map_or(true, |(c_h, _)| c_h <= 0.0);
    if !(am <= 0.0 && ap <= 0.0 && h_nonpos) {
        check_admissible(params, DEFAULT_GRID_N)?;
    }
    let sys = build_system(params, grid, &inner)?;
    let (nr, na) = sys.n();
    if outer.len() != na {
        return Err(Error::InvalidParams(format!("outer data has {} values, grid has {na}", outer.len())));
    }
    let mass = &grid.angular.mass;
    let mut f = vec![0.0; nr * na];
    let co = 2.0 * grid.face_weight[nr] / grid.du;
    for j in 0..na {
        f[(nr - 1) * na + j] += co * mass[j] * outer[j];
    }
    if let InnerCondition::Dirichlet(g) = &inner {
        let ci = 2.0 * grid.face_weight[0] / grid.du;
        for j in 0..na {
            f[j] += ci * mass[j] * g[j];
        }
    }
    let fnorm = dot(&f, &f).sqrt();
    if fnorm == 0.0 {
        return Err(Error::Degenerate("all boundary data vanish".into()));
    }
    let has_h = h_power(params).is_some();
    let mut w = sys.precondition(&f)?;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut r: Vec<f64> = f.iter().zip(sys.apply(&w)).map(|(a, b)| a - b).collect();
    let mut rn = dot(&r, &r).sqrt() / fnorm;
    history.push(rn);
    if has_h && rn > PCG_TOL {
        let mut z = sys.precondition(&r)?;
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while rn > PCG_TOL {
            if iterations >= PCG_MAX_IT {
                return Err(Error::SolverFailure { iterations, history });
            }
            let ap = sys.apply(&p);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::SolverFailure { iterations, history });
            }
            let alpha = rz / pap;
            w.par_iter_mut().zip(&p).for_each(|(x, pi)| *x += alpha * pi);
            r.par_iter_mut().zip(&ap).for_each(|(x, a)| *x -= alpha * a);
            rn = dot(&r, &r).sqrt() / fnorm;
            history.push(rn);
            iterations += 1;
            z = sys.precondition(&r)?;
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.par_iter_mut().zip(&z).for_each(|(x, zi)| *x = zi + beta * *x);
        }
    }
    // true residual of the returned iterate
    let residual_norm = {
        let kw = sys.apply(&w);
        let d: Vec<f64> = f.iter().zip(&kw).map(|(a, b)| a - b).collect();
        dot(&d, &d).sqrt() / fnorm
    };
    if !(residual_norm <= 1e-10) {
        return Err(Error::SolverFailure { iterations, history });
    }
    let inner_face = match &inner {
        InnerCondition::Dirichlet(g) => g.clone(),
        InnerCondition::Transparent => {
            let c0 = sys.modes.project(&w[..na].iter().zip(mass).map(|(a, m)| a * m).collect::<Vec<_>>());
            let r_half = grid.du / (2.0 * grid.face_weight[0]);
            let cf: Vec<f64> = c0
                .iter()
                .zip(&sys.inner_sigma)
                .map(|(c, sig)| c / (1.0 + grid.face_weight[0] * sig * r_half))
                .collect();
            sys.modes.expand(&cf)
        }
    };
    Ok(GridSolution {
        params: *params,
        grid: grid.clone(),
        values: w,
        boundary_data_source: source.to_string(),
        residual_norm,
        iterations,
        residual_history: history,
        inner_face,
        outer_face: outer.to_vec(),
        cell_ends: sys.ends,
    })
}

/// `solve` with the outer data given as a function of α.
pub fn solve_fn<F: Fn(f64) -> f64>(params: &Params, grid: &PolarGrid, outer: F, inner: InnerCondition, source: &str) -> Result<GridSolution> {
    let data = grid.sample_alpha(outer);
    solve(params, grid, &data, inner, source)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyIdentity {
    pub energy: f64,
    pub pairing: f64,
    pub rel_gap: f64,
}

impl GridSolution {
    pub fn row(&self, i: usize) -> &[f64] {
        let na = self.grid.n_alpha();
        &self.values[i * na..(i + 1) * na]
    }

    /// Values on radial face f (0 = inner arc, n_rho = outer arc).
    pub fn face_values(&self, f: usize) -> Vec<f64> {
        let nr = self.grid.n_rho();
        if f == 0 {
            self.inner_face.clone()
        } else if f == nr {
            self.outer_face.clone()
        } else {
            self.row(f - 1).iter().zip(self.row(f)).map(|(a, b)| 0.5 * (a + b)).collect()
        }
    }

    /// ∂_u w on radial face f.
    pub fn face_du(&self, f: usize) -> Vec<f64> {
        let nr = self.grid.n_rho();
        let du = self.grid.du;
        if f == 0 {
            self.row(0).iter().zip(&self.inner_face).map(|(a, b)| 2.0 * (a - b) / du).collect()
        } else if f == nr {
            self.outer_face.iter().zip(self.row(nr - 1)).map(|(a, b)| 2.0 * (a - b) / du).collect()
        } else {
            self.row(f).iter().zip(self.row(f - 1)).map(|(a, b)| (a - b) / du).collect()
        }
    }

    /// Reconstructed values at α = ∓π/2 for a row sampled with given end data.
    pub fn boundary_values(v: &[f64], ends: &EndData) -> (f64, f64) {
        (v[0] * ends.fac.0, v[v.len() - 1] * ends.fac.1)
    }

    /// Discrete ∫cos^{1-2s}α v_α² dα, including the end half cells.
    pub fn angular_gradient_sq(&self, v: &[f64], ends: &EndData) -> f64 {
        let fv = &self.grid.angular;
        let inner: f64 = fv.face.iter().enumerate().map(|(k, c)| c * (v[k + 1] - v[k]).powi(2)).sum();
        let (bl, br) = Self::boundary_values(v, ends);
        let rl = fv.r_left.unwrap_or(fv.r_right);
        let n = v.len();
        inner + (v[0] - bl).powi(2) / rl + (v[n - 1] - br).powi(2) / fv.r_right
    }

    pub fn weighted_sq(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.grid.angular.mass).map(|(a, m)| m * a * a).sum()
    }

    pub fn weighted_dot(&self, v: &[f64], g: &[f64]) -> f64 {
        v.iter().zip(g).zip(&self.grid.angular.mass).map(|((a, b), m)| m * a * b).sum()
    }

    /// Discrete annulus energy (between the inner and outer arcs) and the
    /// boundary flux pairing ∫_{S_R} w ∂_ν w - ∫_{S_ρmin} w ∂_ν w.
    pub fn energy_identity(&self) -> Result<EnergyIdentity> {
        let g = &self.grid;
        let nr = g.n_rho();
        let kappa = kappa_s(self.params.s)?;
        let m2 = self.params.m * self.params.m;
        let mut energy = 0.0;
        for i in 0..nr {
            let row = self.row(i);
            let e = &self.cell_ends[i];
            let (bl, br) = Self::boundary_values(row, e);
            let ang = self.angular_gradient_sq(row, e) - kappa * (e.a_eff.0 * bl * bl + e.a_eff.1 * br * br);
            energy += g.cell_weight[i] * ang + m2 * g.mass_weight[i] * self.weighted_sq(row);
        }
        for f in 0..=nr {
            let d = self.face_du(f);
            let half = if f == 0 || f == nr { 0.5 } else { 1.0 };
            energy += half * g.face_weight[f] * g.du * self.weighted_sq(&d);
        }
        let outer = g.face_weight[nr] * self.weighted_dot(&self.outer_face, &self.face_du(nr));
        let inner = g.face_weight[0] * self.weighted_dot(&self.inner_face, &self.face_du(0));
        let pairing = outer - inner;
        let scale = energy.abs().max(outer.abs()).max(inner.abs());
        Ok(EnergyIdentity { energy, pairing, rel_gap: (energy - pairing).abs() / scale })
    }

    /// Mean of the 2×2 children of each cell of a grid refined once in both
    /// directions, or None if `fine` is not such a refinement.
    pub fn restrict(fine: &GridSolution, coarse_shape: (usize, usize)) -> Option<Vec<f64>> {
        let (nr, na) = coarse_shape;
        let (fr, fa) = (fine.grid.n_rho(), fine.grid.n_alpha());
        if fr != 2 * nr || fa != 2 * na {
            return None;
        }
        let mut out = vec![0.0; nr * na];
        for i in 0..nr {
            for j in 0..na {
                let mut acc = 0.0;
                for (di, dj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    acc += fine.values[(2 * i + di) * fa + 2 * j + dj];
                }
                out[i * na + j] = 0.25 * acc;
            }
        }
        Some(out)
    }

    /// Rows (rho, alpha, w) for CSV export.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        let na = self.grid.n_alpha();
        let mut out = Vec::with_capacity(self.values.len());
        for (i, r) in self.grid.rho_centers.iter().enumerate() {
            for (j, a) in self.grid.alpha().iter().enumerate() {
                out.push((*r, *a, self.values[i * na + j]));
            }
        }
        out
    }
}

/// Max relative cell error of a grid solve whose inner and outer arcs carry
/// the values of a separable solution.
pub fn oracle_error(sep: &SeparableSolution, grid: &PolarGrid) -> Result<(GridSolution, f64)> {
    let params = sep.params;
    let prof = &sep.eigenpair.profile;
    let psi = grid.sample_alpha(|a| prof.interpolate(a));
    let scaled = |r: f64| -> Result<Vec<f64>> {
        let phi = sep.phi(r)?;
        Ok(psi.iter().map(|g| phi * g).collect())
    };
    let outer = scaled(grid.r_outer)?;
    let inner = InnerCondition::Dirichlet(scaled(grid.rho_min)?);
    let sol = solve(&params, grid, &outer, inner, "separable oracle")?;
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for (i, r) in grid.rho_centers.iter().enumerate() {
        let phi = sep.phi(*r)?;
        for (w, g) in sol.row(i).iter().zip(&psi) {
            err = err.max((w - phi * g).abs());
            scale = scale.max((phi * g).abs());
        }
    }
    Ok((sol, err / scale))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefineScenario {
    /// r^{σ⁺}ψ with N = 1, s = 1/4, a = (0.1, 0.05), m = 0.
    PowerOracle,
    /// r^{-(1-2s)/2} I_ν(r) ψ with the same a and m = 1.
    BesselOracle,
    /// Random smooth outer data, transparent inner arc, h ≠ 0.
    RandomData(u64),
}

impl RefineScenario {
    pub fn name(&self) -> String {
        match self {
            RefineScenario::PowerOracle => "power_oracle".into(),
            RefineScenario::BesselOracle => "bessel_oracle".into(),
            RefineScenario::RandomData(seed) => format!("random_data_{seed}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub scenario: String,
    /// (n_rho, n_alpha) per level.
    pub levels: Vec<(usize, usize)>,
    /// Oracle errors per level, or relative Cauchy differences between
    /// consecutive levels for data without an oracle.
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
    pub observed_order: f64,
    pub monotone: bool,
}

/// Ground separable solution of the refinement scenarios, with its profile
/// computed on `profile_grid_n` angular cells per quarter circle.
pub fn oracle_separable(m: f64, profile_grid_n: usize) -> Result<SeparableSolution> {
    let tp = PotentialSpec { a: AKind::TwoPoint { minus: 0.1, plus: 0.05 }, h: HKind::Zero };
    let params = Params::new(1, 0.25, m, tp)?;
    let ep = solve_sector(&params, 0, 1, profile_grid_n)?.remove(0);
    let kind = if m == 0.0 { RadialKind::Power } else { RadialKind::ModifiedBessel { m } };
    make_separable(&params, &ep, kind, 1.0)
}

/// Solves on three nested grids (each level doubles both directions).
pub fn refine_study(scenario: RefineScenario) -> Result<ConvergenceTable> {
    let base = [(64usize, 64usize), (128, 128), (256, 256)];
    let levels: Vec<(usize, usize)> = base.iter().map(|&(r, a)| (r, 2 * a)).collect();
    let (rho_min, r_outer) = (1e-2, 1.0);
    let errors: Vec<f64> = match scenario {
        RefineScenario::PowerOracle | RefineScenario::BesselOracle => {
            let m = if scenario == RefineScenario::PowerOracle { 0.0 } else { 1.0 };
            base.par_iter()
                .map(|&(nr, gn)| {
                    // an odd refinement factor puts fine centres on the level's centres
                    let sep = oracle_separable(m, 9 * gn)?;
                    let grid = PolarGrid::new(0.25, r_outer, rho_min, nr, gn)?;
                    Ok(oracle_error(&sep, &grid)?.1)
                })
                .collect::<Result<_>>()?
        }
        RefineScenario::RandomData(seed) => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let modes: Vec<(f64, f64)> = (0..4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU))).collect();
            let data = move |a: f64| -> f64 {
                1.0 + modes.iter().enumerate().map(|(k, (c, ph))| c * ((k + 1) as f64 * a + ph).cos() / ((k + 1) * (k + 1)) as f64).sum::<f64>()
            };
            let tp = PotentialSpec { a: AKind::TwoPoint { minus: 0.05, plus: 0.1 }, h: HKind::Power { c_h: 0.1, chi: 0.5 } };
            let params = Params::new(1, 0.25, 0.5, tp)?;
            let sols: Vec<GridSolution> = base
                .par_iter()
                .map(|&(nr, gn)| {
                    let grid = PolarGrid::new(0.25, r_outer, rho_min, nr, gn)?;
                    solve_fn(&params, &grid, &data, InnerCondition::Transparent, "random")
                })
                .collect::<Result<_>>()?;
            let mut out = Vec::new();
            for l in 0..2 {
                let coarse = &sols[l];
                let shape = (coarse.grid.n_rho(), coarse.grid.n_alpha());
                let r = GridSolution::restrict(&sols[l + 1], shape).ok_or_else(|| Error::GridTooCoarse("levels are not nested".into()))?;
                let mut num = 0.0;
                let mut den = 0.0;
                for i in 0..shape.0 {
                    let w = coarse.grid.mass_weight[i];
                    let row = coarse.row(i);
                    let diff: Vec<f64> = row.iter().zip(&r[i * shape.1..(i + 1) * shape.1]).map(|(a, b)| a - b).collect();
                    num += w * coarse.weighted_sq(&diff);
                    den += w * coarse.weighted_sq(row);
                }
                out.push((num / den).sqrt());
            }
            out
        }
    };
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let observed_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    Ok(ConvergenceTable { scenario: scenario.name(), levels, errors, orders, observed_order, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(s: f64, m: f64, a: (f64, f64), h: Option<(f64, f64)>) -> Params {
        let h = match h {
            None => HKind::Zero,
            Some((c_h, chi)) => HKind::Power { c_h, chi },
        };
        Params::new(1, s, m, PotentialSpec { a: AKind::TwoPoint { minus: a.0, plus: a.1 }, h }).unwrap()
    }

    #[test]
    fn grid_weights_are_exact_integrals() {
        let g = PolarGrid::new(0.25, 1.0, 1e-3, 80, 32).unwrap();
        let total: f64 = g.cell_weight.iter().sum();
        // ∫ρ^{1-2s} du = ∫ρ^{-2s} dρ
        let exact = (1.0 - 1e-3f64.powf(0.5)) / 0.5;
        assert!((total - exact).abs() < 1e-13);
        assert!(g.ratio > 1.0 && g.ratio <= 1.1);
        assert!(PolarGrid::new(0.25, 1.0, 1e-3, 8, 32).is_err());
    }

    #[test]
    fn constant_data_gives_constant_solution() {
        // a = 0, h = 0, m = 0: w ≡ 1 solves the problem exactly
        let p = params(0.5, 0.0, (0.0, 0.0), None);
        let g = PolarGrid::new(0.5, 1.0, 1e-2, 64, 16).unwrap();
        let sol = solve_fn(&p, &g, |_| 1.0, InnerCondition::Dirichlet(vec![1.0; 32]), "const").unwrap();
        assert!(sol.values.iter().all(|v| (v - 1.0).abs() < 1e-11));
        let sol = solve_fn(&p, &g, |_| 1.0, InnerCondition::Transparent, "const").unwrap();
        assert!(sol.values.iter().all(|v| (v - 1.0).abs() < 1e-11));
    }

    #[test]
    fn energy_identity_with_h() {
        let p = params(0.25, 0.5, (0.1, 0.05), Some((0.1, 0.5)));
        let g = PolarGrid::new(0.25, 1.0, 1e-3, 96, 32).unwrap();
        let sol = solve_fn(&p, &g, |a| 1.0 + 0.3 * a.sin(), InnerCondition::Transparent, "smooth").unwrap();
        assert!(sol.iterations > 0 && sol.residual_norm <= 1e-10);
        let e = sol.energy_identity().unwrap();
        assert!(e.rel_gap < 1e-8, "{e:?}");
    }

    #[test]
    fn maximum_principle_probe() {
        let p = params(0.25, 1.0, (-0.2, -0.05), Some((-0.1, 0.5)));
        let g = PolarGrid::new(0.25, 1.0, 1e-3, 80, 32).unwrap();
        let outer = g.sample_alpha(|a| (3.0 * a).cos().max(0.0));
        let inner = InnerCondition::Dirichlet(g.sample_alpha(|a| 0.5 * (1.0 + a.sin())));
        let sol = solve(&p, &g, &outer, inner, "nonneg").unwrap();
        let min = sol.values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-10, "{min}");
    }

    #[test]
    fn rejects_inadmissible_and_wrong_dimension() {
        let p = params(0.5, 0.0, (0.1, 0.1), None);
        let g = PolarGrid::new(0.5, 1.0, 1e-2, 64, 16).unwrap();
        assert!(matches!(solve_fn(&p, &g, |_| 1.0, InnerCondition::Transparent, ""), Err(Error::Inadmissible { .. })));
        let p2 = Params::simple(2, 0.5, 0.0, 0.0).unwrap();
        let g2 = PolarGrid::new(0.5, 1.0, 1e-2, 64, 16).unwrap();
        assert!(matches!(solve_fn(&p2, &g2, |_| 1.0, InnerCondition::Transparent, ""), Err(Error::Unsupported(_))));
    }

    #[test]
    fn oracle_gate_power_and_bessel() {
        let grid = PolarGrid::new(0.25, 1.0, 1e-3, 256, 128).unwrap();
        let (_, e) = oracle_error(&oracle_separable(0.0, DEFAULT_GRID_N).unwrap(), &grid).unwrap();
        assert!(e <= 5e-3, "power oracle error {e}");
        let (_, e) = oracle_error(&oracle_separable(1.0, DEFAULT_GRID_N).unwrap(), &grid).unwrap();
        assert!(e <= 1e-2, "bessel oracle error {e}");
    }

    #[test]
    fn refinement_orders() {
        for sc in [RefineScenario::PowerOracle, RefineScenario::BesselOracle] {
            let t = refine_study(sc).unwrap();
            assert!(t.observed_order >= 1.5 && t.monotone, "{t:?}");
        }
        let t = refine_study(RefineScenario::RandomData(7)).unwrap();
        assert!(t.monotone, "{t:?}");
    }

    #[test]
    fn h_response_is_linear() {
        let g = PolarGrid::new(0.25, 1.0, 1e-3, 96, 32).unwrap();
        let run = |c_h: f64| {
            let h = if c_h == 0.0 { None } else { Some((c_h, 0.5)) };
            solve_fn(&params(0.25, 0.0, (0.1, 0.05), h), &g, |a| 1.0 + 0.2 * a, InnerCondition::Transparent, "").unwrap()
        };
        let base = run(0.0);
        let diffs: Vec<f64> = [0.05, 0.1, 0.2]
            .iter()
            .map(|&c| run(c).values.iter().zip(&base.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .collect();
        // diff / c_h is the linear response; the O(c_h²) part stays below 20%
        let slopes: Vec<f64> = diffs.iter().zip([0.05, 0.1, 0.2]).map(|(d, c)| d / c).collect();
        let (lo, hi) = (slopes.iter().cloned().fold(f64::INFINITY, f64::min), slopes.iter().cloned().fold(0.0, f64::max));
        assert!(lo > 0.0 && hi / lo < 1.2, "{slopes:?}");
    }
}
