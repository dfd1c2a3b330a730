//! Gamma and modified Bessel functions, the extension profile ϑ and the
//! explicit constants κ_s, Λ_{N,s}, c_{N,s}, C'_{N,s}.

use crate::error::{domain, Error, Result};
use crate::quad;
use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

// Taylor coefficients of 1/Γ(1+x) about 0.
const RGAMMA1_TAYLOR: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_9,
    -0.042_002_635_034_095_24,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_34,
    -0.009_621_971_527_876_974,
    0.007_218_943_246_663_1,
    -0.001_165_167_591_859_065,
    -0.000_215_241_674_114_951,
    0.000_128_050_282_388_116_2,
    -0.000_020_134_854_780_788_24,
    -0.000_001_250_493_482_142_671,
    0.000_001_133_027_231_981_696,
    -2.056_338_416_977_607e-7,
    6.116_095_104_481_416e-9,
    5.002_007_644_469_223e-9,
    -1.181_274_570_487_02e-9,
    1.043_426_711_691_100_5e-10,
    7.782_263_439_905_071e-12,
    -3.696_805_618_642_206e-12,
    5.100_370_287_454_476e-13,
    -2.058_326_053_566_507e-14,
    -5.348_122_539_423_018e-15,
    1.226_778_628_238_260_8e-15,
    -1.181_259_301_697_458_8e-16,
];

fn lanczos_sum(z: f64) -> f64 {
    let mut sum = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    sum
}

/// Γ(x) for real x, with reflection below 1/2.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(domain("gamma", "NaN argument"));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(domain("gamma", format!("pole at {x}")));
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        return Ok(PI / (s * gamma(1.0 - x)?));
    }
    if x > 171.7 {
        return Err(Error::Overflow { func: "gamma", detail: format!("x = {x}") });
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let p = t.powf(0.5 * (z + 0.5));
    Ok((2.0 * PI).sqrt() * p * (p * (-t).exp()) * lanczos_sum(z))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("ln_gamma", format!("x = {x} must be positive")));
    }
    if x < 0.5 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// ln Γ(z) for complex z off the non-positive integers (principal branch of
/// the Lanczos form; only the real part is branch-independent).
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return Err(domain("ln_gamma_complex", format!("pole at {z}")));
    }
    if z.im < 0.0 {
        return Ok(ln_gamma_complex(z.conj())?.conj());
    }
    if z.re < 0.5 {
        // ln sin(πz) with the e^{π Im z} growth factored out
        let i = Complex64::new(0.0, 1.0);
        let ln_sin = -i * PI * z + ((2.0 * i * PI * z).exp() - 1.0).ln() - (2.0 * i).ln();
        return Ok(Complex64::new(PI.ln(), 0.0) - ln_sin - ln_gamma_complex(Complex64::new(1.0, 0.0) - z)?);
    }
    let zz = z - 1.0;
    let t = zz + LANCZOS_G + 0.5;
    let mut sum = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (zz + k as f64);
    }
    Ok(0.5 * (2.0 * PI).ln() + (zz + 0.5) * t.ln() - t + sum.ln())
}

/// |Γ(z)|².
pub fn abs_gamma_sq(z: Complex64) -> Result<f64> {
    Ok((2.0 * ln_gamma_complex(z)?.re).exp())
}

/// 1/Γ(x); zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    match gamma(x) {
        Ok(g) => 1.0 / g,
        Err(_) => 0.0,
    }
}

/// Returns (1/Γ(1+μ), 1/Γ(1-μ), gam1, gam2) for |μ| ≤ 1/2, where
/// gam1 = (1/Γ(1-μ) - 1/Γ(1+μ))/(2μ) and gam2 = (1/Γ(1-μ) + 1/Γ(1+μ))/2.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mut even = 0.0;
    let mut odd_over_mu = 0.0;
    let mu2 = mu * mu;
    let mut pw = 1.0;
    for k in (0..RGAMMA1_TAYLOR.len()).step_by(2) {
        even += RGAMMA1_TAYLOR[k] * pw;
        if k + 1 < RGAMMA1_TAYLOR.len() {
            odd_over_mu += RGAMMA1_TAYLOR[k + 1] * pw;
        }
        pw *= mu2;
    }
    let gampl = even + mu * odd_over_mu;
    let gammi = even - mu * odd_over_mu;
    (gampl, gammi, -odd_over_mu, even)
}

/// The pair (K_ν(x), K_{ν+1}(x)) for real ν ≥ 0 and x > 0.
///
/// Temme's series for x < 2 and Steed's continued fraction otherwise, both at a
/// reduced order |μ| ≤ 1/2, followed by forward recurrence.
pub fn bessel_k_pair(nu: f64, x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("bessel_k", format!("x = {x} must be positive")));
    }
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(domain("bessel_k", format!("nu = {nu} must be non-negative")));
    }
    const EPS: f64 = 1e-17;
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let (mut rkmu, mut rk1);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < 1e-15 { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < 1e-15 { 1.0 } else { e.sinh() / e };
        let (gampl, gammi, gam1, gam2) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..500 {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence { what: "bessel_k series", detail: format!("nu={nu}, x={x}") });
        }
        rkmu = sum;
        rk1 = sum1 * xi2;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 2..10_000 {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence { what: "bessel_k continued fraction", detail: format!("nu={nu}, x={x}") });
        }
        h *= a1;
        rkmu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        rk1 = rkmu * (mu + x + 0.5 - h) * xi;
    }
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = next;
    }
    if !rkmu.is_finite() || !rk1.is_finite() {
        return Err(Error::Overflow { func: "bessel_k", detail: format!("nu={nu}, x={x}") });
    }
    Ok((rkmu, rk1))
}

/// K_ν(x); even in ν.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    bessel_k_pair(nu.abs(), x).map(|p| p.0)
}

/// dK_ν/dx = (ν/x) K_ν - K_{ν+1}.
pub fn bessel_k_deriv(nu: f64, x: f64) -> Result<f64> {
    let (k, k1) = bessel_k_pair(nu, x)?;
    Ok(nu / x * k - k1)
}

/// I_ν(x) for ν ≥ 0 and x ≥ 0, by its ascending series (all terms positive).
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(domain("bessel_i", format!("nu = {nu} must be non-negative")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain("bessel_i", format!("x = {x} must be non-negative")));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    let half = 0.5 * x;
    let log_t0 = nu * half.ln() - ln_gamma(nu + 1.0)?;
    // scale to keep terms representable, then undo at the end
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        term *= q / ((k + 1.0) * (k + nu + 1.0));
        sum += term;
        k += 1.0;
        if term < sum * 1e-17 && k > half {
            break;
        }
        if k > 1e6 {
            return Err(Error::NoConvergence { what: "bessel_i series", detail: format!("nu={nu}, x={x}") });
        }
    }
    let v = (log_t0 + sum.ln()).exp();
    if !v.is_finite() || !sum.is_finite() {
        return Err(Error::Overflow { func: "bessel_i", detail: format!("nu={nu}, x={x}") });
    }
    Ok(v)
}

/// I_{ν+1}(x)/I_ν(x) by its continued fraction (modified Lentz), which
/// stays finite where I_ν itself underflows.
pub fn bessel_i_ratio(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= 0.0) || !(x >= 0.0) || !x.is_finite() {
        return Err(domain("bessel_i_ratio", format!("nu = {nu}, x = {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // I_{ν+1}/I_ν = 1/(2(ν+1)/x + 1/(2(ν+2)/x + ...))
    let tiny = 1e-300;
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..100_000 {
        let b = 2.0 * (nu + k as f64) / x;
        d = b + d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + 1.0 / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(f);
        }
    }
    Err(Error::NoConvergence { what: "bessel_i_ratio", detail: format!("nu={nu}, x={x}") })
}

/// dI_ν/dx = I_{ν+1} + (ν/x) I_ν.
pub fn bessel_i_deriv(nu: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(if nu == 1.0 { 0.5 } else if nu == 0.0 || nu > 1.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(bessel_i(nu + 1.0, x)? + nu / x * bessel_i(nu, x)?)
}

fn check_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParams(format!("order s = {s} must lie in (0, 1)")));
    }
    Ok(())
}

/// ϑ(r) = (2/Γ(s)) (r/2)^s K_s(r), with ϑ(0) = 1.
pub fn theta_profile(s: f64, r: f64) -> Result<f64> {
    check_order(s)?;
    if r < 0.0 {
        return Err(domain("theta_profile", format!("r = {r} is negative")));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    Ok(2.0 / gamma(s)? * (0.5 * r).powf(s) * bessel_k(s, r)?)
}

/// ϑ'(r) = -(2/Γ(s)) (r/2)^s K_{1-s}(r).
pub fn theta_deriv(s: f64, r: f64) -> Result<f64> {
    check_order(s)?;
    if !(r > 0.0) {
        return Err(domain("theta_deriv", format!("r = {r} must be positive")));
    }
    Ok(-2.0 / gamma(s)? * (0.5 * r).powf(s) * bessel_k(1.0 - s, r)?)
}

/// -r^{1-2s} ϑ'(r), which tends to κ_s as r → 0.
pub fn theta_flux(s: f64, r: f64) -> Result<f64> {
    check_order(s)?;
    if r == 0.0 {
        return kappa_s(s);
    }
    Ok(2f64.powf(1.0 - s) / gamma(s)? * r.powf(1.0 - s) * bessel_k(1.0 - s, r)?)
}

/// κ_s = 2^{1-2s} Γ(1-s)/Γ(s).
pub fn kappa_s(s: f64) -> Result<f64> {
    check_order(s)?;
    Ok(2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s)? / gamma(s)?)
}

/// The same number written as Γ(1-s)/(2^{2s-1} Γ(s)).
pub fn kappa_s_alt(s: f64) -> Result<f64> {
    check_order(s)?;
    Ok(gamma(1.0 - s)? / (2f64.powf(2.0 * s - 1.0) * gamma(s)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaRoutes {
    pub integral: f64,
    pub limit: f64,
    pub closed_form: f64,
}

impl KappaRoutes {
    pub fn max_rel_gap(&self) -> f64 {
        let a = (self.integral - self.closed_form).abs();
        let b = (self.limit - self.closed_form).abs();
        a.max(b) / self.closed_form
    }
}

/// κ_s from the profile ODE, two ways: the energy ∫ t^{1-2s}(ϑ'² + ϑ²) dt
/// and the extrapolated flux -lim t^{1-2s} ϑ'(t).
pub fn kappa_from_ode(s: f64) -> Result<KappaRoutes> {
    check_order(s)?;
    let closed_form = kappa_s(s)?;
    let energy = |t: f64| -> f64 {
        let f = theta_flux(s, t).unwrap_or(f64::NAN);
        let th = theta_profile(s, t).unwrap_or(f64::NAN);
        // t^{1-2s}ϑ'^2 = f^2 t^{2s-1}
        f * f * t.powf(2.0 * s - 1.0) + th * th * t.powf(1.0 - 2.0 * s)
    };
    let u_lo = -60.0;
    let t0 = f64::exp(u_lo);
    // below t0 the integrand is κ² t^{2s-1} + t^{1-2s} to leading order
    let tail = closed_form * closed_form * t0.powf(2.0 * s) / (2.0 * s) + t0.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    let coarse = quad::log_trapezoid(energy, u_lo, 4.5, 1.0 / 16.0) + tail;
    let fine = quad::log_trapezoid(energy, u_lo, 4.5, 1.0 / 32.0) + tail;
    if !fine.is_finite() || (fine - coarse).abs() > 1e-9 * fine.abs() {
        return Err(Error::NoConvergence {
            what: "kappa energy integral",
            detail: format!("h=1/16 gives {coarse}, h=1/32 gives {fine}"),
        });
    }
    // flux ≈ c0 + c1 t^{2-2s} + c2 t^2
    let ts: Vec<f64> = (0..8).map(|j| 1e-2 * 0.5f64.powi(j)).collect();
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &t in &ts {
        let row = [1.0, t.powf(2.0 - 2.0 * s), t * t];
        let y = theta_flux(s, t)?;
        for i in 0..3 {
            atb[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let coef = solve3(ata, atb).ok_or_else(|| Error::NoConvergence {
        what: "kappa limit fit",
        detail: "singular normal equations".into(),
    })?;
    Ok(KappaRoutes { integral: fine, limit: coef[0], closed_form })
}

pub(crate) fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col] == 0.0 {
            return None;
        }
        m.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Λ_{N,s} = 2^{2s} Γ²((N+2s)/4) / Γ²((N-2s)/4), defined for N > 2s.
pub fn herbst_lambda(n: usize, s: f64) -> Result<f64> {
    check_order(s)?;
    let nf = n as f64;
    if nf <= 2.0 * s {
        return Err(Error::InvalidParams(format!("Hardy constant needs N > 2s (N={n}, s={s})")));
    }
    let r = gamma((nf + 2.0 * s) / 4.0)? / gamma((nf - 2.0 * s) / 4.0)?;
    Ok(4f64.powf(s) * r * r)
}

/// Normalizing constant of the Bessel-kernel representation of (-Δ+m²)^s.
pub fn c_ns(n: usize, s: f64) -> Result<f64> {
    check_order(s)?;
    let nf = n as f64;
    Ok(2f64.powf(1.0 - (nf + 2.0 * s) / 2.0) * PI.powf(-nf / 2.0) * 4f64.powf(s) * s * (1.0 - s) / gamma(2.0 - s)?)
}

/// |S^{N-1}| = 2π^{N/2}/Γ(N/2).
pub fn sphere_area(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * PI.powf(nf / 2.0) / gamma(nf / 2.0).expect("N >= 1")
}

/// C'_{N,s} fixed by ∫ P_1(1, x) dx = ϑ(1), via radial quadrature.
pub fn cprime_by_normalization(n: usize, s: f64) -> Result<f64> {
    check_order(s)?;
    if n == 0 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    let nu = (n as f64 + 2.0 * s) / 2.0;
    let radial = quad::exp_sinh(
        |rho| {
            let z = rho.hypot(1.0);
            if z > 750.0 {
                return 0.0;
            }
            rho.powi(n as i32 - 1) * z.powf(-nu) * bessel_k(nu, z).unwrap_or(f64::NAN)
        },
        0.0,
        1e-14,
    )?;
    Ok(theta_profile(s, 1.0)? / (sphere_area(n) * radial))
}

/// Closed form 2^{1-ν}/(π^{N/2} Γ(s)), ν = (N+2s)/2; used as a cross-check.
pub fn cprime_closed_form(n: usize, s: f64) -> Result<f64> {
    check_order(s)?;
    let nf = n as f64;
    let nu = (nf + 2.0 * s) / 2.0;
    Ok(2f64.powf(1.0 - nu) / (PI.powf(nf / 2.0) * gamma(s)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub n: usize,
    pub s: f64,
    pub kappa_s: f64,
    /// Herbst constant; `None` when N ≤ 2s.
    pub lambda_ns: Option<f64>,
    pub c_ns: f64,
    pub cprime_ns: f64,
    pub n_s: f64,
}

impl Constants {
    pub fn new(n: usize, s: f64) -> Result<Self> {
        check_order(s)?;
        if n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        Ok(Constants {
            n,
            s,
            kappa_s: kappa_s(s)?,
            lambda_ns: herbst_lambda(n, s).ok(),
            c_ns: c_ns(n, s)?,
            cprime_ns: cprime_by_normalization(n, s)?,
            n_s: n as f64 + 2.0 - 2.0 * s,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gamma_values() {
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma(4.5).unwrap(), 11.631_728_396_567_448) < 1e-13);
        assert!(rel(gamma(0.05).unwrap(), 19.470_085_311_255_51) < 1e-12);
        assert!(rel(gamma(50.0).unwrap(), 6.082_818_640_342_675e62) < 1e-12);
        assert!(rel(gamma(-0.5).unwrap(), -2.0 * PI.sqrt()) < 1e-13);
        assert!(gamma(0.0).is_err());
        assert!(gamma(-3.0).is_err());
        assert!(rel(ln_gamma(30.5).unwrap(), gamma(30.5).unwrap().ln()) < 1e-14);
    }

    #[test]
    fn i_ratio_matches_series_and_survives_underflow() {
        for &(nu, x) in &[(0.0, 0.5), (0.7, 3.0), (2.5, 0.01)] {
            let r = bessel_i(nu + 1.0, x).unwrap() / bessel_i(nu, x).unwrap();
            assert!((bessel_i_ratio(nu, x).unwrap() - r).abs() < 1e-14 * r);
        }
        // small-x limit x/(2(ν+1))
        let r = bessel_i_ratio(400.0, 1e-3).unwrap();
        assert!((r / (1e-3 / 802.0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn complex_gamma() {
        // |Γ(iy)|² = π/(y sinh πy), |Γ(1/2+iy)|² = π/cosh πy
        for &y in &[0.3, 1.0, 4.0] {
            let a = abs_gamma_sq(Complex64::new(0.0, y)).unwrap();
            assert!(rel(a, PI / (y * (PI * y).sinh())) < 1e-13);
            let b = abs_gamma_sq(Complex64::new(0.5, y)).unwrap();
            assert!(rel(b, PI / (PI * y).cosh()) < 1e-13);
        }
        let big = abs_gamma_sq(Complex64::new(0.25, 100.0)).unwrap();
        let asym = 2.0 * PI * 100f64.powf(-0.5) * (-PI * 100.0).exp();
        assert!(rel(big, asym) < 1e-3);
        let g = ln_gamma_complex(Complex64::new(4.5, 0.0)).unwrap();
        assert!(rel(g.re, gamma(4.5).unwrap().ln()) < 1e-14);
    }

    #[test]
    fn temme_gammas_match_reflection() {
        for &mu in &[-0.5, -0.3, 0.1, 0.25, 0.5] {
            let (gp, gm, g1, g2) = temme_gammas(mu);
            assert!(rel(gp, 1.0 / gamma(1.0 + mu).unwrap()) < 1e-15);
            assert!(rel(gm, 1.0 / gamma(1.0 - mu).unwrap()) < 1e-15);
            assert!((g1 - (gm - gp) / (2.0 * mu)).abs() < 1e-14);
            assert!((g2 - 0.5 * (gm + gp)).abs() < 1e-15);
        }
    }

    #[test]
    fn bessel_k_closed_form_half_order() {
        for &x in &[0.01, 0.5, 1.0, 1.99, 2.0, 5.0, 30.0] {
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(bessel_k(0.5, x).unwrap(), exact) < 1e-13, "x={x}");
            assert!(rel(bessel_k(1.5, x).unwrap(), exact * (1.0 + 1.0 / x)) < 1e-13);
        }
        assert!(rel(bessel_k(0.5, 1.0).unwrap(), 0.461_068_504_447_894_4) < 1e-12);
    }

    #[test]
    fn bessel_k_integer_orders() {
        // reference values from an arbitrary-precision evaluation
        assert!(rel(bessel_k(0.0, 1.0).unwrap(), 0.421_024_438_240_708_3) < 1e-13);
        assert!(rel(bessel_k(1.0, 1.0).unwrap(), 0.601_907_230_197_234_6) < 1e-13);
        assert!(rel(bessel_k(1.0, 3.0).unwrap(), 0.040_156_431_128_194_18) < 1e-13);
        assert!(rel(bessel_k(2.0, 0.1).unwrap(), 199.503_964_642_114_1) < 1e-13);
    }

    #[test]
    fn bessel_k_errors() {
        assert!(bessel_k(0.5, 0.0).is_err());
        assert!(bessel_k(0.5, -1.0).is_err());
        assert!(matches!(bessel_k_pair(200.0, 1e-3), Err(Error::Overflow { .. })));
    }

    #[test]
    fn bessel_i_values() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert!(rel(bessel_i(0.5, 1.0).unwrap(), (2.0 / PI).sqrt() * 1f64.sinh()) < 1e-14);
        assert!(rel(bessel_i(0.5, 1.0).unwrap(), 0.937_674_888_245_488_2) < 1e-12);
        let x = 40.0;
        assert!(rel(bessel_i(0.5, x).unwrap(), (2.0 / (PI * x)).sqrt() * x.sinh()) < 1e-13);
        assert!(bessel_i(0.5, 800.0).is_err());
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta_profile(0.5, 0.0).unwrap(), 1.0);
        assert!(rel(theta_profile(0.5, 1.0).unwrap(), (-1f64).exp()) < 1e-13);
        assert!(rel(theta_flux(0.25, 1e-9).unwrap(), 0.477_988_797_486_125) < 1e-6);
    }

    #[test]
    fn kappa_routes() {
        assert!((kappa_s(0.5).unwrap() - 1.0).abs() < 1e-14);
        for &(s, k) in &[(0.25, 0.477_988_797_486_125), (0.75, 2.092_099_240_106_203)] {
            let r = kappa_from_ode(s).unwrap();
            assert!(rel(r.closed_form, k) < 1e-13);
            assert!(r.max_rel_gap() < 1e-6, "{r:?}");
            assert!(rel(kappa_s_alt(s).unwrap(), r.closed_form) < 1e-14);
        }
    }

    #[test]
    fn constants_match_known_values() {
        assert!(rel(herbst_lambda(3, 0.5).unwrap(), 2.0 / PI) < 1e-13);
        assert!(herbst_lambda(1, 0.5).is_err());
        assert!(rel(c_ns(1, 0.5).unwrap(), 1.0 / PI) < 1e-14);
        for n in 1..=3 {
            for &s in &[0.25, 0.5, 0.75] {
                let q = cprime_by_normalization(n, s).unwrap();
                assert!(rel(q, cprime_closed_form(n, s).unwrap()) < 1e-10, "N={n}, s={s}");
            }
        }
        let c = Constants::new(2, 0.5).unwrap();
        assert!((c.n_s - 3.0).abs() < 1e-15);
    }
}
