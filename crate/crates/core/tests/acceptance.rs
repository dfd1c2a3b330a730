// Acceptance checks, one line per criterion. Run with
// `cargo test -p fracrel --test acceptance`; exits nonzero if any check fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use fracrel::angular::{mu1, sharp_constant_root, solve_sector};
use fracrel::diagnostics::{
    beta_coefficients, check_hprime, frequency_trace, gamma_extract, halfdisk_pipeline, hardy_boundary_check,
    make_separable, pohozaev_residual, HardyTestFunction, PipelineConfig, RadialKind, Solution,
};
use fracrel::extension::kernel::normalization_check;
use fracrel::extension::{dirichlet_form_identity, verify_trace, SpectralField};
use fracrel::halfdisk::{solve_fn, InnerCondition, PolarGrid};
use fracrel::hardy::{near_optimizer_ratio, randomized_margins};
use fracrel::specfun::{herbst_lambda, kappa_from_ode, kappa_s};
use fracrel::{AKind, HKind, Params, PotentialSpec, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn decades(hi_exp: f64, lo_exp: f64, per_decade: usize) -> Vec<f64> {
    let n = ((hi_exp - lo_exp) * per_decade as f64).round() as usize;
    (0..=n).map(|j| 10f64.powf(hi_exp - j as f64 / per_decade as f64)).collect()
}

fn gaussian(grid_n: usize) -> Result<SpectralField> {
    SpectralField::from_fn(1, 40.0, grid_n, |x| (-0.5 * x[0] * x[0]).exp())
}

fn kappa() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for k in 1..=9 {
        worst = worst.max(kappa_from_ode(k as f64 / 10.0)?.max_rel_gap());
    }
    let half = (kappa_s(0.5)? - 1.0).abs();
    outcome(worst <= 1e-6 && half <= 1e-12, format!("max rel gap {worst:.2e}, |kappa_1/2 - 1| = {half:.1e}"))
}

fn normalization() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for n in [1, 2] {
        for s in [0.25, 0.5, 0.75] {
            for m in [0.5, 1.0] {
                let p = Params::simple(n, s, m, 0.0)?;
                for t in [0.1, 1.0] {
                    worst = worst.max(normalization_check(&p, t, false)?.abs_gap);
                }
            }
        }
    }
    outcome(worst <= 1e-6, format!("max |integral - theta| {worst:.2e} over 24 cases"))
}

fn trace() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for s in [0.25, 0.5, 0.75] {
        for m in [0.0, 1.0] {
            let p = Params::simple(1, s, m, 0.0)?;
            for k in [1.0, 3.0, 8.0] {
                let u = SpectralField::from_fn(1, 2.0 * PI, 64, |x| (k * x[0]).cos())?;
                worst = worst.max(verify_trace(&u, &p)?.max_rel_err);
            }
            worst = worst.max(verify_trace(&gaussian(1024)?, &p)?.max_rel_err);
        }
    }
    outcome(worst <= 1e-6, format!("max rel err {worst:.2e} (single modes and Gaussian)"))
}

fn dirichlet() -> Result<Outcome> {
    let u = gaussian(1024)?;
    let mut worst = 0.0f64;
    for s in [0.25, 0.5, 0.75] {
        worst = worst.max(dirichlet_form_identity(&u, s, 1.0)?.rel_gap);
    }
    outcome(worst <= 1e-3, format!("max rel gap {worst:.2e}"))
}

fn free_spectrum() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for n in [1usize, 2, 3] {
        for s in [0.25, 0.5, 0.75] {
            let p = Params::simple(n, s, 0.0, 0.0)?;
            let exact = |l: f64| l * (l + n as f64 - 2.0 * s);
            if n == 1 {
                for (l, ep) in solve_sector(&p, 0, 5, 512)?.iter().enumerate() {
                    worst = worst.max((ep.mu - exact(l as f64)).abs() / exact(l as f64).max(1.0));
                }
            } else {
                for l in 0..=4 {
                    let ep = &solve_sector(&p, l, 1, 512)?[0];
                    worst = worst.max((ep.mu - exact(l as f64)).abs() / exact(l as f64).max(1.0));
                }
            }
        }
    }
    outcome(worst <= 1e-4, format!("max rel err {worst:.2e}"))
}

fn sharp_constant() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for (n, s) in [(1, 0.25), (2, 0.5), (3, 0.5), (3, 0.75)] {
        let lambda = herbst_lambda(n, s)?;
        let root = sharp_constant_root(&Params::simple(n, s, 0.0, 0.0)?, (0.6 * lambda, 1.7 * lambda), 1024)?;
        worst = worst.max((root - lambda).abs() / lambda);
    }
    let l3 = (herbst_lambda(3, 0.5)? - 2.0 / PI).abs();
    outcome(worst <= 5e-3 && l3 <= 1e-12, format!("max rel gap {worst:.2e}, |Lambda_3,1/2 - 2/pi| = {l3:.1e}"))
}

fn power_frequency() -> Result<Outcome> {
    let cases = [
        Params::new(1, 0.25, 0.0, PotentialSpec { a: AKind::TwoPoint { minus: 0.1, plus: 0.05 }, h: HKind::Zero })?,
        Params::simple(2, 0.5, 0.0, 0.2)?,
        Params::simple(3, 0.75, 0.0, -0.3)?,
    ];
    let (mut nerr, mut hp) = (0.0f64, 0.0f64);
    for p in &cases {
        let ep = solve_sector(p, 0, 1, 512)?.remove(0);
        let sep = make_separable(p, &ep, RadialKind::Power, 1.3)?;
        let tr = frequency_trace(Solution::Separable(&sep), &decades(0.0, -4.0, 8))?;
        nerr = tr.nfreq.iter().fold(nerr, |a, n| a.max((n - ep.gamma).abs()));
        hp = hp.max(check_hprime(&tr)?.max);
    }
    outcome(nerr <= 1e-10 && hp <= 1e-12, format!("max |N - gamma| {nerr:.1e}, max H' residual {hp:.1e}"))
}

fn bessel_frequency() -> Result<Outcome> {
    let p = Params::simple(1, 0.5, 1.0, 0.0)?;
    let ep = solve_sector(&p, 0, 1, 512)?.remove(0);
    let sep = make_separable(&p, &ep, RadialKind::ModifiedBessel { m: 1.0 }, 2.0)?;
    let tr = frequency_trace(Solution::Separable(&sep), &decades(0.0, -2.0, 40))?;
    let at = (tr.nfreq.last().copied().unwrap_or(f64::NAN) - ep.gamma).abs();
    let fit = gamma_extract(&tr)?;
    let ferr = (fit.gamma - ep.gamma).abs();
    let nu2_finite = tr.nu2.iter().all(|v| v.is_finite());
    let shape = tr.nu2_fit();
    let shape_ok = shape.is_some_and(|f| f.exponent > 0.0 && f.bound_constant.is_finite());
    outcome(
        at <= 1e-3 && ferr <= 1e-3 && nu2_finite && shape_ok,
        format!(
            "|N(0.01) - gamma| {at:.2e}, fitted gamma err {ferr:.2e}, nu2 exponent {:.3}",
            shape.map_or(f64::NAN, |f| f.exponent)
        ),
    )
}

fn pohozaev() -> Result<Outcome> {
    let pp = Params::simple(2, 0.5, 0.0, 0.2)?;
    let ep = solve_sector(&pp, 0, 1, 512)?.remove(0);
    let power = make_separable(&pp, &ep, RadialKind::Power, 1.0)?;
    let pb = Params::simple(1, 0.5, 1.0, 0.0)?;
    let eb = solve_sector(&pb, 0, 1, 512)?.remove(0);
    let bessel = make_separable(&pb, &eb, RadialKind::ModifiedBessel { m: 1.0 }, 2.0)?;
    let (mut rp, mut rb) = (0.0f64, 0.0f64);
    for r in [0.3, 0.7, 1.0] {
        let a = pohozaev_residual(Solution::Separable(&power), r)?;
        let b = pohozaev_residual(Solution::Separable(&bessel), r)?;
        rp = rp.max(a.res1).max(a.res2);
        rb = rb.max(b.res1).max(b.res2);
    }
    let pg = Params::new(
        1,
        0.25,
        0.5,
        PotentialSpec { a: AKind::TwoPoint { minus: 0.1, plus: 0.1 }, h: HKind::Power { c_h: 0.1, chi: 0.5 } },
    )?;
    let grid = PolarGrid::new(0.25, 1.0, 1e-4, 256, 128)?;
    let g = solve_fn(&pg, &grid, |a| 1.0 + 0.3 * a.sin(), InnerCondition::Transparent, "acceptance")?;
    let gr = pohozaev_residual(Solution::Grid(&g), 1.0)?;
    let rg = gr.res1.max(gr.res2);
    outcome(
        rp <= 1e-8 && rb <= 1e-6 && rg <= 1e-2,
        format!("power {rp:.1e}, Bessel {rb:.1e}, grid with h {rg:.1e}"),
    )
}

fn beta() -> Result<Outcome> {
    let p = Params::simple(1, 0.5, 1.0, 0.0)?;
    let eps = solve_sector(&p, 0, 3, 512)?;
    let sep = make_separable(&p, &eps[0], RadialKind::ModifiedBessel { m: 1.0 }, 2.0)?;
    let b = beta_coefficients(Solution::Separable(&sep), &eps, 1.0)?;
    let lead = sep.leading_coefficient()?;
    let lerr = (b[0] - lead).abs() / lead.abs();
    let q = Params::simple(2, 0.5, 0.0, 0.1)?;
    let e0 = solve_sector(&q, 0, 2, 512)?;
    let e1 = solve_sector(&q, 1, 1, 512)?;
    let sq = make_separable(&q, &e0[0], RadialKind::Power, 1.5)?;
    let others = [e0[1].clone(), e1[0].clone()];
    let bq = beta_coefficients(Solution::Separable(&sq), &others, 1.0)?;
    let zeros = b[1..].iter().chain(&bq).fold(0.0f64, |a, v| a.max(v.abs()));
    outcome(lerr <= 1e-4 && zeros <= 1e-8, format!("beta_1 rel err {lerr:.1e}, max orthogonal beta {zeros:.1e}"))
}

fn pipeline() -> Result<Outcome> {
    let spec = |s: f64| {
        Params::new(
            1,
            s,
            0.0,
            PotentialSpec { a: AKind::TwoPoint { minus: 0.1, plus: 0.1 }, h: HKind::Power { c_h: 0.1, chi: 0.5 } },
        )
    };
    let mut cfg = PipelineConfig::new(spec(0.25)?);
    cfg.grid_n = 512;
    let support = match halfdisk_pipeline(&cfg) {
        Ok(r) => format!(
            "s = 0.25: gamma rel err {:.1e}, oracle ({:.1e}, {:.1e}), blow-up decreasing {}",
            r.gamma_rel_err, r.oracle_errors.0, r.oracle_errors.1, r.blowup.decreasing
        ),
        Err(e) => format!("s = 0.25: {e}"),
    };
    let mut cfg = PipelineConfig::new(spec(0.5)?);
    cfg.grid_n = 512;
    match halfdisk_pipeline(&cfg) {
        Ok(r) => {
            let pass = r.gamma_rel_err <= 1e-2 && r.oracle_errors.0 <= 1e-3 && r.oracle_errors.1 <= 1e-3 && r.blowup.decreasing;
            outcome(pass, format!("s = 0.5: gamma rel err {:.1e}; {support}", r.gamma_rel_err))
        }
        Err(e) => outcome(false, format!("s = 0.5: {e}; {support}")),
    }
}

fn hardy() -> Result<Outcome> {
    let probes = randomized_margins(20, 20_240_601)?;
    let worst_random = probes.iter().fold(f64::INFINITY, |a, p| a.min(p.result.margin));
    let mut near = 0.0f64;
    for (n, s) in [(1, 0.25), (2, 0.5), (3, 0.5)] {
        near = near.max(near_optimizer_ratio(n, s, 1e-3)?.rel_gap.abs());
    }
    let mut boundary = f64::INFINITY;
    let flat = Params::simple(1, 0.25, 0.0, 0.0)?;
    let one = |_r: f64, _a: f64| (1.0, 0.0, 0.0);
    boundary = boundary.min(hardy_boundary_check(&HardyTestFunction::Planar(&one), &flat, 1.0, 0.0)?);
    let cases = [
        Params::new(1, 0.25, 0.0, PotentialSpec { a: AKind::TwoPoint { minus: 0.1, plus: 0.05 }, h: HKind::Zero })?,
        Params::simple(2, 0.5, 0.0, 0.1)?,
        Params::simple(3, 0.5, 0.0, 0.2)?,
    ];
    for p in &cases {
        let g = mu1(p, 512)?;
        let sep = make_separable(p, &g.eigenpair, RadialKind::Power, 1.0)?;
        for r in [0.5, 1.0, 2.0] {
            boundary = boundary.min(hardy_boundary_check(&HardyTestFunction::Separable(&sep), p, r, g.mu1)?);
            boundary = boundary.min(hardy_boundary_check(&HardyTestFunction::Zero, p, r, g.mu1)?);
        }
    }
    outcome(
        worst_random >= 0.0 && near <= 0.05 && boundary >= -1e-10,
        format!("min random margin {worst_random:.2e}, near-optimizer gap {near:.2e}, min boundary margin {boundary:.2e}"),
    )
}

type Check = fn() -> Result<Outcome>;

fn main() {
    let checks: [(u32, Check, Duration); 12] = [
        (1, kappa, Duration::from_secs(60)),
        (2, normalization, Duration::from_secs(60)),
        (3, trace, Duration::from_secs(60)),
        (4, dirichlet, Duration::from_secs(120)),
        (5, free_spectrum, Duration::from_secs(60)),
        (6, sharp_constant, Duration::from_secs(120)),
        (7, power_frequency, Duration::from_secs(60)),
        (8, bessel_frequency, Duration::from_secs(60)),
        (9, pohozaev, Duration::from_secs(120)),
        (10, beta, Duration::from_secs(60)),
        (11, pipeline, Duration::from_secs(300)),
        (12, hardy, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (id, check, budget) in checks {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && took <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id}: {} {detail} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
