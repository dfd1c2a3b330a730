use fracrel::angular::solve_sector;
use fracrel::diagnostics::{check_hprime, frequency_trace, make_separable, pohozaev_residual, RadialKind, Solution};
use fracrel::specfun::{bessel_i, bessel_i_ratio, herbst_lambda};
use fracrel::{AKind, HKind, Params, PotentialSpec};
use proptest::prelude::*;

fn case() -> impl Strategy<Value = (usize, f64, f64, f64)> {
    (1usize..=3, prop::sample::select(vec![0.25, 0.5, 0.75]), -0.5f64..0.6, 0.2f64..5.0)
}

fn params(n: usize, s: f64, frac: f64) -> Params {
    // a₀ as a fraction of Λ keeps the potential admissible
    let lambda = herbst_lambda(n, s).unwrap();
    let a = if n == 1 {
        AKind::TwoPoint { minus: frac * lambda, plus: 0.5 * frac * lambda }
    } else {
        AKind::Constant(frac * lambda)
    };
    Params::new(n, s, 0.0, PotentialSpec { a, h: HKind::Zero }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_solutions_have_constant_frequency((n, s, frac, amp) in case(), sign in prop::bool::ANY) {
        prop_assume!(n as f64 > 2.0 * s);
        let p = params(n, s, frac);
        let ep = solve_sector(&p, 0, 1, 256).unwrap().remove(0);
        let amp = if sign { amp } else { -amp };
        let sep = make_separable(&p, &ep, RadialKind::Power, amp).unwrap();
        let rs: Vec<f64> = (0..=16).map(|j| 10f64.powf(-(j as f64) / 8.0)).collect();
        let tr = frequency_trace(Solution::Separable(&sep), &rs).unwrap();
        for (i, nf) in tr.nfreq.iter().enumerate() {
            prop_assert!((nf - ep.gamma).abs() < 1e-10);
            let h = amp * amp * rs[i].powf(2.0 * ep.gamma);
            prop_assert!((tr.h[i] - h).abs() <= 1e-12 * h);
        }
        prop_assert!(check_hprime(&tr).unwrap().max < 1e-11);
        let pr = pohozaev_residual(Solution::Separable(&sep), 0.6).unwrap();
        prop_assert!(pr.res1 < 1e-10 && pr.res2 < 1e-10);
    }

    #[test]
    fn i_ratio_within_amos_bounds(nu in 0.0f64..20.0, lx in -3.0f64..2.5) {
        let x = 10f64.powf(lx);
        let r = bessel_i_ratio(nu, x).unwrap();
        let lo = x / (nu + 1.0 + (x * x + (nu + 1.0).powi(2)).sqrt());
        let hi = x / (nu + 0.5 + (x * x + (nu + 0.5).powi(2)).sqrt());
        prop_assert!(r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12), "{lo} {r} {hi}");
        if x < 50.0 {
            let direct = bessel_i(nu + 1.0, x).unwrap() / bessel_i(nu, x).unwrap();
            prop_assert!((r - direct).abs() <= 1e-12 * direct);
        }
    }

    #[test]
    fn profile_interpolation_is_piecewise_linear(frac in -0.5f64..0.6, t in 0.0f64..1.0) {
        let p = params(1, 0.25, frac);
        let ep = solve_sector(&p, 0, 2, 128).unwrap().remove(1);
        let pr = &ep.profile;
        for (a, g) in pr.alpha.iter().zip(&pr.g) {
            prop_assert!((pr.interpolate(*a) - g).abs() < 1e-14);
        }
        let i = ((t * (pr.alpha.len() - 1) as f64) as usize).min(pr.alpha.len() - 2);
        let a = pr.alpha[i] + t.fract() * (pr.alpha[i + 1] - pr.alpha[i]);
        let v = pr.interpolate(a);
        let (lo, hi) = (pr.g[i].min(pr.g[i + 1]), pr.g[i].max(pr.g[i + 1]));
        prop_assert!(v >= lo - 1e-14 && v <= hi + 1e-14);
        let half = std::f64::consts::FRAC_PI_2;
        prop_assert!((pr.interpolate(-half) - pr.boundary.0).abs() < 1e-14);
        prop_assert!((pr.interpolate(half) - pr.boundary.1).abs() < 1e-14);
    }
}
