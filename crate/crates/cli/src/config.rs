//! Run configuration: JSON parsing and validation.

use std::fmt;
use std::str::FromStr;

use fracrel::angular::check_admissible;
use fracrel::{AKind, Error, HKind, Params, PotentialSpec};
use serde::Deserialize;

/// Angular grid used for admissibility checks and eigenpairs.
pub const ANGULAR_GRID_N: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Constants,
    Angular,
    Hardy,
    ExtensionTest,
    KernelTest,
    SeparableFrequency,
    HalfdiskPipeline,
    Blowup,
    Beta,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Constants,
        Scenario::Angular,
        Scenario::Hardy,
        Scenario::ExtensionTest,
        Scenario::KernelTest,
        Scenario::SeparableFrequency,
        Scenario::HalfdiskPipeline,
        Scenario::Blowup,
        Scenario::Beta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Constants => "constants",
            Scenario::Angular => "angular",
            Scenario::Hardy => "hardy",
            Scenario::ExtensionTest => "extension_test",
            Scenario::KernelTest => "kernel_test",
            Scenario::SeparableFrequency => "separable_frequency",
            Scenario::HalfdiskPipeline => "halfdisk_pipeline",
            Scenario::Blowup => "blowup",
            Scenario::Beta => "beta",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::Constants => "kappa_s, Lambda_{N,s}, c_{N,s} and C'_{N,s} with cross-checks",
            Scenario::Angular => "angular spectrum, mu1 and the admissibility margin",
            Scenario::Hardy => "randomized Hardy margins and the near-optimizer quotient",
            Scenario::ExtensionTest => "extension trace and Dirichlet-form identity on a Gaussian",
            Scenario::KernelTest => "Poisson-kernel normalization against theta(mt)",
            Scenario::SeparableFrequency => "frequency function of an exact separable solution (h = 0)",
            Scenario::HalfdiskPipeline => "oracle gate, half-disk solve, frequency trace and gamma (N = 1)",
            Scenario::Blowup => "rescaled blow-up distances of a half-disk solution (N = 1)",
            Scenario::Beta => "leading coefficients beta_k (separable if h = 0, half-disk grid otherwise)",
        }
    }

    fn needs_half_disk(self, h_zero: bool) -> bool {
        match self {
            Scenario::HalfdiskPipeline | Scenario::Blowup => true,
            Scenario::Beta => !h_zero,
            _ => false,
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown scenario \"{s}\" (see list-scenarios)"))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    params: Option<RawParams>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    trace: RawTrace,
    taus: Option<Vec<f64>>,
    seed: Option<u64>,
    count: Option<usize>,
    amplitude: Option<f64>,
    eigenpairs: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    n: Option<usize>,
    s: Option<f64>,
    m: Option<f64>,
    a: Option<RawA>,
    h: Option<RawH>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawA {
    kind: String,
    value: Option<f64>,
    minus: Option<f64>,
    plus: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawH {
    kind: String,
    c_h: Option<f64>,
    chi: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    r_outer: Option<f64>,
    rho_min: Option<f64>,
    n_rho: Option<usize>,
    grid_n: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrace {
    r_max: Option<f64>,
    r_min: Option<f64>,
    samples_per_decade: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub r_outer: f64,
    pub rho_min: f64,
    pub n_rho: usize,
    pub grid_n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSpec {
    pub r_max: f64,
    pub r_min: f64,
    pub samples_per_decade: usize,
}

impl TraceSpec {
    /// Log-spaced radii from r_max down to r_min, inclusive.
    pub fn radii(&self) -> Vec<f64> {
        let decades = (self.r_max / self.r_min).log10();
        let count = (decades * self.samples_per_decade as f64 + 1e-9).floor() as usize;
        (0..=count).map(|j| self.r_max * 10f64.powf(-(j as f64) / self.samples_per_decade as f64)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub scenario: Scenario,
    pub params: Params,
    pub grid: GridSpec,
    pub trace: TraceSpec,
    pub taus: Vec<f64>,
    pub seed: u64,
    pub count: usize,
    pub amplitude: f64,
    pub eigenpairs: usize,
}

fn need<T: Copy>(v: Option<T>, path: &str, problems: &mut Vec<String>) -> Option<T> {
    if v.is_none() {
        problems.push(format!("{path} is required"));
    }
    v
}

fn parse_a(a: Option<&RawA>, problems: &mut Vec<String>) -> Option<AKind> {
    let Some(a) = a else { return Some(AKind::Zero) };
    match a.kind.as_str() {
        "zero" => Some(AKind::Zero),
        "constant" => need(a.value, "params.a.value", problems).map(AKind::Constant),
        "two_point" => {
            let minus = need(a.minus, "params.a.minus", problems);
            let plus = need(a.plus, "params.a.plus", problems);
            Some(AKind::TwoPoint { minus: minus?, plus: plus? })
        }
        other => {
            problems.push(format!("params.a.kind \"{other}\" is not one of zero, constant, two_point"));
            None
        }
    }
}

fn parse_h(h: Option<&RawH>, problems: &mut Vec<String>) -> Option<HKind> {
    let Some(h) = h else { return Some(HKind::Zero) };
    match h.kind.as_str() {
        "zero" => Some(HKind::Zero),
        "power" => {
            let c_h = need(h.c_h, "params.h.c_h", problems);
            let chi = need(h.chi, "params.h.chi", problems);
            Some(HKind::Power { c_h: c_h?, chi: chi? })
        }
        other => {
            problems.push(format!("params.h.kind \"{other}\" is not one of zero, power"));
            None
        }
    }
}

/// Parses and validates a configuration, returning every problem found.
pub fn parse(text: &str) -> Result<Config, Vec<String>> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| vec![format!("malformed config: {e}")])?;
    let mut problems = Vec::new();

    let scenario = match raw.scenario.as_deref() {
        None => {
            problems.push("scenario is required".to_string());
            None
        }
        Some(name) => name.parse::<Scenario>().map_err(|e| problems.push(e)).ok(),
    };

    let params = match &raw.params {
        None => {
            problems.push("params is required".to_string());
            None
        }
        Some(p) => {
            let n = need(p.n, "params.n", &mut problems);
            let s = need(p.s, "params.s", &mut problems);
            let a = parse_a(p.a.as_ref(), &mut problems);
            let h = parse_h(p.h.as_ref(), &mut problems);
            match (n, s, a, h) {
                (Some(n), Some(s), Some(a), Some(h)) => {
                    match Params::new(n, s, p.m.unwrap_or(0.0), PotentialSpec { a, h }) {
                        Ok(p) => Some(p),
                        Err(e) => {
                            problems.push(e.to_string());
                            None
                        }
                    }
                }
                _ => None,
            }
        }
    };

    let grid = GridSpec {
        r_outer: raw.grid.r_outer.unwrap_or(1.0),
        rho_min: raw.grid.rho_min.unwrap_or(1e-6),
        n_rho: raw.grid.n_rho.unwrap_or(512),
        grid_n: raw.grid.grid_n.unwrap_or(256),
    };
    let trace = TraceSpec {
        r_max: raw.trace.r_max.unwrap_or(1.0),
        r_min: raw.trace.r_min.unwrap_or(1e-2),
        samples_per_decade: raw.trace.samples_per_decade.unwrap_or(8),
    };
    if !(trace.r_min > 0.0 && trace.r_max > trace.r_min && trace.r_max.is_finite()) {
        problems.push(format!("trace needs 0 < r_min < r_max (got {}, {})", trace.r_min, trace.r_max));
    }
    if trace.samples_per_decade < 2 {
        problems.push("trace.samples_per_decade must be at least 2".to_string());
    }
    let taus = raw.taus.unwrap_or_else(|| vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3]);
    if taus.is_empty() || taus.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        problems.push("taus must be a non-empty list of values in (0, 1]".to_string());
    }
    let count = raw.count.unwrap_or(20);
    if count == 0 {
        problems.push("count must be positive".to_string());
    }
    let amplitude = raw.amplitude.unwrap_or(1.0);
    if !(amplitude.is_finite() && amplitude != 0.0) {
        problems.push("amplitude must be finite and nonzero".to_string());
    }
    let eigenpairs = raw.eigenpairs.unwrap_or(3);
    if eigenpairs == 0 {
        problems.push("eigenpairs must be positive".to_string());
    }

    if let (Some(sc), Some(p)) = (scenario, params.as_ref()) {
        semantic_checks(sc, p, &grid, &mut problems);
    }

    match (scenario, params) {
        (Some(scenario), Some(params)) if problems.is_empty() => Ok(Config {
            scenario,
            params,
            grid,
            trace,
            taus,
            seed: raw.seed.unwrap_or(1),
            count,
            amplitude,
            eigenpairs,
        }),
        _ => Err(problems),
    }
}

fn semantic_checks(sc: Scenario, p: &Params, grid: &GridSpec, problems: &mut Vec<String>) {
    let n_gt_2s = p.n as f64 > 2.0 * p.s;
    let a_zero = match p.potential.a {
        AKind::Zero => true,
        AKind::Constant(v) => v == 0.0,
        AKind::TwoPoint { minus, plus } => minus == 0.0 && plus == 0.0,
    };
    let h_zero = matches!(p.potential.h, HKind::Zero);
    if !n_gt_2s && !(a_zero && h_zero) {
        problems.push(format!("the Hardy-type terms need N > 2s (N = {}, s = {})", p.n, p.s));
    }
    if n_gt_2s && !a_zero {
        let hfree = Params { potential: PotentialSpec { a: p.potential.a, h: HKind::Zero }, ..*p };
        match check_admissible(&hfree, ANGULAR_GRID_N) {
            Ok(_) => {}
            Err(e @ Error::Inadmissible { .. }) => problems.push(e.to_string()),
            Err(e) => problems.push(format!("admissibility check failed: {e}")),
        }
    }
    let needs_n_gt_2s = sc == Scenario::Hardy || sc.needs_half_disk(h_zero);
    if needs_n_gt_2s && !n_gt_2s {
        problems.push(format!("scenario {sc} needs N > 2s"));
    }
    if matches!(sc, Scenario::ExtensionTest | Scenario::KernelTest) && p.n > 2 {
        problems.push(format!("scenario {sc} supports N = 1 or 2"));
    }
    if sc == Scenario::ExtensionTest && p.m <= 0.0 {
        problems.push("extension_test needs m > 0 for the Bessel-kernel side".to_string());
    }
    if sc == Scenario::SeparableFrequency && !h_zero {
        problems.push("separable_frequency needs h = 0".to_string());
    }
    if sc.needs_half_disk(h_zero) {
        if p.n != 1 {
            problems.push(format!("scenario {sc} runs on the half-disk and needs N = 1"));
        }
        let spacing = (grid.r_outer / grid.rho_min).ln() / grid.n_rho.max(1) as f64;
        if !(grid.rho_min > 0.0 && grid.r_outer > grid.rho_min) {
            problems.push(format!("grid needs 0 < rho_min < r_outer (got {}, {})", grid.rho_min, grid.r_outer));
        } else if spacing.exp() > 1.1 {
            problems.push(format!(
                "grid.n_rho = {} is too coarse: neighbouring radii differ by more than 10%",
                grid.n_rho
            ));
        }
        if grid.grid_n < 16 {
            problems.push("grid.grid_n must be at least 16".to_string());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
        assert!("nope".parse::<Scenario>().is_err());
    }

    #[test]
    fn missing_chi_is_one_problem() {
        let text = r#"{"scenario":"angular","params":{"n":1,"s":0.25,"h":{"kind":"power","c_h":0.1}}}"#;
        let problems = parse(text).unwrap_err();
        assert_eq!(problems.len(), 1, "{problems:?}");
        assert!(problems[0].contains("chi"));
    }

    #[test]
    fn radii_are_inclusive() {
        let t = TraceSpec { r_max: 1.0, r_min: 1e-2, samples_per_decade: 4 };
        let r = t.radii();
        assert_eq!(r.len(), 9);
        assert!((r[8] - 1e-2).abs() < 1e-15);
    }
}
