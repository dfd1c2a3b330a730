//! Problem data shared by all modules.

use crate::error::{Error, Result};

/// Angular part of the Hardy potential a(x/|x|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AKind {
    Zero,
    Constant(f64),
    /// N = 1 only: a = a_minus on x < 0 and a_plus on x > 0.
    TwoPoint { minus: f64, plus: f64 },
}

/// Lower-order perturbation h(x) = c_h |x|^{-2s+χ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HKind {
    Zero,
    Power { c_h: f64, chi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub a: AKind,
    pub h: HKind,
}

impl PotentialSpec {
    pub const ZERO: PotentialSpec = PotentialSpec { a: AKind::Zero, h: HKind::Zero };

    pub fn constant(a0: f64) -> Self {
        PotentialSpec { a: AKind::Constant(a0), h: HKind::Zero }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub n: usize,
    pub s: f64,
    pub m: f64,
    pub potential: PotentialSpec,
}

impl Params {
    /// Checks the structural constraints. N > 2s is not required here; the
    /// operations that need it check it themselves.
    pub fn new(n: usize, s: f64, m: f64, potential: PotentialSpec) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParams(format!("s = {s} must lie in (0, 1)")));
        }
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::InvalidParams(format!("m = {m} must be finite and non-negative")));
        }
        match potential.a {
            AKind::TwoPoint { minus, plus } => {
                if n != 1 {
                    return Err(Error::InvalidParams("two-point a is only defined for N = 1".into()));
                }
                if !(minus.is_finite() && plus.is_finite()) {
                    return Err(Error::InvalidParams("two-point a must be finite".into()));
                }
            }
            AKind::Constant(a0) if !a0.is_finite() => {
                return Err(Error::InvalidParams("a0 must be finite".into()));
            }
            _ => {}
        }
        if let HKind::Power { c_h, chi } = potential.h {
            if !(chi > 0.0 && chi < 1.0) {
                return Err(Error::InvalidParams(format!("chi = {chi} must lie in (0, 1)")));
            }
            if !c_h.is_finite() {
                return Err(Error::InvalidParams("c_h must be finite".into()));
            }
        }
        Ok(Params { n, s, m, potential })
    }

    pub fn simple(n: usize, s: f64, m: f64, a0: f64) -> Result<Self> {
        Params::new(n, s, m, PotentialSpec::constant(a0))
    }

    /// (N - 2s)/2.
    pub fn c(&self) -> f64 {
        (self.n as f64 - 2.0 * self.s) / 2.0
    }

    /// -((N - 2s)/2)², the admissibility threshold for μ₁.
    pub fn hardy_bound(&self) -> f64 {
        -self.c() * self.c()
    }

    pub fn require_n_gt_2s(&self) -> Result<()> {
        if self.n as f64 > 2.0 * self.s {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("N > 2s required (N={}, s={})", self.n, self.s)))
        }
    }

    /// Boundary values of a at the two ends of the half-circle (x < 0, x > 0).
    pub fn a_ends(&self) -> (f64, f64) {
        match self.potential.a {
            AKind::Zero => (0.0, 0.0),
            AKind::Constant(a0) => (a0, a0),
            AKind::TwoPoint { minus, plus } => (minus, plus),
        }
    }

    /// Constant C_h with |h| + |x·∇h| ≤ C_h |x|^{-2s+χ}.
    pub fn c_h_bound(&self) -> f64 {
        match self.potential.h {
            HKind::Zero => 0.0,
            HKind::Power { c_h, chi } => c_h.abs() * (1.0f64).max((2.0 * self.s - chi).abs() + 1.0),
        }
    }

    pub fn with_a(&self, a: AKind) -> Self {
        Params { potential: PotentialSpec { a, ..self.potential }, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_data() {
        assert!(Params::simple(0, 0.5, 0.0, 0.0).is_err());
        assert!(Params::simple(1, 1.0, 0.0, 0.0).is_err());
        assert!(Params::simple(1, 0.5, -1.0, 0.0).is_err());
        let tp = PotentialSpec { a: AKind::TwoPoint { minus: 0.1, plus: 0.2 }, h: HKind::Zero };
        assert!(Params::new(2, 0.5, 0.0, tp).is_err());
        assert!(Params::new(1, 0.5, 0.0, tp).is_ok());
        let h = PotentialSpec { a: AKind::Zero, h: HKind::Power { c_h: 0.1, chi: 1.0 } };
        assert!(Params::new(1, 0.25, 0.0, h).is_err());
    }

    #[test]
    fn n_not_above_2s_is_allowed_but_flagged() {
        let p = Params::simple(1, 0.75, 1.0, 0.0).unwrap();
        assert!(p.require_n_gt_2s().is_err());
        assert!((p.c() + 0.25).abs() < 1e-15);
    }
}
