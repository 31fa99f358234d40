//! Variable exponents α(t): validation, regime classification and the
//! power term (t−s)^{α(t)−α(s)}.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::funclang::{Jet2, ScalarFunc};

/// Tolerance used to decide α(0) = 1 (or α(0) = 0).
pub const ENDPOINT_TOL: f64 = 1e-12;

pub const DEFAULT_VALIDATION_NODES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// 0 < α(t) < 1 on [0, T].
    InteriorRange,
    /// α(0) = 1 and 0 < α(t) < 1 on (0, T].
    TouchesOneAtZero,
    /// α(0) = 0 and 0 < α(t) < 1 on (0, T]; admissible for the R-L families only.
    VanishesAtZero,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::InteriorRange => "interior-range",
            Regime::TouchesOneAtZero => "touches-one-at-zero",
            Regime::VanishesAtZero => "vanishes-at-zero",
        })
    }
}

/// A validated exponent function on [0, T].
#[derive(Debug, Clone)]
pub struct VariableExponent {
    alpha: ScalarFunc,
    horizon: f64,
    alpha_lo: f64,
    alpha_hi: f64,
    regime: Regime,
}

/// Validates `alpha` on [0, T] and classifies it.
pub fn make_exponent(alpha: ScalarFunc, horizon: f64) -> Result<VariableExponent> {
    VariableExponent::new(alpha, horizon)
}

impl VariableExponent {
    pub fn new(alpha: ScalarFunc, horizon: f64) -> Result<Self> {
        Self::validate(alpha, horizon, DEFAULT_VALIDATION_NODES, false)
    }

    pub fn with_nodes(alpha: ScalarFunc, horizon: f64, nodes: usize) -> Result<Self> {
        Self::validate(alpha, horizon, nodes, false)
    }

    /// Like [`VariableExponent::new`] but also admits α(0) = 0, which the
    /// Riemann–Liouville integrals tolerate thanks to their 1/Γ factor.
    pub fn for_riemann_liouville(alpha: ScalarFunc, horizon: f64) -> Result<Self> {
        Self::validate(alpha, horizon, DEFAULT_VALIDATION_NODES, true)
    }

    /// Shorthand for a constant exponent.
    pub fn constant(alpha: f64, horizon: f64) -> Result<Self> {
        Self::new(ScalarFunc::constant(alpha), horizon)
    }

    fn validate(alpha: ScalarFunc, horizon: f64, nodes: usize, allow_zero: bool) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param(format!("horizon T must be positive, got {horizon}")));
        }
        if nodes < 2 {
            return Err(Error::param("need at least 2 validation nodes"));
        }
        let jet_at = |t: f64| {
            alpha
                .eval_jet(t)
                .map_err(|e| Error::NotSmooth(format!("`{}` at t = {t}: {e}", alpha.source())))
        };
        let a0 = jet_at(0.0)?.v;
        let regime = if (a0 - 1.0).abs() <= ENDPOINT_TOL {
            Regime::TouchesOneAtZero
        } else if allow_zero && a0.abs() <= ENDPOINT_TOL {
            Regime::VanishesAtZero
        } else if a0 > 0.0 && a0 < 1.0 {
            Regime::InteriorRange
        } else {
            return Err(Error::RangeViolation(format!(
                "alpha(0) = {a0} lies outside (0, 1]"
            )));
        };
        let (mut lo, mut hi) = (a0, a0);
        for k in 1..=nodes {
            let t = if k == nodes { horizon } else { horizon * k as f64 / nodes as f64 };
            let a = jet_at(t)?.v;
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::RangeViolation(format!(
                    "alpha({t}) = {a} leaves (0, 1)"
                )));
            }
            lo = lo.min(a);
            hi = hi.max(a);
        }
        Ok(Self { alpha, horizon, alpha_lo: lo, alpha_hi: hi, regime })
    }

    pub fn func(&self) -> &ScalarFunc {
        &self.alpha
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Sampled lower bound α_*.
    pub fn alpha_lo(&self) -> f64 {
        self.alpha_lo
    }

    /// Sampled upper bound α^*.
    pub fn alpha_hi(&self) -> f64 {
        self.alpha_hi
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.alpha.eval(t)
    }

    pub fn jet(&self, t: f64) -> Result<Jet2> {
        self.alpha.eval_jet(t)
    }

    /// α(0), snapped to the regime's endpoint value when it touches 0 or 1.
    pub fn alpha0(&self) -> f64 {
        match self.regime {
            Regime::TouchesOneAtZero => 1.0,
            Regime::VanishesAtZero => 0.0,
            Regime::InteriorRange => self.alpha.eval(0.0).expect("validated at t = 0"),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.alpha.as_constant().is_some()
    }

    pub fn require_interior(&self, what: &str) -> Result<()> {
        if self.regime == Regime::InteriorRange {
            Ok(())
        } else {
            Err(Error::Regime(format!("{what} requires 0 < alpha < 1 on [0, T], regime is {}", self.regime)))
        }
    }

    /// (t−s)^{α(t)−α(s)}, with the limit value 1 on the diagonal.
    pub fn power_term(&self, s: f64, t: f64) -> Result<f64> {
        if s == t {
            return Ok(1.0);
        }
        let diff = self.value(t)? - self.value(s)?;
        Ok((diff * (t - s).ln()).exp())
    }
}

/// (t−s)^{α(t)−α(s)} for `0 ≤ s ≤ t ≤ T`.
pub fn power_term(e: &VariableExponent, s: f64, t: f64) -> Result<f64> {
    if !(0.0 <= s && s <= t) {
        return Err(Error::param(format!("power_term needs 0 <= s <= t, got s = {s}, t = {t}")));
    }
    e.power_term(s, t)
}

/// Exponent depending on two time variables, α(t, s), with values in (0, 1).
///
/// `grad` returns the value and both partial derivatives `(α, ∂₁α, ∂₂α)`.
pub trait TwoVarExponent: Send + Sync {
    fn grad(&self, t: f64, s: f64) -> Result<(f64, f64, f64)>;

    fn value(&self, t: f64, s: f64) -> Result<f64> {
        Ok(self.grad(t, s)?.0)
    }
}

/// α(t, s) given by closures for the value and gradient.
#[derive(Clone)]
pub struct ClosureExponent2 {
    #[allow(clippy::type_complexity)]
    grad: Arc<dyn Fn(f64, f64) -> (f64, f64, f64) + Send + Sync>,
}

impl ClosureExponent2 {
    pub fn new(grad: impl Fn(f64, f64) -> (f64, f64, f64) + Send + Sync + 'static) -> Self {
        Self { grad: Arc::new(grad) }
    }
}

impl fmt::Debug for ClosureExponent2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ClosureExponent2")
    }
}

impl TwoVarExponent for ClosureExponent2 {
    fn grad(&self, t: f64, s: f64) -> Result<(f64, f64, f64)> {
        let g = (self.grad)(t, s);
        if g.0 > 0.0 && g.0 < 1.0 {
            Ok(g)
        } else {
            Err(Error::RangeViolation(format!("alpha({t}, {s}) = {} leaves (0, 1)", g.0)))
        }
    }
}

/// Which argument a one-variable exponent is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
}

/// α(t, s) = a(t) or a(s) for a one-variable exponent `a`.
#[derive(Debug, Clone)]
pub struct LiftedExponent {
    pub exponent: VariableExponent,
    pub slot: Slot,
}

impl TwoVarExponent for LiftedExponent {
    fn grad(&self, t: f64, s: f64) -> Result<(f64, f64, f64)> {
        match self.slot {
            Slot::First => {
                let j = self.exponent.jet(t)?;
                Ok((j.v, j.d1, 0.0))
            }
            Slot::Second => {
                let j = self.exponent.jet(s)?;
                Ok((j.v, 0.0, j.d1))
            }
        }
    }
}
