//! Forward evaluation of the variable-exponent integral operators.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::data::DataFn;
use crate::error::{Error, Result};
use crate::exponent::{Regime, TwoVarExponent, VariableExponent};
use crate::quadrature::{gauss_jacobi, GradedMesh, SingularWeight, TanhSinh};
use crate::specialfn::recip_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// ∫ g(s) (t−s)^{−α(s)} ds
    AbelLeft,
    /// ∫ g(s) (t−s)^{−α(t)} ds
    AbelRight,
    /// ∫ g(s) (t−s)^{α(s)−1} / Γ(α(s)) ds
    RLLeft,
    /// ∫ g(s) (t−s)^{α(t)−1} / Γ(α(t)) ds
    RLRight,
    /// ∫ g(s) (t−s)^{α(t,s)−1} / Γ(α(t,s)) ds
    RLGeneral,
    /// RLLeft with the extra factor e^{−σ(t−s)}
    TemperedLeft,
    /// RLRight with the extra factor e^{−σ(t−s)}
    TemperedRight,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::AbelLeft,
        Family::AbelRight,
        Family::RLLeft,
        Family::RLRight,
        Family::RLGeneral,
        Family::TemperedLeft,
        Family::TemperedRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::AbelLeft => "abel-left",
            Family::AbelRight => "abel-right",
            Family::RLLeft => "rl-left",
            Family::RLRight => "rl-right",
            Family::RLGeneral => "rl-general",
            Family::TemperedLeft => "tempered-left",
            Family::TemperedRight => "tempered-right",
        }
    }

    pub fn is_tempered(self) -> bool {
        matches!(self, Family::TemperedLeft | Family::TemperedRight)
    }

    pub fn is_abel(self) -> bool {
        matches!(self, Family::AbelLeft | Family::AbelRight)
    }

    /// Exponent evaluated at the outer time t (as opposed to the integration variable).
    pub fn is_right(self) -> bool {
        matches!(self, Family::AbelRight | Family::RLRight | Family::TemperedRight)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::param(format!("unknown operator family `{s}`")))
    }
}

/// Exponent attached to an operator.
#[derive(Clone)]
pub enum ExponentHandle {
    Single(VariableExponent),
    TwoVar(Arc<dyn TwoVarExponent>),
}

impl fmt::Debug for ExponentHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentHandle::Single(e) => write!(f, "Single({})", e.func().source()),
            ExponentHandle::TwoVar(_) => f.write_str("TwoVar(..)"),
        }
    }
}

/// An operator family together with its exponent and tempering parameter.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    family: Family,
    exponent: ExponentHandle,
    sigma: f64,
}

impl OperatorSpec {
    pub fn new(family: Family, exponent: VariableExponent) -> Result<Self> {
        Self::build(family, ExponentHandle::Single(exponent), 0.0)
    }

    pub fn tempered(family: Family, exponent: VariableExponent, sigma: f64) -> Result<Self> {
        Self::build(family, ExponentHandle::Single(exponent), sigma)
    }

    pub fn general(exponent: Arc<dyn TwoVarExponent>) -> Self {
        Self { family: Family::RLGeneral, exponent: ExponentHandle::TwoVar(exponent), sigma: 0.0 }
    }

    pub fn build(family: Family, exponent: ExponentHandle, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::param(format!("tempering parameter must be >= 0, got {sigma}")));
        }
        if sigma != 0.0 && !family.is_tempered() {
            return Err(Error::param(format!("sigma must be 0 for family {family}")));
        }
        match (&exponent, family) {
            (ExponentHandle::TwoVar(_), Family::RLGeneral) => {}
            (ExponentHandle::TwoVar(_), _) => {
                return Err(Error::param(format!("family {family} takes a one-variable exponent")))
            }
            (ExponentHandle::Single(_), Family::RLGeneral) => {
                return Err(Error::param("rl-general takes a two-variable exponent"))
            }
            (ExponentHandle::Single(e), f) if f.is_abel() => e.require_interior(f.name())?,
            (ExponentHandle::Single(_), _) => {}
        }
        Ok(Self { family, exponent, sigma })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn exponent(&self) -> &ExponentHandle {
        &self.exponent
    }

    /// The one-variable exponent, if this is not the general family.
    pub fn single(&self) -> Option<&VariableExponent> {
        match &self.exponent {
            ExponentHandle::Single(e) => Some(e),
            ExponentHandle::TwoVar(_) => None,
        }
    }

    /// Splits the kernel at `(t, s)` as `c · (t−s)^{p−1}`, returning `(c, p)`.
    pub fn kernel_parts(&self, t: f64, s: f64) -> Result<(f64, f64)> {
        let temper = if self.sigma == 0.0 { 1.0 } else { (-self.sigma * (t - s)).exp() };
        Ok(match &self.exponent {
            ExponentHandle::Single(e) => match self.family {
                Family::AbelLeft => (1.0, 1.0 - e.value(s)?),
                Family::AbelRight => (1.0, 1.0 - e.value(t)?),
                Family::RLLeft | Family::TemperedLeft => {
                    let a = e.value(s)?;
                    (temper * recip_gamma(a), a)
                }
                Family::RLRight | Family::TemperedRight => {
                    let a = e.value(t)?;
                    (temper * recip_gamma(a), a)
                }
                Family::RLGeneral => unreachable!("checked at construction"),
            },
            ExponentHandle::TwoVar(a2) => {
                let a = a2.value(t, s)?;
                (recip_gamma(a), a)
            }
        })
    }

    /// Full kernel value at distance `d = t − s > 0`.
    pub fn kernel(&self, t: f64, s: f64, d: f64) -> Result<f64> {
        let (c, p) = self.kernel_parts(t, s)?;
        Ok(c * ((p - 1.0) * d.ln()).exp())
    }
}

const GJ_START: usize = 16;
const GJ_MAX: usize = 512;

/// Evaluates the operator applied to `g` at time `t` to absolute accuracy `accuracy`.
pub fn eval_forward(spec: &OperatorSpec, g: &dyn DataFn, t: f64, accuracy: f64) -> Result<f64> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::param(format!("operators are evaluated for t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if !(accuracy > 0.0) {
        return Err(Error::param(format!("accuracy must be positive, got {accuracy}")));
    }
    if spec.family.is_right() {
        if let Ok(v) = right_family_jacobi(spec, g, t, accuracy) {
            return Ok(v);
        }
    }
    integrate_kernel(spec, g, t, accuracy)
}

/// Right families: s = t(1 − z) turns the integral into `t^p ∫ z^{p−1} g(t(1−z)) dz`.
fn right_family_jacobi(spec: &OperatorSpec, g: &dyn DataFn, t: f64, accuracy: f64) -> Result<f64> {
    let (c, p) = spec.kernel_parts(t, t)?;
    let sigma = spec.sigma;
    let scale = c * t.powf(p);
    let eval = |n: usize| -> Result<f64> {
        let rule = gauss_jacobi(n, 0.0, p - 1.0)?;
        // p − 1 loses relative accuracy in p when p is tiny; restore the exact zeroth moment 1/p.
        let norm = 1.0 / (p * rule.weights.iter().sum::<f64>());
        let mut sum = 0.0;
        for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
            let temper = if sigma == 0.0 { 1.0 } else { (-sigma * t * z).exp() };
            sum += w * temper * g.value(t * (1.0 - z))?;
        }
        Ok(scale * norm * sum)
    };
    let mut n = GJ_START;
    let mut prev = eval(n)?;
    while n < GJ_MAX {
        n *= 2;
        let cur = eval(n)?;
        if (cur - prev).abs() <= 0.1 * accuracy {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureFailure(format!(
        "Gauss–Jacobi rule for {} at t = {t} did not reach {accuracy:e}",
        spec.family
    )))
}

/// Double-exponential quadrature split at t/2; the kernel singularity sits at the right end.
fn integrate_kernel(spec: &OperatorSpec, g: &dyn DataFn, t: f64, accuracy: f64) -> Result<f64> {
    let ts = TanhSinh { rel_tol: 1e-15, abs_tol: 0.05 * accuracy, max_level: 10 };
    let half = 0.5 * t;
    let f = |s: f64, d: f64| -> Result<f64> { Ok(spec.kernel(t, s, d)? * g.value(s)?) };
    let left = ts.integrate(0.0, half, |s, _, _| f(s, t - s))?;
    let right = ts.integrate(half, t, |s, _, dr| f(s, dr))?;
    let err = left.error + right.error;
    if err > accuracy && err > 1e-14 * (left.value + right.value).abs() {
        return Err(Error::QuadratureFailure(format!(
            "{} at t = {t}: error estimate {err:e} exceeds {accuracy:e}",
            spec.family
        )));
    }
    Ok(left.value + right.value)
}

/// Applies the operator to nodal data with product-trapezoidal weights. The
/// exponent is frozen at panel midpoints for the left families and at the
/// outer node for the right families.
pub fn eval_forward_grid(spec: &OperatorSpec, mesh: &GradedMesh, g: &[f64]) -> Result<Vec<f64>> {
    let nodes = mesh.nodes();
    if g.len() != nodes.len() {
        return Err(Error::param(format!("expected {} grid values, got {}", nodes.len(), g.len())));
    }
    if let Some(bad) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::param(format!("grid value at node {bad} is not finite")));
    }
    let mut out = vec![0.0; nodes.len()];
    for i in 1..nodes.len() {
        let ti = nodes[i];
        let mut sum = 0.0;
        for j in 0..i {
            let (sa, sb) = (nodes[j], nodes[j + 1]);
            let mid = 0.5 * (sa + sb);
            let (_, p) = spec.kernel_parts(ti, if spec.family.is_right() { ti } else { mid })?;
            let weight = SingularWeight::power(1.0 - p)?;
            // x = t_i − s: x_a belongs to node j+1, x_b to node j
            let (wa, wb) = weight.linear_panel(ti - sb, ti - sa);
            let smooth = |s: f64| -> Result<f64> {
                let (c, _) = spec.kernel_parts(ti, if spec.family.is_right() { ti } else { s })?;
                Ok(c)
            };
            sum += wa * smooth(sb)? * g[j + 1] + wb * smooth(sa)? * g[j];
        }
        out[i] = sum;
    }
    Ok(out)
}

/// True when the operator is well defined near t = 0 for this exponent.
pub fn admits_regime(family: Family, regime: Regime) -> bool {
    match regime {
        Regime::InteriorRange => true,
        _ => !family.is_abel(),
    }
}
