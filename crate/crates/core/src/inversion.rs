//! Right-hand-side transforms and numerical checks of the composition identities.

use rayon::prelude::*;

use crate::data::{Antiderivative, DataFn, ForwardImage};
use crate::error::{Error, Result};
use crate::exponent::{Regime, VariableExponent};
use crate::funclang::ScalarFunc;
use crate::kernels::{gamma_weight, richardson_dt, KernelK, KernelL, SplitKernel, DEFAULT_Z_TOL};
use crate::operators::{Family, OperatorSpec};
use crate::quadrature::{weighted_integral, GradedMesh, SingularWeight, TanhSinh};
use crate::specialfn::{digamma_unchecked, recip_gamma};

/// Below this t the c₀ terms use their t → 0⁺ limits.
const LIMIT_T: f64 = 1e-14;

/// Quadrature accuracy of the nested composition; the finite difference
/// amplifies it by about `1/(10⁻³ t)`.
const INNER_ACCURACY: f64 = 1e-13;

/// `D̂^{α(t)} f(t) = ∂_t ∫_0^t f(t−s) s^{α(t)−1} ds`, differentiated under the integral.
pub fn rhs_abel(e: &VariableExponent, f: &dyn DataFn, t: f64) -> Result<f64> {
    e.require_interior("the Abel transform")?;
    if t < 0.0 {
        return Err(Error::param(format!("rhs_abel needs t >= 0, got {t}")));
    }
    let f0 = f.value(0.0)?;
    if t == 0.0 {
        if f0 != 0.0 {
            return Err(Error::domain("the transformed data is infinite at t = 0 when f(0) != 0"));
        }
        return Ok(0.0);
    }
    let a = e.jet(t)?;
    let beta = 1.0 - a.v;
    let mut value = weighted_integral(t, &SingularWeight::power(beta)?, |_, d| f.derivative(d))?;
    if f0 != 0.0 {
        value += f0 * ((a.v - 1.0) * t.ln()).exp();
    }
    if a.d1 != 0.0 {
        value += a.d1 * weighted_integral(t, &SingularWeight::new(beta, true)?, |_, d| f.value(d))?;
    }
    Ok(value)
}

/// `D̂^{1−α(t)}(∫_0^t h + c₀)`.
pub fn rhs_fde(e: &VariableExponent, h: &ScalarFunc, c0: f64, t: f64) -> Result<f64> {
    rhs_fde_with(e, &Antiderivative::new(h.clone()), c0, t)
}

/// As [`rhs_fde`], with the running integral `H` (value H, derivative h) supplied.
pub fn rhs_fde_with(e: &VariableExponent, big_h: &dyn DataFn, c0: f64, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::param(format!("rhs_fde needs t >= 0, got {t}")));
    }
    let touches_one = e.regime() == Regime::TouchesOneAtZero;
    if t == 0.0 {
        return match (touches_one, c0 == 0.0) {
            (true, _) => Ok(c0),
            (false, true) => Ok(0.0),
            (false, false) => Err(Error::domain("the transformed data is infinite at t = 0 when c0 != 0")),
        };
    }
    let a = e.jet(t)?;
    let mut value = 0.0;
    if c0 != 0.0 {
        let lt = t.ln();
        let (t_am1, t_a_ln) = if t < LIMIT_T {
            (if touches_one { 1.0 } else { ((a.v - 1.0) * lt).exp() }, 0.0)
        } else {
            (((a.v - 1.0) * lt).exp(), (a.v * lt).exp() * lt)
        };
        let t_a = (a.v * lt).exp();
        let rg1 = recip_gamma(1.0 + a.v);
        value += c0 * (t_am1 * recip_gamma(a.v) + a.d1 * t_a_ln * rg1 - t_a * a.d1 * digamma_unchecked(1.0 + a.v) * rg1);
    }
    let beta = 1.0 - a.v;
    let psi = digamma_unchecked(a.v);
    let mut hpart = weighted_integral(t, &SingularWeight::power(beta)?, |_, d| {
        let hv = big_h.derivative(d)?;
        if a.d1 == 0.0 {
            Ok(hv)
        } else {
            Ok(hv - a.d1 * psi * big_h.value(d)?)
        }
    })?;
    if a.d1 != 0.0 {
        hpart += a.d1 * weighted_integral(t, &SingularWeight::new(beta, true)?, |_, d| big_h.value(d))?;
    }
    Ok(value + hpart * recip_gamma(a.v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    /// D̂ applied after the left Abel operator; second-kind kernel K.
    AbelLeftThenDhat,
    /// D applied after the right Abel operator; second-kind kernel L.
    AbelRightThenD,
}

/// Per-node `|LHS − RHS|` of the composition identity at the interior mesh nodes.
///
/// The left side differentiates the nested composition numerically; the right
/// side is `γ g` plus product quadrature of the second-kind kernel against `g`.
pub fn compose_residuals(e: &VariableExponent, g: &ScalarFunc, mesh: &GradedMesh, which: Composition) -> Result<Vec<f64>> {
    e.require_interior("the composition identity")?;
    let nodes = mesh.nodes();
    let gv = g.values(nodes)?;
    if gv.iter().all(|&v| v == 0.0) && g.as_constant() == Some(0.0) {
        return Ok(vec![0.0; nodes.len().saturating_sub(2)]);
    }
    let (inner_family, kernel): (Family, Box<dyn SplitKernel>) = match which {
        Composition::AbelLeftThenDhat => (Family::AbelLeft, Box::new(KernelK(e.clone()))),
        Composition::AbelRightThenD => {
            (Family::AbelRight, Box::new(KernelL { exponent: e.clone(), z_tol: DEFAULT_Z_TOL }))
        }
    };
    let inner = ForwardImage::new(OperatorSpec::new(inner_family, e.clone())?, g.clone(), INNER_ACCURACY)?;
    let outer_exponent = |t: f64, s: f64| -> Result<f64> {
        match which {
            Composition::AbelLeftThenDhat => Ok(e.value(t)? - 1.0),
            Composition::AbelRightThenD => Ok(e.value(s)? - 1.0),
        }
    };
    let ts = TanhSinh { rel_tol: INNER_ACCURACY, abs_tol: INNER_ACCURACY, max_level: 9 };
    let composed = |t: f64| -> Result<f64> {
        let f = |s: f64, d: f64| -> Result<f64> { Ok((outer_exponent(t, s)? * d.ln()).exp() * inner.value(s)?) };
        let left = ts.integrate(0.0, 0.5 * t, |s, _, _| f(s, t - s))?;
        let right = ts.integrate(0.5 * t, t, |s, _, dr| f(s, dr))?;
        Ok(left.value + right.value)
    };
    (1..nodes.len() - 1)
        .into_par_iter()
        .map(|i| {
            let t = nodes[i];
            let lhs = richardson_dt(composed, t, 1e-3 * t)?;
            let rhs = gamma_weight(e, t)? * gv[i] + kernel_quadrature(kernel.as_ref(), nodes, i, &gv)?;
            Ok((lhs - rhs).abs())
        })
        .collect()
}

/// Maximum composition residual over the interior mesh nodes.
pub fn compose_residual(e: &VariableExponent, g: &ScalarFunc, mesh: &GradedMesh, which: Composition) -> Result<f64> {
    Ok(compose_residuals(e, g, mesh, which)?.into_iter().fold(0.0, f64::max))
}

/// `∫_0^{t_i} k(s, t_i) v(s) ds` by product-trapezoidal weights with the log part integrated exactly.
pub(crate) fn kernel_quadrature(kernel: &dyn SplitKernel, nodes: &[f64], i: usize, v: &[f64]) -> Result<f64> {
    let ti = nodes[i];
    let logw = SingularWeight::new(0.0, true)?;
    let with_log = kernel.has_log_part();
    let mut sum = 0.0;
    let mut prev = kernel.split(nodes[0], ti)?;
    for j in 0..i {
        let next = kernel.split(nodes[j + 1], ti)?;
        let (xa, xb) = (ti - nodes[j + 1], ti - nodes[j]);
        let half = 0.5 * (xb - xa);
        sum += half * (next.1 * v[j + 1] + prev.1 * v[j]);
        if with_log {
            let (la, lb) = logw.linear_panel(xa, xb);
            sum += la * next.0 * v[j + 1] + lb * prev.0 * v[j];
        }
        prev = next;
    }
    Ok(sum)
}
