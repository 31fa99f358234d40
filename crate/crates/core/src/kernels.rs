//! Second-kind kernels produced by the approximate inversion.
//!
//! Every kernel here has the form `k(s, t) = A(s, t) ln(t − s) + R(s, t)` with
//! `A` and `R` bounded on the closed triangle, which is what the product
//! quadrature in the solvers relies on.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exponent::{TwoVarExponent, VariableExponent, ENDPOINT_TOL};
use crate::quadrature::TanhSinh;
use crate::specialfn::{beta_unchecked, digamma_unchecked, recip_gamma};

/// Below this distance `(α(t) − α(s))/(t − s)` is replaced by its Taylor expansion.
const TAYLOR_GAP: f64 = 1e-5;

pub const DEFAULT_Z_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMethod {
    Analytic,
    ZQuadrature,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: f64,
    /// Coefficient of ln(t − s), or 0 when not separated.
    pub log_singular_part: f64,
    pub method: KernelMethod,
}

/// γ(t) = Γ(α(t)) Γ(1 − α(t)) = π / sin(π α(t)).
pub fn gamma_weight(e: &VariableExponent, t: f64) -> Result<f64> {
    let a = e.value(t)?;
    if a >= 1.0 - ENDPOINT_TOL || a <= ENDPOINT_TOL {
        return Err(Error::Regime(format!("gamma(t) diverges at t = {t} where alpha = {a}")));
    }
    Ok(PI / (PI * a).sin())
}

fn check_pair(s: f64, t: f64, what: &str) -> Result<()> {
    if !(0.0 <= s && s < t) {
        return Err(Error::param(format!("{what} needs 0 <= s < t, got s = {s}, t = {t}")));
    }
    Ok(())
}

/// `(α(t) − α(s), (α(t) − α(s))/(t − s), α′(t), α(t))` with a Taylor quotient near the diagonal.
fn exponent_gap(e: &VariableExponent, s: f64, t: f64) -> Result<(f64, f64, f64, f64)> {
    let at = e.jet(t)?;
    let d = t - s;
    if d < TAYLOR_GAP {
        let q = at.d1 - 0.5 * at.d2 * d;
        let delta = if d == 0.0 { 0.0 } else { at.v - e.value(s)? };
        return Ok((delta, q, at.d1, at.v));
    }
    let delta = at.v - e.value(s)?;
    Ok((delta, delta / d, at.d1, at.v))
}

fn power(delta: f64, d: f64) -> f64 {
    if d == 0.0 {
        1.0
    } else {
        (delta * d.ln()).exp()
    }
}

/// `(A, R)` for `K(s,t) = ∂_t[B(α(t), 1−α(s)) (t−s)^{α(t)−α(s)}]`, valid for `s ≤ t`.
pub fn split_k(e: &VariableExponent, s: f64, t: f64) -> Result<(f64, f64)> {
    let (delta, q, da, at) = exponent_gap(e, s, t)?;
    let as_ = at - delta;
    let b = beta_unchecked(at, 1.0 - as_);
    let db = da * b * (digamma_unchecked(at) - digamma_unchecked(1.0 + delta));
    let p = power(delta, t - s);
    Ok((b * p * da, db * p + b * p * q))
}

/// Analytic evaluation of K via the digamma function.
pub fn kernel_k(e: &VariableExponent, s: f64, t: f64) -> Result<KernelEval> {
    e.require_interior("kernel K")?;
    check_pair(s, t, "kernel K")?;
    let (a, r) = split_k(e, s, t)?;
    Ok(KernelEval { value: a * (t - s).ln() + r, log_singular_part: a, method: KernelMethod::Analytic })
}

/// `(A, R)` for `∂_t[(t−y)^{α(t)−α(y)} / Γ(1+α(t)−α(y))]`, valid for `y ≤ t`.
pub fn split_rl(e: &VariableExponent, y: f64, t: f64) -> Result<(f64, f64)> {
    let (delta, q, da, _) = exponent_gap(e, y, t)?;
    let pg = power(delta, t - y) * recip_gamma(1.0 + delta);
    Ok((da * pg, pg * (q - da * digamma_unchecked(1.0 + delta))))
}

/// Kernel of the second-kind equation for the Riemann–Liouville problem.
pub fn kernel_rl(e: &VariableExponent, y: f64, t: f64) -> Result<KernelEval> {
    check_pair(y, t, "R-L kernel")?;
    let (a, r) = split_rl(e, y, t)?;
    Ok(KernelEval { value: a * (t - y).ln() + r, log_singular_part: a, method: KernelMethod::Analytic })
}

/// L(s,t): t-derivative of `∫_0^1 (1−z)^{α(u)−1} z^{−α(u)} dz`, `u = (t−s)z + s`,
/// computed by differentiating under the integral.
pub fn kernel_l(e: &VariableExponent, s: f64, t: f64, z_tol: f64) -> Result<KernelEval> {
    e.require_interior("kernel L")?;
    if !(0.0 <= s && s <= t) {
        return Err(Error::param(format!("kernel L needs 0 <= s <= t, got s = {s}, t = {t}")));
    }
    if e.is_constant() {
        return Ok(KernelEval { value: 0.0, log_singular_part: 0.0, method: KernelMethod::ZQuadrature });
    }
    let d = t - s;
    let ts = TanhSinh { rel_tol: z_tol, abs_tol: 1e-300, max_level: 12 };
    let r = ts.integrate(0.0, 1.0, |z, zl, zr| {
        let a = e.jet(d * z + s)?;
        let (lz, lzr) = (zl.ln(), zr.ln());
        Ok(((a.v - 1.0) * lzr + (1.0 - a.v) * lz).exp() * a.d1 * (lzr - lz))
    })?;
    check_z(r.error, r.value, z_tol, "kernel L", s, t)?;
    Ok(KernelEval { value: r.value, log_singular_part: 0.0, method: KernelMethod::ZQuadrature })
}

fn check_z(err: f64, value: f64, tol: f64, what: &str, s: f64, t: f64) -> Result<()> {
    if err > 100.0 * tol * value.abs().max(1.0) {
        return Err(Error::QuadratureFailure(format!(
            "{what} z-integral at (s, t) = ({s}, {t}) stalled with error {err:e}"
        )));
    }
    Ok(())
}

/// ∂_t M(y,t) for the general two-variable R-L operator, by differentiating
/// under the z-integral.
pub fn kernel_m_dt(alpha: &dyn TwoVarExponent, y: f64, t: f64, z_tol: f64) -> Result<KernelEval> {
    check_pair(y, t, "kernel dM/dt")?;
    let d = t - y;
    let ld = d.ln();
    let ts = TanhSinh { rel_tol: z_tol, abs_tol: 1e-300, max_level: 12 };
    // Returns (M integrand, coefficient of ln(t−y), remaining part of ∂_t ln M-integrand).
    let parts = |z: f64, zl: f64, zr: f64| -> Result<(f64, f64, f64)> {
        let u = d * z + y;
        let (a1, g11, g12) = alpha.grad(u, t)?;
        let (a2, g21, g22) = alpha.grad(u, y)?;
        let a1p = g11 * z + g12;
        let a2p = g21 * z;
        let (lz, lzr) = (zl.ln(), zr.ln());
        let f = ((a2 - a1) * ld - a1 * lzr + (a2 - 1.0) * lz).exp() * recip_gamma(1.0 - a1) * recip_gamma(a2);
        // (α(u,y) − α(u,t))/(t − y), averaged slope near the diagonal
        let gap = if d < TAYLOR_GAP { -0.5 * (g12 + g22) } else { (a2 - a1) / d };
        let rest = gap - a1p * lzr + a2p * lz + a1p * digamma_unchecked(1.0 - a1) - a2p * digamma_unchecked(a2);
        Ok((f, a2p - a1p, rest))
    };
    let r = ts.integrate(0.0, 1.0, |z, zl, zr| {
        let (f, a, rest) = parts(z, zl, zr)?;
        Ok(f * (a * ld + rest))
    })?;
    check_z(r.error, r.value, z_tol, "kernel dM/dt", y, t)?;
    let a = ts.integrate(0.0, 1.0, |z, zl, zr| {
        let (f, a, _) = parts(z, zl, zr)?;
        Ok(f * a)
    })?;
    Ok(KernelEval { value: r.value, log_singular_part: a.value, method: KernelMethod::ZQuadrature })
}

/// Richardson-extrapolated central difference in t of `F(t)`.
pub fn richardson_dt(mut f: impl FnMut(f64) -> Result<f64>, t: f64, h: f64) -> Result<f64> {
    let mut d = |h: f64| -> Result<f64> { Ok((f(t + h)? - f(t - h)?) / (2.0 * h)) };
    let d1 = d(h)?;
    let d2 = d(0.5 * h)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Cross-check mode: K by finite differences of `B(α(t),1−α(s)) (t−s)^{α(t)−α(s)}`.
pub fn kernel_k_fd(e: &VariableExponent, s: f64, t: f64) -> Result<KernelEval> {
    check_pair(s, t, "kernel K")?;
    let as_ = e.value(s)?;
    let h = 1e-3 * (t - s);
    let value = richardson_dt(
        |tt| {
            let at = e.value(tt)?;
            Ok(beta_unchecked(at, 1.0 - as_) * ((at - as_) * (tt - s).ln()).exp())
        },
        t,
        h,
    )?;
    Ok(KernelEval { value, log_singular_part: 0.0, method: KernelMethod::FiniteDifference })
}

/// A kernel split as `A(s,t) ln(t−s) + R(s,t)`, evaluable on the closed triangle.
pub trait SplitKernel: Send + Sync {
    fn split(&self, s: f64, t: f64) -> Result<(f64, f64)>;

    fn has_log_part(&self) -> bool {
        true
    }
}

/// K from the Abel inversion.
#[derive(Debug, Clone)]
pub struct KernelK(pub VariableExponent);

impl SplitKernel for KernelK {
    fn split(&self, s: f64, t: f64) -> Result<(f64, f64)> {
        split_k(&self.0, s, t)
    }
}

/// The Riemann–Liouville second-kind kernel.
#[derive(Debug, Clone)]
pub struct KernelRL(pub VariableExponent);

impl SplitKernel for KernelRL {
    fn split(&self, s: f64, t: f64) -> Result<(f64, f64)> {
        split_rl(&self.0, s, t)
    }
}

/// L, which is bounded and has no logarithmic part.
#[derive(Debug, Clone)]
pub struct KernelL {
    pub exponent: VariableExponent,
    pub z_tol: f64,
}

impl SplitKernel for KernelL {
    fn split(&self, s: f64, t: f64) -> Result<(f64, f64)> {
        Ok((0.0, kernel_l(&self.exponent, s, t, self.z_tol)?.value))
    }

    fn has_log_part(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroKernel;

impl SplitKernel for ZeroKernel {
    fn split(&self, _: f64, _: f64) -> Result<(f64, f64)> {
        Ok((0.0, 0.0))
    }

    fn has_log_part(&self) -> bool {
        false
    }
}

/// Kernel given by a closure returning `(A, R)`.
#[derive(Clone)]
pub struct FnKernel(pub Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>);

impl FnKernel {
    pub fn new(f: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }
}

impl SplitKernel for FnKernel {
    fn split(&self, s: f64, t: f64) -> Result<(f64, f64)> {
        Ok((self.0)(s, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{ClosureExponent2, LiftedExponent, Slot};
    use crate::funclang::parse_expr;
    use crate::specialfn::EULER_GAMMA;

    fn exp_of(src: &str) -> VariableExponent {
        VariableExponent::new(parse_expr(src).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn gamma_weight_examples() {
        assert!((gamma_weight(&exp_of("0.5"), 0.3).unwrap() - PI).abs() < 1e-15);
        let g = gamma_weight(&exp_of("0.5 + 0.25*t"), 1.0).unwrap();
        assert!((g - PI * 2f64.sqrt()).abs() < 1e-12);
        assert!(gamma_weight(&exp_of("1 - 0.5*t^2"), 0.0).is_err());
    }

    #[test]
    fn constant_exponent_annihilates() {
        let e = exp_of("0.3");
        assert_eq!(kernel_k(&e, 0.2, 0.6).unwrap().value, 0.0);
        assert_eq!(kernel_rl(&e, 0.2, 0.6).unwrap().value, 0.0);
        assert_eq!(kernel_l(&e, 0.2, 0.6, 1e-12).unwrap().value, 0.0);
        let c = ClosureExponent2::new(|_, _| (0.4, 0.0, 0.0));
        assert_eq!(kernel_m_dt(&c, 0.2, 0.7, 1e-12).unwrap().value, 0.0);
    }

    #[test]
    fn diagonal_limits() {
        let e = exp_of("0.5 + 0.1*t");
        let t = 0.6;
        let g = gamma_weight(&e, t).unwrap();
        let a = 0.56;
        let (ak, rk) = split_k(&e, t, t).unwrap();
        assert!((ak - g * 0.1).abs() < 1e-14);
        assert!((rk - g * 0.1 * (digamma_unchecked(a) + EULER_GAMMA + 1.0)).abs() < 1e-13);
        let (ar, rr) = split_rl(&e, t, t).unwrap();
        assert!((ar - 0.1).abs() < 1e-15);
        assert!((rr - 0.1 * (1.0 + EULER_GAMMA)).abs() < 1e-14);
        // the split is continuous across the Taylor switch
        let (a1, r1) = split_k(&e, t - 0.99 * TAYLOR_GAP, t).unwrap();
        let (a2, r2) = split_k(&e, t - 1.01 * TAYLOR_GAP, t).unwrap();
        assert!((a1 - a2).abs() < 1e-6 && (r1 - r2).abs() < 1e-6);
    }

    #[test]
    fn analytic_matches_fd_mode() {
        let e = exp_of("0.5 + 0.1*t");
        let k = kernel_k(&e, 0.2, 0.6).unwrap().value;
        let fd = kernel_k_fd(&e, 0.2, 0.6).unwrap().value;
        assert!((k - fd).abs() < 1e-8 * k.abs(), "{k} vs {fd}");
    }

    #[test]
    fn m_dt_reduces_to_rl_kernel() {
        let a = exp_of("0.5 + 0.2*t");
        let b = exp_of("0.5 - 0.2*t");
        let lifted = LiftedExponent { exponent: a, slot: Slot::Second };
        let m = kernel_m_dt(&lifted, 0.2, 0.7, 1e-13).unwrap();
        let rl = kernel_rl(&b, 0.2, 0.7).unwrap();
        assert!((m.value - rl.value).abs() < 1e-9, "{} vs {}", m.value, rl.value);
        assert!((m.log_singular_part - rl.log_singular_part).abs() < 1e-9);
    }
}
