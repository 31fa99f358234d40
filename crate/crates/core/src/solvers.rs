//! Second-kind Volterra solves on graded meshes, and the Abel and fractional
//! Cauchy problems built on them.

use std::io::{self, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::analysis::{default_window, fit_singularity_exponent, FitResult};
use crate::data::{Antiderivative, DataFn};
use crate::error::{Error, Result};
use crate::exponent::{Regime, VariableExponent};
use crate::funclang::ScalarFunc;
use crate::inversion::{rhs_abel, rhs_fde_with};
use crate::kernels::{gamma_weight, KernelK, KernelRL, SplitKernel};
use crate::quadrature::{GradedMesh, SingularWeight};
use crate::specialfn::{digamma_unchecked, gamma_fn, EULER_GAMMA};

/// Smallest admissible `|1 + c W_ii|` in the forward substitution.
pub const ILL_CONDITIONED: f64 = 1e-8;

/// Number of interior sample points used to check that data is jet-evaluable.
const DATA_CHECK_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaMode {
    /// Divide the integral term by γ(t_i).
    GammaWeight,
    /// Identity coefficient.
    Unit,
}

/// How the solution is represented on the first panel `[0, t₁]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartBehavior {
    /// `v(0) = rhs[0]`; linear interpolation on every panel.
    Given,
    /// `v(s) ≈ v(t₁) (s/t₁)^p` on the first panel; `rhs[0]` is ignored.
    PowerLaw(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Fitted near-zero exponent of `u`, when the default window is usable.
    pub fit: Option<FitResult>,
    /// `u(0)` extrapolated linearly from the first two interior nodes.
    pub u0_extrapolated: f64,
    /// The solution is unbounded at `t = 0`.
    pub singular_origin: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGrid {
    pub mesh: GradedMesh,
    pub u: Vec<f64>,
    /// `t^{1−α(0)} u`.
    pub weighted_u: Vec<f64>,
    /// Three-point derivative estimate; NaN at `t = 0`.
    pub du_estimate: Vec<f64>,
    pub alpha0: f64,
    pub diagnostics: Diagnostics,
}

impl SolutionGrid {
    pub fn new(mesh: GradedMesh, u: Vec<f64>, alpha0: f64) -> Result<Self> {
        let nodes = mesh.nodes();
        if u.len() != nodes.len() {
            return Err(Error::param(format!("{} values for a mesh of {} nodes", u.len(), nodes.len())));
        }
        let q = 1.0 - alpha0;
        let mut weighted_u: Vec<f64> = nodes.iter().zip(&u).map(|(&t, &v)| if q == 0.0 { v } else { t.powf(q) * v }).collect();
        let singular_origin = !u[0].is_finite();
        let u0_extrapolated = extrapolate_to_zero(nodes, &u);
        if singular_origin {
            weighted_u[0] = extrapolate_to_zero(nodes, &weighted_u);
        }
        let du_estimate = derivative_estimate(nodes, &u);
        let fit = fit_singularity_exponent(nodes, &u, default_window(nodes)).ok();
        Ok(Self { mesh, u, weighted_u, du_estimate, alpha0, diagnostics: Diagnostics { fit, u0_extrapolated, singular_origin } })
    }

    pub fn nodes(&self) -> &[f64] {
        self.mesh.nodes()
    }

    /// Largest `|u(t_i) − exact(t_i)|` over the nodes with `t > 0`.
    pub fn max_error(&self, exact: impl Fn(f64) -> f64) -> f64 {
        self.nodes().iter().zip(&self.u).skip(1).map(|(&t, &v)| (v - exact(t)).abs()).fold(0.0, f64::max)
    }

    /// Largest finite `|du|` over the nodes with `t > 0`.
    pub fn max_abs_du(&self) -> f64 {
        self.du_estimate.iter().filter(|v| v.is_finite()).map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(b"t,u,weighted_u,du_estimate\n")?;
        for i in 0..self.u.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.nodes()[i],
                self.u[i],
                self.weighted_u[i],
                self.du_estimate[i]
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

fn extrapolate_to_zero(nodes: &[f64], v: &[f64]) -> f64 {
    if nodes.len() < 3 {
        return v[1];
    }
    let (t1, t2) = (nodes[1], nodes[2]);
    v[1] - t1 * (v[2] - v[1]) / (t2 - t1)
}

/// Derivative at `x` of the quadratic through three points.
fn lagrange_slope(x: [f64; 3], y: [f64; 3], at: f64) -> f64 {
    let mut d = 0.0;
    for k in 0..3 {
        let (a, b) = (x[(k + 1) % 3], x[(k + 2) % 3]);
        d += y[k] * ((at - a) + (at - b)) / ((x[k] - a) * (x[k] - b));
    }
    d
}

fn derivative_estimate(nodes: &[f64], u: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut du = vec![f64::NAN; n];
    if n < 4 {
        for i in 1..n {
            let j = if i + 1 < n { i + 1 } else { i - 1 };
            du[i] = (u[j] - u[i]) / (nodes[j] - nodes[i]);
        }
        return du;
    }
    let pick = |a: usize| ([nodes[a], nodes[a + 1], nodes[a + 2]], [u[a], u[a + 1], u[a + 2]]);
    let (x, y) = pick(1);
    du[1] = lagrange_slope(x, y, nodes[1]);
    for i in 2..n - 1 {
        let (x, y) = pick(i - 1);
        du[i] = lagrange_slope(x, y, nodes[i]);
    }
    let (x, y) = pick(n - 3);
    du[n - 1] = lagrange_slope(x, y, nodes[n - 1]);
    du
}

/// `∫_0^{t₁} (s/t₁)^p ln(t_i − s) ds`.
fn power_log_moment(t1: f64, ti: f64, p: f64) -> f64 {
    let q = p + 1.0;
    if ti == t1 {
        return t1 * (t1.ln() - digamma_unchecked(p + 2.0) - EULER_GAMMA) / q;
    }
    let rho = t1 / ti;
    let mut sum = 0.0;
    let mut rk = 1.0;
    for k in 1..200 {
        rk *= rho;
        let term = rk / (k as f64 * (k as f64 + q));
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    t1 * (ti.ln() / q - sum)
}

/// Solve `v(t_i) + c_i ∫_0^{t_i} k(s, t_i) v(s) ds = rhs_i` by forward substitution,
/// with `c_i = 1/γ(t_i)` or 1. The kernel's `ln(t−s)` part is integrated exactly
/// against the piecewise-linear interpolant of `k v`.
pub fn solve_vie2(
    e: &VariableExponent,
    mesh: &GradedMesh,
    rhs: &[f64],
    kernel: &dyn SplitKernel,
    mode: GammaMode,
    start: StartBehavior,
) -> Result<SolutionGrid> {
    let nodes = mesh.nodes();
    let n = nodes.len();
    if rhs.len() != n {
        return Err(Error::param(format!("{} right-hand-side values for a mesh of {n} nodes", rhs.len())));
    }
    let logw = SingularWeight::new(0.0, true)?;
    let with_log = kernel.has_log_part();
    let mut v = vec![0.0; n];
    let first = match start {
        StartBehavior::Given => {
            v[0] = rhs[0];
            0
        }
        StartBehavior::PowerLaw(p) => {
            if p <= -1.0 {
                return Err(Error::param(format!("start exponent must exceed -1, got {p}")));
            }
            1
        }
    };
    for i in 1..n {
        let ti = nodes[i];
        let c = match mode {
            GammaMode::GammaWeight => 1.0 / gamma_weight(e, ti)?,
            GammaMode::Unit => 1.0,
        };
        let mut known = 0.0;
        let mut diag = 0.0;
        if let StartBehavior::PowerLaw(p) = start {
            let t1 = nodes[1];
            let (a, r) = kernel.split(0.5 * t1, ti)?;
            let log_part = if with_log { a * power_log_moment(t1, ti, p) } else { 0.0 };
            let coef = log_part + r * t1 / (p + 1.0);
            if i == 1 {
                diag += coef;
            } else {
                known += coef * v[1];
            }
        }
        let mut prev = kernel.split(nodes[first], ti)?;
        for j in first..i {
            let next = kernel.split(nodes[j + 1], ti)?;
            let (xa, xb) = (ti - nodes[j + 1], ti - nodes[j]);
            let half = 0.5 * (xb - xa);
            let (la, lb) = if with_log { logw.linear_panel(xa, xb) } else { (0.0, 0.0) };
            let ca = la * next.0 + half * next.1;
            let cb = lb * prev.0 + half * prev.1;
            known += cb * v[j];
            if j + 1 == i {
                diag += ca;
            } else {
                known += ca * v[j + 1];
            }
            prev = next;
        }
        let denom = 1.0 + c * diag;
        if !(denom.abs() >= ILL_CONDITIONED) {
            return Err(Error::IllConditioned { node: i, factor: denom });
        }
        v[i] = (rhs[i] - c * known) / denom;
        if !v[i].is_finite() {
            return Err(Error::domain(format!("non-finite solution value at node {i}")));
        }
    }
    if let StartBehavior::PowerLaw(p) = start {
        v[0] = if p < 0.0 {
            f64::INFINITY
        } else if p == 0.0 {
            extrapolate_to_zero(nodes, &v)
        } else {
            0.0
        };
    }
    SolutionGrid::new(mesh.clone(), v, e.alpha0())
}

/// First-kind Abel equation `∫_0^t u(s)(t−s)^{−α(s)} ds = f(t)`.
#[derive(Clone)]
pub struct AbelProblem {
    exponent: VariableExponent,
    f: Arc<dyn DataFn>,
}

impl AbelProblem {
    pub fn new(exponent: VariableExponent, f: ScalarFunc) -> Result<Self> {
        Self::from_data(exponent, Arc::new(f))
    }

    /// Any data source with value and derivative, e.g. a forward image.
    pub fn from_data(exponent: VariableExponent, f: Arc<dyn DataFn>) -> Result<Self> {
        exponent.require_interior("the Abel equation")?;
        let horizon = exponent.horizon();
        f.value(0.0)?;
        for k in 1..=DATA_CHECK_POINTS {
            let t = horizon * k as f64 / DATA_CHECK_POINTS as f64;
            let (v, d) = (f.value(t)?, f.derivative(t)?);
            if !v.is_finite() || !d.is_finite() {
                return Err(Error::domain(format!("data or its derivative is not finite at t = {t}")));
            }
        }
        Ok(Self { exponent, f })
    }

    pub fn exponent(&self) -> &VariableExponent {
        &self.exponent
    }

    pub fn data(&self) -> &dyn DataFn {
        self.f.as_ref()
    }

    pub fn horizon(&self) -> f64 {
        self.exponent.horizon()
    }
}

/// Default mesh grading for first-kind Abel problems.
pub fn default_abel_grading(alpha0: f64) -> f64 {
    (2.0 / alpha0).max(4.0)
}

pub fn solve_abel(p: &AbelProblem, mesh: &GradedMesh) -> Result<SolutionGrid> {
    check_mesh(mesh, p.horizon())?;
    let e = &p.exponent;
    let f = p.f.as_ref();
    let nodes = mesh.nodes();
    let f0 = f.value(0.0)?;
    let mut rhs: Vec<f64> = nodes[1..]
        .par_iter()
        .map(|&t| Ok(rhs_abel(e, f, t)? / gamma_weight(e, t)?))
        .collect::<Result<_>>()?;
    rhs.insert(0, 0.0);
    let start = if f0 != 0.0 { StartBehavior::PowerLaw(e.alpha0() - 1.0) } else { StartBehavior::PowerLaw(0.0) };
    solve_vie2(e, mesh, &rhs, &KernelK(e.clone()), GammaMode::GammaWeight, start)
}

/// `D^{α(t)} u = h`, `u(0) = u0`, with the Riemann–Liouville derivative.
#[derive(Debug, Clone)]
pub struct FdeProblem {
    exponent: VariableExponent,
    h: ScalarFunc,
    u0: f64,
}

impl FdeProblem {
    pub fn new(exponent: VariableExponent, h: ScalarFunc, u0: f64) -> Result<Self> {
        match exponent.regime() {
            Regime::InteriorRange if u0 != 0.0 => Err(Error::InvalidInitialValue { u0 }),
            Regime::InteriorRange | Regime::TouchesOneAtZero => Ok(Self { exponent, h, u0 }),
            other => Err(Error::Regime(format!("the fractional Cauchy problem is not defined in regime {other}"))),
        }
    }

    pub fn exponent(&self) -> &VariableExponent {
        &self.exponent
    }

    pub fn h(&self) -> &ScalarFunc {
        &self.h
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    /// True when α(0) = 1.
    pub fn is_well_posed_for_any_u0(&self) -> bool {
        self.exponent.regime() == Regime::TouchesOneAtZero
    }
}

pub fn solve_fde(p: &FdeProblem, mesh: &GradedMesh) -> Result<SolutionGrid> {
    let e = &p.exponent;
    check_mesh(mesh, e.horizon())?;
    let big_h = Antiderivative::new(p.h.clone());
    if !p.is_well_posed_for_any_u0() {
        let abel = AbelProblem::from_data(e.clone(), Arc::new(big_h))?;
        let w = solve_abel(&abel, mesh)?;
        let u = mesh
            .nodes()
            .iter()
            .zip(&w.u)
            .map(|(&t, &wi)| Ok(gamma_fn(1.0 - e.value(t)?)? * wi))
            .collect::<Result<Vec<_>>>()?;
        return SolutionGrid::new(mesh.clone(), u, e.alpha0());
    }
    let rhs: Vec<f64> = mesh
        .nodes()
        .par_iter()
        .map(|&t| rhs_fde_with(e, &big_h, p.u0, t))
        .collect::<Result<_>>()?;
    solve_vie2(e, mesh, &rhs, &KernelRL(e.clone()), GammaMode::Unit, StartBehavior::Given)
}

fn check_mesh(mesh: &GradedMesh, horizon: f64) -> Result<()> {
    if (mesh.horizon() - horizon).abs() > 1e-12 * horizon {
        return Err(Error::param(format!("mesh horizon {} differs from problem horizon {horizon}", mesh.horizon())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funclang::parse_expr;
    use crate::kernels::{FnKernel, ZeroKernel};
    use crate::quadrature::graded_mesh;

    #[test]
    fn zero_kernel_is_identity() {
        let e = VariableExponent::constant(0.5, 1.0).unwrap();
        let mesh = graded_mesh(1.0, 8, 1.0).unwrap();
        let rhs: Vec<f64> = mesh.nodes().iter().map(|t| 1.0 + t * t).collect();
        let g = solve_vie2(&e, &mesh, &rhs, &ZeroKernel, GammaMode::Unit, StartBehavior::Given).unwrap();
        assert_eq!(g.u, rhs);
    }

    #[test]
    fn power_log_moment_series_matches_quadrature() {
        let (t1, ti, p) = (0.1, 0.35, -0.4);
        let want: f64 = crate::quadrature::TanhSinh::default()
            .integrate(0.0, t1, |s, _, _| Ok((s / t1).powf(p) * (ti - s).ln()))
            .unwrap()
            .value;
        assert!((power_log_moment(t1, ti, p) - want).abs() < 1e-13);
        let want: f64 = crate::quadrature::TanhSinh::default()
            .integrate(0.0, t1, |s, _, dr| Ok((s / t1).powf(p) * dr.ln()))
            .unwrap()
            .value;
        assert!((power_log_moment(t1, t1, p) - want).abs() < 1e-13);
    }

    #[test]
    fn synthetic_kernel_recovers_linear_solution() {
        // k(s,t) = ln(t−s) + 1, v = 1 + t
        let e = VariableExponent::constant(0.5, 1.0).unwrap();
        let mesh = graded_mesh(1.0, 128, 1.0).unwrap();
        let k = FnKernel::new(|_, _| (1.0, 1.0));
        let rhs: Vec<f64> = mesh
            .nodes()
            .iter()
            .map(|&t: &f64| {
                let il = if t > 0.0 { (t + 0.5 * t * t) * t.ln() - t - 0.75 * t * t } else { 0.0 };
                1.0 + t + il + t + 0.5 * t * t
            })
            .collect();
        let g = solve_vie2(&e, &mesh, &rhs, &k, GammaMode::Unit, StartBehavior::Given).unwrap();
        assert!(g.max_error(|t| 1.0 + t) < 1e-4);
    }

    #[test]
    fn ill_conditioned_diagonal_is_reported() {
        let e = VariableExponent::constant(0.5, 1.0).unwrap();
        let mesh = graded_mesh(1.0, 4, 1.0).unwrap();
        // W_11 = t₁/2 for the trapezoid; choose R so that 1 + R t₁/2 = 0
        let k = FnKernel::new(|_, _| (0.0, -8.0));
        let rhs = vec![1.0; 5];
        let err = solve_vie2(&e, &mesh, &rhs, &k, GammaMode::Unit, StartBehavior::Given).unwrap_err();
        assert!(matches!(err, Error::IllConditioned { node: 1, .. }));
    }

    #[test]
    fn closed_form_abel_pair() {
        let e = VariableExponent::constant(0.5, 1.0).unwrap();
        let p = AbelProblem::new(e, parse_expr("2*sqrt(t)").unwrap()).unwrap();
        let mesh = graded_mesh(1.0, 32, 4.0).unwrap();
        let g = solve_abel(&p, &mesh).unwrap();
        assert!(g.max_error(|_| 1.0) < 1e-4, "{}", g.max_error(|_| 1.0));
    }

    #[test]
    fn case_one_rejects_nonzero_initial_value() {
        let e = VariableExponent::constant(0.5, 1.0).unwrap();
        let err = FdeProblem::new(e, parse_expr("t^0.5").unwrap(), 0.5).unwrap_err();
        assert_eq!(err, Error::InvalidInitialValue { u0: 0.5 });
    }

    #[test]
    fn csv_layout() {
        let e = VariableExponent::constant(0.5, 1.0).unwrap();
        let mesh = graded_mesh(1.0, 4, 1.0).unwrap();
        let g = solve_vie2(&e, &mesh, &[1.0; 5], &ZeroKernel, GammaMode::Unit, StartBehavior::Given).unwrap();
        let csv = g.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,u,weighted_u,du_estimate"));
        assert_eq!(lines.next(), Some("0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,NaN"));
        assert_eq!(csv.lines().count(), 6);
        assert!(!csv.contains('\r'));
    }
}
