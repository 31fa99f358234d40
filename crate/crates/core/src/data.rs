//! Data functions f, h and their derivatives.
//!
//! The transforms need both the value and the first derivative of the data.
//! Besides plain expressions, two derived sources are provided: the running
//! integral `H(t) = ∫_0^t h` and the forward image `f = 𝓘 u` of a known
//! function, which is how manufactured problems are posed.

use crate::error::{Error, Result};
use crate::exponent::VariableExponent;
use crate::funclang::ScalarFunc;
use crate::operators::{eval_forward, Family, OperatorSpec};
use crate::quadrature::TanhSinh;
use crate::specialfn::{digamma_unchecked, recip_gamma};

/// A function of t with a first derivative.
pub trait DataFn: Send + Sync {
    fn value(&self, t: f64) -> Result<f64>;

    fn derivative(&self, t: f64) -> Result<f64>;

    fn values(&self, ts: &[f64]) -> Result<Vec<f64>> {
        ts.iter().map(|&t| self.value(t)).collect()
    }
}

impl DataFn for ScalarFunc {
    fn value(&self, t: f64) -> Result<f64> {
        self.eval(t)
    }

    fn derivative(&self, t: f64) -> Result<f64> {
        self.eval_d1(t)
    }
}

/// `H(t) = ∫_0^t h(s) ds`, with `H′ = h`.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    h: ScalarFunc,
    quad: TanhSinh,
}

impl Antiderivative {
    pub fn new(h: ScalarFunc) -> Self {
        Self { h, quad: TanhSinh::with_tol(1e-15) }
    }

    pub fn integrand(&self) -> &ScalarFunc {
        &self.h
    }
}

impl DataFn for Antiderivative {
    fn value(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        if let Some(c) = self.h.as_constant() {
            return Ok(c * t);
        }
        Ok(self.quad.integrate(0.0, t, |s, _, _| self.h.eval(s))?.value)
    }

    fn derivative(&self, t: f64) -> Result<f64> {
        self.h.eval(t)
    }
}

/// `f = A u` for a forward operator `A` and an expression `u`, with the
/// derivative obtained by differentiating under the integral after `s → t − y`.
#[derive(Debug, Clone)]
pub struct ForwardImage {
    spec: OperatorSpec,
    u: ScalarFunc,
    accuracy: f64,
}

impl ForwardImage {
    pub fn new(spec: OperatorSpec, u: ScalarFunc, accuracy: f64) -> Result<Self> {
        if spec.family() == Family::RLGeneral {
            return Err(Error::param("forward images are not available for rl-general"));
        }
        Ok(Self { spec, u, accuracy })
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    fn exponent(&self) -> &VariableExponent {
        self.spec.single().expect("checked at construction")
    }
}

impl DataFn for ForwardImage {
    fn value(&self, t: f64) -> Result<f64> {
        eval_forward(&self.spec, &self.u, t, self.accuracy)
    }

    fn derivative(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Err(Error::domain(format!("forward-image derivative needs x > 0, got {x}")));
        }
        let e = self.exponent();
        let sigma = self.spec.sigma();
        let family = self.spec.family();
        let u0 = self.u.eval(0.0)?;
        let ax = e.jet(x)?;
        let a0 = e.value(0.0)?;
        // Boundary term u(0) k(x, 0) and the integrand of the remaining part, in y = x − s.
        let (boundary, integrand): (f64, Box<dyn Fn(f64, f64) -> Result<f64> + '_>) = match family {
            Family::AbelLeft => (
                u0 * x.powf(-a0),
                Box::new(move |y, s| {
                    let uj = self.u.eval_jet(s)?;
                    let a = e.jet(s)?;
                    Ok((uj.d1 - uj.v * a.d1 * y.ln()) * y.powf(-a.v))
                }),
            ),
            Family::AbelRight => (
                u0 * x.powf(-ax.v),
                Box::new(move |y, s| {
                    let uj = self.u.eval_jet(s)?;
                    Ok((uj.d1 - uj.v * ax.d1 * y.ln()) * y.powf(-ax.v))
                }),
            ),
            Family::RLLeft | Family::TemperedLeft => (
                u0 * x.powf(a0 - 1.0) * recip_gamma(a0) * (-sigma * x).exp(),
                Box::new(move |y, s| {
                    let uj = self.u.eval_jet(s)?;
                    let a = e.jet(s)?;
                    let k = y.powf(a.v - 1.0) * recip_gamma(a.v) * (-sigma * y).exp();
                    Ok(k * (uj.d1 + uj.v * a.d1 * (y.ln() - digamma_unchecked(a.v))))
                }),
            ),
            Family::RLRight | Family::TemperedRight => (
                u0 * x.powf(ax.v - 1.0) * recip_gamma(ax.v) * (-sigma * x).exp(),
                Box::new(move |y, s| {
                    let uj = self.u.eval_jet(s)?;
                    let k = y.powf(ax.v - 1.0) * recip_gamma(ax.v) * (-sigma * y).exp();
                    Ok(k * (uj.d1 + uj.v * ax.d1 * (y.ln() - digamma_unchecked(ax.v))))
                }),
            ),
            Family::RLGeneral => unreachable!("rejected at construction"),
        };
        let ts = TanhSinh { rel_tol: 1e-15, abs_tol: 0.05 * self.accuracy, max_level: 10 };
        let r = ts.integrate(0.0, x, |_, y, s| integrand(y, s))?;
        Ok(boundary + r.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funclang::parse_expr;

    #[test]
    fn antiderivative_of_power() {
        let h = Antiderivative::new(parse_expr("t^0.5").unwrap());
        let v = h.value(0.64).unwrap();
        assert!((v - 0.64f64.powf(1.5) / 1.5).abs() < 1e-14);
        assert_eq!(h.derivative(0.64).unwrap(), 0.8);
        let c = Antiderivative::new(parse_expr("2").unwrap());
        assert_eq!(c.value(0.3).unwrap(), 0.6);
    }

    #[test]
    fn forward_image_derivative_matches_closed_form() {
        // α = 0.5, u ≡ 1: f = 2√t, f' = 1/√t
        let e = VariableExponent::constant(0.5, 1.0).unwrap();
        let spec = OperatorSpec::new(Family::AbelLeft, e).unwrap();
        let f = ForwardImage::new(spec, ScalarFunc::constant(1.0), 1e-13).unwrap();
        assert!((f.value(0.25).unwrap() - 1.0).abs() < 1e-12);
        assert!((f.derivative(0.25).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn forward_image_derivative_matches_finite_differences() {
        let e = VariableExponent::new(parse_expr("0.6 - 0.1*t").unwrap(), 1.0).unwrap();
        for family in [Family::AbelLeft, Family::AbelRight, Family::RLLeft, Family::RLRight] {
            let spec = OperatorSpec::new(family, e.clone()).unwrap();
            let f = ForwardImage::new(spec, parse_expr("1 + t").unwrap(), 1e-13).unwrap();
            let x = 0.5;
            let h = 1e-4;
            let fd = |h: f64| (f.value(x + h).unwrap() - f.value(x - h).unwrap()) / (2.0 * h);
            let rich = (4.0 * fd(h / 2.0) - fd(h)) / 3.0;
            let d = f.derivative(x).unwrap();
            assert!((d - rich).abs() < 1e-7 * d.abs().max(1.0), "{family}: {d} vs {rich}");
        }
    }
}
