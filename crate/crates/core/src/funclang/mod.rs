//! A small expression language for scalar functions of `t`.
//!
//! Expressions are parsed once and evaluated either as plain values or as
//! [`Jet2`] values carrying the first and second derivative, computed by
//! forward-mode differentiation of the tree. The grammar is documented in
//! `docs/expression-grammar.md`.

mod ast;
mod jet;
mod parser;

use std::fmt;
use std::str::FromStr;

pub use ast::{BinOp, Expr, Func};
pub use jet::Jet2;

use crate::error::{Error, Result};

/// A parsed, immutable scalar function of `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFunc {
    source: String,
    ast: Expr,
}

impl ScalarFunc {
    /// Parses and constant-folds `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let ast = parser::parse(text)?.fold();
        Ok(Self { source: text.to_string(), ast })
    }

    /// Parses without constant folding.
    pub fn parse_unoptimized(text: &str) -> Result<Self> {
        Ok(Self { source: text.to_string(), ast: parser::parse(text)? })
    }

    pub fn constant(c: f64) -> Self {
        Self { source: format!("{c:?}"), ast: Expr::Const(c) }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    /// Returns the folded constant when the expression does not depend on `t`.
    pub fn as_constant(&self) -> Option<f64> {
        match self.ast {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let v = self.ast.eval(t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("`{}` is not finite at t = {t}", self.source)))
        }
    }

    pub fn eval_jet(&self, t: f64) -> Result<Jet2> {
        let j = self.ast.eval(Jet2::variable(t))?;
        if j.is_finite() {
            Ok(j)
        } else {
            Err(Error::domain(format!("`{}` has a non-finite derivative at t = {t}", self.source)))
        }
    }

    /// First derivative only; the second may overflow.
    pub fn eval_d1(&self, t: f64) -> Result<f64> {
        let j = self.ast.eval(Jet2::variable(t))?;
        if j.v.is_finite() && j.d1.is_finite() {
            Ok(j.d1)
        } else {
            Err(Error::domain(format!("`{}` has a non-finite derivative at t = {t}", self.source)))
        }
    }
}

/// Parses an expression into a [`ScalarFunc`].
pub fn parse_expr(text: &str) -> Result<ScalarFunc> {
    ScalarFunc::parse(text)
}

/// Value, first and second derivative of `f` at `t`.
pub fn eval_jet(f: &ScalarFunc, t: f64) -> Result<Jet2> {
    f.eval_jet(t)
}

impl FromStr for ScalarFunc {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for ScalarFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let f = parse_expr("0.5 + 0.25*t").unwrap();
        assert_eq!(f.eval(1.0).unwrap(), 0.75);
        let g = parse_expr("2^-1").unwrap();
        assert_eq!(g.as_constant(), Some(0.5));
        let h = parse_expr("2^3^2").unwrap();
        assert_eq!(h.as_constant(), Some(512.0));
        let k = parse_expr("-t^2").unwrap();
        assert_eq!(k.eval(3.0).unwrap(), -9.0);
        let p = parse_expr("pow(t, 3) - 1e-1*sqrt(t)").unwrap();
        assert!((p.eval(4.0).unwrap() - 63.8).abs() < 1e-12);
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse_expr("0.5 + * t") {
            Err(Error::Syntax { pos, message }) => {
                assert_eq!(pos, 6);
                assert!(message.contains("'*'"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_expr("(t + 1"), Err(Error::Syntax { pos: 6, .. })));
        assert!(matches!(parse_expr(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expr("t $ 2"), Err(Error::Syntax { pos: 2, .. })));
    }

    #[test]
    fn unknown_identifier() {
        match parse_expr("1 + foo(t)") {
            Err(Error::UnknownIdentifier { pos, name }) => {
                assert_eq!(pos, 4);
                assert_eq!(name, "foo");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_expr("s"), Err(Error::UnknownIdentifier { .. })));
    }

    #[test]
    fn jet_examples() {
        let f = parse_expr("1 - 0.5*t^2").unwrap();
        let j = f.eval_jet(0.0).unwrap();
        assert_eq!((j.v, j.d1, j.d2), (1.0, 0.0, -1.0));
        let g = parse_expr("0.5 + 0.25*t").unwrap();
        let j = g.eval_jet(2.0).unwrap();
        assert_eq!((j.v, j.d1, j.d2), (1.0, 0.25, 0.0));
    }

    #[test]
    fn domain_errors() {
        let f = parse_expr("ln(t)").unwrap();
        assert!(matches!(f.eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(f.eval_jet(-1.0), Err(Error::Domain(_))));
        let g = parse_expr("t^0.5").unwrap();
        assert_eq!(g.eval(0.0).unwrap(), 0.0);
        assert!(g.eval(-1.0).is_err());
        // value exists at 0 but the derivative does not
        assert!(g.eval_jet(0.0).is_err());
        let h = parse_expr("1/t").unwrap();
        assert!(h.eval(0.0).is_err());
        let k = parse_expr("t^2").unwrap();
        assert_eq!(k.eval(-3.0).unwrap(), 9.0);
    }

    #[test]
    fn display_round_trip() {
        for src in ["0.5 + 0.25*t", "1 - 0.5*t^2", "exp(t)*sin(t)", "-(t - 2)^-3", "pow(t,2)/cos(1e-3*t)"] {
            let f = ScalarFunc::parse_unoptimized(src).unwrap();
            let g = ScalarFunc::parse_unoptimized(&f.to_string()).unwrap();
            assert_eq!(f.ast(), g.ast(), "{src}");
        }
    }
}
