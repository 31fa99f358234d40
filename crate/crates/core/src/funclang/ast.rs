use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::jet::Jet2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Pow,
}

/// Expression tree over the single variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Arithmetic needed by the tree walker; implemented for plain values and jets.
pub(crate) trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn lift(c: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, c: f64) -> Self;
    fn pow(self, e: Self) -> Self;
}

impl Scalar for f64 {
    fn lift(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, c: f64) -> Self {
        f64::powf(self, c)
    }
    fn pow(self, e: Self) -> Self {
        f64::powf(self, e)
    }
}

impl Scalar for Jet2 {
    fn lift(c: f64) -> Self {
        Jet2::constant(c)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        Jet2::sin(self)
    }
    fn cos(self) -> Self {
        Jet2::cos(self)
    }
    fn exp(self) -> Self {
        Jet2::exp(self)
    }
    fn ln(self) -> Self {
        Jet2::ln(self)
    }
    fn sqrt(self) -> Self {
        Jet2::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        Jet2::powi(self, n)
    }
    fn powf(self, c: f64) -> Self {
        Jet2::powf(self, c)
    }
    fn pow(self, e: Self) -> Self {
        Jet2::pow(self, e)
    }
}

fn small_integer(c: f64) -> Option<i32> {
    (c.fract() == 0.0 && c.abs() <= 64.0).then_some(c as i32)
}

impl Expr {
    pub(crate) fn eval<S: Scalar>(&self, t: S) -> Result<S> {
        Ok(match self {
            Expr::Const(c) => S::lift(*c),
            Expr::Var => t,
            Expr::Neg(a) => -a.eval(t)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval(t)?;
                match op {
                    BinOp::Add => x + b.eval(t)?,
                    BinOp::Sub => x - b.eval(t)?,
                    BinOp::Mul => x * b.eval(t)?,
                    BinOp::Div => {
                        let y = b.eval(t)?;
                        if y.value() == 0.0 {
                            return Err(Error::domain("division by zero"));
                        }
                        x / y
                    }
                    BinOp::Pow => Self::power(x, b, t)?,
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(t)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Ln => {
                        if x.value() <= 0.0 {
                            return Err(Error::domain(format!("ln of non-positive value {}", x.value())));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x.value() < 0.0 {
                            return Err(Error::domain(format!("sqrt of negative value {}", x.value())));
                        }
                        x.sqrt()
                    }
                    Func::Pow => unreachable!("pow(a, b) parses to a binary node"),
                }
            }
        })
    }

    fn power<S: Scalar>(base: S, exponent: &Expr, t: S) -> Result<S> {
        if let Expr::Const(c) = exponent {
            if let Some(n) = small_integer(*c) {
                if n < 0 && base.value() == 0.0 {
                    return Err(Error::domain("zero raised to a negative power"));
                }
                return Ok(base.powi(n));
            }
            if base.value() > 0.0 || (base.value() == 0.0 && *c > 0.0) {
                return Ok(base.powf(*c));
            }
            return Err(Error::domain(format!(
                "non-integer power {c} of non-positive base {}",
                base.value()
            )));
        }
        let e = exponent.eval(t)?;
        if base.value() > 0.0 {
            Ok(base.pow(e))
        } else {
            Err(Error::domain(format!("variable power of non-positive base {}", base.value())))
        }
    }

    /// Constant folding: evaluates every subtree that does not mention `t`.
    pub fn fold(&self) -> Expr {
        let folded = match self {
            Expr::Const(_) | Expr::Var => return self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.fold())),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.fold()), Box::new(b.fold())),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.fold())),
        };
        if folded.is_constant() {
            if let Ok(v) = folded.eval(0.0_f64) {
                if v.is_finite() {
                    return Expr::Const(v);
                }
            }
        }
        folded
    }

    fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "(-{:?})", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => f.write_str("t"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                    Func::Ln => "ln",
                    Func::Sqrt => "sqrt",
                    Func::Pow => "pow",
                };
                write!(f, "{name}({a})")
            }
        }
    }
}
