//! Decoherence rates `γ_α(t)` as parsed expressions in one variable `t`.
//!
//! See [`parser`] for the grammar. Supported functions: `tanh`, `exp`, `ln`,
//! `cosh`, `sinh` and `pow(base, exponent)`. Rates are assumed continuous on
//! the integration window; discontinuous rates are not supported.

pub mod parser;
pub mod presets;
pub mod quad;

use std::fmt;

use thiserror::Error;

pub use parser::{BinOp, Expr, Func, ParseError, ParseErrorKind};
pub use presets::Preset;
pub use quad::{Quadrature, QuadratureError};

use crate::error::{Error, Result};

/// Default absolute tolerance for [`RateExpr::integrate`].
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("{function}({argument}) is outside the function's domain")]
    Domain { function: &'static str, argument: f64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("non-finite result {value} from {operation}")]
    NonFinite { operation: &'static str, value: f64 },

    #[error("time must be finite, got {0}")]
    InvalidTime(f64),
}

fn finite(value: f64, operation: &'static str) -> std::result::Result<f64, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::NonFinite { operation, value })
    }
}

fn eval(expr: &Expr, t: f64) -> std::result::Result<f64, EvalError> {
    match expr {
        Expr::Num(x) => Ok(*x),
        Expr::Time => Ok(t),
        Expr::Neg(inner) => Ok(-eval(inner, t)?),
        Expr::Binary(op, lhs, rhs) => {
            let a = eval(lhs, t)?;
            let b = eval(rhs, t)?;
            match op {
                BinOp::Add => finite(a + b, "+"),
                BinOp::Sub => finite(a - b, "-"),
                BinOp::Mul => finite(a * b, "*"),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(EvalError::DivisionByZero)
                    } else {
                        finite(a / b, "/")
                    }
                }
                BinOp::Pow => power(a, b),
            }
        }
        Expr::Call(func, args) => {
            let x = eval(&args[0], t)?;
            match func {
                Func::Tanh => Ok(x.tanh()),
                Func::Exp => finite(x.exp(), "exp"),
                Func::Cosh => finite(x.cosh(), "cosh"),
                Func::Sinh => finite(x.sinh(), "sinh"),
                Func::Ln => {
                    if x <= 0.0 {
                        Err(EvalError::Domain {
                            function: "ln",
                            argument: x,
                        })
                    } else {
                        Ok(x.ln())
                    }
                }
                Func::Pow => power(x, eval(&args[1], t)?),
            }
        }
    }
}

fn power(base: f64, exponent: f64) -> std::result::Result<f64, EvalError> {
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::Domain {
            function: "pow",
            argument: base,
        });
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    finite(base.powf(exponent), "pow")
}

/// A parsed rate expression. Immutable once parsed.
#[derive(Clone, Debug, PartialEq)]
pub struct RateExpr {
    source: String,
    ast: Expr,
}

impl RateExpr {
    pub fn parse(source: &str) -> std::result::Result<Self, ParseError> {
        Ok(Self {
            source: source.to_string(),
            ast: parser::parse_expr(source)?,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self::parse(&format!("{value}")).expect("formatted float is a valid expression")
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn evaluate(&self, t: f64) -> std::result::Result<f64, EvalError> {
        if !t.is_finite() {
            return Err(EvalError::InvalidTime(t));
        }
        eval(&self.ast, t)
    }

    pub fn integrate(&self, t0: f64, t1: f64, tol: f64) -> std::result::Result<Quadrature, QuadratureError> {
        quad::adaptive_simpson(|t| self.evaluate(t), t0, t1, tol)
    }
}

/// Canonical form; re-parsing it yields the same tree.
impl fmt::Display for RateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ast)
    }
}

pub fn parse(source: &str) -> std::result::Result<RateExpr, ParseError> {
    RateExpr::parse(source)
}

/// The `d + 1` rates `γ₁, …, γ_{d+1}` of a generalized Pauli generator.
#[derive(Clone, Debug, PartialEq)]
pub struct RateSet {
    dim: usize,
    rates: Vec<RateExpr>,
}

impl RateSet {
    pub fn new(dim: usize, rates: Vec<RateExpr>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if rates.len() != dim + 1 {
            return Err(Error::LengthMismatch {
                expected: dim + 1,
                found: rates.len(),
            });
        }
        Ok(Self { dim, rates })
    }

    /// Parses one expression per rate.
    pub fn parse<S: AsRef<str>>(dim: usize, sources: &[S]) -> Result<Self> {
        let rates = sources
            .iter()
            .map(|s| RateExpr::parse(s.as_ref()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(dim, rates)
    }

    pub fn constants(values: &[f64]) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidDimension(values.len().saturating_sub(1)));
        }
        Self::new(values.len() - 1, values.iter().map(|&v| RateExpr::constant(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rates(&self) -> &[RateExpr] {
        &self.rates
    }

    /// `(γ₁(t), …, γ_{d+1}(t))`
    pub fn evaluate(&self, t: f64) -> Result<Vec<f64>> {
        self.rates
            .iter()
            .map(|r| r.evaluate(t).map_err(Error::from))
            .collect()
    }
}
