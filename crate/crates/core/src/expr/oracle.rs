//! Expression-backed function oracles.
//!
//! Evaluation errors surface as NaN through the trait methods; the solvers
//! check finiteness of everything they consume. Use the `try_` methods for
//! the positioned error.

use std::sync::Arc;

use super::{parse_expression, Dims, Expr, ExprError};
use crate::func::{Dynamics, Lagrangian, RunningCost, ScalarFn, SmoothScalar, VectorField};

/// Scalar function of `x1..xn`.
#[derive(Debug, Clone)]
pub struct ExprScalar {
    pub expr: Expr,
    pub n: usize,
}

impl ExprScalar {
    pub fn parse(src: &str, n: usize) -> Result<Self, ExprError> {
        Ok(Self {
            expr: parse_expression(src, Dims::state(n))?,
            n,
        })
    }

    pub fn try_value(&self, x: &[f64]) -> Result<f64, ExprError> {
        self.expr.eval(0.0, x, &[])
    }

    pub fn try_gradient(&self, x: &[f64]) -> Result<Vec<f64>, ExprError> {
        self.expr.gradient_x(0.0, x, &[])
    }

    pub fn into_arc(self) -> ScalarFn {
        Arc::new(self)
    }
}

impl SmoothScalar for ExprScalar {
    fn value(&self, x: &[f64]) -> f64 {
        self.try_value(x).unwrap_or(f64::NAN)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.try_gradient(x).unwrap_or_else(|_| vec![f64::NAN; x.len()])
    }
}

/// Dynamics `ẋ_i = f_i(t, x, u)`, one expression per state.
#[derive(Debug, Clone)]
pub struct ExprField {
    pub components: Vec<Expr>,
    pub m: usize,
}

impl ExprField {
    pub fn parse<S: AsRef<str>>(srcs: &[S], m: usize) -> Result<Self, ExprError> {
        let n = srcs.len();
        let components = srcs
            .iter()
            .map(|s| parse_expression(s.as_ref(), Dims::control(n, m)))
            .collect::<Result<_, _>>()?;
        Ok(Self { components, m })
    }

    pub fn try_eval(&self, t: f64, x: &[f64], u: &[f64]) -> Result<Vec<f64>, ExprError> {
        self.components.iter().map(|e| e.eval(t, x, u)).collect()
    }

    pub fn into_arc(self) -> Dynamics {
        Arc::new(self)
    }
}

impl VectorField for ExprField {
    fn state_dim(&self) -> usize {
        self.components.len()
    }
    fn eval(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<f64> {
        self.try_eval(t, x, u)
            .unwrap_or_else(|_| vec![f64::NAN; self.components.len()])
    }
    fn state_jacobian(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<Vec<f64>> {
        self.components
            .iter()
            .map(|e| e.gradient_x(t, x, u).unwrap_or_else(|_| vec![f64::NAN; x.len()]))
            .collect()
    }
}

/// Running cost `l(t, x, u)`.
#[derive(Debug, Clone)]
pub struct ExprCost {
    pub expr: Expr,
}

impl ExprCost {
    pub fn parse(src: &str, n: usize, m: usize) -> Result<Self, ExprError> {
        Ok(Self {
            expr: parse_expression(src, Dims::control(n, m))?,
        })
    }

    pub fn into_arc(self) -> Lagrangian {
        Arc::new(self)
    }
}

impl RunningCost for ExprCost {
    fn eval(&self, t: f64, x: &[f64], u: &[f64]) -> f64 {
        self.expr.eval(t, x, u).unwrap_or(f64::NAN)
    }
    fn state_gradient(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<f64> {
        self.expr
            .gradient_x(t, x, u)
            .unwrap_or_else(|_| vec![f64::NAN; x.len()])
    }
}
