//! A small arithmetic expression language over `t`, `x1..xn` and `u1..um`.
//!
//! Expressions describe dynamics, running and terminal costs, and constraint
//! functions in problem files. Derivatives come from forward-mode evaluation
//! with [`Dual`] numbers, so every gradient and Jacobian the solvers need is
//! exact to rounding.
//!
//! Precedence, tightest first: `^` (right associative), unary `-`, `*` `/`,
//! `+` `-` (left associative). `-x^2` is `-(x^2)` and `2^3^2` is `2^9`.

mod dual;
mod oracle;
mod parse;

use std::fmt;

use thiserror::Error;

pub use dual::{Dual, Real};
pub use oracle::{ExprCost, ExprField, ExprScalar};
pub use parse::parse_expression;

/// Which variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    pub time: bool,
}

impl Dims {
    /// `t`, `x1..xn`, `u1..um`
    pub fn control(n: usize, m: usize) -> Self {
        Self { n, m, time: true }
    }

    /// `x1..xn` only.
    pub fn state(n: usize) -> Self {
        Self { n, m: 0, time: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprErrorKind {
    UnknownIdentifier(String),
    Arity { function: String, got: usize },
    UnbalancedParen,
    UnexpectedToken(String),
    UnexpectedEnd,
    Empty,
    Domain(String),
    PointDims { expected: usize, got: usize },
}

/// Parse or evaluation failure with a 1-based column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ExprError {
    pub kind: ExprErrorKind,
    pub col: usize,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprErrorKind::UnknownIdentifier(s) => {
                write!(f, "unknown identifier '{s}' at col {}", self.col)
            }
            ExprErrorKind::Arity { function, got } => {
                write!(f, "{function} takes 1 argument, got {got} at col {}", self.col)
            }
            ExprErrorKind::UnbalancedParen => write!(f, "unbalanced parenthesis at col {}", self.col),
            ExprErrorKind::UnexpectedToken(s) => write!(f, "unexpected '{s}' at col {}", self.col),
            ExprErrorKind::UnexpectedEnd => write!(f, "unexpected end of input at col {}", self.col),
            ExprErrorKind::Empty => write!(f, "empty expression"),
            ExprErrorKind::Domain(s) => write!(f, "domain error: {s} at col {}", self.col),
            ExprErrorKind::PointDims { expected, got } => {
                write!(f, "point has {got} coordinates, expected {expected}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    /// zero-based state index
    X(usize),
    /// zero-based control index
    U(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl UnaryOp {
    pub(crate) fn function(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sqrt" => UnaryOp::Sqrt,
            "abs" => UnaryOp::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => " + ",
            BinaryOp::Sub => " - ",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Node {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

/// Expression tree node with its source column (0 for synthesized nodes).
#[derive(Debug, Clone)]
pub struct Expr {
    pub node: Node,
    pub col: usize,
}

/// Structural equality; source columns are ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.node, &other.node) {
            (Node::Const(a), Node::Const(b)) => a == b,
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Unary(o1, a), Node::Unary(o2, b)) => o1 == o2 && a == b,
            (Node::Binary(o1, a1, b1), Node::Binary(o2, a2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            _ => false,
        }
    }
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Self {
            node: Node::Const(c),
            col: 0,
        }
    }

    pub fn var(v: Var) -> Self {
        Self {
            node: Node::Var(v),
            col: 0,
        }
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Self {
        Self {
            node: Node::Unary(op, Box::new(a)),
            col: 0,
        }
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Self {
        Self {
            node: Node::Binary(op, Box::new(a), Box::new(b)),
            col: 0,
        }
    }

    /// Evaluates at a point.
    pub fn eval(&self, t: f64, x: &[f64], u: &[f64]) -> Result<f64, ExprError> {
        self.eval_generic(&|v| match v {
            Var::T => t,
            Var::X(i) => x[i],
            Var::U(i) => u[i],
        })
    }

    /// Value and directional derivative along `(dt, dx, du)`.
    pub fn eval_dual(&self, point: (f64, &[f64], &[f64]), direction: (f64, &[f64], &[f64])) -> Result<Dual, ExprError> {
        let (t, x, u) = point;
        let (dt, dx, du) = direction;
        self.check_point(x, u)?;
        if dx.len() != x.len() || du.len() != u.len() {
            return Err(ExprError {
                kind: ExprErrorKind::PointDims {
                    expected: x.len() + u.len(),
                    got: dx.len() + du.len(),
                },
                col: 0,
            });
        }
        self.eval_generic(&|v| match v {
            Var::T => Dual::new(t, dt),
            Var::X(i) => Dual::new(x[i], dx[i]),
            Var::U(i) => Dual::new(u[i], du[i]),
        })
    }

    /// `∂/∂x` at a point, one dual pass per state coordinate.
    pub fn gradient_x(&self, t: f64, x: &[f64], u: &[f64]) -> Result<Vec<f64>, ExprError> {
        let du = vec![0.0; u.len()];
        (0..x.len())
            .map(|j| {
                let mut dx = vec![0.0; x.len()];
                dx[j] = 1.0;
                self.eval_dual((t, x, u), (0.0, &dx, &du)).map(|d| d.deriv)
            })
            .collect()
    }

    fn check_point(&self, x: &[f64], u: &[f64]) -> Result<(), ExprError> {
        let (need_x, need_u) = self.max_indices();
        if need_x > x.len() || need_u > u.len() {
            return Err(ExprError {
                kind: ExprErrorKind::PointDims {
                    expected: need_x + need_u,
                    got: x.len() + u.len(),
                },
                col: 0,
            });
        }
        Ok(())
    }

    /// One past the largest referenced state and control indices.
    pub fn max_indices(&self) -> (usize, usize) {
        match &self.node {
            Node::Const(_) | Node::Var(Var::T) => (0, 0),
            Node::Var(Var::X(i)) => (i + 1, 0),
            Node::Var(Var::U(i)) => (0, i + 1),
            Node::Unary(_, a) => a.max_indices(),
            Node::Binary(_, a, b) => {
                let (xa, ua) = a.max_indices();
                let (xb, ub) = b.max_indices();
                (xa.max(xb), ua.max(ub))
            }
        }
    }

    fn eval_generic<R: Real>(&self, var: &dyn Fn(Var) -> R) -> Result<R, ExprError> {
        let domain = |msg: &str| ExprError {
            kind: ExprErrorKind::Domain(msg.to_string()),
            col: self.col,
        };
        let out = match &self.node {
            Node::Const(c) => R::lift(*c),
            Node::Var(v) => var(*v),
            Node::Unary(op, a) => {
                let a = a.eval_generic(var)?;
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Sin => a.sin(),
                    UnaryOp::Cos => a.cos(),
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Log => {
                        if a.value() <= 0.0 {
                            return Err(domain("log of nonpositive value"));
                        }
                        a.ln()
                    }
                    UnaryOp::Sqrt => {
                        if a.value() < 0.0 {
                            return Err(domain("sqrt of negative value"));
                        }
                        a.sqrt()
                    }
                    UnaryOp::Abs => a.abs(),
                }
            }
            Node::Binary(op, a, b) => {
                let a = a.eval_generic(var)?;
                let b = b.eval_generic(var)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b.value() == 0.0 {
                            return Err(domain("division by zero"));
                        }
                        a / b
                    }
                    BinaryOp::Pow => {
                        if a.value() < 0.0 && (!b.is_constant() || b.value().fract() != 0.0) {
                            return Err(domain("negative base with non-integer exponent"));
                        }
                        if a.value() <= 0.0 && !b.is_constant() {
                            return Err(domain("nonpositive base with variable exponent"));
                        }
                        a.pow(b)
                    }
                }
            }
        };
        if !out.is_finite() {
            return Err(domain("non-finite result"));
        }
        Ok(out)
    }

    fn precedence(&self) -> u8 {
        match &self.node {
            Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => 3,
            Node::Const(_) | Node::Var(_) => 5,
            Node::Unary(UnaryOp::Neg, _) => 3,
            Node::Unary(_, _) => 5,
            Node::Binary(BinaryOp::Add | BinaryOp::Sub, _, _) => 1,
            Node::Binary(BinaryOp::Mul | BinaryOp::Div, _, _) => 2,
            Node::Binary(BinaryOp::Pow, _, _) => 4,
        }
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the minimal parentheses needed to parse back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "-{}", -c)
                } else {
                    write!(f, "{c}")
                }
            }
            Node::Var(Var::T) => f.write_str("t"),
            Node::Var(Var::X(i)) => write!(f, "x{}", i + 1),
            Node::Var(Var::U(i)) => write!(f, "u{}", i + 1),
            Node::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                wrap(f, a, a.precedence() < 3)
            }
            Node::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Node::Binary(BinaryOp::Pow, a, b) => {
                wrap(f, a, a.precedence() <= 4)?;
                f.write_str("^")?;
                wrap(f, b, b.precedence() < 3)
            }
            Node::Binary(op, a, b) => {
                let p = self.precedence();
                wrap(f, a, a.precedence() < p)?;
                f.write_str(op.symbol())?;
                wrap(f, b, b.precedence() <= p)
            }
        }
    }
}
