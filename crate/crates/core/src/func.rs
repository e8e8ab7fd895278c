//! Function oracles: values plus the derivatives the algorithms need.
//!
//! Expression-backed implementations live in [`crate::expr`]; the closure
//! wrappers here are for native callbacks and tests.

use std::fmt;
use std::sync::Arc;

/// A `C¹` scalar function of a point, with its gradient.
pub trait SmoothScalar: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

/// Controlled dynamics `f(t, x, u)` with its state Jacobian.
pub trait VectorField: Send + Sync {
    fn state_dim(&self) -> usize;
    fn eval(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<f64>;
    /// `∂f/∂x` as rows: `jac[i][j] = ∂f_i/∂x_j`.
    fn state_jacobian(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<Vec<f64>>;
}

/// Running cost `l(t, x, u)` with its state gradient.
pub trait RunningCost: Send + Sync {
    fn eval(&self, t: f64, x: &[f64], u: &[f64]) -> f64;
    fn state_gradient(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<f64>;
}

pub type ScalarFn = Arc<dyn SmoothScalar>;
pub type Dynamics = Arc<dyn VectorField>;
pub type Lagrangian = Arc<dyn RunningCost>;

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Scalar function from a value closure and a gradient closure.
#[derive(Clone)]
pub struct FnScalar {
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
}

impl FnScalar {
    pub fn new(
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    /// `a·x + c`
    pub fn affine(a: Vec<f64>, c: f64) -> Self {
        let g = a.clone();
        Self::new(
            move |x| a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() + c,
            move |_| g.clone(),
        )
    }

    pub fn into_arc(self) -> ScalarFn {
        Arc::new(self)
    }
}

impl fmt::Debug for FnScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnScalar")
    }
}

impl SmoothScalar for FnScalar {
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }
}

type FieldFn = dyn Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(f64, &[f64], &[f64]) -> Vec<Vec<f64>> + Send + Sync;

/// Dynamics from closures.
#[derive(Clone)]
pub struct FnField {
    dim: usize,
    f: Arc<FieldFn>,
    jac: Arc<JacFn>,
}

impl FnField {
    pub fn new(
        dim: usize,
        f: impl Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        jac: impl Fn(f64, &[f64], &[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            f: Arc::new(f),
            jac: Arc::new(jac),
        }
    }

    /// Time-invariant linear system `ẋ = A x + B u`.
    pub fn linear(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Self {
        let dim = a.len();
        let a2 = a.clone();
        Self::new(
            dim,
            move |_, x, u| {
                (0..dim)
                    .map(|i| {
                        a[i].iter().zip(x).map(|(p, q)| p * q).sum::<f64>()
                            + b[i].iter().zip(u).map(|(p, q)| p * q).sum::<f64>()
                    })
                    .collect()
            },
            move |_, _, _| a2.clone(),
        )
    }

    pub fn into_arc(self) -> Dynamics {
        Arc::new(self)
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnField(dim={})", self.dim)
    }
}

impl VectorField for FnField {
    fn state_dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<f64> {
        (self.f)(t, x, u)
    }
    fn state_jacobian(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<Vec<f64>> {
        (self.jac)(t, x, u)
    }
}

type CostFn = dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync;
type CostGradFn = dyn Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// Running cost from closures.
#[derive(Clone)]
pub struct FnCost {
    l: Arc<CostFn>,
    grad: Arc<CostGradFn>,
}

impl FnCost {
    pub fn new(
        l: impl Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            l: Arc::new(l),
            grad: Arc::new(grad),
        }
    }

    pub fn into_arc(self) -> Lagrangian {
        Arc::new(self)
    }
}

impl fmt::Debug for FnCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnCost")
    }
}

impl RunningCost for FnCost {
    fn eval(&self, t: f64, x: &[f64], u: &[f64]) -> f64 {
        (self.l)(t, x, u)
    }
    fn state_gradient(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<f64> {
        (self.grad)(t, x, u)
    }
}
