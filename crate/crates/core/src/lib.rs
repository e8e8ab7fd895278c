// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amp;
pub mod approx;
pub mod cli;
pub mod cone;
pub mod error;
pub mod expr;
pub mod func;
pub mod linalg;
pub mod lp;
pub mod ocp;
pub mod sample;
pub mod tol;

pub use error::{Error, Result};
