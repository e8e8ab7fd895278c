//! Multipliers of the abstract rule, their normality class, and the
//! Lagrange and Kuhn-Tucker corollaries.
//!
//! ```text
//! cargo run --example amp_multipliers
//! ```

use setsep::amp::{self, AbstractProblem};
use setsep::cone::Cone;
use setsep::expr::ExprScalar;
use setsep::func::SmoothScalar;

fn show(label: &str, p: &AbstractProblem) -> setsep::Result<()> {
    match amp::solve_amp(p)? {
        Some(m) => {
            let class = amp::classify_normality(p)?;
            let unit = m.unit_cost_view();
            println!(
                "{label:36} lambda = {:?}, lambda_c = {}  ({class:?})",
                unit.lambda, unit.lambda_c
            );
        }
        None => println!("{label:36} no multipliers"),
    }
    Ok(())
}

fn main() -> setsep::Result<()> {
    let n = 2;
    show(
        "R = R^2, S = {0}, grad = (1, 2)",
        &AbstractProblem::new(Cone::whole_space(n), Cone::zero(n), vec![1.0, 2.0])?,
    )?;
    show(
        "R = R^2, S = R^2, grad = (1, 2)",
        &AbstractProblem::new(Cone::whole_space(n), Cone::whole_space(n), vec![1.0, 2.0])?,
    )?;
    show(
        "R = cone{(1, 0)}, S = {0}, grad = (1, 0)",
        &AbstractProblem::new(Cone::span(n, vec![vec![1.0, 0.0]])?, Cone::zero(n), vec![1.0, 0.0])?,
    )?;
    show(
        "R = {0}",
        &AbstractProblem::new(Cone::zero(n), Cone::whole_space(n), vec![3.0, -1.0])?,
    )?;

    let circle = ExprScalar::parse("x1^2 + x2^2 - 1", 2)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for x in [[-s, -s], [s, s]] {
        let r = amp::lagrange_multipliers(&[&circle as &dyn SmoothScalar], &[1.0, 1.0], &x)?;
        println!(
            "x + y on the circle at {x:?}: alpha = {:.9}, residual {:.1e}",
            r.alphas[0], r.residual
        );
    }

    let h = ExprScalar::parse("1 - x1 - x2", 2)?;
    for x in [[0.5, 0.5], [1.0, 0.0]] {
        let grad = vec![2.0 * x[0], 2.0 * x[1]];
        let r = amp::kkt_multipliers(&[], &[&h as &dyn SmoothScalar], &grad, &x)?;
        println!(
            "|x|^2 on x + y >= 1 at {x:?}: beta = {:?}, residual {:.3e}, certified {}",
            r.betas, r.residual, r.certified
        );
    }
    Ok(())
}
