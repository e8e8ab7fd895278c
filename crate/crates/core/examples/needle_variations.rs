//! Needle variations of the double integrator: the transported jumps, the
//! reachable cone they span, and the first-order expansion error.
//!
//! ```text
//! cargo run --example needle_variations
//! ```

use setsep::func::{FnField, FnScalar};
use setsep::ocp::{self, ControlProblem, ControlSignal, NeedleSpec, Target};

fn main() -> setsep::Result<()> {
    let problem = ControlProblem::new(
        (0.0, 1.0),
        vec![0.0, 0.0],
        FnField::linear(vec![vec![0.0, 1.0], vec![0.0, 0.0]], vec![vec![0.0], vec![1.0]]).into_arc(),
        None,
        FnScalar::affine(vec![-1.0, 0.0], 0.0).into_arc(),
        Target::Free,
        vec![vec![-1.0], vec![1.0]],
    )?;
    let process = ocp::integrate_state(&problem, &ControlSignal::Constant(vec![1.0]), 400)?;
    let specs: Vec<NeedleSpec> = [0.25, 0.5, 0.75]
        .iter()
        .map(|&t| NeedleSpec { t, u: vec![-1.0] })
        .collect();
    for s in &specs {
        // w(b) = (-2(1 - t), -2) in closed form
        let w = ocp::propagate_variation(&problem, &process, s)?;
        println!("needle at t = {}: w(b) = ({:.6}, {:.6})", s.t, w[0], w[1]);
    }
    let reachable = ocp::build_reachable_cone(&problem, &process, &specs)?;
    println!("reachable cone has {} generators", reachable.generators().len());

    let report = ocp::check_needle_expansion(&problem, &process, &specs, &[0.1, 0.1, 0.1], 5)?;
    for (e, r) in report.eps_norms.iter().zip(&report.ratios) {
        println!("|eps| = {e:.4e}  error/|eps| = {r:.4e}");
    }
    println!("decay factors {:?}", report.decay_factors);
    println!("pass: {}", report.pass);
    Ok(())
}
