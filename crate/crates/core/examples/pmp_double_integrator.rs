//! Maximum principle check for the double integrator x1' = x2, x2' = u with
//! |u| = 1, maximizing x1(1).
//!
//! ```text
//! cargo run --release --example pmp_double_integrator
//! ```

use setsep::expr::{ExprField, ExprScalar};
use setsep::ocp::{self, ControlProblem, ControlSignal, PmpOptions, Target};

fn main() -> setsep::Result<()> {
    let problem = ControlProblem::new(
        (0.0, 1.0),
        vec![0.0, 0.0],
        ExprField::parse(&["x2", "u1"], 1)?.into_arc(),
        None,
        ExprScalar::parse("-x1", 2)?.into_arc(),
        Target::Free,
        vec![vec![-1.0], vec![1.0]],
    )?;
    for u in [1.0, -1.0] {
        let cert = ocp::verify_pmp(
            &problem,
            &ControlSignal::Constant(vec![u]),
            None,
            &PmpOptions::default(),
        )?;
        println!("u = {u}: {:?}", cert.verdict);
        println!("  final state {:?}, cost {}", cert.final_state, cert.cost);
        println!("  p_c = {}, p(b) = {:?}", cert.p_c, cert.p_b);
        println!(
            "  maximum condition residual {:.3e} at t = {}",
            cert.max_condition.max_residual, cert.max_condition.worst_time
        );
        if cert.multipliers_found {
            for k in [0, 250, 500, 750, 1000] {
                let t = cert.adjoint.times[k];
                println!(
                    "  p({t:.2}) = ({:.6}, {:.6})",
                    cert.adjoint.p[k][0], cert.adjoint.p[k][1]
                );
            }
        }
        for note in &cert.notes {
            println!("  note: {note}");
        }
    }
    Ok(())
}
