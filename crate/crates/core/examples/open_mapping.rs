//! Conic neighbourhood attained by F(c) = c + |c|^2 e1 on the quadrant, and
//! the near-identity covering check on its own.
//!
//! ```text
//! cargo run --release --example open_mapping
//! ```

use setsep::approx::{self, ConicMap, WitnessOptions};
use setsep::cone::Cone;
use setsep::linalg::{norm, LinearMap};

fn main() -> setsep::Result<()> {
    let quadrant = Cone::span(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let map = ConicMap::new(vec![0.0, 0.0], quadrant, 0.5, 2, |x| vec![x[0] + norm(x).powi(2), x[1]])?;
    let v = [std::f64::consts::FRAC_1_SQRT_2; 2];
    let w = approx::open_mapping_witness(&map, &LinearMap::identity(2), &v, &WitnessOptions::default())?;
    println!("alpha = {}, beta = {:.6}", w.alpha, w.beta);
    println!(
        "s* = {:.6e}, s_bar = {:.6e}, r_bar = {:.6e}",
        w.s_star, w.s_bar, w.r_bar
    );
    println!("gamma generators:");
    for g in w.gamma.generators() {
        println!("  ({:.6}, {:.6})", g[0], g[1]);
    }
    println!(
        "coverage: {}/{} attained, {} escaped, {} unverified",
        w.coverage.attained, w.coverage.targets, w.coverage.escaped, w.coverage.unverified
    );
    println!("L·Lambda - I defect {:.1e}", w.identity_defect);

    let phi = |x: &[f64]| vec![x[0] + 0.05 * x[0].sin(), x[1] + 0.05 * x[1].cos()];
    let report = approx::near_identity_covering(&phi, &[0.0, 0.0], 1.0, 0.1, 500, 0)?;
    println!(
        "contraction example: {}/{} targets attained, at most {} evaluations",
        report.attained, report.targets, report.max_evaluations
    );
    Ok(())
}
