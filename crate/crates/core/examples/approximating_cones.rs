//! Approximating cones to a circle and a half-plane, and the sampled
//! linearization check for three maps on the quadrant.
//!
//! ```text
//! cargo run --example approximating_cones
//! ```

use setsep::approx::{self, ConicMap};
use setsep::cone::Cone;
use setsep::expr::ExprScalar;
use setsep::func::SmoothScalar;
use setsep::linalg::{norm, LinearMap};

type Map = fn(&[f64]) -> Vec<f64>;

fn main() -> setsep::Result<()> {
    let circle = ExprScalar::parse("x1^2 + x2^2 - 1", 2)?;
    let tangent = approx::tangent_level_set_cone(&[&circle as &dyn SmoothScalar], &[1.0, 0.0])?;
    println!("circle at (1, 0): {}", Cone::H(tangent));

    let half_plane = ExprScalar::parse("1 - x1 - x2", 2)?;
    let far = ExprScalar::parse("x1 - 5", 2)?;
    let active = approx::active_set_cone(&[], &[&half_plane as &dyn SmoothScalar, &far], &[0.5, 0.5])?;
    println!("half-plane at (1/2, 1/2): {}", Cone::H(active));

    let quadrant = Cone::span(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let id = LinearMap::identity(2);
    let maps: [(&str, Map); 3] = [
        ("F(c) = c", |x| x.to_vec()),
        ("F(c) = c + |c|^2 e1", |x| vec![x[0] + norm(x).powi(2), x[1]]),
        ("F(c) = c + sqrt|c| e1", |x| vec![x[0] + norm(x).sqrt(), x[1]]),
    ];
    for (label, f) in maps {
        let map = ConicMap::new(vec![0.0, 0.0], quadrant.clone(), 1.0, 2, f)?;
        let report = approx::check_directional_diff(&map, &id, &approx::halving_radii(1.0, 12), 32)?;
        let ratios: Vec<String> = report
            .worst_ratio
            .iter()
            .step_by(3)
            .map(|r| format!("{r:.2e}"))
            .collect();
        println!(
            "{label:24} {}  [{} ...]",
            if report.pass { "pass" } else { "fail" },
            ratios.join(" ")
        );
    }

    // F(c) = 2c + c^2 on [0, inf) with L = 2 re-expressed over K = LC
    let half_line = Cone::span(1, vec![vec![1.0]])?;
    let f = ConicMap::new(vec![0.0], half_line, 1.0, 1, |x| vec![2.0 * x[0] + x[0] * x[0]])?;
    let g = approx::normalized_chart(&f, &LinearMap::from_rows(&[vec![2.0]])?)?;
    for k in [0.5, 0.1] {
        println!("G({k}) = {:.6}, k + k^2/4 = {:.6}", g.eval(&[k])[0], k + k * k / 4.0);
    }
    Ok(())
}
