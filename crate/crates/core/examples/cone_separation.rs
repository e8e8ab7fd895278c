//! Transversality, separation and polars for the small cones in the plane
//! and on the line.
//!
//! ```text
//! cargo run --example cone_separation
//! ```

use setsep::cone::{self, Cone};

fn verdict(k1: &Cone, k2: &Cone) -> setsep::Result<&'static str> {
    Ok(if cone::is_strongly_transversal(k1, k2)? {
        "strongly transversal"
    } else if cone::is_transversal(k1, k2)? {
        "transversal, not strongly"
    } else {
        "not transversal"
    })
}

fn main() -> setsep::Result<()> {
    let half_line = Cone::span(1, vec![vec![1.0]])?;
    let neg_half_line = Cone::span(1, vec![vec![-1.0]])?;
    let quadrant = Cone::span(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let second = Cone::span(2, vec![vec![-1.0, 0.0], vec![0.0, 1.0]])?;
    let x_axis = Cone::span(2, vec![vec![1.0, 0.0], vec![-1.0, 0.0]])?;
    // the y axis given by a constraint instead of generators
    let y_axis = Cone::halfspaces(2, vec![], vec![vec![1.0, 0.0]])?;
    let flat = Cone::span(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]])?;

    let pairs = [
        ("[0,inf) vs (-inf,0]", &half_line, &neg_half_line),
        ("[0,inf) vs [0,inf)", &half_line, &half_line),
        ("quadrant vs second quadrant", &quadrant, &second),
        ("quadrant vs itself", &quadrant, &quadrant),
        ("quadrant x {0} vs itself", &flat, &flat),
        ("x axis vs itself", &x_axis, &x_axis),
        ("x axis vs y axis", &x_axis, &y_axis),
    ];
    for (label, k1, k2) in pairs {
        print!("{label:32} {}", verdict(k1, k2)?);
        match cone::linear_separation(k1, k2)? {
            Some(c) => println!("; separated by p = {:?}", c.p),
            None => println!(),
        }
    }

    println!();
    println!("polar of the quadrant: {}", quadrant.polar());
    println!("polar of the y axis:   {}", y_axis.polar());
    let sum = quadrant.sum(&second)?;
    println!(
        "quadrant + second quadrant contains (0, 1): {}",
        sum.contains(&[0.0, 1.0])?
    );
    println!(
        "quadrant + second quadrant contains (0, -1): {}",
        sum.contains(&[0.0, -1.0])?
    );
    Ok(())
}
