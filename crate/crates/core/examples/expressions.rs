//! Parsing, printing and forward-mode derivatives of the expression
//! language used in problem files.
//!
//! ```text
//! cargo run --example expressions
//! ```

use setsep::expr::{parse_expression, Dims};

fn main() {
    let dims = Dims::control(2, 1);
    for src in [
        "x1*x2 + sin(u1)",
        "2^3^2",
        "-(x1 - x2)^2 / (1 + t)",
        "exp(x1) * log(1 + x2^2)",
    ] {
        let e = parse_expression(src, dims).expect("valid expression");
        let x = [0.5, -1.5];
        let u = [0.25];
        let value = e.eval(0.5, &x, &u).expect("in domain");
        let grad = e.gradient_x(0.5, &x, &u).expect("in domain");
        println!("{src:28} prints as {e:28} value {value:10.6}  grad_x {grad:.6?}");
    }
    let d = parse_expression("x1^2 + x2^2", Dims::state(2))
        .unwrap()
        .eval_dual((0.0, &[1.0, 2.0], &[]), (0.0, &[1.0, 0.0], &[]))
        .unwrap();
    println!(
        "x1^2 + x2^2 at (1, 2) along e1: value {}, derivative {}",
        d.value, d.deriv
    );

    for bad in ["x7", "sin x1", "(x1 + 1", "x1 + 1)", "log(x1)"] {
        match parse_expression(bad, Dims::state(2)) {
            Err(e) => println!("{bad:10} -> {e}"),
            Ok(e) => match e.eval(0.0, &[-1.0, 0.0], &[]) {
                Err(err) => println!("{bad:10} -> parses, but at x1 = -1: {err}"),
                Ok(v) => println!("{bad:10} -> {v}"),
            },
        }
    }
}
