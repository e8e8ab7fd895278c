//! Shared corpora and independent oracles for the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use setsep::expr::{ExprField, ExprScalar};
use setsep::lp::{Bound, LinearProgram, LpOutcome, Relation};
use setsep::ocp::{ControlProblem, Target};

pub const TOL: f64 = 1e-9;

/// A random pair of finitely generated cones in `ℝ^dim`.
#[derive(Debug, Clone)]
pub struct ConePair {
    pub dim: usize,
    pub g1: Vec<Vec<f64>>,
    pub g2: Vec<Vec<f64>>,
}

fn random_generators(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<f64>> {
    let count = rng.random_range(0..=5);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(-3..=3) as f64).collect::<Vec<f64>>())
        .filter(|g| g.iter().any(|x| *x != 0.0))
        .collect()
}

/// `count` pairs, dimension 1 to 4, up to five integer generators per cone
/// with coordinates in `[-3, 3]`.
pub fn cone_corpus(count: usize, seed: u64) -> Vec<ConePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let dim = rng.random_range(1..=4);
            ConePair {
                dim,
                g1: random_generators(&mut rng, dim),
                g2: random_generators(&mut rng, dim),
            }
        })
        .collect()
}

/// Integer grid points in `[-2, 2]^dim` plus the generators and their
/// negatives, which sit on cone boundaries.
pub fn probe_points(pair: &ConePair, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<f64>> = (0..count)
        .map(|_| (0..pair.dim).map(|_| rng.random_range(-2..=2) as f64).collect())
        .collect();
    for g in pair.g1.iter().chain(&pair.g2) {
        out.push(g.clone());
        out.push(g.iter().map(|x| -x).collect());
    }
    out.push(vec![0.0; pair.dim]);
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `x = Σ μ_j g_j` with `μ ≥ 0`.
pub fn in_span(gens: &[Vec<f64>], x: &[f64]) -> bool {
    let mut lp = LinearProgram::new();
    let mu = lp.add_vars(gens.len(), Bound::NonNeg);
    for (i, xi) in x.iter().enumerate() {
        let row: Vec<(usize, f64)> = mu.iter().zip(gens).map(|(m, g)| (*m, g[i])).collect();
        lp.add_row(&row, Relation::Eq, *xi);
    }
    lp.is_feasible()
}

/// `p·g ≤ 0` for every generator.
pub fn in_polar(gens: &[Vec<f64>], p: &[f64]) -> bool {
    gens.iter().all(|g| dot(p, g) <= TOL)
}

/// `max p·w` over `w ∈ span⁺ g1 ∩ span⁺ g2`, `|w|∞ ≤ 1`, is nonpositive.
pub fn in_polar_of_intersection(g1: &[Vec<f64>], g2: &[Vec<f64>], p: &[f64]) -> bool {
    let dim = p.len();
    let mut lp = LinearProgram::new();
    let w = lp.add_vars(dim, Bound::Free);
    let a = lp.add_vars(g1.len(), Bound::NonNeg);
    let b = lp.add_vars(g2.len(), Bound::NonNeg);
    for i in 0..dim {
        let mut r1 = vec![(w[i], 1.0)];
        r1.extend(a.iter().zip(g1).map(|(v, g)| (*v, -g[i])));
        lp.add_row(&r1, Relation::Eq, 0.0);
        let mut r2 = vec![(w[i], 1.0)];
        r2.extend(b.iter().zip(g2).map(|(v, g)| (*v, -g[i])));
        lp.add_row(&r2, Relation::Eq, 0.0);
        lp.add_row(&[(w[i], 1.0)], Relation::Le, 1.0);
        lp.add_row(&[(w[i], 1.0)], Relation::Ge, -1.0);
    }
    let obj: Vec<(usize, f64)> = w.iter().zip(p).map(|(v, c)| (*v, *c)).collect();
    lp.maximize(&obj);
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => value <= TOL,
        _ => panic!("bounded feasible oracle LP"),
    }
}

/// `K1 − K2 = ℝ^dim`, checked on `±e_i`.
pub fn transversal_oracle(pair: &ConePair) -> bool {
    let gens: Vec<Vec<f64>> = pair
        .g1
        .iter()
        .cloned()
        .chain(pair.g2.iter().map(|g| g.iter().map(|x| -x).collect()))
        .collect();
    (0..pair.dim).all(|i| {
        [1.0, -1.0].iter().all(|s| {
            let mut e = vec![0.0; pair.dim];
            e[i] = *s;
            in_span(&gens, &e)
        })
    })
}

/// `ẋ1 = x2, ẋ2 = u`, `Ψ = −x1`, free endpoint, `U = {−1, 1}` on `[0, 1]`.
pub fn double_integrator() -> ControlProblem {
    ControlProblem::new(
        (0.0, 1.0),
        vec![0.0, 0.0],
        ExprField::parse(&["x2", "u1"], 1).unwrap().into_arc(),
        None,
        ExprScalar::parse("-x1", 2).unwrap().into_arc(),
        Target::Free,
        vec![vec![-1.0], vec![1.0]],
    )
    .unwrap()
}

/// Random smooth expression in `x1..xn`, built from operations that stay in
/// their domain everywhere.
pub fn smooth_expression(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> String {
    if depth == 0 || rng.random_range(0..4) == 0 {
        return if rng.random_bool(0.75) {
            format!("x{}", rng.random_range(1..=n))
        } else {
            format!("{:.3}", rng.random_range(-2.0..2.0))
        };
    }
    let a = smooth_expression(rng, n, depth - 1);
    match rng.random_range(0..10) {
        0 => format!("({a}) + ({})", smooth_expression(rng, n, depth - 1)),
        1 => format!("({a}) - ({})", smooth_expression(rng, n, depth - 1)),
        2 => format!("({a})*({})", smooth_expression(rng, n, depth - 1)),
        3 => format!("({a})/(1 + ({})^2)", smooth_expression(rng, n, depth - 1)),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("exp(sin({a}))"),
        7 => format!("log(1 + ({a})^2)"),
        8 => format!("sqrt(2 + cos({a}))"),
        _ => format!("({a})^{}", rng.random_range(2..=3)),
    }
}

/// Maximum relative disagreement between the dual-number directional
/// derivative and a central difference with step `1e-6`, over `count`
/// expressions and points.
pub fn dual_vs_central_difference(count: usize, seed: u64) -> (f64, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut corpus = Vec::with_capacity(count);
    let h = 1e-6;
    while corpus.len() < count {
        let n = rng.random_range(1..=3);
        let src = smooth_expression(&mut rng, n, 4);
        let f = ExprScalar::parse(&src, n).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nd = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        d.iter_mut().for_each(|v| *v /= nd);
        let dual = f.expr.eval_dual((0.0, &x, &[]), (0.0, &d, &[])).unwrap();
        let shifted = |s: f64| -> Vec<f64> { x.iter().zip(&d).map(|(a, b)| a + s * b).collect() };
        let fd = (f.try_value(&shifted(h)).unwrap() - f.try_value(&shifted(-h)).unwrap()) / (2.0 * h);
        let rel = (dual.deriv - fd).abs() / fd.abs().max(1.0);
        worst = worst.max(rel);
        corpus.push(src);
    }
    (worst, corpus)
}
