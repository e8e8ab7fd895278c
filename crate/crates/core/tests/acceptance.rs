//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion with
//! its wall time and exits nonzero if any fails.

mod common;

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::{Duration, Instant};

use common::{cone_corpus, probe_points, ConePair};
use setsep::amp::{self, AbstractProblem, NormalityClass};
use setsep::approx::{self, ConicMap, WitnessOptions};
use setsep::cone::{self, Cone};
use setsep::func::{FnField, FnScalar, SmoothScalar};
use setsep::linalg::{norm, LinearMap};
use setsep::ocp::{self, ControlProblem, ControlSignal, NeedleSpec, PmpOptions, Target, Verdict};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || {
        format!("took {:.2}s, limit {limit}s", elapsed.as_secs_f64())
    })
}

fn span(dim: usize, g: &[&[f64]]) -> Cone {
    Cone::span(dim, g.iter().map(|v| v.to_vec()).collect()).unwrap()
}

fn classify(k1: &Cone, k2: &Cone) -> &'static str {
    if cone::is_strongly_transversal(k1, k2).unwrap() {
        "strongly transversal"
    } else if cone::is_transversal(k1, k2).unwrap() {
        "transversal only"
    } else {
        "not transversal"
    }
}

fn cone_examples() -> Check {
    let start = Instant::now();
    let pos = span(1, &[&[1.0]]);
    let neg = span(1, &[&[-1.0]]);
    let line = Cone::whole_space(1);
    let mut cases: Vec<(String, Cone, Cone, &str)> = Vec::new();
    // on the line: only the two opposite half-lines fail
    let named = [("[0,inf)", &pos), ("(-inf,0]", &neg), ("R", &line)];
    for (a, ka) in named {
        for (b, kb) in named {
            let opposite = (a, b) == ("[0,inf)", "(-inf,0]") || (a, b) == ("(-inf,0]", "[0,inf)");
            let expect = if opposite {
                "not transversal"
            } else {
                "strongly transversal"
            };
            cases.push((format!("R: {a} vs {b}"), ka.clone(), kb.clone(), expect));
        }
    }
    let quadrant = span(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
    cases.push((
        "R2: quadrant vs (-inf,0]x[0,inf)".into(),
        quadrant.clone(),
        span(2, &[&[-1.0, 0.0], &[0.0, 1.0]]),
        "not transversal",
    ));
    cases.push((
        "R2: quadrant vs itself".into(),
        quadrant.clone(),
        quadrant,
        "strongly transversal",
    ));
    let flat = span(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
    cases.push((
        "R3: quadrant x {0} vs itself".into(),
        flat.clone(),
        flat,
        "not transversal",
    ));
    let x_axis = span(2, &[&[1.0, 0.0], &[-1.0, 0.0]]);
    let y_axis = span(2, &[&[0.0, 1.0], &[0.0, -1.0]]);
    cases.push((
        "R2: x axis vs itself".into(),
        x_axis.clone(),
        x_axis.clone(),
        "not transversal",
    ));
    cases.push(("R2: x axis vs y axis".into(), x_axis, y_axis, "transversal only"));
    for (name, k1, k2, expect) in &cases {
        let got = classify(k1, k2);
        ensure(got == *expect, || format!("{name}: got {got}, expected {expect}"))?;
    }
    within(start.elapsed(), 1.0)?;
    Ok(format!("{} cone pairs match", cases.len()))
}

fn cones(pair: &ConePair) -> (Cone, Cone) {
    (
        Cone::span(pair.dim, pair.g1.clone()).unwrap(),
        Cone::span(pair.dim, pair.g2.clone()).unwrap(),
    )
}

const CORPUS: usize = 200;
const CORPUS_SEED: u64 = 42;

fn polar_identities() -> Check {
    let start = Instant::now();
    let mut probes = 0;
    for (k, pair) in cone_corpus(CORPUS, CORPUS_SEED).iter().enumerate() {
        let (k1, k2) = cones(pair);
        let (p1, p2) = (k1.polar(), k2.polar());
        let polar_of_sum = k1.sum(&k2).unwrap().polar();
        for p in probe_points(pair, 20, k as u64) {
            probes += 1;
            let in_both = common::in_polar(&pair.g1, &p) && common::in_polar(&pair.g2, &p);
            ensure(polar_of_sum.contains(&p).unwrap() == in_both, || {
                format!("(K1+K2)° at pair {k}, {p:?}")
            })?;
            ensure(
                cone::member_of_intersection(&[&p1, &p2], &p).unwrap() == in_both,
                || format!("K1° ∩ K2° at pair {k}, {p:?}"),
            )?;
            let in_dual_of_meet = common::in_polar_of_intersection(&pair.g1, &pair.g2, &p);
            ensure(cone::member_of_sum(&[&p1, &p2], &p).unwrap() == in_dual_of_meet, || {
                format!("K1° + K2° at pair {k}, {p:?}")
            })?;
        }
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("{CORPUS} pairs, {probes} probes agree"))
}

fn separation_vs_transversality() -> Check {
    let mut separable = 0;
    for (k, pair) in cone_corpus(CORPUS, CORPUS_SEED).iter().enumerate() {
        let (k1, k2) = cones(pair);
        let sep = cone::linear_separation(&k1, &k2).unwrap();
        let transversal = cone::is_transversal(&k1, &k2).unwrap();
        ensure(sep.is_some() != transversal, || {
            format!("pair {k}: separable and transversal disagree")
        })?;
        ensure(transversal == common::transversal_oracle(pair), || {
            format!("pair {k}: oracle disagrees")
        })?;
        if let Some(c) = sep {
            separable += 1;
            ensure(c.verify(&k1, &k2).unwrap(), || {
                format!("pair {k}: certificate does not reverify")
            })?;
        }
    }
    Ok(format!("{CORPUS} pairs agree, {separable} separable"))
}

fn dichotomy() -> Check {
    let mut found = 0;
    let mut transversal = 0;
    for (k, pair) in cone_corpus(CORPUS, CORPUS_SEED).iter().enumerate() {
        let (k1, k2) = cones(pair);
        if !cone::is_transversal(&k1, &k2).unwrap() {
            continue;
        }
        transversal += 1;
        if cone::is_strongly_transversal(&k1, &k2).unwrap() {
            continue;
        }
        found += 1;
        for (kk, gens) in [(&k1, &pair.g1), (&k2, &pair.g2)] {
            ensure(kk.is_subspace(), || format!("pair {k}: cone is not a subspace"))?;
            for g in gens {
                let minus: Vec<f64> = g.iter().map(|x| -x).collect();
                ensure(kk.contains(&minus).unwrap(), || format!("pair {k}: -g not in cone"))?;
            }
        }
    }
    ensure(found > 0, || {
        "no transversal-but-not-strongly pair in the corpus".into()
    })?;
    Ok(format!(
        "{found} of {transversal} transversal pairs are complementary subspaces"
    ))
}

fn lagrange_circle() -> Check {
    let phi = FnScalar::new(|x| x[0] * x[0] + x[1] * x[1] - 1.0, |x| vec![2.0 * x[0], 2.0 * x[1]]);
    let x_star = [-FRAC_1_SQRT_2, -FRAC_1_SQRT_2];
    let res =
        amp::lagrange_multipliers(&[&phi as &dyn SmoothScalar], &[1.0, 1.0], &x_star).map_err(|e| e.to_string())?;
    let alpha = res.alphas[0];
    ensure(res.certified, || format!("not certified: {res:?}"))?;
    ensure((alpha + FRAC_1_SQRT_2).abs() <= 1e-8, || format!("alpha = {alpha}"))?;
    ensure(res.lambda_c == -1.0, || format!("lambda_c = {}", res.lambda_c))?;
    // grid over the circle
    let samples = 10_000;
    let best = (0..samples)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            (th.cos(), th.sin())
        })
        .min_by(|a, b| (a.0 + a.1).total_cmp(&(b.0 + b.1)))
        .unwrap();
    let gap = (best.0 - x_star[0]).hypot(best.1 - x_star[1]);
    ensure(gap <= 1e-3, || format!("grid minimizer {best:?} is {gap:e} away"))?;
    Ok(format!(
        "alpha = {alpha:.12}, residual {:.1e}, grid gap {gap:.1e}",
        res.residual
    ))
}

fn kkt_half_plane() -> Check {
    let h = FnScalar::affine(vec![-1.0, -1.0], 1.0);
    let x_star = [0.5, 0.5];
    let res = amp::kkt_multipliers(&[], &[&h as &dyn SmoothScalar], &[1.0, 1.0], &x_star).map_err(|e| e.to_string())?;
    let beta = res.betas[0];
    ensure(res.certified, || format!("not certified: {res:?}"))?;
    ensure((beta + 1.0).abs() <= 1e-8, || format!("beta = {beta}"))?;
    ensure(beta <= 0.0, || format!("beta = {beta} has the wrong sign"))?;
    ensure(res.residual <= 1e-8, || format!("residual {}", res.residual))?;
    // feasible grid with spacing 1e-3 around the candidate
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..=1000 {
        for j in 0..=1000 {
            let x = [i as f64 * 1e-3, j as f64 * 1e-3];
            if 1.0 - x[0] - x[1] <= 0.0 {
                let c = x[0] * x[0] + x[1] * x[1];
                if c < best.0 {
                    best = (c, x);
                }
            }
        }
    }
    let gap = (best.1[0] - 0.5).hypot(best.1[1] - 0.5);
    ensure(gap <= 2e-3, || format!("grid minimizer {:?}", best.1))?;
    Ok(format!("beta = {beta:.12}, residual {:.1e}", res.residual))
}

/// `x1(1)` of the double integrator from rest under bang-bang values on ten
/// equal intervals, in closed form.
fn double_integrator_x1(u: &[f64]) -> f64 {
    let h = 1.0 / u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(k, uk)| {
            let (a, b) = (1.0 - k as f64 * h, 1.0 - (k + 1) as f64 * h);
            uk * (a * a - b * b) / 2.0
        })
        .sum()
}

fn pmp_double_integrator() -> Check {
    let start = Instant::now();
    let problem = common::double_integrator();
    let options = PmpOptions::default();
    let cert =
        ocp::verify_pmp(&problem, &ControlSignal::Constant(vec![1.0]), None, &options).map_err(|e| e.to_string())?;
    ensure(cert.verdict == Verdict::Certified, || {
        format!("verdict {:?}: {:?}", cert.verdict, cert.notes)
    })?;
    ensure((cert.p_c + 1.0).abs() <= 1e-12, || format!("p_c = {}", cert.p_c))?;
    ensure(cert.normality == Some(NormalityClass::Normal), || {
        format!("normality {:?}", cert.normality)
    })?;
    let mut worst = 0.0_f64;
    for (t, p) in cert.adjoint.times.iter().zip(&cert.adjoint.p) {
        worst = worst.max((p[0] - 1.0).abs()).max((p[1] - (1.0 - t)).abs());
    }
    ensure(worst <= 1e-6, || format!("adjoint off (1, 1-t) by {worst:e}"))?;

    let mut best = (f64::INFINITY, 0u32);
    for mask in 0u32..1 << 10 {
        let u: Vec<f64> = (0..10).map(|k| if mask >> k & 1 == 1 { 1.0 } else { -1.0 }).collect();
        let cost = -double_integrator_x1(&u);
        if cost < best.0 {
            best = (cost, mask);
        }
    }
    ensure(best.1 == (1 << 10) - 1, || {
        format!("oracle prefers mask {:#012b}", best.1)
    })?;
    let all_ones = ControlSignal::Piecewise(vec![vec![1.0]; 10]);
    let simulated = ocp::objective(&problem, &all_ones, 100).map_err(|e| e.to_string())?;
    ensure((simulated - best.0).abs() <= 1e-12, || {
        format!("simulated cost {simulated} vs {}", best.0)
    })?;

    let refuted =
        ocp::verify_pmp(&problem, &ControlSignal::Constant(vec![-1.0]), None, &options).map_err(|e| e.to_string())?;
    ensure(refuted.verdict == Verdict::Refuted, || {
        format!("u = -1 verdict {:?}", refuted.verdict)
    })?;
    let residual = refuted.max_condition.max_residual;
    ensure(residual >= 1.9, || format!("u = -1 residual {residual}"))?;
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "adjoint error {worst:.1e}, oracle cost {:.3}, u = -1 residual {residual:.3}",
        best.0
    ))
}

fn needle_decay() -> Check {
    let problem = ControlProblem::new(
        (0.0, 1.0),
        vec![0.0, 0.0],
        FnField::linear(vec![vec![0.0, 1.0], vec![0.0, 0.0]], vec![vec![0.0], vec![1.0]]).into_arc(),
        None,
        FnScalar::affine(vec![-1.0, 0.0], 0.0).into_arc(),
        Target::Free,
        vec![vec![-1.0], vec![1.0]],
    )
    .map_err(|e| e.to_string())?;
    let process =
        ocp::integrate_state(&problem, &ControlSignal::Constant(vec![1.0]), 400).map_err(|e| e.to_string())?;
    let specs: Vec<NeedleSpec> = [0.25, 0.5, 0.75]
        .iter()
        .map(|&t| NeedleSpec { t, u: vec![-1.0] })
        .collect();
    let report =
        ocp::check_needle_expansion(&problem, &process, &specs, &[0.1, 0.1, 0.1], 5).map_err(|e| e.to_string())?;
    ensure(report.decay_factors.len() == 5, || {
        format!("{} decay factors", report.decay_factors.len())
    })?;
    let min = report.decay_factors.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(min >= 1.8, || format!("decay factors {:?}", report.decay_factors))?;
    Ok(format!("smallest decay factor {min:.4}"))
}

fn open_mapping() -> Check {
    let quadrant = span(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
    let map = ConicMap::new(vec![0.0, 0.0], quadrant, 0.5, 2, |c| vec![c[0] + norm(c).powi(2), c[1]])
        .map_err(|e| e.to_string())?;
    let v = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
    let opts = WitnessOptions {
        coverage_targets: 200,
        ..WitnessOptions::default()
    };
    let w = approx::open_mapping_witness(&map, &LinearMap::identity(2), &v, &opts).map_err(|e| e.to_string())?;
    ensure(w.coverage.targets >= 200, || {
        format!("only {} targets", w.coverage.targets)
    })?;
    ensure(w.coverage_fraction >= 0.99, || {
        format!("coverage {}", w.coverage_fraction)
    })?;

    let phi = |x: &[f64]| vec![x[0] + 0.05 * x[0].sin(), x[1] + 0.05 * x[1].cos()];
    let r = approx::near_identity_covering(&phi, &[0.0, 0.0], 1.0, 0.1, 200, 0).map_err(|e| e.to_string())?;
    ensure(r.attained == r.targets, || {
        format!("contraction attained {} of {}", r.attained, r.targets)
    })?;
    Ok(format!(
        "witness coverage {:.3} (r_bar {:.3e}), contraction {}/{}",
        w.coverage_fraction, w.r_bar, r.attained, r.targets
    ))
}

fn amp_degenerate() -> Check {
    for s in [
        Cone::zero(2),
        Cone::whole_space(2),
        span(2, &[&[1.0, 0.0], &[0.0, 1.0]]),
    ] {
        let p = AbstractProblem::new(Cone::zero(2), s, vec![3.0, -1.0]).map_err(|e| e.to_string())?;
        let m = amp::solve_amp(&p).map_err(|e| e.to_string())?.ok_or("no multipliers")?;
        ensure(m.lambda == vec![0.0, 0.0] && m.lambda_c == -1.0, || format!("{m:?}"))?;
    }
    Ok("(0, -1) for three targets".into())
}

fn rk4_order() -> Check {
    let problem = ControlProblem::new(
        (0.0, 1.0),
        vec![1.0],
        FnField::linear(vec![vec![1.0]], vec![vec![0.0]]).into_arc(),
        None,
        FnScalar::affine(vec![0.0], 0.0).into_arc(),
        Target::Free,
        vec![vec![0.0]],
    )
    .map_err(|e| e.to_string())?;
    let err = |n: usize| -> Result<f64, String> {
        let p = ocp::integrate_state(&problem, &ControlSignal::Constant(vec![0.0]), n).map_err(|e| e.to_string())?;
        Ok((p.final_state()[0] - std::f64::consts::E).abs())
    };
    let mut factors = Vec::new();
    for n in [5, 10, 20, 40] {
        let f = err(n)? / err(2 * n)?;
        ensure((12.0..=20.0).contains(&f), || format!("N = {n}: factor {f}"))?;
        factors.push(format!("{f:.2}"));
    }
    Ok(format!("factors {}", factors.join(", ")))
}

fn dual_numbers() -> Check {
    let (worst, corpus) = common::dual_vs_central_difference(50, 2024);
    ensure(corpus.len() == 50, || {
        format!("corpus has {} expressions", corpus.len())
    })?;
    ensure(worst <= 1e-6, || format!("worst relative error {worst:e}"))?;
    Ok(format!("worst relative error {worst:.1e} over 50 expressions"))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("cone example table", cone_examples),
        ("polar identities", polar_identities),
        ("separability vs transversality", separation_vs_transversality),
        ("transversality dichotomy", dichotomy),
        ("lagrange circle", lagrange_circle),
        ("kkt half-plane", kkt_half_plane),
        ("pmp double integrator", pmp_double_integrator),
        ("needle expansion decay", needle_decay),
        ("directional open mapping", open_mapping),
        ("amp degenerate reachable cone", amp_degenerate),
        ("rk4 order", rk4_order),
        ("dual numbers vs central differences", dual_numbers),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.3}s): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.3}s): {why}", k + 1);
            }
        }
    }
    println!(
        "{} passed, {failed} failed in {:.2}s",
        criteria.len() - failed,
        total.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
