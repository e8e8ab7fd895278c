//! Command-line front end: problem files in, human-readable reports and JSON
//! certificates out.
//!
//! Exit codes: 0 certified or true, 1 refuted or false, 2 unverified,
//! 3 input error.

pub mod doc;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::amp::{self, AbstractProblem};
use crate::approx::{self, WitnessOptions};
use crate::cone::{self, Cone};
use crate::error::Error;
use crate::func::SmoothScalar;
use crate::ocp::{self, ControlSignal, NeedleSpec, PmpOptions, Verdict};
use crate::tol;

pub use doc::{load_problem, problem_from_value, InputError, Problem};
use doc::{ConeDoc, LoadedControl, LoadedNlp, LoadedOpenMap};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_UNVERIFIED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// `--needles`: a count of equispaced interior times or a comma-separated
/// list of times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NeedleGrid {
    Count(usize),
    Times(Vec<f64>),
}

impl FromStr for NeedleGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(k) = s.trim().parse::<usize>() {
            return Ok(NeedleGrid::Count(k));
        }
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad needle time '{p}': {e}"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(NeedleGrid::Times)
    }
}

/// Options shared by every command. Flags override values in the document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
pub struct RunOptions {
    /// Write a JSON certificate to this path
    #[arg(long, global = true, value_name = "PATH")]
    #[serde(skip)]
    pub cert: Option<PathBuf>,
    /// Mesh intervals for state and adjoint integration
    #[arg(long, global = true, value_name = "N")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<usize>,
    /// Certification tolerance
    #[arg(long, global = true, value_name = "X")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Seed for randomized checks (default 0)
    #[arg(long, global = true, value_name = "K")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Needle grid: a count or a comma-separated list of times
    #[arg(long, global = true, value_name = "GRID")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub needles: Option<NeedleGrid>,
}

#[derive(Debug, Parser)]
#[command(
    name = "setsep",
    version,
    about = "Cone separation, multiplier rules and maximum principle checks"
)]
pub struct Cli {
    #[command(flatten)]
    pub options: RunOptions,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Cone predicates on a `cones` document
    #[command(subcommand)]
    Cone(ConeCommand),
    /// Multipliers for an `abstract` document
    #[command(subcommand)]
    Amp(AmpCommand),
    /// Kuhn-Tucker multipliers for an `nlp` document
    #[command(subcommand)]
    Kkt(VerifyCommand),
    /// Lagrange multipliers for an `nlp` document with equality constraints
    #[command(subcommand)]
    Lagrange(VerifyCommand),
    /// Vanishing cost gradient at `x_star` of an unconstrained `nlp` document
    Fermat { file: PathBuf },
    /// Open mapping witness for an `openmap` document
    #[command(subcommand)]
    Openmap(OpenmapCommand),
    /// Maximum principle for the candidate of a `control` document
    #[command(subcommand)]
    Pmp(VerifyCommand),
    /// First-order needle expansion for a `control` document
    #[command(subcommand)]
    Needle(NeedleCommand),
}

#[derive(Debug, Clone, Subcommand)]
pub enum ConeCommand {
    /// Look for a nonzero linear form separating k1 and k2
    Separate { file: PathBuf },
    /// Decide k1 - k2 = R^n; prints a separating form otherwise
    Transversal { file: PathBuf },
    /// Polar of k1
    Polar { file: PathBuf },
}

#[derive(Debug, Clone, Subcommand)]
pub enum AmpCommand {
    Solve { file: PathBuf },
}

#[derive(Debug, Clone, Subcommand)]
pub enum VerifyCommand {
    Verify { file: PathBuf },
}

#[derive(Debug, Clone, Subcommand)]
pub enum OpenmapCommand {
    Check { file: PathBuf },
}

#[derive(Debug, Clone, Subcommand)]
pub enum NeedleCommand {
    Check { file: PathBuf },
}

/// The command names, as recorded in certificates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "cone separate")]
    ConeSeparate,
    #[serde(rename = "cone transversal")]
    ConeTransversal,
    #[serde(rename = "cone polar")]
    ConePolar,
    #[serde(rename = "amp solve")]
    AmpSolve,
    #[serde(rename = "kkt verify")]
    KktVerify,
    #[serde(rename = "lagrange verify")]
    LagrangeVerify,
    #[serde(rename = "fermat")]
    Fermat,
    #[serde(rename = "openmap check")]
    OpenmapCheck,
    #[serde(rename = "pmp verify")]
    PmpVerify,
    #[serde(rename = "needle check")]
    NeedleCheck,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("action names serialize");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

impl Command {
    pub fn split(&self) -> (Action, &Path) {
        match self {
            Command::Cone(ConeCommand::Separate { file }) => (Action::ConeSeparate, file),
            Command::Cone(ConeCommand::Transversal { file }) => (Action::ConeTransversal, file),
            Command::Cone(ConeCommand::Polar { file }) => (Action::ConePolar, file),
            Command::Amp(AmpCommand::Solve { file }) => (Action::AmpSolve, file),
            Command::Kkt(VerifyCommand::Verify { file }) => (Action::KktVerify, file),
            Command::Lagrange(VerifyCommand::Verify { file }) => (Action::LagrangeVerify, file),
            Command::Fermat { file } => (Action::Fermat, file),
            Command::Openmap(OpenmapCommand::Check { file }) => (Action::OpenmapCheck, file),
            Command::Pmp(VerifyCommand::Verify { file }) => (Action::PmpVerify, file),
            Command::Needle(NeedleCommand::Check { file }) => (Action::NeedleCheck, file),
        }
    }
}

/// Result of one command: exit code, verdict word, report lines and the
/// machine-readable result embedded in certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub exit_code: i32,
    pub verdict: String,
    pub report: Vec<String>,
    pub result: Value,
}

impl Outcome {
    fn new(exit_code: i32, verdict: &str, report: Vec<String>, result: Value) -> Self {
        Self {
            exit_code,
            verdict: verdict.to_string(),
            report,
            result,
        }
    }

    fn input_errors(errors: &[InputError]) -> Self {
        let mut report = vec!["input error:".to_string()];
        report.extend(errors.iter().map(|e| format!("  {e}")));
        Self::new(EXIT_INPUT, "input-error", report, json!({ "errors": errors }))
    }

    fn library_error(e: &Error) -> Self {
        Self::input_errors(&[InputError {
            field: "document".into(),
            message: e.to_string(),
        }])
    }
}

/// Self-contained record of a run: re-executing `command` on `input` with
/// `options` reproduces `verdict`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub tool: String,
    pub version: String,
    pub command: Action,
    pub verdict: String,
    pub exit_code: i32,
    pub seed: u64,
    pub options: RunOptions,
    pub tolerances: Value,
    pub input: Value,
    pub result: Value,
}

fn tolerances(opts: &RunOptions) -> Value {
    json!({
        "certify": opts.tol.unwrap_or(tol::CERTIFY),
        "refute": tol::REFUTE,
        "stationarity": opts.tol.unwrap_or(tol::STATIONARITY),
        "lp": tol::LP,
        "multiplier": tol::MULTIPLIER,
        "diff_threshold": tol::DIFF_THRESHOLD,
        "fixed_point_iterations": tol::FIXED_POINT_ITERS,
    })
}

/// Runs `action` on an already-parsed document.
pub fn execute(action: Action, input: &Value, opts: &RunOptions) -> Outcome {
    let problem = match problem_from_value(input) {
        Ok(p) => p,
        Err(errors) => return Outcome::input_errors(&errors),
    };
    let expected = match action {
        Action::ConeSeparate | Action::ConeTransversal | Action::ConePolar => "cones",
        Action::AmpSolve => "abstract",
        Action::KktVerify | Action::LagrangeVerify | Action::Fermat => "nlp",
        Action::OpenmapCheck => "openmap",
        Action::PmpVerify | Action::NeedleCheck => "control",
    };
    if problem.kind() != expected {
        return Outcome::input_errors(&[InputError {
            field: "kind".into(),
            message: format!("'{action}' needs a '{expected}' document, got '{}'", problem.kind()),
        }]);
    }
    let outcome = match (action, problem) {
        (Action::ConeSeparate, Problem::Cones(k1, k2)) => cone_separate(&k1, k2.as_ref()),
        (Action::ConeTransversal, Problem::Cones(k1, k2)) => cone_transversal(&k1, k2.as_ref()),
        (Action::ConePolar, Problem::Cones(k1, _)) => Ok(cone_polar(&k1)),
        (Action::AmpSolve, Problem::Abstract(p)) => amp_solve(&p),
        (Action::KktVerify, Problem::Nlp(p)) => kkt_verify(&p, opts),
        (Action::LagrangeVerify, Problem::Nlp(p)) => lagrange_verify(&p, opts),
        (Action::Fermat, Problem::Nlp(p)) => Ok(fermat(&p, opts)),
        (Action::OpenmapCheck, Problem::OpenMap(p)) => return openmap_check(&p, opts),
        (Action::PmpVerify, Problem::Control(p)) => pmp_verify(&p, opts),
        (Action::NeedleCheck, Problem::Control(p)) => needle_check(&p, opts),
        _ => unreachable!("kind checked above"),
    };
    outcome.unwrap_or_else(|e| Outcome::library_error(&e))
}

/// Serialized name of a unit enum variant.
fn word<T: Serialize>(v: T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        _ => "?".into(),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn second(k2: Option<&Cone>) -> crate::Result<&Cone> {
    k2.ok_or_else(|| Error::InvalidArgument("this command needs a second cone 'k2'".into()))
}

fn cone_separate(k1: &Cone, k2: Option<&Cone>) -> crate::Result<Outcome> {
    let k2 = second(k2)?;
    Ok(match cone::linear_separation(k1, k2)? {
        Some(c) => Outcome::new(
            EXIT_TRUE,
            "separable",
            vec![
                "separable".into(),
                format!("p = {}", fmt_vec(&c.p)),
                format!("p·w ≥ 0 on k1 and p·w ≤ 0 on k2 ({})", c.scale_note),
            ],
            json!({ "separable": true, "p": c.p }),
        ),
        None => Outcome::new(
            EXIT_FALSE,
            "not-separable",
            vec!["not separable: the cones are transversal".into()],
            json!({ "separable": false }),
        ),
    })
}

fn cone_transversal(k1: &Cone, k2: Option<&Cone>) -> crate::Result<Outcome> {
    let k2 = second(k2)?;
    if cone::is_transversal(k1, k2)? {
        let strong = cone::is_strongly_transversal(k1, k2)?;
        let kind = if strong { "strongly transversal" } else { "transversal" };
        return Ok(Outcome::new(
            EXIT_TRUE,
            "transversal",
            vec![kind.into()],
            json!({ "transversal": true, "strongly_transversal": strong }),
        ));
    }
    let p = cone::linear_separation(k1, k2)?.map(|c| c.p);
    let mut report = vec!["not transversal".to_string()];
    if let Some(p) = &p {
        report.push(format!("separating form p = {}", fmt_vec(p)));
    }
    Ok(Outcome::new(
        EXIT_FALSE,
        "not-transversal",
        report,
        json!({ "transversal": false, "strongly_transversal": false, "p": p }),
    ))
}

fn cone_polar(k1: &Cone) -> Outcome {
    let polar = k1.polar();
    Outcome::new(
        EXIT_TRUE,
        "polar",
        vec![format!("polar: {polar}")],
        json!({ "polar": ConeDoc::from_cone(&polar) }),
    )
}

fn amp_solve(p: &AbstractProblem) -> crate::Result<Outcome> {
    let Some(m) = amp::solve_amp(p)? else {
        return Ok(Outcome::new(
            EXIT_FALSE,
            "no-multipliers",
            vec!["no multipliers: the point is not certified".into()],
            json!({ "multipliers": null }),
        ));
    };
    let normality = amp::classify_normality(p)?;
    let check = m.verify(p)?;
    let code = if check.ok() { EXIT_TRUE } else { EXIT_UNVERIFIED };
    Ok(Outcome::new(
        code,
        if check.ok() { "multipliers" } else { "unverified" },
        vec![
            format!("lambda = {}", fmt_vec(&m.lambda)),
            format!("lambda_c = {:.6}", m.lambda_c),
            format!("normality: {}", word(normality)),
        ],
        json!({ "multipliers": m, "check": check, "normality": normality }),
    ))
}

fn constraint_refs(v: &[crate::expr::ExprScalar]) -> Vec<&dyn SmoothScalar> {
    v.iter().map(|f| f as &dyn SmoothScalar).collect()
}

fn cost_gradient(p: &LoadedNlp) -> crate::Result<Vec<f64>> {
    let g = p.cost.try_gradient(&p.x_star).map_err(Error::from)?;
    Ok(g)
}

fn kkt_verify(p: &LoadedNlp, opts: &RunOptions) -> crate::Result<Outcome> {
    let tol = opts.tol.unwrap_or(tol::STATIONARITY);
    let g = cost_gradient(p)?;
    let r = amp::kkt_multipliers(&constraint_refs(&p.eq), &constraint_refs(&p.ineq), &g, &p.x_star)?;
    let ok = r.residual <= tol;
    Ok(Outcome::new(
        if ok { EXIT_TRUE } else { EXIT_FALSE },
        if ok { "certified" } else { "refuted" },
        vec![
            format!("alphas = {}", fmt_vec(&r.alphas)),
            format!("betas = {} (active {:?})", fmt_vec(&r.betas), r.active),
            format!("lambda_c = {}", r.lambda_c),
            format!("residual = {:e} (tolerance {tol:e})", r.residual),
        ],
        json!({ "kkt": r, "tolerance": tol }),
    ))
}

fn lagrange_verify(p: &LoadedNlp, opts: &RunOptions) -> crate::Result<Outcome> {
    if !p.ineq.is_empty() {
        return Err(Error::InvalidArgument(
            "lagrange verify takes equality constraints only; use kkt verify".into(),
        ));
    }
    let tol = opts.tol.unwrap_or(tol::STATIONARITY);
    let g = cost_gradient(p)?;
    let r = amp::lagrange_multipliers(&constraint_refs(&p.eq), &g, &p.x_star)?;
    let ok = r.residual <= tol;
    Ok(Outcome::new(
        if ok { EXIT_TRUE } else { EXIT_FALSE },
        if ok { "certified" } else { "refuted" },
        vec![
            format!("alphas = {}", fmt_vec(&r.alphas)),
            format!("lambda_c = {}", r.lambda_c),
            format!("residual = {:e} (tolerance {tol:e})", r.residual),
            "stationarity only: maximizers pass as well".into(),
        ],
        json!({ "lagrange": r, "tolerance": tol }),
    ))
}

fn fermat(p: &LoadedNlp, opts: &RunOptions) -> Outcome {
    if !p.eq.is_empty() || !p.ineq.is_empty() {
        return Outcome::input_errors(&[InputError {
            field: "eq".into(),
            message: "fermat takes an unconstrained problem".into(),
        }]);
    }
    let tol = opts.tol.unwrap_or(tol::ATTAIN);
    let g = match cost_gradient(p) {
        Ok(g) => g,
        Err(e) => return Outcome::library_error(&e),
    };
    let ok = amp::fermat_check(&g, tol);
    Outcome::new(
        if ok { EXIT_TRUE } else { EXIT_FALSE },
        if ok { "stationary" } else { "not-stationary" },
        vec![format!("grad = {} (tolerance {tol:e})", fmt_vec(&g))],
        json!({ "gradient": g, "stationary": ok, "tolerance": tol }),
    )
}

fn openmap_check(p: &LoadedOpenMap, opts: &RunOptions) -> Outcome {
    let wopts = WitnessOptions {
        seed: opts.seed.or(p.options.seed).unwrap_or(0),
        closeness_samples: p.options.closeness_samples.unwrap_or(50),
        coverage_targets: p.options.targets.unwrap_or(200),
        ..WitnessOptions::default()
    };
    let threshold = 1.0 - opts.tol.unwrap_or(0.01);
    match approx::open_mapping_witness(&p.map, &p.linear, &p.v, &wopts) {
        Ok(w) => {
            let ok = w.coverage_fraction >= threshold && w.diff.pass;
            Outcome::new(
                if ok { EXIT_TRUE } else { EXIT_UNVERIFIED },
                if ok { "covered" } else { "unverified" },
                vec![
                    format!(
                        "gamma: {} generators, r_bar = {:e}",
                        w.gamma.generators().len(),
                        w.r_bar
                    ),
                    format!("alpha = {:e}, beta = {:e}, s_bar = {:e}", w.alpha, w.beta, w.s_bar),
                    format!(
                        "coverage {}/{} = {:.4} (escaped {}, unverified {})",
                        w.coverage.attained,
                        w.coverage.targets,
                        w.coverage_fraction,
                        w.coverage.escaped,
                        w.coverage.unverified
                    ),
                    format!(
                        "differentiability check: {} ({})",
                        if w.diff.pass { "pass" } else { "fail" },
                        w.diff.note.as_deref().unwrap_or("no note")
                    ),
                ],
                json!({
                    "gamma": w.gamma.generators(),
                    "r_bar": w.r_bar,
                    "basis_vectors": w.basis_vectors,
                    "preimages": w.preimages,
                    "pseudo_inverse": w.pseudo_inverse.to_rows(),
                    "alpha": w.alpha,
                    "beta": w.beta,
                    "s_star": w.s_star,
                    "s_bar": w.s_bar,
                    "coverage_fraction": w.coverage_fraction,
                    "coverage": w.coverage,
                    "diff": w.diff,
                    "identity_defect": w.identity_defect,
                    "centroid_defect": w.centroid_defect,
                    "seed": wopts.seed,
                }),
            )
        }
        Err(Error::NotInterior) => Outcome::new(
            EXIT_FALSE,
            "not-interior",
            vec!["v is not interior to L·C".into()],
            json!({ "error": "v is not interior to L·C" }),
        ),
        Err(e @ (Error::SearchFailed(_) | Error::Precondition(_))) => Outcome::new(
            EXIT_UNVERIFIED,
            "unverified",
            vec![e.to_string()],
            json!({ "error": e.to_string() }),
        ),
        Err(e) => Outcome::library_error(&e),
    }
}

fn pmp_options(p: &LoadedControl, opts: &RunOptions) -> PmpOptions {
    let mut o = PmpOptions {
        mesh: opts.mesh.or(p.options.mesh).unwrap_or(ocp::DEFAULT_MESH),
        ..PmpOptions::default()
    };
    if let Some(t) = opts.tol.or(p.options.tol) {
        o.certify_tol = t;
        o.refute_tol = o.refute_tol.max(t);
    }
    match &opts.needles {
        Some(NeedleGrid::Count(k)) => o.needle_count = *k,
        Some(NeedleGrid::Times(t)) => o.needle_times = Some(t.clone()),
        None => {
            if let Some(k) = p.options.needles {
                o.needle_count = k;
            }
            o.needle_times = p.options.needle_times.clone();
        }
    }
    o
}

fn candidate(p: &LoadedControl) -> crate::Result<&ControlSignal> {
    p.candidate
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("the document has no 'candidate' control".into()))
}

fn pmp_verify(p: &LoadedControl, opts: &RunOptions) -> crate::Result<Outcome> {
    let options = pmp_options(p, opts);
    let specs = if opts.needles.is_none() {
        p.options.needle_specs.as_deref()
    } else {
        None
    };
    let c = ocp::verify_pmp(&p.problem, candidate(p)?, specs, &options)?;
    let code = match c.verdict {
        Verdict::Certified => EXIT_TRUE,
        Verdict::Refuted => EXIT_FALSE,
        Verdict::Unverified => EXIT_UNVERIFIED,
    };
    let verdict = word(c.verdict);
    let verdict = verdict.as_str();
    let mut report = vec![
        format!("verdict: {verdict}"),
        format!("final state {}, cost {:.6}", fmt_vec(&c.final_state), c.cost),
        format!("lambda = {}, p_c = {:.6}", fmt_vec(&c.lambda), c.p_c),
        format!("p(b) = {}", fmt_vec(&c.p_b)),
        format!(
            "maximum condition residual {:.3e} (worst at t = {:.6})",
            c.max_condition.max_residual, c.max_condition.worst_time
        ),
        format!("nontriviality {:.3e}", c.nontriviality),
        format!("{} needles, mesh {}", c.needles, c.mesh),
    ];
    if let Some(n) = c.normality {
        report.push(format!("normality: {}", word(n)));
    }
    report.extend(c.notes.iter().cloned());
    let result = json!({ "pmp": c, "options": options });
    Ok(Outcome::new(code, verdict, report, result))
}

fn needle_check(p: &LoadedControl, opts: &RunOptions) -> crate::Result<Outcome> {
    let mesh = opts.mesh.or(p.options.mesh).unwrap_or(ocp::DEFAULT_MESH);
    let problem = &p.problem;
    let process = ocp::integrate_state(problem, candidate(p)?, mesh)?;
    let specs: Vec<NeedleSpec> = match (&opts.needles, &p.options.needle_specs) {
        (None, Some(s)) => s.clone(),
        (grid, _) => {
            let times = match grid {
                Some(NeedleGrid::Times(t)) => t.clone(),
                Some(NeedleGrid::Count(k)) => ocp::interior_times(problem.horizon, *k),
                None => p
                    .options
                    .needle_times
                    .clone()
                    .unwrap_or_else(|| ocp::interior_times(problem.horizon, p.options.needles.unwrap_or(3))),
            };
            times
                .iter()
                .map(|t| NeedleSpec {
                    t: *t,
                    u: farthest_sample(problem, &process, *t),
                })
                .collect()
        }
    };
    let eps = match &p.options.eps {
        Some(e) => e.clone(),
        None => default_widths(problem.horizon, &specs),
    };
    let halvings = p.options.halvings.unwrap_or(5);
    let r = ocp::check_needle_expansion(problem, &process, &specs, &eps, halvings)?;
    let mut report = vec![format!("{} needles, {} halvings", specs.len(), halvings)];
    for (k, (e, q)) in r.eps_norms.iter().zip(&r.ratios).enumerate() {
        report.push(format!("|eps| = {e:.3e}  ratio = {q:.3e}"));
        if let Some(d) = r.decay_factors.get(k) {
            report.push(format!("  decay {d:.3}"));
        }
    }
    report.push(if r.pass { "pass".into() } else { "fail".into() });
    Ok(Outcome::new(
        if r.pass { EXIT_TRUE } else { EXIT_FALSE },
        if r.pass { "pass" } else { "fail" },
        report,
        json!({ "needles": specs, "eps": eps, "report": r }),
    ))
}

/// Control sample farthest from the candidate's value just before `t`.
fn farthest_sample(problem: &ocp::ControlProblem, process: &ocp::Process, t: f64) -> Vec<f64> {
    let (a, b) = problem.horizon;
    let j = (((t - a) / (b - a) * process.steps() as f64).ceil() as usize).clamp(1, process.steps()) - 1;
    let current = &process.controls[j];
    problem
        .control_samples
        .iter()
        .max_by(|x, y| {
            let dx = crate::linalg::norm(&crate::linalg::sub(x, current));
            let dy = crate::linalg::norm(&crate::linalg::sub(y, current));
            dx.total_cmp(&dy)
        })
        .cloned()
        .unwrap_or_else(|| current.clone())
}

/// Half the smallest gap between consecutive needle times (and the initial
/// time), so the needle intervals stay disjoint.
fn default_widths(horizon: (f64, f64), specs: &[NeedleSpec]) -> Vec<f64> {
    let mut times: Vec<f64> = specs.iter().map(|s| s.t).collect();
    times.push(horizon.0);
    times.sort_by(f64::total_cmp);
    let gap = times
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|g| *g > 0.0)
        .fold(horizon.1 - horizon.0, f64::min);
    vec![0.5 * gap; specs.len()]
}

fn read_document(path: &Path) -> Result<Value, Outcome> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Outcome::input_errors(&[InputError {
            field: path.display().to_string(),
            message: e.to_string(),
        }])
    })?;
    serde_json::from_str(&text).map_err(|e| {
        Outcome::input_errors(&[InputError {
            field: "document".into(),
            message: e.to_string(),
        }])
    })
}

/// Builds the certificate for a finished run.
pub fn certificate(action: Action, input: Value, opts: &RunOptions, outcome: &Outcome) -> Certificate {
    Certificate {
        tool: "setsep".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: action,
        verdict: outcome.verdict.clone(),
        exit_code: outcome.exit_code,
        seed: opts.seed.unwrap_or(0),
        options: RunOptions {
            cert: None,
            ..opts.clone()
        },
        tolerances: tolerances(opts),
        input,
        result: outcome.result.clone(),
    }
}

/// Re-executes the command recorded in a certificate.
pub fn rerun_certificate(cert: &Certificate) -> Outcome {
    execute(cert.command, &cert.input, &cert.options)
}

pub fn read_certificate(path: &Path) -> std::io::Result<Certificate> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(std::io::Error::other)
}

/// Parses `args` (program name first), runs the command and writes the
/// report to `out`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(out, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_TRUE };
        }
    };
    let (action, path) = cli.command.split();
    let input = match read_document(path) {
        Ok(v) => v,
        Err(o) => {
            emit(out, &o);
            return o.exit_code;
        }
    };
    let outcome = execute(action, &input, &cli.options);
    emit(out, &outcome);
    if let Some(cert_path) = &cli.options.cert {
        let cert = certificate(action, input, &cli.options, &outcome);
        let written = serde_json::to_string_pretty(&cert)
            .map_err(std::io::Error::other)
            .and_then(|s| std::fs::write(cert_path, s));
        if let Err(e) = written {
            let _ = writeln!(out, "could not write certificate {}: {e}", cert_path.display());
            return EXIT_INPUT;
        }
        let _ = writeln!(out, "certificate written to {}", cert_path.display());
    }
    outcome.exit_code
}

fn emit(out: &mut dyn Write, outcome: &Outcome) {
    for line in &outcome.report {
        let _ = writeln!(out, "{line}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cones(k1: Value, k2: Value) -> Value {
        json!({"kind": "cones", "k1": k1, "k2": k2})
    }

    #[test]
    fn needle_grid_parses_counts_and_lists() {
        assert_eq!("16".parse::<NeedleGrid>().unwrap(), NeedleGrid::Count(16));
        assert_eq!(
            "0.25, 0.5".parse::<NeedleGrid>().unwrap(),
            NeedleGrid::Times(vec![0.25, 0.5])
        );
        assert!("a,b".parse::<NeedleGrid>().is_err());
    }

    #[test]
    fn action_names_round_trip() {
        assert_eq!(Action::PmpVerify.to_string(), "pmp verify");
        let v = serde_json::to_value(Action::ConeTransversal).unwrap();
        assert_eq!(serde_json::from_value::<Action>(v).unwrap(), Action::ConeTransversal);
    }

    #[test]
    fn transversal_pair_and_separated_pair() {
        let quadrant = json!({"dim": 2, "generators": [[1, 0], [0, 1]]});
        let opposite = json!({"dim": 2, "generators": [[-1, 0], [0, -1]]});
        // Q - Q is the plane, Q - (-Q) = Q is not
        let o = execute(
            Action::ConeTransversal,
            &cones(quadrant.clone(), quadrant.clone()),
            &RunOptions::default(),
        );
        assert_eq!(o.exit_code, EXIT_TRUE);
        let o = execute(
            Action::ConeTransversal,
            &cones(quadrant, opposite),
            &RunOptions::default(),
        );
        assert_eq!(o.exit_code, EXIT_FALSE);
        assert!(o.report.iter().any(|l| l.starts_with("separating form")));
    }

    #[test]
    fn wrong_kind_is_an_input_error() {
        let doc = json!({"kind": "abstract", "reachable": {"dim": 1, "generators": [[1]]}, "target": {"dim": 1, "generators": []}, "cost_gradient": [1]});
        let o = execute(Action::ConePolar, &doc, &RunOptions::default());
        assert_eq!(o.exit_code, EXIT_INPUT);
        assert_eq!(
            execute(Action::AmpSolve, &doc, &RunOptions::default()).exit_code,
            EXIT_TRUE
        );
    }

    #[test]
    fn fermat_exit_codes() {
        let doc = |x: f64| json!({"kind": "nlp", "n": 2, "cost": "x1^2 + x2^2", "x_star": [x, 0.0]});
        assert_eq!(
            execute(Action::Fermat, &doc(0.0), &RunOptions::default()).exit_code,
            EXIT_TRUE
        );
        assert_eq!(
            execute(Action::Fermat, &doc(1e-3), &RunOptions::default()).exit_code,
            EXIT_FALSE
        );
    }

    #[test]
    fn unknown_command_prints_usage() {
        let mut out = Vec::new();
        assert_eq!(run(["setsep", "frobnicate"], &mut out), EXIT_INPUT);
        assert!(String::from_utf8(out).unwrap().contains("Usage"));
        let mut out = Vec::new();
        assert_eq!(run(["setsep", "--help"], &mut out), EXIT_TRUE);
    }
}
