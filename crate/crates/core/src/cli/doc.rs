//! Problem documents: JSON layouts, validation and conversion to solver
//! inputs.
//!
//! Each document carries a `"kind"` tag. Validation collects every problem it
//! finds instead of stopping at the first, and each entry names the offending
//! field path.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::amp::AbstractProblem;
use crate::approx::ConicMap;
use crate::cone::Cone;
use crate::expr::{parse_expression, Dims, Expr, ExprCost, ExprField, ExprScalar};
use crate::func::ScalarFn;
use crate::linalg::LinearMap;
use crate::ocp::{ControlProblem, ControlSignal, NeedleSpec, Target};

/// One validation failure: a field path and what is wrong with it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

pub type InputErrors = Vec<InputError>;

fn input_error(field: impl Into<String>, message: impl Into<String>) -> InputError {
    InputError {
        field: field.into(),
        message: message.into(),
    }
}

/// `{"dim": n, "generators": [...]}` or `{"dim": n, "ineq": [...], "eq": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConeDoc {
    Generators {
        dim: usize,
        generators: Vec<Vec<f64>>,
    },
    Constraints {
        dim: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        ineq: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        eq: Vec<Vec<f64>>,
    },
}

impl ConeDoc {
    pub fn to_cone(&self, field: &str, errors: &mut InputErrors) -> Option<Cone> {
        let built = match self {
            ConeDoc::Generators { dim, generators } => Cone::span(*dim, generators.clone()),
            ConeDoc::Constraints { dim, ineq, eq } => Cone::halfspaces(*dim, ineq.clone(), eq.clone()),
        };
        built.map_err(|e| errors.push(input_error(field, e.to_string()))).ok()
    }

    pub fn from_cone(cone: &Cone) -> Self {
        match cone {
            Cone::V(v) => ConeDoc::Generators {
                dim: v.dim(),
                generators: v.generators().to_vec(),
            },
            Cone::H(h) => ConeDoc::Constraints {
                dim: h.dim(),
                ineq: h.ineq_normals().to_vec(),
                eq: h.eq_normals().to_vec(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimsDoc {
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonDoc {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetDoc {
    /// `"free"`
    Keyword(String),
    Generators {
        generators: Vec<Vec<f64>>,
    },
    Constraints {
        #[serde(default)]
        eq: Vec<String>,
        #[serde(default)]
        ineq: Vec<String>,
    },
}

/// Box of controls sampled on a uniform grid per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlBoxDoc {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default = "default_box_points")]
    pub points: usize,
}

fn default_box_points() -> usize {
    9
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlOptionsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// number of equispaced interior needle times
    #[serde(skip_serializing_if = "Option::is_none")]
    pub needles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub needle_times: Option<Vec<f64>>,
    /// explicit needles, overriding the time grid
    #[serde(skip_serializing_if = "Option::is_none")]
    pub needle_specs: Option<Vec<NeedleSpec>>,
    /// needle widths for the expansion check
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halvings: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlDoc {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<DimsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<HorizonDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal_cost: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_samples: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_box: Option<ControlBoxDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate: Option<ControlSignal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub options: Option<ControlOptionsDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbstractDoc {
    pub kind: String,
    pub reachable: ConeDoc,
    pub target: ConeDoc,
    pub cost_gradient: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlpDoc {
    pub kind: String,
    pub n: usize,
    pub cost: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eq: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ineq: Vec<String>,
    pub x_star: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConesDoc {
    pub kind: String,
    pub k1: ConeDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<ConeDoc>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenMapOptionsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closeness_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenMapDoc {
    pub kind: String,
    pub base: Vec<f64>,
    pub cone: ConeDoc,
    pub radius: f64,
    /// one expression in `x1..xm` per output coordinate
    pub map: Vec<String>,
    pub linear: Vec<Vec<f64>>,
    pub v: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OpenMapOptionsDoc>,
}

/// Control problem with the parsed expressions kept for printing and
/// comparison.
#[derive(Debug, Clone)]
pub struct LoadedControl {
    pub problem: ControlProblem,
    pub candidate: Option<ControlSignal>,
    pub options: ControlOptionsDoc,
    pub dynamics: Vec<Expr>,
    pub lagrangian: Option<Expr>,
    pub terminal_cost: Expr,
    pub target: TargetDoc,
    pub doc: ControlDoc,
}

impl LoadedControl {
    /// Document with every expression re-printed from its parsed form.
    pub fn to_document(&self) -> ControlDoc {
        let mut doc = self.doc.clone();
        doc.dynamics = Some(self.dynamics.iter().map(|e| e.to_string()).collect());
        doc.lagrangian = self.lagrangian.as_ref().map(|e| e.to_string());
        doc.terminal_cost = Some(self.terminal_cost.to_string());
        doc
    }
}

#[derive(Debug, Clone)]
pub struct LoadedNlp {
    pub n: usize,
    pub cost: ExprScalar,
    pub eq: Vec<ExprScalar>,
    pub ineq: Vec<ExprScalar>,
    pub x_star: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LoadedOpenMap {
    pub map: ConicMap,
    pub linear: LinearMap,
    pub v: Vec<f64>,
    pub options: OpenMapOptionsDoc,
}

#[derive(Debug, Clone)]
pub enum Problem {
    Control(Box<LoadedControl>),
    Abstract(AbstractProblem),
    Nlp(LoadedNlp),
    Cones(Cone, Option<Cone>),
    OpenMap(Box<LoadedOpenMap>),
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Control(_) => "control",
            Problem::Abstract(_) => "abstract",
            Problem::Nlp(_) => "nlp",
            Problem::Cones(..) => "cones",
            Problem::OpenMap(_) => "openmap",
        }
    }
}

/// Reads and validates a problem file.
pub fn load_problem(path: &std::path::Path) -> Result<Problem, InputErrors> {
    let text =
        std::fs::read_to_string(path).map_err(|e| vec![input_error(path.display().to_string(), e.to_string())])?;
    let value: Value = serde_json::from_str(&text).map_err(|e| vec![input_error("document", e.to_string())])?;
    problem_from_value(&value)
}

fn typed<T: serde::de::DeserializeOwned>(value: &Value) -> Result<T, InputErrors> {
    serde_json::from_value(value.clone()).map_err(|e| vec![input_error("document", e.to_string())])
}

pub fn problem_from_value(value: &Value) -> Result<Problem, InputErrors> {
    let Some(kind) = value.get("kind") else {
        return Err(vec![input_error("kind", "missing field")]);
    };
    match kind.as_str() {
        Some("control") => load_control(typed(value)?).map(|c| Problem::Control(Box::new(c))),
        Some("abstract") => load_abstract(&typed(value)?).map(Problem::Abstract),
        Some("nlp") => load_nlp(&typed(value)?).map(Problem::Nlp),
        Some("cones") => load_cones(&typed(value)?),
        Some("openmap") => load_openmap(&typed(value)?).map(|o| Problem::OpenMap(Box::new(o))),
        _ => Err(vec![input_error(
            "kind",
            format!("expected one of control, abstract, nlp, cones, openmap; got {kind}"),
        )]),
    }
}

fn parse_all(srcs: &[String], field: &str, dims: Dims, errors: &mut InputErrors) -> Vec<Expr> {
    srcs.iter()
        .enumerate()
        .filter_map(|(i, s)| {
            parse_expression(s, dims)
                .map_err(|e| errors.push(input_error(format!("{field}[{i}]"), e.to_string())))
                .ok()
        })
        .collect()
}

fn parse_one(src: &str, field: &str, dims: Dims, errors: &mut InputErrors) -> Option<Expr> {
    parse_expression(src, dims)
        .map_err(|e| errors.push(input_error(field, e.to_string())))
        .ok()
}

fn check_len(field: &str, got: usize, expected: usize, errors: &mut InputErrors) {
    if got != expected {
        errors.push(input_error(field, format!("expected {expected} entries, got {got}")));
    }
}

fn require<'a, T>(value: &'a Option<T>, field: &str, errors: &mut InputErrors) -> Option<&'a T> {
    if value.is_none() {
        errors.push(input_error(field, "missing field"));
    }
    value.as_ref()
}

/// Uniform grid with `points` values per axis.
pub fn box_grid(lower: &[f64], upper: &[f64], points: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for (lo, hi) in lower.iter().zip(upper) {
        let axis: Vec<f64> = if points <= 1 || lo == hi {
            vec![*lo]
        } else {
            (0..points)
                .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
                .collect()
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |a| {
                    let mut p = prefix.clone();
                    p.push(*a);
                    p
                })
            })
            .collect();
    }
    out
}

pub fn load_control(doc: ControlDoc) -> Result<LoadedControl, InputErrors> {
    let mut errors = Vec::new();
    let dims = require(&doc.dims, "dims", &mut errors).copied();
    let horizon = require(&doc.horizon, "horizon", &mut errors).copied();
    let x0 = require(&doc.x0, "x0", &mut errors);
    let dynamics_src = require(&doc.dynamics, "dynamics", &mut errors);
    let psi_src = require(&doc.terminal_cost, "terminal_cost", &mut errors);
    let target_doc = doc.target.clone().unwrap_or(TargetDoc::Keyword("free".into()));
    let samples = match (&doc.control_samples, &doc.control_box) {
        (Some(s), None) => Some(s.clone()),
        (None, Some(b)) => {
            if b.lower.len() != b.upper.len() {
                errors.push(input_error("control_box", "lower and upper differ in length"));
                None
            } else if b.lower.iter().zip(&b.upper).any(|(l, u)| l > u) {
                errors.push(input_error("control_box", "lower exceeds upper"));
                None
            } else {
                Some(box_grid(&b.lower, &b.upper, b.points))
            }
        }
        (Some(_), Some(_)) => {
            errors.push(input_error("control_box", "give either control_samples or control_box"));
            None
        }
        (None, None) => {
            errors.push(input_error("control_samples", "missing field"));
            None
        }
    };
    let Some(DimsDoc { n, m }) = dims else {
        return Err(errors);
    };
    if n == 0 {
        errors.push(input_error("dims.n", "must be positive"));
    }
    if let Some(h) = horizon {
        if !(h.a < h.b) {
            errors.push(input_error(
                "horizon",
                format!("need a < b, got a = {}, b = {}", h.a, h.b),
            ));
        }
    }
    if let Some(x0) = x0 {
        check_len("x0", x0.len(), n, &mut errors);
    }
    let cdims = Dims::control(n, m);
    let dynamics = dynamics_src.map(|d| {
        check_len("dynamics", d.len(), n, &mut errors);
        parse_all(d, "dynamics", cdims, &mut errors)
    });
    let lagrangian = doc
        .lagrangian
        .as_ref()
        .and_then(|s| parse_one(s, "lagrangian", cdims, &mut errors));
    let psi = psi_src.and_then(|s| parse_one(s, "terminal_cost", Dims::state(n), &mut errors));
    if let Some(samples) = &samples {
        if samples.is_empty() {
            errors.push(input_error("control_samples", "must be nonempty"));
        }
        for (i, u) in samples.iter().enumerate() {
            if u.len() != m {
                errors.push(input_error(
                    format!("control_samples[{i}]"),
                    format!("expected {m} entries, got {}", u.len()),
                ));
            }
        }
    }
    if let Some(c) = &doc.candidate {
        let values: Vec<&Vec<f64>> = match c {
            ControlSignal::Constant(u) => vec![u],
            ControlSignal::Piecewise(p) => {
                if p.is_empty() {
                    errors.push(input_error("candidate.piecewise", "must be nonempty"));
                }
                p.iter().collect()
            }
        };
        for u in values {
            if u.len() != m {
                errors.push(input_error(
                    "candidate",
                    format!("control values need {m} entries, got {}", u.len()),
                ));
                break;
            }
        }
    }
    let options = doc.options.clone().unwrap_or_default();
    if let Some(specs) = &options.needle_specs {
        for (i, s) in specs.iter().enumerate() {
            if s.u.len() != m {
                errors.push(input_error(
                    format!("options.needle_specs[{i}].u"),
                    format!("expected {m} entries"),
                ));
            }
        }
    }
    if options.mesh == Some(0) {
        errors.push(input_error("options.mesh", "must be positive"));
    }
    let target = match &target_doc {
        TargetDoc::Keyword(k) if k == "free" => Some(Target::Free),
        TargetDoc::Keyword(k) => {
            errors.push(input_error("target", format!("unknown target keyword '{k}'")));
            None
        }
        TargetDoc::Generators { generators } => Cone::span(n, generators.clone())
            .map(Target::Cone)
            .map_err(|e| errors.push(input_error("target.generators", e.to_string())))
            .ok(),
        TargetDoc::Constraints { eq, ineq } => {
            let eq: Vec<ScalarFn> = parse_all(eq, "target.eq", Dims::state(n), &mut errors)
                .into_iter()
                .map(|expr| Arc::new(ExprScalar { expr, n }) as ScalarFn)
                .collect();
            let ineq: Vec<ScalarFn> = parse_all(ineq, "target.ineq", Dims::state(n), &mut errors)
                .into_iter()
                .map(|expr| Arc::new(ExprScalar { expr, n }) as ScalarFn)
                .collect();
            Some(Target::Constraints { eq, ineq })
        }
    };
    if !errors.is_empty() {
        return Err(errors);
    }
    let (Some(horizon), Some(x0), Some(dynamics), Some(psi), Some(samples), Some(target)) =
        (horizon, x0, dynamics, psi, samples, target)
    else {
        return Err(vec![input_error("document", "incomplete")]);
    };
    let field = ExprField {
        components: dynamics.clone(),
        m,
    };
    let problem = ControlProblem::new(
        (horizon.a, horizon.b),
        x0.clone(),
        field.into_arc(),
        lagrangian.clone().map(|expr| ExprCost { expr }.into_arc()),
        ExprScalar { expr: psi.clone(), n }.into_arc(),
        target,
        samples,
    )
    .map_err(|e| vec![input_error("document", e.to_string())])?;
    Ok(LoadedControl {
        problem,
        candidate: doc.candidate.clone(),
        options,
        dynamics,
        lagrangian,
        terminal_cost: psi,
        target: target_doc,
        doc,
    })
}

fn load_abstract(doc: &AbstractDoc) -> Result<AbstractProblem, InputErrors> {
    let mut errors = Vec::new();
    let n = doc.cost_gradient.len();
    let r = doc.reachable.to_cone("reachable", &mut errors);
    let s = doc.target.to_cone("target", &mut errors);
    for (c, field) in [(&r, "reachable"), (&s, "target")] {
        if let Some(c) = c {
            if c.dim() != n {
                errors.push(input_error(
                    format!("{field}.dim"),
                    format!("expected {n} to match cost_gradient, got {}", c.dim()),
                ));
            }
        }
    }
    match (r, s) {
        (Some(r), Some(s)) if errors.is_empty() => AbstractProblem::new(r, s, doc.cost_gradient.clone())
            .map_err(|e| vec![input_error("document", e.to_string())]),
        _ => Err(errors),
    }
}

fn load_nlp(doc: &NlpDoc) -> Result<LoadedNlp, InputErrors> {
    let mut errors = Vec::new();
    let n = doc.n;
    let dims = Dims::state(n);
    check_len("x_star", doc.x_star.len(), n, &mut errors);
    let cost = parse_one(&doc.cost, "cost", dims, &mut errors);
    let wrap = |v: Vec<Expr>| v.into_iter().map(|expr| ExprScalar { expr, n }).collect::<Vec<_>>();
    let eq = wrap(parse_all(&doc.eq, "eq", dims, &mut errors));
    let ineq = wrap(parse_all(&doc.ineq, "ineq", dims, &mut errors));
    match cost {
        Some(expr) if errors.is_empty() => Ok(LoadedNlp {
            n,
            cost: ExprScalar { expr, n },
            eq,
            ineq,
            x_star: doc.x_star.clone(),
        }),
        _ => Err(errors),
    }
}

fn load_cones(doc: &ConesDoc) -> Result<Problem, InputErrors> {
    let mut errors = Vec::new();
    let k1 = doc.k1.to_cone("k1", &mut errors);
    let k2 = doc.k2.as_ref().and_then(|k| k.to_cone("k2", &mut errors));
    if let (Some(a), Some(b)) = (&k1, &k2) {
        if a.dim() != b.dim() {
            errors.push(input_error("k2.dim", format!("expected {}, got {}", a.dim(), b.dim())));
        }
    }
    match k1 {
        Some(k1) if errors.is_empty() => Ok(Problem::Cones(k1, k2)),
        _ => Err(errors),
    }
}

fn load_openmap(doc: &OpenMapDoc) -> Result<LoadedOpenMap, InputErrors> {
    let mut errors = Vec::new();
    let m = doc.base.len();
    let n = doc.map.len();
    let cone = doc.cone.to_cone("cone", &mut errors);
    if let Some(c) = &cone {
        if c.dim() != m {
            errors.push(input_error(
                "cone.dim",
                format!("expected {m} to match base, got {}", c.dim()),
            ));
        }
    }
    let exprs = parse_all(&doc.map, "map", Dims::state(m), &mut errors);
    check_len("linear", doc.linear.len(), n, &mut errors);
    for (i, row) in doc.linear.iter().enumerate() {
        check_len(&format!("linear[{i}]"), row.len(), m, &mut errors);
    }
    check_len("v", doc.v.len(), n, &mut errors);
    if !(doc.radius > 0.0) {
        errors.push(input_error("radius", "must be positive"));
    }
    let linear = LinearMap::from_rows(&doc.linear)
        .map_err(|e| errors.push(input_error("linear", e.to_string())))
        .ok();
    if !errors.is_empty() {
        return Err(errors);
    }
    let (Some(cone), Some(linear)) = (cone, linear) else {
        return Err(vec![input_error("document", "incomplete")]);
    };
    let field = ExprField {
        components: exprs,
        m: 0,
    };
    let map = ConicMap::new(doc.base.clone(), cone, doc.radius, n, move |x| {
        field.try_eval(0.0, x, &[]).unwrap_or_else(|_| vec![f64::NAN; n])
    })
    .map_err(|e| vec![input_error("map", e.to_string())])?;
    Ok(LoadedOpenMap {
        map,
        linear,
        v: doc.v.clone(),
        options: doc.options.clone().unwrap_or_default(),
    })
}
