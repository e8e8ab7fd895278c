//! Pontryagin maximum principle checks for fixed-horizon control problems.
//!
//! A candidate control is integrated on a uniform mesh, needle variations
//! at mesh nodes are propagated to the final time to span an approximating
//! cone to the reachable set, and multipliers for the terminal condition are
//! found by the abstract multiplier solver. The adjoint arc is integrated
//! backwards from the terminal covector and the maximum condition is checked
//! at every node over the finite control sample set.
//!
//! Running costs are handled by appending the accumulated cost as an extra
//! state. Controls are piecewise constant on the mesh and needle times snap
//! to mesh nodes.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::amp::{self, AbstractProblem, Multipliers, NormalityClass};
use crate::approx;
use crate::cone::{self, Cone, ConeH, ConeV};
use crate::error::{Error, Result};
use crate::func::{Dynamics, Lagrangian, ScalarFn, SmoothScalar, VectorField};
use crate::linalg::{self, axpy, dot, norm, scale, sub};
use crate::tol;

pub const DEFAULT_MESH: usize = 1000;
pub const DEFAULT_NEEDLE_TIMES: usize = 16;

/// Terminal constraint at the final state.
#[derive(Clone)]
pub enum Target {
    /// no constraint, `S = ℝⁿ`
    Free,
    /// an approximating cone supplied directly
    Cone(Cone),
    /// `{φ = 0, h ≤ 0}`, turned into a cone at the final state
    Constraints { eq: Vec<ScalarFn>, ineq: Vec<ScalarFn> },
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Free => f.write_str("Free"),
            Target::Cone(c) => write!(f, "Cone({c})"),
            Target::Constraints { eq, ineq } => {
                write!(f, "Constraints(eq: {}, ineq: {})", eq.len(), ineq.len())
            }
        }
    }
}

impl Target {
    /// Approximating cone to the target at the final state `y`.
    pub fn cone_at(&self, y: &[f64]) -> Result<Cone> {
        match self {
            Target::Free => Ok(Cone::whole_space(y.len())),
            Target::Cone(c) => {
                if c.dim() != y.len() {
                    return Err(Error::DimensionMismatch {
                        expected: y.len(),
                        got: c.dim(),
                    });
                }
                Ok(c.clone())
            }
            Target::Constraints { eq, ineq } => {
                let eq: Vec<&dyn SmoothScalar> = eq.iter().map(|f| f.as_ref()).collect();
                let ineq: Vec<&dyn SmoothScalar> = ineq.iter().map(|f| f.as_ref()).collect();
                approx::active_set_cone(&eq, &ineq, y).map(Cone::H)
            }
        }
    }
}

/// Minimize `Ψ(x(b)) + ∫ l(t, x, u) dt` subject to `ẋ = f(t, x, u)`,
/// `x(a) = x₀`, `u(t) ∈ U` and `x(b)` in the target.
#[derive(Clone)]
pub struct ControlProblem {
    pub n: usize,
    pub m: usize,
    pub horizon: (f64, f64),
    pub x0: Vec<f64>,
    pub dynamics: Dynamics,
    /// `None` for a Mayer problem
    pub lagrangian: Option<Lagrangian>,
    pub terminal_cost: ScalarFn,
    pub target: Target,
    pub control_samples: Vec<Vec<f64>>,
}

impl fmt::Debug for ControlProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlProblem")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("horizon", &self.horizon)
            .field("x0", &self.x0)
            .field("lagrangian", &self.lagrangian.is_some())
            .field("target", &self.target)
            .field("control_samples", &self.control_samples)
            .finish_non_exhaustive()
    }
}

impl ControlProblem {
    pub fn new(
        horizon: (f64, f64),
        x0: Vec<f64>,
        dynamics: Dynamics,
        lagrangian: Option<Lagrangian>,
        terminal_cost: ScalarFn,
        target: Target,
        control_samples: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = x0.len();
        if !(horizon.0 < horizon.1) || !horizon.0.is_finite() || !horizon.1.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "horizon must satisfy a < b, got [{}, {}]",
                horizon.0, horizon.1
            )));
        }
        if dynamics.state_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: dynamics.state_dim(),
            });
        }
        let Some(m) = control_samples.first().map(Vec::len) else {
            return Err(Error::InvalidArgument("control_samples must be nonempty".into()));
        };
        if let Some(bad) = control_samples.iter().find(|u| u.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: bad.len(),
            });
        }
        if let Target::Cone(c) = &target {
            if c.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.dim(),
                });
            }
        }
        Ok(Self {
            n,
            m,
            horizon,
            x0,
            dynamics,
            lagrangian,
            terminal_cost,
            target,
            control_samples,
        })
    }

    fn running_cost(&self, t: f64, x: &[f64], u: &[f64]) -> f64 {
        self.lagrangian.as_ref().map_or(0.0, |l| l.eval(t, x, u))
    }

    /// `H = p·f + p_c l`
    pub fn hamiltonian(&self, p: &[f64], p_c: f64, t: f64, x: &[f64], u: &[f64]) -> f64 {
        dot(p, &self.dynamics.eval(t, x, u)) + p_c * self.running_cost(t, x, u)
    }
}

/// Piecewise-constant control, resampled onto the integration mesh.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlSignal {
    Constant(Vec<f64>),
    /// equal-length pieces over the horizon
    Piecewise(Vec<Vec<f64>>),
}

impl ControlSignal {
    /// Value on each of `steps` mesh intervals, taken at interval midpoints.
    pub fn on_mesh(&self, steps: usize) -> Vec<Vec<f64>> {
        match self {
            ControlSignal::Constant(u) => vec![u.clone(); steps],
            ControlSignal::Piecewise(pieces) => (0..steps)
                .map(|j| {
                    let k = ((j as f64 + 0.5) * pieces.len() as f64 / steps as f64) as usize;
                    pieces[k.min(pieces.len() - 1)].clone()
                })
                .collect(),
        }
    }

    fn check(&self, m: usize) -> Result<()> {
        let values: Vec<&Vec<f64>> = match self {
            ControlSignal::Constant(u) => vec![u],
            ControlSignal::Piecewise(p) if p.is_empty() => {
                return Err(Error::InvalidArgument("piecewise control has no pieces".into()))
            }
            ControlSignal::Piecewise(p) => p.iter().collect(),
        };
        for u in values {
            if u.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: u.len(),
                });
            }
        }
        Ok(())
    }
}

/// Control and trajectory on a uniform mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Process {
    pub times: Vec<f64>,
    /// one value per interval `[t_j, t_{j+1}]`
    pub controls: Vec<Vec<f64>>,
    /// one state per node
    pub states: Vec<Vec<f64>>,
}

impl Process {
    pub fn steps(&self) -> usize {
        self.controls.len()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("process has at least one node")
    }

    /// Nearest node index in `1..=N` to `t`.
    fn snap(&self, t: f64) -> Result<usize> {
        let (a, b) = (self.times[0], *self.times.last().expect("nonempty mesh"));
        if !(t > a && t <= b) {
            return Err(Error::InvalidArgument(format!("needle time {t} outside ({a}, {b}]")));
        }
        let h = (b - a) / self.steps() as f64;
        Ok((((t - a) / h).round() as usize).clamp(1, self.steps()))
    }

    fn control_at_node(&self, k: usize) -> &[f64] {
        &self.controls[k.min(self.steps() - 1)]
    }
}

fn rk4_step(f: &dyn Fn(f64, &[f64]) -> Vec<f64>, t: f64, y: &[f64], h: f64) -> Vec<f64> {
    let k1 = f(t, y);
    let k2 = f(t + h / 2.0, &axpy(y, h / 2.0, &k1));
    let k3 = f(t + h / 2.0, &axpy(y, h / 2.0, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    y.iter()
        .enumerate()
        .map(|(i, yi)| yi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn mesh(horizon: (f64, f64), steps: usize) -> Vec<f64> {
    let (a, b) = horizon;
    (0..=steps)
        .map(|k| {
            if k == steps {
                b
            } else {
                a + (b - a) * k as f64 / steps as f64
            }
        })
        .collect()
}

/// Fixed-step RK4 with the control held constant on each mesh interval.
pub fn integrate_state(problem: &ControlProblem, control: &ControlSignal, steps: usize) -> Result<Process> {
    if steps == 0 {
        return Err(Error::InvalidArgument("mesh needs at least one step".into()));
    }
    control.check(problem.m)?;
    let times = mesh(problem.horizon, steps);
    let controls = control.on_mesh(steps);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(problem.x0.clone());
    for j in 0..steps {
        let u = &controls[j];
        let x = rk4_step(
            &|t, x| problem.dynamics.eval(t, x, u),
            times[j],
            &states[j],
            times[j + 1] - times[j],
        );
        if !linalg::all_finite(&x) {
            return Err(Error::BlowUp { t: times[j + 1] });
        }
        states.push(x);
    }
    Ok(Process {
        times,
        controls,
        states,
    })
}

struct AugmentedField {
    f: Dynamics,
    l: Lagrangian,
    n: usize,
}

impl VectorField for AugmentedField {
    fn state_dim(&self) -> usize {
        self.n + 1
    }
    fn eval(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<f64> {
        let x = &x[..self.n];
        let mut out = self.f.eval(t, x, u);
        out.push(self.l.eval(t, x, u));
        out
    }
    fn state_jacobian(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<Vec<f64>> {
        let x = &x[..self.n];
        let mut rows: Vec<Vec<f64>> = self
            .f
            .state_jacobian(t, x, u)
            .into_iter()
            .map(|mut r| {
                r.push(0.0);
                r
            })
            .collect();
        let mut last = self.l.state_gradient(t, x, u);
        last.push(0.0);
        rows.push(last);
        rows
    }
}

/// `Ψ(x₁..xₙ) + x_{n+1}`
struct AugmentedCost {
    psi: ScalarFn,
    n: usize,
}

impl SmoothScalar for AugmentedCost {
    fn value(&self, x: &[f64]) -> f64 {
        self.psi.value(&x[..self.n]) + x[self.n]
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.psi.gradient(&x[..self.n]);
        g.push(1.0);
        g
    }
}

/// A function of the first `n` coordinates only.
struct IgnoreLast {
    f: ScalarFn,
    n: usize,
}

impl SmoothScalar for IgnoreLast {
    fn value(&self, x: &[f64]) -> f64 {
        self.f.value(&x[..self.n])
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.f.gradient(&x[..self.n]);
        g.push(0.0);
        g
    }
}

fn pad(row: &[f64]) -> Vec<f64> {
    let mut r = row.to_vec();
    r.push(0.0);
    r
}

/// Mayer form: the running cost becomes the extra state `x_{n+1}` with
/// `ẋ_{n+1} = l`, `x_{n+1}(a) = 0`, and the target becomes `S × ℝ`.
pub fn reduce_to_mayer(problem: &ControlProblem) -> ControlProblem {
    let Some(l) = &problem.lagrangian else {
        return problem.clone();
    };
    let n = problem.n;
    let target = match &problem.target {
        Target::Free => Target::Free,
        Target::Cone(Cone::V(s)) => {
            let mut gens: Vec<Vec<f64>> = s.generators().iter().map(|g| pad(g)).collect();
            gens.push(linalg::unit(n + 1, n));
            gens.push(linalg::neg(&linalg::unit(n + 1, n)));
            Target::Cone(Cone::V(ConeV::new(n + 1, gens).expect("lifted generators are nonzero")))
        }
        Target::Cone(Cone::H(s)) => Target::Cone(Cone::H(
            ConeH::new(
                n + 1,
                s.ineq_normals().iter().map(|a| pad(a)).collect(),
                s.eq_normals().iter().map(|b| pad(b)).collect(),
            )
            .expect("lifted rows are well formed"),
        )),
        Target::Constraints { eq, ineq } => {
            let wrap = |fs: &[ScalarFn]| -> Vec<ScalarFn> {
                fs.iter()
                    .map(|f| Arc::new(IgnoreLast { f: f.clone(), n }) as ScalarFn)
                    .collect()
            };
            Target::Constraints {
                eq: wrap(eq),
                ineq: wrap(ineq),
            }
        }
    };
    let mut x0 = problem.x0.clone();
    x0.push(0.0);
    ControlProblem {
        n: n + 1,
        m: problem.m,
        horizon: problem.horizon,
        x0,
        dynamics: Arc::new(AugmentedField {
            f: problem.dynamics.clone(),
            l: l.clone(),
            n,
        }),
        lagrangian: None,
        terminal_cost: Arc::new(AugmentedCost {
            psi: problem.terminal_cost.clone(),
            n,
        }),
        target,
        control_samples: problem.control_samples.clone(),
    }
}

/// Cost of a control: terminal cost of the Mayer form.
pub fn objective(problem: &ControlProblem, control: &ControlSignal, steps: usize) -> Result<f64> {
    let reduced = reduce_to_mayer(problem);
    let process = integrate_state(&reduced, control, steps)?;
    Ok(reduced.terminal_cost.value(process.final_state()))
}

/// Replace the control by `u` on `[t − ε, t]`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct NeedleSpec {
    pub t: f64,
    pub u: Vec<f64>,
}

fn joint_field<'a>(problem: &'a ControlProblem, u: &'a [f64]) -> impl Fn(f64, &[f64]) -> Vec<f64> + 'a {
    let n = problem.n;
    move |t, z| {
        let (x, w) = z.split_at(n);
        let mut out = problem.dynamics.eval(t, x, u);
        let a = problem.dynamics.state_jacobian(t, x, u);
        out.extend(a.iter().map(|row| dot(row, w)));
        out
    }
}

/// `w(b)` for a needle at `t_i`: the jump `f(u_i) − f(u⋆)` at `t_i`
/// transported by the linearized dynamics along the candidate.
pub fn propagate_variation(problem: &ControlProblem, process: &Process, spec: &NeedleSpec) -> Result<Vec<f64>> {
    if spec.u.len() != problem.m {
        return Err(Error::DimensionMismatch {
            expected: problem.m,
            got: spec.u.len(),
        });
    }
    let k = process.snap(spec.t)?;
    let t_k = process.times[k];
    let x_k = &process.states[k];
    let u_star = &process.controls[k - 1];
    let w = sub(
        &problem.dynamics.eval(t_k, x_k, &spec.u),
        &problem.dynamics.eval(t_k, x_k, u_star),
    );
    let mut z = x_k.clone();
    z.extend(w);
    for j in k..process.steps() {
        let f = joint_field(problem, &process.controls[j]);
        z = rk4_step(&f, process.times[j], &z, process.times[j + 1] - process.times[j]);
    }
    let w_b = z.split_off(problem.n);
    if !linalg::all_finite(&w_b) {
        return Err(Error::NonFinite("propagated variation"));
    }
    Ok(w_b)
}

/// Cone spanned by the propagated variations; zero vectors are dropped.
pub fn build_reachable_cone(problem: &ControlProblem, process: &Process, specs: &[NeedleSpec]) -> Result<ConeV> {
    let vectors: Vec<Vec<f64>> = specs
        .par_iter()
        .map(|s| propagate_variation(problem, process, s))
        .collect::<Result<_>>()?;
    let nonzero = vectors.into_iter().filter(|w| linalg::norm_inf(w) > 1e-13).collect();
    ConeV::new(problem.n, cone::dedup_generators(nonzero))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeedleReport {
    /// `‖ε‖` per ladder level
    pub eps_norms: Vec<f64>,
    /// `‖x_ε(b) − x⋆(b) − Σ ε_i w_i(b)‖`
    pub errors: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `ratio_k / ratio_{k+1}`
    pub decay_factors: Vec<f64>,
    pub pass: bool,
}

fn sorted_needles(process: &Process, specs: &[NeedleSpec], eps: &[f64]) -> Result<Vec<(f64, f64, Vec<f64>)>> {
    if eps.len() != specs.len() {
        return Err(Error::DimensionMismatch {
            expected: specs.len(),
            got: eps.len(),
        });
    }
    let mut needles = Vec::with_capacity(specs.len());
    for (s, e) in specs.iter().zip(eps) {
        if !(*e >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "needle width must be nonnegative, got {e}"
            )));
        }
        let t = process.times[process.snap(s.t)?];
        needles.push((t - e, t, s.u.clone()));
    }
    needles.sort_by(|a, b| a.1.total_cmp(&b.1));
    let a = process.times[0];
    for (i, n) in needles.iter().enumerate() {
        if n.0 < a - 1e-14 {
            return Err(Error::NeedleOverlap(format!(
                "[{}, {}] starts before the horizon",
                n.0, n.1
            )));
        }
        if i > 0 && (needles[i - 1].1 == n.1 || n.0 < needles[i - 1].1 - 1e-14) {
            return Err(Error::NeedleOverlap(format!(
                "[{}, {}] meets [{}, {}]",
                needles[i - 1].0,
                needles[i - 1].1,
                n.0,
                n.1
            )));
        }
    }
    Ok(needles)
}

/// Final state under the multiple needle variation; mesh steps are split at
/// the needle start times.
pub fn integrate_with_needles(
    problem: &ControlProblem,
    process: &Process,
    specs: &[NeedleSpec],
    eps: &[f64],
) -> Result<Vec<f64>> {
    let needles = sorted_needles(process, specs, eps)?;
    let mut x = problem.x0.clone();
    for j in 0..process.steps() {
        let (t0, t1) = (process.times[j], process.times[j + 1]);
        let mut cuts = vec![t0];
        cuts.extend(needles.iter().map(|n| n.0).filter(|s| *s > t0 && *s < t1));
        cuts.push(t1);
        cuts.sort_by(f64::total_cmp);
        for seg in cuts.windows(2) {
            let mid = 0.5 * (seg[0] + seg[1]);
            let u = needles
                .iter()
                .find(|n| mid > n.0 && mid < n.1)
                .map_or(&process.controls[j], |n| &n.2);
            x = rk4_step(&|t, x| problem.dynamics.eval(t, x, u), seg[0], &x, seg[1] - seg[0]);
        }
        if !linalg::all_finite(&x) {
            return Err(Error::BlowUp { t: t1 });
        }
    }
    Ok(x)
}

/// First-order expansion error of the multiple needle variation along the
/// ladder `ε · 2^{-k}`, `k = 0..=halvings`.
pub fn check_needle_expansion(
    problem: &ControlProblem,
    process: &Process,
    specs: &[NeedleSpec],
    eps: &[f64],
    halvings: usize,
) -> Result<NeedleReport> {
    let w: Vec<Vec<f64>> = specs
        .iter()
        .map(|s| propagate_variation(problem, process, s))
        .collect::<Result<_>>()?;
    let x_star = process.final_state();
    let mut eps_norms = Vec::new();
    let mut errors = Vec::new();
    let mut ratios = Vec::new();
    for k in 0..=halvings {
        let e: Vec<f64> = eps.iter().map(|x| x * 0.5_f64.powi(k as i32)).collect();
        let x_eps = integrate_with_needles(problem, process, specs, &e)?;
        let mut predicted = x_star.to_vec();
        for (wi, ei) in w.iter().zip(&e) {
            predicted = axpy(&predicted, *ei, wi);
        }
        let err = norm(&sub(&x_eps, &predicted));
        let en = norm(&e);
        eps_norms.push(en);
        errors.push(err);
        ratios.push(if en == 0.0 { 0.0 } else { err / en });
        if en == 0.0 {
            break;
        }
    }
    let decay_factors: Vec<f64> = ratios.windows(2).map(|r| r[0] / r[1]).collect();
    let pass = ratios
        .windows(2)
        .all(|r| r[1] <= tol::DIFF_FLOOR || r[0] >= tol::DECAY_FACTOR * r[1]);
    Ok(NeedleReport {
        eps_norms,
        errors,
        ratios,
        decay_factors,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointArc {
    pub times: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub p_c: f64,
}

impl AdjointArc {
    /// `min_t ‖(p(t), p_c)‖∞`
    pub fn nontriviality(&self) -> f64 {
        self.p
            .iter()
            .map(|p| linalg::norm_inf(p).max(self.p_c.abs()))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Backward RK4 for `ṗ = −(∂f/∂x)ᵀ p − p_c ∇ₓl` from `p(b) = p_b`. Midpoint
/// states come from a half RK4 step of the state equation.
pub fn integrate_adjoint(problem: &ControlProblem, process: &Process, p_b: &[f64], p_c: f64) -> Result<AdjointArc> {
    if p_b.len() != problem.n {
        return Err(Error::DimensionMismatch {
            expected: problem.n,
            got: p_b.len(),
        });
    }
    if !linalg::all_finite(p_b) || !p_c.is_finite() {
        return Err(Error::NonFinite("terminal covector"));
    }
    if p_c > 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cost multiplier must be nonpositive, got {p_c}"
        )));
    }
    let steps = process.steps();
    let mut p = vec![Vec::new(); steps + 1];
    p[steps] = p_b.to_vec();
    for j in (0..steps).rev() {
        let u = &process.controls[j];
        let (t0, t1) = (process.times[j], process.times[j + 1]);
        let h = t1 - t0;
        let x_mid = rk4_step(&|t, x| problem.dynamics.eval(t, x, u), t0, &process.states[j], h / 2.0);
        let rhs = |t: f64, x: &[f64], p: &[f64]| -> Vec<f64> {
            let a = problem.dynamics.state_jacobian(t, x, u);
            let mut out: Vec<f64> = (0..problem.n)
                .map(|i| -a.iter().zip(p).map(|(row, pj)| row[i] * pj).sum::<f64>())
                .collect();
            if let Some(l) = &problem.lagrangian {
                out = axpy(&out, -p_c, &l.state_gradient(t, x, u));
            }
            out
        };
        let tm = t0 + h / 2.0;
        let p1 = &p[j + 1];
        let k1 = rhs(t1, &process.states[j + 1], p1);
        let k2 = rhs(tm, &x_mid, &axpy(p1, -h / 2.0, &k1));
        let k3 = rhs(tm, &x_mid, &axpy(p1, -h / 2.0, &k2));
        let k4 = rhs(t0, &process.states[j], &axpy(p1, -h, &k3));
        let next: Vec<f64> = (0..problem.n)
            .map(|i| p1[i] - h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        if !linalg::all_finite(&next) {
            return Err(Error::BlowUp { t: t0 });
        }
        p[j] = next;
    }
    Ok(AdjointArc {
        times: process.times.clone(),
        p,
        p_c,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminalMultipliers {
    pub multipliers: Multipliers,
    pub lambda: Vec<f64>,
    pub p_c: f64,
    pub p_b: Vec<f64>,
    /// `‖p(b) − p_c ∇Ψ − λ‖`; zero by construction
    pub transversality_residual: f64,
    /// `max_w p(b)·w` over generators of the reachable cone (`0` if none)
    pub quasi_adjoint_max: f64,
    pub target_cone: String,
}

/// Multipliers at the final state from the reachable and target cones.
pub fn terminal_multipliers(
    problem: &ControlProblem,
    process: &Process,
    reachable: &ConeV,
) -> Result<TerminalMultipliers> {
    let (abstract_problem, target) = abstract_problem(problem, process, reachable)?;
    let m = amp::solve_amp(&abstract_problem)?.ok_or(Error::NoMultipliers)?;
    Ok(assemble_terminal(&abstract_problem, m, target, reachable))
}

fn abstract_problem(
    problem: &ControlProblem,
    process: &Process,
    reachable: &ConeV,
) -> Result<(AbstractProblem, String)> {
    let y = process.final_state();
    let target = problem.target.cone_at(y)?;
    let label = target.to_string();
    let grad = problem.terminal_cost.gradient(y);
    let ap = AbstractProblem::new(Cone::V(reachable.clone()), target, grad)?;
    Ok((ap, label))
}

fn assemble_terminal(ap: &AbstractProblem, m: Multipliers, target: String, reachable: &ConeV) -> TerminalMultipliers {
    let p_b = axpy(&m.lambda, m.lambda_c, &ap.cost_gradient);
    let transversality_residual = norm(&sub(&p_b, &axpy(&m.lambda, m.lambda_c, &ap.cost_gradient)));
    let quasi_adjoint_max = reachable
        .generators()
        .iter()
        .map(|w| dot(&p_b, w))
        .fold(0.0_f64, f64::max);
    TerminalMultipliers {
        lambda: m.lambda.clone(),
        p_c: m.lambda_c,
        multipliers: m,
        p_b,
        transversality_residual,
        quasi_adjoint_max,
        target_cone: target,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxConditionReport {
    /// `max_u H(u) − H(u⋆)` at each node
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub worst_time: f64,
    /// nodes whose residual exceeds the certification tolerance
    pub violating_times: Vec<f64>,
    pub pass: bool,
}

/// `max_{u ∈ samples} H(t, x⋆, p, u) − H(t, x⋆, p, u⋆(t))` at every node,
/// with `H = p·f + p_c l`. Node `k` uses the control of interval `k`, the
/// last node that of the last interval.
pub fn check_maximum_condition(
    problem: &ControlProblem,
    process: &Process,
    adjoint: &AdjointArc,
) -> MaxConditionReport {
    let residuals: Vec<f64> = (0..process.times.len())
        .into_par_iter()
        .map(|k| {
            let (t, x, p) = (process.times[k], &process.states[k], &adjoint.p[k]);
            let h_star = problem.hamiltonian(p, adjoint.p_c, t, x, process.control_at_node(k));
            let best = problem
                .control_samples
                .iter()
                .map(|u| problem.hamiltonian(p, adjoint.p_c, t, x, u))
                .fold(f64::NEG_INFINITY, f64::max);
            let r = best - h_star;
            if r.is_nan() {
                f64::INFINITY
            } else {
                r.max(0.0)
            }
        })
        .collect();
    let (worst, max_residual) =
        residuals.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (k, r)| if *r > acc.1 { (k, *r) } else { acc },
        );
    let violating_times = residuals
        .iter()
        .zip(&process.times)
        .filter(|(r, _)| **r > tol::CERTIFY)
        .map(|(_, t)| *t)
        .collect();
    MaxConditionReport {
        pass: max_residual <= tol::CERTIFY,
        max_residual,
        worst_time: process.times[worst],
        violating_times,
        residuals,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Refuted,
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmpOptions {
    pub mesh: usize,
    /// explicit needle times; `None` uses `needle_count` equispaced interior times
    pub needle_times: Option<Vec<f64>>,
    pub needle_count: usize,
    pub certify_tol: f64,
    pub refute_tol: f64,
    /// rounds that add needles at the worst violating nodes before refuting
    pub refinement_rounds: usize,
}

impl Default for PmpOptions {
    fn default() -> Self {
        Self {
            mesh: DEFAULT_MESH,
            needle_times: None,
            needle_count: DEFAULT_NEEDLE_TIMES,
            certify_tol: tol::CERTIFY,
            refute_tol: tol::REFUTE,
            refinement_rounds: 4,
        }
    }
}

/// Every needle time paired with every control sample.
pub fn needle_catalog(problem: &ControlProblem, times: &[f64]) -> Vec<NeedleSpec> {
    times
        .iter()
        .flat_map(|t| {
            problem
                .control_samples
                .iter()
                .map(move |u| NeedleSpec { t: *t, u: u.clone() })
        })
        .collect()
}

/// `count` equispaced times strictly inside the horizon.
pub fn interior_times(horizon: (f64, f64), count: usize) -> Vec<f64> {
    let (a, b) = horizon;
    (1..=count)
        .map(|k| a + (b - a) * k as f64 / (count + 1) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmpCertificate {
    pub verdict: Verdict,
    pub adjoint: AdjointArc,
    pub lambda: Vec<f64>,
    pub p_c: f64,
    pub p_b: Vec<f64>,
    pub multipliers_found: bool,
    pub max_condition: MaxConditionReport,
    pub transversality_residual: f64,
    pub quasi_adjoint_max: f64,
    pub nontriviality: f64,
    pub normality: Option<NormalityClass>,
    pub reachable_generators: usize,
    pub needles: usize,
    pub mesh: usize,
    pub final_state: Vec<f64>,
    pub cost: f64,
    /// the problem was lifted to Mayer form; the last adjoint component is the
    /// cost multiplier
    pub lifted: bool,
    pub notes: Vec<String>,
}

/// Runs the full pipeline on a candidate control and grades it.
///
/// Needles at the catalog times give the reachable cone. When the maximum
/// condition fails at other nodes, needles there are added and the
/// multipliers recomputed, so a refutation is never an artefact of the
/// catalog. A candidate without any multipliers is refuted; its residual is
/// then reported for the adjoint with `λ = 0`, `p_c = −1`.
pub fn verify_pmp(
    problem: &ControlProblem,
    candidate: &ControlSignal,
    specs: Option<&[NeedleSpec]>,
    options: &PmpOptions,
) -> Result<PmpCertificate> {
    let lifted = problem.lagrangian.is_some();
    let reduced = reduce_to_mayer(problem);
    let process = integrate_state(&reduced, candidate, options.mesh)?;
    let mut specs: Vec<NeedleSpec> = match specs {
        Some(s) => s.to_vec(),
        None => {
            let times = options
                .needle_times
                .clone()
                .unwrap_or_else(|| interior_times(reduced.horizon, options.needle_count));
            needle_catalog(&reduced, &times)
        }
    };
    let mut notes = Vec::new();
    let cost = reduced.terminal_cost.value(process.final_state());
    let mut round = 0;
    loop {
        let reachable = build_reachable_cone(&reduced, &process, &specs)?;
        let (ap, target) = abstract_problem(&reduced, &process, &reachable)?;
        let Some(m) = amp::solve_amp(&ap)? else {
            notes.push("no multipliers satisfy the terminal conditions".into());
            let p_b: Vec<f64> = scale(&ap.cost_gradient, -1.0);
            let adjoint = integrate_adjoint(&reduced, &process, &p_b, -1.0)?;
            let max_condition = check_maximum_condition(&reduced, &process, &adjoint);
            notes.push(format!(
                "maximum condition residual reported for the diagnostic adjoint with lambda = 0, p_c = -1: {:.3e}",
                max_condition.max_residual
            ));
            return Ok(PmpCertificate {
                verdict: Verdict::Refuted,
                nontriviality: adjoint.nontriviality(),
                adjoint,
                lambda: vec![0.0; reduced.n],
                p_c: -1.0,
                p_b,
                multipliers_found: false,
                max_condition,
                transversality_residual: 0.0,
                quasi_adjoint_max: 0.0,
                normality: None,
                reachable_generators: reachable.generators().len(),
                needles: specs.len(),
                mesh: options.mesh,
                final_state: process.final_state().to_vec(),
                cost,
                lifted,
                notes,
            });
        };
        let terminal = assemble_terminal(&ap, m, target, &reachable);
        let adjoint = integrate_adjoint(&reduced, &process, &terminal.p_b, terminal.p_c)?;
        let max_condition = check_maximum_condition(&reduced, &process, &adjoint);
        if max_condition.max_residual > options.certify_tol && round < options.refinement_rounds {
            let mut worst: Vec<(f64, f64)> = max_condition
                .residuals
                .iter()
                .zip(&process.times)
                .filter(|(r, t)| **r > options.certify_tol && **t > reduced.horizon.0)
                .map(|(r, t)| (*r, *t))
                .collect();
            worst.sort_by(|a, b| b.0.total_cmp(&a.0));
            let known: Vec<f64> = specs.iter().map(|s| s.t).collect();
            let new_times: Vec<f64> = worst
                .iter()
                .map(|(_, t)| *t)
                .filter(|t| known.iter().all(|k| (k - t).abs() > 1e-12))
                .take(DEFAULT_NEEDLE_TIMES)
                .collect();
            if !new_times.is_empty() {
                round += 1;
                notes.push(format!(
                    "refinement round {round}: added needles at {} violating nodes",
                    new_times.len()
                ));
                specs.extend(needle_catalog(&reduced, &new_times));
                continue;
            }
        }
        let normality = amp::classify_normality(&ap).ok();
        let nontriviality = adjoint.nontriviality();
        let check = terminal.multipliers.verify(&ap)?;
        let verdict = if max_condition.max_residual <= options.certify_tol
            && nontriviality >= tol::NONTRIVIAL
            && terminal.quasi_adjoint_max <= options.certify_tol
            && check.ok()
        {
            Verdict::Certified
        } else if max_condition.max_residual > options.refute_tol {
            Verdict::Refuted
        } else {
            Verdict::Unverified
        };
        return Ok(PmpCertificate {
            verdict,
            adjoint,
            lambda: terminal.lambda,
            p_c: terminal.p_c,
            p_b: terminal.p_b,
            multipliers_found: true,
            max_condition,
            transversality_residual: terminal.transversality_residual,
            quasi_adjoint_max: terminal.quasi_adjoint_max,
            nontriviality,
            normality,
            reachable_generators: reachable.generators().len(),
            needles: specs.len(),
            mesh: options.mesh,
            final_state: process.final_state().to_vec(),
            cost,
            lifted,
            notes,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{FnCost, FnField, FnScalar};

    fn double_integrator(psi: FnScalar, target: Target) -> ControlProblem {
        ControlProblem::new(
            (0.0, 1.0),
            vec![0.0, 0.0],
            FnField::linear(vec![vec![0.0, 1.0], vec![0.0, 0.0]], vec![vec![0.0], vec![1.0]]).into_arc(),
            None,
            psi.into_arc(),
            target,
            vec![vec![-1.0], vec![1.0]],
        )
        .unwrap()
    }

    fn dblint() -> ControlProblem {
        double_integrator(FnScalar::affine(vec![-1.0, 0.0], 0.0), Target::Free)
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn integrates_closed_forms() {
        let p = dblint();
        let pr = integrate_state(&p, &ControlSignal::Constant(vec![1.0]), 1000).unwrap();
        assert!(close(pr.final_state(), &[0.5, 1.0], 1e-12));

        let exp = ControlProblem::new(
            (0.0, 1.0),
            vec![1.0],
            FnField::linear(vec![vec![1.0]], vec![vec![0.0]]).into_arc(),
            None,
            FnScalar::affine(vec![0.0], 0.0).into_arc(),
            Target::Free,
            vec![vec![0.0]],
        )
        .unwrap();
        let pr = integrate_state(&exp, &ControlSignal::Constant(vec![0.0]), 1000).unwrap();
        assert!((pr.final_state()[0] - std::f64::consts::E).abs() < 1e-9);

        let still = ControlProblem::new(
            (0.0, 2.0),
            vec![3.0, -1.0],
            FnField::linear(vec![vec![0.0; 2]; 2], vec![vec![0.0]; 2]).into_arc(),
            None,
            FnScalar::affine(vec![0.0, 0.0], 0.0).into_arc(),
            Target::Free,
            vec![vec![0.0]],
        )
        .unwrap();
        let pr = integrate_state(&still, &ControlSignal::Constant(vec![5.0]), 10).unwrap();
        assert_eq!(pr.final_state(), &[3.0, -1.0]);
    }

    #[test]
    fn blow_up_is_reported() {
        let p = ControlProblem::new(
            (0.0, 2.0),
            vec![1.0],
            FnField::new(1, |_, x, _| vec![x[0] * x[0]], |_, x, _| vec![vec![2.0 * x[0]]]).into_arc(),
            None,
            FnScalar::affine(vec![0.0], 0.0).into_arc(),
            Target::Free,
            vec![vec![0.0]],
        )
        .unwrap();
        assert!(matches!(
            integrate_state(&p, &ControlSignal::Constant(vec![0.0]), 50),
            Err(Error::BlowUp { .. })
        ));
    }

    #[test]
    fn variation_examples() {
        let p = dblint();
        let pr = integrate_state(&p, &ControlSignal::Constant(vec![1.0]), 1000).unwrap();
        let w = propagate_variation(&p, &pr, &NeedleSpec { t: 0.5, u: vec![-1.0] }).unwrap();
        assert!(close(&w, &[-1.0, -2.0], 1e-12));
        let w = propagate_variation(&p, &pr, &NeedleSpec { t: 1.0, u: vec![-1.0] }).unwrap();
        assert!(close(&w, &[0.0, -2.0], 1e-12));
        assert!(propagate_variation(&p, &pr, &NeedleSpec { t: 0.0, u: vec![-1.0] }).is_err());
        assert!(propagate_variation(&p, &pr, &NeedleSpec { t: 1.5, u: vec![-1.0] }).is_err());
    }

    #[test]
    fn reachable_cone_examples() {
        let p = dblint();
        let pr = integrate_state(&p, &ControlSignal::Constant(vec![1.0]), 1000).unwrap();
        assert!(build_reachable_cone(&p, &pr, &[]).unwrap().generators().is_empty());
        let specs: Vec<NeedleSpec> = [0.25, 0.5, 0.75, 0.5]
            .iter()
            .map(|t| NeedleSpec { t: *t, u: vec![-1.0] })
            .collect();
        let k = build_reachable_cone(&p, &pr, &specs).unwrap();
        let expected = [[-1.5, -2.0], [-1.0, -2.0], [-0.5, -2.0]];
        assert_eq!(k.generators().len(), 3);
        for (g, e) in k.generators().iter().zip(&expected) {
            assert!(close(g, e, 1e-12), "{g:?}");
        }
        // needles with the candidate's own control vanish
        let same = [NeedleSpec { t: 0.5, u: vec![1.0] }];
        assert!(build_reachable_cone(&p, &pr, &same).unwrap().generators().is_empty());
    }

    #[test]
    fn adjoint_examples() {
        let p = dblint();
        let pr = integrate_state(&p, &ControlSignal::Constant(vec![1.0]), 100).unwrap();
        let adj = integrate_adjoint(&p, &pr, &[1.0, 0.0], -1.0).unwrap();
        for (t, pt) in adj.times.iter().zip(&adj.p) {
            assert!(close(pt, &[1.0, 1.0 - t], 1e-12));
        }
        let exp = ControlProblem::new(
            (0.0, 1.0),
            vec![1.0],
            FnField::linear(vec![vec![1.0]], vec![vec![0.0]]).into_arc(),
            None,
            FnScalar::affine(vec![0.0], 0.0).into_arc(),
            Target::Free,
            vec![vec![0.0]],
        )
        .unwrap();
        let pr = integrate_state(&exp, &ControlSignal::Constant(vec![0.0]), 1000).unwrap();
        let adj = integrate_adjoint(&exp, &pr, &[2.0], -1.0).unwrap();
        for (t, pt) in adj.times.iter().zip(&adj.p) {
            assert!((pt[0] - 2.0 * (1.0 - t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn free_endpoint_multipliers() {
        let p = dblint();
        let pr = integrate_state(&p, &ControlSignal::Constant(vec![1.0]), 1000).unwrap();
        let specs = needle_catalog(&p, &interior_times(p.horizon, 16));
        let k = build_reachable_cone(&p, &pr, &specs).unwrap();
        let t = terminal_multipliers(&p, &pr, &k).unwrap();
        assert_eq!(t.lambda, vec![0.0, 0.0]);
        assert_eq!(t.p_c, -1.0);
        assert!(close(&t.p_b, &[1.0, 0.0], 0.0));
        assert_eq!(t.transversality_residual, 0.0);
        let t0 = terminal_multipliers(&p, &pr, &ConeV::zero(2)).unwrap();
        assert_eq!((t0.lambda, t0.p_c), (vec![0.0, 0.0], -1.0));
    }

    #[test]
    fn maximum_condition_examples() {
        let p = dblint();
        let pr = integrate_state(&p, &ControlSignal::Constant(vec![1.0]), 100).unwrap();
        let adj = integrate_adjoint(&p, &pr, &[1.0, 0.0], -1.0).unwrap();
        assert!(check_maximum_condition(&p, &pr, &adj).max_residual <= 1e-9);

        let bad = integrate_state(&p, &ControlSignal::Constant(vec![-1.0]), 100).unwrap();
        let adj = integrate_adjoint(&p, &bad, &[1.0, 0.0], -1.0).unwrap();
        let r = check_maximum_condition(&p, &bad, &adj);
        for (t, res) in bad.times.iter().zip(&r.residuals) {
            assert!((res - 2.0 * (1.0 - t)).abs() < 1e-9);
        }

        let mut single = p.clone();
        single.control_samples = vec![vec![1.0]];
        let r = check_maximum_condition(&single, &pr, &adj);
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn verify_certifies_and_refutes() {
        let p = dblint();
        let cert = verify_pmp(&p, &ControlSignal::Constant(vec![1.0]), None, &PmpOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Certified);
        assert_eq!(cert.p_c, -1.0);
        assert_eq!(cert.normality, Some(NormalityClass::Normal));
        for (t, pt) in cert.adjoint.times.iter().zip(&cert.adjoint.p) {
            assert!(close(pt, &[1.0, 1.0 - t], 1e-6));
        }
        let cert = verify_pmp(&p, &ControlSignal::Constant(vec![-1.0]), None, &PmpOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Refuted);
        assert!(cert.max_condition.max_residual >= 1.9);
    }

    #[test]
    fn degenerate_reachable_set_is_certified() {
        let p = ControlProblem::new(
            (0.0, 1.0),
            vec![1.0, 2.0],
            FnField::linear(vec![vec![0.0; 2]; 2], vec![vec![0.0]; 2]).into_arc(),
            None,
            FnScalar::affine(vec![1.0, 1.0], 0.0).into_arc(),
            Target::Free,
            vec![vec![0.0], vec![1.0]],
        )
        .unwrap();
        let cert = verify_pmp(
            &p,
            &ControlSignal::Constant(vec![0.0]),
            Some(&[]),
            &PmpOptions::default(),
        )
        .unwrap();
        assert_eq!(cert.verdict, Verdict::Certified);
        assert_eq!((cert.lambda.clone(), cert.p_c), (vec![0.0, 0.0], -1.0));
    }

    #[test]
    fn needle_expansion_decays() {
        let p = dblint();
        let pr = integrate_state(&p, &ControlSignal::Constant(vec![1.0]), 200).unwrap();
        let one = [NeedleSpec { t: 0.5, u: vec![-1.0] }];
        let r = check_needle_expansion(&p, &pr, &one, &[0.1], 5).unwrap();
        assert!(r.pass);
        for f in &r.decay_factors {
            assert!((f - 2.0).abs() < 1e-6, "{:?}", r.decay_factors);
        }
        let two = [
            NeedleSpec { t: 0.3, u: vec![-1.0] },
            NeedleSpec { t: 0.7, u: vec![-1.0] },
        ];
        let r = check_needle_expansion(&p, &pr, &two, &[0.1, 0.05], 5).unwrap();
        assert!(r.pass && r.ratios.windows(2).all(|w| w[1] < w[0]));
        let zero = check_needle_expansion(&p, &pr, &one, &[0.0], 3).unwrap();
        assert_eq!(zero.errors, vec![0.0]);
        assert!(matches!(
            check_needle_expansion(&p, &pr, &two, &[0.1, 0.5], 1),
            Err(Error::NeedleOverlap(_))
        ));
    }

    fn with_running_cost() -> ControlProblem {
        ControlProblem::new(
            (0.0, 1.0),
            vec![0.0, 0.0],
            FnField::linear(vec![vec![0.0, 1.0], vec![0.0, 0.0]], vec![vec![0.0], vec![1.0]]).into_arc(),
            Some(FnCost::new(|_, x, u| u[0] * u[0] + x[0] * x[1], |_, x, _| vec![x[1], x[0]]).into_arc()),
            FnScalar::affine(vec![-1.0, 0.0], 0.0).into_arc(),
            Target::Free,
            vec![vec![-1.0], vec![0.0], vec![1.0]],
        )
        .unwrap()
    }

    #[test]
    fn mayer_reduction() {
        let p = dblint();
        let r = reduce_to_mayer(&p);
        assert_eq!(r.n, 2);
        let p = with_running_cost();
        let r = reduce_to_mayer(&p);
        assert_eq!(r.n, 3);
        assert_eq!(r.x0, vec![0.0, 0.0, 0.0]);
        assert_eq!(r.terminal_cost.value(&[2.0, 0.0, 0.5]), -1.5);
        assert_eq!(r.dynamics.eval(0.0, &[1.0, 2.0, 0.0], &[3.0]), vec![2.0, 3.0, 11.0]);

        // running cost integrated by Simpson's rule on the original trajectory
        let u = ControlSignal::Piecewise(vec![vec![1.0], vec![-1.0], vec![0.5], vec![0.0]]);
        let steps = 400;
        let pr = integrate_state(&p, &u, steps).unwrap();
        let l = p.lagrangian.as_ref().unwrap();
        let h = 1.0 / steps as f64;
        let mut integral = 0.0;
        for j in 0..steps {
            let uj = &pr.controls[j];
            let (t0, t1) = (pr.times[j], pr.times[j + 1]);
            let mid = rk4_step(&|t, x| p.dynamics.eval(t, x, uj), t0, &pr.states[j], h / 2.0);
            integral += h / 6.0
                * (l.eval(t0, &pr.states[j], uj)
                    + 4.0 * l.eval(t0 + h / 2.0, &mid, uj)
                    + l.eval(t1, &pr.states[j + 1], uj));
        }
        let direct = p.terminal_cost.value(pr.final_state()) + integral;
        assert!((objective(&p, &u, steps).unwrap() - direct).abs() < 1e-6);
    }

    #[test]
    fn lifted_adjoint_matches_running_cost_adjoint() {
        let p = with_running_cost();
        let r = reduce_to_mayer(&p);
        let u = ControlSignal::Piecewise(vec![vec![1.0], vec![0.0]]);
        let pr = integrate_state(&p, &u, 200).unwrap();
        let prl = integrate_state(&r, &u, 200).unwrap();
        let p_c = -1.0;
        let adj = integrate_adjoint(&p, &pr, &[1.0, 0.0], p_c).unwrap();
        let adj_l = integrate_adjoint(&r, &prl, &[1.0, 0.0, p_c], p_c).unwrap();
        for (a, b) in adj.p.iter().zip(&adj_l.p) {
            assert!(close(a, &b[..2], 1e-12));
            assert_eq!(b[2], p_c);
        }
        let m = check_maximum_condition(&p, &pr, &adj);
        let ml = check_maximum_condition(&r, &prl, &AdjointArc { p_c: 0.0, ..adj_l });
        for (x, y) in m.residuals.iter().zip(&ml.residuals) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn duality_between_adjoint_and_variations() {
        let p = ControlProblem::new(
            (0.0, 1.0),
            vec![0.3, -0.2],
            FnField::new(
                2,
                |t, x, u| vec![x[1] + 0.5 * x[0].sin(), -x[0] * x[1] + u[0] * t.cos()],
                |_, x, _| vec![vec![0.5 * x[0].cos(), 1.0], vec![-x[1], -x[0]]],
            )
            .into_arc(),
            None,
            FnScalar::affine(vec![1.0, 0.0], 0.0).into_arc(),
            Target::Free,
            vec![vec![-1.0], vec![1.0]],
        )
        .unwrap();
        let pr = integrate_state(&p, &ControlSignal::Piecewise(vec![vec![1.0], vec![-1.0]]), 400).unwrap();
        let adj = integrate_adjoint(&p, &pr, &[0.7, -1.3], -1.0).unwrap();
        for t in [0.2, 0.45, 0.8] {
            let spec = NeedleSpec { t, u: vec![-1.0] };
            let k = pr.snap(t).unwrap();
            let w_b = propagate_variation(&p, &pr, &spec).unwrap();
            let x = &pr.states[k];
            let d = sub(
                &p.dynamics.eval(pr.times[k], x, &spec.u),
                &p.dynamics.eval(pr.times[k], x, &pr.controls[k - 1]),
            );
            assert!((dot(&adj.p[k], &d) - dot(&adj.p[pr.steps()], &w_b)).abs() < 1e-6);
        }
    }

    #[test]
    fn constraint_target_routes_through_active_set() {
        // x₁(1) = 0.5 reachable only by u ≡ 1 among constants; minimize −x₂
        let phi = FnScalar::affine(vec![1.0, 0.0], -0.5);
        let p = double_integrator(
            FnScalar::affine(vec![0.0, -1.0], 0.0),
            Target::Constraints {
                eq: vec![phi.into_arc()],
                ineq: vec![],
            },
        );
        let cert = verify_pmp(&p, &ControlSignal::Constant(vec![1.0]), None, &PmpOptions::default()).unwrap();
        assert!(cert.multipliers_found);
        assert_eq!(cert.verdict, Verdict::Certified);
    }
}
