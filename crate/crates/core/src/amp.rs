//! Multipliers for the abstract maximum principle and its finite-dimensional
//! corollaries.
//!
//! Given approximating cones `R` (reachable set) and `S` (target) at a
//! candidate point and the cost gradient `∇Ψ`, a multiplier pair
//! `(λ, λ_c) ≠ 0` with `λ_c ≤ 0` must satisfy
//!
//! - `λ ∈ −S^⊥`,
//! - `(λ + λ_c ∇Ψ)·v ≤ 0` for every `v ∈ R`.
//!
//! The search is one LP per coordinate normalization. Lagrange and
//! Kuhn-Tucker multipliers are recovered separately by least squares, with
//! the cost multiplier fixed to `−1`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::approx;
use crate::cone::{self, Cone, ConeH, ConeV};
use crate::error::{Error, Result};
use crate::func::SmoothScalar;
use crate::linalg::{self, dot, norm, norm_inf};
use crate::lp::{Bound, LinearProgram, LpOutcome, Relation};
use crate::tol;

/// Cones at a candidate point `y⋆` and the cost gradient there.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractProblem {
    pub n: usize,
    pub reachable_cone: Cone,
    pub target_cone: Cone,
    pub cost_gradient: Vec<f64>,
}

impl AbstractProblem {
    pub fn new(reachable_cone: Cone, target_cone: Cone, cost_gradient: Vec<f64>) -> Result<Self> {
        let n = cost_gradient.len();
        for c in [&reachable_cone, &target_cone] {
            if c.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.dim(),
                });
            }
        }
        if !linalg::all_finite(&cost_gradient) {
            return Err(Error::NonFinite("cost gradient"));
        }
        Ok(Self {
            n,
            reachable_cone,
            target_cone,
            cost_gradient,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Multipliers {
    pub lambda: Vec<f64>,
    pub lambda_c: f64,
    /// `‖(λ, λ_c)‖∞ = 1`
    pub normalized: bool,
}

impl Multipliers {
    /// Rescaled so that `λ_c ∈ {0, −1}`.
    pub fn unit_cost_view(&self) -> Multipliers {
        if self.lambda_c < 0.0 {
            let s = -1.0 / self.lambda_c;
            Multipliers {
                lambda: linalg::scale(&self.lambda, s),
                lambda_c: -1.0,
                normalized: false,
            }
        } else {
            self.clone()
        }
    }

    /// Re-checks the three conditions against the original cones.
    pub fn verify(&self, problem: &AbstractProblem) -> Result<MultiplierCheck> {
        let nontrivial = norm_inf(&self.lambda).max(self.lambda_c.abs()) > tol::MULTIPLIER;
        let sign = self.lambda_c <= tol::MULTIPLIER;
        let neg_lambda = linalg::neg(&self.lambda);
        let target = problem.target_cone.polar().contains(&neg_lambda)?;
        let w = linalg::axpy(&self.lambda, self.lambda_c, &problem.cost_gradient);
        let (reachable, max_product) = match &problem.reachable_cone {
            Cone::V(v) => {
                let worst = v
                    .generators()
                    .iter()
                    .map(|g| dot(&w, g) / norm(g))
                    .fold(0.0_f64, f64::max);
                (worst <= tol::MULTIPLIER, Some(worst))
            }
            h @ Cone::H(_) => (h.polar().contains(&w)?, None),
        };
        Ok(MultiplierCheck {
            nontrivial,
            sign,
            target,
            reachable,
            max_product,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierCheck {
    pub nontrivial: bool,
    /// `λ_c ≤ 0`
    pub sign: bool,
    /// `λ ∈ −S^⊥`
    pub target: bool,
    /// `λ + λ_c ∇Ψ ∈ R^⊥`
    pub reachable: bool,
    /// `max_v (λ + λ_c ∇Ψ)·v / |v|` over generators of `R`, with `v = 0` included
    pub max_product: Option<f64>,
}

impl MultiplierCheck {
    pub fn ok(&self) -> bool {
        self.nontrivial && self.sign && self.target && self.reachable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalityClass {
    Normal,
    Abnormal,
    Undetermined,
}

/// Lifted cones in `ℝⁿ⁺¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedCones {
    /// `S × (−∞, 0]`
    pub profitable: Cone,
    /// `{(v, ∇Ψ·v) : v ∈ R}`
    pub augmented_reachable: Cone,
}

fn lift(row: &[f64], last: f64) -> Vec<f64> {
    let mut r = row.to_vec();
    r.push(last);
    r
}

pub fn augment(problem: &AbstractProblem) -> AugmentedCones {
    let n1 = problem.n + 1;
    let grad = &problem.cost_gradient;
    let profitable = match &problem.target_cone {
        Cone::V(s) => {
            let mut gens: Vec<Vec<f64>> = s.generators().iter().map(|g| lift(g, 0.0)).collect();
            gens.push(lift(&vec![0.0; problem.n], -1.0));
            Cone::V(ConeV::new(n1, gens).expect("lifted generators are nonzero"))
        }
        Cone::H(s) => {
            let mut ineq: Vec<Vec<f64>> = s.ineq_normals().iter().map(|a| lift(a, 0.0)).collect();
            ineq.push(linalg::unit(n1, problem.n));
            let eq = s.eq_normals().iter().map(|b| lift(b, 0.0)).collect();
            Cone::H(ConeH::new(n1, ineq, eq).expect("lifted rows are well formed"))
        }
    };
    let augmented_reachable = match &problem.reachable_cone {
        Cone::V(r) => {
            let gens = r.generators().iter().map(|v| lift(v, dot(grad, v))).collect();
            Cone::V(ConeV::new(n1, gens).expect("lifted generators are nonzero"))
        }
        Cone::H(r) => {
            let ineq = r.ineq_normals().iter().map(|a| lift(a, 0.0)).collect();
            let mut eq: Vec<Vec<f64>> = r.eq_normals().iter().map(|b| lift(b, 0.0)).collect();
            eq.push(lift(grad, -1.0));
            Cone::H(ConeH::new(n1, ineq, eq).expect("lifted rows are well formed"))
        }
    };
    AugmentedCones {
        profitable,
        augmented_reachable,
    }
}

/// LP over `(λ, λ_c)` with the multiplier conditions; returns the variable
/// indices `(λ, λ_c)`.
fn multiplier_lp(problem: &AbstractProblem) -> (LinearProgram, Vec<usize>, usize) {
    let n = problem.n;
    let mut lp = LinearProgram::new();
    let lambda = lp.add_vars(n, Bound::Free);
    let lambda_c = lp.add_var(Bound::NonPos);
    cone::constrain_member(&mut lp, &problem.target_cone.polar(), &lambda, -1.0);
    match &problem.reachable_cone {
        Cone::V(r) => {
            for v in r.generators() {
                let mut row: Vec<_> = lambda.iter().zip(v).map(|(l, vi)| (*l, *vi)).collect();
                row.push((lambda_c, dot(&problem.cost_gradient, v)));
                lp.add_row(&row, Relation::Le, 0.0);
            }
        }
        h @ Cone::H(_) => {
            // w = λ + λ_c ∇Ψ ∈ R^⊥
            let w = lp.add_vars(n, Bound::Free);
            for i in 0..n {
                lp.add_row(
                    &[(w[i], 1.0), (lambda[i], -1.0), (lambda_c, -problem.cost_gradient[i])],
                    Relation::Eq,
                    0.0,
                );
            }
            cone::constrain_member(&mut lp, &h.polar(), &w, 1.0);
        }
    }
    (lp, lambda, lambda_c)
}

fn box_and_sparsify(lp: &mut LinearProgram, vars: &[usize]) -> Vec<(usize, f64)> {
    let mut objective = Vec::with_capacity(vars.len());
    for &v in vars {
        lp.add_row(&[(v, 1.0)], Relation::Le, 1.0);
        lp.add_row(&[(v, 1.0)], Relation::Ge, -1.0);
        let t = lp.add_var(Bound::NonNeg);
        lp.add_row(&[(t, 1.0), (v, -1.0)], Relation::Ge, 0.0);
        lp.add_row(&[(t, 1.0), (v, 1.0)], Relation::Ge, 0.0);
        objective.push((t, 1.0));
    }
    objective
}

fn is_zero_cone(c: &Cone) -> bool {
    match c {
        Cone::V(v) => v.generators().is_empty(),
        Cone::H(_) => cone::common_nonzero(c, &Cone::whole_space(c.dim()))
            .map(|x| x.is_none())
            .unwrap_or(false),
    }
}

/// Finds `(λ, λ_c)` with `‖(λ, λ_c)‖∞ = 1`, trying `λ_c = −1` first, then
/// `λ_k = ±1` for each `k`. Among the solutions of the first feasible
/// normalization the one of least l1 norm is returned.
pub fn solve_amp(problem: &AbstractProblem) -> Result<Option<Multipliers>> {
    let n = problem.n;
    if is_zero_cone(&problem.reachable_cone) {
        return Ok(Some(Multipliers {
            lambda: vec![0.0; n],
            lambda_c: -1.0,
            normalized: true,
        }));
    }
    let mut normalizations = vec![(n, -1.0)];
    for k in 0..n {
        normalizations.push((k, 1.0));
        normalizations.push((k, -1.0));
    }
    for (k, s) in normalizations {
        let (mut lp, lambda, lambda_c) = multiplier_lp(problem);
        let mut vars = lambda.clone();
        vars.push(lambda_c);
        let objective = box_and_sparsify(&mut lp, &vars);
        lp.fix(vars[k], s);
        lp.minimize(&objective);
        if let Some(x) = lp.solve().solution() {
            let mut out = Multipliers {
                lambda: lambda.iter().map(|v| x[*v]).collect(),
                lambda_c: x[lambda_c].min(0.0),
                normalized: true,
            };
            out.lambda[..].iter_mut().for_each(|l| {
                if l.abs() < 1e-14 {
                    *l = 0.0;
                }
            });
            if k < n {
                out.lambda[k] = s;
            } else {
                out.lambda_c = -1.0;
            }
            return Ok(Some(out));
        }
    }
    Ok(None)
}

/// Abnormal when some multiplier has `λ_c = 0`; undetermined when the
/// closest-to-zero `λ_c` found under `‖λ‖∞ ≤ 1` is within tolerance of `0`.
pub fn classify_normality(problem: &AbstractProblem) -> Result<NormalityClass> {
    if solve_amp(problem)?.is_none() {
        return Err(Error::NoMultipliers);
    }
    let n = problem.n;
    let abnormal = cone::nonzero_search(n, |lp| {
        let (inner, lambda, lambda_c) = multiplier_lp(problem);
        *lp = inner;
        lp.fix(lambda_c, 0.0);
        lambda
    });
    if abnormal.is_some() {
        return Ok(NormalityClass::Abnormal);
    }
    let mut best = f64::NEG_INFINITY;
    for k in 0..n {
        for s in [1.0, -1.0] {
            let (mut lp, lambda, lambda_c) = multiplier_lp(problem);
            for &v in &lambda {
                lp.add_row(&[(v, 1.0)], Relation::Le, 1.0);
                lp.add_row(&[(v, 1.0)], Relation::Ge, -1.0);
            }
            lp.fix(lambda[k], s);
            lp.maximize(&[(lambda_c, 1.0)]);
            match lp.solve() {
                LpOutcome::Optimal { value, .. } => best = best.max(value),
                LpOutcome::Unbounded => best = 0.0,
                LpOutcome::Infeasible => {}
            }
        }
    }
    Ok(if best >= -tol::MULTIPLIER {
        NormalityClass::Undetermined
    } else {
        NormalityClass::Normal
    })
}

/// `‖∇Ψ‖∞ ≤ tol`
pub fn fermat_check(grad_psi: &[f64], tol: f64) -> bool {
    norm_inf(grad_psi) <= tol
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagrangeResult {
    pub alphas: Vec<f64>,
    pub lambda_c: f64,
    /// `‖Σ α_i ∇φ_i − ∇Ψ‖`
    pub residual: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktResult {
    pub alphas: Vec<f64>,
    /// one per inequality, `0` for inactive ones
    pub betas: Vec<f64>,
    pub active: Vec<usize>,
    pub lambda_c: f64,
    /// `‖Σ α_i ∇φ_i + Σ β_j ∇h_j − ∇Ψ‖`
    pub residual: f64,
    pub certified: bool,
}

fn columns(grads: &[Vec<f64>], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, grads.len(), |i, j| grads[j][i])
}

/// Ridge-regularized normal equations for `min ‖A x − b‖`.
fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let k = a.ncols();
    if k == 0 {
        return DVector::zeros(0);
    }
    let mut ata = a.transpose() * a;
    for i in 0..k {
        ata[(i, i)] += tol::RIDGE;
    }
    let atb = a.transpose() * b;
    ata.cholesky()
        .map(|c| c.solve(&atb))
        .unwrap_or_else(|| DVector::zeros(k))
}

/// Lawson-Hanson active set method for `min ‖A x − b‖, x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let k = a.ncols();
    let mut x = DVector::<f64>::zeros(k);
    let mut passive = vec![false; k];
    let eps = 1e-12 * (1.0 + a.norm() * b.norm());
    for _ in 0..3 * k.max(1) + 10 {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..k)
            .filter(|&j| !passive[j] && w[j] > eps)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let sub = DMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])]);
            let z_p = least_squares(&sub, b);
            let mut z = DVector::<f64>::zeros(k);
            for (c, &i) in idx.iter().enumerate() {
                z[i] = z_p[c];
            }
            if idx.iter().all(|&i| z[i] > 0.0) {
                x = z;
                break;
            }
            let mut step = 1.0_f64;
            for &i in &idx {
                if z[i] <= 0.0 {
                    step = step.min(x[i] / (x[i] - z[i]));
                }
            }
            x = &x + (z - &x) * step;
            for &i in &idx {
                if x[i] <= 1e-15 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    x
}

fn gradients(fs: &[&dyn SmoothScalar], x: &[f64]) -> Result<Vec<Vec<f64>>> {
    fs.iter()
        .map(|f| {
            let g = f.gradient(x);
            if g.len() != x.len() {
                return Err(Error::DimensionMismatch {
                    expected: x.len(),
                    got: g.len(),
                });
            }
            Ok(g)
        })
        .collect()
}

/// Solves `Σ α_i ∇φ_i = ∇Ψ` (the rule with `λ_c = −1`) by least squares.
///
/// A small residual certifies stationarity only: maximizers pass as well.
pub fn lagrange_multipliers(phi: &[&dyn SmoothScalar], grad_psi: &[f64], x_star: &[f64]) -> Result<LagrangeResult> {
    let n = x_star.len();
    if grad_psi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: grad_psi.len(),
        });
    }
    approx::tangent_level_set_cone(phi, x_star)?;
    let g = columns(&gradients(phi, x_star)?, n);
    let b = DVector::from_column_slice(grad_psi);
    let alpha = least_squares(&g, &b);
    let residual = (&g * &alpha - &b).norm();
    Ok(LagrangeResult {
        alphas: alpha.iter().copied().collect(),
        lambda_c: -1.0,
        residual,
        certified: residual <= tol::STATIONARITY,
    })
}

/// Solves `Σ α_i ∇φ_i + Σ β_j ∇h_j = ∇Ψ` with `β ≤ 0` over the active
/// inequalities.
pub fn kkt_multipliers(
    phi: &[&dyn SmoothScalar],
    h: &[&dyn SmoothScalar],
    grad_psi: &[f64],
    x_star: &[f64],
) -> Result<KktResult> {
    let n = x_star.len();
    if grad_psi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: grad_psi.len(),
        });
    }
    approx::active_set_cone(phi, h, x_star)?;
    let active: Vec<usize> = (0..h.len())
        .filter(|&j| h[j].value(x_star).abs() <= tol::FEASIBILITY)
        .collect();
    let eq = columns(&gradients(phi, x_star)?, n);
    let active_fs: Vec<&dyn SmoothScalar> = active.iter().map(|&j| h[j]).collect();
    let ineq = columns(&gradients(&active_fs, x_star)?, n);
    let b = DVector::from_column_slice(grad_psi);

    // Project out span{∇φ}; with γ = −β ≥ 0 the inequality part is
    // min ‖P(−H γ) − P ∇Ψ‖.
    let projector = if eq.ncols() == 0 {
        DMatrix::identity(n, n)
    } else {
        let q = eq.clone().qr().q();
        let q = q.columns(0, eq.ncols()).into_owned();
        DMatrix::identity(n, n) - &q * q.transpose()
    };
    let gamma = nnls(&(-(&projector * &ineq)), &(&projector * &b));
    let rhs = &b + &ineq * &gamma;
    let alpha = least_squares(&eq, &rhs);
    let residual = (&eq * &alpha - &ineq * &gamma - &b).norm();
    let mut betas = vec![0.0; h.len()];
    for (c, &j) in active.iter().enumerate() {
        betas[j] = if gamma[c] == 0.0 { 0.0 } else { -gamma[c] };
    }
    Ok(KktResult {
        alphas: alpha.iter().copied().collect(),
        betas,
        active,
        lambda_c: -1.0,
        residual,
        certified: residual <= tol::STATIONARITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::FnScalar;

    fn ray(v: &[f64]) -> Cone {
        Cone::span(v.len(), vec![v.to_vec()]).unwrap()
    }

    fn problem(r: Cone, s: Cone, g: &[f64]) -> AbstractProblem {
        AbstractProblem::new(r, s, g.to_vec()).unwrap()
    }

    #[test]
    fn augmentation_examples() {
        let p = problem(Cone::whole_space(2), Cone::zero(2), &[1.0, 2.0]);
        let a = augment(&p);
        assert_eq!(a.profitable, Cone::span(3, vec![vec![0.0, 0.0, -1.0]]).unwrap());

        let p = problem(ray(&[1.0, 0.0]), Cone::zero(2), &[3.0, 0.0]);
        assert_eq!(augment(&p).augmented_reachable, ray(&[1.0, 0.0, 3.0]));

        let p = problem(Cone::zero(2), Cone::whole_space(2), &[0.0, 0.0]);
        let s = augment(&p).profitable;
        for x in [[5.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 1.0, -0.5]] {
            assert!(s.contains(&x).unwrap());
        }
        assert!(!s.contains(&[0.0, 0.0, 0.1]).unwrap());
    }

    #[test]
    fn whole_reachable_cone_forces_gradient_alignment() {
        let p = problem(Cone::whole_space(2), Cone::zero(2), &[1.0, 1.0]);
        let m = solve_amp(&p).unwrap().unwrap();
        assert_eq!(m.lambda_c, -1.0);
        assert!((m.lambda[0] - 1.0).abs() < 1e-12 && (m.lambda[1] - 1.0).abs() < 1e-12);
        assert!(m.verify(&p).unwrap().ok());
        assert_eq!(classify_normality(&p).unwrap(), NormalityClass::Normal);
    }

    #[test]
    fn fermat_setting() {
        let p = problem(Cone::whole_space(2), Cone::whole_space(2), &[0.0, 0.0]);
        let m = solve_amp(&p).unwrap().unwrap();
        assert_eq!((m.lambda.clone(), m.lambda_c), (vec![0.0, 0.0], -1.0));
        assert_eq!(classify_normality(&p).unwrap(), NormalityClass::Normal);

        let p = problem(Cone::whole_space(2), Cone::whole_space(2), &[1.0, 0.0]);
        assert!(solve_amp(&p).unwrap().is_none());
        assert!(matches!(classify_normality(&p), Err(Error::NoMultipliers)));
    }

    #[test]
    fn abnormal_ray() {
        let p = problem(ray(&[1.0, 0.0]), Cone::zero(2), &[1.0, 0.0]);
        let witness = Multipliers {
            lambda: vec![-1.0, 0.0],
            lambda_c: 0.0,
            normalized: true,
        };
        assert!(witness.verify(&p).unwrap().ok());
        assert!(solve_amp(&p).unwrap().unwrap().verify(&p).unwrap().ok());
        assert_eq!(classify_normality(&p).unwrap(), NormalityClass::Abnormal);
    }

    #[test]
    fn degenerate_reachable_cone() {
        let p = problem(Cone::zero(3), Cone::whole_space(3), &[1.0, -2.0, 0.5]);
        let m = solve_amp(&p).unwrap().unwrap();
        assert_eq!(m.lambda, vec![0.0; 3]);
        assert_eq!(m.lambda_c, -1.0);
    }

    #[test]
    fn constraint_form_target_uses_the_right_sign() {
        // S = {w : w₂ ≥ 0} so −S^⊥ = span⁺{e₂}
        let s = Cone::halfspaces(2, vec![vec![0.0, -1.0]], vec![]).unwrap();
        let p = problem(Cone::whole_space(2), s, &[0.0, 1.0]);
        let m = solve_amp(&p).unwrap().unwrap();
        assert_eq!(m.lambda_c, -1.0);
        assert!((m.lambda[1] - 1.0).abs() < 1e-12);
        let p = problem(
            Cone::whole_space(2),
            Cone::halfspaces(2, vec![vec![0.0, -1.0]], vec![]).unwrap(),
            &[0.0, -1.0],
        );
        // λ = −∇Ψ·λ_c ∈ span⁺{e₂} fails for λ_c < 0, and λ_c = 0 forces λ = 0
        assert!(solve_amp(&p).unwrap().is_none());
    }

    #[test]
    fn constraint_form_reachable_cone() {
        let r = Cone::halfspaces(2, vec![vec![-1.0, 0.0]], vec![vec![0.0, 1.0]]).unwrap();
        let p = problem(r.clone(), Cone::zero(2), &[1.0, 0.0]);
        let m = solve_amp(&p).unwrap().unwrap();
        assert!(m.verify(&p).unwrap().ok());
        let pv = problem(ray(&[1.0, 0.0]), Cone::zero(2), &[1.0, 0.0]);
        assert_eq!(classify_normality(&p).unwrap(), classify_normality(&pv).unwrap());
    }

    #[test]
    fn unit_cost_view_rescales() {
        let m = Multipliers {
            lambda: vec![1.0, 0.5],
            lambda_c: -0.5,
            normalized: true,
        };
        let u = m.unit_cost_view();
        assert_eq!(u.lambda, vec![2.0, 1.0]);
        assert_eq!(u.lambda_c, -1.0);
    }

    #[test]
    fn fermat_examples() {
        assert!(fermat_check(&[0.0, 0.0], 1e-8));
        assert!(!fermat_check(&[1e-3, 0.0], 1e-8));
    }

    fn circle() -> FnScalar {
        FnScalar::new(|x| x[0] * x[0] + x[1] * x[1] - 1.0, |x| vec![2.0 * x[0], 2.0 * x[1]])
    }

    #[test]
    fn lagrange_on_the_circle() {
        let c = circle();
        let s = 0.5_f64.sqrt();
        let r = lagrange_multipliers(&[&c], &[1.0, 1.0], &[-s, -s]).unwrap();
        assert!((r.alphas[0] + s).abs() < 1e-10);
        assert!(r.certified);
        let r = lagrange_multipliers(&[&c], &[1.0, 1.0], &[s, s]).unwrap();
        assert!(r.certified && (r.alphas[0] - s).abs() < 1e-10);
        let x = FnScalar::affine(vec![1.0], 0.0);
        let r = lagrange_multipliers(&[&x], &[1.0], &[0.0]).unwrap();
        assert!((r.alphas[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kkt_half_plane() {
        let h = FnScalar::affine(vec![-1.0, -1.0], 1.0);
        let r = kkt_multipliers(&[], &[&h], &[1.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!((r.betas[0] + 1.0).abs() < 1e-10);
        assert!(r.residual < 1e-10);

        let inactive = FnScalar::affine(vec![1.0, 0.0], -5.0);
        let r = kkt_multipliers(&[], &[&inactive], &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(r.betas, vec![0.0]);
        assert!(r.active.is_empty());

        // at (1, 0) the constraint is active but cannot balance ∇Ψ = (2, 0)
        let r = kkt_multipliers(&[], &[&h], &[2.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!(r.residual > 0.1 && !r.certified);
    }

    #[test]
    fn kkt_sign_is_enforced() {
        // ∇Ψ = −∇h would need β = +1; the best nonpositive choice is β = 0
        let h = FnScalar::affine(vec![-1.0, -1.0], 1.0);
        let r = kkt_multipliers(&[], &[&h], &[-1.0, -1.0], &[0.5, 0.5]).unwrap();
        assert_eq!(r.betas, vec![0.0]);
        assert!(!r.certified);
    }

    #[test]
    fn kkt_with_equality() {
        let phi = FnScalar::affine(vec![1.0, 0.0], 0.0);
        let h = FnScalar::affine(vec![0.0, -1.0], 0.0);
        let r = kkt_multipliers(&[&phi], &[&h], &[3.0, 2.0], &[0.0, 0.0]).unwrap();
        assert!((r.alphas[0] - 3.0).abs() < 1e-10);
        assert!((r.betas[0] + 2.0).abs() < 1e-10);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn nnls_matches_unconstrained_when_interior() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        let x = nnls(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 2.0).abs() < 1e-9);
        let b = DVector::from_column_slice(&[-1.0, 2.0, 1.0]);
        let x = nnls(&a, &b);
        assert_eq!(x[0], 0.0);
        assert!((x[1] - 1.5).abs() < 1e-9);
    }
}
