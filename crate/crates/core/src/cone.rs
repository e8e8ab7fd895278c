//! Polyhedral convex cones and the separation predicates between them.
//!
//! A [`Cone`] is held either by generators ([`ConeV`], the set of nonnegative
//! combinations) or by homogeneous constraints ([`ConeH`]). No operation
//! converts between the two in general; every predicate is posed directly as
//! an LP feasibility problem over whichever representation it is given.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm};
use crate::lp::{Bound, LinearProgram, Relation};
use crate::tol;

/// `span⁺{generators}`; an empty generator list is the zero cone.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeV {
    dim: usize,
    generators: Vec<Vec<f64>>,
}

/// `{w : a·w ≤ 0 for every a in ineq_normals, b·w = 0 for every b in eq_normals}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeH {
    dim: usize,
    ineq_normals: Vec<Vec<f64>>,
    eq_normals: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cone {
    V(ConeV),
    H(ConeH),
}

/// A nonzero form `p` with `p·k₁ ≥ 0` on the first cone and `p·k₂ ≤ 0` on the
/// second.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationCertificate {
    pub p: Vec<f64>,
    pub scale_note: String,
}

fn check_rows(dim: usize, rows: &[Vec<f64>], what: &'static str) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidArgument("cone dimension must be positive".into()));
    }
    for r in rows {
        if r.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.len(),
            });
        }
        if !linalg::all_finite(r) {
            return Err(Error::NonFinite(what));
        }
    }
    Ok(())
}

impl ConeV {
    pub fn new(dim: usize, generators: Vec<Vec<f64>>) -> Result<Self> {
        check_rows(dim, &generators, "cone generator")?;
        if generators.iter().any(|g| g.iter().all(|x| *x == 0.0)) {
            return Err(Error::ZeroGenerator);
        }
        Ok(Self { dim, generators })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            generators: Vec::new(),
        }
    }

    /// `[0, ∞)ⁿ`
    pub fn orthant(dim: usize) -> Self {
        Self {
            dim,
            generators: (0..dim).map(|i| linalg::unit(dim, i)).collect(),
        }
    }

    /// All of `ℝⁿ` as `span⁺{±e_i}`.
    pub fn whole_space(dim: usize) -> Self {
        let mut generators = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            generators.push(linalg::unit(dim, i));
            generators.push(linalg::neg(&linalg::unit(dim, i)));
        }
        Self { dim, generators }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn into_generators(self) -> Vec<Vec<f64>> {
        self.generators
    }

    pub fn deduplicated(self) -> Self {
        Self {
            dim: self.dim,
            generators: dedup_generators(self.generators),
        }
    }
}

impl ConeH {
    pub fn new(dim: usize, ineq_normals: Vec<Vec<f64>>, eq_normals: Vec<Vec<f64>>) -> Result<Self> {
        check_rows(dim, &ineq_normals, "inequality normal")?;
        check_rows(dim, &eq_normals, "equality normal")?;
        Ok(Self {
            dim,
            ineq_normals,
            eq_normals,
        })
    }

    /// `ℝⁿ`: no constraints at all.
    pub fn whole_space(dim: usize) -> Self {
        Self {
            dim,
            ineq_normals: Vec::new(),
            eq_normals: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ineq_normals(&self) -> &[Vec<f64>] {
        &self.ineq_normals
    }

    pub fn eq_normals(&self) -> &[Vec<f64>] {
        &self.eq_normals
    }

    fn contains(&self, x: &[f64]) -> bool {
        let nx = norm(x);
        let slack = |a: &[f64]| tol::CONE * 1.0_f64.max(norm(a) * nx);
        self.ineq_normals.iter().all(|a| dot(a, x) <= slack(a))
            && self.eq_normals.iter().all(|b| dot(b, x).abs() <= slack(b))
    }

    /// Generator form, available when all constraint rows are linearly
    /// independent. Returns `None` otherwise.
    ///
    /// With `[A; B]` of full row rank, `K = span⁺{d_i} + span{n_j}` where
    /// `d_i = -[A; B]⁺ e_i` for each inequality row and `n_j` spans the common
    /// null space.
    pub fn generators_if_independent(&self) -> Option<ConeV> {
        let mut rows = self.ineq_normals.clone();
        rows.extend(self.eq_normals.iter().cloned());
        if linalg::rank(&rows, self.dim, tol::RANK) < rows.len() {
            return None;
        }
        let mut generators = Vec::new();
        if !rows.is_empty() {
            let stacked = linalg::LinearMap::from_rows(&rows).ok()?;
            let pinv = stacked.pseudo_inverse().ok()?;
            for i in 0..self.ineq_normals.len() {
                let d: Vec<f64> = (0..self.dim).map(|r| -pinv.entry(r, i)).collect();
                generators.push(d);
            }
        }
        for n in linalg::null_space(&rows, self.dim, 1e-12) {
            generators.push(linalg::neg(&n));
            generators.push(n);
        }
        Some(ConeV {
            dim: self.dim,
            generators,
        })
    }
}

impl From<ConeV> for Cone {
    fn from(c: ConeV) -> Self {
        Cone::V(c)
    }
}

impl From<ConeH> for Cone {
    fn from(c: ConeH) -> Self {
        Cone::H(c)
    }
}

impl Cone {
    /// Cone from generators; see [`ConeV::new`].
    pub fn span(dim: usize, generators: Vec<Vec<f64>>) -> Result<Self> {
        ConeV::new(dim, generators).map(Cone::V)
    }

    /// Cone from constraint normals; see [`ConeH::new`].
    pub fn halfspaces(dim: usize, ineq: Vec<Vec<f64>>, eq: Vec<Vec<f64>>) -> Result<Self> {
        ConeH::new(dim, ineq, eq).map(Cone::H)
    }

    pub fn zero(dim: usize) -> Self {
        Cone::V(ConeV::zero(dim))
    }

    pub fn whole_space(dim: usize) -> Self {
        Cone::H(ConeH::whole_space(dim))
    }

    pub fn dim(&self) -> usize {
        match self {
            Cone::V(c) => c.dim,
            Cone::H(c) => c.dim,
        }
    }

    /// Generators when held in generator form.
    pub fn generators(&self) -> Option<&[Vec<f64>]> {
        match self {
            Cone::V(c) => Some(&c.generators),
            Cone::H(_) => None,
        }
    }

    /// Generator form, converting constraint form when its rows are independent.
    pub fn to_generators(&self) -> Option<ConeV> {
        match self {
            Cone::V(c) => Some(c.clone()),
            Cone::H(c) => c.generators_if_independent(),
        }
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: n,
            });
        }
        Ok(())
    }

    /// Whether `x` lies in the cone.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x.len())?;
        Ok(match self {
            Cone::H(h) => h.contains(x),
            Cone::V(v) => {
                if x.iter().all(|c| *c == 0.0) {
                    return Ok(true);
                }
                let mut lp = LinearProgram::new();
                let w: Vec<usize> = lp.add_vars(x.len(), Bound::Free);
                for (var, value) in w.iter().zip(x) {
                    lp.fix(*var, *value);
                }
                constrain_member(&mut lp, &Cone::V(v.clone()), &w, 1.0);
                lp.is_feasible()
            }
        })
    }

    /// `K^⊥ = {p : p·w ≤ 0 for all w in K}` by swapping representations.
    pub fn polar(&self) -> Cone {
        match self {
            Cone::V(v) => Cone::H(ConeH {
                dim: v.dim,
                ineq_normals: v.generators.clone(),
                eq_normals: Vec::new(),
            }),
            Cone::H(h) => {
                let mut generators: Vec<Vec<f64>> = h
                    .ineq_normals
                    .iter()
                    .filter(|a| a.iter().any(|x| *x != 0.0))
                    .cloned()
                    .collect();
                for b in h.eq_normals.iter().filter(|b| b.iter().any(|x| *x != 0.0)) {
                    generators.push(b.clone());
                    generators.push(linalg::neg(b));
                }
                Cone::V(ConeV { dim: h.dim, generators })
            }
        }
    }

    /// `K₁ + K₂` for two cones in generator form.
    pub fn sum(&self, other: &Cone) -> Result<Cone> {
        self.check_dim(other.dim())?;
        match (self, other) {
            (Cone::V(a), Cone::V(b)) => {
                let mut g = a.generators.clone();
                g.extend(b.generators.iter().cloned());
                Ok(Cone::V(ConeV {
                    dim: a.dim,
                    generators: g,
                }))
            }
            _ => Err(Error::NeedsGenerators("cone sum")),
        }
    }

    /// `K₁ ∩ K₂` for two cones in constraint form.
    pub fn intersection(&self, other: &Cone) -> Result<Cone> {
        self.check_dim(other.dim())?;
        match (self, other) {
            (Cone::H(a), Cone::H(b)) => {
                let mut ineq = a.ineq_normals.clone();
                ineq.extend(b.ineq_normals.iter().cloned());
                let mut eq = a.eq_normals.clone();
                eq.extend(b.eq_normals.iter().cloned());
                Ok(Cone::H(ConeH {
                    dim: a.dim,
                    ineq_normals: ineq,
                    eq_normals: eq,
                }))
            }
            _ => Err(Error::InvalidArgument(
                "cone intersection needs constraint form; use member_of_intersection".into(),
            )),
        }
    }

    /// `K = -K`, tested on generators or, in constraint form, by asking whether
    /// any inequality can be strictly satisfied inside the cone.
    pub fn is_subspace(&self) -> bool {
        match self {
            Cone::V(v) => v
                .generators
                .iter()
                .all(|g| self.contains(&linalg::neg(g)).unwrap_or(false)),
            Cone::H(h) => h.ineq_normals.iter().all(|a| {
                let mut lp = LinearProgram::new();
                let w = lp.add_vars(h.dim, Bound::Free);
                constrain_member(&mut lp, self, &w, 1.0);
                let row: Vec<_> = w.iter().copied().zip(a.iter().copied()).collect();
                lp.add_row(&row, Relation::Eq, -1.0);
                !lp.is_feasible()
            }),
        }
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = |rows: &[Vec<f64>]| {
            rows.iter()
                .map(|r| {
                    let c: Vec<String> = r.iter().map(|x| format!("{}", x + 0.0)).collect();
                    format!("({})", c.join(", "))
                })
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            Cone::V(v) if v.generators.is_empty() => write!(f, "{{0}} in R^{}", v.dim),
            Cone::V(v) => write!(f, "span+{{{}}}", rows(&v.generators)),
            Cone::H(h) if h.ineq_normals.is_empty() && h.eq_normals.is_empty() => {
                write!(f, "R^{}", h.dim)
            }
            Cone::H(h) => {
                let mut parts = Vec::new();
                if !h.ineq_normals.is_empty() {
                    parts.push(format!("a·w <= 0 for a in {{{}}}", rows(&h.ineq_normals)));
                }
                if !h.eq_normals.is_empty() {
                    parts.push(format!("b·w = 0 for b in {{{}}}", rows(&h.eq_normals)));
                }
                write!(f, "{{w : {}}}", parts.join("; "))
            }
        }
    }
}

/// Adds LP rows forcing the variables `w` into `sign · K`.
pub(crate) fn constrain_member(lp: &mut LinearProgram, cone: &Cone, w: &[usize], sign: f64) {
    match cone {
        Cone::V(v) => {
            let c = lp.add_vars(v.generators.len(), Bound::NonNeg);
            for (i, wi) in w.iter().enumerate() {
                let mut row = vec![(*wi, 1.0)];
                row.extend(c.iter().zip(&v.generators).map(|(cj, g)| (*cj, -sign * g[i])));
                lp.add_row(&row, Relation::Eq, 0.0);
            }
        }
        Cone::H(h) => {
            for a in &h.ineq_normals {
                let row: Vec<_> = w.iter().zip(a).map(|(wi, ai)| (*wi, sign * ai)).collect();
                lp.add_row(&row, Relation::Le, 0.0);
            }
            for b in &h.eq_normals {
                let row: Vec<_> = w.iter().zip(b).map(|(wi, bi)| (*wi, *bi)).collect();
                lp.add_row(&row, Relation::Eq, 0.0);
            }
        }
    }
}

/// Searches for a nonzero solution of a homogeneous system by fixing each
/// coordinate of `vars` to `+1` then `-1` (with the others boxed in `[-1, 1]`).
///
/// `build` must produce a fresh LP and return the vector variables.
pub(crate) fn nonzero_search<F>(dim: usize, build: F) -> Option<Vec<f64>>
where
    F: Fn(&mut LinearProgram) -> Vec<usize>,
{
    for k in 0..dim {
        for s in [1.0, -1.0] {
            let mut lp = LinearProgram::new();
            let vars = build(&mut lp);
            for &v in &vars {
                lp.add_row(&[(v, 1.0)], Relation::Le, 1.0);
                lp.add_row(&[(v, 1.0)], Relation::Ge, -1.0);
            }
            lp.fix(vars[k], s);
            // prefer the sparsest witness: minimize the l1 norm
            let mut objective = Vec::with_capacity(vars.len());
            for &v in &vars {
                let t = lp.add_var(Bound::NonNeg);
                lp.add_row(&[(t, 1.0), (v, -1.0)], Relation::Ge, 0.0);
                lp.add_row(&[(t, 1.0), (v, 1.0)], Relation::Ge, 0.0);
                objective.push((t, 1.0));
            }
            lp.minimize(&objective);
            if let Some(x) = lp.solve().solution() {
                return Some(vars.iter().map(|v| x[*v]).collect());
            }
        }
    }
    None
}

fn same_dim(k1: &Cone, k2: &Cone) -> Result<usize> {
    k1.check_dim(k2.dim())?;
    Ok(k1.dim())
}

/// Whether `x` lies in `K₁ + … + K_r`, for cones in any representation.
pub fn member_of_sum(cones: &[&Cone], x: &[f64]) -> Result<bool> {
    for c in cones {
        c.check_dim(x.len())?;
    }
    let mut lp = LinearProgram::new();
    let parts: Vec<Vec<usize>> = cones
        .iter()
        .map(|c| {
            let w = lp.add_vars(x.len(), Bound::Free);
            constrain_member(&mut lp, c, &w, 1.0);
            w
        })
        .collect();
    for (i, xi) in x.iter().enumerate() {
        let row: Vec<_> = parts.iter().map(|w| (w[i], 1.0)).collect();
        lp.add_row(&row, Relation::Eq, *xi);
    }
    Ok(lp.is_feasible())
}

/// Whether `x` lies in every one of the cones.
pub fn member_of_intersection(cones: &[&Cone], x: &[f64]) -> Result<bool> {
    for c in cones {
        if !c.contains(x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Unit-normalises and drops generators that coincide within [`tol::DEDUP`].
pub fn dedup_generators(generators: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut units: Vec<Vec<f64>> = Vec::new();
    for g in generators {
        let n = norm(&g);
        if n == 0.0 {
            continue;
        }
        let u = linalg::scale(&g, 1.0 / n);
        if units.iter().any(|k| norm(&linalg::sub(k, &u)) <= tol::DEDUP) {
            continue;
        }
        units.push(u);
        kept.push(g);
    }
    kept
}

/// `K₁ − K₂ = {k₁ − k₂}` for cones in generator form.
pub fn cone_difference(k1: &Cone, k2: &Cone) -> Result<ConeV> {
    let dim = same_dim(k1, k2)?;
    match (k1, k2) {
        (Cone::V(a), Cone::V(b)) => {
            let mut g = a.generators.clone();
            g.extend(b.generators.iter().map(|x| linalg::neg(x)));
            Ok(ConeV {
                dim,
                generators: dedup_generators(g),
            })
        }
        _ => Err(Error::NeedsGenerators("cone difference")),
    }
}

/// A nonzero `p` with `p ≥ 0` on `K₁` and `p ≤ 0` on `K₂`, if one exists.
///
/// Exists exactly when the cones are not transversal.
pub fn linear_separation(k1: &Cone, k2: &Cone) -> Result<Option<SeparationCertificate>> {
    let dim = same_dim(k1, k2)?;
    let p1 = k1.polar();
    let p2 = k2.polar();
    let found = nonzero_search(dim, |lp| {
        let p = lp.add_vars(dim, Bound::Free);
        // p ∈ -K₁^⊥ and p ∈ K₂^⊥
        constrain_member(lp, &p1, &p, -1.0);
        constrain_member(lp, &p2, &p, 1.0);
        p
    });
    Ok(found.map(|p| SeparationCertificate {
        p,
        scale_note: "determined up to positive scaling; reported with max-norm 1".into(),
    }))
}

/// `K₁ − K₂ = ℝⁿ`, decided as the absence of a separating form.
pub fn is_transversal(k1: &Cone, k2: &Cone) -> Result<bool> {
    Ok(linear_separation(k1, k2)?.is_none())
}

/// A nonzero element of `K₁ ∩ K₂`, if any.
pub fn common_nonzero(k1: &Cone, k2: &Cone) -> Result<Option<Vec<f64>>> {
    let dim = same_dim(k1, k2)?;
    Ok(nonzero_search(dim, |lp| {
        let x = lp.add_vars(dim, Bound::Free);
        constrain_member(lp, k1, &x, 1.0);
        constrain_member(lp, k2, &x, 1.0);
        x
    }))
}

/// Transversal with a common nonzero element.
pub fn is_strongly_transversal(k1: &Cone, k2: &Cone) -> Result<bool> {
    Ok(is_transversal(k1, k2)? && common_nonzero(k1, k2)?.is_some())
}

impl SeparationCertificate {
    /// Re-checks `p ≠ 0`, `p ∈ -K₁^⊥` and `p ∈ K₂^⊥`.
    pub fn verify(&self, k1: &Cone, k2: &Cone) -> Result<bool> {
        if linalg::norm_inf(&self.p) == 0.0 {
            return Ok(false);
        }
        Ok(k1.polar().contains(&linalg::neg(&self.p))? && k2.polar().contains(&self.p)?)
    }

    /// Largest sign violation over the generators of cones in generator form.
    pub fn generator_violation(&self, k1: &ConeV, k2: &ConeV) -> f64 {
        let v1 = k1
            .generators
            .iter()
            .map(|g| (-dot(&self.p, g)).max(0.0))
            .fold(0.0, f64::max);
        let v2 = k2
            .generators
            .iter()
            .map(|g| dot(&self.p, g).max(0.0))
            .fold(0.0, f64::max);
        v1.max(v2)
    }
}
