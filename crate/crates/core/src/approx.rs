//! Approximating cones and the directional open mapping construction.
//!
//! A map `F` defined on `x̂ + C` near `x̂` is approximated by a linear `L` when
//! `F(x̂ + c) = F(x̂) + Lc + o(c)` for `c ∈ C`. The image cone `LC` is then an
//! approximating cone to the image of `F`, and every direction `v` interior
//! to `LC` is filled by the image of `F` in a small conic neighbourhood.
//! Everything here is numerical: existence claims are replaced by sampled
//! checks and a fixed-point scheme whose failures are reported as
//! "unverified" rather than as counterexamples.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{self, Cone, ConeH, ConeV};
use crate::error::{Error, Result};
use crate::func::SmoothScalar;
use crate::linalg::{self, add, axpy, dot, norm, scale, sub, LinearMap};
use crate::lp::{Bound, LinearProgram, Relation};
use crate::sample;
use crate::tol;

pub type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A map `F : x̂ + (C ∩ B(δ)) → ℝⁿ` around the base point `x̂ ∈ ℝᵐ`.
#[derive(Clone)]
pub struct ConicMap {
    pub m: usize,
    pub n: usize,
    pub base: Vec<f64>,
    pub cone: Cone,
    pub radius: f64,
    eval: MapFn,
}

impl fmt::Debug for ConicMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConicMap")
            .field("m", &self.m)
            .field("n", &self.n)
            .field("base", &self.base)
            .field("cone", &self.cone)
            .field("radius", &self.radius)
            .finish_non_exhaustive()
    }
}

impl ConicMap {
    pub fn new(
        base: Vec<f64>,
        cone: Cone,
        radius: f64,
        n: usize,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let m = base.len();
        if cone.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: cone.dim(),
            });
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        let map = Self {
            m,
            n,
            base,
            cone,
            radius,
            eval: Arc::new(eval),
        };
        let y = map.eval(&map.base);
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if !linalg::all_finite(&y) {
            return Err(Error::NonFinite("map value at the base point"));
        }
        Ok(map)
    }

    /// `F(x)` at an absolute point `x`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }

    /// `F(x̂ + c)`.
    pub fn eval_offset(&self, c: &[f64]) -> Vec<f64> {
        (self.eval)(&add(&self.base, c))
    }

    /// The anchor image `F(x̂)`.
    pub fn anchor(&self) -> Vec<f64> {
        self.eval(&self.base)
    }
}

/// Approximating cone `{w : ∇φ_i(y)·w = 0}` to the level set `{φ = 0}` at `y`.
pub fn tangent_level_set_cone(constraints: &[&dyn SmoothScalar], y: &[f64]) -> Result<ConeH> {
    active_set_cone(constraints, &[], y)
}

/// Approximating cone at `y` to `{φ = 0, h ≤ 0}`: equalities from every `φ`,
/// inequalities from the active `h` only.
pub fn active_set_cone(
    eq_constraints: &[&dyn SmoothScalar],
    ineq_constraints: &[&dyn SmoothScalar],
    y: &[f64],
) -> Result<ConeH> {
    let n = y.len();
    let gradient = |f: &dyn SmoothScalar| -> Result<Vec<f64>> {
        let g = f.gradient(y);
        if g.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.len(),
            });
        }
        if !linalg::all_finite(&g) {
            return Err(Error::NonFinite("constraint gradient"));
        }
        Ok(g)
    };
    let mut eq = Vec::with_capacity(eq_constraints.len());
    for (i, phi) in eq_constraints.iter().enumerate() {
        let value = phi.value(y);
        if !(value.abs() <= tol::FEASIBILITY) {
            return Err(Error::Infeasible(format!("equality {} has value {value:e}", i + 1)));
        }
        eq.push(gradient(*phi)?);
    }
    let mut ineq = Vec::new();
    for (j, h) in ineq_constraints.iter().enumerate() {
        let value = h.value(y);
        if value.is_nan() || value > tol::FEASIBILITY {
            return Err(Error::Infeasible(format!("inequality {} has value {value:e}", j + 1)));
        }
        if value.abs() <= tol::FEASIBILITY {
            ineq.push(gradient(*h)?);
        }
    }
    let mut rows = eq.clone();
    rows.extend(ineq.iter().cloned());
    let r = linalg::rank(&rows, n, tol::RANK);
    if r < rows.len() {
        return Err(Error::RankDeficient {
            rank: r,
            expected: rows.len(),
        });
    }
    ConeH::new(n, ineq, eq)
}

/// Worst linearization error ratio per radius.
#[derive(Debug, Clone, Serialize)]
pub struct DiffReport {
    pub radii: Vec<f64>,
    pub worst_ratio: Vec<f64>,
    pub threshold: f64,
    pub pass: bool,
    pub note: Option<String>,
}

/// `radius · 2^{-k}` for `k = 0..count`.
pub fn halving_radii(radius: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| radius * 0.5_f64.powi(k as i32)).collect()
}

/// Samples `sup |F(x̂+c) − F(x̂) − Lc| / |c|` over `c ∈ C`, `|c| = r`, for each
/// radius, with the default seed.
pub fn check_directional_diff(
    map: &ConicMap,
    l: &LinearMap,
    radii: &[f64],
    samples_per_radius: usize,
) -> Result<DiffReport> {
    check_directional_diff_seeded(map, l, radii, samples_per_radius, 0)
}

pub fn check_directional_diff_seeded(
    map: &ConicMap,
    l: &LinearMap,
    radii: &[f64],
    samples_per_radius: usize,
    seed: u64,
) -> Result<DiffReport> {
    if l.rows() != map.n || l.cols() != map.m {
        return Err(Error::InvalidArgument(format!(
            "linear map is {}x{}, expected {}x{}",
            l.rows(),
            l.cols(),
            map.n,
            map.m
        )));
    }
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii given".into()));
    }
    for w in radii.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
        }
    }
    if !(radii[radii.len() - 1] > 0.0) || radii[0] > map.radius * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!("radii must lie in (0, {}]", map.radius)));
    }
    let mut rng = sample::rng(seed);
    let directions = sample::cone_directions(&map.cone, samples_per_radius.max(1), &mut rng);
    if directions.is_empty() {
        return Ok(DiffReport {
            radii: radii.to_vec(),
            worst_ratio: vec![0.0; radii.len()],
            threshold: tol::DIFF_THRESHOLD,
            pass: true,
            note: Some("domain cone is {0}; only c = 0 is available".into()),
        });
    }
    let y0 = map.anchor();
    let worst_ratio: Vec<f64> = radii
        .iter()
        .map(|&r| {
            directions
                .par_iter()
                .map(|d| {
                    let c = scale(d, r);
                    let err = sub(&sub(&map.eval_offset(&c), &y0), &l.apply(&c));
                    let ratio = norm(&err) / r;
                    if ratio.is_nan() {
                        f64::INFINITY
                    } else {
                        ratio
                    }
                })
                .reduce(|| 0.0, f64::max)
        })
        .collect();
    let scale_y = 1.0 + linalg::norm_inf(&y0);
    let floor = |r: f64| tol::DIFF_FLOOR.max(64.0 * f64::EPSILON * scale_y / r);
    let decays = radii.windows(2).zip(worst_ratio.windows(2)).all(|(r, q)| {
        let needed = tol::DECAY_FACTOR.powf((r[0] / r[1]).log2());
        q[1] <= floor(r[1]) || q[1] * needed <= q[0]
    });
    let last = radii.len() - 1;
    let pass = decays && worst_ratio[last] <= tol::DIFF_THRESHOLD.max(floor(radii[last]));
    Ok(DiffReport {
        radii: radii.to_vec(),
        worst_ratio,
        threshold: tol::DIFF_THRESHOLD,
        pass,
        note: None,
    })
}

/// Re-expresses `F` over the image cone: `G(k) = F(x̂ + M k)` on `K = LC`,
/// with `M` the least-squares right inverse of `L` on its range.
///
/// Requires `C` in generator form (or convertible), and `M g ∈ C` for every
/// generator `g` of `K` so that `G` only evaluates `F` on its domain.
pub fn normalized_chart(map: &ConicMap, l: &LinearMap) -> Result<ConicMap> {
    if l.rows() != map.n || l.cols() != map.m {
        return Err(Error::DimensionMismatch {
            expected: map.n * map.m,
            got: l.rows() * l.cols(),
        });
    }
    if map.m > map.n {
        return Err(Error::InvalidArgument(format!(
            "chart needs m <= n, got m = {} and n = {}",
            map.m, map.n
        )));
    }
    let c = map
        .cone
        .to_generators()
        .ok_or(Error::NeedsGenerators("normalized chart"))?;
    let k_gens = cone::dedup_generators(
        c.generators()
            .iter()
            .map(|g| l.apply(g))
            .filter(|g| linalg::norm_inf(g) > tol::CONE)
            .collect(),
    );
    let m_map = l.pseudo_inverse()?;
    for g in &k_gens {
        let mg = m_map.apply(g);
        let residual = norm(&sub(&l.apply(&mg), g));
        if residual > 1e-8 * 1.0_f64.max(norm(g)) {
            return Err(Error::PseudoInverse(residual));
        }
        if !map.cone.contains(&mg)? {
            return Err(Error::InvalidArgument(
                "the right inverse maps a generator of LC outside C".into(),
            ));
        }
    }
    let k = ConeV::new(map.n, k_gens)?;
    let m_norm = m_map.norm();
    let radius = if m_norm > 0.0 { map.radius / m_norm } else { map.radius };
    let inner = map.clone();
    ConicMap::new(vec![0.0; map.n], Cone::V(k), radius, map.n, move |k| {
        inner.eval_offset(&m_map.apply(k))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub attained: bool,
    /// left the ball before converging
    pub escaped: bool,
    /// map evaluations used
    pub evaluations: usize,
    pub residual: f64,
}

/// Iterates `x ← x − φ(x) + y` from `x₀ = y`, requiring every iterate to stay
/// in `center + B(r)`.
pub fn fixed_point(phi: &(dyn Fn(&[f64]) -> Vec<f64> + Sync), y: &[f64], center: &[f64], r: f64) -> FixedPoint {
    let mut x = y.to_vec();
    let mut residual = f64::INFINITY;
    for k in 0..=tol::FIXED_POINT_ITERS {
        if norm(&sub(&x, center)) > r * (1.0 + 1e-12) {
            return FixedPoint {
                attained: false,
                escaped: true,
                evaluations: k,
                residual,
            };
        }
        let diff = sub(&phi(&x), y);
        residual = norm(&diff);
        if residual <= tol::ATTAIN {
            return FixedPoint {
                attained: true,
                escaped: false,
                evaluations: k + 1,
                residual,
            };
        }
        if !residual.is_finite() {
            break;
        }
        x = sub(&x, &diff);
    }
    FixedPoint {
        attained: false,
        escaped: false,
        evaluations: tol::FIXED_POINT_ITERS + 1,
        residual,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoveringReport {
    pub targets: usize,
    pub attained: usize,
    /// no convergence within the iteration cap
    pub unverified: usize,
    pub escaped: usize,
    pub coverage_fraction: f64,
    pub max_evaluations: usize,
    /// largest `|φ(x) − x|` seen while checking the closeness hypothesis
    pub closeness: f64,
    pub note: String,
}

/// Samples targets in `center + B(R − ρ)` and solves `φ(x) = y` by the
/// fixed-point scheme inside `center + B(R)`.
pub fn near_identity_covering(
    phi: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    center: &[f64],
    r: f64,
    rho: f64,
    target_samples: usize,
    seed: u64,
) -> Result<CoveringReport> {
    if !(rho > 0.0 && r > rho && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need R > rho > 0, got R = {r}, rho = {rho}"
        )));
    }
    let mut rng = sample::rng(seed);
    let probes: Vec<Vec<f64>> = std::iter::once(center.to_vec())
        .chain((0..target_samples.max(200)).map(|_| sample::ball_point(&mut rng, center, r)))
        .collect();
    let mut closeness = 0.0_f64;
    for x in &probes {
        let d = norm(&sub(&phi(x), x));
        if !(d <= rho) {
            return Err(Error::Precondition(format!(
                "|phi(x) - x| = {d:e} exceeds rho = {rho} at x = {x:?}"
            )));
        }
        closeness = closeness.max(d);
    }
    let targets: Vec<Vec<f64>> = (0..target_samples)
        .map(|_| sample::ball_point(&mut rng, center, r - rho))
        .collect();
    let outcomes: Vec<FixedPoint> = targets.par_iter().map(|y| fixed_point(phi, y, center, r)).collect();
    Ok(summarize(
        &outcomes,
        closeness,
        format!("targets sampled from the ball of radius R - rho = {} only", r - rho),
    ))
}

fn summarize(outcomes: &[FixedPoint], closeness: f64, note: String) -> CoveringReport {
    let attained = outcomes.iter().filter(|o| o.attained).count();
    let escaped = outcomes.iter().filter(|o| o.escaped).count();
    let targets = outcomes.len();
    CoveringReport {
        targets,
        attained,
        unverified: targets - attained - escaped,
        escaped,
        coverage_fraction: if targets == 0 {
            1.0
        } else {
            attained as f64 / targets as f64
        },
        max_evaluations: outcomes.iter().map(|o| o.evaluations).max().unwrap_or(0),
        closeness,
        note,
    }
}

#[derive(Debug, Clone)]
pub struct WitnessOptions {
    pub seed: u64,
    /// points per trial of the closeness test on `Φ_s`
    pub closeness_samples: usize,
    pub coverage_targets: usize,
    /// radii for the differentiability precheck; `None` halves from `δ`
    pub diff_radii: Option<Vec<f64>>,
    pub diff_samples: usize,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            closeness_samples: 50,
            coverage_targets: 200,
            diff_radii: None,
            diff_samples: 32,
        }
    }
}

/// Conic neighbourhood of `v` filled by the image of `F`, with the data of
/// its construction and the sampled coverage check.
#[derive(Debug, Clone)]
pub struct OpenMappingWitness {
    pub gamma: ConeV,
    pub r_bar: f64,
    pub basis_vectors: Vec<Vec<f64>>,
    /// preimages `c_i ∈ C` of the basis vectors
    pub preimages: Vec<Vec<f64>>,
    pub pseudo_inverse: LinearMap,
    pub alpha: f64,
    pub beta: f64,
    pub s_star: f64,
    pub s_bar: f64,
    pub coverage_fraction: f64,
    pub coverage: CoveringReport,
    pub diff: DiffReport,
    /// `max |(LΛ − I)_{ij}|`
    pub identity_defect: f64,
    /// `|(1/n) Σ v̂_i − v|`, absent for `v = 0`
    pub centroid_defect: Option<f64>,
}

fn interior_of(k: &Cone, v: &[f64]) -> Result<bool> {
    if !k.contains(v)? {
        return Ok(false);
    }
    for i in 0..v.len() {
        for s in [1.0, -1.0] {
            let mut w = v.to_vec();
            w[i] += s * tol::INTERIOR_EPS;
            if !k.contains(&w)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `c ∈ C` with `L c = target`, smallest in the l1 norm.
fn preimage_in_cone(c: &Cone, l: &LinearMap, target: &[f64]) -> Option<Vec<f64>> {
    let mut lp = LinearProgram::new();
    let x = lp.add_vars(l.cols(), Bound::Free);
    cone::constrain_member(&mut lp, c, &x, 1.0);
    for (i, ti) in target.iter().enumerate() {
        let row: Vec<_> = x.iter().enumerate().map(|(j, v)| (*v, l.entry(i, j))).collect();
        lp.add_row(&row, Relation::Eq, *ti);
    }
    let mut objective = Vec::new();
    for &v in &x {
        let t = lp.add_var(Bound::NonNeg);
        lp.add_row(&[(t, 1.0), (v, -1.0)], Relation::Ge, 0.0);
        lp.add_row(&[(t, 1.0), (v, 1.0)], Relation::Ge, 0.0);
        objective.push((t, 1.0));
    }
    lp.minimize(&objective);
    lp.solve().solution().map(|s| x.iter().map(|v| s[*v]).collect())
}

/// Builds the conic neighbourhood `Γ ∋ v` and radius `r̄` with
/// `F(x̂ + C ∩ B(δ)) ⊇ F(x̂) + Γ ∩ B(r̄)`, then samples targets in `Γ ∩ B(r̄)`
/// and solves for their preimages.
///
/// `v = 0` is accepted only when `C` is a subspace whose image under `L` is
/// all of `ℝⁿ`; a conic domain cannot contain the preimage of a whole ball
/// around `0`.
pub fn open_mapping_witness(
    map: &ConicMap,
    l: &LinearMap,
    v: &[f64],
    opts: &WitnessOptions,
) -> Result<OpenMappingWitness> {
    let (n, m) = (map.n, map.m);
    if l.rows() != n || l.cols() != m {
        return Err(Error::InvalidArgument(format!(
            "linear map is {}x{}, expected {n}x{m}",
            l.rows(),
            l.cols()
        )));
    }
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let c = map
        .cone
        .to_generators()
        .ok_or(Error::NeedsGenerators("open mapping witness"))?;
    let image: Vec<Vec<f64>> = c
        .generators()
        .iter()
        .map(|g| l.apply(g))
        .filter(|g| linalg::norm_inf(g) > 0.0)
        .collect();
    let lc = Cone::V(ConeV::new(n, image)?);
    if !interior_of(&lc, v)? {
        return Err(Error::NotInterior);
    }
    let radii = opts.diff_radii.clone().unwrap_or_else(|| halving_radii(map.radius, 12));
    let diff = check_directional_diff_seeded(map, l, &radii, opts.diff_samples, opts.seed)?;
    if !diff.pass {
        return Err(Error::Precondition(format!(
            "F is not approximated by L on C: worst ratios {:?}",
            diff.worst_ratio
        )));
    }

    let v_norm = norm(v);
    let (basis, preimages, lambda, alpha, beta) = if v_norm == 0.0 {
        subspace_setup(&map.cone, &c, l)?
    } else {
        conic_setup(&map.cone, &lc, l, v)?
    };
    let identity_defect = l.compose(&lambda).identity_defect();
    if identity_defect > 1e-9 {
        return Err(Error::PseudoInverse(identity_defect));
    }
    let centroid_defect = (v_norm > 0.0).then(|| {
        let mean = basis
            .iter()
            .fold(vec![0.0; n], |acc, b| add(&acc, b))
            .iter()
            .map(|x| x / n as f64)
            .collect::<Vec<_>>();
        norm(&sub(&mean, v))
    });

    let lambda_norm = lambda.norm();
    let s_star = map.radius / (lambda_norm * (v_norm + beta));
    let y0 = map.anchor();
    let phi_s = |s: f64| {
        let lambda = lambda.clone();
        let y0 = y0.clone();
        move |y: &[f64]| -> Vec<f64> {
            let c = scale(&lambda.apply(y), s);
            scale(&sub(&map.eval_offset(&c), &y0), 1.0 / s)
        }
    };
    let mut rng = sample::rng(opts.seed);
    let probes: Vec<Vec<f64>> = std::iter::once(v.to_vec())
        .chain((0..opts.closeness_samples).map(|_| sample::ball_point(&mut rng, v, beta)))
        .collect();
    let mut s = s_star;
    let mut closeness;
    loop {
        let phi = phi_s(s);
        closeness = probes.iter().map(|y| norm(&sub(&phi(y), y))).fold(0.0_f64, |a, d| {
            if d.is_nan() {
                f64::INFINITY
            } else {
                a.max(d)
            }
        });
        if closeness <= beta / 2.0 {
            break;
        }
        s /= 2.0;
        if s < 1e-8 {
            return Err(Error::SearchFailed(format!(
                "no s in [1e-8, {s_star:e}] makes the rescaled map beta/2-close to the identity"
            )));
        }
    }
    let s_bar = s;

    let (gamma, r_bar) = if v_norm == 0.0 {
        (ConeV::whole_space(n), s_bar * beta / 2.0)
    } else {
        let half = beta / 2.0;
        let z = linalg::null_space(&[v.to_vec()], n, 1e-12);
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for zi in &z {
            dirs.push(zi.clone());
            dirs.push(linalg::neg(zi));
        }
        if z.len() >= 2 {
            for _ in 0..16 {
                let g = sample::unit_vector(&mut rng, z.len());
                let u = z.iter().zip(&g).fold(vec![0.0; n], |acc, (zi, gi)| axpy(&acc, *gi, zi));
                dirs.push(u);
            }
        }
        let gens = if dirs.is_empty() {
            vec![v.to_vec()]
        } else {
            dirs.iter().map(|u| axpy(v, half, u)).collect()
        };
        (ConeV::new(n, gens)?, s_bar * (v_norm * v_norm - half * half).sqrt())
    };

    // Coverage: y ∈ Γ ∩ B(r̄) is reached as s·Φ_s(z) with y/s on the boundary
    // of v + B(β/2), so that s ≤ s̄.
    let gamma_cone = Cone::V(gamma.clone());
    let directions = sample::cone_directions(&gamma_cone, opts.coverage_targets, &mut rng);
    let mut targets = Vec::with_capacity(opts.coverage_targets);
    for i in 0..opts.coverage_targets {
        let d = if directions.is_empty() || v_norm == 0.0 {
            sample::unit_vector(&mut rng, n)
        } else {
            directions[i % directions.len()].clone()
        };
        let rho = r_bar * rand::Rng::random::<f64>(&mut rng).powf(1.0 / n as f64);
        targets.push(scale(&d, rho));
    }
    let outcomes: Vec<FixedPoint> = targets
        .par_iter()
        .map(|y| {
            let ny = norm(y);
            if ny == 0.0 {
                return FixedPoint {
                    attained: true,
                    escaped: false,
                    evaluations: 0,
                    residual: 0.0,
                };
            }
            let (s, center) = if v_norm == 0.0 {
                (s_bar, vec![0.0; n])
            } else {
                let d = scale(y, 1.0 / ny);
                let dv = dot(&d, v);
                let disc = (dv * dv - v_norm * v_norm + beta * beta / 4.0).max(0.0);
                let t_max = dv + disc.sqrt();
                ((ny / t_max).min(s_bar), v.to_vec())
            };
            let phi = phi_s(s);
            fixed_point(&phi, &scale(y, 1.0 / s), &center, beta)
        })
        .collect();
    let coverage = summarize(
        &outcomes,
        closeness,
        "targets sampled from the inner polyhedral approximation of the cone".into(),
    );
    Ok(OpenMappingWitness {
        gamma,
        r_bar,
        basis_vectors: basis,
        preimages,
        pseudo_inverse: lambda,
        alpha,
        beta,
        s_star,
        s_bar,
        coverage_fraction: coverage.coverage_fraction,
        coverage,
        diff,
        identity_defect,
        centroid_defect,
    })
}

type Setup = (Vec<Vec<f64>>, Vec<Vec<f64>>, LinearMap, f64, f64);

fn subspace_setup(c: &Cone, c_gens: &ConeV, l: &LinearMap) -> Result<Setup> {
    let n = l.rows();
    if !c.is_subspace() {
        return Err(Error::InvalidArgument(
            "v = 0 needs a domain cone that is a subspace".into(),
        ));
    }
    let q = linalg::orthonormalize(c_gens.generators(), 1e-12);
    let q_map = LinearMap::from_columns(&q, l.cols())?;
    let lq = l.compose(&q_map);
    let lambda = q_map.compose(&lq.pseudo_inverse()?);
    let alpha = 1.0;
    let basis: Vec<Vec<f64>> = (0..n).map(|i| scale(&linalg::unit(n, i), alpha)).collect();
    let preimages = basis.iter().map(|b| lambda.apply(b)).collect();
    Ok((basis, preimages, lambda, alpha, 1.0))
}

fn conic_setup(c: &Cone, lc: &Cone, l: &LinearMap, v: &[f64]) -> Result<Setup> {
    let n = v.len();
    let mut z = linalg::null_space(&[v.to_vec()], n, 1e-12);
    let last = z.iter().fold(vec![0.0; n], |acc, zi| sub(&acc, zi));
    z.push(last);
    let mut alpha = 1.0;
    let basis = loop {
        let candidate: Vec<Vec<f64>> = z.iter().map(|zi| axpy(v, alpha, zi)).collect();
        let mut inside = true;
        for b in &candidate {
            if !lc.contains(b)? {
                inside = false;
                break;
            }
        }
        if inside {
            break candidate;
        }
        alpha /= 2.0;
        if alpha < 1e-12 {
            return Err(Error::SearchFailed("no basis around v inside LC".into()));
        }
    };
    let mut preimages = Vec::with_capacity(n);
    for b in &basis {
        let c_i = preimage_in_cone(c, l, b).ok_or_else(|| Error::SearchFailed(format!("no preimage in C of {b:?}")))?;
        preimages.push(c_i);
    }
    let v_hat = LinearMap::from_columns(&basis, n)?;
    let d = v_hat
        .inverse()
        .ok_or_else(|| Error::SearchFailed("basis vectors are dependent".into()))?;
    let lambda = LinearMap::from_columns(&preimages, l.cols())?.compose(&d);
    // span⁺{v̂_i} = {y : D y ≥ 0}; distance from v to each facet
    let dv = d.apply(v);
    let beta = d
        .to_rows()
        .iter()
        .zip(&dv)
        .map(|(row, x)| x / norm(row))
        .fold(f64::INFINITY, f64::min);
    if !(beta > 0.0) {
        return Err(Error::NotInterior);
    }
    Ok((basis, preimages, lambda, alpha, beta))
}
