//! Seeded sampling helpers for the numerical checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cone::Cone;
use crate::linalg::{axpy, norm, scale};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the unit sphere of `ℝⁿ`.
pub fn unit_vector(rng: &mut SampleRng, n: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let ng = norm(&g);
        if ng > 1e-12 {
            return scale(&g, 1.0 / ng);
        }
    }
}

/// Uniform point in `center + B(r)`.
pub fn ball_point(rng: &mut SampleRng, center: &[f64], r: f64) -> Vec<f64> {
    let n = center.len();
    let u = unit_vector(rng, n);
    let rho = r * rng.random::<f64>().powf(1.0 / n as f64);
    axpy(center, rho, &u)
}

/// Unit directions in a cone: the normalized generators first, then random
/// nonnegative combinations skewed towards sparse ones. Constraint-form cones
/// with dependent rows fall back to rejection sampling of Gaussian directions.
///
/// Returns an empty list when only `0` is available.
pub fn cone_directions(cone: &Cone, count: usize, rng: &mut SampleRng) -> Vec<Vec<f64>> {
    let n = cone.dim();
    let Some(v) = cone.to_generators() else {
        let mut out = Vec::new();
        let mut attempts = 0;
        while out.len() < count && attempts < 1000 * count.max(1) {
            attempts += 1;
            let d = unit_vector(rng, n);
            if cone.contains(&d).unwrap_or(false) {
                out.push(d);
            }
        }
        return out;
    };
    let gens: Vec<Vec<f64>> = v
        .generators()
        .iter()
        .filter(|g| norm(g) > 0.0)
        .map(|g| scale(g, 1.0 / norm(g)))
        .collect();
    if gens.is_empty() {
        return Vec::new();
    }
    let mut out: Vec<Vec<f64>> = gens.iter().take(count).cloned().collect();
    let mut attempts = 0;
    while out.len() < count && attempts < 100 * count {
        attempts += 1;
        let mut c = vec![0.0; n];
        for g in &gens {
            let w = rng.random::<f64>().powi(3);
            c = axpy(&c, w, g);
        }
        let nc = norm(&c);
        if nc > 1e-9 {
            out.push(scale(&c, 1.0 / nc));
        }
    }
    out
}
