//! Counting zeros, poles and critical points near K, and the verdict on
//! "at least k zeros in K ⇒ at least k − 1 critical points in K_ε".

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{AglError, Result};
use crate::rational::{critical_points, Complex, RationalFunction, Tolerances};
use crate::region::ConvexRegion;

/// Points (with multiplicity) in the closed neighbourhood `K_eps`.
pub fn count_in(points: &[Complex], region: &ConvexRegion, eps: f64, tol: &Tolerances) -> usize {
    points
        .iter()
        .filter(|&&z| region.in_neighborhood(z, eps, tol.membership_tol))
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub point: Complex,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AglReport {
    pub n: usize,
    pub k_requested: usize,
    pub eps: f64,
    pub zeros_in_k: usize,
    pub critical_in_k_eps: usize,
    pub holds: bool,
    /// Least ε giving `k − 1` critical points in `K_ε`; `None` when `f` has
    /// fewer than `k − 1` critical points at all.
    pub required_epsilon: Option<f64>,
    /// Sorted by distance to K.
    pub critical_points: Vec<CriticalPoint>,
}

/// Critical points of `f` with their distances to K, nearest first.
pub fn critical_distances(f: &RationalFunction, region: &ConvexRegion, tol: &Tolerances) -> Result<Vec<CriticalPoint>> {
    let roots = critical_points(f, tol)?;
    let mut out: Vec<CriticalPoint> = roots
        .points
        .into_iter()
        .map(|point| CriticalPoint {
            point,
            distance: region.dist(point),
        })
        .collect();
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    Ok(out)
}

/// The (k−1)-th smallest distance; 0 when `k <= 1`.
fn order_statistic(sorted: &[CriticalPoint], k: usize) -> Option<f64> {
    match k {
        0 | 1 => Some(0.0),
        _ => sorted.get(k - 2).map(|c| c.distance),
    }
}

fn check_hypothesis(f: &RationalFunction, region: &ConvexRegion, k: usize, tol: &Tolerances) -> Result<usize> {
    let found = count_in(&f.zeros, region, 0.0, tol);
    if found < k {
        return Err(AglError::HypothesisUnmet { found, required: k });
    }
    Ok(found)
}

pub fn agl_report(
    f: &RationalFunction,
    region: &ConvexRegion,
    eps: f64,
    k: usize,
    tol: &Tolerances,
) -> Result<AglReport> {
    if !(eps >= 0.0) {
        return Err(AglError::InvalidArgument(format!("eps {eps} must be >= 0")));
    }
    let zeros_in_k = check_hypothesis(f, region, k, tol)?;
    let critical = critical_distances(f, region, tol)?;
    let critical_in_k_eps = critical
        .iter()
        .filter(|c| c.distance <= eps + tol.membership_tol)
        .count();
    Ok(AglReport {
        n: f.total_count(),
        k_requested: k,
        eps,
        zeros_in_k,
        critical_in_k_eps,
        holds: critical_in_k_eps + 1 >= k,
        required_epsilon: order_statistic(&critical, k),
        critical_points: critical,
    })
}

/// Least ε with `#_c(f, K_ε) >= k − 1` under the closed convention.
pub fn required_epsilon(f: &RationalFunction, region: &ConvexRegion, k: usize, tol: &Tolerances) -> Result<f64> {
    check_hypothesis(f, region, k, tol)?;
    let critical = critical_distances(f, region, tol)?;
    order_statistic(&critical, k).ok_or(AglError::InsufficientCriticalPoints {
        found: critical.len(),
        required: k.saturating_sub(1),
    })
}

/// `k` zeros uniform in K, then `n − k` points uniform in the disk of radius
/// `spread` about the centroid of K, each a pole with probability `pole_fraction`.
pub fn random_instance(
    n: usize,
    k: usize,
    region: &ConvexRegion,
    pole_fraction: f64,
    spread: f64,
    seed: u64,
) -> Result<RationalFunction> {
    if k > n {
        return Err(AglError::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    if !(0.0..=1.0).contains(&pole_fraction) || !(spread > 0.0) {
        return Err(AglError::InvalidArgument(
            "pole_fraction must lie in [0, 1] and spread must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zeros: Vec<Complex> = (0..k).map(|_| region.sample_uniform(&mut rng)).collect();
    let mut poles = Vec::new();
    let center = region.centroid();
    for _ in k..n {
        let r = spread * rng.random::<f64>().sqrt();
        let z = center + Complex::from_polar(r, TAU * rng.random::<f64>());
        if rng.random::<f64>() < pole_fraction {
            poles.push(z);
        } else {
            zeros.push(z);
        }
    }
    Ok(RationalFunction::from_points(zeros, poles))
}
