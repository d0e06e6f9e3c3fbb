//! Constructive Rouché certificate for critical points near K.
//!
//! `f` is split as `g·h` with `g` carrying the zeros in K. On a contour γ at
//! constant distance `d ∈ (ε/2, ε)` from K that avoids small balls around the
//! zeros and poles of `h`, the certifier checks `|g'/g| > |h'/h|` sample by
//! sample, then evaluates the argument-principle integral of
//! `F = (gh)'/(gh)` around γ. The number of critical points of `gh` enclosed
//! is that integer plus the zeros and poles of `gh` enclosed, all of which
//! are known from the point data. No critical point is ever root-found here.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::count_in;
use crate::error::{AglError, Result};
use crate::rational::{Complex, RationalFunction, Tolerances};
use crate::region::{ConvexRegion, OffsetContour};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Complex,
    pub radius: f64,
}

/// Closed balls of a common radius `ε/(8(n−k))` around the zeros and poles of `h`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExclusionSet {
    pub balls: Vec<Ball>,
}

impl ExclusionSet {
    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn contains(&self, z: Complex) -> bool {
        self.balls.iter().any(|b| (z - b.center).norm() <= b.radius)
    }

    /// Diameters of the connected components of the union of balls.
    pub fn component_diameters(&self) -> Vec<f64> {
        let n = self.balls.len();
        let mut label: Vec<usize> = (0..n).collect();
        fn root(label: &mut [usize], mut i: usize) -> usize {
            while label[i] != i {
                label[i] = label[label[i]];
                i = label[i];
            }
            i
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (self.balls[i], self.balls[j]);
                if (a.center - b.center).norm() <= a.radius + b.radius {
                    let (ri, rj) = (root(&mut label, i), root(&mut label, j));
                    label[ri] = rj;
                }
            }
        }
        let roots: Vec<usize> = (0..n).map(|i| root(&mut label, i)).collect();
        let mut out = Vec::new();
        for r in 0..n {
            let members: Vec<Ball> = (0..n).filter(|&i| roots[i] == r).map(|i| self.balls[i]).collect();
            if members.is_empty() {
                continue;
            }
            let mut diam = 0.0f64;
            for a in &members {
                for b in &members {
                    diam = diam.max((a.center - b.center).norm() + a.radius + b.radius);
                }
            }
            out.push(diam);
        }
        out
    }
}

/// `g` gets the zeros of `f` in K (monic), `h` gets the rest and the scale.
pub fn split_instance(f: &RationalFunction, region: &ConvexRegion, tol: &Tolerances) -> (RationalFunction, RationalFunction) {
    let (inside, outside): (Vec<Complex>, Vec<Complex>) = f
        .zeros
        .iter()
        .partition(|&&z| region.in_neighborhood(z, 0.0, tol.membership_tol));
    let g = RationalFunction {
        zeros: inside,
        poles: Vec::new(),
        scale: Complex::new(1.0, 0.0),
    };
    let h = RationalFunction {
        zeros: outside,
        poles: f.poles.clone(),
        scale: f.scale,
    };
    (g, h)
}

/// Moves every point that sits within `cluster_tol` of an earlier one by a
/// random offset of length at most `delta`.
fn separate(groups: &mut [&mut Vec<Complex>], delta: f64, seed: u64, tol: &Tolerances) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<Complex> = Vec::new();
    for group in groups.iter_mut() {
        for z in group.iter_mut() {
            let original = *z;
            let mut tries = 0;
            while placed.iter().any(|p| (*p - *z).norm() <= tol.cluster_tol) {
                let r = delta * rng.random::<f64>().sqrt();
                *z = original + Complex::from_polar(r, TAU * rng.random::<f64>());
                tries += 1;
                if tries > 1000 {
                    break;
                }
            }
            placed.push(*z);
        }
    }
}

pub fn perturb_to_simple(f: &RationalFunction, delta: f64, seed: u64, tol: &Tolerances) -> RationalFunction {
    let mut zeros = f.zeros.clone();
    let mut poles = f.poles.clone();
    separate(&mut [&mut zeros, &mut poles], delta, seed, tol);
    RationalFunction {
        zeros,
        poles,
        scale: f.scale,
    }
}

/// Joint version for the factors of `f = g·h`, so no point of `g` collides with one of `h`.
pub fn perturb_factors(
    g: &RationalFunction,
    h: &RationalFunction,
    delta: f64,
    seed: u64,
    tol: &Tolerances,
) -> (RationalFunction, RationalFunction) {
    let mut gz = g.zeros.clone();
    let mut gp = g.poles.clone();
    let mut hz = h.zeros.clone();
    let mut hp = h.poles.clone();
    separate(&mut [&mut gz, &mut gp, &mut hz, &mut hp], delta, seed, tol);
    (
        RationalFunction { zeros: gz, poles: gp, scale: g.scale },
        RationalFunction { zeros: hz, poles: hp, scale: h.scale },
    )
}

pub fn exclusion_set(h: &RationalFunction, eps: f64, n_minus_k: usize) -> ExclusionSet {
    if h.total_count() == 0 || n_minus_k == 0 {
        return ExclusionSet::default();
    }
    let radius = eps / (8.0 * n_minus_k as f64);
    ExclusionSet {
        balls: h
            .zeros
            .iter()
            .chain(&h.poles)
            .map(|&center| Ball { center, radius })
            .collect(),
    }
}

pub const CANDIDATE_OFFSETS: usize = 9;

/// Candidate offsets evenly spaced in `[ε/2 + ε/20, ε − ε/20]`, midline first.
pub fn candidate_offsets(eps: f64) -> Vec<f64> {
    let clearance = eps / 20.0;
    let (lo, hi) = (eps / 2.0 + clearance, eps - clearance);
    let mid = CANDIDATE_OFFSETS / 2;
    let at = |j: usize| lo + (hi - lo) * j as f64 / (CANDIDATE_OFFSETS - 1) as f64;
    let mut out = vec![at(mid)];
    for step in 1..=mid {
        out.push(at(mid - step));
        if mid + step < CANDIDATE_OFFSETS {
            out.push(at(mid + step));
        }
    }
    out
}

/// A ball of radius r clears the level curve `{d(z,K) = d}` by at least r
/// when `|d(c,K) − d| ≥ 2r`; that test is exact in the offset geometry, so
/// no sample spacing can let a ball slip between samples.
fn offset_clears(region: &ConvexRegion, d: f64, excl: &ExclusionSet) -> bool {
    excl.balls
        .iter()
        .all(|b| (region.dist(b.center) - d).abs() >= 2.0 * b.radius)
}

pub fn find_contour(region: &ConvexRegion, eps: f64, excl: &ExclusionSet, min_samples: usize) -> Result<Option<OffsetContour>> {
    if !(eps > 0.0) {
        return Err(AglError::InvalidArgument(format!("eps {eps} must be positive")));
    }
    for d in candidate_offsets(eps) {
        if offset_clears(region, d, excl) {
            return region.offset_contour(d, min_samples).map(Some);
        }
    }
    Ok(None)
}

fn check_clear(f: &RationalFunction, z: Complex, tol: &Tolerances) -> Result<()> {
    if f.zeros.iter().chain(&f.poles).any(|&p| (p - z).norm() <= tol.cluster_tol) {
        return Err(AglError::SampleAtSingularity { sample: z });
    }
    Ok(())
}

/// `min_z |g'/g| − |h'/h|` over the contour samples.
pub fn rouche_margin(g: &RationalFunction, h: &RationalFunction, contour: &OffsetContour, tol: &Tolerances) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for &z in &contour.samples {
        check_clear(g, z, tol)?;
        check_clear(h, z, tol)?;
        let value = g.log_derivative_at(z).norm() - h.log_derivative_at(z).norm();
        margin = margin.min(value);
    }
    Ok(margin)
}

/// Something whose logarithmic derivative `F'/F` can be sampled.
pub trait ArgumentIntegrand {
    fn dlog(&self, z: Complex) -> Complex;
    /// Fails when a known singularity of `F'/F` is too close to `z`.
    fn check_sample(&self, z: Complex, tol: &Tolerances) -> Result<()>;
}

impl ArgumentIntegrand for RationalFunction {
    fn dlog(&self, z: Complex) -> Complex {
        self.log_derivative_at(z)
    }

    fn check_sample(&self, z: Complex, tol: &Tolerances) -> Result<()> {
        check_clear(self, z, tol)
    }
}

/// `F = f'/f` evaluated from the point data of `f`; `F'/F = L'/L` with
/// `L = Σ 1/(z−a) − Σ 1/(z−b)`.
#[derive(Debug, Clone, Copy)]
pub struct LogDerivativeOf<'a>(pub &'a RationalFunction);

impl ArgumentIntegrand for LogDerivativeOf<'_> {
    fn dlog(&self, z: Complex) -> Complex {
        self.0.log_derivative_slope_at(z) / self.0.log_derivative_at(z)
    }

    fn check_sample(&self, z: Complex, tol: &Tolerances) -> Result<()> {
        check_clear(self.0, z, tol)
    }
}

pub const MAX_WINDING_SAMPLES: usize = 1 << 18;

/// `(1/2πi) ∮ F'/F dz` by the trapezoidal rule on the sampled polygon.
pub fn winding_integral<F: ArgumentIntegrand + ?Sized>(integrand: &F, samples: &[Complex]) -> Complex {
    let n = samples.len();
    let values: Vec<Complex> = samples.iter().map(|&z| integrand.dlog(z)).collect();
    let sum: Complex = (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            (values[i] + values[j]) * 0.5 * (samples[j] - samples[i])
        })
        .sum();
    sum / Complex::new(0.0, TAU)
}

/// Zeros minus poles of `F` enclosed, with adaptive doubling of the sample
/// count until two successive refinements round to the same integer within 0.1.
pub fn winding_count<F: ArgumentIntegrand + ?Sized>(integrand: &F, contour: &OffsetContour, tol: &Tolerances) -> Result<i64> {
    for &z in &contour.samples {
        integrand.check_sample(z, tol)?;
    }
    let mut current = contour.clone();
    let mut previous: Option<i64> = None;
    loop {
        let value = winding_integral(integrand, &current.samples);
        let rounded = value.re.round();
        let close = value.is_finite() && (value.re - rounded).abs() < 0.1 && value.im.abs() < 0.1;
        if close && previous == Some(rounded as i64) {
            return Ok(rounded as i64);
        }
        previous = close.then_some(rounded as i64);
        let next = current.len() * 2;
        if next > MAX_WINDING_SAMPLES {
            return Err(AglError::NonIntegerWinding {
                value: value.re,
                samples: current.len(),
            });
        }
        current = current.refined(next)?;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub min_samples: usize,
    pub margin_floor: f64,
    pub perturb_delta: f64,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            min_samples: 256,
            margin_floor: 1e-8,
            perturb_delta: 1e-7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateFailure {
    ContourNotFound,
    MarginNonPositive,
    NonIntegerWinding,
    SampleAtSingularity,
    ContourBoundaryConflict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoucheCertificate {
    pub eps: f64,
    pub k: usize,
    pub offset_distance: Option<f64>,
    pub sample_count: usize,
    pub margin: Option<f64>,
    pub winding: Option<i64>,
    pub zeros_inside: usize,
    pub poles_inside: usize,
    pub zeros_poles_of_gh_inside: usize,
    pub critical_lower_bound: Option<i64>,
    pub valid: bool,
    pub failure: Option<CertificateFailure>,
    #[serde(skip)]
    pub contour: Option<OffsetContour>,
    #[serde(skip)]
    pub exclusions: ExclusionSet,
    /// The perturbed factors the certificate speaks about.
    #[serde(skip)]
    pub factors: Option<(RationalFunction, RationalFunction)>,
}

impl RoucheCertificate {
    fn failed(eps: f64, k: usize, failure: CertificateFailure) -> Self {
        Self {
            eps,
            k,
            offset_distance: None,
            sample_count: 0,
            margin: None,
            winding: None,
            zeros_inside: 0,
            poles_inside: 0,
            zeros_poles_of_gh_inside: 0,
            critical_lower_bound: None,
            valid: false,
            failure: Some(failure),
            contour: None,
            exclusions: ExclusionSet::default(),
            factors: None,
        }
    }
}

/// Runs the full pipeline. Input problems are errors; a Rouché step that does
/// not go through yields a certificate with `valid == false` and a reason.
pub fn certify(
    f: &RationalFunction,
    region: &ConvexRegion,
    eps: f64,
    k: usize,
    opts: &CertifyOptions,
    tol: &Tolerances,
) -> Result<RoucheCertificate> {
    if !(eps > 0.0) {
        return Err(AglError::InvalidArgument(format!("eps {eps} must be positive")));
    }
    let found = count_in(&f.zeros, region, 0.0, tol);
    if found < k {
        return Err(AglError::HypothesisUnmet { found, required: k });
    }
    let (g, h) = split_instance(f, region, tol);
    let (g, h) = perturb_factors(&g, &h, opts.perturb_delta, opts.seed, tol);
    let n = f.total_count();
    let exclusions = exclusion_set(&h, eps, n.saturating_sub(k));
    let mut cert = RoucheCertificate::failed(eps, k, CertificateFailure::ContourNotFound);
    cert.exclusions = exclusions.clone();
    cert.factors = Some((g.clone(), h.clone()));
    let Some(contour) = find_contour(region, eps, &exclusions, opts.min_samples)? else {
        return Ok(cert);
    };
    let d = contour.offset_distance;
    cert.offset_distance = Some(d);
    cert.sample_count = contour.len();
    cert.contour = Some(contour.clone());

    let margin = match rouche_margin(&g, &h, &contour, tol) {
        Ok(m) => m,
        Err(AglError::SampleAtSingularity { .. }) => {
            cert.failure = Some(CertificateFailure::SampleAtSingularity);
            return Ok(cert);
        }
        Err(e) => return Err(e),
    };
    cert.margin = Some(margin);
    if !(margin > opts.margin_floor) {
        cert.failure = Some(CertificateFailure::MarginNonPositive);
        return Ok(cert);
    }

    let gh = RationalFunction {
        zeros: g.zeros.iter().chain(&h.zeros).copied().collect(),
        poles: h.poles.clone(),
        scale: h.scale,
    };
    let mut inside = [0usize; 2];
    for (slot, points) in [&gh.zeros, &gh.poles].into_iter().enumerate() {
        for &p in points {
            let dp = region.dist(p);
            if (dp - d).abs() <= tol.contour_tol {
                cert.failure = Some(CertificateFailure::ContourBoundaryConflict);
                return Ok(cert);
            }
            if dp < d - tol.contour_tol {
                inside[slot] += 1;
            }
        }
    }
    cert.zeros_inside = inside[0];
    cert.poles_inside = inside[1];
    cert.zeros_poles_of_gh_inside = inside[0] + inside[1];

    let winding = match winding_count(&LogDerivativeOf(&gh), &contour, tol) {
        Ok(w) => w,
        Err(AglError::NonIntegerWinding { .. }) => {
            cert.failure = Some(CertificateFailure::NonIntegerWinding);
            return Ok(cert);
        }
        Err(AglError::SampleAtSingularity { .. }) => {
            cert.failure = Some(CertificateFailure::SampleAtSingularity);
            return Ok(cert);
        }
        Err(e) => return Err(e),
    };
    cert.winding = Some(winding);
    cert.critical_lower_bound = Some(winding + cert.zeros_poles_of_gh_inside as i64);
    cert.valid = true;
    cert.failure = None;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::theorem1_general_holds;
    use crate::engine::random_instance;
    use crate::rational::log_derivative;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn split_examples() {
        let k = ConvexRegion::unit_disk();
        let f = RationalFunction::polynomial(vec![c(0.0, 0.0), c(5.0, 0.0)]);
        let (g, h) = split_instance(&f, &k, &tol());
        assert_eq!(g.zeros, vec![c(0.0, 0.0)]);
        assert_eq!(h.zeros, vec![c(5.0, 0.0)]);

        let f = RationalFunction::from_points(vec![c(0.0, 0.0), c(0.5, 0.0)], vec![c(3.0, 0.0)]);
        let (g, h) = split_instance(&f, &k, &tol());
        assert_eq!(g.zeros, vec![c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(h.zeros.is_empty());
        assert_eq!(h.poles, vec![c(3.0, 0.0)]);

        let f = RationalFunction::polynomial(vec![c(0.1, 0.0), c(-0.2, 0.3)]);
        let (_, h) = split_instance(&f, &k, &tol());
        assert_eq!(h.total_count(), 0);
    }

    #[test]
    fn split_reassembles() {
        let k = ConvexRegion::unit_disk();
        let f = random_instance(10, 6, &k, 0.5, 3.0, 4).unwrap();
        let (g, h) = split_instance(&f, &k, &tol());
        let z = c(0.37, 2.2);
        let prod = g.eval(z) * h.eval(z);
        assert!((prod - f.eval(z)).norm() <= 1e-12 * f.eval(z).norm());
    }

    #[test]
    fn perturb_examples() {
        let t = tol();
        let f = RationalFunction::polynomial(vec![c(0.0, 0.0), c(0.0, 0.0)]);
        let p = perturb_to_simple(&f, 1e-7, 3, &t);
        assert!((p.zeros[0] - p.zeros[1]).norm() > t.cluster_tol);
        assert!(p.zeros.iter().all(|z| z.norm() <= 1e-7));

        let simple = RationalFunction::from_points(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(2.0, 0.0)]);
        assert_eq!(perturb_to_simple(&simple, 1e-7, 3, &t), simple);

        let many = RationalFunction::polynomial(vec![c(0.5, 0.5); 20]);
        let p = perturb_to_simple(&many, 1e-7, 11, &t);
        assert!(p.zeros.iter().all(|z| (z - c(0.5, 0.5)).norm() <= 1e-7));
        assert!(log_derivative(&p, &t).is_ok());
        assert_eq!(p, perturb_to_simple(&many, 1e-7, 11, &t));
    }

    #[test]
    fn exclusion_examples() {
        assert!(exclusion_set(&RationalFunction::constant(c(2.0, 0.0)), 0.8, 3).is_empty());
        let h = RationalFunction::from_points(vec![c(3.0, 0.0)], vec![c(-3.0, 0.0)]);
        let e = exclusion_set(&h, 0.8, 2);
        assert_eq!(e.balls.len(), 2);
        assert!(e.balls.iter().all(|b| (b.radius - 0.05).abs() < 1e-16));
    }

    #[test]
    fn chained_balls_span_at_most_quarter_eps() {
        let eps = 0.6;
        let gap = 5;
        let r = eps / (8.0 * gap as f64);
        let h = RationalFunction::polynomial((0..gap).map(|j| c(4.0 + 1.9 * r * j as f64, 0.0)).collect());
        let e = exclusion_set(&h, eps, gap);
        let diams = e.component_diameters();
        assert_eq!(diams.len(), 1);
        assert!(diams[0] <= eps / 4.0 + 1e-12, "{diams:?}");
    }

    #[test]
    fn contour_candidates() {
        let eps = 1.0;
        let offs = candidate_offsets(eps);
        assert_eq!(offs.len(), 9);
        assert!((offs[0] - 0.75).abs() < 1e-15);
        assert!(offs.iter().all(|&d| (0.55 - 1e-12..=0.95 + 1e-12).contains(&d)));
    }

    #[test]
    fn contour_selection() {
        let k = ConvexRegion::unit_disk();
        let eps = 0.4;
        let g = find_contour(&k, eps, &ExclusionSet::default(), 64).unwrap().unwrap();
        assert!((g.offset_distance - 0.3).abs() < 1e-15);

        let far = exclusion_set(&RationalFunction::polynomial(vec![c(10.0, 0.0)]), eps, 1);
        let g = find_contour(&k, eps, &far, 64).unwrap().unwrap();
        assert!((g.offset_distance - 0.3).abs() < 1e-15);

        let blocking = exclusion_set(&RationalFunction::polynomial(vec![c(1.3, 0.0)]), eps, 4);
        let g = find_contour(&k, eps, &blocking, 64).unwrap().unwrap();
        assert!((g.offset_distance - 0.3).abs() > 1e-6);
        for z in &g.samples {
            assert!((z - c(1.3, 0.0)).norm() >= 2.0 * blocking.balls[0].radius - 1e-12);
        }
    }

    #[test]
    fn contour_not_found_when_all_offsets_blocked() {
        let k = ConvexRegion::unit_disk();
        let eps = 0.4;
        let points: Vec<Complex> = candidate_offsets(eps).iter().map(|d| c(1.0 + d, 0.0)).collect();
        let h = RationalFunction::polynomial(points);
        let e = exclusion_set(&h, eps, 1);
        assert!(find_contour(&k, eps, &e, 64).unwrap().is_none());
    }

    #[test]
    fn margin_with_constant_h() {
        let k = ConvexRegion::unit_disk();
        let g = RationalFunction::polynomial(vec![c(0.0, 0.0); 5]);
        let h = RationalFunction::constant(c(1.0, 0.0));
        let gamma = k.offset_contour(0.5, 128).unwrap();
        let m = rouche_margin(&g, &h, &gamma, &tol()).unwrap();
        assert!((m - 5.0 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn margin_rejects_singular_samples() {
        let k = ConvexRegion::unit_disk();
        let gamma = k.offset_contour(0.5, 4).unwrap();
        let g = RationalFunction::polynomial(vec![c(0.0, 0.0)]);
        let h = RationalFunction::polynomial(vec![gamma.samples[0]]);
        assert!(matches!(
            rouche_margin(&g, &h, &gamma, &tol()),
            Err(AglError::SampleAtSingularity { .. })
        ));
    }

    #[test]
    fn winding_examples() {
        let k = ConvexRegion::disk(c(0.0, 0.0), 0.0).unwrap();
        let circle = k.offset_contour(1.0, 64).unwrap();
        let z = RationalFunction::polynomial(vec![c(0.0, 0.0)]);
        assert_eq!(winding_count(&z, &circle, &tol()).unwrap(), 1);
        let inv = RationalFunction::from_points(vec![], vec![c(0.0, 0.0)]);
        assert_eq!(winding_count(&inv, &circle, &tol()).unwrap(), -1);
        // z² − 0.01: one critical point at 0 against two simple zeros
        let q = RationalFunction::polynomial(vec![c(0.1, 0.0), c(-0.1, 0.0)]);
        assert_eq!(winding_count(&LogDerivativeOf(&q), &circle, &tol()).unwrap(), -1);
        let l = log_derivative(&q, &tol()).unwrap();
        assert_eq!(winding_count(&l, &circle, &tol()).unwrap(), -1);
    }

    #[test]
    fn winding_refines_near_singularities() {
        let k = ConvexRegion::disk(c(0.0, 0.0), 0.0).unwrap();
        let circle = k.offset_contour(1.0, 16).unwrap();
        let f = RationalFunction::polynomial(vec![c(0.999, 0.0), c(1.001, 0.0), c(0.0, 0.6)]);
        assert_eq!(winding_count(&f, &circle, &tol()).unwrap(), 2);
    }

    #[test]
    fn certify_classical_case() {
        let k = ConvexRegion::unit_disk();
        let f = random_instance(9, 9, &k, 0.0, 1.0, 5).unwrap();
        let cert = certify(&f, &k, 0.3, 9, &CertifyOptions::default(), &tol()).unwrap();
        assert!(cert.valid, "{cert:?}");
        assert_eq!(cert.winding, Some(-1));
        assert_eq!(cert.critical_lower_bound, Some(8));
    }

    #[test]
    fn certify_when_theorem_applies() {
        let k = ConvexRegion::unit_disk();
        let (n, kk, eps) = (66usize, 65usize, 40.0);
        assert!(theorem1_general_holds(n as u64, kk as u64, eps, 2.0));
        let f = random_instance(n, kk, &k, 0.5, 60.0, 9).unwrap();
        let cert = certify(&f, &k, eps, kk, &CertifyOptions::default(), &tol()).unwrap();
        assert!(cert.valid, "{cert:?}");
        assert!(cert.critical_lower_bound.unwrap() >= kk as i64 - 1);
    }

    #[test]
    fn certify_rejects_unmet_hypothesis() {
        let k = ConvexRegion::unit_disk();
        let f = RationalFunction::polynomial(vec![c(0.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(
            certify(&f, &k, 0.5, 2, &CertifyOptions::default(), &tol()),
            Err(AglError::HypothesisUnmet { found: 1, required: 2 })
        );
    }

    #[test]
    fn certify_reports_small_margin() {
        // a nearby zero outside K dominates g'/g on part of the contour
        let k = ConvexRegion::unit_disk();
        let f = RationalFunction::polynomial(vec![c(0.0, 0.0), c(1.0 + 0.75 * 0.2 + 0.05, 0.0)]);
        let cert = certify(&f, &k, 0.2, 1, &CertifyOptions::default(), &tol()).unwrap();
        assert!(!cert.valid);
        assert_eq!(cert.failure, Some(CertificateFailure::MarginNonPositive));
        assert!(cert.margin.unwrap() <= 0.0);
    }

    #[test]
    fn certificate_json_fields() {
        let k = ConvexRegion::unit_disk();
        let f = RationalFunction::polynomial(vec![c(0.2, 0.0), c(-0.3, 0.1)]);
        let cert = certify(&f, &k, 0.5, 2, &CertifyOptions::default(), &tol()).unwrap();
        let v = serde_json::to_value(&cert).unwrap();
        for key in ["offset_distance", "sample_count", "margin", "winding", "zeros_poles_of_gh_inside", "critical_lower_bound", "valid", "failure"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["failure"], serde_json::Value::Null);
    }

    #[test]
    fn winding_matches_point_count() {
        let k = ConvexRegion::polygon(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.8)]).unwrap();
        let t = tol();
        for seed in 0..30 {
            let f = random_instance(7, 3, &k, 0.4, 2.0, seed).unwrap();
            let gamma = k.offset_contour(0.3, 256).unwrap();
            let expected = f.zeros.iter().map(|&z| gamma.winds_around(z)).sum::<i64>()
                - f.poles.iter().map(|&z| gamma.winds_around(z)).sum::<i64>();
            match winding_count(&f, &gamma, &t) {
                Ok(w) => assert_eq!(w, expected, "seed {seed}"),
                Err(AglError::SampleAtSingularity { .. }) => {}
                Err(e) => panic!("seed {seed}: {e}"),
            }
        }
    }

    #[test]
    fn valid_certificates_are_sound() {
        let k = ConvexRegion::unit_disk();
        let t = tol();
        let mut checked = 0;
        for seed in 0..40 {
            let f = random_instance(8, 5, &k, 0.5, 5.0, seed).unwrap();
            let cert = certify(&f, &k, 0.6, 5, &CertifyOptions::default(), &t).unwrap();
            if !cert.valid {
                continue;
            }
            checked += 1;
            let (g, h) = cert.factors.clone().unwrap();
            let d = cert.offset_distance.unwrap();
            let gh = RationalFunction::new(
                g.zeros.iter().chain(&h.zeros).copied().collect(),
                h.poles.clone(),
                h.scale,
                t.cluster_tol,
            );
            let crit = crate::rational::critical_points(&gh, &t).unwrap();
            let enclosed = crit.points.iter().filter(|&&z| k.dist(z) < d).count() as i64;
            assert_eq!(enclosed, cert.critical_lower_bound.unwrap(), "seed {seed}");
            assert!(enclosed >= 4);
        }
        assert!(checked >= 10, "only {checked} certified");
    }

    #[test]
    fn analytic_bounds_dominate_samples() {
        let k = ConvexRegion::unit_disk();
        let s = k.diameter();
        let t = tol();
        for seed in 0..20 {
            let (n, kk, eps) = (10usize, 6usize, 0.8);
            let f = random_instance(n, kk, &k, 0.5, 6.0, seed).unwrap();
            let (g, h) = split_instance(&f, &k, &t);
            let excl = exclusion_set(&h, eps, n - kk);
            let Some(gamma) = find_contour(&k, eps, &excl, 256).unwrap() else {
                continue;
            };
            let d = gamma.offset_distance;
            let gap = (n - kk) as f64;
            for &z in &gamma.samples {
                assert!(h.log_derivative_at(z).norm() < 8.0 * gap * gap / eps);
                let gl = g.log_derivative_at(z).norm();
                assert!(gl >= g.zeros.len() as f64 / (d + s) - 1e-12);
                assert!(gl >= g.zeros.len() as f64 * d / (s + d).powi(2) - 1e-12);
            }
        }
    }

    #[test]
    fn verdict_stable_under_perturbation_seed() {
        let k = ConvexRegion::unit_disk();
        let t = tol();
        let f = RationalFunction::polynomial(vec![c(0.2, 0.1), c(0.2, 0.1), c(0.2, 0.1), c(-0.4, 0.0), c(6.0, 1.0)]);
        let verdicts: Vec<(bool, Option<i64>)> = (0..5)
            .map(|seed| {
                let opts = CertifyOptions { seed, ..CertifyOptions::default() };
                let cert = certify(&f, &k, 0.9, 4, &opts, &t).unwrap();
                (cert.valid, cert.critical_lower_bound)
            })
            .collect();
        assert!(verdicts[0].0);
        assert!(verdicts.iter().all(|v| *v == verdicts[0]), "{verdicts:?}");
    }
}
