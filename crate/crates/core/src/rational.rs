//! Complex polynomials and rational functions stored by their zeros and poles.
//!
//! Coefficients are only materialized when a polynomial root finder needs
//! them. Critical points are found from the partial-fraction form of `f'/f`
//! instead, which stays well conditioned at high degree.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AglError, Result};

pub type Complex = Complex64;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Numerical tolerances shared by the whole pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Per-root correction below which Aberth iteration stops.
    pub root_tol: f64,
    /// Points closer than this are treated as one point with multiplicity.
    pub cluster_tol: f64,
    /// Slack added to `d(z, K) <= eps` membership tests.
    pub membership_tol: f64,
    /// Allowed deviation of contour samples from their nominal offset.
    pub contour_tol: f64,
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root_tol: 1e-12,
            cluster_tol: 1e-9,
            membership_tol: 1e-9,
            contour_tol: 1e-9,
            max_iterations: 200,
        }
    }
}

/// Dense polynomial, coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<Complex>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex) -> Self {
        Self::new(vec![c])
    }

    /// Monic polynomial `∏ (z − r)`.
    pub fn from_roots(roots: &[Complex]) -> Self {
        let mut coeffs = vec![Complex::new(1.0, 0.0)];
        for &r in roots {
            coeffs.push(Complex::new(0.0, 0.0));
            for i in (1..coeffs.len()).rev() {
                let lower = coeffs[i - 1];
                coeffs[i] = lower - r * coeffs[i];
            }
            coeffs[0] *= -r;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn eval(&self, z: Complex) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `Σ |cᵢ| rⁱ`, the scale that bounds rounding error of `eval` at `|z| = r`.
    pub fn abs_eval(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    fn eval_with_derivative(&self, z: Complex) -> (Complex, Complex) {
        let zero = Complex::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at `anchor`.
    pub fn integral_from(&self, anchor: Complex) -> Self {
        let mut coeffs = vec![Complex::new(0.0, 0.0)];
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| c / (i + 1) as f64),
        );
        let mut p = Self::new(coeffs);
        let offset = p.eval(anchor);
        if !p.coeffs.is_empty() {
            p.coeffs[0] -= offset;
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.sub(&other.scaled(Complex::new(-1.0, 0.0)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex::new(0.0, 0.0);
        Self::new(
            (0..len)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(zero)
                        - other.coeffs.get(i).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn scaled(&self, s: Complex) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Synthetic division by `(z − root)`, remainder dropped.
    pub fn deflate(&self, root: Complex) -> Self {
        let Some(deg) = self.degree() else {
            return Self::zero();
        };
        if deg == 0 {
            return Self::zero();
        }
        let mut q = vec![Complex::new(0.0, 0.0); deg];
        let mut carry = Complex::new(0.0, 0.0);
        for i in (0..deg).rev() {
            carry = carry * root + self.coeffs[i + 1];
            q[i] = carry;
        }
        Self::new(q)
    }

    /// Drops leading coefficients that are negligible next to the largest one.
    /// Exact cancellation of leading terms in `P'Q − PQ'` leaves such residue.
    pub fn trim_negligible(mut self, rel: f64) -> Self {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while self.coeffs.len() > 1 && self.leading().norm() <= rel * max {
            self.coeffs.pop();
        }
        self
    }

    pub fn roots(&self) -> Result<RootSet> {
        self.roots_with(&Tolerances::default())
    }

    /// Aberth–Ehrlich simultaneous iteration.
    pub fn roots_with(&self, tol: &Tolerances) -> Result<RootSet> {
        let Some(deg) = self.degree() else {
            return Err(AglError::ZeroPolynomial);
        };
        // exact zeros at the origin are split off first
        let shift = self.coeffs.iter().take_while(|c| c.norm() == 0.0).count();
        let reduced = Self::new(self.coeffs[shift..].to_vec());
        let mut points = vec![Complex::new(0.0, 0.0); shift];
        if deg > shift {
            points.extend(aberth(&reduced, tol)?);
        }
        points = merge_unresolved_clusters(&reduced, points, shift);
        let mut residual = 0.0f64;
        let mut scale = 0.0f64;
        for &z in &points {
            residual = residual.max(self.eval(z).norm());
            scale = scale.max(self.abs_eval(z.norm()));
        }
        Ok(RootSet {
            points,
            residual,
            scale,
        })
    }
}

fn aberth(p: &Polynomial, tol: &Tolerances) -> Result<Vec<Complex>> {
    let deg = p.degree().unwrap_or(0);
    let lead = p.leading();
    let monic = p.scaled(lead.inv());
    let radius = 1.0
        + monic.coeffs[..deg]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let mut z: Vec<Complex> = (0..deg)
        .map(|j| Complex::from_polar(radius, GOLDEN_ANGLE * j as f64 + 0.5))
        .collect();
    if deg == 1 {
        return Ok(vec![-monic.coeffs[0]]);
    }
    let mut done = vec![false; deg];
    let mut max_correction = f64::INFINITY;
    for _ in 0..tol.max_iterations {
        max_correction = 0.0;
        for i in 0..deg {
            if done[i] {
                continue;
            }
            let (pv, dp) = monic.eval_with_derivative(z[i]);
            let noise = 8.0 * f64::EPSILON * monic.abs_eval(z[i].norm());
            if pv.norm() <= noise {
                done[i] = true;
                continue;
            }
            let ratio = pv / dp;
            let repulsion: Complex = (0..deg)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                // coincident iterates: nudge apart and keep going
                z[i] += Complex::new(1e-8, 1e-8) * radius;
                max_correction = f64::INFINITY;
                continue;
            }
            z[i] -= step;
            let size = step.norm();
            max_correction = max_correction.max(size);
            if size <= tol.root_tol * z[i].norm().max(1.0) {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    Err(AglError::NonConvergence {
        iterations: tol.max_iterations,
        max_correction,
    })
}

/// Roots whose Weierstrass inclusion disks overlap cannot be told apart in
/// double precision; each such cluster is replaced by copies of its mean,
/// which stays accurate even when the individual members do not.
fn merge_unresolved_clusters(p: &Polynomial, mut points: Vec<Complex>, skip: usize) -> Vec<Complex> {
    let m = points.len() - skip;
    if m < 2 {
        return points;
    }
    let roots = &points[skip..];
    let lead = p.leading().norm();
    let radii: Vec<f64> = (0..m)
        .map(|i| {
            let z = roots[i];
            let slack = p.eval(z).norm() + 4.0 * f64::EPSILON * p.abs_eval(z.norm());
            let denom: f64 = lead
                * (0..m)
                    .filter(|&j| j != i)
                    .map(|j| (z - roots[j]).norm())
                    .product::<f64>();
            if denom == 0.0 {
                f64::INFINITY
            } else {
                m as f64 * slack / denom
            }
        })
        .collect();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if (roots[i] - roots[j]).norm() <= radii[i] + radii[j] {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let labels: Vec<usize> = (0..m).map(|i| find(&mut parent, i)).collect();
    let mut merged = roots.to_vec();
    for root in 0..m {
        let members: Vec<usize> = (0..m).filter(|&i| labels[i] == root).collect();
        if members.len() < 2 {
            continue;
        }
        let mean = members.iter().map(|&i| roots[i]).sum::<Complex>() / members.len() as f64;
        let spread = members
            .iter()
            .map(|&i| (roots[i] - mean).norm())
            .fold(0.0, f64::max);
        let center = refine_cluster_center(p, mean, members.len(), spread);
        for &i in &members {
            merged[i] = center;
        }
    }
    points.truncate(skip);
    points.extend(merged);
    points
}

/// An m-fold cluster of roots of `p` surrounds a simple root of `p^(m−1)`;
/// Newton on that derivative pins the cluster centre far below the spread of
/// the individual iterates.
fn refine_cluster_center(p: &Polynomial, mean: Complex, m: usize, spread: f64) -> Complex {
    let mut d = p.clone();
    for _ in 1..m {
        d = d.derivative();
    }
    let dd = d.derivative();
    let mut c = mean;
    for _ in 0..30 {
        let step = d.eval(c) / dd.eval(c);
        if !step.is_finite() {
            return mean;
        }
        c -= step;
        if step.norm() <= 4.0 * f64::EPSILON * c.norm().max(1.0) {
            break;
        }
    }
    if (c - mean).norm() <= 2.0 * spread + 1e-12 {
        c
    } else {
        mean
    }
}

/// Roots with multiplicity, plus the largest `|p(root)|` seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub points: Vec<Complex>,
    pub residual: f64,
    /// Largest `Σ |cᵢ| |root|ⁱ` over the returned roots.
    pub scale: f64,
}

impl RootSet {
    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            residual: 0.0,
            scale: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The backward-error bound `residual <= root_tol · scale`.
    pub fn within_tolerance(&self, tol: &Tolerances) -> bool {
        self.residual <= tol.root_tol * self.scale.max(f64::MIN_POSITIVE)
    }
}

/// A rational function `scale · ∏(z − zeros) / ∏(z − poles)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    pub zeros: Vec<Complex>,
    pub poles: Vec<Complex>,
    pub scale: Complex,
}

impl RationalFunction {
    /// Monic construction reduced to lowest form with the default cluster tolerance.
    pub fn from_points(zeros: Vec<Complex>, poles: Vec<Complex>) -> Self {
        Self::new(zeros, poles, Complex::new(1.0, 0.0), Tolerances::default().cluster_tol)
    }

    pub fn new(zeros: Vec<Complex>, poles: Vec<Complex>, scale: Complex, cluster_tol: f64) -> Self {
        let mut f = Self {
            zeros,
            poles,
            scale,
        };
        f.reduce(cluster_tol);
        f
    }

    pub fn polynomial(zeros: Vec<Complex>) -> Self {
        Self::from_points(zeros, Vec::new())
    }

    pub fn constant(c: Complex) -> Self {
        Self {
            zeros: Vec::new(),
            poles: Vec::new(),
            scale: c,
        }
    }

    /// Cancels zero/pole pairs closer than `cluster_tol`.
    fn reduce(&mut self, cluster_tol: f64) {
        let mut kept_poles = Vec::with_capacity(self.poles.len());
        for &p in &self.poles {
            if let Some(idx) = self
                .zeros
                .iter()
                .position(|&z| (z - p).norm() <= cluster_tol)
            {
                self.zeros.swap_remove(idx);
            } else {
                kept_poles.push(p);
            }
        }
        self.poles = kept_poles;
    }

    pub fn total_count(&self) -> usize {
        self.zeros.len() + self.poles.len()
    }

    pub fn is_polynomial(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn numerator(&self) -> Polynomial {
        Polynomial::from_roots(&self.zeros).scaled(self.scale)
    }

    pub fn denominator(&self) -> Polynomial {
        Polynomial::from_roots(&self.poles)
    }

    pub fn eval(&self, z: Complex) -> Complex {
        let num: Complex = self.zeros.iter().map(|&a| z - a).product();
        let den: Complex = self.poles.iter().map(|&b| z - b).product();
        self.scale * num / den
    }

    /// `f'(z)/f(z) = Σ 1/(z − zero) − Σ 1/(z − pole)`.
    pub fn log_derivative_at(&self, z: Complex) -> Complex {
        let zs: Complex = self.zeros.iter().map(|&a| (z - a).inv()).sum();
        let ps: Complex = self.poles.iter().map(|&b| (z - b).inv()).sum();
        zs - ps
    }

    /// Derivative of [`Self::log_derivative_at`].
    pub fn log_derivative_slope_at(&self, z: Complex) -> Complex {
        let zs: Complex = self.zeros.iter().map(|&a| (z - a).powi(-2)).sum();
        let ps: Complex = self.poles.iter().map(|&b| (z - b).powi(-2)).sum();
        ps - zs
    }

    pub fn scale_by(&self, c: Complex) -> Self {
        Self {
            zeros: self.zeros.iter().map(|&z| z * c).collect(),
            poles: self.poles.iter().map(|&z| z * c).collect(),
            scale: self.scale,
        }
    }

    pub fn critical_points(&self) -> Result<RootSet> {
        critical_points(self, &Tolerances::default())
    }
}

/// Groups points lying within `tol` of a running representative.
pub fn group_points(points: &[Complex], tol: f64) -> Vec<(Complex, usize)> {
    let mut groups: Vec<(Complex, usize)> = Vec::new();
    for &p in points {
        match groups.iter_mut().find(|(c, _)| (*c - p).norm() <= tol) {
            Some(g) => g.1 += 1,
            None => groups.push((p, 1)),
        }
    }
    groups
}

pub fn poly_eval(p: &Polynomial, z: Complex) -> Complex {
    p.eval(z)
}

pub fn poly_derivative(p: &Polynomial) -> Polynomial {
    p.derivative()
}

pub fn poly_roots(p: &Polynomial, tol: &Tolerances) -> Result<RootSet> {
    p.roots_with(tol)
}

/// Finite critical points of `f` with multiplicity.
///
/// They are the zeros of `M = L·∏(z − xᵢ)` with `L = f'/f = Σ wᵢ/(z − xᵢ)`
/// over the distinct zeros and poles, plus `m − 1` copies of each zero of
/// multiplicity `m`. Aberth iteration runs on `M` through `M'/M = L'/L +
/// Σ 1/(z − xᵢ)`, so no coefficients are ever formed; coefficient expansion
/// is hopeless for, say, eighty zeros packed in `[0, 1]`.
pub fn critical_points(f: &RationalFunction, tol: &Tolerances) -> Result<RootSet> {
    let (field, known) = PartialFractions::from_function(f, tol);
    let mut roots = field.zeros(tol)?;
    roots.points.extend(known);
    Ok(roots)
}

/// `L(z) = Σ wᵢ/(z − xᵢ)` over distinct points, `wᵢ` the signed multiplicity.
struct PartialFractions {
    points: Vec<Complex>,
    weights: Vec<f64>,
}

impl PartialFractions {
    /// Also returns the multiple zeros, which are critical points in their own right.
    fn from_function(f: &RationalFunction, tol: &Tolerances) -> (Self, Vec<Complex>) {
        let mut groups: Vec<(Complex, f64)> = group_points(&f.zeros, tol.cluster_tol)
            .into_iter()
            .map(|(z, m)| (z, m as f64))
            .collect();
        for (b, m) in group_points(&f.poles, tol.cluster_tol) {
            match groups.iter_mut().find(|(z, _)| (*z - b).norm() <= tol.cluster_tol) {
                Some(g) => g.1 -= m as f64,
                None => groups.push((b, -(m as f64))),
            }
        }
        groups.retain(|&(_, w)| w != 0.0);
        let mut known = Vec::new();
        for &(z, w) in &groups {
            for _ in 1..(w.max(0.0) as usize) {
                known.push(z);
            }
        }
        let (points, weights) = groups.into_iter().unzip();
        (Self { points, weights }, known)
    }

    fn origin(&self) -> Complex {
        self.points.iter().sum::<Complex>() / self.points.len().max(1) as f64
    }

    /// `Σ wᵢ/(z − xᵢ)^(j+1)`.
    fn moment_sum(&self, z: Complex, j: i32) -> Complex {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (z - x).powi(-(j + 1)) * w)
            .sum()
    }

    fn abs_sum(&self, z: Complex) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w.abs() / (z - x).norm())
            .sum()
    }

    /// Degree of `M` and its leading coefficient, read off the moments
    /// `Σ wᵢ (xᵢ − c)ᵏ` of the expansion `L = Σₖ μₖ (z − c)^(−k−1)`.
    fn numerator_degree(&self) -> (usize, Complex, Complex) {
        let d = self.points.len();
        let c = self.origin();
        let mut prev = None;
        for k in 0..d.saturating_sub(1) {
            let mut mu = Complex::new(0.0, 0.0);
            let mut size = 0.0;
            for (&x, &w) in self.points.iter().zip(&self.weights) {
                let t = (x - c).powi(k as i32) * w;
                mu += t;
                size += t.norm();
            }
            if let Some(lead) = prev {
                return (d - k, lead, mu);
            }
            if mu.norm() > 1e-13 * size {
                prev = Some(mu);
            }
        }
        match prev {
            Some(lead) => (1, lead, Complex::new(0.0, 0.0)),
            None => (0, Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)),
        }
    }

    fn zeros(&self, tol: &Tolerances) -> Result<RootSet> {
        let (deg, lead, next) = self.numerator_degree();
        if deg == 0 {
            return Ok(RootSet::empty());
        }
        let c = self.origin();
        let spread = self.points.iter().map(|&x| (x - c).norm()).fold(0.0, f64::max);
        let radius = 1.2 * spread.max((next / lead).norm()).max(f64::MIN_POSITIVE.sqrt());
        let mut z = self.initial_guesses(deg, radius);
        let mut done = vec![false; deg];
        let mut max_correction = f64::INFINITY;
        let mut converged = false;
        for _ in 0..tol.max_iterations {
            max_correction = 0.0;
            for i in 0..deg {
                if done[i] {
                    continue;
                }
                let l = self.moment_sum(z[i], 0);
                if l.norm() <= 8.0 * f64::EPSILON * self.abs_sum(z[i]) {
                    done[i] = true;
                    continue;
                }
                let slope = -self.moment_sum(z[i], 1);
                let shift: Complex = self.points.iter().map(|&x| (z[i] - x).inv()).sum();
                let ratio = (slope / l + shift).inv();
                let repulsion: Complex = (0..deg).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
                let step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
                if !step.is_finite() {
                    z[i] += Complex::new(1e-8, 1e-8) * radius;
                    max_correction = f64::INFINITY;
                    continue;
                }
                z[i] -= step;
                let size = step.norm();
                max_correction = max_correction.max(size);
                if size <= tol.root_tol * z[i].norm().max(1.0) {
                    done[i] = true;
                }
            }
            if done.iter().all(|&d| d) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(AglError::NonConvergence {
                iterations: tol.max_iterations,
                max_correction,
            });
        }
        let z = self.merge_clusters(z, lead);
        let mut residual = 0.0f64;
        let mut scale = 0.0f64;
        for &p in &z {
            residual = residual.max(self.moment_sum(p, 0).norm());
            scale = scale.max(self.abs_sum(p));
        }
        Ok(RootSet {
            points: z,
            residual,
            scale,
        })
    }

    /// One start beside each point, the most isolated points left out. A
    /// group of m nearby points holds about m − 1 zeros of `L`, so this puts
    /// the starts on the right scale even when the points span several.
    fn initial_guesses(&self, deg: usize, radius: f64) -> Vec<Complex> {
        let d = self.points.len();
        if d < 2 || deg > d {
            let c = self.origin();
            return (0..deg).map(|j| c + Complex::from_polar(radius, GOLDEN_ANGLE * j as f64 + 0.5)).collect();
        }
        let nearest: Vec<f64> = (0..d)
            .map(|i| {
                (0..d)
                    .filter(|&j| j != i)
                    .map(|j| (self.points[i] - self.points[j]).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| nearest[a].total_cmp(&nearest[b]));
        order
            .into_iter()
            .take(deg)
            .enumerate()
            .map(|(j, i)| self.points[i] + Complex::from_polar(0.3 * nearest[i], GOLDEN_ANGLE * j as f64 + 0.5))
            .collect()
    }

    /// Same inclusion-disk merging as for polynomial roots, with `M(zᵢ)`
    /// evaluated as `L(zᵢ)·∏(zᵢ − xⱼ)` in logarithms.
    fn merge_clusters(&self, roots: Vec<Complex>, lead: Complex) -> Vec<Complex> {
        let m = roots.len();
        if m < 2 {
            return roots;
        }
        let log_lead = lead.norm().ln();
        let radii: Vec<f64> = (0..m)
            .map(|i| {
                let z = roots[i];
                let slack = self.moment_sum(z, 0).norm() + 4.0 * f64::EPSILON * self.abs_sum(z);
                let log_num: f64 = slack.ln() + self.points.iter().map(|&x| (z - x).norm().ln()).sum::<f64>();
                let log_den: f64 = log_lead + (0..m).filter(|&j| j != i).map(|j| (z - roots[j]).norm().ln()).sum::<f64>();
                let r = (m as f64).ln() + log_num - log_den;
                if r.is_nan() { f64::INFINITY } else { r.exp() }
            })
            .collect();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(parent: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while parent[r] != r {
                r = parent[r];
            }
            parent[i] = r;
            r
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if (roots[i] - roots[j]).norm() <= radii[i] + radii[j] {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        // Inclusion disks link the members of a high-multiplicity ring only
        // intermittently. Any q roots lying within the pseudozero radius
        // ρ·(D·eps)^(1/q) of their mean form one cluster as well.
        let mean_of = |g: &[usize]| g.iter().map(|&i| roots[i]).sum::<Complex>() / g.len() as f64;
        for seed in 0..m {
            for q in (2..=m).rev() {
                let reach = self.pseudozero_radius(roots[seed], q);
                let near: Vec<usize> = (0..m).filter(|&j| (roots[j] - roots[seed]).norm() <= 2.0 * reach).collect();
                if near.len() < q {
                    continue;
                }
                let center = mean_of(&near);
                let radius = self.pseudozero_radius(center, near.len());
                if near.iter().all(|&j| (roots[j] - center).norm() <= radius) {
                    for &j in &near[1..] {
                        let (a, b) = (find(&mut parent, near[0]), find(&mut parent, j));
                        parent[a] = b;
                    }
                    break;
                }
            }
        }
        let labels: Vec<usize> = (0..m).map(|i| find(&mut parent, i)).collect();
        let groups: Vec<Vec<usize>> = (0..m)
            .map(|root| (0..m).filter(|&i| labels[i] == root).collect::<Vec<_>>())
            .filter(|g| !g.is_empty())
            .collect();
        let mut merged = roots.clone();
        for members in groups.iter().filter(|g| g.len() > 1) {
            let mean = mean_of(members);
            let spread = members.iter().map(|&i| (roots[i] - mean).norm()).fold(0.0, f64::max);
            let center = self.refine_cluster_center(mean, members.len(), spread);
            for &i in members {
                merged[i] = center;
            }
        }
        merged
    }

    fn pseudozero_radius(&self, center: Complex, m: usize) -> f64 {
        let nearest = self.points.iter().map(|&x| (center - x).norm()).fold(f64::INFINITY, f64::min);
        2.0 * nearest * (self.points.len() as f64 * f64::EPSILON).powf(1.0 / m as f64)
    }

    /// Newton on `L^(m−1)`, which has a simple zero inside an m-fold cluster:
    /// the step is `−S_{m−1} / (m·S_m)` with `S_j = Σ wᵢ/(z − xᵢ)^(j+1)`.
    fn refine_cluster_center(&self, mean: Complex, m: usize, spread: f64) -> Complex {
        let j = (m - 1) as i32;
        let mut c = mean;
        for _ in 0..30 {
            let step = -self.moment_sum(c, j) / (self.moment_sum(c, j + 1) * m as f64);
            if !step.is_finite() {
                return mean;
            }
            c -= step;
            if step.norm() <= 4.0 * f64::EPSILON * c.norm().max(1.0) {
                break;
            }
        }
        if (c - mean).norm() <= 2.0 * spread + 1e-12 {
            c
        } else {
            mean
        }
    }
}

/// `f'/f` as a rational function: zeros are the critical points of `f`,
/// poles are the zeros and poles of `f`. A constant `f` gives scale zero.
pub fn log_derivative(f: &RationalFunction, tol: &Tolerances) -> Result<RationalFunction> {
    for group in [&f.zeros, &f.poles] {
        if let Some(&(point, _)) = group_points(group, tol.cluster_tol)
            .iter()
            .find(|(_, m)| *m > 1)
        {
            return Err(AglError::MultiplicityViolation { point });
        }
    }
    let all: Vec<(Complex, f64)> = f
        .zeros
        .iter()
        .map(|&z| (z, 1.0))
        .chain(f.poles.iter().map(|&p| (p, -1.0)))
        .collect();
    if let Some(&(point, _)) = all.iter().enumerate().find_map(|(i, a)| {
        all[i + 1..]
            .iter()
            .any(|b| (a.0 - b.0).norm() <= tol.cluster_tol)
            .then_some(a)
    }) {
        return Err(AglError::MultiplicityViolation { point });
    }
    let mut numerator = Polynomial::zero();
    for (i, &(_, sign)) in all.iter().enumerate() {
        let others: Vec<Complex> = all
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &(x, _))| x)
            .collect();
        let term = Polynomial::from_roots(&others).scaled(Complex::new(sign, 0.0));
        numerator = numerator.add(&term);
    }
    let numerator = numerator.trim_negligible(1e-13);
    let poles: Vec<Complex> = all.iter().map(|&(x, _)| x).collect();
    let (zeros, scale) = match numerator.degree() {
        None => (Vec::new(), Complex::new(0.0, 0.0)),
        Some(0) => (Vec::new(), numerator.leading()),
        Some(_) => (numerator.roots_with(tol)?.points, numerator.leading()),
    };
    Ok(RationalFunction {
        zeros,
        poles,
        scale,
    })
}

pub fn rational_product(a: &RationalFunction, b: &RationalFunction, tol: &Tolerances) -> RationalFunction {
    let zeros = a.zeros.iter().chain(&b.zeros).copied().collect();
    let poles = a.poles.iter().chain(&b.poles).copied().collect();
    RationalFunction::new(zeros, poles, a.scale * b.scale, tol.cluster_tol)
}

/// Greedy nearest-neighbour matching of two multisets.
pub fn multiset_eq(a: &[Complex], b: &[Complex], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for &x in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|(_, p), (_, q)| (**p - x).norm().total_cmp(&(**q - x).norm()));
        match best {
            Some((j, &y)) if (y - x).norm() <= tol => used[j] = true,
            _ => return false,
        }
    }
    true
}
