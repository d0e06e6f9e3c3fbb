//! Experiments: extremal search for ψ₁(n, k), the bounded-outlier asymptotics
//! and the ratio probe.
//!
//! The search does not move zeros directly. Near an extremal configuration the
//! required ε behaves like `δ^(1/(n−1))` in the zero coordinates (all critical
//! points coalesce), which no derivative-free method resolves to 1e−3. Instead
//! it moves `k` anchored zeros `a₁..a_k ∈ K` and `n − k` free critical points
//! `c₁..c_{n−k}`. Writing `p' = Q·S` with `Q = ∏(t − cⱼ)` and `S` monic of
//! degree `k − 1`, the conditions `∫_{a₁}^{aᵢ} p' = 0` are linear in the
//! coefficients of `S`; its roots are the remaining critical points and
//! `p = ∫_{a₁} p'` vanishes at every anchor.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::engine::{agl_report, random_instance};
use crate::error::{AglError, Result};
use crate::rational::{Complex, Polynomial, RationalFunction, Tolerances};
use crate::region::ConvexRegion;

pub use crate::engine::required_epsilon;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub restart: usize,
    pub iteration: usize,
    pub best_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub n: usize,
    pub k: usize,
    /// Recomputed from `best_configuration`, never taken from the optimizer.
    pub best_required_epsilon: f64,
    pub best_configuration: RationalFunction,
    pub evaluations: usize,
    pub seed: u64,
    pub best_restart: usize,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 50,
            iters: 500,
            seed: 0,
        }
    }
}

/// Box half-width for free coordinates, in units of the region's radius.
const BOX_HALF_WIDTH: f64 = 10.0;
const ANCHOR_SEPARATION: f64 = 1e-3;
/// Random parameter vectors screened per restart before the local search.
const START_CANDIDATES: usize = 2000;
/// Continuation schedule for the soft minimum, in units of 1/radius.
const SHARPNESS: [f64; 5] = [8.0, 32.0, 128.0, 1024.0, f64::INFINITY];

struct Parameterization<'a> {
    n: usize,
    k: usize,
    region: &'a ConvexRegion,
    center: Complex,
    radius: f64,
}

impl Parameterization<'_> {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn decode(&self, x: &[f64]) -> (Vec<Complex>, Vec<Complex>) {
        let anchors = (0..self.k)
            .map(|i| radial_map(self.region, Complex::new(x[2 * i], x[2 * i + 1])))
            .collect();
        let half = BOX_HALF_WIDTH * self.radius;
        let free = (self.k..self.n)
            .map(|i| {
                let clamp = |v: f64, c: f64| v.clamp(c - half, c + half);
                Complex::new(clamp(x[2 * i], self.center.re), clamp(x[2 * i + 1], self.center.im))
            })
            .collect();
        (anchors, free)
    }

    /// `S` (monic, ascending coefficients) from the anchor conditions.
    fn solve_factor(&self, anchors: &[Complex], q: &Polynomial) -> Option<Polynomial> {
        let m = self.k - 1;
        if m == 0 {
            return Some(Polynomial::constant(Complex::new(1.0, 0.0)));
        }
        // integrals[j](i) = ∫_{a₁}^{aᵢ} Q(t) tʲ dt
        let mut power = q.clone();
        let mut columns = Vec::with_capacity(m + 1);
        for _ in 0..=m {
            let prim = power.integral_from(anchors[0]);
            columns.push(anchors[1..].iter().map(|&a| prim.eval(a)).collect::<Vec<_>>());
            power = power.mul(&Polynomial::new(vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)]));
        }
        // unknowns s₀..s_{m−1} with Σ sⱼ·columns[j] = −columns[m]
        let mut a: Vec<Vec<Complex>> = (0..m)
            .map(|row| {
                let mut r: Vec<Complex> = (0..m).map(|j| columns[j][row]).collect();
                r.push(-columns[m][row]);
                r
            })
            .collect();
        let coeffs = solve_linear(&mut a)?;
        let mut all = coeffs;
        all.push(Complex::new(1.0, 0.0));
        Some(Polynomial::new(all))
    }

    /// All critical points of the decoded configuration, from the parameters.
    fn critical_points(&self, x: &[f64]) -> Option<(Vec<Complex>, Vec<Complex>, Polynomial)> {
        let (anchors, mut free) = self.decode(x);
        let q = Polynomial::from_roots(&free);
        let s = self.solve_factor(&anchors, &q)?;
        if s.degree()? > 0 {
            free.extend(s.roots().ok()?.points);
        }
        let derivative = q.mul(&s);
        Some((anchors, free, derivative))
    }

    /// Critical points and their adjusted signed distances. With a
    /// `reference`, points whose identity is not fixed by the parameters are
    /// matched to it, so the values can be differenced.
    fn components(&self, x: &[f64], reference: Option<&[Complex]>) -> Option<(Vec<Complex>, Vec<f64>)> {
        let (anchors, mut crit, _) = self.critical_points(x)?;
        // near-coincident anchors make the linear system cancel catastrophically;
        // fall back to the critical points of the actual zero configuration
        let close = anchors
            .iter()
            .enumerate()
            .any(|(i, a)| anchors[i + 1..].iter().any(|b| (a - b).norm() < ANCHOR_SEPARATION * self.radius));
        let mut fixed = self.n - self.k;
        if close {
            crit = self.witness(x)?.critical_points().ok()?.points;
            fixed = 0;
        }
        if crit.len() < self.k - 1 {
            return None;
        }
        if let Some(reference) = reference {
            if reference.len() != crit.len() {
                return None;
            }
            let mut pool: Vec<Complex> = crit.split_off(fixed);
            for target in &reference[fixed..] {
                let i = (0..pool.len()).min_by(|&i, &j| (pool[i] - target).norm().total_cmp(&(pool[j] - target).norm()))?;
                crit.push(pool.swap_remove(i));
            }
        }
        // signed so the optimizer still sees a slope while points sit inside K
        let values: Vec<f64> = crit.iter().map(|&c| self.region.signed_distance(c)).collect();
        values.iter().all(|v| v.is_finite()).then_some((crit, values))
    }

    fn value(&self, x: &[f64], sharpness: f64) -> f64 {
        let Some((_, mut d)) = self.components(x, None) else {
            return f64::NEG_INFINITY;
        };
        d.sort_by(f64::total_cmp);
        soft_min(&d[self.k - 2..], sharpness)
    }

    /// Prox-linear ascent on the (k−1)-th smallest value: with `fᵢ, gᵢ` the
    /// values at or above it and their central-difference gradients, the step
    /// maximizes `minᵢ (fᵢ + gᵢ·Δ) − |Δ|²/(2τ)`, i.e. `Δ = τ·Σ λᵢ gᵢ` with
    /// `λ` minimizing `λ·f + τ/2·|Σ λᵢ gᵢ|²` over the simplex.
    fn polish(&self, start: Vec<f64>, iters: usize) -> LocalRun {
        let mut x = start;
        let mut run = LocalRun { best: x.clone(), value: self.value(&x, f64::INFINITY), evaluations: 1, trace: Vec::with_capacity(iters) };
        let mut tau = 0.05 * self.radius;
        let h = 1e-7 * self.radius;
        for _ in 0..iters {
            if tau < 1e-16 * self.radius {
                break;
            }
            let Some((crit, values)) = self.components(&x, None) else {
                break;
            };
            let mut order: Vec<usize> = (0..values.len()).collect();
            order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
            let f = values[order[self.k - 2]];
            let active = &order[self.k - 2..];
            let mut grads = vec![vec![0.0; x.len()]; active.len()];
            let mut ok = true;
            for j in 0..x.len() {
                let mut plus = x.clone();
                let mut minus = x.clone();
                plus[j] += h;
                minus[j] -= h;
                run.evaluations += 2;
                match (self.components(&plus, Some(&crit)), self.components(&minus, Some(&crit))) {
                    (Some((_, vp)), Some((_, vm))) => {
                        for (g, &i) in grads.iter_mut().zip(active) {
                            g[j] = (vp[i] - vm[i]) / (2.0 * h);
                        }
                    }
                    _ => ok = false,
                }
            }
            if !ok {
                break;
            }
            let offsets: Vec<f64> = active.iter().map(|&i| values[i] - f).collect();
            let mut improved = false;
            for _ in 0..30 {
                let step = prox_step(&grads, &offsets, tau);
                let y: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
                run.evaluations += 1;
                let fy = self.value(&y, f64::INFINITY);
                if fy > f {
                    x = y;
                    tau = (2.0 * tau).min(self.radius);
                    improved = true;
                    if fy > run.value {
                        run.value = fy;
                        run.best = x.clone();
                    }
                    break;
                }
                tau *= 0.25;
            }
            run.trace.push(run.value);
            if !improved {
                break;
            }
        }
        let last = run.trace.last().copied().unwrap_or(run.value);
        run.trace.resize(iters, last);
        run
    }

    /// Parameters of a random zero configuration: `k` zeros on an arc of ∂K
    /// (mostly on the boundary itself), `n − k` in a disk about K, and the
    /// `n − k` critical points farthest from K as the free ones. Anchors
    /// started in the interior drift together, and two anchors colliding on
    /// ∂K is a local maximum at 0.
    fn sample_start(&self, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
        let phase = TAU * rng.random::<f64>();
        let width = std::f64::consts::PI * rng.random::<f64>();
        let anchors: Vec<Complex> = (0..self.k)
            .map(|_| {
                let angle = phase + width * (2.0 * rng.random::<f64>() - 1.0);
                let depth = if rng.random::<f64>() < 0.7 { 1.0 } else { rng.random::<f64>() };
                radial_map(self.region, Complex::from_polar(std::f64::consts::FRAC_PI_2 * depth.sqrt(), angle))
            })
            .collect();
        let mut zeros = anchors.clone();
        zeros.extend((self.k..self.n).map(|_| {
            self.center + Complex::from_polar(3.0 * self.radius * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>())
        }));
        let mut crit = RationalFunction::polynomial(zeros).critical_points().ok()?.points;
        crit.sort_by(|a, b| self.region.signed_distance(*b).total_cmp(&self.region.signed_distance(*a)));
        let mut x = Vec::with_capacity(self.dim());
        for a in anchors {
            let u = radial_unmap(self.region, a);
            x.extend([u.re, u.im]);
        }
        for c in &crit[..self.n - self.k] {
            x.extend([c.re, c.im]);
        }
        Some(x)
    }

    /// The zero configuration behind `x`.
    fn witness(&self, x: &[f64]) -> Option<RationalFunction> {
        let (anchors, _, derivative) = self.critical_points(x)?;
        let mut others = derivative.integral_from(anchors[0]).roots().ok()?.points;
        // the anchors are zeros by construction; keep them exact and drop their computed copies
        for a in &anchors {
            let nearest = (0..others.len()).min_by(|&i, &j| (others[i] - a).norm().total_cmp(&(others[j] - a).norm()))?;
            others.swap_remove(nearest);
        }
        let mut zeros = anchors;
        zeros.extend(others);
        Some(RationalFunction::polynomial(zeros))
    }
}

/// How far K extends from its centroid along the unit vector `dir`.
fn radial_extent(region: &ConvexRegion, dir: Complex) -> f64 {
    match region {
        ConvexRegion::Disk { radius, .. } => *radius,
        ConvexRegion::Segment { .. } => 0.0,
        ConvexRegion::Polygon { vertices } => {
            let o = region.centroid();
            let n = vertices.len();
            (0..n)
                .filter_map(|i| {
                    let (p, q) = (vertices[i] - o, vertices[(i + 1) % n] - o);
                    let e = q - p;
                    let det = dir.re * (-e.im) - dir.im * (-e.re);
                    if det.abs() < 1e-300 {
                        return None;
                    }
                    let t = (p.re * (-e.im) - p.im * (-e.re)) / det;
                    let s = (dir.re * p.im - dir.im * p.re) / det;
                    (t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s)).then_some(t)
                })
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Smooth surjection of the plane onto K: `o + ρ(û)·sin²|u|·û`, or
/// `m + (b − a)/2·sin(Re u)` on a segment. The boundary is reached where
/// `sin²` peaks, so optima on ∂K are interior critical points of the map,
/// which clamping would turn into kinks.
fn radial_map(region: &ConvexRegion, u: Complex) -> Complex {
    if let ConvexRegion::Segment { a, b } = region {
        return (a + b) / 2.0 + (b - a) / 2.0 * u.re.sin();
    }
    let r = u.norm();
    if r == 0.0 {
        return region.centroid();
    }
    let dir = u / r;
    region.centroid() + dir * (radial_extent(region, dir) * r.sin().powi(2))
}

/// A preimage of `z ∈ K` under [`radial_map`].
fn radial_unmap(region: &ConvexRegion, z: Complex) -> Complex {
    if let ConvexRegion::Segment { a, b } = region {
        let half = (b - a) / 2.0;
        let t = if half.norm() == 0.0 { 0.0 } else { ((z - (a + b) / 2.0) * half.conj()).re / half.norm_sqr() };
        return Complex::new(t.clamp(-1.0, 1.0).asin(), 0.0);
    }
    let w = z - region.centroid();
    let r = w.norm();
    if r == 0.0 {
        return Complex::new(0.0, 0.0);
    }
    let dir = w / r;
    let extent = radial_extent(region, dir);
    if !(extent > 0.0) {
        return Complex::new(0.0, 0.0);
    }
    dir * (r / extent).min(1.0).sqrt().asin()
}

/// `−log(Σ exp(−β dᵢ))/β`, exact minimum for infinite β.
fn soft_min(d: &[f64], beta: f64) -> f64 {
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    if beta.is_infinite() {
        return lo;
    }
    lo - d.iter().map(|&v| (-beta * (v - lo)).exp()).sum::<f64>().ln() / beta
}

/// `τ·Σ λᵢ rowsᵢ` with `λ` minimizing `λ·offsets + τ/2·|Σ λᵢ rowsᵢ|²` on
/// the simplex, by projected gradient.
fn prox_step(rows: &[Vec<f64>], offsets: &[f64], tau: f64) -> Vec<f64> {
    let m = rows.len();
    let dim = rows.first().map_or(0, |r| r.len());
    let gram: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum()).collect())
        .collect();
    let lipschitz: f64 = (tau * (0..m).map(|i| gram[i][i]).sum::<f64>()).max(f64::MIN_POSITIVE);
    let mut w = vec![0.0; m];
    w[0] = 1.0;
    for _ in 0..500 {
        let grad: Vec<f64> = (0..m).map(|i| offsets[i] + tau * (0..m).map(|j| gram[i][j] * w[j]).sum::<f64>()).collect();
        let trial: Vec<f64> = (0..m).map(|i| w[i] - grad[i] / lipschitz).collect();
        w = project_to_simplex(&trial);
    }
    (0..dim).map(|c| tau * (0..m).map(|i| w[i] * rows[i][c]).sum::<f64>()).collect()
}

fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumulative += ui;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&a| (a - theta).max(0.0)).collect()
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_linear(a: &mut [Vec<Complex>]) -> Option<Vec<Complex>> {
    let m = a.len();
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if !(a[pivot][col].norm() > 0.0) {
            return None;
        }
        a.swap(col, pivot);
        for row in (col + 1)..m {
            let factor = a[row][col] / a[col][col];
            for j in col..=m {
                let v = a[col][j];
                a[row][j] -= factor * v;
            }
        }
    }
    let mut x = vec![Complex::new(0.0, 0.0); m];
    for row in (0..m).rev() {
        let tail: Complex = ((row + 1)..m).map(|j| a[row][j] * x[j]).sum();
        x[row] = (a[row][m] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[allow(dead_code)]
struct LocalRun {
    best: Vec<f64>,
    value: f64,
    evaluations: usize,
    trace: Vec<f64>,
}

/// Nelder–Mead maximization; the simplex is rebuilt around the incumbent
/// whenever it collapses, until `iters` iterations are spent.
fn nelder_mead<F: Fn(&[f64]) -> f64>(objective: F, start: Vec<f64>, step: f64, iters: usize) -> LocalRun {
    let dim = start.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = objective(x);
        if v.is_nan() { f64::NEG_INFINITY } else { v }
    };
    let build = |center: &[f64], step: f64, eval: &mut dyn FnMut(&[f64]) -> f64| {
        let mut simplex = vec![(center.to_vec(), eval(center))];
        for i in 0..dim {
            let mut x = center.to_vec();
            x[i] += step;
            let v = eval(&x);
            simplex.push((x, v));
        }
        simplex
    };
    // dimension-adaptive coefficients (Gao and Han)
    let nd = dim as f64;
    let (expand, contract, shrink) = (1.0 + 2.0 / nd, 0.75 - 0.5 / nd, 1.0 - 1.0 / nd);
    let mut simplex = build(&start, step, &mut eval);
    let mut scale = step;
    let mut trace = Vec::with_capacity(iters);
    for _ in 0..iters {
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size < 1e-13 * (1.0 + scale) {
            scale = (scale * 0.1).max(1e-6 * step);
            let incumbent = simplex[0].clone();
            simplex = build(&incumbent.0, scale, &mut eval);
            simplex[0] = incumbent;
            simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        }
        let worst = simplex[dim].clone();
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> { (0..dim).map(|j| centroid[j] + t * (centroid[j] - worst.0[j])).collect() };
        let reflected = along(1.0);
        let fr = eval(&reflected);
        if fr > simplex[0].1 {
            let expanded = along(expand);
            let fe = eval(&expanded);
            simplex[dim] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr > simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr > worst.1 {
                let x = along(contract);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(-contract);
                let v = eval(&x);
                (x, v)
            };
            if fc > worst.1.max(fr) {
                simplex[dim] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = entry.0.iter().zip(&best).map(|(v, b)| b + shrink * (v - b)).collect();
                    *entry = (x.clone(), eval(&x));
                }
            }
        }
        let best = simplex.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
        trace.push(best);
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (best, value) = simplex.swap_remove(0);
    LocalRun {
        best,
        value,
        evaluations,
        trace,
    }
}

/// Lower bound on `ψ_K(n, k)`: the largest required ε found over
/// polynomial configurations of degree `n` with `k` zeros in K.
pub fn search_psi(n: usize, k: usize, region: &ConvexRegion, opts: &SearchOptions) -> Result<SearchResult> {
    let tol = Tolerances::default();
    if k < 2 || k > n {
        return Err(AglError::InvalidArgument(format!("need 2 <= k <= n, got n = {n}, k = {k}")));
    }
    let radius = if region.diameter() > 0.0 { region.diameter() / 2.0 } else { 1.0 };
    let param = Parameterization {
        n,
        k,
        region,
        center: region.centroid(),
        radius,
    };
    let restarts = opts.restarts.max(1);
    let runs: Vec<(usize, Option<(RationalFunction, f64)>, LocalRun)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            let start = (0..START_CANDIDATES)
                .filter_map(|_| param.sample_start(&mut rng))
                .map(|x| (param.value(&x, f64::INFINITY), x))
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, x)| x)
                .unwrap_or_else(|| vec![0.0; param.dim()]);
            let mut run = LocalRun { best: start, value: f64::NEG_INFINITY, evaluations: 0, trace: Vec::new() };
            let explore = opts.iters / 2;
            let stages = SHARPNESS.len();
            for (i, &beta) in SHARPNESS.iter().enumerate() {
                let budget = explore * (i + 1) / stages - explore * i / stages;
                let step = 0.25 * radius * 0.5f64.powi(i as i32);
                let next = nelder_mead(|x| param.value(x, beta / radius), run.best.clone(), step, budget);
                run.evaluations += next.evaluations;
                run.trace.extend(next.trace);
                run.best = next.best;
                run.value = next.value;
            }
            let polished = param.polish(run.best.clone(), opts.iters - explore);
            run.evaluations += polished.evaluations;
            run.trace.extend(polished.trace);
            if polished.value >= run.value {
                run.best = polished.best;
                run.value = polished.value;
            }
            let witness = param.witness(&run.best).and_then(|f| {
                let value = required_epsilon(&f, region, k, &tol).ok()?;
                Some((f, value))
            });
            (r, witness, run)
        })
        .collect();
    let mut trace = Vec::new();
    let mut evaluations = 0;
    let mut best: Option<(usize, RationalFunction, f64)> = None;
    for (r, witness, run) in runs {
        evaluations += run.evaluations;
        trace.extend(run.trace.iter().enumerate().map(|(iteration, &best_value)| TracePoint {
            restart: r,
            iteration,
            best_value,
        }));
        if let Some((f, value)) = witness {
            // restarts arrive in index order, so strict improvement keeps the lower seed on ties
            if best.as_ref().is_none_or(|b| value > b.2) {
                best = Some((r, f, value));
            }
        }
    }
    let (best_restart, best_configuration, best_required_epsilon) = match best {
        Some(b) => b,
        None => {
            // every witness failed; fall back to the trivially feasible all-in-K configuration
            let f = random_instance(n, n, region, 0.0, 1.0, opts.seed)?;
            let v = required_epsilon(&f, region, k, &tol)?;
            (0, f, v)
        }
    };
    Ok(SearchResult {
        n,
        k,
        best_required_epsilon,
        best_configuration,
        evaluations,
        seed: opts.seed,
        best_restart,
        trace,
    })
}

pub fn write_trace_csv<W: Write>(trace: &[TracePoint], out: W) -> Result<()> {
    write_rows(trace, out)
}

fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| AglError::InvalidArgument(e.to_string()))?;
    }
    w.flush().map_err(|e| AglError::InvalidArgument(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub n: usize,
    pub zero_fraction: f64,
    pub critical_fraction: f64,
}

/// `n − outside_count` zeros uniform in K and `outside_count` zeros at
/// distance `2·diam K` from the centroid, at random angles.
pub fn asymptotic_experiment(
    region: &ConvexRegion,
    eps: f64,
    n_values: &[usize],
    outside_count: usize,
    seed: u64,
) -> Result<Vec<AsymptoticRow>> {
    let tol = Tolerances::default();
    if !(eps > 0.0) {
        return Err(AglError::InvalidArgument(format!("eps {eps} must be positive")));
    }
    if n_values.iter().any(|&n| n <= outside_count || n < 2) {
        return Err(AglError::InvalidArgument("every n must exceed outside_count and be at least 2".into()));
    }
    let distance = if region.diameter() > 0.0 { 2.0 * region.diameter() } else { 2.0 };
    let center = region.centroid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let mut zeros: Vec<Complex> = (0..n - outside_count).map(|_| region.sample_uniform(&mut rng)).collect();
        zeros.extend((0..outside_count).map(|_| center + Complex::from_polar(distance, TAU * rng.random::<f64>())));
        let f = RationalFunction::polynomial(zeros);
        let report = agl_report(&f, region, eps, n - outside_count, &tol)?;
        rows.push(AsymptoticRow {
            n,
            zero_fraction: (n - outside_count) as f64 / n as f64,
            critical_fraction: report.critical_in_k_eps as f64 / (n - 1) as f64,
        });
    }
    Ok(rows)
}

pub fn write_asymptotic_csv<W: Write>(rows: &[AsymptoticRow], out: W) -> Result<()> {
    write_rows(rows, out)
}

pub const PROBE_N_GRID: [usize; 3] = [10, 20, 30];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub ratio: f64,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub worst_shortfall: usize,
}

/// `k` for a target `k/(n − k)`; an infinite ratio means `k = n`.
pub fn k_for_ratio(n: usize, ratio: f64) -> usize {
    if ratio.is_infinite() {
        return n;
    }
    ((ratio * n as f64 / (1.0 + ratio)).round() as usize).clamp(2.min(n), n)
}

/// Random rational instances at each ratio and each n of [`PROBE_N_GRID`];
/// points outside K fall in a disk of radius `2·diam K + ε` about the centroid.
pub fn conjecture_probe(
    region: &ConvexRegion,
    eps: f64,
    ratio_values: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    let tol = Tolerances::default();
    if trials == 0 {
        return Err(AglError::InvalidArgument("trials must be at least 1".into()));
    }
    if !(eps > 0.0) || ratio_values.iter().any(|r| !(*r > 0.0)) {
        return Err(AglError::InvalidArgument("eps and every ratio must be positive".into()));
    }
    let spread = 2.0 * region.diameter().max(0.5) + eps;
    let cells: Vec<(usize, f64, usize)> = ratio_values
        .iter()
        .enumerate()
        .flat_map(|(i, &r)| PROBE_N_GRID.iter().enumerate().map(move |(j, &n)| (i * PROBE_N_GRID.len() + j, r, n)))
        .collect();
    cells
        .into_par_iter()
        .map(|(cell, ratio, n)| {
            let k = k_for_ratio(n, ratio);
            let mut failures = 0;
            let mut worst_shortfall = 0;
            for t in 0..trials {
                let trial_seed = seed.wrapping_add((cell * trials + t) as u64);
                let f = random_instance(n, k, region, 0.5, spread, trial_seed)?;
                let report = agl_report(&f, region, eps, k, &tol)?;
                if !report.holds {
                    failures += 1;
                    worst_shortfall = worst_shortfall.max(k - 1 - report.critical_in_k_eps);
                }
            }
            Ok(ProbeRow {
                ratio,
                n,
                k,
                trials,
                failures,
                failure_rate: failures as f64 / trials as f64,
                worst_shortfall,
            })
        })
        .collect()
}

pub fn write_probe_csv<W: Write>(rows: &[ProbeRow], out: W) -> Result<()> {
    write_rows(rows, out)
}
