//! Acceptance criteria 1–9, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines appear in plain `cargo test` output.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use agl_core::bounds::{psi1_biernacki, psi1_corollary3, psi1_marden, theorem1_general_holds, BoundReport};
use agl_core::certifier::{certify, CertifyOptions};
use agl_core::engine::{agl_report, count_in, random_instance};
use agl_core::lab::{asymptotic_experiment, required_epsilon, search_psi, SearchOptions};
use agl_core::rational::{critical_points, log_derivative, multiset_eq};
use agl_core::{Complex, ConvexRegion, RationalFunction, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KAKEYA_TOL: f64 = 1e-3;
const KAKEYA_BUDGET_SECS: f64 = 300.0;
const LEMMA1_TOL: f64 = 1e-8;
const HULL_TOL: f64 = 1e-9;
const SCALE_TOL: f64 = 5e-3;

/// Criteria whose statement cannot hold as written; see the notes printed with them.
const KNOWN_UNATTAINABLE: [u32; 1] = [8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn kakeya(n: usize) -> f64 {
    1.0 / (PI / n as f64).sin() - 1.0
}

/// Disk, segment or equilateral triangle of diameter `s`, randomly placed.
fn region_of_diameter(s: f64, rng: &mut ChaCha8Rng) -> ConvexRegion {
    let center = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let turn = Complex::from_polar(1.0, TAU * rng.random::<f64>());
    let shapes = if s > 0.0 { 3 } else { 2 };
    match rng.random_range(0..shapes) {
        0 => ConvexRegion::disk(center, s / 2.0).unwrap(),
        1 => ConvexRegion::segment(center - turn * (s / 2.0), center + turn * (s / 2.0)),
        _ => {
            let r = s / 3f64.sqrt();
            let vertices = (0..3).map(|j| center + turn * Complex::from_polar(r, TAU * j as f64 / 3.0)).collect();
            ConvexRegion::polygon(vertices).unwrap()
        }
    }
}

/// Least ε with `16((s+ε)/ε)² < k/(n−k)²` for `k < n`.
fn general_threshold(n: usize, k: usize, s: f64) -> f64 {
    let q = (k as f64).sqrt() / (4.0 * (n - k) as f64);
    s / (q - 1.0)
}

/// `(n, k, s, eps)` satisfying the general hypothesis, with `n` in `n_range`.
fn hypothesis_triple(rng: &mut ChaCha8Rng, n_range: std::ops::RangeInclusive<usize>, s_values: &[f64], allow_full: bool) -> (usize, usize, f64, f64) {
    loop {
        let n = rng.random_range(n_range.clone());
        let s = s_values[rng.random_range(0..s_values.len())];
        let ks: Vec<usize> = (1..=n)
            .filter(|&k| (allow_full && k == n) || (k < n && 16 * (n - k) * (n - k) < k))
            .collect();
        if ks.is_empty() {
            continue;
        }
        let k = ks[rng.random_range(0..ks.len())];
        let eps = if k == n || s == 0.0 {
            rng.random_range(0.05..2.0)
        } else {
            general_threshold(n, k, s) * (1.0 + 1e-6 + rng.random::<f64>())
        };
        if theorem1_general_holds(n as u64, k as u64, eps, s) {
            return (n, k, s, eps);
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let disk = ConvexRegion::unit_disk();
    let opts = SearchOptions { restarts: 50, iters: 500, seed: 0 };
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for n in [3usize, 4, 5, 6, 8] {
        let r = search_psi(n, 2, &disk, &opts).unwrap();
        let err = (r.best_required_epsilon - kakeya(n)).abs();
        worst = worst.max(err);
        parts.push(format!("n={n}: {:.6}", r.best_required_epsilon));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= KAKEYA_TOL && secs <= KAKEYA_BUDGET_SECS,
        format!("{}; max |error| {worst:.2e}; {secs:.1} s", parts.join(", ")),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut counterexamples = Vec::new();
    let trials = 10_000;
    for trial in 0..trials {
        let (n, k, s, eps) = hypothesis_triple(&mut rng, 2..=30, &[0.0, 1.0, 2.0], true);
        let region = region_of_diameter(s, &mut rng);
        let spread = rng.random_range(0.5..4.0) * (s + eps + 1.0);
        let f = random_instance(n, k, &region, rng.random::<f64>(), spread, rng.random()).unwrap();
        match agl_report(&f, &region, eps, k, &tol) {
            Ok(r) if r.holds => {}
            Ok(r) => counterexamples.push(format!("trial {trial}: n={n} k={k} s={s} eps={eps} found {}", r.critical_in_k_eps)),
            Err(e) => counterexamples.push(format!("trial {trial}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        counterexamples.is_empty() && secs <= 120.0,
        format!("{trials} instances, {} counterexamples {:?}; {secs:.1} s", counterexamples.len(), counterexamples.iter().take(3).collect::<Vec<_>>()),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trials = 1000;
    let (mut valid, mut problems) = (0, Vec::new());
    let mut reasons: std::collections::BTreeMap<String, usize> = Default::default();
    for trial in 0..trials {
        let (n, k, s, eps) = hypothesis_triple(&mut rng, 2..=80, &[1.0, 2.0], true);
        let region = region_of_diameter(s, &mut rng);
        let spread = rng.random_range(0.5..3.0) * (s + eps);
        let f = random_instance(n, k, &region, rng.random::<f64>(), spread, rng.random()).unwrap();
        let opts = CertifyOptions { seed: trial, ..CertifyOptions::default() };
        let cert = match certify(&f, &region, eps, k, &opts, &tol) {
            Ok(cert) => cert,
            Err(e) => {
                problems.push(format!("trial {trial}: {e}"));
                continue;
            }
        };
        if !cert.valid {
            *reasons.entry(format!("{:?}", cert.failure.unwrap())).or_default() += 1;
            continue;
        }
        valid += 1;
        let (g, h) = cert.factors.clone().unwrap();
        let gh = RationalFunction {
            zeros: g.zeros.iter().chain(&h.zeros).copied().collect(),
            poles: h.poles.clone(),
            scale: h.scale,
        };
        let contour = cert.contour.as_ref().unwrap();
        let crit = match critical_points(&gh, &tol) {
            Ok(r) => r.points,
            Err(e) => {
                problems.push(format!("trial {trial}: critical points of gh: {e}"));
                continue;
            }
        };
        let direct = count_in(&crit, &region, eps, &tol) as i64;
        let bound = cert.critical_lower_bound.unwrap();
        let inside = |pts: &[Complex]| pts.iter().map(|&z| contour.winds_around(z)).sum::<i64>();
        let expected_winding = inside(&crit) - inside(&gh.zeros) - inside(&gh.poles);
        if !(bound <= direct && bound >= k as i64 - 1) {
            problems.push(format!("trial {trial}: bound {bound}, direct {direct}, k {k}"));
        }
        if cert.winding != Some(expected_winding) {
            problems.push(format!("trial {trial}: winding {:?} vs direct {expected_winding}", cert.winding));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        problems.is_empty() && valid > 0 && secs <= 180.0,
        format!("{trials} instances, {valid} valid certificates (others: {reasons:?}), {} violations {:?}; {secs:.1} s", problems.len(), problems.iter().take(3).collect::<Vec<_>>()),
    )
}

fn criterion_4() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut problems = Vec::new();
    let trials = 500;
    for trial in 0..trials {
        let nz = rng.random_range(1..=12);
        let np = rng.random_range(0..=8);
        let mut draw = |m: usize| -> Vec<Complex> {
            (0..m).map(|_| Complex::from_polar(2.0 * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>())).collect()
        };
        let f = RationalFunction::from_points(draw(nz), draw(np));
        let ld = match log_derivative(&f, &tol) {
            Ok(ld) => ld,
            Err(e) => {
                problems.push(format!("trial {trial}: {e}"));
                continue;
            }
        };
        let crit = critical_points(&f, &tol).unwrap().points;
        let all: Vec<Complex> = f.zeros.iter().chain(&f.poles).copied().collect();
        if !multiset_eq(&ld.zeros, &crit, LEMMA1_TOL) {
            problems.push(format!("trial {trial}: zero sets differ"));
        }
        if !multiset_eq(&ld.poles, &all, 0.0) {
            problems.push(format!("trial {trial}: pole set differs"));
        }
    }
    outcome(problems.is_empty(), format!("{trials} functions, {} mismatches {:?}", problems.len(), problems.iter().take(3).collect::<Vec<_>>()))
}

fn criterion_5() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let trials = 1000;
    for _ in 0..trials {
        let degree = rng.random_range(2..=50);
        let zeros: Vec<Complex> = match rng.random_range(0..3) {
            0 => (0..degree).map(|_| Complex::from_polar(rng.random::<f64>().sqrt(), TAU * rng.random::<f64>())).collect(),
            1 => (0..degree).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-0.1..0.1))).collect(),
            _ => (0..degree).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect(),
        };
        let hull = ConvexRegion::hull(&zeros).unwrap();
        let f = RationalFunction::polynomial(zeros);
        for z in critical_points(&f, &tol).unwrap().points {
            worst = worst.max(hull.dist(z));
        }
    }
    outcome(worst <= HULL_TOL, format!("{trials} polynomials, max distance to hull {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let r = BoundReport::new(100, 99, 2.0).unwrap();
    let (m, b, c3) = (r.get("marden").unwrap(), r.get("biernacki").unwrap(), r.get("corollary3_psi1").unwrap());
    let ulps = |x: f64, y: f64| ((x - y).abs() / (f64::EPSILON * y.abs())).round();
    let checks = [(m, 2f64.sqrt() - 1.0), (b, 2.0 / 99.0), (c3, 8.0 / 91.0)];
    let exact = checks.iter().all(|&(x, y)| ulps(x, y) <= 1.0);
    let consistent = psi1_marden(100, 99).value() == Some(m)
        && psi1_biernacki(100, 99).value() == Some(b)
        && psi1_corollary3(100, 99).value() == Some(c3);
    outcome(
        exact && consistent && b < c3 && c3 < m,
        format!(
            "marden {m} ({} ulp), biernacki {b} ({} ulp), corollary3 {c3} ({} ulp), best {:?}",
            ulps(m, checks[0].1),
            ulps(b, checks[1].1),
            ulps(c3, checks[2].1),
            r.best
        ),
    )
}

/// Required ε with `k = n − 1` for `n − 1` equispaced zeros in [0, 1] and one at i.
const SECTION1_FIXTURES: [(usize, f64); 10] = [
    (3, 9.763107293781748e-2),
    (4, 2.8047672805517884e-2),
    (5, 1.1201814161398406e-2),
    (6, 6.053305266429435e-3),
    (7, 3.8741511416709737e-3),
    (8, 2.631482099939607e-3),
    (9, 1.902400532412934e-3),
    (10, 1.4556603780004245e-3),
    (11, 1.1392081907638007e-3),
    (12, 9.152052991296494e-4),
];

fn criterion_7() -> Outcome {
    let tol = Tolerances::default();
    let segment = ConvexRegion::segment(c(0.0, 0.0), c(1.0, 0.0));
    let mut values = Vec::new();
    let mut all_above = true;
    let mut fixture_error: f64 = 0.0;
    for (n, frozen) in SECTION1_FIXTURES {
        let mut zeros: Vec<Complex> = (0..n - 1).map(|j| c(j as f64 / (n - 2) as f64, 0.0)).collect();
        zeros.push(c(0.0, 1.0));
        let f = RationalFunction::polynomial(zeros);
        all_above &= critical_points(&f, &tol).unwrap().points.iter().all(|z| z.im > 0.0);
        let v = required_epsilon(&f, &segment, n - 1, &tol).unwrap();
        fixture_error = fixture_error.max((v - frozen).abs() / frozen);
        values.push(v);
    }
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    outcome(
        all_above && decreasing && fixture_error <= 1e-10,
        format!(
            "Im > 0 for all: {all_above}; strictly decreasing: {decreasing}; {:.3e} at n=3 to {:.3e} at n=12; max relative fixture drift {fixture_error:.1e}",
            values[0],
            values[values.len() - 1]
        ),
    )
}

fn criterion_8() -> Outcome {
    let segment = ConvexRegion::segment(c(0.0, 0.0), c(1.0, 0.0));
    let rows = asymptotic_experiment(&segment, 0.25, &[5, 10, 20, 40, 80], 1, 8).unwrap();
    let fractions: Vec<f64> = rows.iter().map(|r| r.critical_fraction).collect();
    let nondecreasing = fractions.windows(2).all(|w| w[1] >= w[0]);
    let last = *fractions.last().unwrap();
    let partial = rows
        .iter()
        .all(|r| r.critical_fraction == (r.n - 2) as f64 / (r.n - 1) as f64);
    outcome(
        nondecreasing && last == 1.0,
        format!(
            "fractions {fractions:?}; nondecreasing: {nondecreasing}; final {last}. Every row equals (n-2)/(n-1): {partial}. \
             The critical point attracted to the outside zero w sits near w - (w - c)/(n - 1) for the centroid c of the \
             zeros in K, so it stays about 2 away from K for every n and the final fraction is 78/79, never 1.0"
        ),
    )
}

fn criterion_9() -> Outcome {
    let tol = Tolerances::default();
    let disk = ConvexRegion::unit_disk();
    let r = c(2.0, 0.0);
    let mut worst_static: f64 = 0.0;
    for seed in 0..200 {
        let f = random_instance(9, 6, &disk, 0.4, 4.0, seed).unwrap();
        let base = required_epsilon(&f, &disk, 6, &tol).unwrap();
        let scaled = required_epsilon(&f.scale_by(r), &disk.scaled(r), 6, &tol).unwrap();
        worst_static = worst_static.max((scaled - 2.0 * base).abs());
    }
    let opts = SearchOptions { restarts: 20, iters: 400, seed: 9 };
    let big = ConvexRegion::disk(c(0.0, 0.0), 2.0).unwrap();
    let mut worst_search: f64 = 0.0;
    let mut parts = Vec::new();
    for (n, k) in [(4usize, 2usize), (5, 3)] {
        let unit = search_psi(n, k, &disk, &opts).unwrap().best_required_epsilon;
        let doubled = search_psi(n, k, &big, &opts).unwrap().best_required_epsilon;
        worst_search = worst_search.max((doubled - 2.0 * unit).abs());
        parts.push(format!("({n},{k}): {unit:.6} vs {doubled:.6}"));
    }
    outcome(
        worst_static <= SCALE_TOL && worst_search <= SCALE_TOL,
        format!("required_epsilon max deviation {worst_static:.1e} over 200 instances; search {}; max deviation {worst_search:.1e}", parts.join(", ")),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "Kakeya exactness", criterion_1),
        (2, "Theorem 1 validation", criterion_2),
        (3, "certifier soundness and cross-oracle", criterion_3),
        (4, "logarithmic derivative", criterion_4),
        (5, "classical Gauss-Lucas", criterion_5),
        (6, "bound table reproduction", criterion_6),
        (7, "off-axis zero example", criterion_7),
        (8, "Totik desk-scale", criterion_8),
        (9, "scale law", criterion_9),
    ];
    let mut unexpected = 0;
    for (id, name, check) in criteria {
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_UNATTAINABLE.contains(&id) { " [unattainable as stated]" } else { "" };
        println!("criterion {id} ({name}): {verdict}{note} - {}", o.detail);
        if !o.pass && !KNOWN_UNATTAINABLE.contains(&id) {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed");
        ExitCode::FAILURE
    }
}
