//! Closed-form ε-bounds for the approximate Gauss–Lucas property.
//!
//! `ψ₁(n, k)` is the cushion needed around the unit disk; the classical
//! bounds of Kakeya, Marden and Biernacki are in that normalization. The
//! rational-function inequalities take the diameter `s` of K directly.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{AglError, Result};

/// A bound value, or a marker that its side condition fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Value(f64),
    Inapplicable,
}

impl Bound {
    pub fn value(self) -> Option<f64> {
        match self {
            Bound::Value(v) => Some(v),
            Bound::Inapplicable => None,
        }
    }

    pub fn is_applicable(self) -> bool {
        matches!(self, Bound::Value(_))
    }
}

fn gap_sq(n: u64, k: u64) -> f64 {
    let gap = (n - k) as f64;
    gap * gap
}

/// `16(s+ε)²/ε² < k/(n−k)²`; `k = n` is the classical theorem.
pub fn theorem1_general_holds(n: u64, k: u64, eps: f64, s: f64) -> bool {
    if k == 0 || k > n || !(eps > 0.0) {
        return false;
    }
    if k == n {
        return true;
    }
    let ratio = (s + eps) / eps;
    16.0 * ratio * ratio < k as f64 / gap_sq(n, k)
}

/// Sharper disk-only predicate `8(s+ε)/ε < k/(n−k)²`.
pub fn theorem1_disk_holds(n: u64, k: u64, eps: f64, s: f64) -> bool {
    if k == 0 || k > n || !(eps > 0.0) {
        return false;
    }
    if k == n {
        return true;
    }
    8.0 * (s + eps) / eps < k as f64 / gap_sq(n, k)
}

/// `4s(n−k)/(√k − 4(n−k))` when `√k > 4(n−k)`: every larger ε works.
pub fn corollary2_epsilon(n: u64, k: u64, s: f64) -> Bound {
    if k == 0 || k > n {
        return Bound::Inapplicable;
    }
    if k == n {
        return Bound::Value(0.0);
    }
    let gap = (n - k) as f64;
    let denom = (k as f64).sqrt() - 4.0 * gap;
    if denom > 0.0 {
        Bound::Value(4.0 * s * gap / denom)
    } else {
        Bound::Inapplicable
    }
}

/// `8(n−k)²/(k − 8(n−k)²)` when `k > 8(n−k)²`.
pub fn psi1_corollary3(n: u64, k: u64) -> Bound {
    if k == 0 || k > n {
        return Bound::Inapplicable;
    }
    if k == n {
        return Bound::Value(0.0);
    }
    let g2 = 8.0 * gap_sq(n, k);
    if k as f64 > g2 {
        Bound::Value(g2 / (k as f64 - g2))
    } else {
        Bound::Inapplicable
    }
}

/// Exact value `ψ₁(n, 2) = csc(π/n) − 1`.
pub fn psi1_kakeya_k2(n: u64) -> Bound {
    if n < 2 {
        return Bound::Inapplicable;
    }
    Bound::Value(1.0 / (PI / n as f64).sin() - 1.0)
}

pub fn psi1_marden(n: u64, k: u64) -> Bound {
    if k < 2 || k > n {
        return Bound::Inapplicable;
    }
    let m = (n - k + 1) as f64;
    Bound::Value(1.0 / (PI / (2.0 * m)).sin() - 1.0)
}

/// `∏_{j=1}^{n−k} (n+j)/(n−j) − 1`.
pub fn psi1_biernacki(n: u64, k: u64) -> Bound {
    if k < 2 || k > n {
        return Bound::Inapplicable;
    }
    // (n+j)/(n−j) = 1 + 2j/(n−j); summing logs avoids cancelling `product − 1`
    let nf = n as f64;
    let log_product: f64 = (1..=(n - k))
        .map(|j| (2.0 * j as f64 / (nf - j as f64)).ln_1p())
        .sum();
    Bound::Value(log_product.exp_m1())
}

/// Least ε at which `holds(ε)` switches on, found by bisection. The
/// predicates are monotone in ε, so the threshold exists iff it holds for
/// very large ε.
fn bisect_threshold(holds: impl Fn(f64) -> bool) -> Bound {
    let mut hi = 1.0;
    while !holds(hi) {
        hi *= 2.0;
        if hi > 1e300 {
            return Bound::Inapplicable;
        }
    }
    let mut lo = 0.0;
    if holds(f64::MIN_POSITIVE) {
        return Bound::Value(0.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Bound::Value(hi)
}

/// Solved form of the general inequality, located numerically from the predicate.
pub fn theorem1_general_threshold(n: u64, k: u64, s: f64) -> Bound {
    if k == 0 || k > n {
        return Bound::Inapplicable;
    }
    bisect_threshold(|eps| theorem1_general_holds(n, k, eps, s))
}

pub fn theorem1_disk_threshold(n: u64, k: u64, s: f64) -> Bound {
    if k == 0 || k > n {
        return Bound::Inapplicable;
    }
    bisect_threshold(|eps| theorem1_disk_holds(n, k, eps, s))
}

pub const BOUND_NAMES: [&str; 7] = [
    "theorem1_general",
    "theorem1_disk",
    "corollary2_eps",
    "corollary3_psi1",
    "kakeya_k2",
    "marden",
    "biernacki",
];

/// Bounds in the unit-disk normalization; these compete for `best`.
const PSI1_NAMES: [&str; 4] = ["corollary3_psi1", "kakeya_k2", "marden", "biernacki"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub value: Option<f64>,
    pub condition_met: bool,
}

impl From<Bound> for BoundEntry {
    fn from(b: Bound) -> Self {
        Self {
            value: b.value(),
            condition_met: b.is_applicable(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: u64,
    pub k: u64,
    pub s: f64,
    pub entries: BTreeMap<String, BoundEntry>,
    /// Smallest applicable ψ₁ bound.
    pub best: Option<String>,
}

impl BoundReport {
    pub fn new(n: u64, k: u64, s: f64) -> Result<Self> {
        if k == 0 || k > n {
            return Err(AglError::InvalidArgument(format!("need 1 <= k <= n, got n={n}, k={k}")));
        }
        if !(s >= 0.0) {
            return Err(AglError::InvalidArgument(format!("diameter {s} must be >= 0")));
        }
        let kakeya = if k == 2 { psi1_kakeya_k2(n) } else { Bound::Inapplicable };
        let values = [
            theorem1_general_threshold(n, k, s),
            theorem1_disk_threshold(n, k, s),
            corollary2_epsilon(n, k, s),
            psi1_corollary3(n, k),
            kakeya,
            psi1_marden(n, k),
            psi1_biernacki(n, k),
        ];
        let entries: BTreeMap<String, BoundEntry> = BOUND_NAMES
            .iter()
            .zip(values)
            .map(|(name, b)| (name.to_string(), b.into()))
            .collect();
        let best = PSI1_NAMES
            .iter()
            .filter_map(|name| entries[*name].value.map(|v| (*name, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(name, _)| name.to_string());
        Ok(Self {
            n,
            k,
            s,
            entries,
            best,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).and_then(|e| e.value)
    }
}

/// One report per `n`, each at `k = n − gap`.
pub fn bound_table(n_values: &[u64], gap: u64, s: f64) -> Result<Vec<BoundReport>> {
    n_values
        .iter()
        .map(|&n| {
            if gap >= n {
                return Err(AglError::InvalidArgument(format!("gap {gap} must be < n = {n}")));
            }
            BoundReport::new(n, n - gap, s)
        })
        .collect()
}

pub const CSV_HEADER: [&str; 10] = [
    "n",
    "k",
    "s",
    "theorem1_general_eps_threshold",
    "corollary2",
    "corollary3",
    "kakeya",
    "marden",
    "biernacki",
    "best",
];

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "inapplicable".to_string(), |x| x.to_string())
}

pub fn write_bound_csv<W: Write>(rows: &[BoundReport], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.s.to_string(),
            cell(r.get("theorem1_general")),
            cell(r.get("corollary2_eps")),
            cell(r.get("corollary3_psi1")),
            cell(r.get("kakeya_k2")),
            cell(r.get("marden")),
            cell(r.get("biernacki")),
            r.best.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()
}
