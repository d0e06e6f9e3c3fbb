//! Bounded convex regions K: disks, segments and strictly convex polygons.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AglError, Result};
use crate::rational::Complex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawRegion {
    Disk { center: Complex, radius: f64 },
    Segment { a: Complex, b: Complex },
    Polygon { vertices: Vec<Complex> },
}

/// A bounded convex set. Degenerate point sets (zero radius, `a == b`) are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRegion", into = "RawRegion")]
pub enum ConvexRegion {
    Disk { center: Complex, radius: f64 },
    Segment { a: Complex, b: Complex },
    /// Strictly convex, counterclockwise, at least three vertices.
    Polygon { vertices: Vec<Complex> },
}

impl TryFrom<RawRegion> for ConvexRegion {
    type Error = AglError;

    fn try_from(raw: RawRegion) -> Result<Self> {
        match raw {
            RawRegion::Disk { center, radius } => Self::disk(center, radius),
            RawRegion::Segment { a, b } => Ok(Self::segment(a, b)),
            RawRegion::Polygon { vertices } => Self::polygon(vertices),
        }
    }
}

impl From<ConvexRegion> for RawRegion {
    fn from(k: ConvexRegion) -> Self {
        match k {
            ConvexRegion::Disk { center, radius } => RawRegion::Disk { center, radius },
            ConvexRegion::Segment { a, b } => RawRegion::Segment { a, b },
            ConvexRegion::Polygon { vertices } => RawRegion::Polygon { vertices },
        }
    }
}

fn cross(o: Complex, a: Complex, b: Complex) -> f64 {
    let (u, v) = (a - o, b - o);
    u.re * v.im - u.im * v.re
}

fn project_onto_segment(z: Complex, a: Complex, b: Complex) -> Complex {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return a;
    }
    let t = ((z - a) * ab.conj()).re / len2;
    a + ab * t.clamp(0.0, 1.0)
}

impl ConvexRegion {
    pub fn disk(center: Complex, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(AglError::InvalidRegion(format!("disk radius {radius} must be finite and >= 0")));
        }
        Ok(Self::Disk { center, radius })
    }

    pub fn unit_disk() -> Self {
        Self::Disk {
            center: Complex::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    pub fn segment(a: Complex, b: Complex) -> Self {
        Self::Segment { a, b }
    }

    pub fn polygon(vertices: Vec<Complex>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(AglError::InvalidRegion(format!("polygon needs >= 3 vertices, got {n}")));
        }
        for i in 0..n {
            let c = cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if !(c > 0.0) {
                return Err(AglError::InvalidRegion(format!(
                    "polygon vertices must be strictly convex and counterclockwise (turn at vertex {} has cross {c})",
                    (i + 1) % n
                )));
            }
        }
        // a star polygon also turns left everywhere; its total turning is > 2π
        let turning: f64 = (0..n)
            .map(|i| {
                let e0 = vertices[(i + 1) % n] - vertices[i];
                let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
                (e1 / e0).arg()
            })
            .sum();
        if turning > TAU + 1e-9 {
            return Err(AglError::InvalidRegion("polygon winds more than once".into()));
        }
        Ok(Self::Polygon { vertices })
    }

    /// Convex hull of a point set (monotone chain). Collinear input gives a
    /// segment, a single point gives a zero-radius disk.
    pub fn hull(points: &[Complex]) -> Result<Self> {
        if points.is_empty() {
            return Err(AglError::InvalidRegion("hull of an empty point set".into()));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        pts.dedup();
        if pts.len() == 1 {
            return Self::disk(pts[0], 0.0);
        }
        let mut lower: Vec<Complex> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Complex> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        if lower.len() < 3 {
            return Ok(Self::segment(pts[0], pts[pts.len() - 1]));
        }
        Self::polygon(lower).or_else(|_| Ok(Self::segment(pts[0], pts[pts.len() - 1])))
    }

    /// Sup of pairwise distances.
    pub fn diameter(&self) -> f64 {
        match self {
            Self::Disk { radius, .. } => 2.0 * radius,
            Self::Segment { a, b } => (a - b).norm(),
            Self::Polygon { vertices } => {
                let mut best = 0.0f64;
                for (i, &p) in vertices.iter().enumerate() {
                    for &q in &vertices[i + 1..] {
                        best = best.max((p - q).norm());
                    }
                }
                best
            }
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            Self::Disk { radius, .. } => TAU * radius,
            Self::Segment { a, b } => 2.0 * (a - b).norm(),
            Self::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).map(|i| (vertices[(i + 1) % n] - vertices[i]).norm()).sum()
            }
        }
    }

    /// `(d(z, K), w₀)` with `w₀` the unique closest point of K.
    pub fn distance(&self, z: Complex) -> (f64, Complex) {
        match self {
            Self::Disk { center, radius } => {
                let r = (z - center).norm();
                if r <= *radius {
                    (0.0, z)
                } else {
                    (r - radius, center + (z - center) * (radius / r))
                }
            }
            Self::Segment { a, b } => {
                let w = project_onto_segment(z, *a, *b);
                ((z - w).norm(), w)
            }
            Self::Polygon { vertices } => {
                let n = vertices.len();
                let inside = (0..n).all(|i| cross(vertices[i], vertices[(i + 1) % n], z) >= 0.0);
                if inside {
                    return (0.0, z);
                }
                (0..n)
                    .map(|i| {
                        let w = project_onto_segment(z, vertices[i], vertices[(i + 1) % n]);
                        ((z - w).norm(), w)
                    })
                    .min_by(|x, y| x.0.total_cmp(&y.0))
                    .expect("polygon has vertices")
            }
        }
    }

    pub fn dist(&self, z: Complex) -> f64 {
        self.distance(z).0
    }

    /// `d(z, K)` outside K, minus the distance to the boundary inside.
    pub fn signed_distance(&self, z: Complex) -> f64 {
        match self {
            Self::Disk { center, radius } => (z - center).norm() - radius,
            Self::Segment { .. } => self.dist(z),
            Self::Polygon { vertices } => {
                let d = self.dist(z);
                if d > 0.0 {
                    return d;
                }
                let n = vertices.len();
                -(0..n)
                    .map(|i| (z - project_onto_segment(z, vertices[i], vertices[(i + 1) % n])).norm())
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Closed ε-neighbourhood membership: `d(z, K) <= eps + membership_tol`.
    pub fn in_neighborhood(&self, z: Complex, eps: f64, membership_tol: f64) -> bool {
        self.dist(z) <= eps + membership_tol
    }

    pub fn centroid(&self) -> Complex {
        match self {
            Self::Disk { center, .. } => *center,
            Self::Segment { a, b } => (a + b) / 2.0,
            Self::Polygon { vertices } => {
                let n = vertices.len();
                let mut area = 0.0;
                let mut acc = Complex::new(0.0, 0.0);
                for i in 0..n {
                    let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                    let w = p.re * q.im - q.re * p.im;
                    area += w;
                    acc += (p + q) * w;
                }
                acc / (3.0 * area)
            }
        }
    }

    /// The image of K under `z ↦ c·z`.
    pub fn scaled(&self, c: Complex) -> Self {
        match self {
            Self::Disk { center, radius } => Self::Disk {
                center: center * c,
                radius: radius * c.norm(),
            },
            Self::Segment { a, b } => Self::Segment { a: a * c, b: b * c },
            Self::Polygon { vertices } => Self::Polygon {
                vertices: vertices.iter().map(|v| v * c).collect(),
            },
        }
    }

    /// Uniform sample from K (polar method for disks, bounding-box rejection for polygons).
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex {
        match self {
            Self::Disk { center, radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                center + Complex::from_polar(r, TAU * rng.random::<f64>())
            }
            Self::Segment { a, b } => a + (b - a) * rng.random::<f64>(),
            Self::Polygon { vertices } => {
                let (lo, hi) = bounding_box(vertices);
                loop {
                    let z = Complex::new(
                        lo.re + (hi.re - lo.re) * rng.random::<f64>(),
                        lo.im + (hi.im - lo.im) * rng.random::<f64>(),
                    );
                    if self.dist(z) == 0.0 {
                        return z;
                    }
                }
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Complex, Complex) {
        match self {
            Self::Disk { center, radius } => (
                center - Complex::new(*radius, *radius),
                center + Complex::new(*radius, *radius),
            ),
            Self::Segment { a, b } => bounding_box(&[*a, *b]),
            Self::Polygon { vertices } => bounding_box(vertices),
        }
    }

    /// Outward offset curve `{z : d(z, K) = d}` sampled counterclockwise with
    /// arc-length spacing at most `perimeter / min_samples`.
    pub fn offset_contour(&self, d: f64, min_samples: usize) -> Result<OffsetContour> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(AglError::InvalidArgument(format!("offset distance {d} must be positive")));
        }
        let min_samples = min_samples.max(3);
        let perimeter = self.perimeter() + TAU * d;
        let spacing = perimeter / min_samples as f64;
        let samples = match self {
            Self::Disk { center, radius } => {
                let r = radius + d;
                (0..min_samples)
                    .map(|j| center + Complex::from_polar(r, TAU * j as f64 / min_samples as f64))
                    .collect()
            }
            Self::Segment { a, b } if a == b => (0..min_samples)
                .map(|j| a + Complex::from_polar(d, TAU * j as f64 / min_samples as f64))
                .collect(),
            Self::Segment { a, b } => offset_chain(&[*a, *b], d, spacing),
            Self::Polygon { vertices } => offset_chain(vertices, d, spacing),
        };
        Ok(OffsetContour {
            samples,
            offset_distance: d,
            region: self.clone(),
        })
    }
}

fn bounding_box(points: &[Complex]) -> (Complex, Complex) {
    let mut lo = Complex::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.re = lo.re.min(p.re);
        lo.im = lo.im.min(p.im);
        hi.re = hi.re.max(p.re);
        hi.im = hi.im.max(p.im);
    }
    (lo, hi)
}

/// Offset of a closed counterclockwise chain: translated edges joined by
/// arcs of radius `d` about each vertex. Two vertices give a stadium.
fn offset_chain(vertices: &[Complex], d: f64, spacing: f64) -> Vec<Complex> {
    let n = vertices.len();
    let normal = |i: usize| {
        let e = vertices[(i + 1) % n] - vertices[i];
        // outward normal of a counterclockwise edge points to its right
        Complex::new(e.im, -e.re) / e.norm()
    };
    let mut out = Vec::new();
    for i in 0..n {
        let (p, q) = (vertices[i], vertices[(i + 1) % n]);
        let nrm = normal(i);
        let len = (q - p).norm();
        let steps = (len / spacing).ceil().max(1.0) as usize;
        for s in 0..steps {
            let t = s as f64 / steps as f64;
            out.push(p + (q - p) * t + nrm * d);
        }
        let start = nrm.arg();
        let mut sweep = normal((i + 1) % n).arg() - start;
        if sweep <= 0.0 {
            sweep += TAU;
        }
        if n == 2 {
            sweep = PI;
        }
        let steps = (sweep * d / spacing).ceil().max(1.0) as usize;
        for s in 0..steps {
            let angle = start + sweep * s as f64 / steps as f64;
            out.push(q + Complex::from_polar(d, angle));
        }
    }
    out
}

/// Closed sampled curve at constant distance from a region; the first
/// sample is not repeated at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetContour {
    pub samples: Vec<Complex>,
    pub offset_distance: f64,
    pub region: ConvexRegion,
}

impl OffsetContour {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Length of the sampled polygon, closing segment included.
    pub fn polyline_length(&self) -> f64 {
        let n = self.samples.len();
        (0..n)
            .map(|i| (self.samples[(i + 1) % n] - self.samples[i]).norm())
            .sum()
    }

    /// Same curve with at least `min_samples` samples.
    pub fn refined(&self, min_samples: usize) -> Result<Self> {
        self.region.offset_contour(self.offset_distance, min_samples)
    }

    /// Winding number of the sampled polygon about `z` (angle summation).
    pub fn winds_around(&self, z: Complex) -> i64 {
        let n = self.samples.len();
        let total: f64 = (0..n)
            .map(|i| ((self.samples[(i + 1) % n] - z) / (self.samples[i] - z)).arg())
            .sum();
        (total / TAU).round() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn unit_square() -> ConvexRegion {
        ConvexRegion::polygon(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)]).unwrap()
    }

    #[test]
    fn diameters() {
        assert_eq!(ConvexRegion::unit_disk().diameter(), 2.0);
        assert_eq!(ConvexRegion::segment(c(0.0, 0.0), c(1.0, 0.0)).diameter(), 1.0);
        assert!((unit_square().diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn distances() {
        let (d, w) = ConvexRegion::unit_disk().distance(c(2.0, 0.0));
        assert_eq!((d, w), (1.0, c(1.0, 0.0)));
        let (d, w) = ConvexRegion::segment(c(0.0, 0.0), c(1.0, 0.0)).distance(c(0.0, 1.0));
        assert_eq!((d, w), (1.0, c(0.0, 0.0)));
        let z = c(0.3, 0.4);
        assert_eq!(unit_square().distance(z), (0.0, z));
        assert_eq!(ConvexRegion::unit_disk().distance(z), (0.0, z));
        let (d, w) = unit_square().distance(c(2.0, 2.0));
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(w, c(1.0, 1.0));
    }

    #[test]
    fn neighborhood_is_closed() {
        let k = ConvexRegion::unit_disk();
        let tol = 1e-9;
        assert!(k.in_neighborhood(c(1.5, 0.0), 0.5, tol));
        assert!(!k.in_neighborhood(c(1.5 + 10.0 * tol, 0.0), 0.5, tol));
        assert!(k.in_neighborhood(c(0.2, -0.1), 0.0, tol));
    }

    #[test]
    fn rejects_bad_polygons() {
        assert!(ConvexRegion::polygon(vec![c(0.0, 0.0), c(0.0, 1.0), c(1.0, 1.0), c(1.0, 0.0)]).is_err());
        assert!(ConvexRegion::polygon(vec![c(0.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(ConvexRegion::polygon(vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]).is_err());
        assert!(ConvexRegion::disk(c(0.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let k: ConvexRegion = serde_json::from_str(r#"{"disk":{"center":[0,1],"radius":2}}"#).unwrap();
        assert_eq!(k, ConvexRegion::disk(c(0.0, 1.0), 2.0).unwrap());
        let s = serde_json::to_string(&unit_square()).unwrap();
        assert!(s.starts_with(r#"{"polygon":{"vertices":[[0.0,0.0]"#));
        assert_eq!(serde_json::from_str::<ConvexRegion>(&s).unwrap(), unit_square());
        assert!(serde_json::from_str::<ConvexRegion>(r#"{"polygon":{"vertices":[[0,0],[0,1],[1,0]]}}"#).is_err());
    }

    #[test]
    fn hull_cases() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.2), c(1.0, 1.0), c(0.0, 1.0)];
        assert_eq!(ConvexRegion::hull(&pts).unwrap(), unit_square());
        assert_eq!(
            ConvexRegion::hull(&[c(0.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]).unwrap(),
            ConvexRegion::segment(c(0.0, 0.0), c(2.0, 0.0))
        );
        assert_eq!(ConvexRegion::hull(&[c(3.0, 1.0)]).unwrap().diameter(), 0.0);
    }

    #[test]
    fn disk_offset_is_circle() {
        let g = ConvexRegion::unit_disk().offset_contour(0.75, 64).unwrap();
        assert_eq!(g.len(), 64);
        for z in &g.samples {
            assert!((z.norm() - 1.75).abs() < 1e-14);
        }
        assert_eq!(g.winds_around(c(0.0, 0.0)), 1);
    }

    #[test]
    fn segment_offset_is_stadium() {
        let k = ConvexRegion::segment(c(0.0, 0.0), c(1.0, 0.0));
        let g = k.offset_contour(0.5, 400).unwrap();
        let expected = 2.0 + PI;
        assert!((g.polyline_length() - expected).abs() < 1e-3);
        assert!(g.samples.iter().any(|z| (z - c(0.5, -0.5)).norm() < 0.02));
        assert!(g.samples.iter().any(|z| (z - c(0.5, 0.5)).norm() < 0.02));
        for z in &g.samples {
            assert!((k.dist(*z) - 0.5).abs() < 1e-12);
        }
        assert_eq!(g.winds_around(c(0.5, 0.0)), 1);
    }

    #[test]
    fn square_offset_perimeter() {
        let g = unit_square().offset_contour(0.1, 2000).unwrap();
        let expected = 4.0 + TAU * 0.1;
        // chords undershoot the arcs by about L·h²/(24d²)
        assert!((g.polyline_length() - expected).abs() < 5e-5, "{}", g.polyline_length());
        let spacing = expected / 2000.0;
        let n = g.len();
        for i in 0..n {
            assert!((g.samples[(i + 1) % n] - g.samples[i]).norm() <= spacing + 1e-12);
        }
    }

    #[test]
    fn point_region_offset() {
        let k = ConvexRegion::segment(c(1.0, 1.0), c(1.0, 1.0));
        let g = k.offset_contour(0.2, 32).unwrap();
        assert!(g.samples.iter().all(|z| ((z - c(1.0, 1.0)).norm() - 0.2).abs() < 1e-14));
    }

    #[test]
    fn polygon_centroid() {
        assert!((unit_square().centroid() - c(0.5, 0.5)).norm() < 1e-15);
    }

    fn region_strategy() -> impl Strategy<Value = ConvexRegion> {
        prop_oneof![
            (-2.0..2.0f64, -2.0..2.0f64, 0.0..2.0f64)
                .prop_map(|(x, y, r)| ConvexRegion::disk(c(x, y), r).unwrap()),
            (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
                .prop_map(|(a, b, x, y)| ConvexRegion::segment(c(a, b), c(x, y))),
            proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 3..9).prop_map(|pts| {
                let pts: Vec<Complex> = pts.into_iter().map(|(x, y)| c(x, y)).collect();
                ConvexRegion::hull(&pts).unwrap()
            }),
        ]
    }

    fn point() -> impl Strategy<Value = Complex> {
        (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| c(x, y))
    }

    proptest! {
        #[test]
        fn offset_samples_sit_at_offset(k in region_strategy(), d in 0.01..2.0f64) {
            let g = k.offset_contour(d, 200).unwrap();
            for z in &g.samples {
                prop_assert!((k.dist(*z) - d).abs() <= 1e-9);
            }
            prop_assert_eq!(g.winds_around(k.centroid()), 1);
        }

        #[test]
        fn neighborhood_monotone(k in region_strategy(), z in point(), e1 in 0.0..3.0f64, extra in 0.0..3.0f64) {
            if k.in_neighborhood(z, e1, 1e-9) {
                prop_assert!(k.in_neighborhood(z, e1 + extra, 1e-9));
            }
        }

        #[test]
        fn distance_is_convex(k in region_strategy(), z1 in point(), z2 in point(), t in 0.0..1.0f64) {
            let mid = z1 * t + z2 * (1.0 - t);
            prop_assert!(k.dist(mid) <= t * k.dist(z1) + (1.0 - t) * k.dist(z2) + 1e-12);
        }

        #[test]
        fn distance_scales(k in region_strategy(), z in point(), re in -3.0..3.0f64, im in -3.0..3.0f64) {
            let s = c(re, im);
            prop_assume!(s.norm() > 1e-3);
            let lhs = k.scaled(s).dist(z * s);
            let rhs = s.norm() * k.dist(z);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }

        #[test]
        fn closest_point_is_in_region(k in region_strategy(), z in point()) {
            let (d, w) = k.distance(z);
            prop_assert!(k.dist(w) <= 1e-12);
            prop_assert!(((z - w).norm() - d).abs() <= 1e-12);
        }
    }
}
