//! Static SVG scenes of an instance: K, K_ε, zeros, poles, critical points
//! and, when a certificate was attempted, the contour and exclusion balls.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::certifier::ExclusionSet;
use crate::rational::Complex;
use crate::region::{ConvexRegion, OffsetContour};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub region: ConvexRegion,
    pub eps: f64,
    pub zeros: Vec<Complex>,
    pub poles: Vec<Complex>,
    pub critical: Vec<Complex>,
    pub contour: Option<OffsetContour>,
    pub exclusions: Option<ExclusionSet>,
}

impl Scene {
    pub fn new(region: ConvexRegion, eps: f64) -> Self {
        Self {
            region,
            eps,
            zeros: Vec::new(),
            poles: Vec::new(),
            critical: Vec::new(),
            contour: None,
            exclusions: None,
        }
    }

    /// World-space box `(min, max)` holding every drawn object.
    pub fn extent(&self) -> (Complex, Complex) {
        let (lo, hi) = self.region.bounds();
        let grow = Complex::new(self.eps.max(0.0), self.eps.max(0.0));
        let mut lo = lo - grow;
        let mut hi = hi + grow;
        let mut include = |z: Complex, r: f64| {
            lo.re = lo.re.min(z.re - r);
            lo.im = lo.im.min(z.im - r);
            hi.re = hi.re.max(z.re + r);
            hi.im = hi.im.max(z.im + r);
        };
        for &z in self.zeros.iter().chain(&self.poles).chain(&self.critical) {
            include(z, 0.0);
        }
        if let Some(c) = &self.contour {
            c.samples.iter().for_each(|&z| include(z, 0.0));
        }
        if let Some(e) = &self.exclusions {
            e.balls.iter().for_each(|b| include(b.center, b.radius));
        }
        (lo, hi)
    }
}

const WIDTH: f64 = 640.0;
/// Fraction of the larger side added as margin on every side.
const PADDING: f64 = 0.08;

struct Viewport {
    lo: Complex,
    scale: f64,
    height: f64,
}

impl Viewport {
    fn new(scene: &Scene) -> Self {
        let (mut lo, mut hi) = scene.extent();
        let side = (hi.re - lo.re).max(hi.im - lo.im);
        let side = if side > 0.0 && side.is_finite() { side } else { 1.0 };
        let pad = Complex::new(PADDING * side, PADDING * side);
        // keep a degenerate direction (e.g. a horizontal segment) visible
        let center = (lo + hi) / 2.0;
        let min_half = 0.25 * side;
        lo = Complex::new(lo.re.min(center.re - min_half), lo.im.min(center.im - min_half)) - pad;
        hi = Complex::new(hi.re.max(center.re + min_half), hi.im.max(center.im + min_half)) + pad;
        let scale = WIDTH / (hi.re - lo.re);
        Self {
            lo,
            scale,
            height: (hi.im - lo.im) * scale,
        }
    }

    fn map(&self, z: Complex) -> (f64, f64) {
        ((z.re - self.lo.re) * self.scale, self.height - (z.im - self.lo.im) * self.scale)
    }
}

fn points_attr(view: &Viewport, pts: &[Complex]) -> String {
    pts.iter()
        .map(|&z| {
            let (x, y) = view.map(z);
            format!("{x:.3},{y:.3}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn region_shape(out: &mut String, view: &Viewport, region: &ConvexRegion, style: &str) {
    match region {
        ConvexRegion::Disk { center, radius } => {
            let (x, y) = view.map(*center);
            let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" {style}/>"#, radius * view.scale);
        }
        ConvexRegion::Segment { a, b } => {
            let (x1, y1) = view.map(*a);
            let (x2, y2) = view.map(*b);
            let _ = writeln!(
                out,
                r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke-width="4" stroke-linecap="round" {style}/>"#
            );
        }
        ConvexRegion::Polygon { vertices } => {
            let _ = writeln!(out, r#"<polygon points="{}" {style}/>"#, points_attr(view, vertices));
        }
    }
}

/// Byte-deterministic SVG 1.1 document for `scene`.
pub fn render_svg(scene: &Scene) -> String {
    let view = Viewport::new(scene);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{h:.0}" viewBox="0 0 {WIDTH:.3} {h:.3}">"#,
        h = view.height
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);

    let _ = writeln!(out, r#"<g id="region">"#);
    region_shape(&mut out, &view, &scene.region, r##"fill="#cfe0f5" stroke="#2b5d9a""##);
    let _ = writeln!(out, "</g>");

    if scene.eps > 0.0 {
        let _ = writeln!(out, r#"<g id="neighborhood">"#);
        let dashed = r##"fill="none" stroke="#2b5d9a" stroke-dasharray="6,4""##;
        match &scene.region {
            ConvexRegion::Disk { center, radius } => {
                let grown = ConvexRegion::Disk { center: *center, radius: radius + scene.eps };
                region_shape(&mut out, &view, &grown, dashed);
            }
            region => {
                if let Ok(c) = region.offset_contour(scene.eps, 256) {
                    let _ = writeln!(out, r#"<polygon points="{}" {dashed}/>"#, points_attr(&view, &c.samples));
                }
            }
        }
        let _ = writeln!(out, "</g>");
    }

    if let Some(excl) = &scene.exclusions {
        let _ = writeln!(out, r#"<g id="exclusions">"#);
        for b in &excl.balls {
            let (x, y) = view.map(b.center);
            let _ = writeln!(
                out,
                r##"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="#e07b39" fill-opacity="0.12" stroke="#e07b39" stroke-opacity="0.3"/>"##,
                b.radius * view.scale
            );
        }
        let _ = writeln!(out, "</g>");
    }

    if let Some(contour) = &scene.contour {
        let mut closed = contour.samples.clone();
        if let Some(&first) = closed.first() {
            closed.push(first);
        }
        let _ = writeln!(
            out,
            r##"<polyline id="contour" points="{}" fill="none" stroke="#7a2f9e" stroke-width="1.5"/>"##,
            points_attr(&view, &closed)
        );
    }

    let mark = 5.0;
    let _ = writeln!(out, r#"<g id="zeros">"#);
    for &z in &scene.zeros {
        let (x, y) = view.map(z);
        let _ = writeln!(out, r##"<circle cx="{x:.3}" cy="{y:.3}" r="{mark:.3}" fill="#1d1d1d"/>"##);
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g id="poles">"#);
    for &z in &scene.poles {
        let (x, y) = view.map(z);
        let _ = writeln!(
            out,
            r##"<path d="M{:.3},{:.3}L{:.3},{:.3}M{:.3},{:.3}L{:.3},{:.3}" stroke="#c0392b" stroke-width="2"/>"##,
            x - mark,
            y - mark,
            x + mark,
            y + mark,
            x - mark,
            y + mark,
            x + mark,
            y - mark
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g id="critical">"#);
    for &z in &scene.critical {
        let (x, y) = view.map(z);
        let _ = writeln!(
            out,
            r##"<polygon points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}" fill="#27ae60"/>"##,
            x,
            y - mark,
            x - mark,
            y + mark,
            x + mark,
            y + mark
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}
