//! SVG drawings of the boxes and enclosures in a certificate.

use chaos_cert_core::certify::MarkovRect;
use chaos_cert_core::geometry::EnclosureSet;
use chaos_cert_core::Box2;
use clap::ValueEnum;
use svg::node::element::{Group, Line, Polygon, Rectangle, Text};
use svg::Document;

use crate::config::ConfigError;
use crate::document::{CertificateDocument, Evidence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum View {
    /// Fundamental domain `[0, L) x R`.
    Annulus,
    /// Lifted coordinates with gridlines at multiples of `L`.
    Cover,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone)]
struct Shape {
    stage: usize,
    points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
struct Family {
    label: String,
    shapes: Vec<Shape>,
}

impl Family {
    fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            shapes: Vec::new(),
        }
    }

    fn push_box(&mut self, stage: usize, b: &Box2) {
        let (x0, x1, y0, y1) = (b.x.lo(), b.x.hi(), b.y.lo(), b.y.hi());
        self.shapes.push(Shape {
            stage,
            points: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
        });
    }

    fn push_set(&mut self, set: &EnclosureSet, l: f64) {
        for m in &set.members {
            let off = m.shift as f64 * l;
            let b = &m.planar;
            let (x0, x1) = (b.x.lo() + off, b.x.hi() + off);
            let (y0, y1) = (b.y.lo(), b.y.hi());
            self.shapes.push(Shape {
                stage: set.stage,
                points: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
            });
        }
    }

    fn push_rect(&mut self, stage: usize, r: &MarkovRect) {
        let corner = |s: f64, t: f64| {
            [
                r.center[0] + s * r.u[0] + t * r.v[0],
                r.center[1] + s * r.u[1] + t * r.v[1],
            ]
        };
        self.shapes.push(Shape {
            stage,
            points: vec![corner(-1.0, -1.0), corner(1.0, -1.0), corner(1.0, 1.0), corner(-1.0, 1.0)],
        });
    }
}

fn families(doc: &CertificateDocument, l: f64) -> Vec<Family> {
    let cfg = &doc.config;
    let mut out = Vec::new();
    let named = |name: &str| cfg.boxes.get(name).copied();
    match &doc.evidence {
        Evidence::Dpd(_) | Evidence::Chaos(_) => {
            let dpd = match &doc.evidence {
                Evidence::Dpd(d) => d,
                Evidence::Chaos(c) => &c.dpd,
                _ => unreachable!(),
            };
            for (i, name) in doc.selection.iter().enumerate().take(2) {
                let mut f = Family::new(name.clone());
                let u = if i == 0 { dpd.u0 } else { dpd.u1 };
                if dpd.chains[i].is_empty() {
                    f.push_box(0, &u);
                }
                for set in &dpd.chains[i] {
                    f.push_set(set, l);
                }
                out.push(f);
            }
            if let Evidence::Chaos(c) = &doc.evidence {
                let mut f = Family::new("visit witnesses");
                for w in c.visit_01.iter().chain(&c.visit_10) {
                    f.push_box(0, &w.seed);
                    f.push_box(1, &w.final_enclosure.shift_x(chaos_cert_core::Interval::point(w.k as f64 * l)));
                }
                if !f.shapes.is_empty() {
                    out.push(f);
                }
            }
        }
        Evidence::Visit(legs) => {
            let mut names: Vec<&String> = legs.iter().flat_map(|g| [&g.from, &g.to]).collect();
            names.dedup();
            let mut seen = std::collections::BTreeSet::new();
            for name in names {
                if seen.insert(name.clone()) {
                    if let Some(b) = named(name) {
                        let mut f = Family::new(name.clone());
                        f.push_box(0, &b);
                        out.push(f);
                    }
                }
            }
            let mut f = Family::new("visit witnesses");
            for w in legs.iter().filter_map(|g| g.witness.as_ref()) {
                f.push_box(0, &w.seed);
                f.push_box(1, &w.final_enclosure.shift_x(chaos_cert_core::Interval::point(w.k as f64 * l)));
            }
            if !f.shapes.is_empty() {
                out.push(f);
            }
        }
        Evidence::Chain { certificate, .. } => {
            let mut disks = Family::new("disks");
            for name in &doc.selection {
                if let Some(b) = named(name) {
                    disks.push_box(0, &b);
                }
            }
            out.push(disks);
            if let Some(c) = certificate {
                let mut f = Family::new("free images");
                for set in &c.free_images {
                    f.push_set(set, l);
                }
                out.push(f);
            }
        }
        Evidence::Markov { certificate, .. } => {
            if let Some(spec) = &cfg.markov {
                let mut r = Family::new("rectangle");
                r.push_rect(0, &spec.rect);
                for &j in &spec.shifts {
                    let mut t = spec.rect;
                    t.center[0] += j as f64 * l;
                    r.push_rect(0, &t);
                }
                out.push(r);
            }
            if let Some(c) = certificate {
                let mut f = Family::new("image");
                f.push_set(&c.images.whole, l);
                out.push(f);
            }
        }
    }
    out
}

/// Move a shape into the fundamental domain: boxes are split at `x = L`,
/// other polygons are translated by their centroid.
fn to_annulus(shape: &Shape, l: f64) -> Vec<Shape> {
    let xs: Vec<f64> = shape.points.iter().map(|p| p[0]).collect();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let is_box = shape.points.len() == 4
        && shape.points[0][1] == shape.points[1][1]
        && shape.points[1][0] == shape.points[2][0]
        && shape.points[2][1] == shape.points[3][1];
    if !is_box {
        let cx = xs.iter().sum::<f64>() / xs.len() as f64;
        let dx = l * (cx / l).floor();
        return vec![Shape {
            stage: shape.stage,
            points: shape.points.iter().map(|p| [p[0] - dx, p[1]]).collect(),
        }];
    }
    let (y0, y1) = (shape.points[0][1], shape.points[2][1]);
    let rect = |a: f64, b: f64| Shape {
        stage: shape.stage,
        points: vec![[a, y0], [b, y0], [b, y1], [a, y1]],
    };
    if hi - lo >= l {
        return vec![rect(0.0, l)];
    }
    let dx = l * (lo / l).floor();
    let (a, b) = (lo - dx, hi - dx);
    if b <= l {
        vec![rect(a, b)]
    } else {
        vec![rect(a, l), rect(0.0, b - l)]
    }
}

fn points_attr(points: &[[f64; 2]]) -> String {
    points
        .iter()
        .map(|p| format!("{},{}", p[0], -p[1]))
        .collect::<Vec<_>>()
        .join(" ")
}

fn opacity(stage: usize) -> f64 {
    (0.6 * 0.8f64.powi(stage as i32)).max(0.1)
}

/// Outlines of the stage-0 shapes shifted by `jL`, `j != 0`, that fit in `[x0, x1]`.
fn translates(f: &Family, l: f64, x0: f64, x1: f64, stroke: f64) -> Group {
    let mut g = Group::new()
        .set("class", "translates")
        .set("fill", "none")
        .set("stroke-dasharray", format!("{} {}", 2.0 * stroke, stroke));
    for s in f.shapes.iter().filter(|s| s.stage == 0) {
        let lo = s.points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = s.points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        let (j0, j1) = (((x0 - lo) / l).ceil() as i64, ((x1 - hi) / l).floor() as i64);
        for j in (j0..=j1).filter(|&j| j != 0) {
            let dx = j as f64 * l;
            let pts: Vec<[f64; 2]> = s.points.iter().map(|p| [p[0] + dx, p[1]]).collect();
            g = g.add(Polygon::new().set("points", points_attr(&pts)));
        }
    }
    g
}

/// Render `doc` as a standalone SVG string.
pub fn render(doc: &CertificateDocument, view: View) -> Result<String, ConfigError> {
    let l = doc.config.build_map()?.circumference_f64();
    let mut fams = families(doc, l);
    if view == View::Annulus {
        for f in &mut fams {
            f.shapes = f.shapes.iter().flat_map(|s| to_annulus(s, l)).collect();
        }
    }
    for f in &mut fams {
        f.shapes.retain(|s| s.points.iter().all(|p| p[0].is_finite() && p[1].is_finite()));
    }

    let mut bb = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for p in fams.iter().flat_map(|f| &f.shapes).flat_map(|s| &s.points) {
        bb = [bb[0].min(p[0]), bb[1].max(p[0]), bb[2].min(p[1]), bb[3].max(p[1])];
    }
    if view == View::Annulus || !bb[0].is_finite() {
        bb[0] = bb[0].min(0.0);
        bb[1] = bb[1].max(l);
    }
    if !bb[2].is_finite() {
        bb[2] = -0.5 * l;
        bb[3] = 0.5 * l;
    }
    let span = (bb[1] - bb[0]).max(bb[3] - bb[2]).max(1e-9);
    let pad = 0.04 * span;
    let font = 0.035 * span;
    let legend_h = (fams.len() as f64 + 0.5) * 1.5 * font;
    let label_chars = fams.iter().map(|f| f.label.len() + 12).max().unwrap_or(0) as f64;
    let legend_w = (2.5 + 0.6 * label_chars) * font;
    let vx0 = bb[0] - pad;
    let vx1 = (bb[1] + pad).max(vx0 + legend_w);
    let (gy0, gy1) = (bb[2] - pad, bb[3] + pad);
    // SVG y grows downwards: the legend sits above the geometry.
    let vy0 = -gy1 - legend_h;
    let vh = gy1 - gy0 + legend_h;

    let stroke = 0.002 * span;
    let mut grid = Group::new()
        .set("id", "gridlines")
        .set("stroke", "#999999")
        .set("stroke-width", stroke)
        .set("stroke-dasharray", format!("{} {}", 4.0 * stroke, 2.0 * stroke));
    let (j0, j1) = ((vx0 / l).ceil() as i64, (vx1 / l).floor() as i64);
    for j in j0..=j1 {
        let x = j as f64 * l;
        grid = grid.add(
            Line::new()
                .set("x1", x)
                .set("x2", x)
                .set("y1", -gy1)
                .set("y2", -gy0),
        );
    }

    let mut doc_svg = Document::new()
        .set("viewBox", (vx0, vy0, vx1 - vx0, vh))
        .set("width", 800)
        .set("height", (800.0 * vh / (vx1 - vx0)).round().max(1.0))
        .add(grid);

    let mut legend = Group::new().set("id", "legend").set("font-size", font).set("font-family", "sans-serif");
    for (i, f) in fams.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let max_stage = f.shapes.iter().map(|s| s.stage).max().unwrap_or(0);
        let mut g = Group::new()
            .set("class", "family")
            .set("data-label", f.label.as_str())
            .set("fill", color)
            .set("stroke", color)
            .set("stroke-width", 0.5 * stroke);
        for stage in 0..=max_stage {
            let shapes: Vec<&Shape> = f.shapes.iter().filter(|s| s.stage == stage).collect();
            if shapes.is_empty() {
                continue;
            }
            let mut sg = Group::new()
                .set("class", "stage")
                .set("data-stage", stage)
                .set("fill-opacity", opacity(stage));
            for s in shapes {
                sg = sg.add(Polygon::new().set("points", points_attr(&s.points)));
            }
            g = g.add(sg);
        }
        if view == View::Cover {
            g = g.add(translates(f, l, bb[0], bb[1], stroke));
        }
        doc_svg = doc_svg.add(g);

        let y = vy0 + (i as f64 + 1.0) * 1.5 * font;
        legend = legend
            .add(
                Rectangle::new()
                    .set("x", vx0 + font)
                    .set("y", y - 0.8 * font)
                    .set("width", font)
                    .set("height", font * 0.8)
                    .set("fill", color),
            )
            .add(
                Text::new(format!("{} (stages 0-{max_stage})", f.label))
                    .set("x", vx0 + 2.5 * font)
                    .set("y", y),
            );
    }
    Ok(doc_svg.add(legend).to_string())
}
