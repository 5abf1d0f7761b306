//! SVG 1.1 drawings. Model y points up; SVG y points down.

use std::fmt::Write as _;

use hupa_core::tessellation::{Tessellation, Triangulation};
use hupa_core::PointPattern;

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

struct Canvas {
    out: String,
    scale: f64,
    height: f64,
}

impl Canvas {
    fn new(lengths: [f64; 2], scale: f64) -> Self {
        let (w, h) = (lengths[0] * scale, lengths[1] * scale);
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
            num(w),
            num(h),
            num(w),
            num(h)
        );
        let _ = writeln!(
            out,
            "<defs><clipPath id=\"box\"><rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\"/></clipPath></defs>",
            num(w),
            num(h)
        );
        Self { out, scale, height: lengths[1] }
    }

    fn xy(&self, p: [f64; 2]) -> (String, String) {
        (num(p[0] * self.scale), num((self.height - p[1]) * self.scale))
    }

    fn polygon_path(&self, subpaths: &[Vec<[f64; 2]>]) -> String {
        let mut d = String::new();
        for poly in subpaths {
            for (k, p) in poly.iter().enumerate() {
                let (x, y) = self.xy(*p);
                let _ = write!(d, "{}{x} {y} ", if k == 0 { "M" } else { "L" });
            }
            d.push_str("Z ");
        }
        d.pop();
        d
    }

    fn circle(&mut self, p: [f64; 2], r: f64, class: &str) {
        let (x, y) = self.xy(p);
        let _ = writeln!(self.out, "<circle class=\"{class}\" cx=\"{x}\" cy=\"{y}\" r=\"{}\"/>", num(r));
    }

    fn outline(&mut self, lengths: [f64; 2]) {
        let _ = writeln!(
            self.out,
            "<rect class=\"box\" x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>",
            num(lengths[0] * self.scale),
            num(lengths[1] * self.scale)
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// Periodic copies of a polygon that reach into the box.
fn images(poly: &[[f64; 2]], lengths: [f64; 2]) -> Vec<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    for sx in -1..=1 {
        for sy in -1..=1 {
            let shifted: Vec<[f64; 2]> = poly
                .iter()
                .map(|p| [p[0] + sx as f64 * lengths[0], p[1] + sy as f64 * lengths[1]])
                .collect();
            let lo = shifted.iter().fold([f64::INFINITY; 2], |a, p| [a[0].min(p[0]), a[1].min(p[1])]);
            let hi = shifted.iter().fold([f64::NEG_INFINITY; 2], |a, p| [a[0].max(p[0]), a[1].max(p[1])]);
            if lo[0] < lengths[0] && hi[0] > 0.0 && lo[1] < lengths[1] && hi[1] > 0.0 {
                out.push(shifted);
            }
        }
    }
    out
}

fn marker_radius(n: usize, lengths: [f64; 2], scale: f64) -> f64 {
    let spacing = (lengths[0] * lengths[1] / n.max(1) as f64).sqrt();
    (0.08 * spacing * scale).max(1.0)
}

pub fn pattern(p: &PointPattern, scale: f64) -> String {
    let l = p.domain().lengths();
    let lengths = [l[0], l[1]];
    let mut c = Canvas::new(lengths, scale);
    let r = match p.hard_radius() {
        Some(h) if h > 0.0 => h * scale,
        _ => marker_radius(p.len(), lengths, scale),
    };
    c.out.push_str("<g fill=\"black\" stroke=\"none\">\n");
    for q in p.points() {
        c.circle([q[0], q[1]], r, "point");
    }
    c.out.push_str("</g>\n");
    c.outline(lengths);
    c.finish()
}

fn faces(lengths: [f64; 2], scale: f64, polys: Vec<Vec<[f64; 2]>>, points: &[[f64; 2]], class: &str) -> String {
    let mut c = Canvas::new(lengths, scale);
    c.out.push_str("<g clip-path=\"url(#box)\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\">\n");
    for poly in &polys {
        let d = c.polygon_path(&images(poly, lengths));
        let _ = writeln!(c.out, "<path class=\"{class}\" d=\"{d}\"/>");
    }
    c.out.push_str("</g>\n<g fill=\"#b03030\" stroke=\"none\">\n");
    let r = marker_radius(points.len(), lengths, scale);
    for p in points {
        c.circle(*p, r, "generator");
    }
    c.out.push_str("</g>\n");
    c.outline(lengths);
    c.finish()
}

pub fn tessellation(t: &Tessellation, scale: f64) -> String {
    let l = t.domain().lengths();
    let polys = t.cells().iter().map(|c| c.vertices.clone()).collect();
    faces([l[0], l[1]], scale, polys, t.generators(), "cell")
}

pub fn triangulation(t: &Triangulation, scale: f64) -> String {
    let polys = (0..t.triangles().len()).map(|k| t.triangle_positions(k).to_vec()).collect();
    faces(t.lengths(), scale, polys, t.points(), "triangle")
}
