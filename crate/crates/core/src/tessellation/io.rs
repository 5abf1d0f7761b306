//! `#hupa-tess v1` text export.
//!
//! ```text
//! #hupa-tess v1
//! rule=voronoi lengths=Lx,Ly generators=N vertices=V faces=F
//! g x y          (N lines, voronoi only)
//! v x y          (V lines)
//! f id area sides v:ox:oy ...
//! ```
//!
//! A face corner `v:ox:oy` is vertex `v` shifted by `(ox, oy)` periods.

use std::fmt::Write as _;
use std::path::Path;

use super::{Tessellation, Triangulation};
use crate::pattern::{format_coord, PatternError};

pub const TESS_MAGIC: &str = "#hupa-tess v1";

fn header(out: &mut String, rule: &str, lengths: [f64; 2], generators: usize, vertices: usize, faces: usize) {
    out.push_str(TESS_MAGIC);
    out.push('\n');
    let _ = writeln!(
        out,
        "rule={rule} lengths={},{} generators={generators} vertices={vertices} faces={faces}",
        lengths[0], lengths[1]
    );
}

fn point_line(out: &mut String, tag: char, p: [f64; 2]) {
    let _ = writeln!(out, "{tag} {} {}", format_coord(p[0]), format_coord(p[1]));
}

fn face_line(out: &mut String, id: usize, area: f64, corners: impl ExactSizeIterator<Item = (u32, [i32; 2])>) {
    let _ = write!(out, "f {id} {} {}", format_coord(area), corners.len());
    for (v, [ox, oy]) in corners {
        let _ = write!(out, " {v}:{ox}:{oy}");
    }
    out.push('\n');
}

pub fn tessellation_to_text(tess: &Tessellation) -> String {
    let l = tess.domain().lengths();
    let mut out = String::new();
    header(&mut out, "voronoi", [l[0], l[1]], tess.generators().len(), tess.vertices().len(), tess.cells().len());
    for g in tess.generators() {
        point_line(&mut out, 'g', *g);
    }
    for v in tess.vertices() {
        point_line(&mut out, 'v', *v);
    }
    for cell in tess.cells() {
        face_line(&mut out, cell.generator, cell.area, cell.vertex_ids.iter().copied());
    }
    out
}

pub fn triangulation_to_text(tri: &Triangulation) -> String {
    let mut out = String::new();
    header(&mut out, "delaunay", tri.lengths(), 0, tri.points().len(), tri.triangles().len());
    for p in tri.points() {
        point_line(&mut out, 'v', *p);
    }
    for (t, refs) in tri.triangles().iter().enumerate() {
        face_line(&mut out, t, tri.triangle_area(t), refs.iter().map(|r| (r.index, r.offset)));
    }
    out
}

pub fn save_text(text: &str, path: impl AsRef<Path>) -> Result<(), PatternError> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|source| PatternError::Io {
        path: path.display().to_string(),
        source,
    })
}
