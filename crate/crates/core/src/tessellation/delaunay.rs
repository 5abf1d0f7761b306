//! Periodic Delaunay triangulation by ghost copies.
//!
//! The pattern is tiled `(2k+1)²` times, triangulated incrementally
//! (Bowyer-Watson inside a far super-triangle), and the triangles are folded
//! back onto the torus. A triangle is kept once: in the copy where its
//! smallest vertex (by point index, then image offset) sits in the home box.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::predicates::{incircle_perturbed, orient, ImagePoint, VertexRef};
use super::TessellationError;
use crate::domain::BoxDomain;
use crate::pattern::PointPattern;

const NONE: u32 = u32::MAX;

/// Relative tolerance of the area-partition check.
pub const AREA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    domain: BoxDomain,
    points: Vec<[f64; 2]>,
    triangles: Vec<[VertexRef; 3]>,
}

impl Triangulation {
    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn lengths(&self) -> [f64; 2] {
        [self.domain.length(0), self.domain.length(1)]
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Counterclockwise vertex triples; the smallest vertex has offset `(0, 0)`.
    pub fn triangles(&self) -> &[[VertexRef; 3]] {
        &self.triangles
    }

    pub fn image(&self, v: VertexRef) -> ImagePoint {
        ImagePoint {
            base: self.points[v.index as usize],
            shift: v.offset,
        }
    }

    pub fn position(&self, v: VertexRef) -> [f64; 2] {
        self.image(v).approx(self.lengths())
    }

    pub fn triangle_positions(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].map(|v| self.position(v))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_positions(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn total_area(&self) -> f64 {
        crate::exec::compensated_sum((0..self.triangles.len()).map(|t| self.triangle_area(t)))
    }

    /// Circumcenter and circumradius of triangle `t`.
    pub fn circumcircle(&self, t: usize) -> ([f64; 2], f64) {
        circumcircle(self.triangle_positions(t))
    }

    /// Distinct torus edges, each normalized so its smaller end has offset `(0, 0)`.
    pub fn edges(&self) -> Vec<[VertexRef; 2]> {
        let mut set = BTreeSet::new();
        for tri in &self.triangles {
            for k in 0..3 {
                set.insert(normalize_edge(tri[k], tri[(k + 1) % 3]));
            }
        }
        set.into_iter().collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    /// V − E + F; zero for any triangulation of the torus.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edges().len() as i64 + self.triangles.len() as i64
    }
}

pub(crate) fn normalize_edge(a: VertexRef, b: VertexRef) -> [VertexRef; 2] {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let back = [-lo.offset[0], -lo.offset[1]];
    [lo.shifted(back), hi.shifted(back)]
}

pub(crate) fn circumcircle([a, b, c]: [[f64; 2]; 3]) -> ([f64; 2], f64) {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    ([a[0] + ux, a[1] + uy], (ux * ux + uy * uy).sqrt())
}

/// Rotates so the smallest vertex comes first, then translates it home.
fn canonical_triangle(tri: [VertexRef; 3]) -> [VertexRef; 3] {
    let k = (0..3).min_by_key(|&k| tri[k]).unwrap_or(0);
    let rotated = [tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]];
    let back = [-rotated[0].offset[0], -rotated[0].offset[1]];
    rotated.map(|v| v.shifted(back))
}

fn hilbert_index(mut x: u64, mut y: u64) -> u64 {
    const N: u64 = 1 << 16;
    let mut d = 0u64;
    let mut s = N / 2;
    while s > 0 {
        let rx = (x & s > 0) as u64;
        let ry = (y & s > 0) as u64;
        d += s * s * ((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = N - 1 - x;
                y = N - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [u32; 3],
    // n[k] is the neighbor across the edge opposite v[k]
    n: [u32; 3],
    alive: bool,
}

struct Mesh {
    pts: Vec<ImagePoint>,
    keys: Vec<VertexRef>,
    lengths: [f64; 2],
    tris: Vec<Tri>,
    stamp: Vec<u32>,
    bad: Vec<bool>,
    epoch: u32,
}

impl Mesh {
    fn orient(&self, a: u32, b: u32, c: u32) -> Ordering {
        orient(&self.pts[a as usize], &self.pts[b as usize], &self.pts[c as usize], self.lengths)
    }

    fn conflicts(&self, t: u32, p: u32) -> bool {
        let [a, b, c] = self.tris[t as usize].v;
        let e = |i: u32| (&self.pts[i as usize], self.keys[i as usize]);
        incircle_perturbed([e(a), e(b), e(c), e(p)], self.lengths) == Ordering::Greater
    }

    fn locate(&self, p: u32, start: u32) -> u32 {
        let mut t = start;
        let mut step = 0usize;
        'walk: loop {
            let tri = self.tris[t as usize];
            for j in 0..3 {
                let k = (j + step) % 3;
                let a = tri.v[(k + 1) % 3];
                let b = tri.v[(k + 2) % 3];
                if self.orient(a, b, p) == Ordering::Less {
                    t = tri.n[k];
                    step += 1;
                    continue 'walk;
                }
            }
            return t;
        }
    }

    fn mark(&mut self, t: u32, bad: bool) {
        self.stamp[t as usize] = self.epoch;
        self.bad[t as usize] = bad;
    }

    fn push_tri(&mut self, tri: Tri) -> u32 {
        self.tris.push(tri);
        self.stamp.push(0);
        self.bad.push(false);
        (self.tris.len() - 1) as u32
    }

    fn insert(&mut self, p: u32, hint: u32) -> u32 {
        self.epoch += 1;
        let t0 = self.locate(p, hint);
        self.mark(t0, true);
        let mut stack = vec![t0];
        let mut cavity = vec![t0];
        // (edge start, edge end, triangle outside, cavity triangle)
        let mut boundary: Vec<(u32, u32, u32, u32)> = Vec::new();
        while let Some(t) = stack.pop() {
            let tri = self.tris[t as usize];
            for k in 0..3 {
                let nb = tri.n[k];
                let edge = (tri.v[(k + 1) % 3], tri.v[(k + 2) % 3]);
                if nb == NONE {
                    boundary.push((edge.0, edge.1, NONE, t));
                    continue;
                }
                if self.stamp[nb as usize] == self.epoch {
                    if !self.bad[nb as usize] {
                        boundary.push((edge.0, edge.1, nb, t));
                    }
                    continue;
                }
                if self.conflicts(nb, p) {
                    self.mark(nb, true);
                    stack.push(nb);
                    cavity.push(nb);
                } else {
                    self.mark(nb, false);
                    boundary.push((edge.0, edge.1, nb, t));
                }
            }
        }
        for &t in &cavity {
            self.tris[t as usize].alive = false;
        }
        let first = self.tris.len() as u32;
        for &(e0, e1, outer, old) in &boundary {
            let id = self.push_tri(Tri {
                v: [p, e0, e1],
                n: [outer, NONE, NONE],
                alive: true,
            });
            if outer != NONE {
                let slot = self.tris[outer as usize]
                    .n
                    .iter()
                    .position(|&x| x == old)
                    .expect("outer triangle links back into the cavity");
                self.tris[outer as usize].n[slot] = id;
            }
        }
        let created: Vec<u32> = (first..self.tris.len() as u32).collect();
        for &id in &created {
            let [_, e0, e1] = self.tris[id as usize].v;
            let after = created
                .iter()
                .copied()
                .find(|&o| self.tris[o as usize].v[1] == e1)
                .expect("cavity boundary is a closed loop");
            let before = created
                .iter()
                .copied()
                .find(|&o| self.tris[o as usize].v[2] == e0)
                .expect("cavity boundary is a closed loop");
            self.tris[id as usize].n[1] = after;
            self.tris[id as usize].n[2] = before;
        }
        first
    }
}

/// Why a ghost-layer construction did not fold into a valid torus triangulation.
#[derive(Debug)]
struct FoldFailure(String);

fn build(domain: &BoxDomain, points: &[[f64; 2]], layers: i32) -> Result<Vec<[VertexRef; 3]>, FoldFailure> {
    let lengths = [domain.length(0), domain.length(1)];
    let n = points.len();
    let mut pts = Vec::new();
    let mut keys = Vec::new();
    for (k, p) in points.iter().enumerate() {
        for ox in -layers..=layers {
            for oy in -layers..=layers {
                pts.push(ImagePoint { base: *p, shift: [ox, oy] });
                keys.push(VertexRef::new(k as u32, [ox, oy]));
            }
        }
    }
    let n_ghost = pts.len();

    let lo = [-(layers as f64) * lengths[0], -(layers as f64) * lengths[1]];
    let hi = [(layers + 1) as f64 * lengths[0], (layers + 1) as f64 * lengths[1]];
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    for (s, corner) in [[-40.0, -30.0], [40.0, -30.0], [0.0, 50.0]].iter().enumerate() {
        pts.push(ImagePoint::plain([mid[0] + corner[0] * span, mid[1] + corner[1] * span]));
        keys.push(VertexRef::new(u32::MAX - 2 + s as u32, [0, 0]));
    }

    let mut order: Vec<u32> = (0..n_ghost as u32).collect();
    let scale = [65535.0 / (hi[0] - lo[0]), 65535.0 / (hi[1] - lo[1])];
    let h: Vec<u64> = pts[..n_ghost]
        .iter()
        .map(|p| {
            let a = p.approx(lengths);
            let qx = ((a[0] - lo[0]) * scale[0]).clamp(0.0, 65535.0) as u64;
            let qy = ((a[1] - lo[1]) * scale[1]).clamp(0.0, 65535.0) as u64;
            hilbert_index(qx, qy)
        })
        .collect();
    order.sort_by_key(|&i| (h[i as usize], keys[i as usize]));

    let s = n_ghost as u32;
    let mut mesh = Mesh {
        pts,
        keys,
        lengths,
        tris: Vec::with_capacity(n_ghost * 4),
        stamp: Vec::with_capacity(n_ghost * 4),
        bad: Vec::with_capacity(n_ghost * 4),
        epoch: 0,
    };
    mesh.push_tri(Tri {
        v: [s, s + 1, s + 2],
        n: [NONE; 3],
        alive: true,
    });
    let mut hint = 0;
    for &p in &order {
        hint = mesh.insert(p, hint);
    }

    let mut reps = Vec::with_capacity(2 * n);
    for tri in mesh.tris.iter().filter(|t| t.alive) {
        if tri.v.iter().any(|&v| v as usize >= n_ghost) {
            continue;
        }
        let refs = tri.v.map(|v| mesh.keys[v as usize]);
        let min = refs.iter().min().copied().unwrap_or(refs[0]);
        if min.offset != [0, 0] {
            continue;
        }
        let corners = tri.v.map(|v| mesh.pts[v as usize].approx(lengths));
        let (c, r) = circumcircle(corners);
        let inside = (0..2).all(|a| c[a] - r > lo[a] && c[a] + r < hi[a]);
        if !(inside && r.is_finite()) {
            return Err(FoldFailure(format!(
                "circumcircle of radius {r} reaches beyond {layers} ghost layer(s)"
            )));
        }
        reps.push(refs);
    }
    if reps.len() != 2 * n {
        return Err(FoldFailure(format!(
            "{} triangles folded onto the torus, expected {}",
            reps.len(),
            2 * n
        )));
    }
    Ok(reps)
}

/// Periodic Delaunay triangulation for any non-empty 2D pattern.
pub(crate) fn periodic_triangulation(pattern: &PointPattern) -> Result<Triangulation, TessellationError> {
    if pattern.dim() != 2 {
        return Err(TessellationError::NotTwoDimensional(pattern.dim()));
    }
    if pattern.is_empty() {
        return Err(TessellationError::TooFewPoints { needed: 1, got: 0 });
    }
    let points: Vec<[f64; 2]> = pattern.points().map(|p| [p[0], p[1]]).collect();
    // canonical order: lexicographic by coordinates, so the result does not
    // depend on input order
    let mut canon: Vec<usize> = (0..points.len()).collect();
    canon.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
    });
    if let Some(w) = canon.windows(2).find(|w| points[w[0]] == points[w[1]]) {
        return Err(TessellationError::DuplicatePoints {
            first: w[0].min(w[1]),
            second: w[0].max(w[1]),
        });
    }
    let sorted: Vec<[f64; 2]> = canon.iter().map(|&i| points[i]).collect();
    let domain = pattern.domain().clone();

    let mut last = String::new();
    for layers in 1..=2 {
        match build(&domain, &sorted, layers) {
            Ok(reps) => {
                let mut triangles: Vec<[VertexRef; 3]> = reps
                    .into_iter()
                    .map(|t| canonical_triangle(t.map(|v| VertexRef::new(canon[v.index as usize] as u32, v.offset))))
                    .collect();
                triangles.sort();
                let tri = Triangulation {
                    domain,
                    points,
                    triangles,
                };
                check_partition(&tri)?;
                return Ok(tri);
            }
            Err(FoldFailure(msg)) => last = msg,
        }
    }
    Err(TessellationError::Periodicity(last))
}

fn check_partition(tri: &Triangulation) -> Result<(), TessellationError> {
    let box_area = tri.domain.measure();
    if let Some(t) = (0..tri.triangles.len()).find(|&t| tri.triangle_area(t).partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
        return Err(TessellationError::Periodicity(format!(
            "triangle {t} has non-positive area {}",
            tri.triangle_area(t)
        )));
    }
    let total = tri.total_area();
    if (total - box_area).abs() > AREA_TOL * box_area {
        return Err(TessellationError::Periodicity(format!(
            "triangle areas sum to {total}, box area is {box_area}"
        )));
    }
    Ok(())
}

/// Periodic Delaunay triangulation of a 2D pattern with at least 3 points.
///
/// Cocircular configurations are resolved by symbolic perturbation keyed on
/// (canonical point index, image offset), so e.g. the diagonal chosen inside
/// each square of a square lattice is deterministic.
pub fn delaunay(pattern: &PointPattern) -> Result<Triangulation, TessellationError> {
    if pattern.dim() != 2 {
        return Err(TessellationError::NotTwoDimensional(pattern.dim()));
    }
    if pattern.len() < 3 {
        return Err(TessellationError::TooFewPoints {
            needed: 3,
            got: pattern.len(),
        });
    }
    periodic_triangulation(pattern)
}
