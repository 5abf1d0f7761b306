//! Periodic Voronoi tessellation as the dual of the periodic Delaunay triangulation.

use std::cmp::Ordering;

use super::delaunay::{circumcircle, periodic_triangulation, Triangulation, AREA_TOL};
use super::predicates::{incircle_exact, VertexRef};
use super::TessellationError;
use crate::domain::BoxDomain;
use crate::pattern::PointPattern;

/// One Voronoi cell, listed counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCell {
    pub generator: usize,
    /// Corner coordinates around the generator's in-box position (may lie
    /// outside the box).
    pub vertices: Vec<[f64; 2]>,
    /// Corner `k` is `Tessellation::vertices()[id]` shifted by `offset` periods.
    pub vertex_ids: Vec<(u32, [i32; 2])>,
    /// Neighbor across the edge from corner `k` to corner `k + 1`.
    pub neighbors: Vec<VertexRef>,
    pub area: f64,
}

impl VoronoiCell {
    pub fn side_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| {
            let a = self.vertices[k];
            let b = self.vertices[(k + 1) % n];
            ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tessellation {
    domain: BoxDomain,
    generators: Vec<[f64; 2]>,
    vertices: Vec<[f64; 2]>,
    cells: Vec<VoronoiCell>,
}

impl Tessellation {
    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn generators(&self) -> &[[f64; 2]] {
        &self.generators
    }

    /// Wrapped Voronoi vertices, one per Delaunay triangle (cocircular
    /// triangles give coincident entries).
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn cells(&self) -> &[VoronoiCell] {
        &self.cells
    }

    pub fn total_area(&self) -> f64 {
        crate::exec::compensated_sum(self.cells.iter().map(|c| c.area))
    }

    pub fn mean_side_count(&self) -> f64 {
        let sides: usize = self.cells.iter().map(|c| c.side_count()).sum();
        sides as f64 / self.cells.len() as f64
    }
}

fn shoelace(poly: &[[f64; 2]], origin: [f64; 2]) -> f64 {
    let n = poly.len();
    let terms = (0..n).map(|k| {
        let a = [poly[k][0] - origin[0], poly[k][1] - origin[1]];
        let b = [poly[(k + 1) % n][0] - origin[0], poly[(k + 1) % n][1] - origin[1]];
        0.5 * (a[0] * b[1] - a[1] * b[0])
    });
    crate::exec::compensated_sum(terms)
}

/// An incident triangle translated so the cell's generator sits at offset 0.
struct Incident {
    tri: usize,
    shift: [i32; 2],
    refs: [VertexRef; 3],
    angle: f64,
}

fn build_cells(tri: &Triangulation) -> Result<Tessellation, TessellationError> {
    let domain = tri.domain().clone();
    let lengths = tri.lengths();
    let n = tri.vertex_count();

    let mut centers = Vec::with_capacity(tri.triangles().len());
    let mut wrapped = Vec::with_capacity(tri.triangles().len());
    let mut wrap_shift = Vec::with_capacity(tri.triangles().len());
    for t in 0..tri.triangles().len() {
        let (c, _) = circumcircle(tri.triangle_positions(t));
        let w = [domain.wrap_coord(0, c[0]), domain.wrap_coord(1, c[1])];
        let s = [
            ((c[0] - w[0]) / lengths[0]).round() as i32,
            ((c[1] - w[1]) / lengths[1]).round() as i32,
        ];
        centers.push(c);
        wrapped.push(w);
        wrap_shift.push(s);
    }

    let mut incident: Vec<Vec<(usize, [i32; 2])>> = vec![Vec::new(); n];
    for (t, refs) in tri.triangles().iter().enumerate() {
        for v in refs {
            incident[v.index as usize].push((t, [-v.offset[0], -v.offset[1]]));
        }
    }

    let mut cells = Vec::with_capacity(n);
    for (i, inc) in incident.into_iter().enumerate() {
        let home = VertexRef::new(i as u32, [0, 0]);
        let p = tri.points()[i];
        let mut star: Vec<Incident> = inc
            .into_iter()
            .map(|(t, shift)| {
                let refs = tri.triangles()[t].map(|v| v.shifted(shift));
                let pos = refs.map(|v| tri.position(v));
                let cx = (pos[0][0] + pos[1][0] + pos[2][0]) / 3.0;
                let cy = (pos[0][1] + pos[1][1] + pos[2][1]) / 3.0;
                Incident {
                    tri: t,
                    shift,
                    refs,
                    angle: (cy - p[1]).atan2(cx - p[0]),
                }
            })
            .collect();
        star.sort_by(|a, b| {
            a.angle
                .total_cmp(&b.angle)
                .then(a.tri.cmp(&b.tri))
                .then(a.shift.cmp(&b.shift))
        });
        let m = star.len();
        if m < 3 {
            return Err(TessellationError::Periodicity(format!(
                "point {i} has only {m} incident triangles"
            )));
        }

        let shared = |a: &Incident, b: &Incident| -> Vec<VertexRef> {
            a.refs.iter().copied().filter(|v| b.refs.contains(v)).collect()
        };
        // consecutive triangles with one circumcircle collapse to one corner
        let same_circle: Vec<bool> = (0..m)
            .map(|k| {
                let a = &star[k];
                let b = &star[(k + 1) % m];
                let common = shared(a, b);
                let Some(opp) = b.refs.iter().find(|v| !common.contains(v)) else {
                    return false;
                };
                let imgs = a.refs.map(|v| tri.image(v));
                incircle_exact(&imgs[0], &imgs[1], &imgs[2], &tri.image(*opp), lengths) == Ordering::Equal
            })
            .collect();
        let Some(start) = (0..m).find(|&k| !same_circle[k]) else {
            return Err(TessellationError::Periodicity(format!(
                "all triangles around point {i} are cocircular"
            )));
        };

        let mut vertices = Vec::new();
        let mut vertex_ids = Vec::new();
        let mut neighbors = Vec::new();
        let mut k = (start + 1) % m;
        for _ in 0..m {
            let first = &star[k];
            let c = centers[first.tri];
            vertices.push([
                c[0] + first.shift[0] as f64 * lengths[0],
                c[1] + first.shift[1] as f64 * lengths[1],
            ]);
            let ws = wrap_shift[first.tri];
            vertex_ids.push((first.tri as u32, [ws[0] + first.shift[0], ws[1] + first.shift[1]]));
            // advance to the last triangle sharing this circumcircle
            let mut last = k;
            while same_circle[last] {
                last = (last + 1) % m;
            }
            let next = (last + 1) % m;
            let common = shared(&star[last], &star[next]);
            let neighbor = common
                .into_iter()
                .find(|v| *v != home)
                .ok_or_else(|| TessellationError::Periodicity(format!("open star around point {i}")))?;
            neighbors.push(neighbor);
            if last == start {
                break;
            }
            k = next;
        }
        let area = shoelace(&vertices, p);
        cells.push(VoronoiCell {
            generator: i,
            vertices,
            vertex_ids,
            neighbors,
            area,
        });
    }

    let tess = Tessellation {
        domain,
        generators: tri.points().to_vec(),
        vertices: wrapped,
        cells,
    };
    let box_area = tess.domain.measure();
    let total = tess.total_area();
    if (total - box_area).abs() > AREA_TOL * box_area {
        return Err(TessellationError::Periodicity(format!(
            "cell areas sum to {total}, box area is {box_area}"
        )));
    }
    Ok(tess)
}

/// Periodic Voronoi tessellation of a 2D pattern with at least one point.
pub fn voronoi(pattern: &PointPattern) -> Result<Tessellation, TessellationError> {
    let tri = periodic_triangulation(pattern)?;
    build_cells(&tri)
}

/// Voronoi tessellation dual to an existing triangulation.
pub fn voronoi_from_triangulation(tri: &Triangulation) -> Result<Tessellation, TessellationError> {
    build_cells(tri)
}
