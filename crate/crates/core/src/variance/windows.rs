//! Cell-list counting of points inside periodic circular/spherical windows.

use crate::pattern::PointPattern;

/// Distance slack under which a point on the window boundary counts as inside.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Bins a pattern's points into a uniform grid so a window of radius up to
/// `max_radius` only visits nearby cells.
#[derive(Debug, Clone)]
pub struct PointWindows<'a> {
    pattern: &'a PointPattern,
    shape: Vec<usize>,
    edge: Vec<f64>,
    // CSR layout: points of cell c are order[start[c]..start[c + 1]]
    start: Vec<usize>,
    order: Vec<u32>,
}

impl<'a> PointWindows<'a> {
    pub fn new(pattern: &'a PointPattern, max_radius: f64) -> Self {
        let domain = pattern.domain();
        let dim = domain.dim();
        let spacing = pattern.mean_spacing().unwrap_or(domain.min_length());
        let target_edge = (max_radius / 4.0).max(spacing);
        let shape: Vec<usize> = domain
            .lengths()
            .iter()
            .map(|l| ((l / target_edge).floor() as usize).clamp(1, 1024))
            .collect();
        let edge: Vec<f64> = domain
            .lengths()
            .iter()
            .zip(&shape)
            .map(|(l, n)| l / *n as f64)
            .collect();
        let n_cells: usize = shape.iter().product();
        let cell_of = |p: &[f64]| -> usize {
            (0..dim).rev().fold(0, |acc, a| {
                let i = ((p[a] / edge[a]) as usize).min(shape[a] - 1);
                acc * shape[a] + i
            })
        };
        let mut start = vec![0usize; n_cells + 1];
        for p in pattern.points() {
            start[cell_of(p) + 1] += 1;
        }
        for c in 0..n_cells {
            start[c + 1] += start[c];
        }
        let mut fill = start.clone();
        let mut order = vec![0u32; pattern.len()];
        for (i, p) in pattern.points().enumerate() {
            let c = cell_of(p);
            order[fill[c]] = i as u32;
            fill[c] += 1;
        }
        Self {
            pattern,
            shape,
            edge,
            start,
            order,
        }
    }

    /// Counts points within each radius of `center`.
    ///
    /// `radii` must be ascending and no larger than the construction radius.
    /// The returned vector is cumulative: `out[k]` counts points with periodic
    /// distance `<= radii[k]` (boundary slack [`BOUNDARY_TOL`]).
    pub fn counts(&self, center: &[f64], radii: &[f64]) -> Vec<u32> {
        let mut out = vec![0u32; radii.len()];
        let Some(&r_max) = radii.last() else {
            return out;
        };
        let thresholds: Vec<f64> = radii
            .iter()
            .map(|r| (r + BOUNDARY_TOL) * (r + BOUNDARY_TOL))
            .collect();
        let reach = r_max + BOUNDARY_TOL;
        let domain = self.pattern.domain();
        let dim = domain.dim();
        let coords = self.pattern.coords();

        // unwrapped cell index ranges; the period shift is implied by the index
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for a in 0..dim {
            lo[a] = ((center[a] - reach) / self.edge[a]).floor() as i64;
            hi[a] = ((center[a] + reach) / self.edge[a]).floor() as i64;
        }
        let mut idx = lo;
        loop {
            let mut flat = 0usize;
            let mut shift = [0.0f64; 3];
            for a in (0..dim).rev() {
                let n = self.shape[a] as i64;
                let wrapped = idx[a].rem_euclid(n);
                shift[a] = idx[a].div_euclid(n) as f64 * domain.length(a);
                flat = flat * self.shape[a] + wrapped as usize;
            }
            for &pi in &self.order[self.start[flat]..self.start[flat + 1]] {
                let p = &coords[pi as usize * dim..(pi as usize + 1) * dim];
                let mut d2 = 0.0;
                for a in 0..dim {
                    let d = p[a] + shift[a] - center[a];
                    d2 += d * d;
                }
                let k = thresholds.partition_point(|t| *t < d2);
                if k < out.len() {
                    out[k] += 1;
                }
            }
            // odometer over the cell box
            let mut a = 0;
            loop {
                if a == dim {
                    for k in 1..out.len() {
                        out[k] += out[k - 1];
                    }
                    return out;
                }
                idx[a] += 1;
                if idx[a] <= hi[a] {
                    break;
                }
                idx[a] = lo[a];
                a += 1;
            }
        }
    }
}
