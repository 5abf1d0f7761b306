//! Cell-size and cell-shape statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{delaunay::Triangulation, voronoi, Tessellation, TessellationError};
use crate::exec;
use crate::pattern::PointPattern;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub count: usize,
    pub area_mean: f64,
    /// Population standard deviation over mean.
    pub area_cv: f64,
    /// Side count → number of cells.
    pub side_histogram: BTreeMap<usize, usize>,
    pub mean_side_count: f64,
    pub edge_length_mean: f64,
    pub edge_length_cv: f64,
}

#[derive(Debug, Default)]
struct Pool {
    areas: Vec<f64>,
    sides: Vec<usize>,
    edges: Vec<f64>,
}

impl Pool {
    fn add_polygon(&mut self, area: f64, corners: &[[f64; 2]]) {
        let n = corners.len();
        self.areas.push(area);
        self.sides.push(n);
        for k in 0..n {
            let a = corners[k];
            let b = corners[(k + 1) % n];
            self.edges.push(((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt());
        }
    }

    fn add_tessellation(&mut self, tess: &Tessellation) {
        for cell in tess.cells() {
            self.add_polygon(cell.area, &cell.vertices);
        }
    }

    fn finish(self) -> CellStats {
        let (area_mean, area_cv) = mean_cv(&self.areas);
        let (edge_length_mean, edge_length_cv) = mean_cv(&self.edges);
        let mut side_histogram = BTreeMap::new();
        for s in &self.sides {
            *side_histogram.entry(*s).or_insert(0) += 1;
        }
        let total_sides: usize = self.sides.iter().sum();
        CellStats {
            count: self.areas.len(),
            area_mean,
            area_cv,
            side_histogram,
            mean_side_count: total_sides as f64 / self.sides.len() as f64,
            edge_length_mean,
            edge_length_cv,
        }
    }
}

fn mean_cv(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = exec::compensated_sum(values.iter().copied()) / n;
    let var = exec::compensated_sum(values.iter().map(|v| (v - mean).powi(2))) / n;
    let cv = if mean != 0.0 { var.sqrt() / mean.abs() } else { 0.0 };
    (mean, cv)
}

pub fn cell_statistics(tess: &Tessellation) -> CellStats {
    let mut pool = Pool::default();
    pool.add_tessellation(tess);
    pool.finish()
}

/// Same statistics with the triangles as cells.
pub fn triangle_statistics(tri: &Triangulation) -> CellStats {
    let mut pool = Pool::default();
    for t in 0..tri.triangles().len() {
        pool.add_polygon(tri.triangle_area(t), &tri.triangle_positions(t));
    }
    pool.finish()
}

/// Voronoi statistics pooled over all cells of all realizations.
pub fn ensemble_cell_statistics(patterns: &[PointPattern]) -> Result<CellStats, TessellationError> {
    let Some(first) = patterns.first() else {
        return Err(TessellationError::TooFewPoints { needed: 1, got: 0 });
    };
    if let Some(p) = patterns.iter().find(|p| p.dim() != first.dim()) {
        return Err(TessellationError::MixedDimensions {
            first: first.dim(),
            other: p.dim(),
        });
    }
    if first.dim() != 2 {
        return Err(TessellationError::NotTwoDimensional(first.dim()));
    }
    let tessellations = exec::map_indexed(patterns.len(), |k| voronoi(&patterns[k]));
    let mut pool = Pool::default();
    for t in tessellations {
        pool.add_tessellation(&t?);
    }
    Ok(pool.finish())
}
