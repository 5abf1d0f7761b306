//! Periodic Delaunay triangulations and Voronoi tessellations in 2D.

mod delaunay;
mod io;
pub mod predicates;
mod stats;
mod voronoi;

use thiserror::Error;

pub use delaunay::{delaunay, Triangulation, AREA_TOL};
pub use io::{save_text, tessellation_to_text, triangulation_to_text, TESS_MAGIC};
pub use predicates::{ImagePoint, VertexRef};
pub use stats::{cell_statistics, ensemble_cell_statistics, triangle_statistics, CellStats};
pub use voronoi::{voronoi, voronoi_from_triangulation, Tessellation, VoronoiCell};

#[derive(Debug, Error, PartialEq)]
pub enum TessellationError {
    #[error("tessellations are two-dimensional, got a {0}D pattern")]
    NotTwoDimensional(usize),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("points {first} and {second} coincide")]
    DuplicatePoints { first: usize, second: usize },
    #[error("periodic construction failed: {0}")]
    Periodicity(String),
    #[error("patterns mix {first}D and {other}D")]
    MixedDimensions { first: usize, other: usize },
}
