//! Hyperuniformity toolkit: periodic point patterns, growing-window variance
//! scaling, periodic Delaunay/Voronoi tessellations and two-phase fields.

pub mod domain;
pub mod exec;
pub mod field;
pub mod generators;
pub mod pattern;
pub mod tessellation;
pub mod variance;

pub use domain::{BoxDomain, Seed};
pub use field::{BinaryField, FieldError};
pub use generators::{GenerateError, GeneratorKind, GeneratorSpec, LatticeKind, RsaTarget};
pub use pattern::{load_pattern, save_pattern, PatternError, PointPattern};
pub use tessellation::{CellStats, Tessellation, TessellationError, Triangulation};
pub use variance::{Analysis, AnalysisOptions, OrderClass, OrderLabel, Sample, ScalingFit, VarianceCurve, VarianceError, WindowMode};
