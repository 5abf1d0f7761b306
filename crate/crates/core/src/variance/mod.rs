//! Growing-window fluctuation analysis.
//!
//! Windows of radius `R` are dropped at uniformly random centers; the number
//! of points inside (or the dark-pixel fraction inside) is recorded and its
//! spread across windows is tracked as `R` grows. How fast that spread grows
//! separates disordered patterns from hyperuniform ones.

mod fit;
mod windows;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Seed;
use crate::exec;
use crate::field::{BinaryField, FieldError, FieldWindows};
use crate::pattern::PointPattern;

pub use fit::{
    classify, fit_scaling, OrderClass, OrderLabel, ScalingFit, MIN_R_SQUARED, SURFACE_BAND,
    VOLUME_BAND,
};
pub use windows::{PointWindows, BOUNDARY_TOL};

/// Number of radii in the default sweep.
pub const DEFAULT_SWEEP_LEN: usize = 16;
pub const DEFAULT_WINDOWS_2D: usize = 10_000;
pub const DEFAULT_WINDOWS_3D: usize = 4_000;
/// Default sweep for point patterns starts at this many mean spacings.
pub const SWEEP_LOWER_SPACINGS: f64 = 2.0;
/// Default sweep ends at this fraction of the shortest box length.
pub const SWEEP_UPPER_FRACTION: f64 = 0.25;
/// Default sweep for fields starts at this fraction of the shortest box length.
pub const FIELD_SWEEP_LOWER_FRACTION: f64 = 0.05;

#[derive(Debug, Error)]
pub enum VarianceError {
    #[error("window radius {radius} outside (0, {limit}); windows must not overlap their periodic images")]
    WindowTooLarge { radius: f64, limit: f64 },
    #[error("radii must be finite and strictly increasing")]
    RadiiNotIncreasing,
    #[error("need at least one radius")]
    NoRadii,
    #[error("need at least 2 windows, got {0}")]
    TooFewWindows(usize),
    #[error("degenerate {0}")]
    Degenerate(String),
    #[error("only {found} curve radii inside fit range {range:?}; need 3")]
    TooFewFitPoints { found: usize, range: (f64, f64) },
    #[error("zero variance at R={radius}; cannot fit a power law (narrow the fit range)")]
    ZeroVariance { radius: f64 },
    #[error("window at R={radius} contains no pixel centers")]
    EmptyWindow { radius: f64 },
}

impl From<FieldError> for VarianceError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::WindowTooLarge { radius, limit } => VarianceError::WindowTooLarge { radius, limit },
            FieldError::EmptyWindow { radius } => VarianceError::EmptyWindow { radius },
            other => VarianceError::Degenerate(format!("field: {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    NumberCount,
    DarkFraction,
}

impl WindowMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WindowMode::NumberCount => "number_count",
            WindowMode::DarkFraction => "dark_fraction",
        }
    }
}

/// Per-radius mean and unbiased variance of a window statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCurve {
    pub radii: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// Large-sample standard error of each variance estimate.
    pub variance_stderr: Vec<f64>,
    pub n_windows: usize,
    pub mode: WindowMode,
    pub dim: usize,
    pub source: String,
}

impl VarianceCurve {
    /// CSV with columns `R,mean,variance,n_windows,mode`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,mean,variance,n_windows,mode\n");
        for k in 0..self.radii.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.radii[k],
                self.mean[k],
                self.variance[k],
                self.n_windows,
                self.mode.as_str()
            ));
        }
        out
    }

    pub fn radius_span(&self) -> (f64, f64) {
        (self.radii[0], self.radii[self.radii.len() - 1])
    }
}

fn check_radii(radii: &[f64], limit: f64) -> Result<(), VarianceError> {
    if radii.is_empty() {
        return Err(VarianceError::NoRadii);
    }
    if radii.iter().any(|r| !r.is_finite()) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(VarianceError::RadiiNotIncreasing);
    }
    for &radius in radii {
        if !(radius > 0.0 && radius < limit) {
            return Err(VarianceError::WindowTooLarge { radius, limit });
        }
    }
    Ok(())
}

fn window_limit(pattern: &PointPattern) -> f64 {
    pattern.domain().min_length() / 2.0
}

/// Number of points within periodic distance `radius` of `center`
/// (boundary points count as inside).
pub fn count_in_window(pattern: &PointPattern, center: &[f64], radius: f64) -> Result<usize, VarianceError> {
    check_radii(&[radius], window_limit(pattern))?;
    let domain = pattern.domain();
    let reach = radius + BOUNDARY_TOL;
    Ok(pattern
        .points()
        .filter(|p| domain.periodic_distance_sq(p, center) <= reach * reach)
        .count())
}

/// Window centers, uniform in the box, drawn once and shared by all radii.
pub fn window_centers(lengths: &[f64], n_windows: usize, seed: Seed) -> Vec<f64> {
    let mut rng = exec::rng(seed);
    let mut out = Vec::with_capacity(n_windows * lengths.len());
    for _ in 0..n_windows {
        for l in lengths {
            let x = rng.random::<f64>() * l;
            out.push(if x >= *l { 0.0 } else { x });
        }
    }
    out
}

struct Moments {
    mean: f64,
    variance: f64,
    stderr: f64,
}

/// Sample moments in index order; the result does not depend on how the
/// values were computed.
fn moments(values: &[f64]) -> Moments {
    let n = values.len() as f64;
    let mean = exec::compensated_sum(values.iter().copied()) / n;
    let m2 = exec::compensated_sum(values.iter().map(|v| (v - mean).powi(2)));
    let m4 = exec::compensated_sum(values.iter().map(|v| (v - mean).powi(4))) / n;
    let variance = (m2 / (n - 1.0)).max(0.0);
    // Var(s²) ≈ (μ4 − σ⁴ (n−3)/(n−1)) / n
    let se2 = (m4 - variance * variance * (n - 3.0) / (n - 1.0)) / n;
    Moments {
        mean,
        variance,
        stderr: se2.max(0.0).sqrt(),
    }
}

/// Exact integer moments for counts: the mean and variance are rounded once.
fn count_moments(counts: impl Iterator<Item = u32> + Clone, n: usize) -> Moments {
    let (s, ss) = counts
        .clone()
        .fold((0u128, 0u128), |(s, ss), c| (s + c as u128, ss + (c as u128) * (c as u128)));
    let nn = n as u128;
    let mean = s as f64 / n as f64;
    // n·Σc² − (Σc)² is exact and nonnegative
    let numer = nn * ss - s * s;
    let variance = numer as f64 / (n as f64 * (n as f64 - 1.0));
    let values: Vec<f64> = counts.map(|c| c as f64).collect();
    let m4 = exec::compensated_sum(values.iter().map(|v| (v - mean).powi(4))) / n as f64;
    let nf = n as f64;
    let se2 = (m4 - variance * variance * (nf - 3.0) / (nf - 1.0)) / nf;
    Moments {
        mean,
        variance,
        stderr: se2.max(0.0).sqrt(),
    }
}

/// Number variance across `n_windows` random windows at each radius.
pub fn number_variance_curve(
    pattern: &PointPattern,
    radii: &[f64],
    n_windows: usize,
    seed: Seed,
) -> Result<VarianceCurve, VarianceError> {
    check_radii(radii, window_limit(pattern))?;
    if n_windows < 2 {
        return Err(VarianceError::TooFewWindows(n_windows));
    }
    if pattern.is_empty() {
        return Err(VarianceError::Degenerate("pattern: no points".into()));
    }
    let dim = pattern.dim();
    let centers = window_centers(pattern.domain().lengths(), n_windows, seed);
    let engine = PointWindows::new(pattern, radii[radii.len() - 1]);
    let per_window: Vec<Vec<u32>> =
        exec::map_indexed(n_windows, |w| engine.counts(&centers[w * dim..(w + 1) * dim], radii));

    let mut curve = VarianceCurve {
        radii: radii.to_vec(),
        mean: Vec::with_capacity(radii.len()),
        variance: Vec::with_capacity(radii.len()),
        variance_stderr: Vec::with_capacity(radii.len()),
        n_windows,
        mode: WindowMode::NumberCount,
        dim,
        source: pattern.provenance().to_string(),
    };
    for k in 0..radii.len() {
        let m = count_moments(per_window.iter().map(|c| c[k]), n_windows);
        curve.mean.push(m.mean);
        curve.variance.push(m.variance);
        curve.variance_stderr.push(m.stderr);
    }
    Ok(curve)
}

/// Variance of the dark-pixel fraction across random windows at each radius.
pub fn fraction_variance_curve(
    field: &BinaryField,
    radii: &[f64],
    n_windows: usize,
    seed: Seed,
) -> Result<VarianceCurve, VarianceError> {
    check_radii(radii, field.domain().min_length() / 2.0)?;
    if n_windows < 2 {
        return Err(VarianceError::TooFewWindows(n_windows));
    }
    let centers = window_centers(field.domain().lengths(), n_windows, seed);
    let engine = FieldWindows::new(field);
    let per_window: Vec<Result<Vec<f64>, VarianceError>> = exec::map_indexed(n_windows, |w| {
        let c = &centers[2 * w..2 * w + 2];
        radii
            .iter()
            .map(|&r| {
                let (dark, total) = engine.counts(c, r);
                if total == 0 {
                    Err(VarianceError::EmptyWindow { radius: r })
                } else {
                    Ok(dark as f64 / total as f64)
                }
            })
            .collect()
    });
    let per_window: Vec<Vec<f64>> = per_window.into_iter().collect::<Result<_, _>>()?;

    let mut curve = VarianceCurve {
        radii: radii.to_vec(),
        mean: Vec::with_capacity(radii.len()),
        variance: Vec::with_capacity(radii.len()),
        variance_stderr: Vec::with_capacity(radii.len()),
        n_windows,
        mode: WindowMode::DarkFraction,
        dim: 2,
        source: format!("field {}x{} h={}", field.width(), field.height(), field.pixel_size()),
    };
    let mut column = vec![0.0; n_windows];
    for k in 0..radii.len() {
        for (slot, w) in column.iter_mut().zip(&per_window) {
            *slot = w[k];
        }
        let m = moments(&column);
        curve.mean.push(m.mean.clamp(0.0, 1.0));
        curve.variance.push(m.variance.min(0.25));
        curve.variance_stderr.push(m.stderr);
    }
    Ok(curve)
}

/// `n` logarithmically spaced radii from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// What to analyze.
#[derive(Debug, Clone, Copy)]
pub enum Sample<'a> {
    Pattern(&'a PointPattern),
    Field(&'a BinaryField),
}

impl Sample<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Sample::Pattern(p) => p.dim(),
            Sample::Field(_) => 2,
        }
    }

    pub fn mode(&self) -> WindowMode {
        match self {
            Sample::Pattern(_) => WindowMode::NumberCount,
            Sample::Field(_) => WindowMode::DarkFraction,
        }
    }

    /// Default sweep: 16 log-spaced radii from two mean spacings (patterns)
    /// or 5% of the shortest box side (fields) up to a quarter of it.
    pub fn default_radii(&self) -> Result<Vec<f64>, VarianceError> {
        let (lo, hi) = match self {
            Sample::Pattern(p) => {
                let spacing = p
                    .mean_spacing()
                    .ok_or_else(|| VarianceError::Degenerate("pattern: no points".into()))?;
                (
                    SWEEP_LOWER_SPACINGS * spacing,
                    SWEEP_UPPER_FRACTION * p.domain().min_length(),
                )
            }
            Sample::Field(f) => {
                let l = f.domain().min_length();
                (
                    (FIELD_SWEEP_LOWER_FRACTION * l).max(2.0 * f.pixel_size()),
                    SWEEP_UPPER_FRACTION * l,
                )
            }
        };
        if lo >= hi {
            return Err(VarianceError::Degenerate(format!(
                "sweep: default sweep is empty: lower radius {lo} >= upper radius {hi}"
            )));
        }
        Ok(log_spaced(lo, hi, DEFAULT_SWEEP_LEN))
    }

    pub fn default_windows(&self) -> usize {
        if self.dim() == 3 {
            DEFAULT_WINDOWS_3D
        } else {
            DEFAULT_WINDOWS_2D
        }
    }
}

/// Overrides for [`analyze`]; `None` selects the documented default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub radii: Option<Vec<f64>>,
    pub n_windows: Option<usize>,
    pub fit_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub curve: VarianceCurve,
    pub fit: ScalingFit,
    pub class: OrderClass,
}

/// Curve, fit and classification in one call.
pub fn analyze(sample: Sample<'_>, options: &AnalysisOptions, seed: Seed) -> Result<Analysis, VarianceError> {
    let radii = match &options.radii {
        Some(r) => r.clone(),
        None => sample.default_radii()?,
    };
    let n_windows = options.n_windows.unwrap_or_else(|| sample.default_windows());
    let curve = match sample {
        Sample::Pattern(p) => number_variance_curve(p, &radii, n_windows, seed)?,
        Sample::Field(f) => fraction_variance_curve(f, &radii, n_windows, seed)?,
    };
    if curve.variance.iter().all(|v| *v == 0.0) {
        return Err(VarianceError::Degenerate(format!(
            "{}: zero variance at all radii",
            match sample {
                Sample::Pattern(_) => "pattern",
                Sample::Field(_) => "field",
            }
        )));
    }
    let fit = fit_scaling(&curve, options.fit_range.unwrap_or_else(|| curve.radius_span()))?;
    let class = classify(&fit, sample.dim(), sample.mode());
    Ok(Analysis { curve, fit, class })
}
