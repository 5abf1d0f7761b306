//! Log-log power-law fit of a variance curve and the order classification.

use serde::{Deserialize, Serialize};

use super::{VarianceCurve, VarianceError, WindowMode};

/// Relative slack when deciding whether a curve radius lies inside a fit range.
const RANGE_TOL: f64 = 1e-12;

/// Least-squares line through `(ln R, ln variance)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Growth exponent: variance ∝ R^alpha.
    pub alpha: f64,
    /// Intercept, the log of the prefactor.
    pub log_prefactor: f64,
    pub r_squared: f64,
    /// Smallest and largest radius that entered the fit.
    pub fit_range: (f64, f64),
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderLabel {
    NonHyperuniform,
    Hyperuniform,
    Intermediate,
    Undetermined,
}

impl OrderLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            OrderLabel::NonHyperuniform => "non_hyperuniform",
            OrderLabel::Hyperuniform => "hyperuniform",
            OrderLabel::Intermediate => "intermediate",
            OrderLabel::Undetermined => "undetermined",
        }
    }
}

impl std::fmt::Display for OrderLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderClass {
    pub label: OrderLabel,
    pub alpha: f64,
    pub dim: usize,
    pub mode: WindowMode,
}

/// Fits below this r² are labelled undetermined.
pub const MIN_R_SQUARED: f64 = 0.9;
/// Distance of the non-hyperuniform threshold below the volume exponent.
pub const VOLUME_BAND: f64 = 0.25;
/// Distance of the hyperuniform threshold below the volume exponent.
pub const SURFACE_BAND: f64 = 0.75;

/// Ordinary least squares of `ln(variance)` on `ln(R)` over radii in `fit_range`.
pub fn fit_scaling(curve: &VarianceCurve, fit_range: (f64, f64)) -> Result<ScalingFit, VarianceError> {
    let (lo, hi) = fit_range;
    let selected: Vec<(f64, f64)> = curve
        .radii
        .iter()
        .zip(&curve.variance)
        .filter(|(r, _)| **r >= lo * (1.0 - RANGE_TOL) && **r <= hi * (1.0 + RANGE_TOL))
        .map(|(r, v)| (*r, *v))
        .collect();
    if selected.len() < 3 {
        return Err(VarianceError::TooFewFitPoints {
            found: selected.len(),
            range: fit_range,
        });
    }
    if let Some((r, _)) = selected.iter().find(|(_, v)| v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
        return Err(VarianceError::ZeroVariance { radius: *r });
    }
    let xs: Vec<f64> = selected.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = selected.iter().map(|(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let used = (selected[0].0, selected[selected.len() - 1].0);

    if ys.iter().all(|y| *y == ys[0]) {
        return Ok(ScalingFit {
            alpha: 0.0,
            log_prefactor: ys[0],
            r_squared: 1.0,
            fit_range: used,
            n_points: selected.len(),
        });
    }

    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let syy: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let alpha = sxy / sxx;
    let log_prefactor = y_mean - alpha * x_mean;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - log_prefactor - alpha * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(ScalingFit {
        alpha,
        log_prefactor,
        r_squared,
        fit_range: used,
        n_points: selected.len(),
    })
}

/// Labels a fit against the volume exponent `dim` (number counts grow as
/// `R^dim` without hyperuniformity) or `-dim` (dark fractions decay as
/// `R^-dim`), with dead bands of 0.25 and 0.75 below it.
pub fn classify(fit: &ScalingFit, dim: usize, mode: WindowMode) -> OrderClass {
    let volume = match mode {
        WindowMode::NumberCount => dim as f64,
        WindowMode::DarkFraction => -(dim as f64),
    };
    let alpha = fit.alpha;
    let label = if !alpha.is_finite() || fit.r_squared < MIN_R_SQUARED {
        OrderLabel::Undetermined
    } else if alpha >= volume - VOLUME_BAND {
        OrderLabel::NonHyperuniform
    } else if alpha <= volume - SURFACE_BAND {
        OrderLabel::Hyperuniform
    } else {
        OrderLabel::Intermediate
    };
    OrderClass {
        label,
        alpha,
        dim,
        mode,
    }
}
