//! Two-phase (dark/light) rasters on a periodic box.
//!
//! Window membership is decided by pixel centers: a pixel belongs to a window
//! iff its center lies within the window radius under the periodic metric.

mod pnm;
mod raster;

use std::path::Path;

use thiserror::Error;

use crate::domain::BoxDomain;
use crate::pattern::PatternError;

pub use pnm::{load_field, parse_pnm, LoadOptions};
pub use raster::rasterize_tessellation;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("a PGM input needs a threshold in 0..=255")]
    MissingThreshold,
    #[error("byte {offset}: pixels would not be square ({hx} x {hy})")]
    NonSquarePixels { offset: usize, hx: f64, hy: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("window radius {radius} outside (0, {limit})")]
    WindowTooLarge { radius: f64, limit: f64 },
    #[error("window of radius {radius} contains no pixel centers")]
    EmptyWindow { radius: f64 },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Dark/light raster with square pixels of edge `h` covering a periodic box.
///
/// Row `r`, column `c` has its center at `((c + 0.5)·h, (r + 0.5)·h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryField {
    domain: BoxDomain,
    nx: usize,
    ny: usize,
    pixel: f64,
    dark: Vec<bool>,
    dark_count: usize,
    periodic: bool,
}

impl BinaryField {
    pub fn from_bits(nx: usize, ny: usize, pixel: f64, dark: Vec<bool>) -> Result<Self, FieldError> {
        if nx == 0 || ny == 0 {
            return Err(FieldError::InvalidArgument(format!(
                "grid must be at least 1x1, got {nx}x{ny}"
            )));
        }
        if dark.len() != nx * ny {
            return Err(FieldError::InvalidArgument(format!(
                "{} pixels supplied for a {nx}x{ny} grid",
                dark.len()
            )));
        }
        if !(pixel.is_finite() && pixel > 0.0) {
            return Err(FieldError::InvalidArgument(format!("pixel size {pixel}")));
        }
        let domain = BoxDomain::new(&[nx as f64 * pixel, ny as f64 * pixel])?;
        let dark_count = dark.iter().filter(|d| **d).count();
        Ok(Self {
            domain,
            nx,
            ny,
            pixel,
            dark,
            dark_count,
            periodic: false,
        })
    }

    pub fn from_fn(
        nx: usize,
        ny: usize,
        pixel: f64,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, FieldError> {
        let mut dark = Vec::with_capacity(nx * ny);
        for row in 0..ny {
            for col in 0..nx {
                dark.push(f(col, row));
            }
        }
        Self::from_bits(nx, ny, pixel, dark)
    }

    /// Marks the field as genuinely periodic (e.g. rendered from a torus).
    pub fn assert_periodic(mut self, periodic: bool) -> Self {
        self.periodic = periodic;
        self
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn width(&self) -> usize {
        self.nx
    }

    pub fn height(&self) -> usize {
        self.ny
    }

    pub fn pixel_size(&self) -> f64 {
        self.pixel
    }

    #[inline]
    pub fn is_dark(&self, col: usize, row: usize) -> bool {
        self.dark[row * self.nx + col]
    }

    pub fn dark_count(&self) -> usize {
        self.dark_count
    }

    pub fn dark_fraction(&self) -> f64 {
        self.dark_count as f64 / (self.nx * self.ny) as f64
    }

    pub fn pixel_center(&self, col: usize, row: usize) -> [f64; 2] {
        [(col as f64 + 0.5) * self.pixel, (row as f64 + 0.5) * self.pixel]
    }

    /// Raw P4 PBM bytes (1 = dark).
    pub fn to_pbm(&self) -> Vec<u8> {
        let mut out = format!("P4\n{} {}\n", self.nx, self.ny).into_bytes();
        let row_bytes = self.nx.div_ceil(8);
        for row in 0..self.ny {
            let mut packed = vec![0u8; row_bytes];
            for col in 0..self.nx {
                if self.is_dark(col, row) {
                    packed[col / 8] |= 0x80 >> (col % 8);
                }
            }
            out.extend_from_slice(&packed);
        }
        out
    }

    pub fn save_pbm(&self, path: impl AsRef<Path>) -> Result<(), FieldError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_pbm()).map_err(|source| FieldError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub(crate) fn check_radius(&self, radius: f64) -> Result<(), FieldError> {
        let limit = self.domain.min_length() / 2.0;
        if radius > 0.0 && radius < limit {
            Ok(())
        } else {
            Err(FieldError::WindowTooLarge { radius, limit })
        }
    }
}

/// Row-wise prefix sums for O(rows) window counting.
#[derive(Debug, Clone)]
pub struct FieldWindows<'a> {
    field: &'a BinaryField,
    // (2·nx + 1) entries per row so wrapped column intervals are contiguous
    prefix: Vec<u32>,
}

impl<'a> FieldWindows<'a> {
    pub fn new(field: &'a BinaryField) -> Self {
        let nx = field.nx;
        let stride = 2 * nx + 1;
        let mut prefix = vec![0u32; stride * field.ny];
        for row in 0..field.ny {
            let base = row * stride;
            for k in 0..2 * nx {
                prefix[base + k + 1] = prefix[base + k] + field.is_dark(k % nx, row) as u32;
            }
        }
        Self { field, prefix }
    }

    /// `(dark, total)` pixel counts of the window. The radius is not validated.
    pub fn counts(&self, center: &[f64], radius: f64) -> (u64, u64) {
        let f = self.field;
        let h = f.pixel;
        let (cx, cy) = (center[0], center[1]);
        let r2 = radius * radius;
        let stride = 2 * f.nx + 1;
        let inside = |i: i64, dy2: f64| {
            let dx = (i as f64 + 0.5) * h - cx;
            dx * dx + dy2 <= r2
        };

        let j_lo = ((cy - radius) / h - 0.5).floor() as i64 - 1;
        let j_hi = ((cy + radius) / h - 0.5).ceil() as i64 + 1;
        let (mut dark, mut total) = (0u64, 0u64);
        for j in j_lo..=j_hi {
            let dy = (j as f64 + 0.5) * h - cy;
            let dy2 = dy * dy;
            if dy2 > r2 {
                continue;
            }
            let s = (r2 - dy2).sqrt();
            let mut i0 = ((cx - s) / h - 0.5).ceil() as i64;
            let mut i1 = ((cx + s) / h - 0.5).floor() as i64;
            // settle the interval ends on the exact membership test
            while inside(i0 - 1, dy2) {
                i0 -= 1;
            }
            while i0 <= i1 && !inside(i0, dy2) {
                i0 += 1;
            }
            while inside(i1 + 1, dy2) {
                i1 += 1;
            }
            while i1 >= i0 && !inside(i1, dy2) {
                i1 -= 1;
            }
            if i1 < i0 {
                continue;
            }
            let len = (i1 - i0 + 1) as usize;
            let row = j.rem_euclid(f.ny as i64) as usize;
            let start = i0.rem_euclid(f.nx as i64) as usize;
            let base = row * stride;
            dark += (self.prefix[base + start + len] - self.prefix[base + start]) as u64;
            total += len as u64;
        }
        (dark, total)
    }
}

/// Fraction of dark pixels among the pixels whose centers lie within
/// periodic distance `radius` of `center`.
pub fn field_dark_fraction_in_window(
    field: &BinaryField,
    center: &[f64],
    radius: f64,
) -> Result<f64, FieldError> {
    field.check_radius(radius)?;
    let (dark, total) = FieldWindows::new(field).counts(center, radius);
    if total == 0 {
        return Err(FieldError::EmptyWindow { radius });
    }
    Ok(dark as f64 / total as f64)
}
