//! The point-pattern data model and its line-oriented text format.
//!
//! ```text
//! #hupa-pattern v1
//! dim=2 lengths=10,10 hard_radius=none
//! provenance=poisson seed=7 rho=1
//! 0.12345678901234567 3.1415926535897931
//! ...
//! ```

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::domain::BoxDomain;

pub const PATTERN_MAGIC: &str = "#hupa-pattern v1";

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("point {index} has {got} coordinates, box is {expected}-dimensional")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("invalid hard radius {0}")]
    InvalidHardRadius(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

/// Points in a periodic box.
///
/// Coordinates are stored flat, `dim` values per point, and are always inside
/// the half-open box.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    domain: BoxDomain,
    coords: Vec<f64>,
    hard_radius: Option<f64>,
    provenance: String,
}

impl PointPattern {
    /// Builds a pattern from flat coordinates, wrapping every point into the box.
    pub fn new(domain: BoxDomain, mut coords: Vec<f64>) -> Result<Self, PatternError> {
        let dim = domain.dim();
        if !coords.len().is_multiple_of(dim) {
            return Err(PatternError::DimensionMismatch {
                index: coords.len() / dim,
                expected: dim,
                got: coords.len() % dim,
            });
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(PatternError::InvalidBox(format!(
                "point {} has a non-finite coordinate",
                i / dim
            )));
        }
        for p in coords.chunks_exact_mut(dim) {
            domain.wrap_in_place(p);
        }
        Ok(Self {
            domain,
            coords,
            hard_radius: None,
            provenance: String::new(),
        })
    }

    pub fn empty(domain: BoxDomain) -> Self {
        Self {
            domain,
            coords: Vec::new(),
            hard_radius: None,
            provenance: String::new(),
        }
    }

    pub fn from_points<P: AsRef<[f64]>>(
        domain: BoxDomain,
        points: impl IntoIterator<Item = P>,
    ) -> Result<Self, PatternError> {
        let dim = domain.dim();
        let mut coords = Vec::new();
        for (index, p) in points.into_iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(PatternError::DimensionMismatch {
                    index,
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(domain, coords)
    }

    pub fn with_hard_radius(mut self, radius: Option<f64>) -> Result<Self, PatternError> {
        if let Some(r) = radius {
            if !(r.is_finite() && r >= 0.0) {
                return Err(PatternError::InvalidHardRadius(r));
            }
        }
        self.hard_radius = radius;
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        // the file format keeps provenance on a single line
        self.provenance = provenance.into().replace(['\n', '\r'], " ");
        self
    }

    #[inline]
    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn hard_radius(&self) -> Option<f64> {
        self.hard_radius
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Points per unit area (volume).
    pub fn intensity(&self) -> f64 {
        self.len() as f64 / self.domain.measure()
    }

    /// Typical interparticle spacing `(|box| / N)^(1/dim)`.
    pub fn mean_spacing(&self) -> Option<f64> {
        if self.is_empty() {
            None
        } else {
            Some((self.domain.measure() / self.len() as f64).powf(1.0 / self.dim() as f64))
        }
    }

    /// Serializes into the text format.
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{PATTERN_MAGIC}")?;
        let lengths: Vec<String> = self.domain.lengths().iter().map(|l| format!("{l}")).collect();
        let hard = match self.hard_radius {
            Some(r) => format!("{r}"),
            None => "none".to_string(),
        };
        writeln!(
            w,
            "dim={} lengths={} hard_radius={}",
            self.dim(),
            lengths.join(","),
            hard
        )?;
        writeln!(w, "provenance={}", self.provenance)?;
        let mut line = String::new();
        for p in self.points() {
            line.clear();
            for (k, x) in p.iter().enumerate() {
                if k > 0 {
                    line.push(' ');
                }
                line.push_str(&format_coord(*x));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("pattern text is ASCII")
    }

    pub fn parse(text: &str) -> Result<Self, PatternError> {
        let err = |line: usize, message: String| PatternError::Parse { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

        match lines.next() {
            Some((_, l)) if l.trim_end() == PATTERN_MAGIC => {}
            Some((n, l)) => return Err(err(n, format!("expected `{PATTERN_MAGIC}`, found `{l}`"))),
            None => return Err(err(1, "empty file".into())),
        }

        let (n, header) = lines.next().ok_or_else(|| err(2, "missing box header".into()))?;
        let mut dim = None;
        let mut lengths = None;
        let mut hard_radius = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| err(n, format!("malformed header field `{field}`")))?;
            match key {
                "dim" => {
                    dim = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| err(n, format!("bad dim `{value}`")))?,
                    )
                }
                "lengths" => {
                    let parsed: Result<Vec<f64>, _> = value.split(',').map(str::parse).collect();
                    lengths =
                        Some(parsed.map_err(|_| err(n, format!("bad lengths `{value}`")))?);
                }
                "hard_radius" => {
                    hard_radius = Some(if value == "none" {
                        None
                    } else {
                        Some(
                            value
                                .parse::<f64>()
                                .map_err(|_| err(n, format!("bad hard_radius `{value}`")))?,
                        )
                    })
                }
                other => return Err(err(n, format!("unknown header field `{other}`"))),
            }
        }
        let dim = dim.ok_or_else(|| err(n, "header lacks dim".into()))?;
        let lengths = lengths.ok_or_else(|| err(n, "header lacks lengths".into()))?;
        if lengths.len() != dim {
            return Err(err(
                n,
                format!("dim={dim} but {} lengths given", lengths.len()),
            ));
        }
        let domain = BoxDomain::new(&lengths).map_err(|e| err(n, e.to_string()))?;

        let (n, prov) = lines.next().ok_or_else(|| err(3, "missing provenance line".into()))?;
        let provenance = prov
            .strip_prefix("provenance=")
            .ok_or_else(|| err(n, "expected `provenance=`".into()))?;

        let mut coords = Vec::new();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut count = 0;
            for tok in line.split_whitespace() {
                let x: f64 = tok
                    .parse()
                    .map_err(|_| err(n, format!("bad coordinate `{tok}`")))?;
                if !x.is_finite() {
                    return Err(err(n, format!("coordinate `{tok}` is not finite")));
                }
                coords.push(x);
                count += 1;
            }
            if count != dim {
                return Err(err(
                    n,
                    format!("dimension mismatch: row has {count} values, header declares dim={dim}"),
                ));
            }
        }
        PointPattern::new(domain, coords)
            .and_then(|p| p.with_hard_radius(hard_radius.flatten()))
            .map(|p| p.with_provenance(provenance))
            .map_err(|e| err(2, e.to_string()))
    }
}

/// Decimal rendering with 17 significant digits, enough to round-trip any f64.
pub fn format_coord(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).clamp(1, 40) as usize;
    format!("{x:.decimals$}")
}

pub fn load_pattern(path: impl AsRef<Path>) -> Result<PointPattern, PatternError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| PatternError::Io {
        path: path.display().to_string(),
        source,
    })?;
    PointPattern::parse(&text)
}

pub fn save_pattern(pattern: &PointPattern, path: impl AsRef<Path>) -> Result<(), PatternError> {
    let path = path.as_ref();
    let io_err = |source| PatternError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    pattern.write_to(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}
