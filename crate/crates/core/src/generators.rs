//! Seeded point-pattern generators spanning the order-disorder range:
//! Poisson (fully disordered), jittered lattices (disordered but
//! hyperuniform), perfect lattices, and random-sequential-addition packings
//! of hard disks or spheres.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{BoxDomain, Seed};
use crate::exec;
use crate::pattern::{PatternError, PointPattern};

/// Relative tolerance for box/lattice commensurability.
const COMMENSURATE_TOL: f64 = 1e-9;

/// Highest packing fraction accepted as an RSA target (2D disks, 3D spheres).
pub const RSA_FRACTION_CAP_2D: f64 = 0.5;
pub const RSA_FRACTION_CAP_3D: f64 = 0.3;

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "box length {length} on axis {axis} is not a multiple of the lattice cell {cell}; \
         nearest commensurate length is {nearest_length} (or use spacing {nearest_spacing})"
    )]
    Incommensurate {
        axis: usize,
        length: f64,
        cell: f64,
        nearest_length: f64,
        nearest_spacing: f64,
    },
    #[error("target unreachable: placed {placed} of {target} after {attempts} consecutive rejections")]
    TargetUnreachable {
        placed: usize,
        target: usize,
        attempts: u64,
    },
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    Square,
    Triangular,
    Cubic,
}

impl LatticeKind {
    pub fn dim(self) -> usize {
        match self {
            LatticeKind::Square | LatticeKind::Triangular => 2,
            LatticeKind::Cubic => 3,
        }
    }

    /// The hypercubic lattice of a given dimension.
    pub fn hypercubic(dim: usize) -> Self {
        if dim == 3 {
            LatticeKind::Cubic
        } else {
            LatticeKind::Square
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatticeKind::Square => "square",
            LatticeKind::Triangular => "triangular",
            LatticeKind::Cubic => "cubic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RsaTarget {
    Count(usize),
    Fraction(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Poisson {
        intensity: f64,
    },
    Lattice {
        lattice: LatticeKind,
        spacing: f64,
    },
    PerturbedLattice {
        spacing: f64,
        jitter: f64,
    },
    RsaPacking {
        hard_radius: f64,
        target: RsaTarget,
        max_attempts: u64,
    },
}

/// A generator recipe: kind, parameters and box. Seeds are supplied per call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub domain: BoxDomain,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, domain: BoxDomain) -> Self {
        Self { kind, domain }
    }

    /// Checks parameter ranges and lattice commensurability without generating.
    pub fn validate(&self) -> Result<(), GenerateError> {
        match &self.kind {
            GeneratorKind::Poisson { intensity } => check_intensity(*intensity),
            GeneratorKind::Lattice { lattice, spacing } => {
                lattice_shape(&self.domain, *lattice, *spacing).map(|_| ())
            }
            GeneratorKind::PerturbedLattice { spacing, jitter } => {
                check_jitter(*spacing, *jitter)?;
                lattice_shape(&self.domain, LatticeKind::hypercubic(self.domain.dim()), *spacing)
                    .map(|_| ())
            }
            GeneratorKind::RsaPacking {
                hard_radius,
                target,
                ..
            } => rsa_target_count(&self.domain, *hard_radius, *target).map(|_| ()),
        }
    }

    pub fn generate(&self, seed: Seed) -> Result<PointPattern, GenerateError> {
        let d = self.domain.clone();
        match &self.kind {
            GeneratorKind::Poisson { intensity } => generate_poisson(d, *intensity, seed),
            GeneratorKind::Lattice { lattice, spacing } => generate_lattice(d, *lattice, *spacing),
            GeneratorKind::PerturbedLattice { spacing, jitter } => {
                generate_perturbed_lattice(d, *spacing, *jitter, seed)
            }
            GeneratorKind::RsaPacking {
                hard_radius,
                target,
                max_attempts,
            } => generate_rsa_packing(d, *hard_radius, *target, *max_attempts, seed),
        }
    }
}

fn check_intensity(intensity: f64) -> Result<(), GenerateError> {
    if intensity.is_finite() && intensity >= 0.0 {
        Ok(())
    } else {
        Err(GenerateError::InvalidParameter(format!(
            "intensity must be finite and >= 0, got {intensity}"
        )))
    }
}

fn check_jitter(spacing: f64, jitter: f64) -> Result<(), GenerateError> {
    if !(jitter.is_finite() && jitter >= 0.0 && jitter < spacing / 2.0) {
        return Err(GenerateError::InvalidParameter(format!(
            "jitter must satisfy 0 <= jitter < spacing/2 = {}, got {jitter}",
            spacing / 2.0
        )));
    }
    Ok(())
}

fn uniform_point(domain: &BoxDomain, rng: &mut impl Rng, out: &mut [f64]) {
    for (axis, x) in out.iter_mut().enumerate() {
        *x = domain.wrap_coord(axis, rng.random::<f64>() * domain.length(axis));
    }
}

/// Homogeneous Poisson process: the count is Poisson(ρ|box|), positions are
/// independent and uniform.
pub fn generate_poisson(
    domain: BoxDomain,
    intensity: f64,
    seed: Seed,
) -> Result<PointPattern, GenerateError> {
    check_intensity(intensity)?;
    let mut rng = exec::rng(seed);
    let mean = intensity * domain.measure();
    let n = if mean > 0.0 {
        let law = Poisson::new(mean)
            .map_err(|e| GenerateError::InvalidParameter(format!("poisson mean {mean}: {e}")))?;
        law.sample(&mut rng) as usize
    } else {
        0
    };
    let dim = domain.dim();
    let mut coords = vec![0.0; n * dim];
    for p in coords.chunks_exact_mut(dim) {
        uniform_point(&domain, &mut rng, p);
    }
    Ok(PointPattern::new(domain, coords)?
        .with_provenance(format!("poisson seed={seed} rho={intensity}")))
}

/// Number of generating cells along each axis, or the commensurability error.
fn lattice_shape(
    domain: &BoxDomain,
    lattice: LatticeKind,
    spacing: f64,
) -> Result<Vec<usize>, GenerateError> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(GenerateError::InvalidParameter(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    if lattice.dim() != domain.dim() {
        return Err(GenerateError::InvalidParameter(format!(
            "{lattice} lattice needs a {}D box, got {}D",
            lattice.dim(),
            domain.dim()
        )));
    }
    let cells: Vec<f64> = match lattice {
        LatticeKind::Square | LatticeKind::Cubic => vec![spacing; domain.dim()],
        // two rows of height a·√3/2 per vertical period
        LatticeKind::Triangular => vec![spacing, spacing * 3f64.sqrt()],
    };
    let mut counts = Vec::with_capacity(cells.len());
    for (axis, &cell) in cells.iter().enumerate() {
        let length = domain.length(axis);
        let ratio = length / cell;
        let nearest = ratio.round().max(1.0);
        if (ratio - nearest).abs() > COMMENSURATE_TOL * nearest {
            // spacing that makes this axis commensurate with the same cell count
            let per_spacing = cell / spacing;
            return Err(GenerateError::Incommensurate {
                axis,
                length,
                cell,
                nearest_length: nearest * cell,
                nearest_spacing: length / (nearest * per_spacing),
            });
        }
        counts.push(nearest as usize);
    }
    Ok(counts)
}

fn lattice_sites(domain: &BoxDomain, lattice: LatticeKind, spacing: f64) -> Result<Vec<f64>, GenerateError> {
    let shape = lattice_shape(domain, lattice, spacing)?;
    let mut coords = Vec::new();
    match lattice {
        LatticeKind::Square => {
            for j in 0..shape[1] {
                for i in 0..shape[0] {
                    coords.extend([i as f64 * spacing, j as f64 * spacing]);
                }
            }
        }
        LatticeKind::Cubic => {
            for k in 0..shape[2] {
                for j in 0..shape[1] {
                    for i in 0..shape[0] {
                        coords.extend([i as f64 * spacing, j as f64 * spacing, k as f64 * spacing]);
                    }
                }
            }
        }
        LatticeKind::Triangular => {
            let row_height = spacing * 3f64.sqrt() / 2.0;
            for j in 0..2 * shape[1] {
                let shift = if j % 2 == 1 { spacing / 2.0 } else { 0.0 };
                for i in 0..shape[0] {
                    coords.extend([i as f64 * spacing + shift, j as f64 * row_height]);
                }
            }
        }
    }
    Ok(coords)
}

/// Perfect lattice filling a commensurate box. Deterministic; takes no seed.
pub fn generate_lattice(
    domain: BoxDomain,
    lattice: LatticeKind,
    spacing: f64,
) -> Result<PointPattern, GenerateError> {
    let coords = lattice_sites(&domain, lattice, spacing)?;
    Ok(PointPattern::new(domain, coords)?
        .with_provenance(format!("lattice kind={lattice} spacing={spacing}")))
}

/// Square (2D) or cubic (3D) lattice with every site displaced independently
/// and uniformly in `[-jitter, jitter]` per axis.
pub fn generate_perturbed_lattice(
    domain: BoxDomain,
    spacing: f64,
    jitter: f64,
    seed: Seed,
) -> Result<PointPattern, GenerateError> {
    check_jitter(spacing, jitter)?;
    let lattice = LatticeKind::hypercubic(domain.dim());
    let mut coords = lattice_sites(&domain, lattice, spacing)?;
    if jitter > 0.0 {
        let mut rng = exec::rng(seed);
        for x in coords.iter_mut() {
            *x += jitter * (2.0 * rng.random::<f64>() - 1.0);
        }
    }
    Ok(PointPattern::new(domain, coords)?.with_provenance(format!(
        "perturbed_lattice seed={seed} spacing={spacing} jitter={jitter}"
    )))
}

fn ball_volume(dim: usize, r: f64) -> f64 {
    if dim == 3 {
        4.0 / 3.0 * PI * r.powi(3)
    } else {
        PI * r * r
    }
}

fn rsa_target_count(domain: &BoxDomain, hard_radius: f64, target: RsaTarget) -> Result<usize, GenerateError> {
    if !(hard_radius.is_finite() && hard_radius > 0.0) {
        return Err(GenerateError::InvalidParameter(format!(
            "hard radius must be positive, got {hard_radius}"
        )));
    }
    match target {
        RsaTarget::Count(n) => Ok(n),
        RsaTarget::Fraction(phi) => {
            let cap = if domain.dim() == 3 {
                RSA_FRACTION_CAP_3D
            } else {
                RSA_FRACTION_CAP_2D
            };
            if !(phi > 0.0 && phi <= cap) {
                return Err(GenerateError::InvalidParameter(format!(
                    "packing fraction must lie in (0, {cap}] for {}D RSA, got {phi}",
                    domain.dim()
                )));
            }
            Ok((phi * domain.measure() / ball_volume(domain.dim(), hard_radius)).round() as usize)
        }
    }
}

/// Uniform cell grid over the torus with cell edges no shorter than the
/// interaction distance, so overlap candidates live in adjacent cells.
struct CellGrid {
    shape: Vec<usize>,
    edge: Vec<f64>,
    cells: Vec<Vec<u32>>,
}

impl CellGrid {
    fn new(domain: &BoxDomain, min_edge: f64) -> Self {
        let shape: Vec<usize> = domain
            .lengths()
            .iter()
            .map(|l| ((l / min_edge).floor() as usize).clamp(1, 1 << 10))
            .collect();
        let edge = domain.lengths().iter().zip(&shape).map(|(l, n)| l / *n as f64).collect();
        let total = shape.iter().product();
        Self {
            shape,
            edge,
            cells: vec![Vec::new(); total],
        }
    }

    fn cell_of(&self, p: &[f64]) -> Vec<usize> {
        p.iter()
            .zip(&self.edge)
            .zip(&self.shape)
            .map(|((x, e), n)| ((x / e) as usize).min(n - 1))
            .collect()
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .rev()
            .fold(0, |acc, (i, n)| acc * n + i)
    }

    /// Distinct flat indices of the cell containing `p` and its neighbors.
    fn neighborhood(&self, p: &[f64]) -> Vec<usize> {
        let home = self.cell_of(p);
        let dim = home.len();
        let mut out = Vec::with_capacity(27);
        let combos = 3usize.pow(dim as u32);
        let mut idx = vec![0usize; dim];
        for c in 0..combos {
            let mut code = c;
            for axis in 0..dim {
                let off = (code % 3) as isize - 1;
                code /= 3;
                let n = self.shape[axis] as isize;
                idx[axis] = (home[axis] as isize + off).rem_euclid(n) as usize;
            }
            out.push(self.flat(&idx));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn insert(&mut self, p: &[f64], id: u32) {
        let home = self.cell_of(p);
        let flat = self.flat(&home);
        self.cells[flat].push(id);
    }
}

/// Random sequential addition of hard disks (2D) or spheres (3D).
///
/// Candidates are uniform in the box and accepted iff their periodic distance
/// to every accepted center is at least `2r`. Generation stops at the target
/// count or after `max_attempts` consecutive rejections.
pub fn generate_rsa_packing(
    domain: BoxDomain,
    hard_radius: f64,
    target: RsaTarget,
    max_attempts: u64,
    seed: Seed,
) -> Result<PointPattern, GenerateError> {
    let n_target = rsa_target_count(&domain, hard_radius, target)?;
    if max_attempts == 0 {
        return Err(GenerateError::InvalidParameter("max_attempts must be >= 1".into()));
    }
    let dim = domain.dim();
    let contact_sq = 4.0 * hard_radius * hard_radius;
    let mut grid = CellGrid::new(&domain, 2.0 * hard_radius);
    let mut rng = exec::rng(seed);
    let mut coords: Vec<f64> = Vec::with_capacity(n_target * dim);
    let mut candidate = vec![0.0; dim];
    let mut rejections = 0u64;
    let mut placed = 0usize;

    while placed < n_target {
        uniform_point(&domain, &mut rng, &mut candidate);
        let overlaps = grid.neighborhood(&candidate).into_iter().any(|cell| {
            grid.cells[cell].iter().any(|&j| {
                let q = &coords[j as usize * dim..(j as usize + 1) * dim];
                domain.periodic_distance_sq(&candidate, q) < contact_sq
            })
        });
        if overlaps {
            rejections += 1;
            if rejections >= max_attempts {
                return Err(GenerateError::TargetUnreachable {
                    placed,
                    target: n_target,
                    attempts: rejections,
                });
            }
            continue;
        }
        rejections = 0;
        grid.insert(&candidate, placed as u32);
        coords.extend_from_slice(&candidate);
        placed += 1;
    }

    let target_desc = match target {
        RsaTarget::Count(n) => format!("count={n}"),
        RsaTarget::Fraction(phi) => format!("phi={phi}"),
    };
    Ok(PointPattern::new(domain, coords)?
        .with_hard_radius(Some(hard_radius))?
        .with_provenance(format!(
            "rsa_packing seed={seed} r={hard_radius} {target_desc} max_attempts={max_attempts}"
        )))
}

/// `n` realizations of one recipe; realization `i` uses `base_seed.derive(i)`.
pub fn ensemble(
    spec: &GeneratorSpec,
    n_realizations: usize,
    base_seed: Seed,
) -> Result<Vec<PointPattern>, GenerateError> {
    if n_realizations == 0 {
        return Err(GenerateError::InvalidParameter(
            "ensemble needs at least one realization".into(),
        ));
    }
    spec.validate()?;
    exec::map_indexed(n_realizations, |i| spec.generate(base_seed.derive(i as u64)))
        .into_iter()
        .collect()
}
