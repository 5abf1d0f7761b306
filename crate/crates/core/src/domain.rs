//! Periodic box geometry shared by every analysis.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pattern::PatternError;

/// Axis-aligned periodic box in two or three dimensions.
///
/// Coordinates follow the half-open convention `[0, L)` on every axis so each
/// point has exactly one representative inside the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lengths: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lengths: &[f64]) -> Result<Self, PatternError> {
        if lengths.len() != 2 && lengths.len() != 3 {
            return Err(PatternError::InvalidBox(format!(
                "dimension must be 2 or 3, got {}",
                lengths.len()
            )));
        }
        if let Some((axis, l)) = lengths
            .iter()
            .enumerate()
            .find(|(_, l)| !(l.is_finite() && **l > 0.0))
        {
            return Err(PatternError::InvalidBox(format!(
                "length on axis {axis} must be positive and finite, got {l}"
            )));
        }
        Ok(Self {
            lengths: lengths.to_vec(),
        })
    }

    pub fn square(side: f64) -> Result<Self, PatternError> {
        Self::new(&[side, side])
    }

    pub fn cube(side: f64) -> Result<Self, PatternError> {
        Self::new(&[side, side, side])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    #[inline]
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    #[inline]
    pub fn length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    /// Area in 2D, volume in 3D.
    pub fn measure(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn min_length(&self) -> f64 {
        self.lengths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Always true: v1 boxes are fully periodic.
    pub fn is_periodic(&self) -> bool {
        true
    }

    /// Wraps a single coordinate into `[0, L)`.
    #[inline]
    pub fn wrap_coord(&self, axis: usize, x: f64) -> f64 {
        let l = self.lengths[axis];
        if (0.0..l).contains(&x) {
            return x;
        }
        let r = x.rem_euclid(l);
        // rem_euclid rounds tiny negative values up to exactly L
        if r >= l {
            0.0
        } else {
            r
        }
    }

    pub fn wrap_in_place(&self, p: &mut [f64]) {
        debug_assert_eq!(p.len(), self.dim());
        for (axis, x) in p.iter_mut().enumerate() {
            *x = self.wrap_coord(axis, *x);
        }
    }

    /// Returns the representative of `p` inside the box.
    pub fn wrap_point(&self, p: &[f64]) -> Vec<f64> {
        let mut out = p.to_vec();
        self.wrap_in_place(&mut out);
        out
    }

    /// Minimum-image displacement along one axis.
    #[inline]
    pub fn min_image(&self, axis: usize, dx: f64) -> f64 {
        let l = self.lengths[axis];
        dx - l * (dx / l).round()
    }

    #[inline]
    pub fn periodic_distance_sq(&self, p: &[f64], q: &[f64]) -> f64 {
        p.iter()
            .zip(q)
            .enumerate()
            .map(|(axis, (a, b))| {
                let d = self.min_image(axis, b - a);
                d * d
            })
            .sum()
    }

    /// Euclidean distance between the closest periodic images of `p` and `q`.
    pub fn periodic_distance(&self, p: &[f64], q: &[f64]) -> f64 {
        self.periodic_distance_sq(p, q).sqrt()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p
                .iter()
                .zip(&self.lengths)
                .all(|(x, l)| *x >= 0.0 && x < l)
    }
}

impl fmt::Display for BoxDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lengths.iter().map(|l| format!("{l}")).collect();
        f.write_str(&parts.join("x"))
    }
}

/// Seed for every stochastic operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Golden-ratio increment of the SplitMix64 generator.
    const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

    /// Seed for realization `index` of an ensemble.
    ///
    /// `derive(i) = mix64(mix64(base) ^ (i + 1)·γ)` where `mix64` is the
    /// SplitMix64 finalizer and `γ = 0x9E3779B97F4A7C15`. The result depends
    /// only on `(base, index)`, never on evaluation order.
    pub fn derive(self, index: u64) -> Seed {
        Seed(mix64(
            mix64(self.0) ^ index.wrapping_add(1).wrapping_mul(Self::GAMMA),
        ))
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> BoxDomain {
        BoxDomain::square(1.0).unwrap()
    }

    #[test]
    fn wrap_examples() {
        let b = unit();
        assert_eq!(b.wrap_point(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(b.wrap_point(&[1.25, -0.25]), vec![0.25, 0.75]);
        assert_eq!(b.wrap_point(&[3.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(b.wrap_point(&[-1e-20, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn distance_examples() {
        let b = unit();
        assert!((b.periodic_distance(&[0.1, 0.5], &[0.9, 0.5]) - 0.2).abs() < 1e-12);
        assert_eq!(b.periodic_distance(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        assert!((b.periodic_distance(&[0.0, 0.0], &[0.5, 0.5]) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(BoxDomain::new(&[1.0]).is_err());
        assert!(BoxDomain::new(&[1.0, 0.0]).is_err());
        assert!(BoxDomain::new(&[1.0, f64::NAN]).is_err());
        assert!(BoxDomain::new(&[1.0, 1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let base = Seed(42);
        assert_ne!(base.derive(0), base.derive(1));
        assert_eq!(base.derive(5), Seed(42).derive(5));
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent_and_shifts_by_periods(
            x in -100.0f64..100.0, y in -100.0f64..100.0, z in -100.0f64..100.0,
        ) {
            let b = BoxDomain::new(&[3.0, 1.5, 7.25]).unwrap();
            let w = b.wrap_point(&[x, y, z]);
            prop_assert!(b.contains(&w));
            prop_assert_eq!(b.wrap_point(&w), w.clone());
            for (axis, (orig, wrapped)) in [x, y, z].iter().zip(&w).enumerate() {
                let k = (orig - wrapped) / b.length(axis);
                prop_assert!((k - k.round()).abs() < 1e-9);
            }
        }

        #[test]
        fn distance_is_a_metric(
            p in prop::array::uniform2(0.0f64..5.0),
            q in prop::array::uniform2(0.0f64..5.0),
            r in prop::array::uniform2(0.0f64..5.0),
        ) {
            let b = BoxDomain::new(&[5.0, 4.0]).unwrap();
            let p = b.wrap_point(&p);
            let q = b.wrap_point(&q);
            let r = b.wrap_point(&r);
            let pq = b.periodic_distance(&p, &q);
            prop_assert!((pq - b.periodic_distance(&q, &p)).abs() < 1e-12);
            prop_assert!(pq <= b.periodic_distance(&p, &r) + b.periodic_distance(&r, &q) + 1e-12);
            let direct = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            prop_assert!(pq <= direct + 1e-12);
            prop_assert!(pq <= 0.5 * (25.0f64 + 16.0).sqrt() + 1e-12);
        }
    }
}
