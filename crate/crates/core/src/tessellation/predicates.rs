//! Exact orientation and in-circle predicates on periodic images.
//!
//! A point image is `base + shift·L` with `base` a double and `shift` an
//! integer vector. Predicates first evaluate in floating point with a
//! conservative error bound and fall back to exact big-integer arithmetic
//! when the sign is not certain. Because the exact value only depends on
//! coordinate differences, every decision is invariant under translating all
//! inputs by whole periods.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// A periodic image of pattern point `index`, shifted by `offset` box periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexRef {
    pub index: u32,
    pub offset: [i32; 2],
}

impl VertexRef {
    pub fn new(index: u32, offset: [i32; 2]) -> Self {
        Self { index, offset }
    }

    pub fn shifted(self, by: [i32; 2]) -> Self {
        Self {
            index: self.index,
            offset: [self.offset[0] + by[0], self.offset[1] + by[1]],
        }
    }
}

/// A point given as `base + shift·lengths`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint {
    pub base: [f64; 2],
    pub shift: [i32; 2],
}

impl ImagePoint {
    pub fn plain(base: [f64; 2]) -> Self {
        Self { base, shift: [0, 0] }
    }

    #[inline]
    pub fn approx(&self, lengths: [f64; 2]) -> [f64; 2] {
        [
            self.base[0] + self.shift[0] as f64 * lengths[0],
            self.base[1] + self.shift[1] as f64 * lengths[1],
        ]
    }
}

const EPS: f64 = f64::EPSILON;

fn decode(x: f64) -> (i64, i32) {
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (m, e) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1i64 << 52), exp_bits - 1075)
    };
    (if negative { -m } else { m }, e)
}

/// Exact integer images of the points, all scaled by one common power of two.
fn exact_coords(points: &[ImagePoint], lengths: [f64; 2]) -> Vec<[BigInt; 2]> {
    let mut min_exp = i32::MAX;
    for v in points
        .iter()
        .flat_map(|p| p.base)
        .chain(lengths)
    {
        if v != 0.0 {
            min_exp = min_exp.min(decode(v).1);
        }
    }
    if min_exp == i32::MAX {
        min_exp = 0;
    }
    let to_int = |v: f64| -> BigInt {
        let (m, e) = decode(v);
        BigInt::from(m) << ((e - min_exp) as usize)
    };
    let l = [to_int(lengths[0]), to_int(lengths[1])];
    points
        .iter()
        .map(|p| {
            [
                to_int(p.base[0]) + &l[0] * p.shift[0],
                to_int(p.base[1]) + &l[1] * p.shift[1],
            ]
        })
        .collect()
}

fn sign_of(x: &BigInt) -> Ordering {
    if x.is_zero() {
        Ordering::Equal
    } else if x.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

fn max_abs(points: &[[f64; 2]]) -> f64 {
    points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Sign of the signed area of triangle `abc`: `Greater` when counterclockwise.
pub fn orient(a: &ImagePoint, b: &ImagePoint, c: &ImagePoint, lengths: [f64; 2]) -> Ordering {
    let pa = a.approx(lengths);
    let pb = b.approx(lengths);
    let pc = c.approx(lengths);
    let (acx, acy) = (pa[0] - pc[0], pa[1] - pc[1]);
    let (bcx, bcy) = (pb[0] - pc[0], pb[1] - pc[1]);
    let det = acx * bcy - acy * bcx;
    let m = max_abs(&[pa, pb, pc]);
    let d = acx.abs().max(acy.abs()).max(bcx.abs()).max(bcy.abs());
    let bound = 128.0 * EPS * (m * d + d * d);
    if det > bound {
        return Ordering::Greater;
    }
    if det < -bound {
        return Ordering::Less;
    }
    orient_exact(a, b, c, lengths)
}

pub(crate) fn orient_exact(a: &ImagePoint, b: &ImagePoint, c: &ImagePoint, lengths: [f64; 2]) -> Ordering {
    let e = exact_coords(&[*a, *b, *c], lengths);
    let acx = &e[0][0] - &e[2][0];
    let acy = &e[0][1] - &e[2][1];
    let bcx = &e[1][0] - &e[2][0];
    let bcy = &e[1][1] - &e[2][1];
    sign_of(&(acx * bcy - acy * bcx))
}

/// Sign of the in-circle determinant: `Greater` when `d` lies strictly inside
/// the circle through counterclockwise `a, b, c`.
pub fn incircle(
    a: &ImagePoint,
    b: &ImagePoint,
    c: &ImagePoint,
    d: &ImagePoint,
    lengths: [f64; 2],
) -> Ordering {
    let pa = a.approx(lengths);
    let pb = b.approx(lengths);
    let pc = c.approx(lengths);
    let pd = d.approx(lengths);
    let (adx, ady) = (pa[0] - pd[0], pa[1] - pd[1]);
    let (bdx, bdy) = (pb[0] - pd[0], pb[1] - pd[1]);
    let (cdx, cdy) = (pc[0] - pd[0], pc[1] - pd[1]);
    let alift = adx * adx + ady * ady;
    let blift = bdx * bdx + bdy * bdy;
    let clift = cdx * cdx + cdy * cdy;
    let det = alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx)
        + clift * (adx * bdy - ady * bdx);
    let m = max_abs(&[pa, pb, pc, pd]);
    let span = [adx, ady, bdx, bdy, cdx, cdy]
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let bound = 1024.0 * EPS * (m * span.powi(3) + span.powi(4));
    if det > bound {
        return Ordering::Greater;
    }
    if det < -bound {
        return Ordering::Less;
    }
    incircle_exact(a, b, c, d, lengths)
}

pub(crate) fn incircle_exact(
    a: &ImagePoint,
    b: &ImagePoint,
    c: &ImagePoint,
    d: &ImagePoint,
    lengths: [f64; 2],
) -> Ordering {
    let e = exact_coords(&[*a, *b, *c, *d], lengths);
    let diff = |k: usize| (&e[k][0] - &e[3][0], &e[k][1] - &e[3][1]);
    let (adx, ady) = diff(0);
    let (bdx, bdy) = diff(1);
    let (cdx, cdy) = diff(2);
    let alift = &adx * &adx + &ady * &ady;
    let blift = &bdx * &bdx + &bdy * &bdy;
    let clift = &cdx * &cdx + &cdy * &cdy;
    let det = alift * (&bdx * &cdy - &bdy * &cdx)
        + blift * (&cdx * &ady - &cdy * &adx)
        + clift * (&adx * &bdy - &ady * &bdx);
    sign_of(&det)
}

/// In-circle test under symbolic perturbation.
///
/// Each point's lifted coordinate `x² + y²` is raised by `ε^rank`, where the
/// rank is the position of its key in ascending order (smallest key = most
/// significant). Exactly cocircular quadruples are therefore decided by the
/// orientation of the other three points, taken in key order. The result is
/// never `Equal` for a non-degenerate triangle `abc`.
pub fn incircle_perturbed<K: Ord + Copy>(
    pts: [(&ImagePoint, K); 4],
    lengths: [f64; 2],
) -> Ordering {
    let [(a, _), (b, _), (c, _), (d, _)] = pts;
    let exact = incircle(a, b, c, d, lengths);
    if exact != Ordering::Equal {
        return exact;
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by_key(|&k| pts[k].1);
    for k in order {
        // ∂det/∂lift of each point
        let s = match k {
            0 => orient(b, c, d, lengths),
            1 => orient(c, a, d, lengths),
            2 => orient(a, b, d, lengths),
            _ => orient(a, b, c, lengths).reverse(),
        };
        if s != Ordering::Equal {
            return s;
        }
    }
    Ordering::Equal
}
