use super::{BinaryField, FieldError};
use crate::tessellation::Tessellation;

fn segment_distance_sq(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len_sq = d[0] * d[0] + d[1] * d[1];
    let t = if len_sq > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * d[0] - p[0], a[1] + t * d[1] - p[1]];
    q[0] * q[0] + q[1] * q[1]
}

/// Draws the cell walls of a tessellation as dark pixels.
///
/// The box is split into `pixels_per_axis` columns; the row count follows
/// from square pixels and must come out whole. A pixel is dark when its
/// center is within `wall_halfwidth` of some cell edge, measured on the torus.
pub fn rasterize_tessellation(
    tess: &Tessellation,
    pixels_per_axis: usize,
    wall_halfwidth: f64,
) -> Result<BinaryField, FieldError> {
    if pixels_per_axis < 16 {
        return Err(FieldError::InvalidArgument(format!(
            "need at least 16 pixels per axis, got {pixels_per_axis}"
        )));
    }
    if !(wall_halfwidth >= 0.0 && wall_halfwidth.is_finite()) {
        return Err(FieldError::InvalidArgument(format!(
            "wall half-width must be a finite non-negative length, got {wall_halfwidth}"
        )));
    }
    let lengths = tess.domain().lengths();
    let nx = pixels_per_axis;
    let h = lengths[0] / nx as f64;
    let rows = lengths[1] / h;
    let ny = rows.round();
    if ny < 1.0 || (rows - ny).abs() > 1e-9 * ny {
        return Err(FieldError::InvalidArgument(format!(
            "box {}x{} cannot be split into square pixels with {nx} columns",
            lengths[0], lengths[1]
        )));
    }
    let ny = ny as usize;
    let half_diagonal = 0.5 * lengths[0].hypot(lengths[1]);
    if wall_halfwidth >= half_diagonal && !tess.cells().is_empty() {
        return Ok(BinaryField::from_bits(nx, ny, h, vec![true; nx * ny])?.assert_periodic(true));
    }
    let mut dark = vec![false; nx * ny];
    let w_sq = wall_halfwidth * wall_halfwidth;
    let (nxi, nyi) = (nx as i64, ny as i64);

    for cell in tess.cells() {
        let n = cell.vertices.len();
        for k in 0..n {
            let a = cell.vertices[k];
            let b = cell.vertices[(k + 1) % n];
            let lo = [a[0].min(b[0]) - wall_halfwidth, a[1].min(b[1]) - wall_halfwidth];
            let hi = [a[0].max(b[0]) + wall_halfwidth, a[1].max(b[1]) + wall_halfwidth];
            // unwrapped pixel indices whose centers (i + 1/2) h fall in the box
            let c0 = (lo[0] / h - 0.5).ceil() as i64;
            let c1 = (hi[0] / h - 0.5).floor() as i64;
            let r0 = (lo[1] / h - 0.5).ceil() as i64;
            let r1 = (hi[1] / h - 0.5).floor() as i64;
            for row in r0..=r1 {
                let wr = row.rem_euclid(nyi) as usize;
                let y = (row as f64 + 0.5) * h;
                for col in c0..=c1 {
                    let wc = col.rem_euclid(nxi) as usize;
                    let idx = wr * nx + wc;
                    if dark[idx] {
                        continue;
                    }
                    let x = (col as f64 + 0.5) * h;
                    if segment_distance_sq([x, y], a, b) <= w_sq {
                        dark[idx] = true;
                    }
                }
            }
        }
    }
    Ok(BinaryField::from_bits(nx, ny, h, dark)?.assert_periodic(true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BoxDomain;
    use crate::generators::{generate_lattice, LatticeKind};
    use crate::tessellation::voronoi;

    fn lattice_tess() -> Tessellation {
        let p = generate_lattice(BoxDomain::square(8.0).unwrap(), LatticeKind::Square, 1.0).unwrap();
        voronoi(&p).unwrap()
    }

    #[test]
    fn argument_checks() {
        let t = lattice_tess();
        assert!(rasterize_tessellation(&t, 8, 0.1).is_err());
        assert!(rasterize_tessellation(&t, 64, -0.1).is_err());
    }

    #[test]
    fn square_walls_match_pixel_count() {
        // walls sit on pixel edges at x = k + 1/2; centers within 0.05 of a
        // wall are the two nearest on each side, so 4 of every 32 columns
        let f = rasterize_tessellation(&lattice_tess(), 256, 0.05).unwrap();
        assert!(f.is_periodic());
        let strip: f64 = 4.0 / 32.0;
        let expected = 1.0 - (1.0 - strip).powi(2);
        assert_eq!(f.dark_fraction(), expected);
    }

    #[test]
    fn square_walls_approach_strip_area() {
        // strips of width 0.1 along 16 lines of length 8, minus 64 overlaps of 0.01
        let continuum = (2.0 * 0.05 * 128.0 - 64.0 * 0.01) / 64.0;
        let f = rasterize_tessellation(&lattice_tess(), 2048, 0.05).unwrap();
        assert!((f.dark_fraction() - continuum).abs() < 0.1 * continuum, "{}", f.dark_fraction());
    }

    #[test]
    fn zero_and_huge_walls() {
        let t = lattice_tess();
        let thin = rasterize_tessellation(&t, 100, 0.0).unwrap();
        assert_eq!(thin.dark_fraction(), 0.0);
        let thick = rasterize_tessellation(&t, 64, 0.5).unwrap();
        assert_eq!(thick.dark_fraction(), 1.0);
    }
}
