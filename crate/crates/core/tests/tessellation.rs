use std::collections::BTreeSet;

use hupa_core::generators::{generate_lattice, generate_perturbed_lattice, generate_poisson, LatticeKind};
use hupa_core::tessellation::{
    cell_statistics, delaunay, ensemble_cell_statistics, triangle_statistics, voronoi, TessellationError,
    Triangulation, VertexRef,
};
use hupa_core::{BoxDomain, PointPattern, Seed};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn poisson(l: f64, seed: u64) -> PointPattern {
    generate_poisson(BoxDomain::square(l).unwrap(), 1.0, Seed(seed)).unwrap()
}

/// Edge key independent of which endpoint is taken as home.
fn edge_key(a: VertexRef, b: VertexRef) -> (u32, u32, [i32; 2]) {
    let ab = (a.index, b.index, [b.offset[0] - a.offset[0], b.offset[1] - a.offset[1]]);
    let ba = (b.index, a.index, [a.offset[0] - b.offset[0], a.offset[1] - b.offset[1]]);
    ab.min(ba)
}

fn delaunay_edges(tri: &Triangulation) -> BTreeSet<(u32, u32, [i32; 2])> {
    tri.triangles()
        .iter()
        .flat_map(|t| (0..3).map(move |k| edge_key(t[k], t[(k + 1) % 3])))
        .collect()
}

/// Points strictly inside some triangle's circumdisk, over all periodic images.
fn circumcircle_violations(tri: &Triangulation) -> usize {
    let l = tri.lengths();
    let mut bad = 0;
    for (t, refs) in tri.triangles().iter().enumerate() {
        let (c, r) = tri.circumcircle(t);
        for (i, p) in tri.points().iter().enumerate() {
            for sx in -2..=2 {
                for sy in -2..=2 {
                    let v = VertexRef::new(i as u32, [sx, sy]);
                    if refs.contains(&v) {
                        continue;
                    }
                    let q = [p[0] + sx as f64 * l[0], p[1] + sy as f64 * l[1]];
                    let d = ((q[0] - c[0]).powi(2) + (q[1] - c[1]).powi(2)).sqrt();
                    if d < r * (1.0 - 1e-9) {
                        bad += 1;
                    }
                }
            }
        }
    }
    bad
}

fn canonical(t: [VertexRef; 3]) -> [VertexRef; 3] {
    let k = (0..3).min_by_key(|&k| t[k]).unwrap();
    let o = t[k].offset;
    let shift = [-o[0], -o[1]];
    [t[k].shifted(shift), t[(k + 1) % 3].shifted(shift), t[(k + 2) % 3].shifted(shift)]
}

#[test]
fn poisson_triangulation_identities() {
    let p = poisson(32.0, 2024);
    let tri = delaunay(&p).unwrap();
    assert_eq!(tri.triangles().len(), 2 * p.len());
    assert_eq!(tri.euler_characteristic(), 0);
    let v = p.len() as i64;
    let e = delaunay_edges(&tri).len() as i64;
    let f = tri.triangles().len() as i64;
    assert_eq!(v - e + f, 0);
    assert!((tri.total_area() - 1024.0).abs() <= 1e-9 * 1024.0);
    assert_eq!(circumcircle_violations(&tri), 0);
    for t in 0..tri.triangles().len() {
        assert!(tri.triangle_area(t) > 0.0);
    }
}

#[test]
fn triangular_lattice_gives_equilateral_triangles() {
    let h = 8.0 * 3f64.sqrt() / 2.0;
    let p = generate_lattice(BoxDomain::new(&[8.0, h]).unwrap(), LatticeKind::Triangular, 1.0).unwrap();
    let tri = delaunay(&p).unwrap();
    assert_eq!(tri.triangles().len(), 128);
    for t in 0..128 {
        assert!((tri.triangle_area(t) - 3f64.sqrt() / 4.0).abs() < 1e-9);
    }
    let tess = voronoi(&p).unwrap();
    for c in tess.cells() {
        assert_eq!(c.side_count(), 6);
    }
}

#[test]
fn square_lattice_triangulation_is_valid_and_reproducible() {
    let p = generate_lattice(BoxDomain::square(10.0).unwrap(), LatticeKind::Square, 1.0).unwrap();
    let a = delaunay(&p).unwrap();
    let b = delaunay(&p).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.triangles().len(), 200);
    assert!((a.total_area() - 100.0).abs() < 1e-9 * 100.0);
    assert_eq!(a.euler_characteristic(), 0);
    assert_eq!(circumcircle_violations(&a), 0);
}

#[test]
fn voronoi_poisson_identities() {
    let p = poisson(32.0, 77);
    let tess = voronoi(&p).unwrap();
    assert_eq!(tess.cells().len(), p.len());
    assert_eq!(tess.mean_side_count(), 6.0);
    assert!((tess.total_area() - 1024.0).abs() <= 1e-9 * 1024.0);
}

#[test]
fn voronoi_cells_are_convex_and_contain_their_generator() {
    let p = poisson(20.0, 5);
    let tess = voronoi(&p).unwrap();
    for cell in tess.cells() {
        let g = tess.generators()[cell.generator];
        let n = cell.vertices.len();
        for k in 0..n {
            let a = cell.vertices[k];
            let b = cell.vertices[(k + 1) % n];
            let c = cell.vertices[(k + 2) % n];
            let turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            assert!(turn > 0.0, "cell {} not strictly convex", cell.generator);
            let side = (b[0] - a[0]) * (g[1] - a[1]) - (b[1] - a[1]) * (g[0] - a[0]);
            assert!(side > 0.0, "generator {} outside its cell", cell.generator);
        }
    }
}

#[test]
fn voronoi_cells_are_nearest_point_regions() {
    // every cell corner is equidistant from the generator and the two
    // neighbors it separates, and no generator image is closer
    let p = poisson(12.0, 31);
    let tess = voronoi(&p).unwrap();
    let d = p.domain();
    for cell in tess.cells() {
        let g = tess.generators()[cell.generator];
        for v in &cell.vertices {
            let own = ((v[0] - g[0]).powi(2) + (v[1] - g[1]).powi(2)).sqrt();
            let nearest = p
                .points()
                .map(|q| d.periodic_distance(q, &d.wrap_point(v)))
                .fold(f64::INFINITY, f64::min);
            assert!((own - nearest).abs() < 1e-9 * own.max(1.0));
        }
    }
}

#[test]
fn voronoi_adjacency_is_dual_to_delaunay_edges() {
    for seed in [1, 2, 3] {
        let p = poisson(16.0, seed);
        let tri = delaunay(&p).unwrap();
        let tess = voronoi(&p).unwrap();
        let mut from_cells = BTreeSet::new();
        for cell in tess.cells() {
            let home = VertexRef::new(cell.generator as u32, [0, 0]);
            for nb in &cell.neighbors {
                from_cells.insert(edge_key(home, *nb));
            }
        }
        assert_eq!(from_cells, delaunay_edges(&tri));
    }
}

#[test]
fn triangulation_ignores_input_order() {
    let p = poisson(16.0, 9);
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(4));
    let shuffled =
        PointPattern::from_points(p.domain().clone(), order.iter().map(|&i| [p.point(i)[0], p.point(i)[1]])).unwrap();
    let a = delaunay(&p).unwrap();
    let b = delaunay(&shuffled).unwrap();
    let mut relabeled: Vec<[VertexRef; 3]> = b
        .triangles()
        .iter()
        .map(|t| canonical(t.map(|v| VertexRef::new(order[v.index as usize] as u32, v.offset))))
        .collect();
    relabeled.sort();
    let mut original: Vec<[VertexRef; 3]> = a.triangles().iter().map(|t| canonical(*t)).collect();
    original.sort();
    assert_eq!(original, relabeled);
}

#[test]
fn square_lattice_cell_statistics() {
    let p = generate_lattice(BoxDomain::square(8.0).unwrap(), LatticeKind::Square, 1.0).unwrap();
    let stats = cell_statistics(&voronoi(&p).unwrap());
    assert_eq!(stats.count, 64);
    assert!(stats.area_cv.abs() < 1e-12);
    assert_eq!(stats.side_histogram.len(), 1);
    assert_eq!(stats.side_histogram[&4], 64);
    assert_eq!(stats.mean_side_count, 4.0);
    assert!((stats.edge_length_mean - 1.0).abs() < 1e-12);
    let tri_stats = triangle_statistics(&delaunay(&p).unwrap());
    assert_eq!(tri_stats.side_histogram[&3], 128);
    assert!((tri_stats.area_mean - 0.5).abs() < 1e-12);
}

#[test]
fn perturbed_lattice_cells_are_more_regular_than_poisson() {
    let d = BoxDomain::square(24.0).unwrap();
    let pl = generate_perturbed_lattice(d.clone(), 1.0, 0.3, Seed(12)).unwrap();
    let po = generate_poisson(d, 1.0, Seed(12)).unwrap();
    let a = cell_statistics(&voronoi(&pl).unwrap());
    let b = cell_statistics(&voronoi(&po).unwrap());
    assert!(a.area_cv < b.area_cv, "{} vs {}", a.area_cv, b.area_cv);
}

#[test]
fn ensemble_statistics_pool_cells() {
    let p = poisson(16.0, 100);
    let single = cell_statistics(&voronoi(&p).unwrap());
    let pooled = ensemble_cell_statistics(std::slice::from_ref(&p)).unwrap();
    assert_eq!(single, pooled);

    let copies = ensemble_cell_statistics(&[p.clone(), p.clone(), p.clone()]).unwrap();
    assert_eq!(copies.count, 3 * single.count);
    assert!((copies.area_mean - single.area_mean).abs() < 1e-12);
    assert!((copies.area_cv - single.area_cv).abs() < 1e-12);
    assert!((copies.edge_length_cv - single.edge_length_cv).abs() < 1e-12);

    let many: Vec<PointPattern> = (0..20).map(|s| poisson(16.0, 500 + s)).collect();
    let stats = ensemble_cell_statistics(&many).unwrap();
    assert_eq!(stats.side_histogram.values().sum::<usize>(), stats.count);
    let mode = stats.side_histogram.iter().max_by_key(|(_, &n)| n).map(|(&s, _)| s).unwrap();
    assert_eq!(mode, 6);
    for q in &many {
        assert_eq!(voronoi(q).unwrap().mean_side_count(), 6.0);
    }

    let cube = PointPattern::empty(BoxDomain::cube(3.0).unwrap());
    assert!(matches!(
        ensemble_cell_statistics(&[p, cube]),
        Err(TessellationError::MixedDimensions { first: 2, other: 3 })
    ));
}

#[test]
fn small_patterns_tile_the_torus() {
    let d = BoxDomain::new(&[5.0, 3.0]).unwrap();
    for pts in [vec![[1.0, 1.0]], vec![[1.0, 1.0], [3.5, 2.0]], vec![[0.2, 0.1], [4.0, 2.9], [2.0, 1.5]]] {
        let p = PointPattern::from_points(d.clone(), pts).unwrap();
        let tess = voronoi(&p).unwrap();
        assert!((tess.total_area() - 15.0).abs() < 1e-9 * 15.0);
        if p.len() == 1 {
            // a rectangular lattice: the whole box, corners merged to 4
            assert_eq!(tess.cells()[0].side_count(), 4);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_patterns_satisfy_partition_and_euler(seed in any::<u64>(), l in 4.0f64..14.0) {
        let p = generate_poisson(BoxDomain::new(&[l, l * 0.8]).unwrap(), 1.5, Seed(seed)).unwrap();
        prop_assume!(p.len() >= 3);
        let tri = delaunay(&p).unwrap();
        let area = p.domain().measure();
        prop_assert!((tri.total_area() - area).abs() <= 1e-9 * area);
        prop_assert_eq!(tri.euler_characteristic(), 0);
        prop_assert_eq!(circumcircle_violations(&tri), 0);
        let tess = voronoi(&p).unwrap();
        prop_assert!((tess.total_area() - area).abs() <= 1e-9 * area);
        prop_assert_eq!(tess.mean_side_count(), 6.0);
    }

    #[test]
    fn jittered_grids_with_near_degeneracies(seed in any::<u64>(), jitter in prop_oneof![Just(0.0), 1e-13f64..1e-9]) {
        let p = generate_perturbed_lattice(BoxDomain::square(6.0).unwrap(), 1.0, jitter, Seed(seed)).unwrap();
        let tri = delaunay(&p).unwrap();
        prop_assert_eq!(tri.triangles().len(), 72);
        prop_assert!((tri.total_area() - 36.0).abs() <= 1e-9 * 36.0);
        let tess = voronoi(&p).unwrap();
        prop_assert!((tess.total_area() - 36.0).abs() <= 1e-9 * 36.0);
    }
}
