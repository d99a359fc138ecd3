use std::sync::OnceLock;

use latticeld::dense::{network_f, network_g, NetworkParams};
use latticeld::eigen::{graded_radii, polar_grid, sweep_f, EigenOptions, TiltVector};
use latticeld::geometry::{build_cell_mesh, CellSpec, MeshOptions};
use latticeld::transforms::{
    legendre_inverse, legendre_transform, quadratic_f, quadratic_g, square_symmetries, FTable,
    RateTable,
};
use proptest::prelude::*;

fn octant_grid(r_max: f64) -> Vec<TiltVector> {
    polar_grid(17, &graded_radii(40, r_max), true)
}

fn xi_disc(r_max: f64, rings: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for k in 0..12 {
        let angle = std::f64::consts::TAU * k as f64 / 12.0 + 0.1;
        for j in 1..=rings {
            let r = r_max * j as f64 / rings as f64;
            out.push([r * angle.cos(), r * angle.sin()]);
        }
    }
    out
}

fn fem_rate() -> &'static (FTable, RateTable) {
    static TABLES: OnceLock<(FTable, RateTable)> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mesh = build_cell_mesh(&CellSpec::new(2.4).unwrap(), &MeshOptions::with_h(0.2)).unwrap();
        let grid = polar_grid(9, &graded_radii(20, 4.0), true);
        let f = sweep_f(&mesh, &grid, true, &EigenOptions::default()).unwrap().symmetric_completion();
        let g = legendre_transform(&f, &xi_disc(3.0, 8));
        (f, g)
    })
}

#[test]
fn quadratic_pair_is_recovered() {
    let kappa = 0.55;
    let f = FTable::from_fn(&octant_grid(4.0), |p| quadratic_f(kappa, p.as_array())).symmetric_completion();
    let g = legendre_transform(&f, &xi_disc(2.0, 8));
    for n in &g.nodes {
        assert!(!n.extrapolated);
        let exact = quadratic_g(kappa, n.xi);
        assert!((n.g - exact).abs() <= 1e-4 * exact, "{n:?} vs {exact}");
    }
}

#[test]
fn network_pair_is_recovered() {
    let params = NetworkParams::new(0.01).unwrap();
    let f = FTable::from_fn(&octant_grid(1.5), |p| network_f(p, &params)).symmetric_completion();
    let g = legendre_transform(&f, &xi_disc(2.0, 8));
    for n in &g.nodes {
        assert!(!n.extrapolated);
        let exact = network_g(n.xi, &params);
        assert!((n.g - exact).abs() <= 1e-3 * exact, "{n:?} vs {exact}");
    }
}

#[test]
fn young_fenchel_inequality() {
    let (f, g) = fem_rate();
    for gn in g.nodes.iter().filter(|n| !n.extrapolated) {
        for fn_ in &f.nodes {
            let gap = gn.g + fn_.f - fn_.tilt.dot(gn.xi);
            assert!(gap >= -1e-6, "ξ = {:?}, p = {:?}: {gap}", gn.xi, fn_.tilt);
        }
    }
}

#[test]
fn rate_exceeds_free_diffusion() {
    let (_, g) = fem_rate();
    for n in g.nodes.iter().filter(|n| !n.extrapolated) {
        let free = (n.xi[0] * n.xi[0] + n.xi[1] * n.xi[1]) / 4.0;
        assert!(n.g >= free - 1e-6, "{n:?}");
    }
}

#[test]
fn rate_has_square_symmetry() {
    let (f, _) = fem_rate();
    for base in [[0.8, 0.3], [2.0, -1.1]] {
        let images = square_symmetries(base);
        let g = legendre_transform(f, &images);
        for n in &g.nodes {
            assert!((n.g - g.nodes[0].g).abs() <= 5e-4 * g.nodes[0].g, "{n:?} vs {:?}", g.nodes[0]);
        }
    }
}

#[test]
fn rate_vanishes_at_origin() {
    let (f, _) = fem_rate();
    let g = legendre_transform(f, &[[0.0, 0.0]]);
    assert!(g.nodes[0].g.abs() < 1e-8, "{:?}", g.nodes[0]);
    assert!(g.nodes[0].p_max[0].hypot(g.nodes[0].p_max[1]) < 1e-4);
}

#[test]
fn rate_is_convex_along_grid_lines() {
    let (f, _) = fem_rate();
    let n = 25;
    let step = 4.0 / (n - 1) as f64;
    let xi: Vec<[f64; 2]> = (0..n * n).map(|k| [-2.0 + step * (k / n) as f64, -2.0 + step * (k % n) as f64]).collect();
    let g: Vec<f64> = legendre_transform(f, &xi).nodes.iter().map(|node| node.g).collect();
    let at = |i: usize, j: usize| g[i * n + j];
    for i in 0..n {
        for j in 1..n - 1 {
            assert!(at(i, j - 1) - 2.0 * at(i, j) + at(i, j + 1) >= -1e-6, "row {i}, col {j}");
            assert!(at(j - 1, i) - 2.0 * at(j, i) + at(j + 1, i) >= -1e-6, "col {i}, row {j}");
        }
    }
}

#[test]
fn double_transform_returns_f() {
    let params = NetworkParams::new(0.01).unwrap();
    let f = FTable::from_fn(&octant_grid(2.0), |p| network_f(p, &params)).symmetric_completion();
    let xi: Vec<[f64; 2]> = polar_grid(96, &graded_radii(80, 0.6), false).iter().map(|t| t.as_array()).collect();
    let back = legendre_inverse(&legendre_transform(&f, &xi), &polar_grid(7, &[0.2, 0.35, 0.5], false));
    for n in &back.nodes[1..] {
        assert!(n.error.is_none(), "{n:?}");
        let exact = network_f(n.tilt, &params);
        assert!((n.f - exact).abs() <= 1e-3 * exact, "{n:?} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn young_fenchel_for_network_pair(x in -3.0f64..3.0, y in -3.0f64..3.0, p in -2.0f64..2.0, q in -2.0f64..2.0) {
        let params = NetworkParams::new(0.003).unwrap();
        let t = TiltVector::new(p, q);
        prop_assert!(network_g([x, y], &params) + network_f(t, &params) >= t.dot([x, y]) - 1e-12);
    }
}
