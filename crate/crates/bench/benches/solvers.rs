use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use latticeld::dense::{log_grid, network_f, solve_canonical, tabulate_d, transcendental_solve, NetworkParams};
use latticeld::eigen::{graded_radii, polar_grid, solve_at, EigenOptions, Operators, TiltVector};
use latticeld::geometry::{build_cell_mesh, AstroidSpec, CellSpec, MeshOptions};
use latticeld::transforms::{legendre_transform, FTable};

fn eigen(c: &mut Criterion) {
    let mesh = build_cell_mesh(&CellSpec::from_gap(0.01).unwrap(), &MeshOptions::with_h(0.1)).unwrap();
    let ops = Arc::new(Operators::new(&mesh).unwrap());
    let opts = EigenOptions::default();
    c.bench_function("fem eigenvalue, dense cell", |b| {
        b.iter(|| solve_at(&ops, black_box(TiltVector::new(1.2, 0.4)), None, &opts).unwrap())
    });
}

fn canonical(c: &mut Criterion) {
    let spec = AstroidSpec::default();
    c.bench_function("cusp problem at one rate", |b| b.iter(|| solve_canonical(black_box(1.0), &spec).unwrap()));
    let table = tabulate_d(&log_grid(1e-6, 30.0, 41), &spec).unwrap();
    let params = NetworkParams::new(0.01).unwrap();
    c.bench_function("transcendental root", |b| {
        b.iter(|| transcendental_solve(black_box(TiltVector::new(1.5, 0.7)), &params, &table).unwrap())
    });
}

fn transform(c: &mut Criterion) {
    let params = NetworkParams::new(0.01).unwrap();
    let f = FTable::from_fn(&polar_grid(17, &graded_radii(40, 3.0), true), |p| network_f(p, &params))
        .symmetric_completion();
    let xi: Vec<[f64; 2]> = polar_grid(24, &graded_radii(20, 3.0), false).iter().map(|t| t.as_array()).collect();
    c.bench_function("legendre transform, 481 targets", |b| b.iter(|| legendre_transform(black_box(&f), &xi)));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = eigen, canonical, transform
}
criterion_main!(benches);
