use std::f64::consts::PI;
use std::sync::OnceLock;

use latticeld::dense::{dense_sweep, log_grid, network_f, tabulate_d, NetworkParams};
use latticeld::dispersion::{
    compare_models, concentration_profile, fkpp_front_speed, NetworkRate, ProfileModel,
    QuadraticRate, RateFunction, TabulatedRate,
};
use latticeld::eigen::{graded_radii, polar_grid, sweep_f, EigenOptions, TiltVector};
use latticeld::geometry::{build_cell_mesh, AstroidSpec, CellSpec, MeshOptions};
use latticeld::transforms::{keller_kappa_eps, legendre_transform, RateTable};

const EPS: f64 = 0.01;
const DIAGONAL: [f64; 2] = [1.0, 1.0];
const SMALL: [f64; 4] = [0.0025, 0.005, 0.0075, 0.01];

/// FEM rate function at ε = 0.01 on a polar disc of ξ nodes.
fn fem_rate() -> &'static RateTable {
    static TABLE: OnceLock<RateTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mesh = build_cell_mesh(&CellSpec::from_gap(EPS).unwrap(), &MeshOptions::with_h(0.1)).unwrap();
        let grid = polar_grid(5, &graded_radii(20, 4.0), true);
        let f = sweep_f(&mesh, &grid, true, &EigenOptions::default()).unwrap();
        assert_eq!(f.failures(), 0);
        let mut xi: Vec<[f64; 2]> = polar_grid(32, &graded_radii(30, 3.0), false).iter().map(|t| t.as_array()).collect();
        xi.extend(small_xi());
        legendre_transform(&f.symmetric_completion(), &xi)
    })
}

fn tabulated() -> TabulatedRate {
    TabulatedRate::new(fem_rate()).unwrap()
}

#[test]
fn profiles_decrease_with_radius() {
    let radii: Vec<f64> = (0..40).map(|k| 0.25 * k as f64).collect();
    let n = NetworkParams::new(EPS).unwrap();
    let kappa = keller_kappa_eps(EPS);
    let times: Vec<f64> = [1.0, 3.0].iter().map(|s| s * 4.0 * PI * PI / kappa).collect();
    let fem = tabulated();
    let models: [(&dyn RateFunction, ProfileModel); 3] = [
        (&fem, ProfileModel::LargeDeviation),
        (&QuadraticRate(kappa), ProfileModel::Gaussian),
        (&NetworkRate(n), ProfileModel::Network),
    ];
    for (rate, model) in models {
        for dir in [[1.0, 0.0], DIAGONAL] {
            let p = concentration_profile(rate, model, dir, &times, &radii).unwrap();
            for row in &p.theta_norm {
                assert_eq!(row[0], 1.0);
                assert!(row.iter().all(|&v| v > 0.0 && v <= 1.0));
                assert!(row.windows(2).all(|w| w[1] <= w[0]), "{model:?} {dir:?}: {row:?}");
            }
        }
    }
}

/// At the earliest plotted time the diagonal tail of the large-deviation
/// profile sits above the Gaussian one.
#[test]
fn large_deviation_tail_exceeds_gaussian() {
    let kappa = keller_kappa_eps(EPS);
    let t = 4.0 * PI * PI / kappa;
    // ξ = r/t ≤ 0.5 keeps both tails above underflow
    let radii: Vec<f64> = (0..=20).map(|k| 0.5 * t * k as f64 / 20.0).collect();
    let ld = concentration_profile(&tabulated(), ProfileModel::LargeDeviation, DIAGONAL, &[t], &radii).unwrap();
    let gauss = concentration_profile(&QuadraticRate(kappa), ProfileModel::Gaussian, DIAGONAL, &[t], &radii).unwrap();
    let (a, b) = (ld.theta_norm[0].last().unwrap(), gauss.theta_norm[0].last().unwrap());
    assert!(a > b, "{a} vs {b}");
    assert!(a / b > 10.0, "{a} vs {b}");
}

#[test]
fn front_speed_grows_with_reaction_rate() {
    let n = NetworkParams::new(EPS).unwrap();
    let f = |t: TiltVector| Ok(network_f(t, &n));
    let speeds: Vec<f64> = [1e-4, 1e-2, 0.1, 1.0, 10.0]
        .iter()
        .map(|&a| fkpp_front_speed(&f, a, [1.0, 0.0], 10.0, None).unwrap().speed)
        .collect();
    assert!(speeds.iter().all(|&c| c > 0.0));
    assert!(speeds.windows(2).all(|w| w[1] > w[0]), "{speeds:?}");
    // c → 2√(κ α_r) as α_r → 0
    let slow = 2.0 * (n.kappa() * 1e-4f64).sqrt();
    assert!((speeds[0] / slow - 1.0).abs() < 1e-2, "{} vs {slow}", speeds[0]);
}

#[test]
fn network_speeds_agree_with_level_set() {
    let n = NetworkParams::new(EPS).unwrap();
    let f = |t: TiltVector| Ok(network_f(t, &n));
    let s = fkpp_front_speed(&f, 0.1, [1.0, 0.0], 10.0, Some(&NetworkRate(n))).unwrap();
    let dual = s.dual_speed.unwrap();
    assert!((s.speed - dual).abs() <= 1e-4 * s.speed, "{} vs {dual}", s.speed);
}

#[test]
fn front_speed_is_anisotropic() {
    let n = NetworkParams::new(EPS).unwrap();
    let f = |t: TiltVector| Ok(network_f(t, &n));
    let axis = fkpp_front_speed(&f, 1.0, [1.0, 0.0], 10.0, None).unwrap().speed;
    let diag = fkpp_front_speed(&f, 1.0, DIAGONAL, 10.0, None).unwrap().speed;
    assert!((axis - diag).abs() > 0.01 * axis, "{axis} vs {diag}");
}

/// Dense-limit rate function near the origin, from the transcendental
/// equation with cusp constants tabulated for small rates.
fn dense_rate_near_origin() -> TabulatedRate {
    let table = tabulate_d(&log_grid(1e-6, 0.1, 21), &AstroidSpec::new(0.01, 0.05).unwrap()).unwrap();
    let n = NetworkParams::new(EPS).unwrap();
    let f = dense_sweep(&polar_grid(5, &graded_radii(12, 0.1), true), &n, &table);
    assert_eq!(f.failures(), 0);
    TabulatedRate::new(&legendre_transform(&f.symmetric_completion(), &small_xi())).unwrap()
}

fn small_xi() -> Vec<[f64; 2]> {
    SMALL.iter().flat_map(|&r| [[r, 0.0], [r / 2f64.sqrt(), r / 2f64.sqrt()]]).collect()
}

#[test]
fn models_agree_near_the_origin() {
    let n = NetworkParams::new(EPS).unwrap();
    let kappa = keller_kappa_eps(EPS);
    let (fem, dense) = (tabulated(), dense_rate_near_origin());
    for dir in [[1.0, 0.0], DIAGONAL] {
        let c = compare_models(&fem, &dense, &n, kappa, dir, &SMALL).unwrap();
        let [a, nw, q] = c.max_deviations();
        assert!(a < 0.05 && nw < 0.05 && q < 0.05, "{dir:?}: {}", c.summary());
    }
}

#[test]
fn quadratic_overestimates_rate_far_out() {
    let n = NetworkParams::new(EPS).unwrap();
    let kappa = keller_kappa_eps(EPS);
    let fem = tabulated();
    for dir in [[1.0, 0.0], DIAGONAL] {
        let c = compare_models(&fem, &NetworkRate(n), &n, kappa, dir, &[3.0]).unwrap();
        assert!(c.rows[0].g_quadratic > c.rows[0].g_fem, "{:?}", c.rows[0]);
    }
}
