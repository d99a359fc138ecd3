//! Dense-packing limit `ε = π − a → 0`: the discrete-network model, the
//! cusp problem on the limiting astroid, the resulting transcendental
//! equation for `f(p)`, and the shortest-path tail of `g`.

mod canonical;
mod transcendental;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::eigen::TiltVector;
use crate::error::{Error, Result};
use crate::geometry::ASTROID_AREA;

pub use canonical::{log_grid, solve_canonical, tabulate_d, CanonicalSolution, DNode, DTable};
pub use transcendental::{
    dense_sweep, determinant, transcendental_solve, transcendental_solve_near, DenseFResult,
};

/// Gap coefficients of the network model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub epsilon: f64,
    /// Gap conductance `√(2ε/π³)`.
    pub alpha: f64,
    /// Void area `π²(4 − π)`.
    pub area: f64,
    /// `area/(4πα)`.
    pub beta: f64,
}

impl NetworkParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < PI) {
            return Err(Error::InvalidParameter(format!(
                "gap half-width must satisfy 0 < ε < π, got {epsilon}"
            )));
        }
        let alpha = (2.0 * epsilon / PI.powi(3)).sqrt();
        Ok(Self {
            epsilon,
            alpha,
            area: ASTROID_AREA,
            beta: ASTROID_AREA / (4.0 * PI * alpha),
        })
    }

    /// Long-time diffusivity of the network, `4π²α/area = α/(1 − π/4)`.
    pub fn kappa(&self) -> f64 {
        4.0 * PI * PI * self.alpha / self.area
    }
}

/// Network eigenvalue `(4α/area)(sinh²πp + sinh²πq)`.
pub fn network_f(tilt: TiltVector, params: &NetworkParams) -> f64 {
    let (sp, sq) = ((PI * tilt.p).sinh(), (PI * tilt.q).sinh());
    4.0 * params.alpha / params.area * (sp * sp + sq * sq)
}

/// `S(x) = 1 + x asinh x − √(1 + x²)`, evaluated without cancellation for
/// small `x`.
fn s_fn(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-3 {
        // x²/2 − x⁴/24 + x⁶/80
        let x2 = x * x;
        return x2 * (0.5 - x2 * (1.0 / 24.0 - x2 / 80.0));
    }
    let root = x.hypot(1.0);
    // 1 − √(1+x²) = −x²/(1 + √(1+x²))
    x * x.asinh() - x * x / (1.0 + root)
}

/// Network rate function `(2α/area)(S(βξ) + S(βη))`.
pub fn network_g(xi: [f64; 2], params: &NetworkParams) -> f64 {
    2.0 * params.alpha / params.area * (s_fn(params.beta * xi[0]) + s_fn(params.beta * xi[1]))
}

/// Obstacle-avoiding path length `π(x+y)/4 + (1 − π/4)|x − y|` with
/// `x, y = |ξ|, |η|`.
pub fn geodesic_distance(xi: [f64; 2]) -> f64 {
    let (x, y) = (xi[0].abs(), xi[1].abs());
    PI * (x + y) / 4.0 + (1.0 - PI / 4.0) * (x - y).abs()
}

/// Extreme-tail rate `d(ξ)²/4`.
pub fn geodesic_rate(xi: [f64; 2]) -> f64 {
    let d = geodesic_distance(xi);
    d * d / 4.0
}

/// Values `D₁, D₂, D₃` of the cusp response as functions of the rate.
pub trait CuspResponse: Sync {
    fn d(&self, f: f64) -> Result<[f64; 3]>;

    /// Interval of rates over which [`CuspResponse::d`] is defined.
    fn range(&self) -> (f64, f64);

    /// Increasing rates at which the determinant is sampled to bracket its
    /// roots.
    fn scan_points(&self) -> Vec<f64>;
}

/// The small-rate law `Dᵢ = 1/(π·area·f)`, under which the transcendental
/// equation reduces to the network eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SmallRateLaw;

impl CuspResponse for SmallRateLaw {
    fn d(&self, f: f64) -> Result<[f64; 3]> {
        if !(f > 0.0) {
            return Err(Error::Range(format!("rate {f} must be positive")));
        }
        let d = 1.0 / (PI * ASTROID_AREA * f);
        Ok([d, d, d])
    }

    fn range(&self) -> (f64, f64) {
        (1e-300, f64::INFINITY)
    }

    fn scan_points(&self) -> Vec<f64> {
        (-150..=150).map(|k| 10f64.powf(k as f64 / 5.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parameters_at_one_percent_gap() {
        let n = NetworkParams::new(0.01).unwrap();
        assert_relative_eq!(n.alpha, 0.025397, epsilon = 1e-6);
        assert_relative_eq!(n.area, 8.4722, epsilon = 1e-4);
        assert_relative_eq!(n.kappa(), crate::transforms::keller_kappa_eps(0.01), max_relative = 1e-14);
        assert!(NetworkParams::new(0.0).is_err());
    }

    #[test]
    fn network_f_values() {
        let n = NetworkParams::new(0.01).unwrap();
        assert_eq!(network_f(TiltVector::ZERO, &n), 0.0);
        assert_relative_eq!(network_f(TiltVector::new(1.0, 0.0), &n), 1.5993, epsilon = 2e-4);
        // Taylor limit: κ|p|²
        for p in [0.01, 0.03, 0.05] {
            let t = TiltVector::from_polar(p, 0.4);
            let ratio = network_f(t, &n) / (n.kappa() * t.norm_sq());
            assert!((ratio - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn network_g_values() {
        let n = NetworkParams::new(0.01).unwrap();
        assert_eq!(network_g([0.0, 0.0], &n), 0.0);
        let (a, b) = ([0.7, 0.0], [0.0, -1.3]);
        assert_eq!(network_g([0.7, -1.3], &n), network_g(a, &n) + network_g(b, &n));
    }

    #[test]
    fn s_matches_direct_formula() {
        for x in [1e-4, 5e-4, 2e-3, 0.1, 3.0, 40.0] {
            let direct = 1.0 + x * f64::asinh(x) - (1.0 + x * x).sqrt();
            assert_relative_eq!(s_fn(x), direct, max_relative = 1e-8);
        }
    }

    #[test]
    fn geodesic_values() {
        assert_eq!(geodesic_rate([0.0, 0.0]), 0.0);
        let s = 1.7;
        assert_relative_eq!(geodesic_distance([s, s]), PI * s / 2.0, max_relative = 1e-15);
        assert_relative_eq!(geodesic_rate([s, s]), PI * PI * s * s / 16.0, max_relative = 1e-15);
        assert_relative_eq!(geodesic_rate([s, 0.0]), s * s / 4.0, max_relative = 1e-15);
        assert_eq!(geodesic_rate([-s, 0.4]), geodesic_rate([0.4, s]));
    }
}
