//! Principal eigenvalue `f(p)` of the tilted periodic cell problem.
//!
//! The unknown is the periodic factor `φ` of the tilted eigenfunction, which
//! satisfies `∇²φ − 2p·∇φ + |p|²φ = fφ` with `n·(∇φ − pφ) = 0` on the
//! obstacle. Its Galerkin discretisation with periodic P1 elements reads
//! `(f − |p|²) M φ = −(K + B(p)) φ`.

mod assemble;
mod solver;
mod sweep;
mod tilted;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use assemble::{assemble, AssembledSystem, Operators};
pub use solver::{principal_eigenvalue, EigenOptions, EigenResult};
pub use sweep::{effective_diffusivity_fem, solve_at, sweep_f};
pub use tilted::principal_eigenvalue_tilted;

/// The dual variable `p = (p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TiltVector {
    pub p: f64,
    pub q: f64,
}

impl TiltVector {
    pub const ZERO: Self = Self { p: 0.0, q: 0.0 };

    pub fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn norm_sq(&self) -> f64 {
        self.p * self.p + self.q * self.q
    }

    pub fn norm(&self) -> f64 {
        self.p.hypot(self.q)
    }

    /// Polar angle in `(−π, π]`.
    pub fn angle(&self) -> f64 {
        self.q.atan2(self.p)
    }

    pub fn dot(&self, x: [f64; 2]) -> f64 {
        self.p * x[0] + self.q * x[1]
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.q.is_finite()
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.p, self.q]
    }
}

impl From<[f64; 2]> for TiltVector {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

/// Polar grid of tilt vectors: `n_angles` directions uniformly spaced over
/// `[0, 2π)` (or over the first octant `[0, π/4]` when `octant` is set),
/// each carrying `radii`. The origin is included once.
pub fn polar_grid(n_angles: usize, radii: &[f64], octant: bool) -> Vec<TiltVector> {
    let mut grid = vec![TiltVector::ZERO];
    for k in 0..n_angles {
        let angle = if octant {
            if n_angles == 1 {
                0.0
            } else {
                0.25 * PI * k as f64 / (n_angles - 1) as f64
            }
        } else {
            2.0 * PI * k as f64 / n_angles as f64
        };
        for &r in radii {
            if r > 0.0 {
                grid.push(TiltVector::from_polar(r, angle));
            }
        }
    }
    grid
}

/// `n` radii on `(0, r_max]`, graded quadratically towards the origin.
pub fn graded_radii(n: usize, r_max: f64) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            r_max * t * (1.0 + t) / 2.0
        })
        .collect()
}

/// Cartesian grid `{(x_i, y_j)}` with `n` uniform nodes per side on `[lo, hi]`.
pub fn cartesian_grid(n: usize, lo: f64, hi: f64) -> Vec<TiltVector> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let mut grid = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            grid.push(TiltVector::new(lo + i as f64 * step, lo + j as f64 * step));
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_grid_layout() {
        let g = polar_grid(12, &graded_radii(6, 2.0), false);
        assert_eq!(g.len(), 1 + 72);
        assert_eq!(g[0], TiltVector::ZERO);
        assert!(g.iter().all(|t| t.norm() <= 2.0 + 1e-12));
        let radii = graded_radii(6, 2.0);
        assert_eq!(*radii.last().unwrap(), 2.0);
        assert!(radii.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn octant_grid_spans_first_octant() {
        let g = polar_grid(5, &[1.0], true);
        assert!((g[1].angle()).abs() < 1e-15);
        assert!((g[5].angle() - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn cartesian_grid_corners() {
        let g = cartesian_grid(20, 0.0, 2.0);
        assert_eq!(g.len(), 400);
        assert_eq!(g[399], TiltVector::new(2.0, 2.0));
    }
}
