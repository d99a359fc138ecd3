//! Perforated periodic cells and their triangulations.
//!
//! All lengths are nondimensional with a lattice period of `2π`. The
//! obstacle-centred cell `ω` is `[-π, π]²` with a disk of radius `a` at the
//! origin. The astroid cell `ω′` is `[0, 2π] × [-2π, 0]` in the touching limit
//! `a → π`; its void is bounded by four quarter circles of radius `π` centred
//! at the cell corners and meeting in cusps at `(0,-π)`, `(π,-2π)`, `(2π,-π)`
//! and `(π,0)`.

mod io;
mod mesh;
mod mesher;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mesh::{BoundaryEdge, BoundaryTag, Mesh};

/// Lattice period (side of the square cell).
pub const PERIOD: f64 = 2.0 * PI;

/// Approximate area of the void region between four touching obstacles,
/// `π²(4 − π)`.
pub const ASTROID_AREA: f64 = PI * PI * (4.0 - PI);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellVariant {
    /// Obstacle-centred cell `ω`.
    Omega,
    /// Astroid-centred cell `ω′`.
    OmegaPrime,
}

/// A square cell of side `2π` perforated by a circular obstacle of radius `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    obstacle_radius: f64,
    variant: CellVariant,
}

impl CellSpec {
    pub fn new(obstacle_radius: f64) -> Result<Self> {
        if !(obstacle_radius > 0.0 && obstacle_radius < PI) {
            return Err(Error::InvalidParameter(format!(
                "obstacle radius must satisfy 0 < a < π, got {obstacle_radius}"
            )));
        }
        Ok(Self {
            obstacle_radius,
            variant: CellVariant::Omega,
        })
    }

    /// Cell whose obstacles are separated by gaps of half-width `epsilon`.
    pub fn from_gap(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < PI) {
            return Err(Error::InvalidParameter(format!(
                "gap half-width must satisfy 0 < ε < π, got {epsilon}"
            )));
        }
        Self::new(PI - epsilon)
    }

    pub fn with_variant(mut self, variant: CellVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn obstacle_radius(&self) -> f64 {
        self.obstacle_radius
    }

    pub fn variant(&self) -> CellVariant {
        self.variant
    }

    /// Gap half-width `ε = π − a`.
    pub fn epsilon(&self) -> f64 {
        PI - self.obstacle_radius
    }

    pub fn area_fraction(&self) -> f64 {
        area_fraction(self)
    }

    /// Exact area of the perforated cell, `4π² − πa²`.
    pub fn void_area(&self) -> f64 {
        PERIOD * PERIOD - PI * self.obstacle_radius * self.obstacle_radius
    }
}

/// The trimmed astroid used by the canonical cusp problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AstroidSpec {
    /// Distance from each cusp tip to its straight trimming segment.
    pub trim_distance: f64,
    /// Target element size away from the cusps.
    pub mesh_size: f64,
}

impl AstroidSpec {
    pub const DEFAULT_TRIM: f64 = 0.01;

    pub fn new(trim_distance: f64, mesh_size: f64) -> Result<Self> {
        if !(trim_distance > 0.0 && trim_distance < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "trim distance must satisfy 0 < δ ≪ π, got {trim_distance}"
            )));
        }
        if !(mesh_size > 0.0 && mesh_size.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mesh size must be positive, got {mesh_size}"
            )));
        }
        Ok(Self {
            trim_distance,
            mesh_size,
        })
    }

    /// Half-width of the cusp at the trimming segment, `π − √(π² − δ²)`.
    pub fn trim_halfwidth(&self) -> f64 {
        let d = self.trim_distance;
        // π − √(π² − δ²) without cancellation
        d * d / (PI + (PI * PI - d * d).sqrt())
    }
}

impl Default for AstroidSpec {
    fn default() -> Self {
        Self {
            trim_distance: Self::DEFAULT_TRIM,
            mesh_size: 0.05,
        }
    }
}

/// Controls for [`build_cell_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshOptions {
    /// Target element size.
    pub h: f64,
    /// Element size inside the gap zone, as a fraction of `ε`.
    pub refine_ratio: f64,
    /// Growth rate of the element size away from the gap zone.
    pub grading: f64,
    /// Smallest gap half-width the mesher accepts.
    pub min_gap: f64,
    /// Minimum triangle angle requested from the refinement, in degrees.
    pub min_angle_deg: f64,
}

impl MeshOptions {
    pub fn with_h(h: f64) -> Self {
        Self {
            h,
            ..Self::default()
        }
    }
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            h: 0.1,
            refine_ratio: 0.25,
            grading: 0.25,
            min_gap: 1e-4,
            min_angle_deg: 25.0,
        }
    }
}

/// Obstacle area fraction `σ = a²/(4π)`.
pub fn area_fraction(spec: &CellSpec) -> f64 {
    let a = spec.obstacle_radius;
    a * a / (4.0 * PI)
}

/// Half-width of the gap between two neighbouring obstacles at distance `x`
/// from the gap centre: `h_ε(x) = π − √((π−ε)² − x²)`.
pub fn gap_halfwidth(x: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < PI) {
        return Err(Error::Domain(format!("gap half-width ε = {epsilon} outside (0, π)")));
    }
    let a = PI - epsilon;
    if !(x.abs() <= a) {
        return Err(Error::Domain(format!(
            "x = {x} outside the chord |x| ≤ π − ε = {a}"
        )));
    }
    Ok(PI - (a * a - x * x).max(0.0).sqrt())
}

/// Parabolic approximation `x²/(2π) + ε` of [`gap_halfwidth`].
pub fn gap_halfwidth_parabola(x: f64, epsilon: f64) -> f64 {
    x * x / (2.0 * PI) + epsilon
}

/// Triangulates the obstacle-centred cell `ω` with periodic vertex pairing.
pub fn build_cell_mesh(spec: &CellSpec, options: &MeshOptions) -> Result<Mesh> {
    if !(options.h > 0.0 && options.h < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mesh size h must lie in (0, 1), got {}",
            options.h
        )));
    }
    let eps = spec.epsilon();
    if eps < options.min_gap {
        return Err(Error::Meshing(format!(
            "gap half-width {eps:e} is below the configured floor {:e}",
            options.min_gap
        )));
    }
    mesher::cell_mesh(spec.obstacle_radius(), options)
}

/// Triangulates the obstacle-free periodic square `[-π, π]²`.
pub fn build_square_mesh(h: f64) -> Result<Mesh> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mesh size h must lie in (0, 1), got {h}"
        )));
    }
    mesher::square_mesh(h)
}

/// Triangulates the trimmed astroid of `ω′`.
pub fn build_astroid_mesh(spec: &AstroidSpec) -> Result<Mesh> {
    if spec.trim_distance <= 0.0 {
        return Err(Error::InvalidParameter("trim distance must be positive".into()));
    }
    mesher::astroid_mesh(spec)
}
