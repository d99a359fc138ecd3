//! Tables of `f(p)` and `g(ξ)`, the numerical Legendre transform between
//! them, and closed-form approximations.

mod closed_form;
mod io;
mod legendre;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::eigen::TiltVector;
use crate::error::{Error, Result};
use crate::interp::Scattered;

pub use closed_form::{
    dilute_f, dilute_g, keller_kappa, keller_kappa_eps, maxwell_kappa, quadratic_f, quadratic_g,
};
pub use io::write_sidecar;
pub use legendre::{conjugate, legendre_inverse, legendre_transform, Conjugate};

/// Free-form run metadata written next to every table.
pub type Provenance = BTreeMap<String, serde_json::Value>;

/// The eight symmetries of the square lattice.
pub fn square_symmetries(v: [f64; 2]) -> [[f64; 2]; 8] {
    let [x, y] = v;
    [
        [x, y],
        [-x, y],
        [x, -y],
        [-x, -y],
        [y, x],
        [-y, x],
        [y, -x],
        [-y, -x],
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FNode {
    pub tilt: TiltVector,
    /// `NaN` when the solve failed.
    pub f: f64,
    pub residual: f64,
    pub iterations: usize,
    pub error: Option<String>,
}

impl FNode {
    pub fn exact(tilt: TiltVector, f: f64) -> Self {
        Self {
            tilt,
            f,
            residual: 0.0,
            iterations: 0,
            error: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.error.is_none() && self.f.is_finite()
    }
}

/// Sampled principal eigenvalue `f(p)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FTable {
    pub nodes: Vec<FNode>,
    pub provenance: Provenance,
}

impl FTable {
    pub fn new(nodes: Vec<FNode>, provenance: Provenance) -> Self {
        Self { nodes, provenance }
    }

    /// Table of a closed-form `f` on `grid`.
    pub fn from_fn(grid: &[TiltVector], f: impl Fn(TiltVector) -> f64) -> Self {
        Self::new(grid.iter().map(|&t| FNode::exact(t, f(t))).collect(), Provenance::new())
    }

    /// Points and values of the successfully solved nodes.
    pub fn samples(&self) -> (Vec<[f64; 2]>, Vec<f64>) {
        self.nodes
            .iter()
            .filter(|n| n.is_valid())
            .map(|n| (n.tilt.as_array(), n.f))
            .unzip()
    }

    pub fn failures(&self) -> usize {
        self.nodes.iter().filter(|n| !n.is_valid()).count()
    }

    pub fn has_origin(&self) -> bool {
        self.nodes.iter().any(|n| n.tilt.norm() == 0.0 && n.is_valid())
    }

    /// Nodes violating `f ≤ |p|² (1 + slack)`.
    pub fn bound_violations(&self, slack: f64) -> Vec<&FNode> {
        self.nodes
            .iter()
            .filter(|n| n.is_valid() && n.f > n.tilt.norm_sq() * (1.0 + slack))
            .collect()
    }

    /// Adds the images of every node under the square's symmetry group,
    /// skipping images that coincide with an existing node.
    pub fn symmetric_completion(&self) -> Self {
        let mut seen = std::collections::HashSet::new();
        let key = |v: [f64; 2]| ((v[0] * 1e10).round() as i64, (v[1] * 1e10).round() as i64);
        let mut nodes = Vec::new();
        for n in &self.nodes {
            if seen.insert(key(n.tilt.as_array())) {
                nodes.push(n.clone());
            }
        }
        for n in &self.nodes {
            for img in square_symmetries(n.tilt.as_array()) {
                if seen.insert(key(img)) {
                    let mut m = n.clone();
                    m.tilt = img.into();
                    nodes.push(m);
                }
            }
        }
        Self::new(nodes, self.provenance.clone())
    }

    /// Natural-neighbour interpolant of the valid nodes.
    pub fn interpolator(&self) -> Result<Scattered> {
        let (pts, vals) = self.samples();
        Scattered::new(&pts, &vals)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateNode {
    pub xi: [f64; 2],
    pub g: f64,
    /// Maximiser `p` of `p·ξ − f(p)`.
    pub p_max: [f64; 2],
    /// The maximum was attained on the boundary of the sampled `p` region.
    pub extrapolated: bool,
}

/// Sampled rate function `g(ξ)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateTable {
    pub nodes: Vec<RateNode>,
    pub provenance: Provenance,
}

impl RateTable {
    pub fn new(nodes: Vec<RateNode>, provenance: Provenance) -> Self {
        Self { nodes, provenance }
    }

    /// Natural-neighbour interpolant over the nodes that are not flagged.
    pub fn interpolator(&self) -> Result<Scattered> {
        let (pts, vals): (Vec<_>, Vec<_>) = self
            .nodes
            .iter()
            .filter(|n| !n.extrapolated)
            .map(|n| (n.xi, n.g))
            .unzip();
        Scattered::new(&pts, &vals)
    }

    /// Least-squares fit of `g ≈ |ξ|²/(4κ)` over the nodes with
    /// `0 < |ξ| ≤ radius`, returning `κ`.
    pub fn best_fit_kappa(&self, radius: f64) -> Result<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for n in self.nodes.iter().filter(|n| !n.extrapolated) {
            let r2 = n.xi[0] * n.xi[0] + n.xi[1] * n.xi[1];
            if r2 > 0.0 && r2 <= radius * radius {
                num += n.g * r2;
                den += r2 * r2;
            }
        }
        if !(num > 0.0) {
            return Err(Error::Coverage(format!("no usable nodes within |ξ| ≤ {radius}")));
        }
        Ok(den / (4.0 * num))
    }
}
