//! Run configuration: one flat TOML table, overridable from the command line.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use latticeld::dense::{log_grid, NetworkParams};
use latticeld::eigen::{cartesian_grid, graded_radii, polar_grid, EigenOptions, TiltVector};
use latticeld::geometry::{AstroidSpec, CellSpec, MeshOptions};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "LATTICELD_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Polar,
    Cartesian,
}

/// Every key is optional in the file; missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Obstacle radius `a`. Exactly one of this and `epsilon` may be set.
    pub obstacle_radius: Option<f64>,
    /// Gap half-width `ε = π − a`.
    pub epsilon: Option<f64>,

    pub mesh_h: f64,
    /// Element size in the gap as a fraction of `ε`.
    pub refine_ratio: f64,

    pub p_grid: GridKind,
    /// Polar grid: directions over the first octant (or the full circle).
    pub p_angles: usize,
    pub p_radii: usize,
    pub p_octant: bool,
    /// Cartesian grid: nodes per side on `[p_lo, p_max]`.
    pub p_n: usize,
    pub p_lo: f64,
    pub p_max: f64,

    /// Polar `ξ` grid over the full circle.
    pub xi_angles: usize,
    pub xi_radii: usize,
    pub xi_max: f64,

    pub trim_distance: f64,
    pub astroid_h: f64,
    pub f0_min: f64,
    pub f0_max: f64,
    pub f0_count: usize,

    pub tol: f64,
    pub max_iter: usize,
    pub continuation: bool,

    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            obstacle_radius: None,
            epsilon: None,
            mesh_h: 0.1,
            refine_ratio: 0.25,
            p_grid: GridKind::Polar,
            p_angles: 9,
            p_radii: 40,
            p_octant: true,
            p_n: 8,
            p_lo: 0.0,
            p_max: 4.5,
            xi_angles: 24,
            xi_radii: 20,
            xi_max: 3.0,
            trim_distance: 0.01,
            astroid_h: 0.05,
            f0_min: 1e-6,
            f0_max: 30.0,
            f0_count: 71,
            tol: 1e-8,
            max_iter: 200,
            continuation: true,
            threads: 0,
            output_dir: None,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (self.obstacle_radius, self.epsilon) {
            (Some(_), Some(_)) => return Err(config_err("set only one of obstacle_radius and epsilon")),
            (Some(a), None) if !(a > 0.0 && a < PI) => {
                return Err(config_err(format!("obstacle_radius must satisfy 0 < a < π, got {a}")))
            }
            (None, Some(e)) if !(e > 0.0 && e < PI) => {
                return Err(config_err(format!("epsilon must satisfy 0 < ε < π, got {e}")))
            }
            _ => {}
        }
        for (name, v) in [
            ("mesh_h", self.mesh_h),
            ("refine_ratio", self.refine_ratio),
            ("p_max", self.p_max),
            ("xi_max", self.xi_max),
            ("trim_distance", self.trim_distance),
            ("astroid_h", self.astroid_h),
            ("f0_min", self.f0_min),
            ("tol", self.tol),
        ] {
            positive(name, v)?;
        }
        if !(self.f0_max > self.f0_min) || self.f0_count < 2 {
            return Err(config_err("f0 grid needs f0_max > f0_min and f0_count ≥ 2"));
        }
        if self.max_iter == 0 {
            return Err(config_err("max_iter must be at least 1"));
        }
        match self.p_grid {
            GridKind::Polar if self.p_angles == 0 || self.p_radii == 0 => {
                return Err(config_err("polar p grid needs p_angles ≥ 1 and p_radii ≥ 1"))
            }
            GridKind::Cartesian if self.p_n == 0 || !(self.p_lo <= self.p_max) || !self.p_lo.is_finite() => {
                return Err(config_err("cartesian p grid needs p_n ≥ 1 and p_lo ≤ p_max"))
            }
            _ => {}
        }
        if self.xi_angles == 0 || self.xi_radii == 0 {
            return Err(config_err("xi grid needs xi_angles ≥ 1 and xi_radii ≥ 1"));
        }
        // g(ξ) is read off tilts up to |p|_max; free diffusion needs |p| = |ξ|/2
        if self.xi_max > 2.0 * self.p_max {
            return Err(config_err(format!(
                "xi_max = {} exceeds the range covered by p_max = {} (at most 2 p_max)",
                self.xi_max, self.p_max
            )));
        }
        AstroidSpec::new(self.trim_distance, self.astroid_h)?;
        Ok(())
    }

    /// SHA-256 of the settings that affect results (thread count and output
    /// location excluded).
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.threads = 0;
        canonical.output_dir = None;
        let bytes = serde_json::to_vec(&canonical).expect("configuration serialises");
        hex::encode(Sha256::digest(bytes))
    }

    /// Output root: the configured directory, then the environment, then `out`.
    pub fn output_root(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    /// The configured cell; defaults to `ε = 0.01` when neither key is set.
    pub fn cell(&self) -> Result<CellSpec, CliError> {
        match (self.obstacle_radius, self.epsilon) {
            (Some(a), _) => Ok(CellSpec::new(a)?),
            (None, Some(e)) => Ok(CellSpec::from_gap(e)?),
            (None, None) => Ok(CellSpec::from_gap(0.01)?),
        }
    }

    pub fn epsilon_value(&self) -> Result<f64, CliError> {
        Ok(self.cell()?.epsilon())
    }

    pub fn network(&self) -> Result<NetworkParams, CliError> {
        Ok(NetworkParams::new(self.epsilon_value()?)?)
    }

    pub fn mesh_options(&self) -> MeshOptions {
        MeshOptions {
            h: self.mesh_h,
            refine_ratio: self.refine_ratio,
            ..MeshOptions::default()
        }
    }

    pub fn astroid(&self) -> Result<AstroidSpec, CliError> {
        Ok(AstroidSpec::new(self.trim_distance, self.astroid_h)?)
    }

    pub fn eigen_options(&self) -> EigenOptions {
        EigenOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..EigenOptions::default()
        }
    }

    pub fn p_nodes(&self) -> Vec<TiltVector> {
        match self.p_grid {
            GridKind::Polar => polar_grid(self.p_angles, &graded_radii(self.p_radii, self.p_max), self.p_octant),
            GridKind::Cartesian => cartesian_grid(self.p_n, self.p_lo, self.p_max),
        }
    }

    pub fn xi_nodes(&self) -> Vec<[f64; 2]> {
        XiGrid::Polar {
            angles: self.xi_angles,
            radii: self.xi_radii,
            max: self.xi_max,
        }
        .nodes()
    }

    pub fn f0_nodes(&self) -> Vec<f64> {
        log_grid(self.f0_min, self.f0_max, self.f0_count)
    }
}

/// A `ξ` grid given on the command line as `polar:ANGLES:RADII:MAX` or
/// `cartesian:N:LO:HI`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiGrid {
    Polar { angles: usize, radii: usize, max: f64 },
    Cartesian { n: usize, lo: f64, hi: f64 },
}

impl XiGrid {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || config_err(format!("cannot parse ξ grid {s:?}; expected polar:A:R:MAX or cartesian:N:LO:HI"));
        let count = |t: &str| t.parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(bad);
        let real = |t: &str| t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
        match parts.as_slice() {
            ["polar", a, r, m] => {
                let max = real(m)?;
                positive("polar ξ radius", max)?;
                Ok(Self::Polar {
                    angles: count(a)?,
                    radii: count(r)?,
                    max,
                })
            }
            ["cartesian", n, lo, hi] => {
                let (lo, hi) = (real(lo)?, real(hi)?);
                if !(lo <= hi) {
                    return Err(bad());
                }
                Ok(Self::Cartesian { n: count(n)?, lo, hi })
            }
            _ => Err(bad()),
        }
    }

    /// Polar grids include the origin; radii are graded towards it.
    pub fn nodes(&self) -> Vec<[f64; 2]> {
        match *self {
            Self::Polar { angles, radii, max } => polar_grid(angles, &graded_radii(radii, max), false),
            Self::Cartesian { n, lo, hi } => cartesian_grid(n, lo, hi),
        }
        .iter()
        .map(|t| t.as_array())
        .collect()
    }
}
