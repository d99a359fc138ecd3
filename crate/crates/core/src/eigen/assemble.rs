use std::sync::Arc;

use super::TiltVector;
use crate::error::Result;
use crate::geometry::Mesh;
use crate::sparse::{LuAnalysis, Pattern, SparseMatrix};

/// Tilt-independent P1 matrices on the periodic degrees of freedom of a mesh.
///
/// The drift for tilt `p` is `p·drift_x + q·drift_y`, so the operators are
/// assembled once and reused across a whole sweep.
pub struct Operators {
    pub stiffness: SparseMatrix,
    pub drift_x: SparseMatrix,
    pub drift_y: SparseMatrix,
    pub mass: SparseMatrix,
    /// Degree of freedom of every mesh vertex.
    pub dof_map: Vec<usize>,
    pub n_dofs: usize,
    pub(crate) analysis: LuAnalysis,
}

/// Gradients of the three barycentric hat functions and the triangle area.
pub(crate) fn p1_gradients(pts: &[[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let [a, b, c] = *pts;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (p, q) = (pts[(i + 1) % 3], pts[(i + 2) % 3]);
        g[i] = [(p[1] - q[1]) / det, (q[0] - p[0]) / det];
    }
    (g, 0.5 * det)
}

/// Sparsity pattern of P1 couplings after merging vertices through `dof_map`.
pub(crate) fn dof_pattern(mesh: &Mesh, dof_map: &[usize], n_dofs: usize) -> Arc<Pattern> {
    let entries = mesh.triangles.iter().flat_map(|t| {
        let d = [dof_map[t[0]], dof_map[t[1]], dof_map[t[2]]];
        (0..9).map(move |k| (d[k / 3], d[k % 3]))
    });
    Arc::new(Pattern::from_entries(n_dofs, entries))
}

impl Operators {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        mesh.validate()?;
        let (dof_map, n_dofs) = mesh.periodic_dofs();
        let pattern = dof_pattern(mesh, &dof_map, n_dofs);
        let mut stiffness = SparseMatrix::zeros(pattern.clone());
        let mut drift_x = SparseMatrix::zeros(pattern.clone());
        let mut drift_y = SparseMatrix::zeros(pattern.clone());
        let mut mass = SparseMatrix::zeros(pattern.clone());
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let (g, area) = p1_gradients(&mesh.triangle_points(t));
            let d = tri.map(|v| dof_map[v]);
            for i in 0..3 {
                for j in 0..3 {
                    let k = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                    let m = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                    // ∫ (∂N_j N_i − ∂N_i N_j): row is the test function
                    let bx = area / 3.0 * (g[j][0] - g[i][0]);
                    let by = area / 3.0 * (g[j][1] - g[i][1]);
                    stiffness.add(d[i], d[j], k);
                    mass.add(d[i], d[j], m);
                    drift_x.add(d[i], d[j], bx);
                    drift_y.add(d[i], d[j], by);
                }
            }
        }
        let analysis = LuAnalysis::new(&pattern)?;
        Ok(Self {
            stiffness,
            drift_x,
            drift_y,
            mass,
            dof_map,
            n_dofs,
            analysis,
        })
    }

    pub fn drift(&self, tilt: TiltVector) -> SparseMatrix {
        SparseMatrix::combine(&[(tilt.p, &self.drift_x), (tilt.q, &self.drift_y)])
    }

    /// Expands a vector over degrees of freedom to mesh vertices.
    pub fn to_nodal(&self, x: &[f64]) -> Vec<f64> {
        self.dof_map.iter().map(|&d| x[d]).collect()
    }
}

/// The discrete eigenproblem at one tilt vector.
#[derive(Clone)]
pub struct AssembledSystem {
    pub operators: Arc<Operators>,
    pub tilt: TiltVector,
}

/// Assembles the stiffness, drift and mass matrices of `mesh` at `tilt`.
pub fn assemble(mesh: &Mesh, tilt: TiltVector) -> Result<AssembledSystem> {
    Ok(AssembledSystem {
        operators: Arc::new(Operators::new(mesh)?),
        tilt,
    })
}

impl AssembledSystem {
    pub fn at(operators: &Arc<Operators>, tilt: TiltVector) -> Self {
        Self {
            operators: operators.clone(),
            tilt,
        }
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.operators.stiffness
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.operators.mass
    }

    /// `B(p) = p·Bx + q·By`, exactly skew-symmetric.
    pub fn skew_drift(&self) -> SparseMatrix {
        self.operators.drift(self.tilt)
    }

    /// `A = −K − B(p) + |p|² M`, whose eigenvalues relative to `M` are the
    /// discrete `f`.
    pub fn pencil(&self) -> SparseMatrix {
        let ops = &self.operators;
        SparseMatrix::combine(&[
            (-1.0, &ops.stiffness),
            (-self.tilt.p, &ops.drift_x),
            (-self.tilt.q, &ops.drift_y),
            (self.tilt.norm_sq(), &ops.mass),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_cell_mesh, CellSpec, MeshOptions};
    use std::f64::consts::PI;

    fn system(tilt: TiltVector) -> (Mesh, AssembledSystem) {
        let spec = CellSpec::new(PI / 2.0).unwrap();
        let mesh = build_cell_mesh(&spec, &MeshOptions::with_h(0.3)).unwrap();
        let sys = assemble(&mesh, tilt).unwrap();
        (mesh, sys)
    }

    #[test]
    fn zero_tilt_has_no_drift() {
        let (_, sys) = system(TiltVector::ZERO);
        assert!(sys.skew_drift().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constants_and_skew_symmetry() {
        let (_, sys) = system(TiltVector::new(0.7, -1.3));
        let n = sys.operators.n_dofs;
        let ones = vec![1.0; n];
        let k1 = sys.stiffness().mul_vec(&ones);
        assert!(k1.iter().all(|v| v.abs() < 1e-12));
        let b = sys.skew_drift();
        let b1: f64 = b.mul_vec(&ones).iter().sum();
        assert!(b1.abs() < 1e-12);
        for (i, j, v) in b.entries() {
            assert_eq!(v, -b.get(j, i));
        }
    }

    #[test]
    fn mass_totals_mesh_area_and_is_positive() {
        let (mesh, sys) = system(TiltVector::ZERO);
        assert!((sys.mass().total() - mesh.area()).abs() < 1e-10 * mesh.area());
        let exact = 4.0 * PI * PI - PI * (PI / 2.0) * (PI / 2.0);
        assert!((sys.mass().total() / exact - 1.0).abs() < 1e-3);
        let m = sys.mass();
        for (i, j, v) in m.entries() {
            assert_eq!(v, m.get(j, i));
        }
        // xᵀMx > 0 on a few oscillating vectors
        for k in 1..4 {
            let x: Vec<f64> = (0..m.dim()).map(|i| ((i * k) as f64).sin()).collect();
            let mx = m.mul_vec(&x);
            assert!(crate::sparse::dot(&x, &mx) > 0.0);
        }
    }
}
