use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CuspResponse;
use crate::eigen::Operators;
use crate::error::{Error, Result};
use crate::geometry::{build_astroid_mesh, AstroidSpec, BoundaryTag, Mesh};
use crate::interp::Pchip;
use crate::sparse::SparseMatrix;
use crate::transforms::Provenance;

/// Field and cusp constants of the screened cusp problem at one rate.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalSolution {
    pub f0: f64,
    /// `D₁..D₄` for the west (source), south, east and north cusps.
    pub d: [f64; 4],
    /// Nodal values on the astroid mesh.
    pub psi: Vec<f64>,
}

/// Astroid mesh with its operators and the west-cusp load vector.
struct Problem {
    mesh: Mesh,
    operators: Operators,
    load: Vec<f64>,
    delta: f64,
}

impl Problem {
    fn new(spec: &AstroidSpec) -> Result<Self> {
        let mesh = build_astroid_mesh(spec)?;
        let operators = Operators::new(&mesh)?;
        let width = mesh.boundary_length(BoundaryTag::TrimWest);
        // uniform inward flux of unit total 1/π across the trimmed west cusp
        let datum = -1.0 / (PI * width);
        let mut load = vec![0.0; operators.n_dofs];
        for e in mesh.edges_with_tag(BoundaryTag::TrimWest) {
            let len = distance(mesh.vertices[e.a], mesh.vertices[e.b]);
            load[operators.dof_map[e.a]] += 0.5 * len * datum;
            load[operators.dof_map[e.b]] += 0.5 * len * datum;
        }
        Ok(Self {
            mesh,
            operators,
            load,
            delta: spec.trim_distance,
        })
    }

    fn trim_mean(&self, psi: &[f64], tag: BoundaryTag) -> f64 {
        let (mut total, mut len) = (0.0, 0.0);
        for e in self.mesh.edges_with_tag(tag) {
            let l = distance(self.mesh.vertices[e.a], self.mesh.vertices[e.b]);
            total += 0.5 * l * (psi[e.a] + psi[e.b]);
            len += l;
        }
        total / len
    }

    fn solve(&self, f0: f64) -> Result<CanonicalSolution> {
        if !(f0 > 0.0 && f0.is_finite()) {
            return Err(Error::Singular(format!(
                "screening rate must be positive (got {f0}); the Neumann problem has a constant null mode"
            )));
        }
        let ops = &self.operators;
        let delta = self.delta;
        let a = SparseMatrix::combine(&[(1.0, &ops.stiffness), (f0, &ops.mass)]);
        // the trimmed tip 0 < x < δ would absorb f₀∫ψ ≈ f₀δ²/(2π) of the flux
        let load: Vec<f64> = self.load.iter().map(|b| b * (1.0 - 0.5 * f0 * delta * delta)).collect();
        let psi = ops.analysis.factor(&a)?.solve(&load)?;
        let psi = ops.to_nodal(&psi);
        let mean = |tag| self.trim_mean(&psi, tag);
        // cross-section mean of the cusp field: −1/x − D₁ − (f₀/2 − 1/(12π²))x + …
        let template = 1.0 / delta + (0.5 * f0 - 1.0 / (12.0 * PI * PI)) * delta;
        let d = [
            -mean(BoundaryTag::TrimWest) - template,
            -mean(BoundaryTag::TrimSouth),
            -mean(BoundaryTag::TrimEast),
            -mean(BoundaryTag::TrimNorth),
        ];
        Ok(CanonicalSolution { f0, d, psi })
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Solves `∇²ψ = f₀ψ` on the trimmed astroid with no flux through the
/// curved walls and a unit-strength source at the west cusp, and reads off
/// the constant parts of `ψ` at the four cusps.
pub fn solve_canonical(f0: f64, spec: &AstroidSpec) -> Result<CanonicalSolution> {
    Problem::new(spec)?.solve(f0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DNode {
    pub f0: f64,
    #[serde(rename = "D1")]
    pub d1: f64,
    #[serde(rename = "D2")]
    pub d2: f64,
    #[serde(rename = "D3")]
    pub d3: f64,
}

/// Cusp constants tabulated on an increasing grid of rates. Interpolation
/// is by monotone cubics in `ln f₀`, applied to `ln D₂`, `ln D₃` and to the
/// difference `D₃ − D₁`. At small rates all `Dᵢ` share a `1/f₀` singular
/// part and the determinant depends on the O(1) difference, which separate
/// interpolation of `D₁` and `D₃` would lose.
#[derive(Debug, Clone)]
pub struct DTable {
    pub nodes: Vec<DNode>,
    pub provenance: Provenance,
    curves: [Pchip; 3],
}

impl DTable {
    pub fn new(nodes: Vec<DNode>, provenance: Provenance) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("cusp table needs at least one node".into()));
        }
        if let Some(n) = nodes
            .iter()
            .find(|n| !(n.f0 > 0.0 && n.d1.is_finite() && n.d2 > 0.0 && n.d3 > 0.0))
        {
            return Err(Error::Domain(format!(
                "cusp table needs positive rates and positive D2, D3, got {n:?}"
            )));
        }
        let x: Vec<f64> = nodes.iter().map(|n| n.f0.ln()).collect();
        let curve = |get: &dyn Fn(&DNode) -> f64| Pchip::new(x.clone(), nodes.iter().map(get).collect());
        let curves = [
            curve(&|n| n.d3 - n.d1)?,
            curve(&|n| n.d2.ln())?,
            curve(&|n| n.d3.ln())?,
        ];
        Ok(Self {
            nodes,
            provenance,
            curves,
        })
    }

    /// Nodes at which some `Dᵢ` fails to decrease from the previous node.
    pub fn monotonicity_violations(&self) -> Vec<usize> {
        (1..self.nodes.len())
            .filter(|&k| {
                let (a, b) = (&self.nodes[k - 1], &self.nodes[k]);
                !(b.d1 < a.d1 && b.d2 < a.d2 && b.d3 < a.d3)
            })
            .collect()
    }

    /// CSV with columns `f0, D1, D2, D3`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for n in &self.nodes {
            out.serialize(n).map_err(|e| Error::Parse(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let nodes = csv::Reader::from_reader(r)
            .deserialize::<DNode>()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(nodes, Provenance::new())
    }
}

impl CuspResponse for DTable {
    fn d(&self, f: f64) -> Result<[f64; 3]> {
        let (lo, hi) = self.range();
        if !(f >= lo && f <= hi) {
            return Err(Error::Range(format!("rate {f} outside tabulated [{lo}, {hi}]")));
        }
        let x = f.ln().clamp(lo.ln(), hi.ln());
        let d3 = self.curves[2].eval(x)?.exp();
        Ok([d3 - self.curves[0].eval(x)?, self.curves[1].eval(x)?.exp(), d3])
    }

    fn range(&self) -> (f64, f64) {
        (self.nodes[0].f0, self.nodes.last().unwrap().f0)
    }

    fn scan_points(&self) -> Vec<f64> {
        const SUB: usize = 4;
        let mut out = vec![self.nodes[0].f0];
        for w in self.nodes.windows(2) {
            let (a, b) = (w[0].f0.ln(), w[1].f0.ln());
            for k in 1..SUB {
                out.push((a + (b - a) * k as f64 / SUB as f64).exp());
            }
            out.push(w[1].f0);
        }
        out
    }
}

/// Solves the cusp problem at every rate in `f0_grid` (in parallel, sharing
/// one mesh and factorisation pattern). Failed nodes are dropped and
/// listed in the provenance under `failures`.
pub fn tabulate_d(f0_grid: &[f64], spec: &AstroidSpec) -> Result<DTable> {
    if f0_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("rate grid must be strictly increasing".into()));
    }
    faer::set_global_parallelism(faer::Par::Seq);
    let problem = Arc::new(Problem::new(spec)?);
    let solved: Vec<Result<CanonicalSolution>> = f0_grid.par_iter().map(|&f0| problem.solve(f0)).collect();
    let mut nodes = Vec::new();
    let mut failures = Vec::new();
    for (f0, r) in f0_grid.iter().zip(solved) {
        match r {
            Ok(s) => nodes.push(DNode {
                f0: s.f0,
                d1: s.d[0],
                d2: s.d[1],
                d3: s.d[2],
            }),
            Err(e) => failures.push(serde_json::json!({ "f0": f0, "error": e.to_string() })),
        }
    }
    let mut provenance = Provenance::new();
    provenance.insert("trim_distance".into(), spec.trim_distance.into());
    provenance.insert("mesh_h".into(), spec.mesh_size.into());
    provenance.insert("mesh_vertices".into(), problem.mesh.num_vertices().into());
    provenance.insert("failures".into(), failures.into());
    provenance.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    let table = DTable::new(nodes, provenance)?;
    let violations = table.monotonicity_violations();
    if !violations.is_empty() {
        log::warn!("cusp constants not decreasing at nodes {violations:?}");
    }
    Ok(table)
}

/// `n` rates log-spaced over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}
