use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::solver::{principal_eigenvalue, EigenOptions, EigenResult};
use super::{AssembledSystem, Operators, TiltVector};
use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::transforms::{FNode, FTable};

/// Solves at one tilt vector on prebuilt operators.
pub fn solve_at(
    operators: &Arc<Operators>,
    tilt: TiltVector,
    warm: Option<&EigenResult>,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    let system = AssembledSystem::at(operators, tilt);
    let start = warm.map(|w| w.eigenvector.as_slice());
    principal_eigenvalue(&system, None, start, opts)
}

/// Groups grid indices into rays from the origin, each ordered by radius.
/// The origin forms its own group.
fn rays(grid: &[TiltVector]) -> Vec<Vec<usize>> {
    let mut by_angle: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut origin = Vec::new();
    for (i, t) in grid.iter().enumerate() {
        if t.norm() == 0.0 {
            origin.push(i);
        } else {
            // angles agreeing to ~1e-9 share a ray
            let key = (t.angle() * 1e9).round() as i64;
            by_angle.entry(key).or_default().push(i);
        }
    }
    let mut out: Vec<Vec<usize>> = by_angle.into_values().collect();
    for ray in &mut out {
        ray.sort_by(|&a, &b| grid[a].norm().total_cmp(&grid[b].norm()));
    }
    if !origin.is_empty() {
        out.insert(0, origin);
    }
    out
}

fn node(tilt: TiltVector, outcome: &Result<EigenResult>) -> FNode {
    match outcome {
        Ok(r) => FNode {
            tilt,
            f: r.f,
            residual: r.residual,
            iterations: r.iterations,
            error: None,
        },
        Err(e) => {
            let (residual, iterations) = match e {
                Error::NotConverged {
                    residual,
                    iterations,
                    ..
                } => (*residual, *iterations),
                _ => (f64::NAN, 0),
            };
            FNode {
                tilt,
                f: f64::NAN,
                residual,
                iterations,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Principal eigenvalue at every grid node.
///
/// With `continuation` the grid is split into rays that are solved in
/// parallel, each sequentially outwards with the previous eigenvector as
/// starting vector. Without it every node is solved independently. Failed
/// nodes are recorded with `f = NaN` and do not stop the sweep.
pub fn sweep_f(
    mesh: &Mesh,
    grid: &[TiltVector],
    continuation: bool,
    opts: &EigenOptions,
) -> Result<FTable> {
    if let Some(bad) = grid.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite grid node {bad:?}")));
    }
    faer::set_global_parallelism(faer::Par::Seq);
    let operators = Arc::new(Operators::new(mesh)?);
    let mut nodes: Vec<Option<FNode>> = vec![None; grid.len()];
    if continuation {
        let solved: Vec<Vec<(usize, FNode)>> = rays(grid)
            .into_par_iter()
            .map(|ray| {
                let mut warm: Option<EigenResult> = None;
                let mut out = Vec::with_capacity(ray.len());
                for i in ray {
                    let outcome = solve_at(&operators, grid[i], warm.as_ref(), opts);
                    out.push((i, node(grid[i], &outcome)));
                    warm = outcome.ok();
                }
                out
            })
            .collect();
        for (i, n) in solved.into_iter().flatten() {
            nodes[i] = Some(n);
        }
    } else {
        let solved: Vec<FNode> = grid
            .par_iter()
            .map(|&t| node(t, &solve_at(&operators, t, None, opts)))
            .collect();
        nodes = solved.into_iter().map(Some).collect();
    }
    let mut provenance = BTreeMap::new();
    provenance.insert("mesh_h".into(), mesh.h.into());
    provenance.insert("mesh_vertices".into(), mesh.num_vertices().into());
    provenance.insert("dofs".into(), operators.n_dofs.into());
    provenance.insert("tol".into(), opts.tol.into());
    provenance.insert("max_iter".into(), opts.max_iter.into());
    provenance.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    Ok(FTable::new(nodes.into_iter().map(Option::unwrap).collect(), provenance))
}

/// Effective diffusivity from the curvature of `f` at the origin:
/// Richardson extrapolation of `f(p e_x)/p²` over probes `p` and `2p`.
pub fn effective_diffusivity_fem(mesh: &Mesh, probe: f64, opts: &EigenOptions) -> Result<f64> {
    if !(probe > 0.0 && probe.is_finite()) {
        return Err(Error::InvalidParameter(format!("probe must be positive, got {probe}")));
    }
    let operators = Arc::new(Operators::new(mesh)?);
    // f is tiny here, so tighten the residual to keep the ratio accurate
    let tight = EigenOptions {
        tol: opts.tol.min(1e-11),
        ..*opts
    };
    let ratio = |p: f64| -> Result<f64> {
        let r = solve_at(&operators, TiltVector::new(p, 0.0), None, &tight)?;
        Ok(r.f / (p * p))
    };
    let (small, large) = (ratio(probe)?, ratio(2.0 * probe)?);
    Ok((4.0 * small - large) / 3.0)
}
