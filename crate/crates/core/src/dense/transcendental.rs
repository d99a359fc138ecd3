use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::{CuspResponse, NetworkParams};
use crate::eigen::TiltVector;
use crate::error::{Error, Result};
use crate::roots::illinois;
use crate::transforms::{FNode, FTable, Provenance};

const XTOL: f64 = 1e-15;
const MAX_ITER: usize = 400;

/// Root of the dense-limit determinant at one tilt vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DenseFResult {
    pub tilt: TiltVector,
    pub f: f64,
    /// Determinant at the returned root, scaled by `D₂²`.
    pub residual: f64,
    /// Sign-change interval that was refined.
    pub bracket: [f64; 2],
}

/// `2 sinh²(πs) = cosh(2πs) − 1` without cancellation at small `s`.
fn cosh_minus_one(s: f64) -> f64 {
    let t = (PI * s).sinh();
    2.0 * t * t
}

/// `(D₃C_p − D₁ − c)(D₃C_q − D₁ − c) − D₂²(C_p − 1)(C_q − 1)` with
/// `C_s = cosh 2πs` and `c = 1/(2πα)`. On the axis `q = 0` the cross
/// term drops out and the root satisfies
/// `cosh 2πp = (D₁ + 1/(2πα))/D₃`; the coefficient is `1/(2πα)`, not `1/α`.
pub fn determinant(d: [f64; 3], tilt: TiltVector, params: &NetworkParams) -> f64 {
    let [d1, d2, d3] = d;
    let c = 1.0 / (2.0 * PI * params.alpha);
    let (u, v) = (cosh_minus_one(tilt.p), cosh_minus_one(tilt.q));
    let base = (d3 - d1) - c;
    (d3 * u + base) * (d3 * v + base) - d2 * d2 * u * v
}

fn scaled_determinant(f: f64, tilt: TiltVector, params: &NetworkParams, response: &dyn CuspResponse) -> f64 {
    match response.d(f) {
        Ok(d) => determinant(d, tilt, params) / (d[1] * d[1]),
        Err(_) => f64::NAN,
    }
}

fn refine(
    tilt: TiltVector,
    params: &NetworkParams,
    response: &dyn CuspResponse,
    lo: f64,
    hi: f64,
) -> Result<DenseFResult> {
    let det = |f: f64| scaled_determinant(f, tilt, params, response);
    // relative tolerance on the rate, however small it is
    let f = illinois(det, lo, hi, XTOL * hi / (1.0 + hi), MAX_ITER)?;
    Ok(DenseFResult {
        tilt,
        f,
        residual: det(f),
        bracket: [lo, hi],
    })
}

fn zero_tilt(tilt: TiltVector) -> DenseFResult {
    DenseFResult {
        tilt,
        f: 0.0,
        residual: 0.0,
        bracket: [0.0, 0.0],
    }
}

/// Largest root in `f` of the determinant, found by scanning the response's
/// sample rates for the uppermost sign change and refining it.
pub fn transcendental_solve(
    tilt: TiltVector,
    params: &NetworkParams,
    response: &dyn CuspResponse,
) -> Result<DenseFResult> {
    if !tilt.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite tilt {tilt:?}")));
    }
    if tilt.norm() == 0.0 {
        return Ok(zero_tilt(tilt));
    }
    let pts = response.scan_points();
    let vals: Vec<f64> = pts
        .iter()
        .map(|&f| scaled_determinant(f, tilt, params, response))
        .collect();
    for k in (0..pts.len().saturating_sub(1)).rev() {
        let (a, b) = (vals[k], vals[k + 1]);
        if a.is_finite() && b.is_finite() && (a == 0.0 || a.signum() != b.signum()) {
            return refine(tilt, params, response, pts[k], pts[k + 1]);
        }
    }
    let (lo, hi) = response.range();
    let trace: Vec<String> = pts
        .iter()
        .zip(&vals)
        .step_by((pts.len() / 8).max(1))
        .map(|(f, v)| format!("{f:.3e}:{v:+.2e}"))
        .collect();
    Err(Error::Range(format!(
        "no root of the determinant for {tilt:?} within rates [{lo:e}, {hi:e}]; samples {}",
        trace.join(" ")
    )))
}

/// Root nearest `guess`: the bracket is grown geometrically about `guess`
/// until the determinant changes sign. Falls back to
/// [`transcendental_solve`] when no bracket is found inside the range.
pub fn transcendental_solve_near(
    tilt: TiltVector,
    params: &NetworkParams,
    response: &dyn CuspResponse,
    guess: f64,
) -> Result<DenseFResult> {
    if tilt.norm() == 0.0 {
        return Ok(zero_tilt(tilt));
    }
    let (lo, hi) = response.range();
    if !(guess > lo && guess < hi) {
        return transcendental_solve(tilt, params, response);
    }
    let det = |f: f64| scaled_determinant(f, tilt, params, response);
    let mut factor = 1.05f64;
    while factor < 1e3 {
        let (a, b) = ((guess / factor).max(lo), (guess * factor).min(hi));
        let (fa, fb) = (det(a), det(b));
        if fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum() {
            return refine(tilt, params, response, a, b);
        }
        if a == lo && b == hi {
            break;
        }
        factor *= 1.5;
    }
    transcendental_solve(tilt, params, response)
}

/// Groups grid indices into rays from the origin, each ordered by radius.
fn rays(grid: &[TiltVector]) -> Vec<Vec<usize>> {
    let mut by_angle: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, t) in grid.iter().enumerate() {
        let key = if t.norm() == 0.0 { i64::MIN } else { (t.angle() * 1e9).round() as i64 };
        by_angle.entry(key).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = by_angle.into_values().collect();
    for ray in &mut out {
        ray.sort_by(|&a, &b| grid[a].norm().total_cmp(&grid[b].norm()));
    }
    out
}

/// Dense-limit `f(p)` over a grid. Rays are processed in parallel; along
/// each ray the first node is bracketed by a full scan and later nodes
/// start from the previous root. Failed nodes carry `f = NaN`.
pub fn dense_sweep(grid: &[TiltVector], params: &NetworkParams, response: &dyn CuspResponse) -> FTable {
    let solved: Vec<Vec<(usize, FNode)>> = rays(grid)
        .into_par_iter()
        .map(|ray| {
            let mut prev: Option<f64> = None;
            ray.into_iter()
                .map(|i| {
                    let t = grid[i];
                    let outcome = match prev {
                        Some(g) if g > 0.0 => transcendental_solve_near(t, params, response, g),
                        _ => transcendental_solve(t, params, response),
                    };
                    let node = match outcome {
                        Ok(r) => {
                            prev = Some(r.f);
                            FNode {
                                residual: r.residual.abs(),
                                ..FNode::exact(t, r.f)
                            }
                        }
                        Err(e) => FNode {
                            error: Some(e.to_string()),
                            ..FNode::exact(t, f64::NAN)
                        },
                    };
                    (i, node)
                })
                .collect()
        })
        .collect();
    let mut nodes: Vec<Option<FNode>> = vec![None; grid.len()];
    for (i, n) in solved.into_iter().flatten() {
        nodes[i] = Some(n);
    }
    let mut provenance = Provenance::new();
    provenance.insert("epsilon".into(), params.epsilon.into());
    provenance.insert("model".into(), "dense".into());
    provenance.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    FTable::new(nodes.into_iter().map(Option::unwrap).collect(), provenance)
}
