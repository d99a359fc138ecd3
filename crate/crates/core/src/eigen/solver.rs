use serde::{Deserialize, Serialize};

use super::{AssembledSystem, TiltVector};
use crate::error::{Error, Result};
use crate::sparse::{dot, norm, LuAnalysis, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Target relative residual `‖Ax − fMx‖ / (‖Mx‖ max(1, |p|², |f|))`.
    pub tol: f64,
    pub max_iter: usize,
    /// Default shift is `|p|² + shift_offset`.
    pub shift_offset: f64,
    /// Residual below which the shift is moved next to the current estimate.
    pub refine_below: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            shift_offset: 0.1,
            refine_below: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub tilt: TiltVector,
    pub f: f64,
    /// Principal eigenvector over degrees of freedom, unit mass-norm with
    /// positive mean.
    pub eigenvector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

pub(crate) struct Converged {
    pub lambda: f64,
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Shift-and-invert iteration for the eigenvalue of `A x = λ M x` nearest
/// the real shift `sigma`.
///
/// Once the residual drops below `opts.refine_below` the shift is moved to
/// just above the current estimate and the matrix refactorised, which turns
/// the linear convergence rate into a small constant. `floor` enters the
/// residual normalisation.
pub(crate) fn inverse_iteration(
    a: &SparseMatrix,
    m: &SparseMatrix,
    analysis: &LuAnalysis,
    sigma: f64,
    start: Option<&[f64]>,
    floor: f64,
    opts: &EigenOptions,
) -> Result<Converged> {
    let n = a.dim();
    let (mut sigma, mut lu) = factor_shifted(a, m, analysis, sigma)?;
    let mut x: Vec<f64> = match start {
        Some(s) if s.len() == n && norm(s) > 0.0 => s.to_vec(),
        _ => vec![1.0; n],
    };
    let scale = norm(&x);
    x.iter_mut().for_each(|v| *v /= scale);

    let mut refined = false;
    let mut lambda = sigma;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let mx = m.mul_vec(&x);
        let mut y = lu.solve(&mx)?;
        let ny = norm(&y);
        if !(ny > 0.0) {
            return Err(Error::Singular("inverse iteration collapsed to zero".into()));
        }
        y.iter_mut().for_each(|v| *v /= ny);
        x = y;

        // least-squares eigenvalue estimate, minimising ‖Ax − λMx‖
        let ax = a.mul_vec(&x);
        let mx = m.mul_vec(&x);
        let mm = dot(&mx, &mx);
        lambda = dot(&mx, &ax) / mm;
        let r: Vec<f64> = ax.iter().zip(&mx).map(|(u, v)| u - lambda * v).collect();
        residual = norm(&r) / (mm.sqrt() * floor.max(lambda.abs()).max(1.0));
        if residual <= opts.tol {
            return Ok(Converged {
                lambda,
                x,
                residual,
                iterations: it,
            });
        }
        if !refined && residual < opts.refine_below {
            let target = lambda + 0.01 * lambda.abs().max(1.0);
            if target < sigma {
                (sigma, lu) = factor_shifted(a, m, analysis, target)?;
            }
            refined = true;
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual,
        estimate: lambda,
        last_iterate: x,
    })
}

/// Factorises `σM − A`, nudging `σ` upwards if the matrix is singular.
fn factor_shifted(
    a: &SparseMatrix,
    m: &SparseMatrix,
    analysis: &LuAnalysis,
    sigma: f64,
) -> Result<(f64, crate::sparse::Factorization)> {
    let mut s = sigma;
    let probe = vec![1.0; a.dim()];
    let mut last = None;
    for attempt in 0..6 {
        let shifted = SparseMatrix::combine(&[(s, m), (-1.0, a)]);
        match analysis.factor(&shifted).and_then(|lu| lu.solve(&probe).map(|_| lu)) {
            Ok(lu) => return Ok((s, lu)),
            Err(e) => last = Some(e),
        }
        s += 1e-6 * s.abs().max(1.0) * 10f64.powi(attempt);
    }
    Err(last.unwrap_or_else(|| Error::Singular("shifted matrix".into())))
}

/// Scales `x` to unit `M`-norm with positive `M`-weighted mean.
pub(crate) fn normalise(x: &mut [f64], m: &SparseMatrix) {
    let mx = m.mul_vec(x);
    let nrm = dot(x, &mx).abs().sqrt();
    let mean: f64 = mx.iter().sum();
    let s = if mean < 0.0 { -1.0 / nrm } else { 1.0 / nrm };
    x.iter_mut().for_each(|v| *v *= s);
}

/// True when every entry has the sign of the largest one, up to `rel`.
pub(crate) fn single_signed(x: &[f64], rel: f64) -> bool {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
    min >= -rel * max.abs()
}

/// Principal eigenvalue of the assembled pencil.
///
/// `shift` defaults to `|p|² + opts.shift_offset`, which exceeds every
/// eigenvalue's real part so the principal one is nearest. A supplied shift
/// (and `start` vector) from a neighbouring solve speeds convergence; if the
/// resulting eigenvector is not single-signed the solve is repeated from the
/// default shift.
pub fn principal_eigenvalue(
    system: &AssembledSystem,
    shift: Option<f64>,
    start: Option<&[f64]>,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    let tilt = system.tilt;
    if !tilt.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite tilt {tilt:?}")));
    }
    let ops = &system.operators;
    let a = system.pencil();
    if tilt.norm() == 0.0 {
        // constants span the kernel of the untilted operator
        let mut x = vec![1.0; ops.mass.dim()];
        normalise(&mut x, &ops.mass);
        let residual = norm(&a.mul_vec(&x)) / norm(&ops.mass.mul_vec(&x));
        return Ok(EigenResult {
            tilt,
            f: 0.0,
            eigenvector: x,
            residual,
            iterations: 0,
        });
    }
    let default_shift = tilt.norm_sq() + opts.shift_offset;
    let floor = tilt.norm_sq();
    let run = |sigma: f64, start: Option<&[f64]>| {
        inverse_iteration(&a, &ops.mass, &ops.analysis, sigma, start, floor, opts)
    };
    let custom = shift.is_some_and(|s| s != default_shift);
    let mut sol = run(shift.unwrap_or(default_shift), start);
    let suspicious = match &sol {
        Ok(c) => !single_signed(&c.x, 1e-6) && !single_signed(&neg(&c.x), 1e-6),
        Err(_) => true,
    };
    if custom && suspicious {
        sol = run(default_shift, start);
    }
    let mut c = sol?;
    normalise(&mut c.x, &ops.mass);
    Ok(EigenResult {
        tilt,
        f: c.lambda,
        eigenvector: c.x,
        residual: c.residual,
        iterations: c.iterations,
    })
}

fn neg(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| -v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::assemble;
    use crate::geometry::{build_cell_mesh, build_square_mesh, CellSpec, MeshOptions};
    use std::f64::consts::PI;

    #[test]
    fn zero_tilt_gives_zero_with_constant_mode() {
        for a in [0.5, 2.5] {
            let mesh = build_cell_mesh(&CellSpec::new(a).unwrap(), &MeshOptions::with_h(0.3)).unwrap();
            let sys = assemble(&mesh, TiltVector::ZERO).unwrap();
            let r = principal_eigenvalue(&sys, None, None, &EigenOptions::default()).unwrap();
            assert!(r.f.abs() < 1e-10, "f = {}", r.f);
            let first = r.eigenvector[0];
            assert!(first > 0.0);
            assert!(r.eigenvector.iter().all(|v| (v - first).abs() < 1e-6 * first));
            // unit mass norm: constant = 1/√area
            assert!((first * mesh.area().sqrt() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn free_square_gives_free_diffusion() {
        let mesh = build_square_mesh(0.3).unwrap();
        for tilt in [TiltVector::new(1.0, 0.0), TiltVector::new(-0.4, 1.7)] {
            let sys = assemble(&mesh, tilt).unwrap();
            let r = principal_eigenvalue(&sys, None, None, &EigenOptions::default()).unwrap();
            assert!((r.f - tilt.norm_sq()).abs() < 1e-8 * tilt.norm_sq());
        }
    }

    #[test]
    fn dilute_cell_matches_maxwell() {
        let a: f64 = 0.01;
        let mesh = build_cell_mesh(&CellSpec::new(a).unwrap(), &MeshOptions::with_h(0.2)).unwrap();
        let sys = assemble(&mesh, TiltVector::new(1.0, 0.0)).unwrap();
        let r = principal_eigenvalue(&sys, None, None, &EigenOptions::default()).unwrap();
        let sigma = a * a / (4.0 * PI);
        assert!((r.f - (1.0 - sigma)).abs() < 1e-4, "f = {}", r.f);
        assert!(r.f <= 1.0);
        assert!(r.residual <= 1e-8);
    }

    #[test]
    fn bad_start_vector_still_finds_principal_mode() {
        let mesh = build_cell_mesh(&CellSpec::new(2.0).unwrap(), &MeshOptions::with_h(0.3)).unwrap();
        let tilt = TiltVector::new(0.8, 0.3);
        let sys = assemble(&mesh, tilt).unwrap();
        let opts = EigenOptions::default();
        let reference = principal_eigenvalue(&sys, None, None, &opts).unwrap();
        let n = reference.eigenvector.len();
        let wiggle: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let r = principal_eigenvalue(&sys, Some(reference.f - 0.05), Some(&wiggle), &opts).unwrap();
        assert!((r.f - reference.f).abs() < 1e-8 * reference.f.max(1.0));
        assert!(single_signed(&r.eigenvector, 1e-6));
    }

    #[test]
    fn iteration_cap_reports_last_iterate() {
        let mesh = build_cell_mesh(&CellSpec::new(2.0).unwrap(), &MeshOptions::with_h(0.3)).unwrap();
        let sys = assemble(&mesh, TiltVector::new(1.5, 0.0)).unwrap();
        let opts = EigenOptions {
            max_iter: 1,
            tol: 1e-15,
            ..EigenOptions::default()
        };
        match principal_eigenvalue(&sys, None, None, &opts) {
            Err(Error::NotConverged { iterations, last_iterate, .. }) => {
                assert_eq!(iterations, 1);
                assert_eq!(last_iterate.len(), sys.operators.n_dofs);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
