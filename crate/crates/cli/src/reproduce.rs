//! Presets that regenerate the data behind each published comparison.
//! Every figure writes plot-ready CSV into its own subdirectory.

use std::f64::consts::PI;

use latticeld::dense::DTable;
use latticeld::dispersion::{
    compare_models, concentration_profile, level_set_speed, write_profiles_csv, ConjugateRate, ProfileModel,
    QuadraticRate, RateFunction,
};
use latticeld::eigen::{graded_radii, polar_grid};
use latticeld::geometry::{CellSpec, ASTROID_AREA};
use latticeld::transforms::{keller_kappa_eps, legendre_transform, maxwell_kappa, Provenance};
use serde::Serialize;

use crate::commands::{cell_mesh, cusp_table, dense_ftable, fem_ftable};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{write_rows, Output};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    /// Rate function for a small obstacle, against the Maxwell quadratic.
    Fig2a,
    /// Rate function for a mid-sized obstacle, against a best-fit quadratic.
    Fig2b,
    /// Rate function for a dense lattice, against the Keller quadratic.
    Fig2c,
    /// Concentration profiles along the diagonal in two dense lattices.
    Fig3,
    /// Rate function along the axis and the diagonal for all four models.
    Fig5,
    /// Level sets of the FEM and dense-asymptotic rate functions.
    Fig6,
    /// Cusp constants against rate with their small-rate asymptote.
    Fig7,
}

const FIG2_LEVELS: [f64; 5] = [0.01, 0.1, 0.5, 1.0, 2.0];
const FIG6_LEVELS: [f64; 4] = [0.1, 1.0, 2.5, 5.0];
const DENSE_GAPS: [f64; 2] = [0.01, 0.001];
const CONTOUR_ANGLES: usize = 96;

pub fn run(figure: Figure, cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let name = format!("{figure:?}").to_lowercase();
    let out = out.child(&name)?;
    match figure {
        Figure::Fig2a => fig2(cfg, &out, 0.01, Quadratic::Maxwell),
        Figure::Fig2b => fig2(cfg, &out, PI / 2.0, Quadratic::BestFit),
        Figure::Fig2c => fig2(cfg, &out, PI - 0.01, Quadratic::Keller),
        Figure::Fig3 => fig3(cfg, &out),
        Figure::Fig5 => fig5(cfg, &out),
        Figure::Fig6 => fig6(cfg, &out),
        Figure::Fig7 => fig7(cfg, &out),
    }
}

fn with_radius(cfg: &RunConfig, a: f64) -> RunConfig {
    RunConfig {
        obstacle_radius: Some(a),
        epsilon: None,
        ..cfg.clone()
    }
}

fn with_gap(cfg: &RunConfig, eps: f64) -> RunConfig {
    RunConfig {
        obstacle_radius: None,
        epsilon: Some(eps),
        ..cfg.clone()
    }
}

fn gap_tag(eps: f64) -> String {
    format!("eps{eps}")
}

#[derive(Serialize)]
struct ContourPoint {
    level: f64,
    model: &'static str,
    angle: f64,
    xi_x: f64,
    xi_y: f64,
}

/// Radius at which `g` first reaches `level` along `e`, bracketed by
/// stepping outwards so the search stays inside the table.
fn level_radius(rate: &dyn RateFunction, level: f64, e: [f64; 2], step: f64) -> latticeld::Result<f64> {
    let mut hi = step;
    while rate.g([hi * e[0], hi * e[1]])? < level {
        hi += step;
    }
    level_set_speed(rate, level, e, hi)
}

/// Points of `{g = level}` on rays at uniformly spaced angles. Rays on
/// which the level is not reached inside the table are skipped.
fn contour(
    rate: &dyn RateFunction,
    model: &'static str,
    levels: &[f64],
    step: f64,
    rows: &mut Vec<ContourPoint>,
) -> usize {
    let mut skipped = 0;
    for &level in levels {
        for k in 0..CONTOUR_ANGLES {
            let angle = 2.0 * PI * k as f64 / CONTOUR_ANGLES as f64;
            let e = [angle.cos(), angle.sin()];
            match level_radius(rate, level, e, step) {
                Ok(r) => rows.push(ContourPoint {
                    level,
                    model,
                    angle,
                    xi_x: r * e[0],
                    xi_y: r * e[1],
                }),
                Err(err) => {
                    log::warn!("{model} level {level} at angle {angle:.3}: {err}");
                    skipped += 1;
                }
            }
        }
    }
    skipped
}

#[derive(Debug, Clone, Copy)]
enum Quadratic {
    Maxwell,
    BestFit,
    Keller,
}

fn fig2(cfg: &RunConfig, out: &Output, a: f64, quadratic: Quadratic) -> Result<(), CliError> {
    let cfg = with_radius(cfg, a);
    let cell = CellSpec::new(a)?;
    let f = fem_ftable(&cfg, &cell_mesh(&cfg)?)?.symmetric_completion();
    let n = 2 * cfg.xi_radii + 1;
    let step = 2.0 * cfg.xi_max / (n - 1) as f64;
    let grid: Vec<[f64; 2]> = (0..n * n)
        .map(|k| [-cfg.xi_max + step * (k / n) as f64, -cfg.xi_max + step * (k % n) as f64])
        .collect();
    let g = legendre_transform(&f, &grid);
    let kappa = match quadratic {
        Quadratic::Maxwell => maxwell_kappa(cell.area_fraction()),
        Quadratic::Keller => keller_kappa_eps(cell.epsilon()),
        Quadratic::BestFit => {
            let near = legendre_transform(&f, &polar_grid(16, &graded_radii(10, 0.2), false)
                .iter()
                .map(|t| t.as_array())
                .collect::<Vec<_>>());
            near.best_fit_kappa(0.2)?
        }
    };
    let mut extra = g.provenance.clone();
    extra.insert("obstacle_radius".into(), a.into());
    out.csv("rate_grid.csv", extra, |w| g.write_csv(w))?;

    let mut rows = Vec::new();
    let skipped = contour(&ConjugateRate::new(&f), "fem", &FIG2_LEVELS, 0.1, &mut rows)
        + contour(&QuadraticRate(kappa), "quadratic", &FIG2_LEVELS, 0.1, &mut rows);
    let mut extra = Provenance::new();
    extra.insert("obstacle_radius".into(), a.into());
    extra.insert("quadratic".into(), format!("{quadratic:?}").to_lowercase().into());
    extra.insert("kappa".into(), kappa.into());
    extra.insert("skipped_rays".into(), skipped.into());
    out.csv("contours.csv", extra, |w| write_rows(&rows, w))?;
    Ok(())
}

fn fig3(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    for eps in DENSE_GAPS {
        let cfg = with_gap(cfg, eps);
        let f = fem_ftable(&cfg, &cell_mesh(&cfg)?)?.symmetric_completion();
        let kappa = keller_kappa_eps(eps);
        let times: Vec<f64> = (1..=5).map(|k| k as f64 * 4.0 * PI * PI / kappa).collect();
        let radii: Vec<f64> = (0..=120).map(|k| 2.0 * PI * k as f64 / 20.0).collect();
        let diagonal = [1.0, 1.0];
        let profiles = [
            concentration_profile(&ConjugateRate::new(&f), ProfileModel::LargeDeviation, diagonal, &times, &radii)?,
            concentration_profile(&QuadraticRate(kappa), ProfileModel::Gaussian, diagonal, &times, &radii)?,
        ];
        let mut extra = Provenance::new();
        extra.insert("epsilon".into(), eps.into());
        extra.insert("kappa".into(), kappa.into());
        extra.insert("time_unit".into(), (4.0 * PI * PI / kappa).into());
        out.csv(&format!("profiles_{}.csv", gap_tag(eps)), extra, |w| write_profiles_csv(&profiles, w))?;
    }
    Ok(())
}

/// FEM and dense-asymptotic rates for a dense cell, sharing one cusp table.
fn dense_pair(cfg: &RunConfig, eps: f64, table: &DTable) -> Result<(ConjugateRate, ConjugateRate), CliError> {
    let cfg = with_gap(cfg, eps);
    let fem = fem_ftable(&cfg, &cell_mesh(&cfg)?)?;
    let asym = dense_ftable(&cfg, table)?;
    if asym.failures() > 0 {
        log::warn!("{} dense-asymptotic nodes failed and are skipped", asym.failures());
    }
    Ok((
        ConjugateRate::new(&fem.symmetric_completion()),
        ConjugateRate::new(&asym.symmetric_completion()),
    ))
}

fn fig5(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let table = cusp_table(cfg)?;
    let radii: Vec<f64> = (1..=60).map(|k| cfg.xi_max * k as f64 / 60.0).collect();
    for eps in DENSE_GAPS {
        let (fem, asym) = dense_pair(cfg, eps, &table)?;
        let n = with_gap(cfg, eps).network()?;
        for (tag, dir) in [("axis", [1.0, 0.0]), ("diagonal", [1.0, 1.0])] {
            let c = compare_models(&fem, &asym, &n, keller_kappa_eps(eps), dir, &radii)?;
            let mut extra = Provenance::new();
            extra.insert("summary".into(), c.summary());
            out.csv(&format!("rays_{}_{tag}.csv", gap_tag(eps)), extra, |w| c.write_csv(w))?;
        }
    }
    Ok(())
}

fn fig6(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let table = cusp_table(cfg)?;
    for eps in DENSE_GAPS {
        let (fem, asym) = dense_pair(cfg, eps, &table)?;
        let mut rows = Vec::new();
        let skipped = contour(&fem, "fem", &FIG6_LEVELS, 0.1, &mut rows)
            + contour(&asym, "asymptotic", &FIG6_LEVELS, 0.1, &mut rows);
        let mut extra = Provenance::new();
        extra.insert("epsilon".into(), eps.into());
        extra.insert("skipped_rays".into(), skipped.into());
        out.csv(&format!("contours_{}.csv", gap_tag(eps)), extra, |w| write_rows(&rows, w))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CuspRow {
    f0: f64,
    #[serde(rename = "D1")]
    d1: f64,
    #[serde(rename = "D2")]
    d2: f64,
    #[serde(rename = "D3")]
    d3: f64,
    small_rate: f64,
}

fn fig7(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let table = cusp_table(cfg)?;
    let rows: Vec<CuspRow> = table
        .nodes
        .iter()
        .map(|n| CuspRow {
            f0: n.f0,
            d1: n.d1,
            d2: n.d2,
            d3: n.d3,
            small_rate: 1.0 / (PI * ASTROID_AREA * n.f0),
        })
        .collect();
    out.csv("cusp_constants.csv", table.provenance.clone(), |w| write_rows(&rows, w))?;
    Ok(())
}
