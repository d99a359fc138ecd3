use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use latticeld::dense::{dense_sweep, network_f, tabulate_d, DTable};
use latticeld::dispersion::{
    compare_models, fkpp_front_speed, ConjugateRate, NetworkRate, QuadraticRate, RateFunction,
};
use latticeld::eigen::{effective_diffusivity_fem, solve_at, sweep_f, Operators, TiltVector};
use latticeld::geometry::{build_astroid_mesh, build_cell_mesh, Mesh};
use latticeld::transforms::{keller_kappa_eps, legendre_transform, quadratic_f, FTable, Provenance};
use serde_json::json;

use crate::config::{RunConfig, XiGrid};
use crate::error::CliError;
use crate::output::Output;

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn read_ftable(path: &Path) -> Result<FTable, CliError> {
    Ok(FTable::read_csv(open(path)?)?)
}

pub fn read_dtable(path: &Path) -> Result<DTable, CliError> {
    Ok(DTable::read_csv(open(path)?)?)
}

pub fn cell_mesh(cfg: &RunConfig) -> Result<Mesh, CliError> {
    Ok(build_cell_mesh(&cfg.cell()?, &cfg.mesh_options())?)
}

/// FEM sweep over the configured tilt grid.
pub fn fem_ftable(cfg: &RunConfig, mesh: &Mesh) -> Result<FTable, CliError> {
    let mut table = sweep_f(mesh, &cfg.p_nodes(), cfg.continuation, &cfg.eigen_options())?;
    table.provenance.insert("obstacle_radius".into(), cfg.cell()?.obstacle_radius().into());
    Ok(table)
}

pub fn cusp_table(cfg: &RunConfig) -> Result<DTable, CliError> {
    Ok(tabulate_d(&cfg.f0_nodes(), &cfg.astroid()?)?)
}

/// Dense-limit `f` over the configured tilt grid.
pub fn dense_ftable(cfg: &RunConfig, table: &DTable) -> Result<FTable, CliError> {
    Ok(dense_sweep(&cfg.p_nodes(), &cfg.network()?, table))
}

fn failed_nodes(table: &FTable) -> Result<(), CliError> {
    match table.failures() {
        0 => Ok(()),
        n => Err(CliError::Numerical(format!("{n} of {} nodes failed", table.nodes.len()))),
    }
}

fn mesh_summary(mesh: &Mesh) -> serde_json::Value {
    let mut lengths = serde_json::Map::new();
    for e in &mesh.boundary_edges {
        lengths.entry(e.tag.as_str()).or_insert_with(|| mesh.boundary_length(e.tag).into());
    }
    json!({
        "vertices": mesh.num_vertices(),
        "triangles": mesh.num_triangles(),
        "h": mesh.h,
        "area": mesh.area(),
        "min_angle_deg": mesh.min_angle_deg(),
        "max_edge": mesh.max_edge(),
        "boundary_lengths": lengths,
        "valid": mesh.validate().is_ok(),
    })
}

pub fn mesh_report(cfg: &RunConfig, out: &Output, mesh_out: Option<&Path>, astroid: bool) -> Result<(), CliError> {
    let (mesh, mut report) = if astroid {
        let spec = cfg.astroid()?;
        let mesh = build_astroid_mesh(&spec)?;
        let summary = mesh_summary(&mesh);
        (mesh, json!({ "cell": "astroid", "trim_distance": spec.trim_distance, "mesh": summary }))
    } else {
        let cell = cfg.cell()?;
        let mesh = cell_mesh(cfg)?;
        let summary = mesh_summary(&mesh);
        let void = cell.void_area();
        let area_error = (mesh.area() - void).abs() / void;
        (
            mesh,
            json!({
                "cell": "obstacle",
                "obstacle_radius": cell.obstacle_radius(),
                "epsilon": cell.epsilon(),
                "area_fraction": cell.area_fraction(),
                "void_area": void,
                "area_rel_error": area_error,
                "mesh": summary,
            }),
        )
    };
    if let Some(path) = mesh_out {
        mesh.write_text(std::io::BufWriter::new(File::create(path)?))?;
        report["mesh_file"] = path.display().to_string().into();
    }
    println!("{}", serde_json::to_string_pretty(&report).map_err(latticeld::Error::from)?);
    out.json("mesh_report.json", report)?;
    mesh.validate()?;
    Ok(())
}

pub fn f_sweep(cfg: &RunConfig, out: &Output, mesh_in: Option<&Path>, mesh_out: Option<&Path>) -> Result<PathBuf, CliError> {
    let mesh = match mesh_in {
        Some(path) => {
            let mesh = Mesh::read_text(open(path)?)?;
            mesh.validate()?;
            mesh
        }
        None => cell_mesh(cfg)?,
    };
    if let Some(path) = mesh_out {
        mesh.write_text(std::io::BufWriter::new(File::create(path)?))?;
    }
    let table = fem_ftable(cfg, &mesh)?;
    let mut extra = table.provenance.clone();
    extra.insert("bound_violations".into(), table.bound_violations(1e-6).len().into());
    let path = out.csv("ftable.csv", extra, |w| table.write_csv(w))?;
    failed_nodes(&table)?;
    Ok(path)
}

pub fn rate_function(cfg: &RunConfig, out: &Output, ftable: &Path, xi: Option<&str>) -> Result<PathBuf, CliError> {
    let f = read_ftable(ftable)?;
    let grid = match xi {
        Some(spec) => XiGrid::parse(spec)?.nodes(),
        None => cfg.xi_nodes(),
    };
    let g = legendre_transform(&f.symmetric_completion(), &grid);
    let mut extra = g.provenance.clone();
    extra.insert("ftable".into(), ftable.display().to_string().into());
    extra.insert("extrapolated".into(), g.nodes.iter().filter(|n| n.extrapolated).count().into());
    out.csv("rate.csv", extra, |w| g.write_csv(w))
}

pub fn canonical_tabulate(cfg: &RunConfig, out: &Output) -> Result<PathBuf, CliError> {
    let table = cusp_table(cfg)?;
    let path = out.csv("dtable.csv", table.provenance.clone(), |w| table.write_csv(w))?;
    if table.nodes.len() < cfg.f0_count {
        return Err(CliError::Numerical(format!(
            "{} of {} cusp solves failed",
            cfg.f0_count - table.nodes.len(),
            cfg.f0_count
        )));
    }
    Ok(path)
}

pub fn dense_solve(cfg: &RunConfig, out: &Output, dtable: Option<&Path>) -> Result<PathBuf, CliError> {
    let table = match dtable {
        Some(p) => read_dtable(p)?,
        None => cusp_table(cfg)?,
    };
    let f = dense_ftable(cfg, &table)?;
    let path = out.csv("dense_ftable.csv", f.provenance.clone(), |w| f.write_csv(w))?;
    failed_nodes(&f)?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SpeedModel {
    Fem,
    Network,
    Quadratic,
}

pub fn parse_direction(s: &str) -> Result<[f64; 2], CliError> {
    let bad = || CliError::Config(format!("cannot parse direction {s:?}; expected X,Y"));
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [x, y] if x.is_finite() && y.is_finite() && (*x != 0.0 || *y != 0.0) => Ok([*x, *y]),
        _ => Err(bad()),
    }
}

pub fn front_speed(
    cfg: &RunConfig,
    out: &Output,
    alpha_r: f64,
    direction: [f64; 2],
    model: SpeedModel,
    kappa: Option<f64>,
    ftable: Option<&Path>,
) -> Result<(), CliError> {
    let tabulated = ftable.map(read_ftable).transpose()?.map(|t| ConjugateRate::new(&t.symmetric_completion()));
    let mut details = serde_json::Map::new();
    let speed = match model {
        SpeedModel::Fem => {
            let mesh = cell_mesh(cfg)?;
            let ops = Arc::new(Operators::new(&mesh)?);
            let opts = cfg.eigen_options();
            let f = |t: TiltVector| solve_at(&ops, t, None, &opts).map(|r| r.f);
            fkpp_front_speed(&f, alpha_r, direction, cfg.p_max, tabulated.as_ref().map(|r| r as &dyn RateFunction))?
        }
        SpeedModel::Network => {
            let n = cfg.network()?;
            let f = |t: TiltVector| Ok(network_f(t, &n));
            let dual: &dyn RateFunction = match &tabulated {
                Some(r) => r,
                None => &NetworkRate(n),
            };
            fkpp_front_speed(&f, alpha_r, direction, cfg.p_max, Some(dual))?
        }
        SpeedModel::Quadratic => {
            let kappa = match kappa {
                Some(k) => k,
                None => effective_diffusivity_fem(&cell_mesh(cfg)?, 0.02, &cfg.eigen_options())?,
            };
            details.insert("kappa".into(), kappa.into());
            let f = |t: TiltVector| Ok(quadratic_f(kappa, t.as_array()));
            let quad = QuadraticRate(kappa);
            let dual: &dyn RateFunction = match &tabulated {
                Some(r) => r,
                None => &quad,
            };
            fkpp_front_speed(&f, alpha_r, direction, cfg.p_max, Some(dual))?
        }
    };
    let gap = speed.dual_speed.map(|d| (d - speed.speed).abs() / speed.speed);
    let result = json!({
        "model": format!("{model:?}").to_lowercase(),
        "front_speed": speed,
        "dual_relative_gap": gap,
        "details": details,
    });
    println!("{}", serde_json::to_string_pretty(&result).map_err(latticeld::Error::from)?);
    out.json("front_speed.json", result)?;
    Ok(())
}

/// `LO:HI:N` radii, uniform.
pub fn parse_radii(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("cannot parse radii {s:?}; expected LO:HI:N"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else { return Err(bad()) };
    let (lo, hi): (f64, f64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    if n < 1 || !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

/// Rate functions for a dense cell: FEM and dense-asymptotic, each by
/// conjugating its `f` table at the query point.
pub fn dense_rates(
    cfg: &RunConfig,
    ftable: Option<&Path>,
    dtable: Option<&Path>,
) -> Result<(ConjugateRate, ConjugateRate), CliError> {
    let fem = match ftable {
        Some(p) => read_ftable(p)?,
        None => fem_ftable(cfg, &cell_mesh(cfg)?)?,
    };
    let d = match dtable {
        Some(p) => read_dtable(p)?,
        None => cusp_table(cfg)?,
    };
    let asym = dense_ftable(cfg, &d)?;
    if asym.failures() > 0 {
        log::warn!("{} dense-asymptotic nodes failed and are skipped", asym.failures());
    }
    Ok((
        ConjugateRate::new(&fem.symmetric_completion()),
        ConjugateRate::new(&asym.symmetric_completion()),
    ))
}

pub fn compare(
    cfg: &RunConfig,
    out: &Output,
    direction: [f64; 2],
    radii: &[f64],
    ftable: Option<&Path>,
    dtable: Option<&Path>,
) -> Result<PathBuf, CliError> {
    let eps = cfg.epsilon_value()?;
    let (fem, asym) = dense_rates(cfg, ftable, dtable)?;
    let kappa = keller_kappa_eps(eps);
    let c = compare_models(&fem, &asym, &cfg.network()?, kappa, direction, radii)?;
    let mut extra = Provenance::new();
    extra.insert("summary".into(), c.summary());
    println!("{}", serde_json::to_string_pretty(&c.summary()).map_err(latticeld::Error::from)?);
    out.csv("compare.csv", extra, |w| c.write_csv(w))
}
