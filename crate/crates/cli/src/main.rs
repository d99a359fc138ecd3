mod commands;
mod config;
mod error;
mod output;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::SpeedModel;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Output;
use crate::reproduce::Figure;

/// Large-deviation rate functions for diffusion through a square lattice
/// of circular obstacles.
#[derive(Parser)]
#[command(name = "latticeld", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration; flags below override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: $LATTICELD_OUT, else ./out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Obstacle radius a.
    #[arg(long = "a", global = true, conflicts_with = "eps")]
    obstacle_radius: Option<f64>,
    /// Gap half-width ε = π − a.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Target element size of the cell mesh.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Largest tilt |p| sampled.
    #[arg(long, global = true)]
    p_max: Option<f64>,
    /// Largest |ξ| of the default rate grid.
    #[arg(long, global = true)]
    xi_max: Option<f64>,
    /// Eigensolver residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the cell mesh and print quality statistics as JSON.
    MeshReport {
        /// Also write the mesh in the plain-text exchange format.
        #[arg(long)]
        mesh_out: Option<PathBuf>,
        /// Mesh the trimmed astroid instead of the obstacle cell.
        #[arg(long)]
        astroid: bool,
    },
    /// Principal eigenvalue f(p) over the configured tilt grid.
    FSweep {
        #[arg(long)]
        mesh_in: Option<PathBuf>,
        #[arg(long)]
        mesh_out: Option<PathBuf>,
    },
    /// Legendre transform of an f table into g(ξ).
    RateFunction {
        #[arg(long)]
        ftable: PathBuf,
        /// `polar:ANGLES:RADII:MAX` or `cartesian:N:LO:HI`.
        #[arg(long)]
        xi_grid: Option<String>,
    },
    /// Tabulate the cusp constants of the touching-obstacle problem.
    CanonicalTabulate,
    /// Dense-limit f(p) from the cusp constants.
    DenseSolve {
        /// Cusp table from `canonical-tabulate`; tabulated afresh if absent.
        #[arg(long)]
        dtable: Option<PathBuf>,
    },
    /// FKPP front speed along one direction.
    FrontSpeed {
        #[arg(long)]
        alpha_r: f64,
        /// Direction as `X,Y`.
        #[arg(long, default_value = "1,0")]
        direction: String,
        #[arg(long, value_enum, default_value = "fem")]
        model: SpeedModel,
        /// Diffusivity of the quadratic model [default: FEM estimate].
        #[arg(long)]
        kappa: Option<f64>,
        /// f table whose transform supplies the level-set cross-check.
        #[arg(long)]
        ftable: Option<PathBuf>,
    },
    /// FEM, dense-asymptotic, network and quadratic g along one ray.
    Compare {
        #[arg(long, default_value = "1,1")]
        direction: String,
        /// Radii `LO:HI:N` [default: 0.1 to xi_max, 30 points].
        #[arg(long)]
        radii: Option<String>,
        #[arg(long)]
        ftable: Option<PathBuf>,
        #[arg(long)]
        dtable: Option<PathBuf>,
    },
    /// Regenerate the data of one published figure.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::MeshReport { .. } => "mesh-report",
            Self::FSweep { .. } => "f-sweep",
            Self::RateFunction { .. } => "rate-function",
            Self::CanonicalTabulate => "canonical-tabulate",
            Self::DenseSolve { .. } => "dense-solve",
            Self::FrontSpeed { .. } => "front-speed",
            Self::Compare { .. } => "compare",
            Self::Reproduce { .. } => "reproduce",
        }
    }
}

fn effective_config(g: &Global) -> Result<RunConfig, CliError> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(a) = g.obstacle_radius {
        cfg.obstacle_radius = Some(a);
        cfg.epsilon = None;
    }
    if let Some(e) = g.eps {
        cfg.epsilon = Some(e);
        cfg.obstacle_radius = None;
    }
    if let Some(h) = g.h {
        cfg.mesh_h = h;
    }
    if let Some(p) = g.p_max {
        cfg.p_max = p;
    }
    if let Some(x) = g.xi_max {
        cfg.xi_max = x;
    }
    if let Some(t) = g.tol {
        cfg.tol = t;
    }
    if let Some(n) = g.threads {
        cfg.threads = n;
    }
    if let Some(o) = &g.out {
        cfg.output_dir = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = effective_config(&cli.global)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let out = Output::new(cfg.output_root(), cli.command.name(), &cfg)?;
    match cli.command {
        Command::MeshReport { mesh_out, astroid } => commands::mesh_report(&cfg, &out, mesh_out.as_deref(), astroid),
        Command::FSweep { mesh_in, mesh_out } => {
            commands::f_sweep(&cfg, &out, mesh_in.as_deref(), mesh_out.as_deref()).map(drop)
        }
        Command::RateFunction { ftable, xi_grid } => {
            commands::rate_function(&cfg, &out, &ftable, xi_grid.as_deref()).map(drop)
        }
        Command::CanonicalTabulate => commands::canonical_tabulate(&cfg, &out).map(drop),
        Command::DenseSolve { dtable } => commands::dense_solve(&cfg, &out, dtable.as_deref()).map(drop),
        Command::FrontSpeed {
            alpha_r,
            direction,
            model,
            kappa,
            ftable,
        } => {
            let dir = commands::parse_direction(&direction)?;
            commands::front_speed(&cfg, &out, alpha_r, dir, model, kappa, ftable.as_deref())
        }
        Command::Compare {
            direction,
            radii,
            ftable,
            dtable,
        } => {
            let dir = commands::parse_direction(&direction)?;
            let radii = match radii {
                Some(s) => commands::parse_radii(&s)?,
                None => commands::parse_radii(&format!("0.1:{}:30", cfg.xi_max))?,
            };
            commands::compare(&cfg, &out, dir, &radii, ftable.as_deref(), dtable.as_deref()).map(drop)
        }
        Command::Reproduce { figure } => reproduce::run(figure, &cfg, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("latticeld: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
