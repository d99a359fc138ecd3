//! Acceptance suite. Runs each criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed. Pass criterion numbers as
//! arguments to run a subset.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use latticeld::dense::{
    dense_sweep, log_grid, network_f, network_g, solve_canonical, tabulate_d, transcendental_solve,
    DTable, NetworkParams, SmallRateLaw,
};
use latticeld::dispersion::{fkpp_front_speed, level_set_speed, ConjugateRate};
use latticeld::eigen::{
    effective_diffusivity_fem, graded_radii, polar_grid, solve_at, sweep_f, EigenOptions, Operators,
    TiltVector,
};
use latticeld::geometry::{build_cell_mesh, AstroidSpec, CellSpec, Mesh, MeshOptions, ASTROID_AREA};
use latticeld::transforms::{
    dilute_g, keller_kappa_eps, legendre_transform, quadratic_f, quadratic_g, FTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn norm(x: [f64; 2]) -> f64 {
    x[0].hypot(x[1])
}

fn along(dir: [f64; 2], r: f64) -> [f64; 2] {
    let n = norm(dir);
    [r * dir[0] / n, r * dir[1] / n]
}

fn gap_mesh(eps: f64) -> Mesh {
    build_cell_mesh(&CellSpec::from_gap(eps).unwrap(), &MeshOptions::with_h(0.1)).unwrap()
}

/// Shared FEM data for the dense-limit cells.
struct DenseCell {
    mesh: Mesh,
    /// `f` on a polar octant of `|p| ≤ 4.5`, completed by symmetry.
    f: FTable,
}

const DENSE_P_MAX: f64 = 4.5;

fn dense_grid() -> Vec<TiltVector> {
    polar_grid(9, &graded_radii(40, DENSE_P_MAX), true)
}

fn dense_cell(eps: f64) -> &'static DenseCell {
    static CELLS: [OnceLock<DenseCell>; 2] = [OnceLock::new(), OnceLock::new()];
    let slot = if eps == 0.01 { 0 } else { 1 };
    CELLS[slot].get_or_init(|| {
        let mesh = gap_mesh(eps);
        let f = sweep_f(&mesh, &dense_grid(), true, &EigenOptions::default()).unwrap();
        assert_eq!(f.failures(), 0, "FEM sweep at ε = {eps}");
        DenseCell {
            mesh,
            f: f.symmetric_completion(),
        }
    })
}

fn cusp_table() -> &'static DTable {
    static TABLE: OnceLock<DTable> = OnceLock::new();
    TABLE.get_or_init(|| tabulate_d(&log_grid(1e-6, 30.0, 71), &AstroidSpec::new(0.01, 0.05).unwrap()).unwrap())
}

/// 1. `0 ≤ f ≤ |p|²(1 + 10h²)` on a 12 × 6 polar grid for three radii.
fn bounds() -> Outcome {
    let grid: Vec<TiltVector> = polar_grid(12, &graded_radii(6, 2.0), false).into_iter().skip(1).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut details = Vec::new();
    for a in [0.01, PI / 2.0, PI - 0.01] {
        let spec = CellSpec::new(a).unwrap();
        let mesh = build_cell_mesh(&spec, &MeshOptions::with_h(0.1)).unwrap();
        let t = sweep_f(&mesh, &grid, true, &EigenOptions::default()).unwrap();
        let slack = 10.0 * mesh.h * mesh.h;
        let mut bad = t.failures();
        for n in &t.nodes {
            let upper = n.tilt.norm_sq() * (1.0 + slack);
            if !(n.f >= 0.0 && n.f <= upper) {
                bad += 1;
            }
            worst = worst.max(n.f / n.tilt.norm_sq());
        }
        details.push(format!("a={a:.4}: {} nodes, {bad} violations, {} dofs", t.nodes.len(), mesh.num_vertices()));
        if bad > 0 {
            return Err(details.join("; "));
        }
    }
    Ok(format!("{}; max f/|p|² = {worst:.6}", details.join("; ")))
}

/// 2. Dilute cell: `f ≈ (1 − σ)|p|²` within 1% and `g` within 2% of the
/// Maxwell quadratic.
fn dilute() -> Outcome {
    let spec = CellSpec::new(0.01).unwrap();
    let sigma = spec.area_fraction();
    let mesh = build_cell_mesh(&spec, &MeshOptions::with_h(0.1)).unwrap();
    let grid = polar_grid(9, &graded_radii(16, 2.0), true);
    let f = sweep_f(&mesh, &grid, true, &EigenOptions::default()).unwrap();
    let mut worst_f = 0.0f64;
    for n in &f.nodes[1..] {
        worst_f = worst_f.max(rel(n.f, (1.0 - sigma) * n.tilt.norm_sq()));
    }
    let xi: Vec<[f64; 2]> = polar_grid(24, &graded_radii(10, 2.0), false)[1..].iter().map(|t| t.as_array()).collect();
    let g = legendre_transform(&f.symmetric_completion(), &xi);
    let mut worst_g = 0.0f64;
    for n in &g.nodes {
        if n.extrapolated {
            return Err(format!("ξ = {:?} outside the sampled hull", n.xi));
        }
        worst_g = worst_g.max(rel(n.g, dilute_g(sigma, n.xi)));
    }
    check(
        worst_f <= 1e-2 && worst_g <= 2e-2,
        format!("max |f/((1−σ)|p|²) − 1| = {worst_f:.2e} (≤ 1e-2), max g deviation = {worst_g:.2e} (≤ 2e-2)"),
    )
}

/// 3. FEM effective diffusivity within 5% of the closed form.
fn keller() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (eps, target) in [(0.01, 0.11834), (0.001, 0.037425)] {
        assert!(rel(keller_kappa_eps(eps), target) < 1e-4);
        let kappa = effective_diffusivity_fem(&dense_cell(eps).mesh, 0.02, &EigenOptions::default()).unwrap();
        let d = rel(kappa, target);
        ok &= d <= 0.05;
        parts.push(format!("ε={eps}: κ={kappa:.6} vs {target} ({:.2}%)", 100.0 * d));
    }
    check(ok, parts.join("; "))
}

fn ray_xi() -> Vec<[f64; 2]> {
    let radii = log_grid(0.1, 5.0, 21);
    [[1.0, 0.0], [1.0, 1.0]]
        .iter()
        .flat_map(|&dir| radii.iter().map(move |&r| along(dir, r)))
        .collect()
}

/// 4. FEM and dense-asymptotic `g` along the axis and diagonal.
fn dense_agreement() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (eps, tol) in [(0.001, 0.02), (0.01, 0.08)] {
        let params = NetworkParams::new(eps).unwrap();
        let asym = dense_sweep(&dense_grid(), &params, cusp_table());
        if asym.failures() > 0 {
            return Err(format!("ε={eps}: {} dense roots failed", asym.failures()));
        }
        let xi = ray_xi();
        let g_fem = legendre_transform(&dense_cell(eps).f, &xi);
        let g_asym = legendre_transform(&asym.symmetric_completion(), &xi);
        let mut worst = 0.0f64;
        for (a, b) in g_fem.nodes.iter().zip(&g_asym.nodes) {
            if a.extrapolated || b.extrapolated {
                return Err(format!("ε={eps}: ξ = {:?} outside the sampled hull", a.xi));
            }
            worst = worst.max(((a.g - b.g) / a.g).abs());
        }
        ok &= worst <= tol;
        parts.push(format!("ε={eps}: max deviation {:.2}% (≤ {}%)", 100.0 * worst, 100.0 * tol));
    }
    check(ok, parts.join("; "))
}

/// 5. The small-rate law turns the transcendental equation into the
/// network eigenvalue.
fn network_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let eps = 10f64.powf(rng.random_range(-4.0..-0.5));
        let t = TiltVector::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let params = NetworkParams::new(eps).unwrap();
        let r = transcendental_solve(t, &params, &SmallRateLaw).map_err(|e| e.to_string())?;
        worst = worst.max(rel(r.f, network_f(t, &params)));
    }
    check(worst <= 1e-12, format!("100 samples, max relative difference {worst:.2e} (≤ 1e-12)"))
}

/// 6. Cusp constants at `f₀ = 10⁻³` follow the small-rate law.
fn cusp_asymptote() -> Outcome {
    let f0 = 1e-3;
    let d = solve_canonical(f0, &AstroidSpec::new(0.01, 0.05).unwrap()).unwrap().d;
    let scaled: Vec<f64> = d[..3].iter().map(|v| v * PI * ASTROID_AREA * f0).collect();
    let sym = rel(d[3], d[1]);
    check(
        scaled.iter().all(|s| (0.95..=1.05).contains(s)) && sym <= 1e-6,
        format!("Dᵢ·π𝒜f₀ = {scaled:.4?}; |D₄/D₂ − 1| = {sym:.1e}"),
    )
}

/// 7. Numerical transform against closed-form conjugate pairs, and the
/// Young–Fenchel inequality on every sampled pair.
fn conjugacy() -> Outcome {
    let octant = polar_grid(17, &graded_radii(40, 4.0), true);
    let disc: Vec<[f64; 2]> = polar_grid(24, &graded_radii(10, 2.0), false)[1..].iter().map(|t| t.as_array()).collect();

    let kappa = 0.55;
    let fq = FTable::from_fn(&octant, |p| quadratic_f(kappa, p.as_array())).symmetric_completion();
    let gq = legendre_transform(&fq, &disc);
    let quad = gq.nodes.iter().map(|n| rel(n.g, quadratic_g(kappa, n.xi))).fold(0.0, f64::max);

    let params = NetworkParams::new(0.01).unwrap();
    let octant = polar_grid(17, &graded_radii(80, 1.0), true);
    let fn_ = FTable::from_fn(&octant, |p| network_f(p, &params)).symmetric_completion();
    let gn = legendre_transform(&fn_, &disc);
    let net = gn.nodes.iter().map(|n| rel(n.g, network_g(n.xi, &params))).fold(0.0, f64::max);
    let extrapolated = gq.nodes.iter().chain(&gn.nodes).filter(|n| n.extrapolated).count();

    let fem = &dense_cell(0.01).f;
    let gf = legendre_transform(fem, &ray_xi());
    let mut pairs = 0usize;
    let mut worst = f64::INFINITY;
    for (f, g) in [(&fq, &gq), (&fn_, &gn), (fem, &gf)] {
        for gn in &g.nodes {
            for fnode in &f.nodes {
                pairs += 1;
                worst = worst.min(gn.g + fnode.f - fnode.tilt.dot(gn.xi));
            }
        }
    }
    check(
        quad <= 1e-4 && net <= 1e-3 && worst >= -1e-6 && extrapolated == 0,
        format!(
            "quadratic {quad:.1e} (≤ 1e-4), network {net:.1e} (≤ 1e-3), min f + g − p·ξ = {worst:.1e} over {pairs} pairs"
        ),
    )
}

/// 8. Ordering of the models on the diagonal at ε = 0.01.
fn ordering() -> Outcome {
    let eps = 0.01;
    let params = NetworkParams::new(eps).unwrap();
    let kappa = keller_kappa_eps(eps);
    let xi: Vec<[f64; 2]> = [1.0, 2.0, 4.0].iter().map(|&r| along([1.0, 1.0], r)).collect();
    let g = legendre_transform(&dense_cell(eps).f, &xi);
    let mut ok = true;
    let mut parts = Vec::new();
    for n in &g.nodes {
        let (q, w, f) = (quadratic_g(kappa, n.xi), network_g(n.xi, &params), n.g);
        let free = norm(n.xi).powi(2) / 4.0;
        ok &= !n.extrapolated && q <= w && w <= f && f >= free;
        parts.push(format!("|ξ|={:.0}: quadratic {q:.3}, network {w:.3}, FEM {f:.3}, |ξ|²/4 {free:.3}", norm(n.xi)));
    }
    check(ok, parts.join("; "))
}

/// Rate function evaluated by conjugating the FEM table at the exact query
/// point.
/// 9. Front speeds from the infimum formula (direct FEM solves) and from
/// the level set of the transformed FEM table.
fn front_speed() -> Outcome {
    let eps = 0.01;
    let cell = dense_cell(eps);
    let ops = Arc::new(Operators::new(&cell.mesh).unwrap());
    let opts = EigenOptions {
        tol: 1e-11,
        ..EigenOptions::default()
    };
    let f = |t: TiltVector| solve_at(&ops, t, None, &opts).map(|r| r.f);
    // finer table than the shared sweep: the level set reads g off it
    let fine = sweep_f(&cell.mesh, &polar_grid(13, &graded_radii(24, 2.5), true), true, &EigenOptions::default())
        .map_err(|e| e.to_string())?;
    let rate = ConjugateRate::new(&fine.symmetric_completion());
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for alpha_r in [0.1, 1.0] {
        for dir in [[1.0, 0.0], [1.0, 1.0]] {
            let s = fkpp_front_speed(&f, alpha_r, dir, 2.5, None).map_err(|e| e.to_string())?;
            let dual = level_set_speed(&rate, alpha_r, dir, 1.5 * s.speed).map_err(|e| e.to_string())?;
            let d = rel(dual, s.speed);
            worst = worst.max(d);
            parts.push(format!("α_r={alpha_r} {dir:?}: {:.5}/{dual:.5}", s.speed));
        }
    }
    let kappa = 0.3;
    let quad = |t: TiltVector| Ok(quadratic_f(kappa, t.as_array()));
    let mut worst_q = 0.0f64;
    for alpha_r in [0.1, 1.0] {
        let s = fkpp_front_speed(&quad, alpha_r, [1.0, 0.0], 100.0, None).map_err(|e| e.to_string())?;
        worst_q = worst_q.max(rel(s.speed, 2.0 * (kappa * alpha_r).sqrt()));
    }
    check(
        worst <= 1e-3 && worst_q <= 1e-6,
        format!("{}; max duality gap {worst:.1e} (≤ 1e-3); quadratic limit {worst_q:.1e} (≤ 1e-6)", parts.join(", ")),
    )
}

/// 10. Observed order of the eigenvalue under mesh halving.
fn convergence() -> Outcome {
    let spec = CellSpec::new(PI / 2.0).unwrap();
    let t = TiltVector::new(1.0, 1.0);
    let opts = EigenOptions {
        tol: 1e-12,
        ..EigenOptions::default()
    };
    let f: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| {
            let mesh = build_cell_mesh(&spec, &MeshOptions::with_h(h)).unwrap();
            solve_at(&Arc::new(Operators::new(&mesh).unwrap()), t, None, &opts).unwrap().f
        })
        .collect();
    let order = ((f[0] - f[1]) / (f[1] - f[2])).abs().log2();
    check(order >= 1.7, format!("f = {f:.8?}, observed order {order:.3} (≥ 1.7)"))
}

fn main() {
    faer::set_global_parallelism(faer::Par::Seq);
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("bounds", bounds),
        ("dilute reproduction", dilute),
        ("Keller reproduction", keller),
        ("dense-asymptotic agreement", dense_agreement),
        ("network recovery", network_recovery),
        ("cusp-constant asymptote", cusp_asymptote),
        ("conjugacy", conjugacy),
        ("ordering", ordering),
        ("front-speed duality", front_speed),
        ("convergence", convergence),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {id:>2} PASS  {name} [{secs:.1}s]: {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} [{secs:.1}s]: {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criterion(s) failed");
        std::process::exit(1);
    }
}
