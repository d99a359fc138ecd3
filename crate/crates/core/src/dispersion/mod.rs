//! Coarse-grained consequences of a rate function: concentration profiles
//! along rays, FKPP front speeds, and side-by-side comparison of models.

use std::io::Write;

use serde::Serialize;

use crate::dense::{network_g, NetworkParams};
use crate::eigen::TiltVector;
use crate::error::{Error, Result};
use crate::interp::Scattered;
use crate::roots::{golden_section, illinois};
use crate::transforms::{conjugate, quadratic_g, FTable, RateTable};

/// A rate function `g(ξ)` that may be defined only on part of the plane.
pub trait RateFunction: Sync {
    fn g(&self, xi: [f64; 2]) -> Result<f64>;
}

/// Gaussian rate `|ξ|²/(4κ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticRate(pub f64);

impl RateFunction for QuadraticRate {
    fn g(&self, xi: [f64; 2]) -> Result<f64> {
        Ok(quadratic_g(self.0, xi))
    }
}

/// Closed-form network rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkRate(pub NetworkParams);

impl RateFunction for NetworkRate {
    fn g(&self, xi: [f64; 2]) -> Result<f64> {
        Ok(network_g(xi, &self.0))
    }
}

/// Interpolated [`RateTable`]. Queries are first mapped into the sector
/// `0 ≤ η ≤ ξ` by the lattice symmetries, so a table covering only that
/// sector serves the whole plane.
pub struct TabulatedRate {
    interp: Scattered,
}

impl TabulatedRate {
    pub fn new(table: &RateTable) -> Result<Self> {
        Ok(Self {
            interp: table.interpolator()?,
        })
    }
}

impl RateFunction for TabulatedRate {
    fn g(&self, xi: [f64; 2]) -> Result<f64> {
        let (a, b) = (xi[0].abs(), xi[1].abs());
        let folded = [a.max(b), a.min(b)];
        self.interp.eval(folded).or_else(|_| self.interp.eval(xi))
    }
}

/// Rate function evaluated by conjugating an [`FTable`] at each query
/// point. Slower than [`TabulatedRate`] but free of interpolation error in
/// `ξ`; queries whose maximiser sits on the sampled hull are errors.
pub struct ConjugateRate {
    points: Vec<[f64; 2]>,
    values: Vec<f64>,
}

impl ConjugateRate {
    pub fn new(table: &FTable) -> Self {
        let (points, values) = table.samples();
        Self { points, values }
    }
}

impl RateFunction for ConjugateRate {
    fn g(&self, xi: [f64; 2]) -> Result<f64> {
        let c = conjugate(&self.points, &self.values, &[xi])[0];
        if c.extrapolated {
            return Err(Error::Coverage(format!("ξ = {xi:?} needs tilts beyond the sampled hull")));
        }
        Ok(c.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileModel {
    LargeDeviation,
    Gaussian,
    Network,
}

impl ProfileModel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::LargeDeviation => "large-deviation",
            Self::Gaussian => "gaussian",
            Self::Network => "network",
        }
    }
}

/// Concentration along one ray from the release point, normalised by its
/// maximum over the sampled radii at each time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationProfile {
    pub direction: [f64; 2],
    pub source: [f64; 2],
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    /// `theta_norm[i][j]` at `times[i]`, `radii[j]`.
    pub theta_norm: Vec<Vec<f64>>,
    pub model: ProfileModel,
}

fn unit(direction: [f64; 2]) -> Result<[f64; 2]> {
    let n = direction[0].hypot(direction[1]);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidParameter(format!("direction {direction:?} has no length")));
    }
    Ok([direction[0] / n, direction[1] / n])
}

/// `θ ∝ t⁻¹ exp(−t g(r e/t))` on a grid of times and radii. The `t⁻¹`
/// factor cancels in the per-time normalisation.
pub fn concentration_profile(
    rate: &dyn RateFunction,
    model: ProfileModel,
    direction: [f64; 2],
    times: &[f64],
    radii: &[f64],
) -> Result<ConcentrationProfile> {
    let e = unit(direction)?;
    if radii.is_empty() {
        return Err(Error::InvalidParameter("profile needs at least one radius".into()));
    }
    if let Some(t) = times.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::InvalidParameter(format!("times must be positive, got {t}")));
    }
    let mut theta_norm = Vec::with_capacity(times.len());
    for &t in times {
        let exponents = radii
            .iter()
            .map(|&r| Ok(-t * rate.g([r * e[0] / t, r * e[1] / t])?))
            .collect::<Result<Vec<f64>>>()?;
        let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        theta_norm.push(exponents.iter().map(|x| (x - top).exp()).collect());
    }
    Ok(ConcentrationProfile {
        direction: e,
        source: [0.0, 0.0],
        times: times.to_vec(),
        radii: radii.to_vec(),
        theta_norm,
        model,
    })
}

#[derive(Serialize)]
struct ProfileRow<'a> {
    t: f64,
    radius: f64,
    theta_norm: f64,
    model: &'a str,
}

/// CSV with columns `t, radius, theta_norm, model`.
pub fn write_profiles_csv<W: Write>(profiles: &[ConcentrationProfile], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for p in profiles {
        for (t, row) in p.times.iter().zip(&p.theta_norm) {
            for (r, v) in p.radii.iter().zip(row) {
                out.serialize(ProfileRow {
                    t: *t,
                    radius: *r,
                    theta_norm: *v,
                    model: p.model.as_str(),
                })
                .map_err(|e| Error::Parse(e.to_string()))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontSpeed {
    pub direction: [f64; 2],
    pub alpha_r: f64,
    pub speed: f64,
    /// Minimising `|p|` along the direction.
    pub p_star: f64,
    /// Speed from `g(c e) = α_r`, when a rate function was supplied.
    pub dual_speed: Option<f64>,
}

const SPEED_XTOL: f64 = 1e-10;

/// Front speed `inf_{0<p≤p_max} (f(p e) + α_r)/p` by golden-section
/// search, optionally cross-checked against the level set `g(c e) = α_r`.
pub fn fkpp_front_speed(
    f: &dyn Fn(TiltVector) -> Result<f64>,
    alpha_r: f64,
    direction: [f64; 2],
    p_max: f64,
    rate: Option<&dyn RateFunction>,
) -> Result<FrontSpeed> {
    if !(alpha_r > 0.0 && alpha_r.is_finite()) {
        return Err(Error::InvalidParameter(format!("reaction rate must be positive, got {alpha_r}")));
    }
    if !(p_max > 0.0 && p_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("p_max must be positive, got {p_max}")));
    }
    let e = unit(direction)?;
    let objective = |p: f64| match f(TiltVector::new(p * e[0], p * e[1])) {
        Ok(v) if v.is_finite() => (v + alpha_r) / p,
        _ => f64::INFINITY,
    };
    let lo = p_max * 1e-9;
    let (p_star, speed) = golden_section(objective, lo, p_max, SPEED_XTOL);
    if p_max - p_star <= 1e-6 * p_max {
        return Err(Error::Range(format!(
            "front-speed minimiser reaches the sampled limit |p| = {p_max}"
        )));
    }
    if !speed.is_finite() {
        return Err(Error::Coverage("f unavailable along the requested direction".into()));
    }
    let dual_speed = rate.map(|g| level_set_speed(g, alpha_r, e, 4.0 * speed)).transpose()?;
    Ok(FrontSpeed {
        direction: e,
        alpha_r,
        speed,
        p_star,
        dual_speed,
    })
}

/// Solves `g(c e) = α_r` for `c` in `(0, c_max]`, widening `c_max` if needed.
pub fn level_set_speed(rate: &dyn RateFunction, alpha_r: f64, direction: [f64; 2], c_max: f64) -> Result<f64> {
    let e = unit(direction)?;
    let h = |c: f64| rate.g([c * e[0], c * e[1]]);
    let mut hi = c_max;
    while h(hi)? < alpha_r {
        hi *= 2.0;
        if hi > 1e6 * c_max {
            return Err(Error::NoBracket(format!("g stays below {alpha_r} along {e:?}")));
        }
    }
    let residual = |c: f64| h(c).map_or(f64::NAN, |v| v - alpha_r);
    illinois(residual, 0.0, hi, 1e-14, 300)
}

/// `g` of each model along one ray.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub radius: f64,
    pub g_fem: f64,
    pub g_asymptotic: f64,
    pub g_network: f64,
    pub g_quadratic: f64,
}

impl ComparisonRow {
    fn deviations(&self) -> [f64; 3] {
        let rel = |v: f64| (v - self.g_fem).abs() / self.g_fem;
        [rel(self.g_asymptotic), rel(self.g_network), rel(self.g_quadratic)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub epsilon: f64,
    pub direction: [f64; 2],
    pub kappa: f64,
    pub rows: Vec<ComparisonRow>,
}

#[derive(Serialize)]
struct ComparisonCsvRow {
    radius: f64,
    g_fem: f64,
    g_asymptotic: f64,
    g_network: f64,
    g_quadratic: f64,
    rel_asymptotic: f64,
    rel_network: f64,
    rel_quadratic: f64,
}

impl Comparison {
    /// Largest relative deviation from the FEM value of each model over
    /// rows with `g_fem > 0`, as `[asymptotic, network, quadratic]`.
    pub fn max_deviations(&self) -> [f64; 3] {
        let mut out = [0.0f64; 3];
        for r in self.rows.iter().filter(|r| r.g_fem > 0.0) {
            for (o, d) in out.iter_mut().zip(r.deviations()) {
                *o = o.max(d);
            }
        }
        out
    }

    pub fn summary(&self) -> serde_json::Value {
        let [a, n, q] = self.max_deviations();
        serde_json::json!({
            "epsilon": self.epsilon,
            "direction": self.direction,
            "kappa": self.kappa,
            "radius_range": [self.rows.first().map(|r| r.radius), self.rows.last().map(|r| r.radius)],
            "max_rel_asymptotic": a,
            "max_rel_network": n,
            "max_rel_quadratic": q,
        })
    }

    /// CSV with the model values and their relative deviations from FEM.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            let [ra, rn, rq] = r.deviations();
            out.serialize(ComparisonCsvRow {
                radius: r.radius,
                g_fem: r.g_fem,
                g_asymptotic: r.g_asymptotic,
                g_network: r.g_network,
                g_quadratic: r.g_quadratic,
                rel_asymptotic: ra,
                rel_network: rn,
                rel_quadratic: rq,
            })
            .map_err(|e| Error::Parse(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Evaluates the FEM, dense-asymptotic, network and quadratic rate functions
/// along a ray. The quadratic model uses `kappa`.
pub fn compare_models(
    fem: &dyn RateFunction,
    asymptotic: &dyn RateFunction,
    params: &NetworkParams,
    kappa: f64,
    direction: [f64; 2],
    radii: &[f64],
) -> Result<Comparison> {
    let e = unit(direction)?;
    let rows = radii
        .iter()
        .map(|&r| {
            let xi = [r * e[0], r * e[1]];
            Ok(ComparisonRow {
                radius: r,
                g_fem: fem.g(xi)?,
                g_asymptotic: asymptotic.g(xi)?,
                g_network: network_g(xi, params),
                g_quadratic: quadratic_g(kappa, xi),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        epsilon: params.epsilon,
        direction: e,
        kappa,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::network_f;

    #[test]
    fn gaussian_profile_matches_closed_form() {
        let kappa = 0.37;
        let radii: Vec<f64> = (0..30).map(|k| 0.2 * k as f64).collect();
        let times = [0.5, 2.0, 7.0];
        let p = concentration_profile(&QuadraticRate(kappa), ProfileModel::Gaussian, [1.0, 1.0], &times, &radii)
            .unwrap();
        for (t, row) in times.iter().zip(&p.theta_norm) {
            assert_eq!(row[0], 1.0);
            for (r, v) in radii.iter().zip(row) {
                let exact = (-r * r / (4.0 * kappa * t)).exp();
                assert!((v - exact).abs() <= 1e-13 * exact, "{v} vs {exact}");
            }
        }
    }

    #[test]
    fn kpp_speed_for_quadratic_f() {
        let (kappa, alpha_r) = (0.2, 0.7);
        let f = |t: TiltVector| Ok(kappa * t.norm_sq());
        let s = fkpp_front_speed(&f, alpha_r, [0.3, -0.4], 50.0, Some(&QuadraticRate(kappa))).unwrap();
        let exact = 2.0 * (kappa * alpha_r).sqrt();
        assert!((s.speed - exact).abs() < 1e-12 * exact);
        assert!((s.p_star - (alpha_r / kappa).sqrt()).abs() < 1e-6);
        assert!((s.dual_speed.unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn speed_minimiser_at_limit_is_an_error() {
        let f = |t: TiltVector| Ok(t.norm_sq());
        assert!(matches!(fkpp_front_speed(&f, 100.0, [1.0, 0.0], 1.0, None), Err(Error::Range(_))));
    }

    #[test]
    fn network_speeds_agree_in_both_forms() {
        let n = NetworkParams::new(0.01).unwrap();
        let f = |t: TiltVector| Ok(network_f(t, &n));
        for dir in [[1.0, 0.0], [1.0, 1.0]] {
            let s = fkpp_front_speed(&f, 0.1, dir, 10.0, Some(&NetworkRate(n))).unwrap();
            let d = s.dual_speed.unwrap();
            assert!(((s.speed - d) / d).abs() < 1e-8, "{} vs {d}", s.speed);
        }
    }

    #[test]
    fn profile_csv_columns() {
        let p = concentration_profile(&QuadraticRate(1.0), ProfileModel::Gaussian, [1.0, 0.0], &[1.0], &[0.0, 1.0])
            .unwrap();
        let mut buf = Vec::new();
        write_profiles_csv(&[p], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,radius,theta_norm,model\n1.0,0.0,1.0,gaussian\n"));
    }
}
