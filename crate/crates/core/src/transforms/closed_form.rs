use std::f64::consts::PI;

use crate::error::{Error, Result};

fn norm_sq(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

/// Rate function of homogenised diffusion, `|ξ|²/(4κ)`.
pub fn quadratic_g(kappa_eff: f64, xi: [f64; 2]) -> f64 {
    norm_sq(xi) / (4.0 * kappa_eff)
}

/// Its conjugate, `κ|p|²`.
pub fn quadratic_f(kappa_eff: f64, p: [f64; 2]) -> f64 {
    kappa_eff * norm_sq(p)
}

/// Dilute-limit diffusivity `1 − σ`.
pub fn maxwell_kappa(sigma: f64) -> f64 {
    1.0 - sigma
}

/// Dense-limit diffusivity in terms of the area fraction,
/// `2(π/4 − σ)^{1/2} / (π^{3/2}(1 − π/4))`.
pub fn keller_kappa(sigma: f64) -> Result<f64> {
    if !(sigma < PI / 4.0) {
        return Err(Error::Domain(format!("area fraction {sigma} must be below π/4")));
    }
    Ok(2.0 * (PI / 4.0 - sigma).sqrt() / (PI.powf(1.5) * (1.0 - PI / 4.0)))
}

/// Dense-limit diffusivity in terms of the gap half-width, `α/(1 − π/4)`
/// with `α = √(2ε/π³)`.
pub fn keller_kappa_eps(epsilon: f64) -> f64 {
    (2.0 * epsilon / PI.powi(3)).sqrt() / (1.0 - PI / 4.0)
}

/// Dilute rate function `|ξ|²/(4(1 − σ))`.
pub fn dilute_g(sigma: f64, xi: [f64; 2]) -> f64 {
    if sigma > 0.05 {
        log::warn!("dilute approximation used at area fraction {sigma}");
    }
    quadratic_g(maxwell_kappa(sigma), xi)
}

/// Dilute eigenvalue `(1 − σ)|p|²`.
pub fn dilute_f(sigma: f64, p: [f64; 2]) -> f64 {
    quadratic_f(maxwell_kappa(sigma), p)
}
