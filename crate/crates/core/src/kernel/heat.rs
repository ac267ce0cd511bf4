//! Heat kernel of H₁ (with `[X, Y] = U`, `L = −X² − Y²`) from its classical
//! one-dimensional integral representation
//! `p_T(z,u) = (2π)^{−2} ∫ e^{iηu} η/(2 sinh ηT) · exp(−η|z|² coth(ηT)/4) dη`.

use crate::quadrature::{adaptive_gk, laguerre};

// Integrand times e^{ηT}, so the Laguerre rule can absorb the decay.
fn integrand_scaled(t: f64, r2: f64, u: f64, eta: f64) -> f64 {
    let x = eta * t;
    // e^{x}·η/(2 sinh x) = η/(1 − e^{−2x}) and η coth x, continued to η = 0
    let (a, c) = if x < 1e-6 {
        ((1.0 + x) / (2.0 * t), (1.0 + x * x / 3.0) / t)
    } else {
        (eta / (-(-2.0 * x).exp_m1()), eta / x.tanh())
    };
    (eta * u).cos() * a * (-r2 * c / 4.0).exp()
}

fn integrand(t: f64, r2: f64, u: f64, eta: f64) -> f64 {
    integrand_scaled(t, r2, u, eta) * (-eta * t).exp()
}

/// `p_T(z, u)` by adaptive Gauss–Kronrod over η ∈ [0, 60/T] (the integrand
/// is below `e^{−55}` beyond).
pub fn heat_kernel_h1_oracle(t: f64, z: [f64; 2], u: f64) -> f64 {
    assert!(t > 0.0, "T must be positive");
    let r2 = z[0] * z[0] + z[1] * z[1];
    let v = adaptive_gk(|eta| integrand(t, r2, u, eta), 0.0, 60.0 / t, 1e-16, 1e-13);
    2.0 * v / (4.0 * std::f64::consts::PI * std::f64::consts::PI)
}

/// Same integral by Gauss–Laguerre after pulling out `e^{−ηT}`, the second
/// independent routine for the dual-quadrature check.
pub fn heat_kernel_h1_laguerre(t: f64, z: [f64; 2], u: f64, nodes: usize) -> f64 {
    let r2 = z[0] * z[0] + z[1] * z[1];
    let rule = laguerre(nodes, 0.0);
    // ∫_0^∞ f(η) dη = (1/T) ∫_0^∞ e^{−x} [e^{x} f(x/T)] dx
    let v = rule.integrate_weighted(|x| integrand_scaled(t, r2, u, x / t)) / t;
    2.0 * v / (4.0 * std::f64::consts::PI * std::f64::consts::PI)
}

/// `(4πT)^{−1} e^{−|z|²/(4T)}`: the u-marginal of `p_T`.
pub fn euclidean_heat_2d(t: f64, z: [f64; 2]) -> f64 {
    let r2 = z[0] * z[0] + z[1] * z[1];
    (-r2 / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t)
}
