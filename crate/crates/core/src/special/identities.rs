//! Numerical check of the Laguerre/Hermite identities the kernel formula
//! relies on. Each check returns its worst observed error next to the
//! tolerance it is held to.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::*;
use crate::quadrature;

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub name: String,
    pub max_err: f64,
    pub tol: f64,
    pub cases: usize,
    pub pass: bool,
}

impl IdentityRow {
    fn new(name: &str, max_err: f64, tol: f64, cases: usize) -> Self {
        IdentityRow {
            name: name.to_string(),
            max_err,
            tol,
            cases,
            pass: max_err <= tol,
        }
    }
}

/// Pointwise `ℒ_n^{(k)} = ℒ_{n−1}^{(k+1)} + ℒ_n^{(k+1)}` for n ≤ n_max, k ≤ k_max
/// at `n_t` random t ∈ [0, 50]; error absolute, relative once |value| > 1.
pub fn check_raising(n_max: usize, k_max: u32, n_t: usize, seed: u64) -> IdentityRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for _ in 0..n_t {
        let t = rng.random_range(0.0..50.0);
        for k in 0..=k_max {
            let lo = laguerre_fn_all(n_max, k, t);
            let hi = laguerre_fn_all(n_max, k + 1, t);
            for n in 0..=n_max {
                let rhs = hi[n] + if n > 0 { hi[n - 1] } else { 0.0 };
                worst = worst.max((lo[n] - rhs).abs() / lo[n].abs().max(1.0));
                cases += 1;
            }
        }
    }
    IdentityRow::new("laguerre raising (pm)", worst, 1e-10, cases)
}

/// `d/dt ℒ_n^{(k)} = ℒ_{n−1}^{(k+1)} − ℒ_n^{(k+1)}` against a central
/// difference with step 1e-5; error relative to max(1, |ℒ|, |ℒ'|).
pub fn check_derivative(n_max: usize, k_max: u32, n_t: usize, seed: u64) -> IdentityRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut cases = 0;
    for _ in 0..n_t {
        let t = rng.random_range(h..50.0);
        for k in 0..=k_max {
            let plus = laguerre_fn_all(n_max, k, t + h);
            let minus = laguerre_fn_all(n_max, k, t - h);
            let mid = laguerre_fn_all(n_max, k, t);
            let hi = laguerre_fn_all(n_max, k + 1, t);
            for n in 0..=n_max {
                let fd = (plus[n] - minus[n]) / (2.0 * h);
                let exact = if n > 0 { hi[n - 1] } else { 0.0 } - hi[n];
                let scale = 1f64.max(mid[n].abs()).max(exact.abs());
                worst = worst.max((fd - exact).abs() / scale);
                cases += 1;
            }
        }
    }
    IdentityRow::new("laguerre derivative (d)", worst, 1e-6, cases)
}

/// Weighted orthogonality
/// `∫_0^∞ ℒ_n^{(k)} ℒ_m^{(k)} t^k dt = δ_{nm} (n+k)!/(2^{k+1} n!)`.
/// With s = 2t this is a Gauss–Laguerre integral against s^k e^{-s};
/// errors are relative to `sqrt(N_n N_m)`.
pub fn check_orthogonality(n_max: usize, k_max: u32) -> IdentityRow {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for k in 0..=k_max {
        let rule = quadrature::laguerre(300, k as f64);
        // ℒ_n(s/2) = (−1)^n e^{−s/2} L_n(s): collect the polynomial parts
        let tables: Vec<Vec<f64>> = rule
            .nodes
            .iter()
            .map(|&s| {
                let mut v: Vec<f64> = (0..=n_max).map(|n| laguerre_poly(n, k, s)).collect();
                for (n, x) in v.iter_mut().enumerate() {
                    if n % 2 == 1 {
                        *x = -*x;
                    }
                }
                v
            })
            .collect();
        let norm = |n: usize| binomial((n + k as usize) as u64, k as u64) * factorial(k) / 2f64.powi(k as i32 + 1);
        for n in 0..=n_max {
            for m in n..=n_max {
                let mut acc = 0.0;
                for (w, row) in rule.weights.iter().zip(&tables) {
                    acc += w * row[n] * row[m];
                }
                let v = acc / 2f64.powi(k as i32 + 1);
                let want = if n == m { norm(n) } else { 0.0 };
                worst = worst.max((v - want).abs() / (norm(n) * norm(m)).sqrt());
                cases += 1;
            }
        }
    }
    IdentityRow::new("laguerre orthogonality (o)", worst, 1e-8, cases)
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// The n = m = 0, k = 0 value of the orthogonality integral, 1/2.
pub fn check_orthogonality_base() -> IdentityRow {
    let rule = quadrature::laguerre(300, 0.0);
    let v = rule.integrate(|s| {
        let l = laguerre_fn(0, 0, s / 2.0);
        l * l
    }) / 2.0;
    IdentityRow::new("laguerre orthogonality n=m=k=0 equals 1/2", (v - 0.5).abs(), 1e-12, 1)
}

/// `|ℒ_n^{(0)}(t)| ≤ 1` for t ≥ 0.
pub fn check_uniform_bound(n_max: usize, n_t: usize, seed: u64) -> IdentityRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n_t {
        let t = rng.random_range(0.0..200.0);
        for v in laguerre_fn_all(n_max, 0, t) {
            worst = worst.max(v.abs() - 1.0);
        }
    }
    IdentityRow::new("uniform bound |L_n^(0)| <= 1", worst.max(0.0), 1e-12, n_t * (n_max + 1))
}

/// Hermite orthonormality under 200-node Gauss–Hermite.
pub fn check_hermite_orthonormality(l_max: usize) -> IdentityRow {
    let rule = quadrature::hermite(200);
    let tables: Vec<Vec<f64>> = rule.nodes.iter().map(|&t| hermite_fn_all(l_max, t)).collect();
    let mut worst = 0.0f64;
    for l in 0..=l_max {
        for m in l..=l_max {
            let v: f64 = rule
                .scaled_weights
                .iter()
                .zip(&tables)
                .map(|(w, row)| w * row[l] * row[m])
                .sum();
            worst = worst.max((v - if l == m { 1.0 } else { 0.0 }).abs());
        }
    }
    IdentityRow::new("hermite orthonormality", worst, 1e-10, (l_max + 1) * (l_max + 2) / 2)
}

/// Fourier–Wigner quadrature against the Laguerre closed form at random
/// (θ₁, θ₂) ∈ [−2, 2]², relative error.
pub fn check_fourier_wigner(omega_max: usize, n_points: usize, seed: u64) -> IdentityRow {
    let rule = quadrature::hermite(200);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n_points {
        let t1 = rng.random_range(-2.0..2.0);
        let t2 = rng.random_range(-2.0..2.0);
        for w in 0..=omega_max {
            let q = fourier_wigner_hermite_with(&rule, w, t1, t2);
            let c = fourier_wigner_closed(w, t1, t2);
            worst = worst.max((q - c).abs() / c.abs());
        }
    }
    IdentityRow::new("fourier-wigner closed form", worst, 1e-8, n_points * (omega_max + 1))
}

/// The full suite at the acceptance envelope.
pub fn run_suite(seed: u64) -> Vec<IdentityRow> {
    vec![
        check_raising(40, 8, 100, seed),
        check_derivative(40, 8, 100, seed.wrapping_add(1)),
        check_orthogonality(40, 8),
        check_orthogonality_base(),
        check_uniform_bound(60, 200, seed.wrapping_add(2)),
        check_hermite_orthonormality(15),
        check_fourier_wigner(10, 100, seed.wrapping_add(3)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        for row in [
            check_raising(10, 2, 5, 1),
            check_derivative(10, 2, 5, 1),
            check_orthogonality(8, 2),
            check_orthogonality_base(),
            check_uniform_bound(20, 20, 1),
            check_hermite_orthonormality(6),
            check_fourier_wigner(4, 5, 1),
        ] {
            assert!(row.pass, "{row:?}");
        }
    }
}
