//! Laguerre and Hermite functions, the Fourier–Wigner transform of Hermite
//! pairs, and Fourier transforms of sphere measures.

pub mod identities;

use std::f64::consts::PI;

use crate::quadrature::{self, GaussRule};

const RESCALE: f64 = 1e100;
const LN_RESCALE: f64 = 230.258_509_299_404_57; // ln 1e100

/// Laguerre polynomial `L_n^{(k)}(t)` by the three-term recurrence in n.
pub fn laguerre_poly(n: usize, k: u32, t: f64) -> f64 {
    let k = k as f64;
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..n {
        let j = j as f64;
        let next = ((2.0 * j + k + 1.0 - t) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `ℒ_n^{(k)}(t) = (-1)^n e^{-t} L_n^{(k)}(2t)`; zero for negative n.
pub fn laguerre_fn(n: i64, k: u32, t: f64) -> f64 {
    if n < 0 {
        return 0.0;
    }
    let mut out = 0.0;
    laguerre_fn_scan(n as usize, k, t, |j, v| {
        if j == n as usize {
            out = v;
        }
    });
    out
}

/// `ℒ_0^{(k)}(t), …, ℒ_{n_max}^{(k)}(t)`.
pub fn laguerre_fn_all(n_max: usize, k: u32, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    laguerre_fn_scan(n_max, k, t, |j, v| out[j] = v);
    out
}

// Runs the sign-flipped recurrence for (-1)^n L_n^{(k)}(2t) with a running
// log scale, and fuses e^{-t} only when a value is emitted.
fn laguerre_fn_scan(n_max: usize, k: u32, t: f64, mut emit: impl FnMut(usize, f64)) {
    let k = k as f64;
    let x = 2.0 * t;
    let mut log_scale = -t;
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    emit(0, cur * log_scale.exp());
    for j in 0..n_max {
        let jf = j as f64;
        let next = -((2.0 * jf + k + 1.0 - x) * cur + (jf + k) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += LN_RESCALE;
        } else if cur != 0.0 && cur.abs() < 1.0 / RESCALE && prev.abs() < 1.0 / RESCALE {
            cur *= RESCALE;
            prev *= RESCALE;
            log_scale -= LN_RESCALE;
        }
        emit(j + 1, scaled(cur, log_scale));
    }
}

fn scaled(v: f64, log_scale: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum() * (v.abs().ln() + log_scale).exp()
    }
}

/// Normalized Hermite function `h_ℓ(t)`.
pub fn hermite_fn(ell: usize, t: f64) -> f64 {
    let mut out = 0.0;
    hermite_fn_scan(ell, t, |j, v| {
        if j == ell {
            out = v;
        }
    });
    out
}

/// `h_0(t), …, h_{ℓ_max}(t)`.
pub fn hermite_fn_all(ell_max: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; ell_max + 1];
    hermite_fn_scan(ell_max, t, |j, v| out[j] = v);
    out
}

fn hermite_fn_scan(ell_max: usize, t: f64, mut emit: impl FnMut(usize, f64)) {
    let mut log_scale = -0.5 * t * t - 0.25 * PI.ln();
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    emit(0, scaled(cur, log_scale));
    for l in 0..ell_max {
        let lf = l as f64;
        let next = t * (2.0 / (lf + 1.0)).sqrt() * cur - (lf / (lf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += LN_RESCALE;
        }
        emit(l + 1, scaled(cur, log_scale));
    }
}

/// `V(ω; θ₁, θ₂) = ∫ e^{2itθ₁} h_ω(t+θ₂) h_ω(t−θ₂) dt` by Gauss–Hermite
/// quadrature with `nodes` points. The integrand's odd part vanishes, so
/// the value is real.
pub fn fourier_wigner_hermite_with(rule: &GaussRule, omega: usize, theta1: f64, theta2: f64) -> f64 {
    rule.integrate(|t| {
        (2.0 * t * theta1).cos() * hermite_fn(omega, t + theta2) * hermite_fn(omega, t - theta2)
    })
}

/// [`fourier_wigner_hermite_with`] on a shared 200-node rule.
pub fn fourier_wigner_hermite(omega: usize, theta1: f64, theta2: f64) -> f64 {
    fourier_wigner_hermite_with(&quadrature::hermite(200), omega, theta1, theta2)
}

/// Laguerre closed form of the diagonal Fourier–Wigner transform:
/// `V(ω; θ₁, θ₂) = (−1)^ω ℒ_ω^{(0)}(θ₁² + θ₂²)`. The sign is what the ω = 0
/// Gaussian case and `V(ω;0,0) = ‖h_ω‖² = 1` force.
pub fn fourier_wigner_closed(omega: usize, theta1: f64, theta2: f64) -> f64 {
    let sign = if omega % 2 == 0 { 1.0 } else { -1.0 };
    sign * laguerre_fn(omega as i64, 0, theta1 * theta1 + theta2 * theta2)
}

/// Rewrites `Σ f(n) ℒ_n^{(k)}` as `Σ g(n) ℒ_n^{(h)}` with `g = (1+τ)^{h−k} f`,
/// τ the forward shift. For h < k the inverse of `1+τ` is the (finite)
/// alternating tail sum.
pub fn laguerre_series_retype(f: &[f64], k: u32, h: u32) -> Vec<f64> {
    let mut g = f.to_vec();
    if h >= k {
        for _ in k..h {
            for n in 0..g.len() {
                g[n] += g.get(n + 1).copied().unwrap_or(0.0);
            }
        }
    } else {
        for _ in h..k {
            // (1+τ)^{-1} g(n) = Σ_l (−1)^l g(n+l), accumulated from the top
            let mut acc = 0.0;
            for n in (0..g.len()).rev() {
                acc = g[n] - acc;
                g[n] = acc;
            }
        }
    }
    g
}

/// Evaluates a Laguerre series `Σ_n c_n ℒ_n^{(k)}(t)`.
pub fn laguerre_series(c: &[f64], k: u32, t: f64) -> f64 {
    if c.is_empty() {
        return 0.0;
    }
    let vals = laguerre_fn_all(c.len() - 1, k, t);
    c.iter().zip(&vals).map(|(a, b)| a * b).sum()
}

/// `A_q(x) = ∫_{S^{q−1}} e^{i x ω₁} dω`, the Fourier transform of the
/// surface measure of the unit sphere in ℝ^q, as a function of the radius.
pub fn sphere_fourier(q: usize, x: f64) -> f64 {
    let x = x.abs();
    match q {
        0 => 1.0,
        1 => 2.0 * x.cos(),
        3 => {
            if x < 1e-4 {
                4.0 * PI * (1.0 - x * x / 6.0)
            } else {
                4.0 * PI * x.sin() / x
            }
        }
        _ if q % 2 == 0 => {
            // |S^{q-2}| ∫_0^π cos(x cos θ) sin^{q-2} θ dθ; the integrand is a
            // smooth even periodic function, so the midpoint rule converges
            // geometrically once the node count exceeds x.
            let n = (x.ceil() as usize + 40).max(48);
            let h = PI / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let th = (i as f64 + 0.5) * h;
                acc += (x * th.cos()).cos() * th.sin().powi(q as i32 - 2);
            }
            quadrature::sphere_area(q - 1) * acc * h
        }
        _ => {
            // odd q >= 5: |S^{q-2}| ∫_{-1}^{1} cos(xt) (1−t²)^{(q−3)/2} dt,
            // a polynomial weight, so Gauss–Legendre is exact up to cos.
            let n = (x.ceil() as usize / 2 + 24).max(24);
            let gl = quadrature::legendre(n);
            let p = (q as i32 - 3) / 2;
            let v = gl.integrate_weighted(|t| (x * t).cos() * (1.0 - t * t).powi(p));
            quadrature::sphere_area(q - 1) * v
        }
    }
}

/// Binomial coefficient as f64.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn laguerre_poly_small_cases() {
        assert_eq!(laguerre_poly(0, 5, 3.3), 1.0);
        assert_relative_eq!(laguerre_poly(1, 2, 0.5), 2.5, epsilon = 1e-15);
        assert_relative_eq!(laguerre_poly(3, 2, 0.0), 10.0, epsilon = 1e-12);
        // Rodrigues: L_2^{(k)}(t) = ((k+1)(k+2) − 2(k+2)t + t²)/2
        let (k, t) = (3.0, 1.7);
        let l2 = ((k + 1.0) * (k + 2.0) - 2.0 * (k + 2.0) * t + t * t) / 2.0;
        assert_relative_eq!(laguerre_poly(2, 3, t), l2, epsilon = 1e-13);
    }

    #[test]
    fn laguerre_fn_definitions() {
        assert_relative_eq!(laguerre_fn(0, 0, 1.0), (-1.0f64).exp(), epsilon = 1e-16);
        assert_eq!(laguerre_fn(-1, 3, 2.0), 0.0);
        assert!(laguerre_fn(1, 0, 0.5).abs() < 1e-16);
        for n in 0..6 {
            for &t in &[0.0f64, 0.3, 2.0, 7.5] {
                let want = if n % 2 == 0 { 1.0 } else { -1.0 } * (-t).exp() * laguerre_poly(n, 2, 2.0 * t);
                assert_relative_eq!(laguerre_fn(n as i64, 2, t), want, epsilon = 1e-13, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn laguerre_fn_is_finite_on_the_envelope() {
        for &t in &[0.0, 1.0, 50.0, 200.0, 400.0] {
            for v in laguerre_fn_all(200, 16, t) {
                assert!(v.is_finite());
            }
        }
        // ℒ_200^{(16)}(0) = (−1)^200 C(216, 200)
        let v = laguerre_fn(200, 16, 0.0);
        assert_relative_eq!(v, binomial(216, 16), max_relative = 1e-12);
    }

    #[test]
    fn hermite_values() {
        assert_relative_eq!(hermite_fn(0, 0.0), 0.751_125_544_464_942_5, epsilon = 1e-15);
        // h_1(t) = sqrt(2) t h_0(t)
        let t = 0.8;
        assert_relative_eq!(hermite_fn(1, t), 2f64.sqrt() * t * hermite_fn(0, t), epsilon = 1e-15);
        assert!(hermite_fn(60, 40.0).is_finite());
    }

    #[test]
    fn hermite_orthonormal_under_gauss_hermite() {
        let rule = quadrature::hermite(200);
        for l in 0..=15 {
            for m in 0..=15 {
                let v = rule.integrate(|t| hermite_fn(l, t) * hermite_fn(m, t));
                let want = if l == m { 1.0 } else { 0.0 };
                assert!((v - want).abs() <= 1e-10, "<h_{l}, h_{m}> = {v}");
            }
        }
    }

    #[test]
    fn fourier_wigner_pins_normalization() {
        // ω = 0: ∫ e^{2itθ₁} h_0(t+θ₂) h_0(t−θ₂) dt = e^{−θ₁²−θ₂²}
        let v = fourier_wigner_hermite(0, 0.4, -0.9);
        assert_relative_eq!(v, (-(0.16f64 + 0.81f64)).exp(), max_relative = 1e-13);
        for w in 0..6 {
            assert_relative_eq!(fourier_wigner_hermite(w, 0.0, 0.0), 1.0, max_relative = 1e-12);
        }
        let rule = quadrature::hermite(400);
        let v = fourier_wigner_hermite_with(&rule, 3, 0.7, -0.4);
        assert_relative_eq!(v, fourier_wigner_closed(3, 0.7, -0.4), max_relative = 1e-8);
        assert_relative_eq!(v, -laguerre_fn(3, 0, 0.65), max_relative = 1e-8);
    }

    #[test]
    fn retype_examples() {
        let f = vec![0.3, -1.2, 0.7];
        assert_eq!(laguerre_series_retype(&f, 2, 2), f);
        assert_eq!(laguerre_series_retype(&[1.0], 0, 1), vec![1.0]);
        let t = 1.3;
        assert_relative_eq!(
            laguerre_fn(0, 0, t),
            laguerre_fn(0, 1, t) + laguerre_fn(-1, 1, t),
            epsilon = 1e-16
        );
    }

    #[test]
    fn sphere_fourier_matches_quadrature_on_the_sphere() {
        use crate::quadrature::sphere_rule;
        for q in 1..=5 {
            let rule = sphere_rule(q, 64);
            for &x in &[0.0, 0.7, 3.0, 11.0] {
                let direct: f64 = rule.iter().map(|(w, wt)| wt * (x * w[0]).cos()).sum();
                assert_relative_eq!(sphere_fourier(q, x), direct, epsilon = 1e-9, max_relative = 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn hermite_parity(l in 0usize..=20, t in -6.0f64..6.0) {
            let s = if l % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((hermite_fn(l, -t) - s * hermite_fn(l, t)).abs() <= 1e-13);
        }

        #[test]
        fn laguerre_fn_bounded(n in 0i64..=60, t in 0.0f64..80.0) {
            prop_assert!(laguerre_fn(n, 0, t).abs() <= 1.0 + 1e-12);
        }

        #[test]
        fn retype_preserves_series(
            f in proptest::collection::vec(-1.0f64..1.0, 1..=11),
            t in 0.0f64..20.0,
            k in 0u32..5,
            h in 0u32..5,
        ) {
            let g = laguerre_series_retype(&f, k, h);
            let lhs = laguerre_series(&f, k, t);
            let rhs = laguerre_series(&g, h, t);
            // cancellation-aware scale: the largest partial magnitude of either side
            let mag = |c: &[f64], kk: u32| -> f64 {
                let v = laguerre_fn_all(c.len() - 1, kk, t);
                c.iter().zip(&v).map(|(a, b)| (a * b).abs()).sum()
            };
            let scale = mag(&f, k).max(mag(&g, h)).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }
    }
}
