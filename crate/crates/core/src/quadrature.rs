//! Quadrature rules.
//!
//! Gauss rules are built from the three-term recurrence of the orthonormal
//! polynomials: Jacobi-matrix eigenvalues seed the nodes, Newton steps on
//! the recurrence polish them, and the Christoffel numbers give the weights.
//! The recurrence is run on `p_k(x) * sqrt(W(x))` (orthonormal *functions*)
//! so that neither the Hermite nor the Laguerre case overflows at the
//! outermost nodes.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

/// Nodes and weights of a one-dimensional rule.
///
/// `weights` integrate against the rule's weight function `W`;
/// `scaled_weights` integrate plain `f(x) dx`, i.e. `scaled = weights / W`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum w_i f(x_i)`: integrates `W(x) f(x)`.
    pub fn integrate_weighted<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// `sum s_i f(x_i)`: integrates `f(x)` directly.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.scaled_weights)
            .map(|(&x, &w)| if w == 0.0 { 0.0 } else { w * f(x) })
            .sum()
    }
}

struct Recurrence<A, B, L> {
    /// Diagonal of the Jacobi matrix, `a_k`, k >= 0.
    diag: A,
    /// Off-diagonal, `b_k` for k >= 1 (b_0 unused).
    off: B,
    /// `ln W(x)`.
    log_weight: L,
    /// `ln mu_0 = ln int W`.
    log_mu0: f64,
}

impl<A, B, L> Recurrence<A, B, L>
where
    A: Fn(usize) -> f64,
    B: Fn(usize) -> f64,
    L: Fn(f64) -> f64,
{
    /// Runs the orthonormal-function recurrence up to degree `n`.
    /// Returns (q_n, q_n', sum_{k<n} q_k^2) with q_k = p_k sqrt(W) up to a
    /// common rescaling applied to all three when values grow large.
    fn eval(&self, n: usize, x: f64) -> (f64, f64, f64) {
        let q0 = (0.5 * ((self.log_weight)(x) - self.log_mu0)).exp();
        let (mut q_prev, mut q) = (0.0, q0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        let mut sum_sq = 0.0;
        for k in 0..n {
            sum_sq += q * q;
            let b_next = (self.off)(k + 1);
            let b_k = if k == 0 { 0.0 } else { (self.off)(k) };
            let a_k = (self.diag)(k);
            let q_next = ((x - a_k) * q - b_k * q_prev) / b_next;
            let d_next = ((x - a_k) * d + q - b_k * d_prev) / b_next;
            q_prev = q;
            q = q_next;
            d_prev = d;
            d = d_next;
            if q.abs() > 1e150 {
                q *= 1e-150;
                q_prev *= 1e-150;
                d *= 1e-150;
                d_prev *= 1e-150;
                sum_sq *= 1e-300;
            }
        }
        (q, d, sum_sq)
    }

    fn build(&self, n: usize) -> GaussRule {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            jac[(k, k)] = (self.diag)(k);
            if k + 1 < n {
                let b = (self.off)(k + 1);
                jac[(k, k + 1)] = b;
                jac[(k + 1, k)] = b;
            }
        }
        let mut nodes: Vec<f64> = jac.symmetric_eigenvalues().iter().copied().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut weights = Vec::with_capacity(n);
        let mut scaled = Vec::with_capacity(n);
        for x in nodes.iter_mut() {
            for _ in 0..4 {
                let (q, d, _) = self.eval(n, *x);
                if d == 0.0 || !d.is_finite() {
                    break;
                }
                let step = q / d;
                *x -= step;
                if step.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            // Christoffel numbers. The q_k include sqrt(W(x)), so sum q^2 = W / lambda.
            let sum_sq = self.sum_of_squares(n, *x);
            if !sum_sq.is_finite() || sum_sq == 0.0 {
                weights.push(0.0);
                scaled.push(0.0);
                continue;
            }
            let s = 1.0 / sum_sq;
            scaled.push(s);
            weights.push(s * (self.log_weight)(*x).exp());
        }
        GaussRule {
            nodes,
            weights,
            scaled_weights: scaled,
        }
    }

    /// `sum_{k<n} q_k^2`, with the scale tracked separately so huge
    /// intermediate values do not overflow.
    fn sum_of_squares(&self, n: usize, x: f64) -> f64 {
        let q0 = (0.5 * ((self.log_weight)(x) - self.log_mu0)).exp();
        let mut log_scale = 0.0f64;
        let (mut q_prev, mut q) = (0.0, q0);
        let mut sum_sq = 0.0;
        for k in 0..n {
            sum_sq += q * q;
            let b_next = (self.off)(k + 1);
            let b_k = if k == 0 { 0.0 } else { (self.off)(k) };
            let q_next = ((x - (self.diag)(k)) * q - b_k * q_prev) / b_next;
            q_prev = q;
            q = q_next;
            if q.abs() > 1e150 {
                q *= 1e-150;
                q_prev *= 1e-150;
                sum_sq *= 1e-300;
                log_scale += 300.0 * std::f64::consts::LN_10;
            }
        }
        (sum_sq.ln() + log_scale).exp()
    }
}

/// n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> GaussRule {
    Recurrence {
        diag: |_| 0.0,
        off: |k: usize| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        },
        log_weight: |_| 0.0,
        log_mu0: 2f64.ln(),
    }
    .build(n)
}

/// n-point Gauss–Hermite rule for the weight `exp(-x^2)` on the real line.
pub fn gauss_hermite(n: usize) -> GaussRule {
    Recurrence {
        diag: |_| 0.0,
        off: |k: usize| (k as f64 / 2.0).sqrt(),
        log_weight: |x: f64| -x * x,
        log_mu0: 0.5 * PI.ln(),
    }
    .build(n)
}

/// n-point generalized Gauss–Laguerre rule for `x^alpha exp(-x)` on [0, inf).
pub fn gauss_laguerre(n: usize, alpha: f64) -> GaussRule {
    assert!(alpha > -1.0);
    Recurrence {
        diag: move |k: usize| 2.0 * k as f64 + alpha + 1.0,
        off: move |k: usize| {
            let k = k as f64;
            (k * (k + alpha)).sqrt()
        },
        log_weight: move |x: f64| {
            if x <= 0.0 {
                f64::NEG_INFINITY
            } else {
                alpha * x.ln() - x
            }
        },
        log_mu0: ln_gamma(alpha + 1.0),
    }
    .build(n)
}

pub use statrs::function::gamma::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum RuleKey {
    Legendre(usize),
    Hermite(usize),
    Laguerre(usize, u64),
}

fn cached(key: RuleKey, build: impl FnOnce() -> GaussRule) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().unwrap().get(&key) {
        return Arc::clone(r);
    }
    // Built outside the lock; a racing duplicate build is harmless.
    let rule = Arc::new(build());
    cache.lock().unwrap().entry(key).or_insert(rule).clone()
}

/// Shared Gauss–Legendre rule (built once per process).
pub fn legendre(n: usize) -> Arc<GaussRule> {
    cached(RuleKey::Legendre(n), || gauss_legendre(n))
}

/// Shared Gauss–Hermite rule.
pub fn hermite(n: usize) -> Arc<GaussRule> {
    cached(RuleKey::Hermite(n), || gauss_hermite(n))
}

/// Shared generalized Gauss–Laguerre rule.
pub fn laguerre(n: usize, alpha: f64) -> Arc<GaussRule> {
    cached(RuleKey::Laguerre(n, alpha.to_bits()), || gauss_laguerre(n, alpha))
}

/// Composite Gauss–Legendre rule over consecutive panels `breaks[i]..breaks[i+1]`.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn from_breaks(breaks: &[f64], base: &GaussRule) -> Self {
        let mut nodes = Vec::with_capacity(base.len() * breaks.len().saturating_sub(1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, wt) in base.nodes.iter().zip(&base.weights) {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        CompositeRule { nodes, weights }
    }

    /// Single-panel Gauss–Legendre on [a, b].
    pub fn interval(a: f64, b: f64, base: &GaussRule) -> Self {
        Self::from_breaks(&[a, b], base)
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Panel breakpoints on [lo, hi]: geometric spacing with `per_octave`
/// panels per factor-two, refined so no panel is wider than `max_width`.
pub fn log_linear_breaks(lo: f64, hi: f64, per_octave: usize, max_width: f64) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo);
    let n_log = ((hi / lo).log2() * per_octave as f64).ceil().max(1.0) as usize;
    let ratio = (hi / lo).powf(1.0 / n_log as f64);
    let mut breaks = vec![lo];
    let mut x = lo;
    for i in 1..=n_log {
        let next = if i == n_log { hi } else { x * ratio };
        let width = next - x;
        let pieces = if max_width.is_finite() && max_width > 0.0 {
            (width / max_width).ceil().max(1.0) as usize
        } else {
            1
        };
        for p in 1..=pieces {
            breaks.push(x + width * p as f64 / pieces as f64);
        }
        x = next;
    }
    *breaks.last_mut().unwrap() = hi;
    breaks
}

/// Filon–Simpson rule for `int_a^b f(x) cos(k x) dx` and
/// `int_a^b f(x) sin(k x) dx` on `2m` uniform subintervals.
/// Returns (cos part, sin part).
pub fn filon_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, k: f64, m: usize) -> (f64, f64) {
    let n = 2 * m.max(1);
    let h = (b - a) / n as f64;
    let theta = k * h;
    let (alpha, beta, gamma) = filon_coefficients(theta);
    let fx: Vec<f64> = (0..=n).map(|i| f(a + i as f64 * h)).collect();
    let x = |i: usize| a + i as f64 * h;

    let mut c_even = 0.0;
    let mut s_even = 0.0;
    for i in (0..=n).step_by(2) {
        let mut c = fx[i] * (k * x(i)).cos();
        let mut s = fx[i] * (k * x(i)).sin();
        if i == 0 || i == n {
            c *= 0.5;
            s *= 0.5;
        }
        c_even += c;
        s_even += s;
    }
    let mut c_odd = 0.0;
    let mut s_odd = 0.0;
    for i in (1..n).step_by(2) {
        c_odd += fx[i] * (k * x(i)).cos();
        s_odd += fx[i] * (k * x(i)).sin();
    }
    let (sa, ca) = (k * a).sin_cos();
    let (sb, cb) = (k * b).sin_cos();
    let cos_part = h * (alpha * (fx[n] * sb - fx[0] * sa) + beta * c_even + gamma * c_odd);
    let sin_part = h * (-alpha * (fx[n] * cb - fx[0] * ca) + beta * s_even + gamma * s_odd);
    (cos_part, sin_part)
}

fn filon_coefficients(theta: f64) -> (f64, f64, f64) {
    if theta.abs() < 1.0 / 6.0 {
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let t4 = t2 * t2;
        let t5 = t4 * theta;
        let t6 = t4 * t2;
        let alpha = 2.0 * t3 / 45.0 - 2.0 * t5 / 315.0 + 2.0 * t6 * theta / 4725.0;
        let beta = 2.0 / 3.0 + 2.0 * t2 / 15.0 - 4.0 * t4 / 105.0 + 2.0 * t6 / 567.0;
        let gamma = 4.0 / 3.0 - 2.0 * t2 / 15.0 + t4 / 210.0 - t6 / 11340.0;
        (alpha, beta, gamma)
    } else {
        let (s, c) = theta.sin_cos();
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let alpha = (t2 + theta * s * c - 2.0 * s * s) / t3;
        let beta = 2.0 * (theta * (1.0 + c * c) - 2.0 * s * c) / t3;
        let gamma = 4.0 * (s - theta * c) / t3;
        (alpha, beta, gamma)
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * GK_WK[7];
    let mut gauss = fc * GK_WG[3];
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        kron += GK_WK[i] * s;
        if i % 2 == 1 {
            gauss += GK_WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) with global bisection of the worst panel.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    let mut panels = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..2000 {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
    panels.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    crate::par::kahan_sum(panels.iter().map(|p| p.2))
}

/// Product rule on the unit sphere S^{d-1} ⊂ R^d.
///
/// d = 1: the two points ±1. d = 2: trapezoid with `n_angle` nodes offset
/// by half a step (never on the coordinate axes). d >= 3: Gauss–Legendre in
/// the polar angle against sin^{d-2}, recursing on S^{d-2}.
/// Weights sum to the surface area |S^{d-1}|.
pub fn sphere_rule(d: usize, n_angle: usize) -> Vec<(Vec<f64>, f64)> {
    assert!(d >= 1);
    match d {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => {
            let n = n_angle.max(2);
            (0..n)
                .map(|k| {
                    let t = (k as f64 + 0.5) * 2.0 * PI / n as f64;
                    (vec![t.cos(), t.sin()], 2.0 * PI / n as f64)
                })
                .collect()
        }
        _ => {
            let n_polar = n_angle.max(2);
            let gl = legendre(n_polar);
            let inner = sphere_rule(d - 1, n_angle);
            let mut out = Vec::with_capacity(n_polar * inner.len());
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                let theta = 0.5 * PI * (x + 1.0);
                let wt = 0.5 * PI * w * theta.sin().powi(d as i32 - 2);
                let (s, c) = theta.sin_cos();
                for (dir, wi) in &inner {
                    let mut v = Vec::with_capacity(d);
                    v.push(c);
                    v.extend(dir.iter().map(|y| s * y));
                    out.push((v, wt * wi));
                }
            }
            out
        }
    }
}

/// Surface area of S^{d-1}.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / ln_gamma(d as f64 / 2.0).exp()
}
