//! Sobolev and Mihlin–Hörmander norms.
//!
//! `‖F‖²_{W_2^s} = ∫ (1+ξ²)^s |F̂(ξ)|² dξ` with the unitary Fourier
//! transform, discretized on a uniform grid over the support with zero
//! padding. For s = 0 the discrete sum is exactly `h Σ|F(x_j)|²`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{BumpSpec, Multiplier};
use crate::par::ExecPolicy;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SobolevGrid {
    /// Sample points over the support at the fine resolution.
    pub n: usize,
    /// Zero-padding factor.
    pub pad: usize,
}

impl Default for SobolevGrid {
    fn default() -> Self {
        SobolevGrid { n: 4096, pad: 8 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SobolevReport {
    pub norm: f64,
    /// Norm at half the resolution.
    pub coarse: f64,
    pub rel_change: f64,
    /// Set when the top two resolutions differ by more than 1%.
    pub unresolved: bool,
}

/// `‖f‖_{W_2^s}` for f supported in [lo, hi], sampled at `n` points.
pub fn sobolev_norm_fn(f: impl Fn(f64) -> Complex64, lo: f64, hi: f64, s: f64, n: usize, pad: usize) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let h = (hi - lo) / n as f64;
    let total = (n + 1) * pad.max(1);
    let mut buf: Vec<Complex64> = (0..total)
        .map(|j| if j <= n { f(lo + j as f64 * h) } else { Complex64::new(0.0, 0.0) })
        .collect();
    FftPlanner::new().plan_fft_forward(total).process(&mut buf);
    let dxi = 2.0 * std::f64::consts::PI / (total as f64 * h);
    let acc = crate::par::kahan_sum(buf.iter().enumerate().map(|(k, a)| {
        let kk = if k <= total / 2 { k as f64 } else { k as f64 - total as f64 };
        let xi = kk * dxi;
        (1.0 + xi * xi).powf(s) * a.norm_sqr()
    }));
    (acc * h / total as f64).sqrt()
}

/// `‖F‖_{W_2^s}` with a convergence report from the top two resolutions.
pub fn sobolev_norm(f: &Multiplier, s: f64, grid: SobolevGrid) -> SobolevReport {
    let (lo, hi) = (f.k_lo(), f.k_hi());
    if f.is_zero() || hi <= lo {
        return SobolevReport {
            norm: 0.0,
            coarse: 0.0,
            rel_change: 0.0,
            unresolved: false,
        };
    }
    let fine = sobolev_norm_fn(|x| f.eval(x), lo, hi, s, grid.n, grid.pad);
    let coarse = sobolev_norm_fn(|x| f.eval(x), lo, hi, s, grid.n / 2, grid.pad);
    let rel_change = if fine > 0.0 { (fine - coarse).abs() / fine } else { 0.0 };
    SobolevReport {
        norm: fine,
        coarse,
        rel_change,
        unresolved: rel_change > 0.01,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MwReport {
    pub norm: f64,
    pub argmax_t: f64,
    /// (t, ‖F(t·) w‖_{W_2^s}) over the scan.
    pub scan: Vec<(f64, f64)>,
}

/// Quarter-octave dyadic grid point `2^{k/4}`, exact under scaling by
/// powers of two.
pub fn quarter_octave(k: i32) -> f64 {
    const ROOTS: [f64; 4] = [1.0, 1.189_207_115_002_721, std::f64::consts::SQRT_2, 1.681_792_830_507_429];
    2f64.powi(k.div_euclid(4)) * ROOTS[k.rem_euclid(4) as usize]
}

/// `sup_t ‖F(t·) w‖_{W_2^s}` over quarter-octave `t` covering
/// `[K_lo/2, 2 K_hi]` (lower end clamped to `2^{−10} K_hi` when K_lo = 0).
pub fn mw_norm(f: &Multiplier, s: f64, window: BumpSpec, grid: SobolevGrid, policy: ExecPolicy) -> MwReport {
    let (k_lo, k_hi) = (f.k_lo(), f.k_hi());
    if f.is_zero() || k_hi <= 0.0 {
        return MwReport {
            norm: 0.0,
            argmax_t: 1.0,
            scan: vec![],
        };
    }
    let [w_lo, w_hi] = window.support();
    let t_lo = if k_lo > 0.0 { k_lo / w_hi } else { k_hi * 2f64.powi(-10) };
    let t_hi = k_hi / w_lo;
    let k0 = (4.0 * t_lo.log2()).floor() as i32;
    let k1 = (4.0 * t_hi.log2()).ceil() as i32;
    let ts: Vec<f64> = (k0..=k1).map(quarter_octave).collect();
    let vals = policy.map(&ts, |&t| {
        sobolev_norm_fn(|x| f.eval(t * x) * window.eval(x), w_lo, w_hi, s, grid.n, grid.pad)
    });
    let (mut best, mut arg) = (0.0, ts[0]);
    for (&t, &v) in ts.iter().zip(&vals) {
        if v > best {
            best = v;
            arg = t;
        }
    }
    MwReport {
        norm: best,
        argmax_t: arg,
        scan: ts.into_iter().zip(vals).collect(),
    }
}

/// Mixed-smoothness norm
/// `(∫∫ (1+ξ₁²)^{s₁} (1+ξ₂²)^{s₂} |f̂(ξ₁,ξ₂)|² dξ)^{1/2}` of f supported in
/// `[a₀,a₁] × [b₀,b₁]`, by a 2-D FFT on an `(n+1)²` grid padded `pad`-fold.
pub fn mixed_sobolev_norm_2d(
    f: impl Fn(f64, f64) -> Complex64,
    a: [f64; 2],
    b: [f64; 2],
    s: [f64; 2],
    n: usize,
    pad: usize,
) -> f64 {
    weighted_norm_2d(f, a, b, n, pad, |x1, x2| (1.0 + x1 * x1).powf(s[0]) * (1.0 + x2 * x2).powf(s[1]))
}

/// Isotropic `W_2^s(ℝ²)` norm on the same discretization, weight `(1+|ξ|²)^s`.
pub fn isotropic_sobolev_norm_2d(
    f: impl Fn(f64, f64) -> Complex64,
    a: [f64; 2],
    b: [f64; 2],
    s: f64,
    n: usize,
    pad: usize,
) -> f64 {
    weighted_norm_2d(f, a, b, n, pad, |x1, x2| (1.0 + x1 * x1 + x2 * x2).powf(s))
}

fn weighted_norm_2d(
    f: impl Fn(f64, f64) -> Complex64,
    a: [f64; 2],
    b: [f64; 2],
    n: usize,
    pad: usize,
    weight: impl Fn(f64, f64) -> f64,
) -> f64 {
    let (h1, h2) = ((a[1] - a[0]) / n as f64, (b[1] - b[0]) / n as f64);
    let m = (n + 1) * pad.max(1);
    let mut grid = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..=n {
        for j in 0..=n {
            grid[i * m + j] = f(a[0] + i as f64 * h1, b[0] + j as f64 * h2);
        }
    }
    let fft = FftPlanner::new().plan_fft_forward(m);
    for row in grid.chunks_mut(m) {
        fft.process(row);
    }
    // transpose so the second axis becomes contiguous: t[k2][k1]
    let mut t = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            t[j * m + i] = grid[i * m + j];
        }
    }
    for row in t.chunks_mut(m) {
        fft.process(row);
    }
    let freq = |k: usize, h: f64| {
        let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
        kk * 2.0 * std::f64::consts::PI / (m as f64 * h)
    };
    let xi1: Vec<f64> = (0..m).map(|k| freq(k, h1)).collect();
    let xi2: Vec<f64> = (0..m).map(|k| freq(k, h2)).collect();
    let acc = crate::par::kahan_sum((0..m * m).map(|idx| {
        let (k2, k1) = (idx / m, idx % m);
        weight(xi1[k1], xi2[k2]) * t[idx].norm_sqr()
    }));
    (acc * h1 * h2 / (m * m) as f64).sqrt()
}
