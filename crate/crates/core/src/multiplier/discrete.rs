//! Forward differences on ℕ^{d₁} and their continuous counterpart.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::quadrature::legendre;
use crate::special::binomial;

/// `δ^β f(n) = Σ_{k ≤ β} (−1)^{|β|−|k|} Π_j C(β_j, k_j) f(n + k)`.
pub fn difference_op(f: impl Fn(&[i64]) -> f64, beta: &[u32], n: &[i64]) -> f64 {
    let mut acc = 0.0;
    let mut k = vec![0u32; beta.len()];
    let mut pt = n.to_vec();
    loop {
        let (mut coef, mut sign) = (1.0, 0u32);
        for (j, (&kj, &bj)) in k.iter().zip(beta).enumerate() {
            coef *= binomial(bj as u64, kj as u64);
            sign += bj - kj;
            pt[j] = n[j] + kj as i64;
        }
        let term = coef * f(&pt);
        acc += if sign % 2 == 0 { term } else { -term };
        // odometer over 0 ≤ k ≤ β
        let mut j = 0;
        loop {
            if j == k.len() {
                return acc;
            }
            if k[j] < beta[j] {
                k[j] += 1;
                break;
            }
            k[j] = 0;
            j += 1;
        }
    }
}

/// `δ^p` applied to a finite sequence; the result is shorter by p.
pub fn difference_seq(f: &[f64], p: usize) -> Vec<f64> {
    let mut v = f.to_vec();
    for _ in 0..p {
        v = v.windows(2).map(|w| w[1] - w[0]).collect();
    }
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscreteContinuousReport {
    /// `δ^β f(n)`.
    pub lhs: f64,
    /// `∫ ∂^β f̃(n+s) dν_β(s)`.
    pub rhs: f64,
    pub tol: f64,
    pub holds: bool,
    /// `∫ |∂^β f̃(n+s)|² dν_β(s)`, which dominates `lhs²`.
    pub second_moment: f64,
    pub cauchy_schwarz_holds: bool,
    /// "quadrature" or "monte_carlo".
    pub method: &'static str,
}

/// Checks `δ^β f(n) = ∫ ∂^β f̃(n+s) dν_β(s)` where ν_β is the law of
/// `s_j = U_{j,1} + … + U_{j,β_j}` with independent uniforms on [0,1].
///
/// `mc_samples = 0` integrates over the cube `[0,1]^{|β|}` with a tensor
/// Gauss–Legendre rule; otherwise it samples, with tolerance four standard
/// errors.
pub fn discrete_to_continuous_check(
    f: impl Fn(&[f64]) -> f64,
    d_beta_f: impl Fn(&[f64]) -> f64,
    beta: &[u32],
    n: &[f64],
    mc_samples: usize,
    seed: u64,
) -> DiscreteContinuousReport {
    let lhs = {
        let base: Vec<i64> = vec![0; n.len()];
        difference_op(
            |k| {
                let x: Vec<f64> = n.iter().zip(k).map(|(a, &b)| a + b as f64).collect();
                f(&x)
            },
            beta,
            &base,
        )
    };
    let order: usize = beta.iter().map(|&b| b as usize).sum();
    // coordinate owning each unit of β
    let owner: Vec<usize> = beta.iter().enumerate().flat_map(|(j, &b)| std::iter::repeat_n(j, b as usize)).collect();
    let point = |u: &[f64]| {
        let mut x = n.to_vec();
        for (&j, &uj) in owner.iter().zip(u) {
            x[j] += uj;
        }
        x
    };

    let (rhs, second_moment, tol, method) = if mc_samples == 0 {
        let q = match order {
            0..=3 => 20,
            4 => 12,
            _ => 6,
        };
        let rule = legendre(q);
        let nodes: Vec<f64> = rule.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let weights: Vec<f64> = rule.weights.iter().map(|w| 0.5 * w).collect();
        let (mut m1, mut m2) = (0.0, 0.0);
        let mut idx = vec![0usize; order];
        let mut u = vec![0.0; order];
        loop {
            let mut w = 1.0;
            for (i, &k) in idx.iter().enumerate() {
                u[i] = nodes[k];
                w *= weights[k];
            }
            let v = d_beta_f(&point(&u));
            m1 += w * v;
            m2 += w * v * v;
            let mut i = 0;
            while i < order && idx[i] + 1 == q {
                idx[i] = 0;
                i += 1;
            }
            if i == order {
                break;
            }
            idx[i] += 1;
        }
        (m1, m2, 1e-10 * lhs.abs().max(1.0), "quadrature")
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut m1, mut m2) = (0.0, 0.0);
        let mut u = vec![0.0; order];
        for _ in 0..mc_samples {
            for x in u.iter_mut() {
                *x = rng.random::<f64>();
            }
            let v = d_beta_f(&point(&u));
            m1 += v;
            m2 += v * v;
        }
        let nn = mc_samples as f64;
        let (mean, sq) = (m1 / nn, m2 / nn);
        let sd = (sq - mean * mean).max(0.0).sqrt();
        (mean, sq, 4.0 * sd / nn.sqrt() + 1e-12, "monte_carlo")
    };
    DiscreteContinuousReport {
        lhs,
        rhs,
        tol,
        holds: (lhs - rhs).abs() <= tol,
        second_moment,
        cauchy_schwarz_holds: lhs * lhs <= second_moment * (1.0 + 1e-12) + tol,
        method,
    }
}
