//! Joint multipliers `H(λ₁, …, λ_{d₁}, η)` and the symbol
//! `m(n, μ, η) = H((2n_j + r_j) b_j^η + μ_j, …, η)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{smooth_step, Multiplier};
use crate::error::{Error, Result};

/// The two auxiliary bumps. Both are supported in [1/2, 2].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpSpec {
    /// `χ(t) = ψ(log₂t + 1) − ψ(log₂t)` with ψ the smooth step; the dyadic
    /// dilates telescope, so `Σ_k χ(2^{−k}t) = 1` on (0, ∞).
    DyadicCutoffChi,
    /// `exp(−1/(1 − x²))` at `x = log₂ t`, the window of the MW norm.
    MwWindow,
}

impl BumpSpec {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.5 || t >= 2.0 {
            return 0.0;
        }
        let x = t.log2();
        match self {
            BumpSpec::DyadicCutoffChi => smooth_step(x + 1.0) - smooth_step(x),
            BumpSpec::MwWindow => (-1.0 / (1.0 - x * x)).exp(),
        }
    }

    pub fn support(&self) -> [f64; 2] {
        [0.5, 2.0]
    }
}

/// Joint multiplier. `Spectral(F)` is `F(L)`, `Truncated` is
/// `F_M(L, U) = F(L) χ(|U|/M)`, `Tensor` is `F₁(L₁) ⋯ F_{d₁}(L_{d₁})`
/// with one factor per block.
#[derive(Debug, Clone, PartialEq)]
pub enum JointMultiplier {
    Spectral(Multiplier),
    Truncated { f: Multiplier, m: f64, chi: BumpSpec },
    Tensor(Vec<Multiplier>),
}

impl JointMultiplier {
    /// `H(λ⃗, η)` given the per-block eigenvalues and `|η|`.
    pub fn eval(&self, lam: &[f64], eta_norm: f64) -> Complex64 {
        match self {
            JointMultiplier::Spectral(f) => f.eval(lam.iter().sum()),
            JointMultiplier::Truncated { f, m, chi } => {
                let c = chi.eval(eta_norm / m);
                if c == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    f.eval(lam.iter().sum()) * c
                }
            }
            JointMultiplier::Tensor(fs) => fs.iter().zip(lam).map(|(f, &l)| f.eval(l)).product(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            JointMultiplier::Spectral(f) | JointMultiplier::Truncated { f, .. } => f.is_zero(),
            JointMultiplier::Tensor(fs) => fs.iter().any(|f| f.is_zero()),
        }
    }

    /// Radial range of `|η|` along a unit direction with per-block rates
    /// `b_j` (i.e. `b_j^{ρω} = ρ b_j`) outside which the symbol vanishes for
    /// every n and μ. `None` when empty.
    pub fn rho_range(&self, b_unit: &[f64], ranks: &[usize]) -> Option<(f64, f64)> {
        let rate: f64 = b_unit.iter().zip(ranks).map(|(b, &r)| r as f64 * b).sum();
        let (lo, hi) = match self {
            JointMultiplier::Spectral(f) => (0.0, f.k_hi() / rate),
            JointMultiplier::Truncated { f, m, chi } => {
                let [a, b] = chi.support();
                (a * m, (b * m).min(f.k_hi() / rate))
            }
            JointMultiplier::Tensor(fs) => {
                let hi = fs
                    .iter()
                    .zip(b_unit.iter().zip(ranks))
                    .map(|(f, (b, &r))| f.k_hi() / (r as f64 * b))
                    .fold(f64::INFINITY, f64::min);
                (0.0, hi)
            }
        };
        (hi > lo && !self.is_zero()).then_some((lo, hi))
    }

    /// Enumerates the finite set of level multi-indices `n` with a possibly
    /// nonzero symbol at spectral rates `b` (absolute, not unit).
    pub fn levels(&self, b: &[f64], ranks: &[usize]) -> Vec<Vec<usize>> {
        match self {
            JointMultiplier::Spectral(f) | JointMultiplier::Truncated { f, .. } => level_lattice(b, ranks, f.k_hi()),
            JointMultiplier::Tensor(fs) => {
                let caps: Vec<usize> = fs
                    .iter()
                    .zip(b.iter().zip(ranks))
                    .map(|(f, (b, &r))| {
                        let c = (f.k_hi() / b - r as f64) / 2.0;
                        if c < 0.0 {
                            usize::MAX
                        } else {
                            c.floor() as usize
                        }
                    })
                    .collect();
                if caps.contains(&usize::MAX) {
                    return vec![];
                }
                product_lattice(&caps)
            }
        }
    }

    /// Symbol `m(n, μ, η)`; `mu` has one entry per block with
    /// `dim v_j > 2r_j` (missing entries count as 0).
    pub fn symbol(&self, n: &[usize], mu: &[f64], b: &[f64], ranks: &[usize], eta_norm: f64) -> Complex64 {
        let lam: Vec<f64> = (0..b.len())
            .map(|j| (2 * n[j] + ranks[j]) as f64 * b[j] + mu.get(j).copied().unwrap_or(0.0))
            .collect();
        self.eval(&lam, eta_norm)
    }

    /// Largest spectral value that can carry a nonzero symbol, per block.
    pub fn block_caps(&self, n_blocks: usize) -> Vec<f64> {
        match self {
            JointMultiplier::Spectral(f) | JointMultiplier::Truncated { f, .. } => vec![f.k_hi(); n_blocks],
            JointMultiplier::Tensor(fs) => fs.iter().map(|f| f.k_hi()).collect(),
        }
    }

    /// True when the symbol only depends on the per-block values through a
    /// product of one-block factors.
    pub fn is_tensor(&self) -> bool {
        matches!(self, JointMultiplier::Tensor(_))
    }
}

/// All `n ∈ ℕ^{d₁}` with `Σ_j (2n_j + r_j) b_j ≤ budget`.
pub fn level_lattice(b: &[f64], ranks: &[usize], budget: f64) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; b.len()];
    let base: f64 = b.iter().zip(ranks).map(|(b, &r)| r as f64 * b).sum();
    fn rec(j: usize, left: f64, b: &[f64], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if j == b.len() {
            out.push(cur.clone());
            return;
        }
        let mut n = 0;
        loop {
            let used = 2.0 * n as f64 * b[j];
            if used > left {
                break;
            }
            cur[j] = n;
            rec(j + 1, left - used, b, cur, out);
            n += 1;
        }
        cur[j] = 0;
    }
    if base <= budget {
        rec(0, budget - base, b, &mut cur, &mut out);
    }
    out
}

fn product_lattice(caps: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &c in caps {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..=c).map(move |n| {
                    let mut q = p.clone();
                    q.push(n);
                    q
                })
            })
            .collect();
    }
    out
}

/// `F_M(λ, η) = F(λ) χ(|η|/M)`.
pub fn truncate_dyadic(f: &Multiplier, m: f64, chi: BumpSpec) -> Result<JointMultiplier> {
    if m <= 0.0 || !m.is_finite() {
        return Err(Error::invalid("dyadic scale M must be positive"));
    }
    if chi != BumpSpec::DyadicCutoffChi {
        return Err(Error::invalid("dyadic truncation uses the partition cutoff chi"));
    }
    Ok(JointMultiplier::Truncated { f: f.clone(), m, chi })
}

/// `2 C K_hi` with `C⁻¹ = min_ω Σ_j r_j b_j^ω`: above this M the truncated
/// multiplier vanishes on the joint spectrum.
pub fn vanishing_threshold(rate_min: f64, k_hi: f64) -> f64 {
    2.0 * k_hi / rate_min
}
