//! 2-step stratified Lie algebras `g = v ⊕ z` given by structure constants,
//! their layer decompositions, and the maps `η ↦ J_η`.
//!
//! Everything spectral happens in gram-orthonormal coordinates: with the
//! Cholesky factor `G = L Lᵀ`, a first-layer vector `x` has orthonormal
//! coordinates `Lᵀx`, and orthogonal projections are symmetric matrices.

mod builders;
pub mod io;

pub use builders::*;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{fro, orthonormal_columns, projector, rank, sym_eigen_desc};
use crate::par::ExecPolicy;

/// Relative threshold under which an eigenvalue of `−J_η²` counts as zero.
pub const RANK_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct StratifiedGroup2 {
    label: String,
    dim_v: usize,
    dim_z: usize,
    /// c[a][b][m] flattened as `(a * dim_v + b) * dim_z + m`.
    c: Vec<f64>,
    gram: DMatrix<f64>,
    chol: DMatrix<f64>,
    chol_inv: DMatrix<f64>,
}

impl StratifiedGroup2 {
    /// Builds a group from a dense bracket tensor. Checks antisymmetry,
    /// positivity of the gram matrix and that `[v, v]` spans `z`.
    pub fn new(label: impl Into<String>, dim_v: usize, dim_z: usize, c: Vec<f64>, gram: DMatrix<f64>) -> Result<Self> {
        if dim_v == 0 || dim_z == 0 {
            return Err(Error::invalid("dim_v and dim_z must be at least 1"));
        }
        if c.len() != dim_v * dim_v * dim_z {
            return Err(Error::invalid("bracket tensor has the wrong size"));
        }
        if gram.nrows() != dim_v || gram.ncols() != dim_v {
            return Err(Error::invalid("gram matrix must be dim_v x dim_v"));
        }
        let idx = |a: usize, b: usize, m: usize| (a * dim_v + b) * dim_z + m;
        for a in 0..dim_v {
            for b in 0..dim_v {
                for m in 0..dim_z {
                    let (x, y) = (c[idx(a, b, m)], c[idx(b, a, m)]);
                    if (x + y).abs() > 1e-12 * (1.0 + x.abs()) {
                        return Err(Error::invalid(format!(
                            "bracket is not antisymmetric: c[{a}][{b}][{m}] = {x}, c[{b}][{a}][{m}] = {y}"
                        )));
                    }
                }
            }
        }
        if (&gram - gram.transpose()).norm() > 1e-12 * (1.0 + gram.norm()) {
            return Err(Error::invalid("gram matrix is not symmetric"));
        }
        let chol = gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::invalid("gram matrix is not positive definite"))?
            .l();
        let chol_inv = chol
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::invalid("gram matrix is singular"))?;

        // stratification: the dim_z x (pairs) coefficient matrix has full row rank
        let pairs: Vec<(usize, usize)> = (0..dim_v).flat_map(|a| (a + 1..dim_v).map(move |b| (a, b))).collect();
        let coef = DMatrix::from_fn(dim_z, pairs.len(), |m, p| c[idx(pairs[p].0, pairs[p].1, m)]);
        if rank(&coef, 1e-10) < dim_z {
            return Err(Error::invalid("[v, v] does not span z: not a stratification"));
        }

        Ok(StratifiedGroup2 {
            label: label.into(),
            dim_v,
            dim_z,
            c,
            gram,
            chol,
            chol_inv,
        })
    }

    /// Builds a group from sparse triples `(a, b, m, value)` meaning
    /// `c[a][b][m] = value` (and hence `c[b][a][m] = −value`).
    pub fn from_triples(
        label: impl Into<String>,
        dim_v: usize,
        dim_z: usize,
        triples: &[(usize, usize, usize, f64)],
        gram: DMatrix<f64>,
    ) -> Result<Self> {
        let mut c = vec![0.0; dim_v * dim_v * dim_z];
        let mut seen = vec![false; c.len()];
        let idx = |a: usize, b: usize, m: usize| (a * dim_v + b) * dim_z + m;
        for &(a, b, m, val) in triples {
            if a >= dim_v || b >= dim_v || m >= dim_z {
                return Err(Error::invalid(format!("bracket entry ({a},{b},{m}) out of range")));
            }
            if a == b {
                if val != 0.0 {
                    return Err(Error::invalid(format!(
                        "bracket is not antisymmetric: diagonal entry c[{a}][{a}][{m}] = {val}"
                    )));
                }
                continue;
            }
            for (i, v) in [(idx(a, b, m), val), (idx(b, a, m), -val)] {
                if seen[i] && c[i] != v {
                    return Err(Error::invalid(format!(
                        "bracket is not antisymmetric: conflicting entries for ({a},{b},{m})"
                    )));
                }
                seen[i] = true;
                c[i] = v;
            }
        }
        Self::new(label, dim_v, dim_z, c, gram)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim_v(&self) -> usize {
        self.dim_v
    }

    pub fn dim_z(&self) -> usize {
        self.dim_z
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn c(&self, a: usize, b: usize, m: usize) -> f64 {
        self.c[(a * self.dim_v + b) * self.dim_z + m]
    }

    /// Nonzero entries with a < b.
    pub fn triples(&self) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for a in 0..self.dim_v {
            for b in a + 1..self.dim_v {
                for m in 0..self.dim_z {
                    let v = self.c(a, b, m);
                    if v != 0.0 {
                        out.push((a, b, m, v));
                    }
                }
            }
        }
        out
    }

    /// `[x, y] ∈ z` for x, y in the original basis of v.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim_z];
        for a in 0..self.dim_v {
            for b in 0..self.dim_v {
                let w = x[a] * y[b];
                if w != 0.0 {
                    for (m, o) in out.iter_mut().enumerate() {
                        *o += w * self.c(a, b, m);
                    }
                }
            }
        }
        out
    }

    /// `(C_η)_{ab} = Σ_m η_m c[a][b][m]`, so that `η([x,y]) = xᵀ C_η y`.
    pub fn structure_matrix(&self, eta: &[f64]) -> DMatrix<f64> {
        assert_eq!(eta.len(), self.dim_z);
        DMatrix::from_fn(self.dim_v, self.dim_v, |a, b| {
            (0..self.dim_z).map(|m| eta[m] * self.c(a, b, m)).sum()
        })
    }

    /// `J_η` in the original basis of v: the endomorphism with
    /// `⟨J_η x, y⟩ = η([x, y])`, i.e. `J_η = −G⁻¹ C_η`.
    pub fn j_map(&self, eta: &[f64]) -> DMatrix<f64> {
        let c = self.structure_matrix(eta);
        let ginv_c = self.chol_inv.transpose() * (&self.chol_inv * c);
        -ginv_c
    }

    /// `J_η` in gram-orthonormal coordinates: `−L⁻¹ C_η L⁻ᵀ`, a skew matrix.
    pub fn j_orth(&self, eta: &[f64]) -> DMatrix<f64> {
        let c = self.structure_matrix(eta);
        -(&self.chol_inv * c * self.chol_inv.transpose())
    }

    /// Original coordinates → gram-orthonormal coordinates (`Lᵀx`).
    pub fn to_orth(&self, x: &[f64]) -> DVector<f64> {
        self.chol.transpose() * DVector::from_column_slice(x)
    }

    /// Gram-orthonormal coordinates → original coordinates.
    pub fn from_orth(&self, y: &DVector<f64>) -> Vec<f64> {
        (self.chol_inv.transpose() * y).iter().copied().collect()
    }

    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// `|x|` in the gram inner product.
    pub fn gram_norm(&self, x: &[f64]) -> f64 {
        self.to_orth(x).norm()
    }

    /// (topological dimension d, homogeneous dimension Q).
    pub fn dimensions(&self) -> (usize, usize) {
        (self.dim_v + self.dim_z, self.dim_v + 2 * self.dim_z)
    }

    /// `|(z,u)|_δ = |z| + |u|^{1/2}`.
    pub fn homogeneous_norm(&self, z: &[f64], u: &[f64]) -> f64 {
        self.gram_norm(z) + u.iter().map(|x| x * x).sum::<f64>().sqrt().sqrt()
    }
}

/// Orthogonal decomposition `v = v_1 ⊕ … ⊕ v_{d₁}` into coordinate blocks,
/// with ranks `r_j`. Blocks with `dim v_j > 2 r_j` come first; there are
/// `tdone` of them.
#[derive(Debug, Clone)]
pub struct LayerDecomposition {
    blocks: Vec<Vec<usize>>,
    ranks: Vec<usize>,
    tdone: usize,
    bases: Vec<DMatrix<f64>>,
}

impl LayerDecomposition {
    /// `blocks` are lists of original basis indices. They must partition
    /// `0..dim_v`, be gram-orthogonal to each other and satisfy
    /// `dim v_j ≥ 2 r_j`.
    pub fn new(g: &StratifiedGroup2, blocks: Vec<Vec<usize>>, ranks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() || blocks.len() != ranks.len() {
            return Err(Error::invalid("decomposition needs one rank per block"));
        }
        let mut seen = vec![false; g.dim_v()];
        for &i in blocks.iter().flatten() {
            if i >= g.dim_v() || seen[i] {
                return Err(Error::invalid(format!("block index {i} repeated or out of range")));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("blocks do not cover the first layer"));
        }
        let mut tdone = 0;
        let mut in_tail = false;
        for (b, &r) in blocks.iter().zip(&ranks) {
            if r == 0 || b.len() < 2 * r {
                return Err(Error::invalid(format!("block of dimension {} cannot carry rank {r}", b.len())));
            }
            if b.len() > 2 * r {
                if in_tail {
                    return Err(Error::invalid("blocks with dim v_j > 2 r_j must be listed first"));
                }
                tdone += 1;
            } else {
                in_tail = true;
            }
        }
        let lt = g.cholesky_factor().transpose();
        let bases: Vec<DMatrix<f64>> = blocks
            .iter()
            .map(|b| {
                let cols = DMatrix::from_fn(g.dim_v(), b.len(), |r, c| lt[(r, b[c])]);
                orthonormal_columns(&cols)
            })
            .collect();
        for i in 0..bases.len() {
            for j in i + 1..bases.len() {
                if (bases[i].transpose() * &bases[j]).norm() > 1e-10 {
                    return Err(Error::invalid(format!("blocks {i} and {j} are not orthogonal in the gram inner product")));
                }
            }
        }
        Ok(LayerDecomposition {
            blocks,
            ranks,
            tdone,
            bases,
        })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn tdone(&self) -> usize {
        self.tdone
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `dim v_j`.
    pub fn block_dim(&self, j: usize) -> usize {
        self.blocks[j].len()
    }

    /// `dim v_j − 2 r_j`, the dimension of `ker J_η ∩ v_j`.
    pub fn kernel_dim(&self, j: usize) -> usize {
        self.blocks[j].len() - 2 * self.ranks[j]
    }

    /// `|r| = Σ r_j`.
    pub fn total_rank(&self) -> usize {
        self.ranks.iter().sum()
    }

    /// Orthonormal basis of `v_j` in gram-orthonormal coordinates.
    pub fn basis(&self, j: usize) -> &DMatrix<f64> {
        &self.bases[j]
    }

    /// `P_j` in gram-orthonormal coordinates.
    pub fn projections(&self) -> Vec<DMatrix<f64>> {
        self.bases.iter().map(projector).collect()
    }
}

/// `b_j^η`, `P_j^η` and `P̄_j^η = P_j − P_j^η` at one η (orthonormal coordinates).
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eta: Vec<f64>,
    pub b: Vec<f64>,
    pub p_eta: Vec<DMatrix<f64>>,
    pub p_bar: Vec<DMatrix<f64>>,
    /// Orthonormal bases of the ranges of `P_j^η` and `P̄_j^η`.
    pub range_bases: Vec<DMatrix<f64>>,
    pub bar_bases: Vec<DMatrix<f64>>,
}

struct BlockAnalysis {
    residual: f64,
    trace: f64,
    vecs: DMatrix<f64>,
}

fn analyze(g: &StratifiedGroup2, dec: &LayerDecomposition, eta: &[f64]) -> Vec<BlockAnalysis> {
    let jo = g.j_orth(eta);
    let a = -(&jo * &jo);
    let jn = fro(&jo);
    let global = sym_eigen_desc(&a).0[0].max(0.0);
    (0..dec.len())
        .map(|j| {
            let basis = dec.basis(j);
            let p = projector(basis);
            let comm = if jn > 0.0 { fro(&(&jo * &p - &p * &jo)) / jn } else { 1.0 };
            let m = basis.transpose() * &a * basis;
            let (lam, vecs) = sym_eigen_desc(&m);
            let r2 = 2 * dec.ranks()[j];
            let top = lam[0];
            let residual = if top <= RANK_THRESHOLD * global || top <= 0.0 {
                1.0
            } else {
                let spread = (top - lam[r2 - 1]) / top;
                let excess = lam.get(r2).map_or(0.0, |x| x.abs() / top);
                comm.max(spread).max(excess)
            };
            BlockAnalysis {
                residual,
                trace: m.trace(),
                vecs: basis * vecs,
            }
        })
        .collect()
}

/// Spectral data at η. Fails on η = 0 and when some `−J_η² P_j` has more
/// than one nonzero eigenvalue, wrong rank, or does not commute with `P_j`
/// (beyond `tol`).
pub fn spectral_data(g: &StratifiedGroup2, dec: &LayerDecomposition, eta: &[f64], tol: f64) -> Result<SpectralData> {
    if eta.len() != g.dim_z() {
        return Err(Error::invalid("eta has the wrong dimension"));
    }
    if eta.iter().all(|&x| x == 0.0) {
        return Err(Error::invalid("eta = 0 is excluded"));
    }
    let blocks = analyze(g, dec, eta);
    let mut sd = SpectralData {
        eta: eta.to_vec(),
        b: Vec::new(),
        p_eta: Vec::new(),
        p_bar: Vec::new(),
        range_bases: Vec::new(),
        bar_bases: Vec::new(),
    };
    for (j, ba) in blocks.into_iter().enumerate() {
        if ba.residual > tol {
            return Err(Error::AssumptionViolated {
                eta: eta.to_vec(),
                block: j,
                spread: ba.residual,
            });
        }
        let r2 = 2 * dec.ranks()[j];
        let range = ba.vecs.columns(0, r2).into_owned();
        let bar = ba.vecs.columns(r2, ba.vecs.ncols() - r2).into_owned();
        sd.b.push((ba.trace / r2 as f64).sqrt());
        sd.p_eta.push(projector(&range));
        sd.p_bar.push(projector(&bar));
        sd.range_bases.push(range);
        sd.bar_bases.push(bar);
    }
    Ok(sd)
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockStat {
    pub block: usize,
    pub rank: usize,
    pub max_spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionAReport {
    pub group: String,
    pub holds: bool,
    pub samples_tested: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub failure_witness: Option<Vec<f64>>,
    pub per_block: Vec<BlockStat>,
    pub sampling: String,
}

/// Deterministic sample set on the unit sphere of z*: every coordinate
/// axis, every pairwise bisector `(e_a ± e_b)/√2`, then `n_random` seeded
/// uniform points.
pub fn sphere_samples(dim: usize, n_random: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for a in 0..dim {
        let mut e = vec![0.0; dim];
        e[a] = 1.0;
        out.push(e);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..dim {
        for b in a + 1..dim {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; dim];
                e[a] = s;
                e[b] = sign * s;
                out.push(e);
            }
        }
    }
    out.extend(random_sphere(dim, n_random, seed));
    out
}

/// `n` seeded uniform points on the unit sphere in ℝ^dim.
pub fn random_sphere(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-12 {
                break v.into_iter().map(|x| x / n).collect();
            }
        })
        .collect()
}

/// Sampling-based verification of the structural assumption: for every
/// sample η and block j, `J_η` commutes with `P_j` and `−J_η² P_j` has rank
/// `2 r_j` with a single nonzero eigenvalue. Homogeneity in η makes unit
/// vectors sufficient.
pub fn check_assumption_a(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    n_samples: usize,
    tol: f64,
    seed: u64,
    policy: ExecPolicy,
) -> AssumptionAReport {
    let samples = sphere_samples(g.dim_z(), n_samples, seed);
    let residuals: Vec<Vec<f64>> = policy.map(&samples, |eta| {
        analyze(g, dec, eta).into_iter().map(|b| b.residual).collect()
    });
    let mut per_block: Vec<BlockStat> = (0..dec.len())
        .map(|j| BlockStat {
            block: j,
            rank: dec.ranks()[j],
            max_spread: 0.0,
        })
        .collect();
    let mut max_residual = 0.0f64;
    let mut witness = None;
    for (eta, res) in samples.iter().zip(&residuals) {
        for (j, &r) in res.iter().enumerate() {
            per_block[j].max_spread = per_block[j].max_spread.max(r);
            max_residual = max_residual.max(r);
            if r > tol && witness.is_none() {
                witness = Some(eta.clone());
            }
        }
    }
    AssumptionAReport {
        group: g.label().to_string(),
        holds: max_residual <= tol,
        samples_tested: samples.len(),
        max_residual,
        tol,
        failure_witness: witness,
        per_block,
        sampling: format!(
            "{} axes, {} bisectors, {} seeded uniform sphere points (seed {seed})",
            g.dim_z(),
            g.dim_z() * g.dim_z().saturating_sub(1),
            n_samples
        ),
    }
}

/// Rank of `J_η` at each of `n` seeded random η.
pub fn sampled_j_ranks(g: &StratifiedGroup2, n: usize, seed: u64) -> Vec<usize> {
    random_sphere(g.dim_z(), n, seed)
        .iter()
        .map(|eta| rank(&g.j_orth(eta), RANK_THRESHOLD))
        .collect()
}

/// If `J_η` has rank 2 at 200 sampled η, the single-block decomposition with
/// r = 1 (the rank-2 promotion).
pub fn rank2_promotion(g: &StratifiedGroup2, seed: u64) -> Option<LayerDecomposition> {
    if sampled_j_ranks(g, 200, seed).iter().all(|&r| r == 2) {
        LayerDecomposition::new(g, vec![(0..g.dim_v()).collect()], vec![1]).ok()
    } else {
        None
    }
}

/// `min_ω Σ_j r_j b_j^ω` over sphere samples: the constant `C⁻¹` of the
/// spectral lower bound `Σ_j b_j^η(2n_j + r_j) + |μ| ≥ C⁻¹|η|`.
pub fn spectral_rate_min(g: &StratifiedGroup2, dec: &LayerDecomposition, n_random: usize, seed: u64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for eta in sphere_samples(g.dim_z(), n_random, seed) {
        let sd = spectral_data(g, dec, &eta, 1e-8)?;
        let rate: f64 = sd.b.iter().zip(dec.ranks()).map(|(b, &r)| r as f64 * b).sum();
        best = best.min(rate);
    }
    Ok(best)
}

#[cfg(test)]
mod tests;
