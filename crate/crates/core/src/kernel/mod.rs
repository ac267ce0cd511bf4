//! Convolution kernels of joint multipliers by the Laguerre expansion.
//!
//! The ξ-integral over the range of each `P_j^η` is done in closed form:
//! on ℝ^{2r}, `∫ ℒ_n^{(r−1)}(|ξ|²/b) e^{i⟨ξ,w⟩} dξ = (πb)^r (−1)^n ℒ_n^{(r−1)}(b|w|²/4)`.
//! What remains is a radial integral over `ker J_η` (blocks with
//! `dim v_j > 2r_j`) and the η-integral in polar coordinates.

mod coefficients;
mod heat;
mod lattice;
mod plancherel;

pub use coefficients::*;
pub use heat::*;
pub use lattice::*;
pub use plancherel::*;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{spectral_data, LayerDecomposition, StratifiedGroup2};
use crate::multiplier::JointMultiplier;
use crate::par::{pairwise_sum, ExecPolicy};
use crate::quadrature::{legendre, log_linear_breaks, sphere_rule, CompositeRule};
use crate::special::{laguerre_fn_all, sphere_fourier};

/// Tolerance for the block analysis at quadrature directions.
const SPECTRAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Angular resolution of the sphere rule on z* (ignored when dim z = 1).
    pub n_angle: usize,
    /// Radial panels per octave of |η|.
    pub rho_per_octave: usize,
    /// Gauss–Legendre nodes per radial panel.
    pub rho_gauss: usize,
    /// Largest radial panel; 0 picks `min(0.05, 1/max|u|)` from the points.
    pub rho_max_width: f64,
    /// `ρ_min = ρ_max · rho_min_ratio` when the symbol reaches η = 0.
    pub rho_min_ratio: f64,
    /// Panels and nodes per panel of the radial rule on `ker J_η`.
    pub s_panels: usize,
    pub s_gauss: usize,
    /// Allowed refinement disagreement, relative to the largest |K| on the grid.
    pub tail_tol: f64,
    /// Evaluate twice (this spec and `refined()`) and report the difference.
    pub refine: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            n_angle: 24,
            rho_per_octave: 8,
            rho_gauss: 8,
            rho_max_width: 0.0,
            rho_min_ratio: 1e-3,
            s_panels: 24,
            s_gauss: 8,
            tail_tol: 1e-3,
            refine: true,
        }
    }
}

impl QuadratureSpec {
    /// Doubles every node count and halves the small ball.
    pub fn refined(&self) -> Self {
        QuadratureSpec {
            n_angle: 2 * self.n_angle,
            rho_gauss: 2 * self.rho_gauss,
            rho_min_ratio: 0.5 * self.rho_min_ratio,
            s_gauss: 2 * self.s_gauss,
            refine: false,
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_angle < 2 || self.rho_gauss < 2 || self.s_gauss < 2 || self.rho_per_octave < 1 || self.s_panels < 1 {
            return Err(Error::invalid("quadrature node counts must be at least 2"));
        }
        if !(self.rho_min_ratio > 0.0 && self.rho_min_ratio < 1.0) {
            return Err(Error::invalid("rho_min_ratio must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// A point `(z, u)` of G in the coordinates of the group (z in the basis of
/// v, u in the basis of z).
pub type Point = (Vec<f64>, Vec<f64>);

#[derive(Debug, Clone, Serialize)]
pub struct KernelGrid {
    pub group: String,
    pub multiplier: String,
    pub quad: QuadratureSpec,
    pub points: Vec<Point>,
    pub values: Vec<Complex64>,
    /// |fine − coarse| per point (0 without refinement).
    pub est_error: Vec<f64>,
    /// Largest contribution of the small ball |η| < ρ_min, relative to max |K|.
    pub small_ball: f64,
}

impl KernelGrid {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Unit-direction spectral data, reused along the ray.
pub(crate) struct Direction {
    pub omega: Vec<f64>,
    pub weight: f64,
    pub b_unit: Vec<f64>,
    pub range_bases: Vec<DMatrix<f64>>,
    pub bar_bases: Vec<DMatrix<f64>>,
}

pub(crate) struct EtaNode {
    pub dir: usize,
    pub rho: f64,
    /// Includes the sphere weight and the Jacobian ρ^{d₂−1}.
    pub weight: f64,
    /// Radius of the small ball this node stands for (0 for ordinary nodes).
    pub ball: f64,
}

pub(crate) struct EtaRule {
    pub dirs: Vec<Direction>,
    pub nodes: Vec<EtaNode>,
}

pub(crate) fn eta_rule(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    h: &JointMultiplier,
    quad: &QuadratureSpec,
    u_max: f64,
) -> Result<EtaRule> {
    let d2 = g.dim_z();
    let mut dirs = Vec::new();
    for (omega, weight) in sphere_rule(d2, quad.n_angle) {
        let sd = spectral_data(g, dec, &omega, SPECTRAL_TOL)?;
        dirs.push(Direction {
            omega,
            weight,
            b_unit: sd.b,
            range_bases: sd.range_bases,
            bar_bases: sd.bar_bases,
        });
    }
    let width = if quad.rho_max_width > 0.0 {
        quad.rho_max_width
    } else {
        0.05f64.min(1.0 / u_max.max(1e-9))
    };
    let base = legendre(quad.rho_gauss);
    let mut nodes = Vec::new();
    for (k, dir) in dirs.iter().enumerate() {
        let Some((lo, hi)) = h.rho_range(&dir.b_unit, dec.ranks()) else {
            continue;
        };
        let lo_eff = if lo > 0.0 { lo } else { hi * quad.rho_min_ratio };
        let rule = CompositeRule::from_breaks(&log_linear_breaks(lo_eff, hi, quad.rho_per_octave, width), &base);
        for (&rho, &w) in rule.nodes.iter().zip(&rule.weights) {
            nodes.push(EtaNode {
                dir: k,
                rho,
                weight: dir.weight * w * rho.powi(d2 as i32 - 1),
                ball: 0.0,
            });
        }
        if lo == 0.0 {
            // profile frozen at the radial centroid of the ball; the phase is
            // integrated exactly in `ball_weight`
            nodes.push(EtaNode {
                dir: k,
                rho: lo_eff * d2 as f64 / (d2 as f64 + 1.0),
                weight: dir.weight,
                ball: lo_eff,
            });
        }
    }
    Ok(EtaRule { dirs, nodes })
}

/// `w ∫_0^R ρ^{d−1} e^{iρt} dρ`, the ball node's weight at phase rate t.
fn ball_weight(w: f64, radius: f64, d: usize, t: f64) -> Complex64 {
    let rule = legendre(16);
    let half = 0.5 * radius;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
        let rho = half * (x + 1.0);
        acc += Complex64::from_polar(wx * half * rho.powi(d as i32 - 1), rho * t);
    }
    acc * w
}

/// Radial rule on [0, √K] for the `ker J_η` integrals.
pub(crate) fn s_rule(quad: &QuadratureSpec, k_cap: f64) -> CompositeRule {
    let s_max = k_cap.max(0.0).sqrt();
    let breaks: Vec<f64> = (0..=quad.s_panels).map(|i| s_max * i as f64 / quad.s_panels as f64).collect();
    CompositeRule::from_breaks(&breaks, &legendre(quad.s_gauss))
}

/// Sums `Σ_n [Π_j level_w[j][n_j]] ∫ value(λ(n, s)) Π_{j<tdone} c_j(s_j) ds`
/// over the finite lattice where the symbol can be nonzero.
pub(crate) struct LevelSum<'a> {
    pub h: &'a JointMultiplier,
    pub b: &'a [f64],
    pub ranks: &'a [usize],
    pub tdone: usize,
    pub level_w: &'a [Vec<f64>],
    /// `(s², coefficient)` per block `j < tdone`, sorted by s.
    pub s_nodes: &'a [Vec<(f64, f64)>],
    /// Use `|H|²` instead of H.
    pub squared: bool,
}

impl LevelSum<'_> {
    fn value(&self, f: &crate::multiplier::Multiplier, lam: f64) -> Complex64 {
        let v = f.eval(lam);
        if self.squared {
            Complex64::new(v.norm_sqr(), 0.0)
        } else {
            v
        }
    }

    pub fn eval(&self) -> Complex64 {
        match self.h {
            JointMultiplier::Spectral(f) | JointMultiplier::Truncated { f, .. } => {
                let d1 = self.b.len();
                let mut rest = vec![0.0; d1 + 1];
                for j in (0..d1).rev() {
                    rest[j] = rest[j + 1] + self.ranks[j] as f64 * self.b[j];
                }
                self.rec(f, 0, 0.0, 1.0, &rest)
            }
            JointMultiplier::Tensor(fs) => {
                let mut prod = Complex64::new(1.0, 0.0);
                for (j, f) in fs.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (n, &lw) in self.level_w[j].iter().enumerate() {
                        let base = (2 * n + self.ranks[j]) as f64 * self.b[j];
                        if base > f.k_hi() {
                            break;
                        }
                        if j < self.tdone {
                            for &(s2, c) in &self.s_nodes[j] {
                                if base + s2 > f.k_hi() {
                                    break;
                                }
                                acc += self.value(f, base + s2) * (lw * c);
                            }
                        } else {
                            acc += self.value(f, base) * lw;
                        }
                    }
                    prod *= acc;
                }
                prod
            }
        }
    }

    fn rec(&self, f: &crate::multiplier::Multiplier, j: usize, lam: f64, w: f64, rest: &[f64]) -> Complex64 {
        if j == self.b.len() {
            return self.value(f, lam) * w;
        }
        let k_hi = f.k_hi();
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, &lw) in self.level_w[j].iter().enumerate() {
            let base = lam + (2 * n + self.ranks[j]) as f64 * self.b[j];
            if base + rest[j + 1] > k_hi {
                break;
            }
            if j < self.tdone {
                for &(s2, c) in &self.s_nodes[j] {
                    if base + s2 + rest[j + 1] > k_hi {
                        break;
                    }
                    acc += self.rec(f, j + 1, base + s2, w * lw * c, rest);
                }
            } else {
                acc += self.rec(f, j + 1, base, w * lw, rest);
            }
        }
        acc
    }
}

/// Largest level index per block that can carry a nonzero symbol.
pub(crate) fn level_caps(h: &JointMultiplier, b: &[f64], ranks: &[usize]) -> Vec<usize> {
    let caps = h.block_caps(b.len());
    let base: f64 = b.iter().zip(ranks).map(|(b, &r)| r as f64 * b).sum();
    (0..b.len())
        .map(|j| {
            let budget = if h.is_tensor() {
                caps[j] - ranks[j] as f64 * b[j]
            } else {
                caps[j] - base
            };
            if budget < 0.0 {
                0
            } else {
                (budget / (2.0 * b[j])).floor() as usize
            }
        })
        .collect()
}

/// η-dependent factor of a truncated multiplier.
pub(crate) fn eta_factor(h: &JointMultiplier, eta_norm: f64) -> f64 {
    match h {
        JointMultiplier::Truncated { m, chi, .. } => chi.eval(eta_norm / m),
        _ => 1.0,
    }
}

/// Profile values split into real and imaginary parts for [`cdot`].
struct Profile {
    re: Vec<f64>,
    im: Vec<f64>,
}

/// `Σ_k (ar + i ai)_k (br + i bi)_k` with eight fixed accumulator lanes, so
/// the result does not depend on the thread count.
fn cdot(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> Complex64 {
    const L: usize = 8;
    let (mut re, mut im) = ([0.0f64; L], [0.0f64; L]);
    let n = ar.len() / L * L;
    for k in (0..n).step_by(L) {
        for l in 0..L {
            let (a, b, c, d) = (ar[k + l], ai[k + l], br[k + l], bi[k + l]);
            re[l] += a * c - b * d;
            im[l] += a * d + b * c;
        }
    }
    for k in n..ar.len() {
        re[0] += ar[k] * br[k] - ai[k] * bi[k];
        im[0] += ar[k] * bi[k] + ai[k] * br[k];
    }
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

fn orth_point(g: &StratifiedGroup2, z: &[f64]) -> DVector<f64> {
    g.to_orth(z)
}

/// `|Bᵀ z|` for an orthonormal basis B given by columns.
fn proj_norm(basis: &DMatrix<f64>, z: &DVector<f64>) -> f64 {
    if basis.ncols() == 0 {
        0.0
    } else {
        (basis.transpose() * z).norm()
    }
}

fn profile(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    h: &JointMultiplier,
    rule: &EtaRule,
    srule: &CompositeRule,
    z: &[f64],
) -> Profile {
    let zo = orth_point(g, z);
    let ranks = dec.ranks();
    let tdone = dec.tdone();
    let d1 = dec.len();
    let r_tot: usize = ranks.iter().sum();
    let (dim_v, dim_z) = (g.dim_v(), g.dim_z());
    let pref = 2f64.powi(r_tot as i32) / (2.0 * std::f64::consts::PI).powi((dim_v + dim_z) as i32);

    // per direction: |P_j z|² and the s-rule coefficients on ker J_η
    let geo: Vec<(Vec<f64>, Vec<Vec<(f64, f64)>>)> = rule
        .dirs
        .iter()
        .map(|d| {
            let zsq: Vec<f64> = d.range_bases.iter().map(|bs| proj_norm(bs, &zo).powi(2)).collect();
            let s_nodes: Vec<Vec<(f64, f64)>> = (0..tdone)
                .map(|j| {
                    let q = dec.kernel_dim(j);
                    let zbar = proj_norm(&d.bar_bases[j], &zo);
                    srule
                        .nodes
                        .iter()
                        .zip(&srule.weights)
                        .map(|(&s, &w)| (s * s, w * s.powi(q as i32 - 1) * sphere_fourier(q, s * zbar)))
                        .collect()
                })
                .collect();
            (zsq, s_nodes)
        })
        .collect();

    let values: Vec<Complex64> = rule
        .nodes
        .iter()
        .map(|node| {
            let dir = &rule.dirs[node.dir];
            let chi = eta_factor(h, node.rho);
            if chi == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let b: Vec<f64> = dir.b_unit.iter().map(|x| x * node.rho).collect();
            let caps = level_caps(h, &b, ranks);
            let (zsq, s_nodes) = &geo[node.dir];
            let level_w: Vec<Vec<f64>> = (0..d1)
                .map(|j| {
                    let mut v = laguerre_fn_all(caps[j], ranks[j] as u32 - 1, b[j] * zsq[j] / 4.0);
                    for (n, x) in v.iter_mut().enumerate() {
                        if n % 2 == 1 {
                            *x = -*x;
                        }
                    }
                    v
                })
                .collect();
            let sum = LevelSum {
                h,
                b: &b,
                ranks,
                tdone,
                level_w: &level_w,
                s_nodes,
                squared: false,
            }
            .eval();
            let vol: f64 = b
                .iter()
                .zip(ranks)
                .map(|(bj, &r)| (std::f64::consts::PI * bj).powi(r as i32))
                .product();
            sum * (pref * vol * chi)
        })
        .collect();
    Profile {
        re: values.iter().map(|v| v.re).collect(),
        im: values.iter().map(|v| v.im).collect(),
    }
}

fn max_abs_u(points: &[Point]) -> f64 {
    points
        .iter()
        .map(|(_, u)| u.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn eval_once(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    h: &JointMultiplier,
    points: &[Point],
    quad: &QuadratureSpec,
    policy: ExecPolicy,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let rule = eta_rule(g, dec, h, quad, max_abs_u(points))?;
    let k_cap = h.block_caps(dec.len()).into_iter().fold(0.0, f64::max);
    let srule = s_rule(quad, k_cap);

    // one profile per distinct z
    let mut index: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut zs: Vec<&[f64]> = Vec::new();
    let slot: Vec<usize> = points
        .iter()
        .map(|(z, _)| {
            let key: Vec<u64> = z.iter().map(|x| x.to_bits()).collect();
            *index.entry(key).or_insert_with(|| {
                zs.push(z);
                zs.len() - 1
            })
        })
        .collect();
    let profiles = policy.map(&zs, |z| profile(g, dec, h, &rule, &srule, z));

    // one phase vector per distinct u, shared by every z
    let d2 = g.dim_z();
    let mut by_u: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for (i, (_, u)) in points.iter().enumerate() {
        by_u.entry(u.iter().map(|x| x.to_bits()).collect()).or_default().push(i);
    }
    let groups: Vec<Vec<usize>> = by_u.into_values().collect();
    let ball_nodes: Vec<usize> = (0..rule.nodes.len()).filter(|&k| rule.nodes[k].ball > 0.0).collect();
    let per_group = policy.map(&groups, |idx| {
        let u = &points[idx[0]].1;
        let (mut pr, mut pi) = (Vec::with_capacity(rule.nodes.len()), Vec::with_capacity(rule.nodes.len()));
        for node in &rule.nodes {
            let dir = &rule.dirs[node.dir];
            let t: f64 = dir.omega.iter().zip(u).map(|(o, x)| o * x).sum();
            let w = if node.ball > 0.0 {
                ball_weight(node.weight, node.ball, d2, t)
            } else {
                Complex64::from_polar(node.weight, t * node.rho)
            };
            pr.push(w.re);
            pi.push(w.im);
        }
        idx.iter()
            .map(|&i| {
                let p = &profiles[slot[i]];
                let total = cdot(&pr, &pi, &p.re, &p.im);
                let ball = ball_nodes
                    .iter()
                    .map(|&k| Complex64::new(pr[k], pi[k]) * Complex64::new(p.re[k], p.im[k]))
                    .sum::<Complex64>();
                (i, total, ball)
            })
            .collect::<Vec<_>>()
    });
    let mut out = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); points.len()];
    for (i, total, ball) in per_group.into_iter().flatten() {
        out[i] = (total, ball);
    }
    Ok(out.into_iter().unzip())
}

/// Kernel of `H(L⃗, U⃗)` at the given points, with two-level refinement when
/// `quad.refine` is set. Fails with an accuracy error when the two levels
/// disagree by more than `tail_tol · max|K|`.
pub fn eval_kernel(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    h: &JointMultiplier,
    points: &[Point],
    quad: &QuadratureSpec,
    policy: ExecPolicy,
) -> Result<KernelGrid> {
    quad.validate()?;
    for (z, u) in points {
        if z.len() != g.dim_v() || u.len() != g.dim_z() {
            return Err(Error::invalid("point has the wrong dimension"));
        }
    }
    let grid = |values: Vec<Complex64>, est_error: Vec<f64>, small_ball: f64| KernelGrid {
        group: g.label().to_string(),
        multiplier: multiplier_tag(h),
        quad: *quad,
        points: points.to_vec(),
        values,
        est_error,
        small_ball,
    };
    if h.is_zero() {
        return Ok(grid(vec![Complex64::new(0.0, 0.0); points.len()], vec![0.0; points.len()], 0.0));
    }
    let (fine, ball) = if quad.refine {
        eval_once(g, dec, h, points, &quad.refined(), policy)?
    } else {
        eval_once(g, dec, h, points, quad, policy)?
    };
    let scale = fine.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let small_ball = if scale > 0.0 {
        ball.iter().map(|v| v.norm()).fold(0.0, f64::max) / scale
    } else {
        0.0
    };
    if !quad.refine {
        return Ok(grid(fine, vec![0.0; points.len()], small_ball));
    }
    let (coarse, _) = eval_once(g, dec, h, points, quad, policy)?;
    let est: Vec<f64> = fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).collect();
    let (worst, &err) = est
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    if err > quad.tail_tol * scale {
        return Err(Error::Accuracy {
            what: format!("kernel refinement at point {worst} exceeds tail_tol {}", quad.tail_tol),
            coarse: coarse[worst].norm(),
            fine: fine[worst].norm(),
        });
    }
    Ok(grid(fine, est, small_ball))
}

pub(crate) fn multiplier_tag(h: &JointMultiplier) -> String {
    match h {
        JointMultiplier::Spectral(f) => f.tag(),
        JointMultiplier::Truncated { f, m, .. } => format!("{}*chi(|eta|/{m})", f.tag()),
        JointMultiplier::Tensor(fs) => fs.iter().map(|f| f.tag()).collect::<Vec<_>>().join("(x)"),
    }
}
