//! Weighted L² estimates of kernels, the dyadic scaling law, family
//! uniformity checks, the L¹ chain and tensor factorization on products.

mod chain;
mod family;
mod product;
mod scaling;

pub use chain::*;
pub use family::*;
pub use product::*;
pub use scaling::*;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{LayerDecomposition, StratifiedGroup2};
use crate::kernel::{eval_kernel, kernel_is_radial, weighted_sum, KernelGrid, Lattice, LatticeKind, LatticeSpec, QuadratureSpec};
use crate::multiplier::JointMultiplier;
use crate::par::ExecPolicy;

/// Largest share of a weighted integral allowed in the outer band of the lattice.
pub const OUTER_SHARE_LIMIT: f64 = 0.05;

/// One inequality of the weight recipe, with both sides as evaluated.
#[derive(Debug, Clone, Serialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Inequality {
    fn greater(name: &str, lhs: f64, rhs: f64) -> Self {
        Inequality {
            name: name.to_string(),
            lhs,
            rhs,
            holds: lhs > rhs,
        }
    }
}

/// Parameters of the weight `w_s` picked from s.
#[derive(Debug, Clone, Serialize)]
pub struct WsRecipe {
    pub s: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Open interval r is chosen from (its midpoint).
    pub r_interval: (f64, f64),
    pub eps: f64,
    pub inequalities: Vec<Inequality>,
}

/// `w(z,u) = (1 + |(z,u)|_δ)^α (1 + |u|)^r`.
#[derive(Debug, Clone, Serialize)]
pub struct WeightSpec {
    pub alpha: f64,
    pub r: f64,
    pub recipe: Option<WsRecipe>,
}

impl WeightSpec {
    pub fn new(alpha: f64, r: f64, dim_z: usize) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("weight exponent alpha must be finite and >= 0"));
        }
        if !(r >= 0.0 && r < dim_z as f64 / 2.0) {
            return Err(Error::invalid(format!("weight exponent r must lie in [0, {})", dim_z as f64 / 2.0)));
        }
        Ok(WeightSpec { alpha, r, recipe: None })
    }

    pub fn unit() -> Self {
        WeightSpec {
            alpha: 0.0,
            r: 0.0,
            recipe: None,
        }
    }

    /// The weight `w_s` for `s > (dim G)/2`: r at the midpoint of
    /// `((dim G)/2 + d₂/2 − s, d₂/2)` (clipped below at 0), then
    /// `α₁ = dim v/2 + ε`, `α₂ = d₂ − 2r + ε`, `α = α₁ + α₂`.
    ///
    /// The system `r < d₂/2`, `s − r > α₁ + α₂ > dim v/2 + d₂ − 2r` forces
    /// `dim v/2 + d₂ − s < r < d₂/2`, which is empty exactly when
    /// `s ≤ dim v/2 + d₂/2 = (dim G)/2`.
    pub fn w_s(g: &StratifiedGroup2, s: f64) -> Result<Self> {
        let (nv, nz) = (g.dim_v() as f64, g.dim_z() as f64);
        let lower = nv / 2.0 + nz - s;
        let upper = nz / 2.0;
        if !(s.is_finite() && lower < upper) {
            return Err(Error::InfeasibleWeight {
                s,
                violated: format!(
                    "need dim v/2 + d2 - s < r < d2/2, i.e. {lower} < r < {upper}; empty since s <= (dim G)/2 = {}",
                    (nv + nz) / 2.0
                ),
            });
        }
        let lo = lower.max(0.0);
        let r = 0.5 * (lo + upper);
        let eps = (s - r - nv / 2.0 - nz + 2.0 * r) / 3.0;
        let alpha1 = nv / 2.0 + eps;
        let alpha2 = nz - 2.0 * r + eps;
        let inequalities = vec![
            Inequality::greater("r > dim G/2 + d2/2 - s", r, (nv + nz) / 2.0 + nz / 2.0 - s),
            Inequality::greater("d2/2 > r", upper, r),
            Inequality::greater("alpha1 > dim v/2", alpha1, nv / 2.0),
            Inequality::greater("alpha2 > d2 - 2r", alpha2, nz - 2.0 * r),
            Inequality::greater("s - r > alpha1 + alpha2", s - r, alpha1 + alpha2),
        ];
        if let Some(bad) = inequalities.iter().find(|i| !i.holds) {
            return Err(Error::InfeasibleWeight {
                s,
                violated: bad.name.clone(),
            });
        }
        Ok(WeightSpec {
            alpha: alpha1 + alpha2,
            r,
            recipe: Some(WsRecipe {
                s,
                alpha1,
                alpha2,
                r_interval: (lo, upper),
                eps,
                inequalities,
            }),
        })
    }

    pub fn eval(&self, g: &StratifiedGroup2, z: &[f64], u: &[f64]) -> f64 {
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        (1.0 + g.homogeneous_norm(z, u)).powf(self.alpha) * (1.0 + nu).powf(self.r)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedL2 {
    /// `∫ |w K|²` by the lattice rule.
    pub value: f64,
    /// Share of `value` in the outer band of the lattice.
    pub outer_share: f64,
}

/// `∫ |w K|²` over the lattice the grid was sampled on. Fails with a
/// widen-lattice error when the outer band holds more than 5%.
pub fn weighted_l2(g: &StratifiedGroup2, lat: &Lattice, grid: &KernelGrid, w: &WeightSpec) -> Result<WeightedL2> {
    weighted_l2_by(lat, grid, |z, u| w.eval(g, z, u).powi(2))
}

pub(crate) fn weighted_l2_by(lat: &Lattice, grid: &KernelGrid, w2: impl Fn(&[f64], &[f64]) -> f64) -> Result<WeightedL2> {
    if grid.values.len() != lat.points.len() {
        return Err(Error::invalid("kernel grid and lattice differ in size"));
    }
    let (value, outer) = weighted_sum(lat, grid, 2.0, w2);
    let outer_share = if value > 0.0 { outer / value } else { 0.0 };
    if outer_share > OUTER_SHARE_LIMIT {
        return Err(Error::WidenLattice {
            share: outer_share,
            limit: OUTER_SHARE_LIMIT,
        });
    }
    Ok(WeightedL2 { value, outer_share })
}

/// Lattice and doubling policy for experiments.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LatticePlan {
    pub spec: LatticeSpec,
    /// How often the extents may be doubled after a widen-lattice error.
    pub max_doublings: usize,
}

impl LatticePlan {
    /// Radial when the kernel allows it, otherwise Cartesian.
    pub fn for_group(g: &StratifiedGroup2, dec: &LayerDecomposition, h: &JointMultiplier, z_max: f64, u_max: f64) -> Self {
        let radial = kernel_is_radial(g, dec, h);
        LatticePlan {
            spec: LatticeSpec {
                kind: if radial { LatticeKind::Radial } else { LatticeKind::Cartesian },
                z_max,
                z_step: if radial { 0.5 } else { 0.25 },
                u_max,
                u_step: 0.2,
            },
            max_doublings: 2,
        }
    }
}

/// A kernel sampled on a lattice wide enough for the weights `w2`.
#[derive(Debug, Clone)]
pub struct SampledKernel {
    pub lattice: Lattice,
    pub grid: KernelGrid,
    /// One entry per weight.
    pub integrals: Vec<WeightedL2>,
}

/// A squared weight `(z, u) ↦ w(z, u)²`.
pub type Weight2<'a> = dyn Fn(&[f64], &[f64]) -> f64 + Sync + 'a;

/// Samples the kernel of `h` and evaluates `∫ w2_k |K|²` for every weight,
/// doubling the lattice extents until every outer share is below 5%.
pub fn sample_kernel(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    h: &JointMultiplier,
    plan: &LatticePlan,
    quad: &QuadratureSpec,
    policy: ExecPolicy,
    w2: &[&Weight2<'_>],
) -> Result<SampledKernel> {
    let mut spec = plan.spec;
    let mut attempt = 0;
    loop {
        let lattice = Lattice::new(g, spec)?;
        let grid = eval_kernel(g, dec, h, &lattice.points, quad, policy)?;
        let results: Result<Vec<WeightedL2>> = w2.iter().map(|w| weighted_l2_by(&lattice, &grid, w)).collect();
        match results {
            Ok(integrals) => return Ok(SampledKernel { lattice, grid, integrals }),
            Err(e @ Error::WidenLattice { .. }) => {
                if attempt == plan.max_doublings {
                    return Err(e);
                }
                attempt += 1;
                spec.z_max *= 2.0;
                spec.u_max *= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Result of an estimate experiment.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`.
    pub constant: f64,
    pub family_tag: String,
    pub scaling: Option<ScalingInfo>,
    /// Per-member results of family checks.
    pub members: Vec<MemberResult>,
    /// Largest over smallest ratio in a family check.
    pub spread: Option<f64>,
    pub weight: Option<WeightSpec>,
    pub chain: Option<ChainInfo>,
    pub product: Option<ProductInfo>,
    /// Whether the experiment's own pass criterion held.
    pub passed: bool,
    pub notes: Vec<String>,
}

impl EstimateReport {
    fn new(family_tag: impl Into<String>) -> Self {
        EstimateReport {
            lhs: 0.0,
            rhs: 0.0,
            constant: 0.0,
            family_tag: family_tag.into(),
            scaling: None,
            members: Vec::new(),
            spread: None,
            weight: None,
            chain: None,
            product: None,
            passed: false,
            notes: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests;
