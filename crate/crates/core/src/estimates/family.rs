use serde::Serialize;

use super::{sample_kernel, EstimateReport, LatticePlan, WeightSpec};
use crate::error::{Error, Result};
use crate::group::{LayerDecomposition, StratifiedGroup2};
use crate::kernel::QuadratureSpec;
use crate::multiplier::{sobolev_norm, JointMultiplier, Multiplier, SobolevGrid};
use crate::par::ExecPolicy;

/// Acceptance factor for the spread of lhs/rhs across a family.
pub const FAMILY_SPREAD_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct MemberResult {
    pub tag: String,
    pub lhs: f64,
    /// Squared Sobolev norm.
    pub rhs: f64,
    pub ratio: f64,
    pub outer_share: f64,
    pub lattice_z_max: f64,
    pub lattice_u_max: f64,
}

/// Eight bumps sharing the support [1, 4]: three centers, three widths and
/// three oscillation rates around the middle one.
pub fn standard_family() -> Vec<Multiplier> {
    let bump = |c: f64, w: f64| Multiplier::gaussian_bump(c, w, [1.0, 4.0]).expect("valid bump");
    let mid = bump(2.5, 0.2);
    vec![
        bump(1.75, 0.2),
        mid.clone(),
        bump(3.25, 0.2),
        bump(2.5, 0.05),
        bump(2.5, 0.6),
        mid.clone().oscillating(2.0).expect("valid"),
        mid.clone().oscillating(4.0).expect("valid"),
        mid.oscillating(8.0).expect("valid"),
    ]
}

/// Ratios `∫ |w K_{F(L)}|² / ‖F‖²_{W_2^β}` across a family, with their spread.
#[allow(clippy::too_many_arguments)]
fn family_check(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    family: &[Multiplier],
    w: &WeightSpec,
    beta: f64,
    plan: &LatticePlan,
    quad: &QuadratureSpec,
    policy: ExecPolicy,
) -> Result<EstimateReport> {
    let Some(first) = family.first() else {
        return Err(Error::invalid("family is empty"));
    };
    let (lo, hi) = (first.k_lo(), first.k_hi());
    for f in family {
        if (f.k_lo() - lo).abs() > 1e-12 || (f.k_hi() - hi).abs() > 1e-12 {
            return Err(Error::invalid("all family members must share one support interval"));
        }
    }
    let members: Vec<MemberResult> = family
        .iter()
        .map(|f| {
            let sob = sobolev_norm(f, beta, SobolevGrid::default());
            if !(sob.norm > 0.0) {
                return Err(Error::invalid(format!("{} has zero Sobolev norm", f.tag())));
            }
            let h = JointMultiplier::Spectral(f.clone());
            let w2 = |z: &[f64], u: &[f64]| w.eval(g, z, u).powi(2);
            let sk = sample_kernel(g, dec, &h, plan, quad, policy, &[&w2])?;
            let lhs = sk.integrals[0].value;
            let rhs = sob.norm * sob.norm;
            Ok(MemberResult {
                tag: f.tag(),
                lhs,
                rhs,
                ratio: lhs / rhs,
                outer_share: sk.integrals[0].outer_share,
                lattice_z_max: sk.lattice.spec.z_max,
                lattice_u_max: sk.lattice.spec.u_max,
            })
        })
        .collect::<Result<_>>()?;
    let max = members.iter().map(|m| m.ratio).fold(0.0, f64::max);
    let min = members.iter().map(|m| m.ratio).fold(f64::INFINITY, f64::min);
    let worst = members.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio)).expect("nonempty");
    let spread = max / min;
    let mut rep = EstimateReport::new(format!("family of {} on [{lo}, {hi}]", family.len()));
    rep.lhs = worst.lhs;
    rep.rhs = worst.rhs;
    rep.constant = max;
    rep.spread = Some(spread);
    rep.passed = spread.is_finite() && spread <= FAMILY_SPREAD_LIMIT;
    rep.weight = Some(w.clone());
    rep.notes.push(format!("Sobolev order {beta}; spread limit {FAMILY_SPREAD_LIMIT}"));
    rep.members = members;
    Ok(rep)
}

/// `∫ |(1+|u|)^r K_{F(L)}|² ≤ C ‖F‖²_{W_2^r}` across a family sharing one support.
pub fn weighted_plancherel_check(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    family: &[Multiplier],
    r: f64,
    plan: &LatticePlan,
    quad: &QuadratureSpec,
    policy: ExecPolicy,
) -> Result<EstimateReport> {
    let w = WeightSpec::new(0.0, r, g.dim_z())?;
    family_check(g, dec, family, &w, r, plan, quad, policy)
}

/// `∫ |(1+|(z,u)|_δ)^α (1+|u|)^r K_{F(L)}|² ≤ C ‖F‖²_{W_2^β}` for `β > α + r`.
#[allow(clippy::too_many_arguments)]
pub fn interpolated_weight_check(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    family: &[Multiplier],
    alpha: f64,
    r: f64,
    beta: f64,
    plan: &LatticePlan,
    quad: &QuadratureSpec,
    policy: ExecPolicy,
) -> Result<EstimateReport> {
    if !(beta > alpha + r) {
        return Err(Error::invalid(format!("need beta > alpha + r, got {beta} <= {}", alpha + r)));
    }
    let w = WeightSpec::new(alpha, r, g.dim_z())?;
    family_check(g, dec, family, &w, beta, plan, quad, policy)
}
