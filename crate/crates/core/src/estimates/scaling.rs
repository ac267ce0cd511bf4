use serde::Serialize;

use super::{sample_kernel, EstimateReport, LatticePlan};
use crate::error::{Error, Result};
use crate::group::{spectral_rate_min, LayerDecomposition, StratifiedGroup2};
use crate::kernel::{kernel_is_radial, LatticeKind, LatticeSpec, QuadratureSpec};
use crate::multiplier::{sobolev_norm, truncate_dyadic, vanishing_threshold, BumpSpec, Multiplier, SobolevGrid};
use crate::par::ExecPolicy;

/// Allowed shortfall of the fitted slope below `d₂ − 2r`.
pub const SLOPE_SLACK: f64 = 0.15;

#[derive(Debug, Clone, Serialize)]
pub struct ScalingPoint {
    pub m: f64,
    pub lhs: f64,
    /// `C M^{d₂−2r} ‖F‖²` with C fitted at the largest M.
    pub bound: f64,
    pub outer_share: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingInfo {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of log lhs against log M.
    pub slope: f64,
    pub reference_exponent: f64,
    pub one_sided_holds: bool,
    pub slope_holds: bool,
}

/// Lattice for `F_M`: z extents fixed, u extents given at M = 1 and scaled
/// by 1/M (the kernel of `F_M` lives at `|u| ~ 1/M`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingLattice {
    pub z_max: f64,
    pub z_step: f64,
    pub u_max: f64,
    pub u_step: f64,
    pub max_doublings: usize,
}

impl Default for ScalingLattice {
    fn default() -> Self {
        ScalingLattice {
            z_max: 16.0,
            z_step: 0.5,
            u_max: 40.0,
            u_step: 0.25,
            max_doublings: 2,
        }
    }
}

impl ScalingLattice {
    fn plan(&self, radial: bool, m: f64) -> LatticePlan {
        LatticePlan {
            spec: LatticeSpec {
                kind: if radial { LatticeKind::Radial } else { LatticeKind::Cartesian },
                z_max: self.z_max,
                z_step: self.z_step,
                u_max: self.u_max / m,
                u_step: self.u_step / m,
            },
            max_doublings: self.max_doublings,
        }
    }
}

/// `∫ ||u|^r K_{F_M}(z,u)|² dz du` and the outer-band share.
#[allow(clippy::too_many_arguments)]
pub fn scaling_lhs(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    f: &Multiplier,
    r: f64,
    m: f64,
    lattice: &ScalingLattice,
    quad: &QuadratureSpec,
    policy: ExecPolicy,
) -> Result<(f64, f64)> {
    let h = truncate_dyadic(f, m, BumpSpec::DyadicCutoffChi)?;
    let plan = lattice.plan(kernel_is_radial(g, dec, &h), m);
    let w2 = |_: &[f64], u: &[f64]| u.iter().map(|x| x * x).sum::<f64>().powf(r);
    let sk = sample_kernel(g, dec, &h, &plan, quad, policy, &[&w2])?;
    Ok((sk.integrals[0].value, sk.integrals[0].outer_share))
}

/// Dyadic scaling law: `lhs_M ≤ C M^{d₂−2r} ‖F‖²_{W_2^r}` for every M with C
/// fitted at the largest M, and the log-log slope of lhs_M at least
/// `d₂ − 2r − 0.15`.
#[allow(clippy::too_many_arguments)]
pub fn scaling_experiment(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    f: &Multiplier,
    r: f64,
    m_list: &[f64],
    lattice: &ScalingLattice,
    quad: &QuadratureSpec,
    policy: ExecPolicy,
) -> Result<EstimateReport> {
    let d2 = g.dim_z() as f64;
    if !(r >= 0.0 && r < d2 / 2.0) {
        return Err(Error::invalid(format!("r must lie in [0, {})", d2 / 2.0)));
    }
    if m_list.len() < 2 {
        return Err(Error::invalid("need at least two values of M"));
    }
    let threshold = vanishing_threshold(spectral_rate_min(g, dec, 64, 1)?, f.k_hi());
    if let Some(m) = m_list.iter().find(|&&m| !(m > 0.0 && m < threshold)) {
        return Err(Error::invalid(format!("M = {m} is not in (0, {threshold}), where F_M vanishes")));
    }
    let sob = sobolev_norm(f, r, SobolevGrid::default());
    let norm2 = sob.norm * sob.norm;
    if norm2 <= 0.0 {
        return Err(Error::invalid("F must be nonzero"));
    }
    let lhs: Vec<(f64, f64)> = m_list
        .iter()
        .map(|&m| scaling_lhs(g, dec, f, r, m, lattice, quad, policy))
        .collect::<Result<_>>()?;
    let e = d2 - 2.0 * r;
    let (i_max, &m_max) = m_list
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let c = lhs[i_max].0 / (m_max.powf(e) * norm2);
    let points: Vec<ScalingPoint> = m_list
        .iter()
        .zip(&lhs)
        .map(|(&m, &(v, share))| ScalingPoint {
            m,
            lhs: v,
            bound: c * m.powf(e) * norm2,
            outer_share: share,
        })
        .collect();
    let one_sided_holds = points.iter().all(|p| p.lhs <= p.bound);
    let slope = loglog_slope(&points.iter().map(|p| (p.m, p.lhs)).collect::<Vec<_>>());
    let slope_holds = slope >= e - SLOPE_SLACK;
    let mut rep = EstimateReport::new(f.tag());
    rep.lhs = lhs[i_max].0;
    rep.rhs = m_max.powf(e) * norm2;
    rep.constant = c;
    rep.passed = one_sided_holds && slope_holds;
    rep.notes.push(format!("cutoff chi: smooth dyadic partition on [1/2, 2]; M_max = {m_max}"));
    if sob.unresolved {
        rep.notes.push(format!("Sobolev norm unresolved (rel change {:e})", sob.rel_change));
    }
    rep.scaling = Some(ScalingInfo {
        points,
        slope,
        reference_exponent: e,
        one_sided_holds,
        slope_holds,
    });
    Ok(rep)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xy: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = xy.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
