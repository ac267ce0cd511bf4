//! Spectral side of the Plancherel identity.

use serde::Serialize;

use super::{eta_factor, eta_rule, level_caps, s_rule, LevelSum, QuadratureSpec};
use crate::error::{Error, Result};
use crate::group::{LayerDecomposition, StratifiedGroup2};
use crate::multiplier::JointMultiplier;
use crate::quadrature::sphere_area;
use crate::special::binomial;

#[derive(Debug, Clone, Serialize)]
pub struct PlancherelNorm {
    pub norm: f64,
    /// Same quantity at the unrefined quadrature.
    pub coarse: f64,
}

fn spectral_norm_once(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    h: &JointMultiplier,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let rule = eta_rule(g, dec, h, quad, 0.0)?;
    let k_cap = h.block_caps(dec.len()).into_iter().fold(0.0, f64::max);
    let srule = s_rule(quad, k_cap);
    let ranks = dec.ranks();
    let tdone = dec.tdone();
    // ρ ∈ ker J_η in polar coordinates per block
    let s_nodes: Vec<Vec<(f64, f64)>> = (0..tdone)
        .map(|j| {
            let q = dec.kernel_dim(j);
            let area = sphere_area(q);
            srule
                .nodes
                .iter()
                .zip(&srule.weights)
                .map(|(&s, &w)| (s * s, w * area * s.powi(q as i32 - 1)))
                .collect()
        })
        .collect();
    let r_tot: usize = ranks.iter().sum();
    let dim_g = g.dim_v() + g.dim_z();
    let d2 = g.dim_z();
    let pref = (2.0 * std::f64::consts::PI).powi(r_tot as i32 - dim_g as i32);
    let total: f64 = rule
        .nodes
        .iter()
        .map(|node| {
            let dir = &rule.dirs[node.dir];
            let chi = eta_factor(h, node.rho);
            if chi == 0.0 {
                return 0.0;
            }
            let b: Vec<f64> = dir.b_unit.iter().map(|x| x * node.rho).collect();
            let caps = level_caps(h, &b, ranks);
            let level_w: Vec<Vec<f64>> = (0..dec.len())
                .map(|j| (0..=caps[j]).map(|n| binomial((n + ranks[j] - 1) as u64, (ranks[j] - 1) as u64)).collect())
                .collect();
            let sum = LevelSum {
                h,
                b: &b,
                ranks,
                tdone,
                level_w: &level_w,
                s_nodes: &s_nodes,
                squared: true,
            }
            .eval()
            .re;
            let vol: f64 = b.iter().zip(ranks).map(|(bj, &r)| bj.powi(r as i32)).product();
            let w = if node.ball > 0.0 {
                node.weight * node.ball.powi(d2 as i32) / d2 as f64
            } else {
                node.weight
            };
            w * sum * vol * chi * chi
        })
        .sum();
    Ok((pref * total).sqrt())
}

/// `‖K_H‖_{L²(G)}` from the Plancherel formula:
/// `((2π)^{|r|−dim G} ∫∫ Σ_n Π_j C(n_j+r_j−1, r_j−1) |m|² Π_j (b_j^η)^{r_j} dρ dη)^{1/2}`.
pub fn plancherel_spectral_norm(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    h: &JointMultiplier,
    quad: &QuadratureSpec,
) -> Result<PlancherelNorm> {
    if h.is_zero() {
        return Ok(PlancherelNorm { norm: 0.0, coarse: 0.0 });
    }
    let coarse = spectral_norm_once(g, dec, h, quad)?;
    if !quad.refine {
        return Ok(PlancherelNorm { norm: coarse, coarse });
    }
    let norm = spectral_norm_once(g, dec, h, &quad.refined())?;
    if (norm - coarse).abs() > quad.tail_tol * norm {
        return Err(Error::Accuracy {
            what: "spectral Plancherel norm refinement".into(),
            coarse,
            fine: norm,
        });
    }
    Ok(PlancherelNorm { norm, coarse })
}
