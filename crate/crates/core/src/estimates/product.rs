use serde::Serialize;

use super::EstimateReport;
use crate::error::{Error, Result};
use crate::group::{direct_product, juxtapose, LayerDecomposition, StratifiedGroup2};
use crate::kernel::{eval_kernel, Point, QuadratureSpec};
use crate::multiplier::{mixed_sobolev_norm_2d, sobolev_norm_fn, JointMultiplier, Multiplier};
use crate::par::ExecPolicy;

/// Pointwise agreement required between the joint kernel and the product.
pub const PRODUCT_KERNEL_TOL: f64 = 0.02;
/// Allowed relative gap in the mixed-norm factorization.
pub const PRODUCT_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ProductPoint {
    pub i: usize,
    pub j: usize,
    pub joint: [f64; 2],
    pub product: [f64; 2],
    pub rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductInfo {
    pub points: Vec<ProductPoint>,
    pub max_rel_err: f64,
    pub kernel_holds: bool,
    pub s: [f64; 2],
    pub mixed_norm: f64,
    pub factor_norms: [f64; 2],
    pub norm_rel_err: f64,
    pub norm_holds: bool,
}

/// Kernel of `F₁(L₁)F₂(L₂)` on `G₁ × G₂` against the outer product of the
/// factor kernels at `points1 × points2`, and the mixed-smoothness norm of
/// `F₁ ⊗ F₂` against the product of the factor norms (same FFT grid).
/// Each factor must carry a single block.
#[allow(clippy::too_many_arguments)]
pub fn product_factorization_check(
    g1: &StratifiedGroup2,
    dec1: &LayerDecomposition,
    g2: &StratifiedGroup2,
    dec2: &LayerDecomposition,
    f1: &Multiplier,
    f2: &Multiplier,
    points1: &[Point],
    points2: &[Point],
    s: [f64; 2],
    quad: &QuadratureSpec,
    policy: ExecPolicy,
) -> Result<EstimateReport> {
    if dec1.len() != 1 || dec2.len() != 1 {
        return Err(Error::invalid("each factor must have a single block"));
    }
    let g = direct_product(g1, g2);
    let dec = juxtapose(&g, dec1, dec2, g1.dim_v())?;
    let first_is_g1 = dec.blocks()[0] == dec1.blocks()[0];
    let fs = if first_is_g1 {
        vec![f1.clone(), f2.clone()]
    } else {
        vec![f2.clone(), f1.clone()]
    };
    let joint_points: Vec<Point> = points1
        .iter()
        .flat_map(|(z1, u1)| {
            points2.iter().map(move |(z2, u2)| {
                let z = z1.iter().chain(z2).copied().collect();
                let u = u1.iter().chain(u2).copied().collect();
                (z, u)
            })
        })
        .collect();
    let joint = eval_kernel(&g, &dec, &JointMultiplier::Tensor(fs), &joint_points, quad, policy)?;
    let k1 = eval_kernel(g1, dec1, &JointMultiplier::Spectral(f1.clone()), points1, quad, policy)?;
    let k2 = eval_kernel(g2, dec2, &JointMultiplier::Spectral(f2.clone()), points2, quad, policy)?;
    let mut points = Vec::new();
    for i in 0..points1.len() {
        for j in 0..points2.len() {
            let a = joint.values[i * points2.len() + j];
            let b = k1.values[i] * k2.values[j];
            points.push(ProductPoint {
                i,
                j,
                joint: [a.re, a.im],
                product: [b.re, b.im],
                rel_err: (a - b).norm() / b.norm(),
            });
        }
    }
    let max_rel_err = points.iter().map(|p| p.rel_err).fold(0.0, f64::max);

    let (n, pad) = (256, 4);
    let (a, b) = ([f1.k_lo(), f1.k_hi()], [f2.k_lo(), f2.k_hi()]);
    let mixed = mixed_sobolev_norm_2d(|x, y| f1.eval(x) * f2.eval(y), a, b, s, n, pad);
    let n1 = sobolev_norm_fn(|x| f1.eval(x), a[0], a[1], s[0], n, pad);
    let n2 = sobolev_norm_fn(|x| f2.eval(x), b[0], b[1], s[1], n, pad);
    let norm_rel_err = (mixed - n1 * n2).abs() / (n1 * n2);

    let kernel_holds = max_rel_err <= PRODUCT_KERNEL_TOL;
    let norm_holds = norm_rel_err <= PRODUCT_NORM_TOL;
    let mut rep = EstimateReport::new(format!("{} (x) {}", f1.tag(), f2.tag()));
    rep.lhs = mixed;
    rep.rhs = n1 * n2;
    rep.constant = mixed / (n1 * n2);
    rep.passed = kernel_holds && norm_holds;
    rep.product = Some(ProductInfo {
        points,
        max_rel_err,
        kernel_holds,
        s,
        mixed_norm: mixed,
        factor_norms: [n1, n2],
        norm_rel_err,
        norm_holds,
    });
    Ok(rep)
}
