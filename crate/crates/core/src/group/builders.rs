use nalgebra::DMatrix;

use super::{rank2_promotion, sampled_j_ranks, LayerDecomposition, StratifiedGroup2};
use crate::error::{Error, Result};

/// Heisenberg–Reiter group `H_{d1,d2}` on `ℝ^{d2×d1} × ℝ^{d1} × ℝ^{d2}`.
///
/// First-layer basis, block by block: `X_{1,j}, …, X_{d2,j}, Y_j` at
/// indices `j(d2+1) + m` (Y at offset d2). The only brackets are
/// `[X_{m,j}, Y_j] = U_m`. With `metric = Some(a)`, block j carries the
/// inner product `(a^j)⁻¹`, the one for which `−Σ a^j_{kk'} X_{k,j} X_{k',j}`
/// is the sublaplacian.
pub fn build_heisenberg_reiter(
    d1: usize,
    d2: usize,
    metric: Option<&[DMatrix<f64>]>,
) -> Result<(StratifiedGroup2, LayerDecomposition)> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::invalid("d1 and d2 must be at least 1"));
    }
    let bs = d2 + 1;
    let dim_v = d1 * bs;
    let mut gram = DMatrix::identity(dim_v, dim_v);
    if let Some(ms) = metric {
        if ms.len() != d1 {
            return Err(Error::invalid(format!("expected {d1} metric blocks, got {}", ms.len())));
        }
        for (j, a) in ms.iter().enumerate() {
            if a.nrows() != bs || a.ncols() != bs {
                return Err(Error::invalid(format!("metric block {j} must be {bs}x{bs}")));
            }
            if (a - a.transpose()).norm() > 1e-12 * (1.0 + a.norm()) {
                return Err(Error::invalid(format!("metric block {j} is not symmetric")));
            }
            let inv = a
                .clone()
                .cholesky()
                .ok_or_else(|| Error::invalid(format!("metric block {j} is not positive definite")))?
                .inverse();
            gram.view_mut((j * bs, j * bs), (bs, bs)).copy_from(&inv);
        }
    }
    let mut triples = Vec::new();
    for j in 0..d1 {
        for m in 0..d2 {
            triples.push((j * bs + m, j * bs + d2, m, 1.0));
        }
    }
    let label = if d1 == 1 && d2 == 1 {
        "H1".to_string()
    } else {
        format!("H_{{{d1},{d2}}}")
    };
    let g = StratifiedGroup2::from_triples(label, dim_v, d2, &triples, gram)?;
    let blocks = (0..d1).map(|j| (j * bs..(j + 1) * bs).collect()).collect();
    let dec = LayerDecomposition::new(&g, blocks, vec![1; d1])?;
    Ok((g, dec))
}

/// Free 2-step nilpotent group on three generators: `[e_a, e_b] = z_{ab}`
/// with `z_{01}, z_{02}, z_{12}` in that order.
pub fn build_n32() -> (StratifiedGroup2, LayerDecomposition) {
    let triples = [(0, 1, 0, 1.0), (0, 2, 1, 1.0), (1, 2, 2, 1.0)];
    let g = StratifiedGroup2::from_triples("N_{3,2}", 3, 3, &triples, DMatrix::identity(3, 3))
        .expect("N_{3,2} structure constants are valid");
    let dec = LayerDecomposition::new(&g, vec![vec![0, 1, 2]], vec![1]).expect("single block");
    (g, dec)
}

/// Realification of the complexified Lie algebra. Indices `a` (real part)
/// and `dim_v + a` (imaginary part) in v, likewise in z. When every sampled
/// `J_η` of `g` has rank 2, also returns the single-block decomposition
/// with r = 2 that the complexification then satisfies.
pub fn complexify(g: &StratifiedGroup2) -> (StratifiedGroup2, Option<LayerDecomposition>) {
    let (n, p) = (g.dim_v(), g.dim_z());
    let mut triples = Vec::new();
    for (a, b, m, c) in g.triples() {
        // [x_R + i x_I, y_R + i y_I] = [x_R,y_R] − [x_I,y_I] + i([x_R,y_I] + [x_I,y_R])
        triples.push((a, b, m, c));
        triples.push((n + a, n + b, m, -c));
        triples.push((a, n + b, p + m, c));
        triples.push((n + a, b, p + m, c));
    }
    let mut gram = DMatrix::zeros(2 * n, 2 * n);
    gram.view_mut((0, 0), (n, n)).copy_from(g.gram());
    gram.view_mut((n, n), (n, n)).copy_from(g.gram());
    let gc = StratifiedGroup2::from_triples(format!("{}^C", g.label()), 2 * n, 2 * p, &triples, gram)
        .expect("complexification of a valid group is valid");
    let dec = if sampled_j_ranks(g, 200, 0x5eed).iter().all(|&r| r == 2) {
        LayerDecomposition::new(&gc, vec![(0..2 * n).collect()], vec![2]).ok()
    } else {
        None
    };
    (gc, dec)
}

/// Quotient of `G₁ × G₂` identifying the centers through `phi: z₁ → z₂`:
/// first layer `v₁ ⊕ v₂`, center `z₂`, bracket `φ([v₁,v₁']) + [v₂,v₂']`.
/// The decomposition juxtaposes the two inputs (blocks with
/// `dim v_j > 2 r_j` moved to the front).
pub fn glue_centers(
    g1: &StratifiedGroup2,
    dec1: &LayerDecomposition,
    g2: &StratifiedGroup2,
    dec2: &LayerDecomposition,
    phi: &DMatrix<f64>,
) -> Result<(StratifiedGroup2, LayerDecomposition)> {
    let p = g2.dim_z();
    if g1.dim_z() != p {
        return Err(Error::invalid(format!(
            "center dimensions differ: {} vs {}",
            g1.dim_z(),
            p
        )));
    }
    if phi.nrows() != p || phi.ncols() != p {
        return Err(Error::invalid("phi must be dim_z x dim_z"));
    }
    if crate::linalg::rank(phi, 1e-12) < p {
        return Err(Error::invalid("phi is singular; the identification must be invertible"));
    }
    let n1 = g1.dim_v();
    let mut triples = Vec::new();
    for (a, b, k, c) in g1.triples() {
        for m in 0..p {
            let v = phi[(m, k)] * c;
            if v != 0.0 {
                triples.push((a, b, m, v));
            }
        }
    }
    // several k may map to the same m: merge duplicates
    triples = merge_triples(triples);
    for (a, b, m, c) in g2.triples() {
        triples.push((n1 + a, n1 + b, m, c));
    }
    let gram = direct_sum(g1.gram(), g2.gram());
    let label = format!("{}#{}", g1.label(), g2.label());
    let g = StratifiedGroup2::from_triples(label, n1 + g2.dim_v(), p, &triples, gram)?;
    let dec = juxtapose(&g, dec1, dec2, n1)?;
    Ok((g, dec))
}

/// Direct product `G₁ × G₂`: block-diagonal bracket into `z₁ ⊕ z₂`.
pub fn direct_product(g1: &StratifiedGroup2, g2: &StratifiedGroup2) -> StratifiedGroup2 {
    let (n1, p1) = (g1.dim_v(), g1.dim_z());
    let mut triples = g1.triples();
    for (a, b, m, c) in g2.triples() {
        triples.push((n1 + a, n1 + b, p1 + m, c));
    }
    let gram = direct_sum(g1.gram(), g2.gram());
    StratifiedGroup2::from_triples(
        format!("{}x{}", g1.label(), g2.label()),
        n1 + g2.dim_v(),
        p1 + g2.dim_z(),
        &triples,
        gram,
    )
    .expect("direct product of valid groups is valid")
}

/// Juxtaposition of two decompositions on `v₁ ⊕ v₂` (indices of the second
/// shifted by `offset`), with the `dim v_j > 2 r_j` blocks first.
pub fn juxtapose(
    g: &StratifiedGroup2,
    dec1: &LayerDecomposition,
    dec2: &LayerDecomposition,
    offset: usize,
) -> Result<LayerDecomposition> {
    let mut items: Vec<(Vec<usize>, usize)> = dec1
        .blocks()
        .iter()
        .cloned()
        .zip(dec1.ranks().iter().copied())
        .collect();
    items.extend(
        dec2.blocks()
            .iter()
            .map(|b| b.iter().map(|i| i + offset).collect())
            .zip(dec2.ranks().iter().copied()),
    );
    // stable: keeps the input order within each class
    items.sort_by_key(|(b, r)| b.len() == 2 * r);
    let (blocks, ranks) = items.into_iter().unzip();
    LayerDecomposition::new(g, blocks, ranks)
}

/// Single-block decomposition with r = 1 for groups whose `J_η` has rank 2.
pub fn promote_rank2(g: &StratifiedGroup2) -> Option<LayerDecomposition> {
    rank2_promotion(g, 0x5eed)
}

fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

fn merge_triples(t: Vec<(usize, usize, usize, f64)>) -> Vec<(usize, usize, usize, f64)> {
    let mut map = std::collections::BTreeMap::new();
    for (a, b, m, v) in t {
        *map.entry((a, b, m)).or_insert(0.0) += v;
    }
    map.into_iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|((a, b, m), v)| (a, b, m, v))
        .collect()
}
