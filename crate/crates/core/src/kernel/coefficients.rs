//! Diagonal matrix coefficients of the representations `π_{η,ρ}` and their
//! level sums `ψ_{η,ρ,n}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{spectral_data, LayerDecomposition, SpectralData, StratifiedGroup2};
use crate::quadrature::{hermite, legendre, CompositeRule};
use crate::special::{fourier_wigner_hermite_with, laguerre_fn, sphere_fourier};

/// Per block, the columns `E_{j,l}` and `Ē_{j,l}` (orthonormal coordinates)
/// with `J_η E = b Ē` and `J_η Ē = −b E`.
#[derive(Debug, Clone)]
pub struct SymplecticFrame {
    pub spectral: SpectralData,
    pub e: Vec<DMatrix<f64>>,
    pub ebar: Vec<DMatrix<f64>>,
}

pub fn symplectic_frame(g: &StratifiedGroup2, dec: &LayerDecomposition, eta: &[f64]) -> Result<SymplecticFrame> {
    let sd = spectral_data(g, dec, eta, 1e-8)?;
    let jo = g.j_orth(eta);
    let mut e_all = Vec::new();
    let mut ebar_all = Vec::new();
    for (j, range) in sd.range_bases.iter().enumerate() {
        let r = dec.ranks()[j];
        let b = sd.b[j];
        let mut chosen: Vec<DVector<f64>> = Vec::new();
        let mut e = Vec::new();
        let mut ebar = Vec::new();
        for c in 0..range.ncols() {
            if e.len() == r {
                break;
            }
            let mut v = range.column(c).into_owned();
            for w in &chosen {
                v -= w * w.dot(&v);
            }
            let nv = v.norm();
            if nv < 1e-6 {
                continue;
            }
            v /= nv;
            let vb = &jo * &v / b;
            chosen.push(v.clone());
            chosen.push(vb.clone());
            e.push(v);
            ebar.push(vb);
        }
        if e.len() != r {
            return Err(Error::invalid(format!("could not build a symplectic frame for block {j}")));
        }
        e_all.push(DMatrix::from_columns(&e));
        ebar_all.push(DMatrix::from_columns(&ebar));
    }
    Ok(SymplecticFrame {
        spectral: sd,
        e: e_all,
        ebar: ebar_all,
    })
}

/// Projects ρ (basis coordinates of v) onto `ker J_η` in orthonormal
/// coordinates, rejecting vectors farther than `tol·|ρ|` from it.
fn kernel_vector(g: &StratifiedGroup2, frame: &SymplecticFrame, rho: &[f64], tol: f64) -> Result<DVector<f64>> {
    if rho.len() != g.dim_v() {
        return Err(Error::invalid("rho has the wrong dimension"));
    }
    let ro = g.to_orth(rho);
    let mut proj = DVector::zeros(ro.len());
    for bar in &frame.spectral.bar_bases {
        if bar.ncols() > 0 {
            proj += bar * (bar.transpose() * &ro);
        }
    }
    let off = (&ro - &proj).norm();
    if off > tol * ro.norm().max(1e-300) && off > 1e-14 {
        return Err(Error::invalid(format!("rho is not in ker J_eta (distance {off:e})")));
    }
    Ok(proj)
}

fn central_phase(eta: &[f64], u: &[f64]) -> f64 {
    eta.iter().zip(u).map(|(a, b)| a * b).sum()
}

/// `φ_{η,ρ,ω}(z,u) = ⟨π_{η,ρ}(z,u) h̃_{η,ω}, h̃_{η,ω}⟩`, by Gauss–Hermite
/// quadrature of the defining integral over ℝ^{|r|} (a product of
/// one-dimensional integrals, since both the phase and h̃ factor).
/// `omega[j]` has `r_j` entries.
#[allow(clippy::too_many_arguments)]
pub fn matrix_coefficient(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    eta: &[f64],
    rho: &[f64],
    omega: &[Vec<usize>],
    z: &[f64],
    u: &[f64],
    gh_nodes: usize,
) -> Result<Complex64> {
    let frame = symplectic_frame(g, dec, eta)?;
    let rho_o = kernel_vector(g, &frame, rho, 1e-8)?;
    if omega.len() != dec.len() || omega.iter().zip(dec.ranks()).any(|(w, &r)| w.len() != r) {
        return Err(Error::invalid("omega must have r_j entries for each block"));
    }
    let zo = g.to_orth(z);
    let rule = hermite(gh_nodes);
    let mut val = Complex64::from_polar(1.0, central_phase(eta, u) + rho_o.dot(&zo));
    for j in 0..dec.len() {
        let sb = frame.spectral.b[j].sqrt();
        let zc = frame.e[j].transpose() * &zo;
        let zbar = frame.ebar[j].transpose() * &zo;
        for l in 0..dec.ranks()[j] {
            // s = v + z/2, t = √b s turns the inner product into V(ω; √b z̄/2, √b z/2)
            val *= fourier_wigner_hermite_with(&rule, omega[j][l], 0.5 * sb * zbar[l], 0.5 * sb * zc[l]);
        }
    }
    Ok(val)
}

/// All ω ∈ ℕ^r with |ω| = n.
pub fn compositions(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|k| {
            compositions(n - k, r - 1).into_iter().map(move |mut rest| {
                rest.insert(0, k);
                rest
            })
        })
        .collect()
}

/// `Σ_{|ω_j| = n_j} φ_{η,ρ,ω}(z,u)`, the brute-force side of the ψ identity.
#[allow(clippy::too_many_arguments)]
pub fn psi_brute_force(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    eta: &[f64],
    rho: &[f64],
    n: &[usize],
    z: &[f64],
    u: &[f64],
    gh_nodes: usize,
) -> Result<Complex64> {
    let per_block: Vec<Vec<Vec<usize>>> = n.iter().zip(dec.ranks()).map(|(&nj, &r)| compositions(nj, r)).collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; n.len()];
    loop {
        let omega: Vec<Vec<usize>> = idx.iter().zip(&per_block).map(|(&i, c)| c[i].clone()).collect();
        total += matrix_coefficient(g, dec, eta, rho, &omega, z, u, gh_nodes)?;
        let mut j = 0;
        while j < idx.len() && idx[j] + 1 == per_block[j].len() {
            idx[j] = 0;
            j += 1;
        }
        if j == idx.len() {
            return Ok(total);
        }
        idx[j] += 1;
    }
}

/// Radial rule for the ζ-integrals of ψ.
#[derive(Debug, Clone, Copy)]
pub struct PsiQuad {
    pub panels: usize,
    pub gauss: usize,
}

impl Default for PsiQuad {
    fn default() -> Self {
        PsiQuad { panels: 64, gauss: 16 }
    }
}

/// `ψ_{η,ρ,n}(z,u)` from the Fourier–Laguerre integral
/// `e^{i⟨η,u⟩} e^{i⟨ρ,P̄z⟩} π^{−|r|} Π_j b_j^{−r_j} ∫_{ℝ^{2r_j}} e^{i⟨ζ,w_j⟩} ℒ_{n_j}^{(r_j−1)}(|ζ|²/b_j) dζ`,
/// each block integral done in polar coordinates, `w_j = P_j^η z`.
#[allow(clippy::too_many_arguments)]
pub fn psi_closed_form(
    g: &StratifiedGroup2,
    dec: &LayerDecomposition,
    eta: &[f64],
    rho: &[f64],
    n: &[usize],
    z: &[f64],
    u: &[f64],
    quad: PsiQuad,
) -> Result<Complex64> {
    let frame = symplectic_frame(g, dec, eta)?;
    let rho_o = kernel_vector(g, &frame, rho, 1e-8)?;
    if n.len() != dec.len() {
        return Err(Error::invalid("n must have one entry per block"));
    }
    let zo = g.to_orth(z);
    let base = legendre(quad.gauss);
    let mut val = Complex64::from_polar(1.0, central_phase(eta, u) + rho_o.dot(&zo));
    for j in 0..dec.len() {
        let r = dec.ranks()[j];
        let b = frame.spectral.b[j];
        let w = (frame.spectral.range_bases[j].transpose() * &zo).norm();
        let t_max = 2.0 * n[j] as f64 + r as f64 + 60.0;
        let s_max = (b * t_max).sqrt();
        let breaks: Vec<f64> = (0..=quad.panels).map(|i| s_max * i as f64 / quad.panels as f64).collect();
        let rule = CompositeRule::from_breaks(&breaks, &base);
        let q = 2 * r;
        let integral = rule.integrate(|s| {
            laguerre_fn(n[j] as i64, r as u32 - 1, s * s / b) * s.powi(q as i32 - 1) * sphere_fourier(q, s * w)
        });
        val *= integral / (std::f64::consts::PI * b).powi(r as i32);
    }
    Ok(val)
}

/// `ψ_{η,ρ,n}(0,0) = Π_j C(n_j + r_j − 1, r_j − 1)`, the number of ω with
/// `|ω_j| = n_j`.
pub fn psi_at_identity(n: &[usize], ranks: &[usize]) -> f64 {
    n.iter()
        .zip(ranks)
        .map(|(&nj, &r)| crate::special::binomial((nj + r - 1) as u64, (r - 1) as u64))
        .product()
}
