//! Integration lattices on G and grid-side norms of sampled kernels.

use nalgebra::DVector;
use serde::Serialize;

use super::{KernelGrid, Point};
use crate::error::{Error, Result};
use crate::group::{sphere_samples, spectral_data, LayerDecomposition, StratifiedGroup2};
use crate::multiplier::JointMultiplier;
use crate::quadrature::{legendre, sphere_area, CompositeRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    /// z on a ray, integrated against `|S^{dim v−1}| |z|^{dim v−1} d|z|`;
    /// only valid for kernels that depend on |z| alone.
    Radial,
    /// Tensor trapezoid in every coordinate.
    Cartesian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub z_max: f64,
    /// Radial: Gauss panels of this width (8 nodes each). Cartesian: trapezoid step.
    pub z_step: f64,
    pub u_max: f64,
    /// Trapezoid step in each center coordinate.
    pub u_step: f64,
}

#[derive(Debug, Clone)]
pub struct Lattice {
    pub spec: LatticeSpec,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Points in the outer tenth of some coordinate range.
    pub outer: Vec<bool>,
}

fn trapezoid(max: f64, step: f64) -> (Vec<f64>, Vec<f64>) {
    let n = (max / step).ceil().max(1.0) as usize;
    let h = max / n as f64;
    let xs: Vec<f64> = (0..=2 * n).map(|k| -max + k as f64 * h).collect();
    let ws: Vec<f64> = (0..=2 * n).map(|k| if k == 0 || k == 2 * n { 0.5 * h } else { h }).collect();
    (xs, ws)
}

fn tensor(axes: &[(Vec<f64>, Vec<f64>)]) -> Vec<(Vec<f64>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for (xs, ws) in axes {
        out = out
            .into_iter()
            .flat_map(|(p, w)| {
                xs.iter().zip(ws).map(move |(&x, &wx)| {
                    let mut q = p.clone();
                    q.push(x);
                    (q, w * wx)
                })
            })
            .collect();
    }
    out
}

impl Lattice {
    pub fn new(g: &StratifiedGroup2, spec: LatticeSpec) -> Result<Self> {
        if !(spec.z_max > 0.0 && spec.z_step > 0.0 && spec.u_max > 0.0 && spec.u_step > 0.0) {
            return Err(Error::invalid("lattice extents and steps must be positive"));
        }
        let (dv, dz) = (g.dim_v(), g.dim_z());
        let u_axes: Vec<_> = (0..dz).map(|_| trapezoid(spec.u_max, spec.u_step)).collect();
        let u_pts = tensor(&u_axes);
        let z_pts: Vec<(Vec<f64>, f64)> = match spec.kind {
            LatticeKind::Radial => {
                let n = (spec.z_max / spec.z_step).ceil().max(1.0) as usize;
                let breaks: Vec<f64> = (0..=n).map(|i| spec.z_max * i as f64 / n as f64).collect();
                let rule = CompositeRule::from_breaks(&breaks, &legendre(8));
                let area = sphere_area(dv);
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&r, &w)| {
                        let mut e = DVector::zeros(dv);
                        e[0] = r;
                        (g.from_orth(&e), w * area * r.powi(dv as i32 - 1))
                    })
                    .collect()
            }
            LatticeKind::Cartesian => {
                let axes: Vec<_> = (0..dv).map(|_| trapezoid(spec.z_max, spec.z_step)).collect();
                tensor(&axes)
                    .into_iter()
                    .map(|(p, w)| (g.from_orth(&DVector::from_vec(p)), w))
                    .collect()
            }
        };
        let mut points = Vec::with_capacity(z_pts.len() * u_pts.len());
        let mut weights = Vec::with_capacity(points.capacity());
        let mut outer = Vec::with_capacity(points.capacity());
        for (z, wz) in &z_pts {
            let zo = g.to_orth(z);
            let z_out = match spec.kind {
                LatticeKind::Radial => zo.norm() > 0.9 * spec.z_max,
                LatticeKind::Cartesian => zo.iter().any(|x| x.abs() > 0.9 * spec.z_max),
            };
            for (u, wu) in &u_pts {
                points.push((z.clone(), u.clone()));
                weights.push(wz * wu);
                outer.push(z_out || u.iter().any(|x| x.abs() > 0.9 * spec.u_max));
            }
        }
        Ok(Lattice {
            spec,
            points,
            weights,
            outer,
        })
    }
}

/// True when the kernel of `h` depends on |z| only (in orthonormal
/// coordinates), which licenses [`LatticeKind::Radial`]: no kernel part
/// (`d̃₁ = 0`), and at every sampled direction all blocks share one `b`
/// (then the level sum collapses to a single Laguerre function of |z|²).
pub fn kernel_is_radial(g: &StratifiedGroup2, dec: &LayerDecomposition, h: &JointMultiplier) -> bool {
    if dec.tdone() > 0 || (h.is_tensor() && dec.len() > 1) {
        return false;
    }
    sphere_samples(g.dim_z(), 16, 7).iter().all(|eta| match spectral_data(g, dec, eta, 1e-8) {
        Ok(sd) => sd.b.iter().all(|b| (b - sd.b[0]).abs() <= 1e-10 * sd.b[0]),
        Err(_) => false,
    })
}

/// `Σ_i w_i weight(z_i,u_i) |K_i|^p` over the lattice, and the same sum over the
/// outer band.
pub fn weighted_sum(lat: &Lattice, grid: &KernelGrid, p: f64, weight: impl Fn(&[f64], &[f64]) -> f64) -> (f64, f64) {
    let mut total = 0.0;
    let mut outer = 0.0;
    for (i, (z, u)) in lat.points.iter().enumerate() {
        let v = lat.weights[i] * weight(z, u) * grid.values[i].norm().powf(p);
        total += v;
        if lat.outer[i] {
            outer += v;
        }
    }
    (total, outer)
}
