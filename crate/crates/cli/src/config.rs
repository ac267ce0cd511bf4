//! Run configuration, its hash, and the small `key=value` grammars.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use nilspec_core::group::io::read_group;
use nilspec_core::group::{rank2_promotion, LayerDecomposition, StratifiedGroup2};
use nilspec_core::kernel::{LatticeKind, LatticeSpec, Point, QuadratureSpec};
use nilspec_core::multiplier::Multiplier;
use nilspec_core::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything a run depends on. Input files enter through their contents;
/// thread count and output path do not enter at all.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a, C: Serialize> {
    pub version: &'static str,
    pub seed: u64,
    pub command: &'a C,
    pub inputs: BTreeMap<String, String>,
}

impl<'a, C: Serialize> RunConfig<'a, C> {
    pub fn new(seed: u64, command: &'a C, files: &[&Path]) -> Result<Self> {
        let mut inputs = BTreeMap::new();
        for p in files {
            let bytes = std::fs::read(p).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", p.display())))?;
            inputs.insert(p.display().to_string(), sha256_hex(&bytes));
        }
        Ok(RunConfig {
            version: env!("CARGO_PKG_VERSION"),
            seed,
            command,
            inputs,
        })
    }

    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

/// Group plus a decomposition; falls back to the rank-2 promotion when the
/// file carries none.
pub fn load_group(path: &Path, seed: u64) -> Result<(StratifiedGroup2, LayerDecomposition)> {
    let (g, dec) = read_group(path)?;
    match dec.or_else(|| rank2_promotion(&g, seed)) {
        Some(d) => Ok((g, d)),
        None => Err(Error::InvalidInput(format!(
            "{}: no decomposition given and J_eta is not of rank 2 everywhere",
            path.display()
        ))),
    }
}

pub fn load_multiplier(path: &Path) -> Result<Multiplier> {
    let s = std::fs::read_to_string(path)?;
    Multiplier::from_json(&s)
}

fn pairs(spec: &str) -> Result<Vec<(String, String)>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| match kv.split_once('=') {
            Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
            None => Err(Error::InvalidInput(format!("expected key=value, got '{kv}'"))),
        })
        .collect()
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidInput(format!("{key}: cannot parse '{v}'")))
}

/// `n_angle=48,refine=false,...` over the defaults.
pub fn parse_quad(spec: Option<&str>, base: QuadratureSpec) -> Result<QuadratureSpec> {
    let mut q = base;
    let Some(spec) = spec else { return Ok(q) };
    for (k, v) in pairs(spec)? {
        match k.as_str() {
            "n_angle" => q.n_angle = num(&k, &v)?,
            "rho_per_octave" => q.rho_per_octave = num(&k, &v)?,
            "rho_gauss" => q.rho_gauss = num(&k, &v)?,
            "rho_max_width" => q.rho_max_width = num(&k, &v)?,
            "rho_min_ratio" => q.rho_min_ratio = num(&k, &v)?,
            "s_panels" => q.s_panels = num(&k, &v)?,
            "s_gauss" => q.s_gauss = num(&k, &v)?,
            "tail_tol" => q.tail_tol = num(&k, &v)?,
            "refine" => q.refine = num(&k, &v)?,
            _ => return Err(Error::InvalidInput(format!("unknown quadrature key '{k}'"))),
        }
    }
    Ok(q)
}

/// `kind=radial,z_max=4,z_step=0.5,u_max=4,u_step=0.5`.
pub fn parse_lattice(spec: &str) -> Result<LatticeSpec> {
    let mut l = LatticeSpec {
        kind: LatticeKind::Cartesian,
        z_max: 4.0,
        z_step: 0.5,
        u_max: 4.0,
        u_step: 0.5,
    };
    for (k, v) in pairs(spec)? {
        match k.as_str() {
            "kind" => {
                l.kind = match v.as_str() {
                    "radial" => LatticeKind::Radial,
                    "cartesian" => LatticeKind::Cartesian,
                    _ => return Err(Error::InvalidInput(format!("lattice kind must be radial or cartesian, got '{v}'"))),
                }
            }
            "z_max" => l.z_max = num(&k, &v)?,
            "z_step" => l.z_step = num(&k, &v)?,
            "u_max" => l.u_max = num(&k, &v)?,
            "u_step" => l.u_step = num(&k, &v)?,
            _ => return Err(Error::InvalidInput(format!("unknown lattice key '{k}'"))),
        }
    }
    Ok(l)
}

/// Points file: one point per line, `dim_v + dim_z` numbers separated by
/// commas or whitespace. Blank lines, `#` comments and a header are skipped.
pub fn read_points(path: &Path, dim_v: usize, dim_z: usize) -> Result<Vec<Point>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|s| s.parse::<f64>()).collect();
        let Ok(xs) = parsed else {
            if out.is_empty() {
                continue; // header
            }
            return Err(Error::InvalidInput(format!("{}:{}: not a number row", path.display(), i + 1)));
        };
        if xs.len() != dim_v + dim_z {
            return Err(Error::InvalidInput(format!(
                "{}:{}: expected {} coordinates, got {}",
                path.display(),
                i + 1,
                dim_v + dim_z,
                xs.len()
            )));
        }
        out.push((xs[..dim_v].to_vec(), xs[dim_v..].to_vec()));
    }
    if out.is_empty() {
        return Err(Error::InvalidInput(format!("{}: no points", path.display())));
    }
    Ok(out)
}

pub fn paths<'a>(xs: impl IntoIterator<Item = &'a PathBuf>) -> Vec<&'a Path> {
    xs.into_iter().map(|p| p.as_path()).collect()
}
