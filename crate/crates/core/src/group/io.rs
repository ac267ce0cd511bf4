//! JSON group files.
//!
//! ```json
//! { "label": "H1", "dim_v": 2, "dim_z": 1,
//!   "bracket": [[0, 1, 0, 1.0]],
//!   "gram": "identity",
//!   "decomposition": { "blocks": [[0, 1]], "ranks": [1] } }
//! ```

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{LayerDecomposition, StratifiedGroup2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum GramSpec {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DecompositionSpec {
    pub blocks: Vec<Vec<usize>>,
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GroupFile {
    pub label: String,
    pub dim_v: usize,
    pub dim_z: usize,
    pub bracket: Vec<(usize, usize, usize, f64)>,
    pub gram: GramSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionSpec>,
}

impl GroupFile {
    pub fn from_group(g: &StratifiedGroup2, dec: Option<&LayerDecomposition>) -> Self {
        let n = g.dim_v();
        let gram = if *g.gram() == DMatrix::identity(n, n) {
            GramSpec::Named("identity".into())
        } else {
            GramSpec::Matrix((0..n).map(|r| (0..n).map(|c| g.gram()[(r, c)]).collect()).collect())
        };
        GroupFile {
            label: g.label().to_string(),
            dim_v: n,
            dim_z: g.dim_z(),
            bracket: g.triples(),
            gram,
            decomposition: dec.map(|d| DecompositionSpec {
                blocks: d.blocks().to_vec(),
                ranks: d.ranks().to_vec(),
            }),
        }
    }

    pub fn build(&self) -> Result<(StratifiedGroup2, Option<LayerDecomposition>)> {
        let n = self.dim_v;
        let gram = match &self.gram {
            GramSpec::Named(s) if s == "identity" => DMatrix::identity(n, n),
            GramSpec::Named(s) => return Err(Error::invalid(format!("unknown gram '{s}'"))),
            GramSpec::Matrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::invalid("gram matrix must be dim_v x dim_v"));
                }
                DMatrix::from_fn(n, n, |r, c| rows[r][c])
            }
        };
        let g = StratifiedGroup2::from_triples(self.label.clone(), n, self.dim_z, &self.bracket, gram)?;
        let dec = match &self.decomposition {
            Some(d) => Some(LayerDecomposition::new(&g, d.blocks.clone(), d.ranks.clone())?),
            None => None,
        };
        Ok((g, dec))
    }
}

pub fn parse_group(json: &str) -> Result<(StratifiedGroup2, Option<LayerDecomposition>)> {
    let f: GroupFile = serde_json::from_str(json)?;
    f.build()
}

pub fn read_group(path: &std::path::Path) -> Result<(StratifiedGroup2, Option<LayerDecomposition>)> {
    parse_group(&std::fs::read_to_string(path)?)
}

pub fn group_to_json(g: &StratifiedGroup2, dec: Option<&LayerDecomposition>) -> String {
    serde_json::to_string_pretty(&GroupFile::from_group(g, dec)).expect("group serializes")
}
