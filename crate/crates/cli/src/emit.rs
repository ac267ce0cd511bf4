//! JSON envelopes and CSV tables. Every output carries the config hash.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use nilspec_core::kernel::KernelGrid;
use nilspec_core::Result;

use crate::config::sha256_hex;

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    config_hash: &'a str,
    config: &'a C,
    result: &'a R,
}

pub fn json<C: Serialize, R: Serialize>(hash: &str, config: &C, result: &R) -> String {
    let env = Envelope {
        config_hash: hash,
        config,
        result,
    };
    serde_json::to_string_pretty(&env).expect("report serializes") + "\n"
}

pub struct Csv {
    text: String,
}

impl Csv {
    /// Provenance lines (`# key: value`) followed by the column header.
    pub fn new(hash: &str, provenance: &[(&str, String)], columns: &[String]) -> Self {
        let mut text = format!("# config_hash: {hash}\n");
        for (k, v) in provenance {
            text.push_str(&format!("# {k}: {v}\n"));
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn f(x: f64) -> String {
    format!("{x:e}")
}

pub fn kernel_csv(hash: &str, grid: &KernelGrid, dim_v: usize, dim_z: usize) -> String {
    let quad_hash = sha256_hex(serde_json::to_string(&grid.quad).expect("quad serializes").as_bytes());
    let mut cols: Vec<String> = (1..=dim_v).map(|i| format!("z{i}")).collect();
    cols.extend((1..=dim_z).map(|i| format!("u{i}")));
    cols.extend(["re", "im", "est_error"].map(String::from));
    let mut csv = Csv::new(
        hash,
        &[
            ("group", grid.group.clone()),
            ("multiplier", grid.multiplier.clone()),
            ("quad_hash", quad_hash),
            ("units", "z in the basis of v, u in the basis of z; K per unit Haar measure".into()),
            ("small_ball_share", f(grid.small_ball)),
        ],
        &cols,
    );
    for (((z, u), v), e) in grid.points.iter().zip(&grid.values).zip(&grid.est_error) {
        let mut row: Vec<String> = z.iter().chain(u).map(|&x| f(x)).collect();
        row.extend([f(v.re), f(v.im), f(*e)]);
        csv.row(&row);
    }
    csv.finish()
}

/// Writes to `out`, or to stdout when none is given.
pub fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn wants_csv(out: Option<&Path>) -> bool {
    out.and_then(|p| p.extension()).is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}
