use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{FNode, FTable, Provenance, RateNode, RateTable};
use crate::error::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Writes `provenance` as pretty JSON next to `csv_path` (same stem,
/// `.json` extension) and returns the sidecar path.
pub fn write_sidecar(csv_path: &Path, provenance: &Provenance) -> Result<PathBuf> {
    let path = csv_path.with_extension("json");
    let mut text = serde_json::to_string_pretty(provenance)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

#[derive(Serialize, Deserialize)]
struct FRow {
    p: f64,
    q: f64,
    f: f64,
    residual: f64,
    iterations: usize,
}

#[derive(Serialize, Deserialize)]
struct RateRow {
    xi_x: f64,
    xi_y: f64,
    g: f64,
    p_max_x: f64,
    p_max_y: f64,
    flag: String,
}

impl FTable {
    /// CSV with columns `p, q, f, residual, iterations`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for n in &self.nodes {
            out.serialize(FRow {
                p: n.tilt.p,
                q: n.tilt.q,
                f: n.f,
                residual: n.residual,
                iterations: n.iterations,
            })
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut nodes = Vec::new();
        for row in csv::Reader::from_reader(r).deserialize::<FRow>() {
            let row = row.map_err(csv_err)?;
            nodes.push(FNode {
                tilt: [row.p, row.q].into(),
                f: row.f,
                residual: row.residual,
                iterations: row.iterations,
                error: (!row.f.is_finite()).then(|| "solve failed".to_string()),
            });
        }
        Ok(Self::new(nodes, Provenance::new()))
    }
}

impl RateTable {
    /// CSV with columns `xi_x, xi_y, g, p_max_x, p_max_y, flag`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for n in &self.nodes {
            out.serialize(RateRow {
                xi_x: n.xi[0],
                xi_y: n.xi[1],
                g: n.g,
                p_max_x: n.p_max[0],
                p_max_y: n.p_max[1],
                flag: if n.extrapolated { "extrapolated" } else { "ok" }.into(),
            })
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut nodes = Vec::new();
        for row in csv::Reader::from_reader(r).deserialize::<RateRow>() {
            let row = row.map_err(csv_err)?;
            let extrapolated = match row.flag.as_str() {
                "ok" => false,
                "extrapolated" => true,
                other => return Err(Error::Parse(format!("unknown flag `{other}`"))),
            };
            nodes.push(RateNode {
                xi: [row.xi_x, row.xi_y],
                g: row.g,
                p_max: [row.p_max_x, row.p_max_y],
                extrapolated,
            });
        }
        Ok(Self::new(nodes, Provenance::new()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::TiltVector;

    #[test]
    fn ftable_csv_layout() {
        let t = FTable::from_fn(&[TiltVector::ZERO, TiltVector::new(0.1, 0.3)], |p| p.norm_sq());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("p,q,f,residual,iterations\n0.0,0.0,0.0,0.0,0\n"));
        let back = FTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.nodes, t.nodes);
    }

    #[test]
    fn rate_csv_rejects_unknown_flag() {
        let text = "xi_x,xi_y,g,p_max_x,p_max_y,flag\n0,0,0,0,0,maybe\n";
        assert!(matches!(RateTable::read_csv(text.as_bytes()), Err(Error::Parse(_))));
    }
}
