//! CSV tables with a fixed float format and JSON run manifests.
//!
//! Floats are written with 17 significant digits so every value round-trips
//! exactly; columns are fixed per table and lines end in LF.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classical::Section;
use crate::eigen::SpectrumResult;
use crate::error::{Error, Result};
use crate::integrable::{EquivalenceReport, OverlayPoint};
use crate::params::ModelParams;
use crate::peres::PeresPoint;
use crate::stats::{RatioPoint, SpacingHistogram};

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }

    /// Writes the table and returns its manifest entry.
    pub fn write(&self, path: &Path) -> Result<OutputRecord> {
        let bytes = self.to_bytes()?;
        fs::write(path, &bytes)?;
        Ok(OutputRecord::for_bytes(path, &bytes))
    }
}

/// `(sector, k, energy, epsilon)` for every converged level.
pub fn spectrum_table(results: &[SpectrumResult], j: f64) -> Table {
    let mut t = Table::new(&["sector", "k", "energy", "epsilon"]);
    for r in results {
        for (k, e) in r.converged_energies().iter().enumerate() {
            t.push(vec![
                r.tag.to_string(),
                k.to_string(),
                fmt_f64(*e),
                fmt_f64(e / j),
            ]);
        }
    }
    t
}

/// Lattice points, each group tagged with its sector label (or `full`).
pub fn peres_table(groups: &[(String, Vec<PeresPoint>)]) -> Table {
    let mut t = Table::new(&[
        "sector",
        "k",
        "epsilon",
        "value",
        "value_over_j",
        "value_over_j2",
        "dominance",
    ]);
    for (label, points) in groups {
        for p in points {
            t.push(vec![
                label.clone(),
                p.k.to_string(),
                fmt_f64(p.epsilon),
                fmt_f64(p.value),
                fmt_f64(p.value_over_j),
                fmt_f64(p.value_over_j2),
                p.dominance.map_or(String::new(), |d| d.label().to_string()),
            ]);
        }
    }
    t
}

/// `(metric, value)` rows of a numeric-versus-analytic comparison.
pub fn equivalence_table(r: &EquivalenceReport) -> Table {
    let mut t = Table::new(&["metric", "value"]);
    t.push(vec!["compared".into(), r.compared.to_string()]);
    t.push(vec![
        "max_rel_deviation".into(),
        fmt_f64(r.max_rel_deviation),
    ]);
    t.push(vec!["worst_index".into(), r.worst_index.to_string()]);
    t.push(vec!["completeness_cut".into(), fmt_f64(r.completeness_cut)]);
    t.push(vec![
        "unmatched_below_cut".into(),
        r.unmatched_below_cut.to_string(),
    ]);
    t.push(vec![
        "pairing_conflicts".into(),
        r.pairing_conflicts.to_string(),
    ]);
    t
}

pub fn overlay_table(points: &[OverlayPoint]) -> Table {
    let mut t = Table::new(&["curve_id", "n_c", "m_x_or_mx2", "epsilon"]);
    for p in points {
        t.push(vec![
            p.curve_id.clone(),
            p.n_c.to_string(),
            fmt_f64(p.abscissa),
            fmt_f64(p.epsilon),
        ]);
    }
    t
}

/// Ratio curves, each tagged with its sector label or `avg`.
pub fn ratio_table(curves: &[(String, Vec<RatioPoint>)]) -> Table {
    let mut t = Table::new(&["epsilon_center", "r_mean", "n_levels", "sector_or_avg"]);
    for (label, curve) in curves {
        for p in curve {
            t.push(vec![
                fmt_f64(p.epsilon_center),
                fmt_f64(p.r_mean),
                p.n_levels.to_string(),
                label.clone(),
            ]);
        }
    }
    t
}

pub fn histogram_table(h: &SpacingHistogram) -> Table {
    let mut t = Table::new(&[
        "bin_left",
        "bin_right",
        "density",
        "goe_pdf_mid",
        "poisson_pdf_mid",
    ]);
    for b in &h.bins {
        t.push(vec![
            fmt_f64(b.left),
            fmt_f64(b.right),
            fmt_f64(b.density),
            fmt_f64(b.goe_pdf_mid),
            fmt_f64(b.poisson_pdf_mid),
        ]);
    }
    t
}

pub fn section_table(sections: &[Section]) -> Table {
    let mut t = Table::new(&["trajectory_id", "crossing_index", "t", "Q", "P"]);
    for (id, s) in sections.iter().enumerate() {
        for (i, c) in s.crossings.iter().enumerate() {
            t.push(vec![
                id.to_string(),
                i.to_string(),
                fmt_f64(c.t),
                fmt_f64(c.state.q_atom),
                fmt_f64(c.state.p_atom),
            ]);
        }
    }
    t
}

pub fn boundary_table(points: &[(f64, f64)]) -> Table {
    let mut t = Table::new(&["theta_index", "Q", "P"]);
    for (i, (q, p)) in points.iter().enumerate() {
        t.push(vec![i.to_string(), fmt_f64(*q), fmt_f64(*p)]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: usize,
}

impl OutputRecord {
    pub fn for_bytes(path: &Path, bytes: &[u8]) -> Self {
        OutputRecord {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        }
    }
}

/// Everything needed to replay a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Option<ModelParams>,
    pub knobs: BTreeMap<String, serde_json::Value>,
    pub outputs: Vec<OutputRecord>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, params: Option<ModelParams>, timestamp: String) -> Self {
        RunManifest {
            command: command.to_string(),
            params,
            knobs: BTreeMap::new(),
            outputs: Vec::new(),
            timestamp,
        }
    }

    pub fn knob(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.knobs.insert(name.to_string(), v);
        self
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Io(e.to_string()))
    }

    /// Re-hashes every listed output and reports the first mismatch.
    pub fn verify(&self, base: &Path) -> Result<()> {
        for o in &self.outputs {
            let p = if o.path.is_absolute() {
                o.path.clone()
            } else {
                base.join(&o.path)
            };
            let bytes = fs::read(&p)?;
            if hex::encode(Sha256::digest(&bytes)) != o.sha256 {
                return Err(Error::Io(format!("hash mismatch for {}", p.display())));
            }
        }
        Ok(())
    }
}
