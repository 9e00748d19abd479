//! Tabulated optical constants and their file formats.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::DrudeParams;
use crate::units::UnitContext;

/// On-disk encoding of an optical table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl TableFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(TableFormat::Csv),
            "json" => Some(TableFormat::Json),
            _ => None,
        }
    }
}

/// One row of an optical table. The photon energy is kept alongside the
/// angular frequency so that a load/save cycle reproduces the file exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalRow {
    pub energy_ev: f64,
    #[serde(skip)]
    pub omega: f64,
    pub n: f64,
    pub k: f64,
}

impl OpticalRow {
    pub fn new(energy_ev: f64, n: f64, k: f64) -> Self {
        OpticalRow {
            energy_ev,
            omega: UnitContext::SI.ev_to_rads(energy_ev),
            n,
            k,
        }
    }

    /// Im ε = 2nk.
    pub fn eps_imag(&self) -> f64 {
        2.0 * self.n * self.k
    }
}

/// Complex refractive index tabulated against frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalTable {
    metal_name: String,
    rows: Vec<OpticalRow>,
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    metal_name: String,
    rows: Vec<OpticalRow>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonInput {
    Named(JsonTable),
    Bare(Vec<OpticalRow>),
}

/// A Lorentz oscillator `f·ω_p² / (ω_0² − ω² − iΓω)` with parameters in eV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzOscillator {
    pub strength: f64,
    pub resonance_ev: f64,
    pub width_ev: f64,
}

/// Interband oscillators for gold (Rakić et al., Appl. Opt. 37, 5271),
/// paired with their plasma energy of 9.03 eV.
pub const GOLD_INTERBAND: [LorentzOscillator; 5] = [
    LorentzOscillator { strength: 0.024, resonance_ev: 0.415, width_ev: 0.241 },
    LorentzOscillator { strength: 0.010, resonance_ev: 0.830, width_ev: 0.345 },
    LorentzOscillator { strength: 0.071, resonance_ev: 2.969, width_ev: 0.870 },
    LorentzOscillator { strength: 0.601, resonance_ev: 4.304, width_ev: 2.494 },
    LorentzOscillator { strength: 4.384, resonance_ev: 13.32, width_ev: 2.214 },
];
pub const GOLD_INTERBAND_PLASMA_EV: f64 = 9.03;

const BUNDLED_GOLD_CSV: &str = include_str!("../../data/au_drude_lorentz.csv");

impl OpticalTable {
    /// Validates rows: at least two, strictly increasing energy, n > 0, k ≥ 0.
    pub fn new(metal_name: impl Into<String>, rows: Vec<OpticalRow>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::invalid(format!(
                "optical table needs at least 2 rows, got {}",
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            let row_no = i + 1;
            if !(row.energy_ev.is_finite() && row.energy_ev > 0.0) {
                return Err(Error::InvalidRow {
                    row: row_no,
                    message: format!("energy must be positive, got {}", row.energy_ev),
                });
            }
            if !(row.n.is_finite() && row.n > 0.0) {
                return Err(Error::InvalidRow {
                    row: row_no,
                    message: format!("n must be positive, got {}", row.n),
                });
            }
            if !(row.k.is_finite() && row.k >= 0.0) {
                return Err(Error::InvalidRow {
                    row: row_no,
                    message: format!("k must be non-negative, got {}", row.k),
                });
            }
            if i > 0 && row.energy_ev <= rows[i - 1].energy_ev {
                return Err(Error::InvalidRow {
                    row: row_no,
                    message: "frequency grid is not strictly increasing".into(),
                });
            }
        }
        Ok(OpticalTable {
            metal_name: metal_name.into(),
            rows,
        })
    }

    pub fn metal_name(&self) -> &str {
        &self.metal_name
    }

    pub fn rows(&self) -> &[OpticalRow] {
        &self.rows
    }

    pub fn omega_min(&self) -> f64 {
        self.rows[0].omega
    }

    pub fn omega_max(&self) -> f64 {
        self.rows[self.rows.len() - 1].omega
    }

    /// Table generated from a dielectric function on a log-spaced energy grid.
    pub fn from_dielectric<F>(
        metal_name: impl Into<String>,
        e_min_ev: f64,
        e_max_ev: f64,
        points: usize,
        eps: F,
    ) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        if points < 2 || !(e_min_ev > 0.0 && e_max_ev > e_min_ev) {
            return Err(Error::invalid("bad synthetic table grid"));
        }
        let ratio = (e_max_ev / e_min_ev).ln();
        let rows = (0..points)
            .map(|i| {
                let ev = if i == points - 1 {
                    e_max_ev
                } else {
                    e_min_ev * (ratio * i as f64 / (points - 1) as f64).exp()
                };
                let nk = eps(UnitContext::SI.ev_to_rads(ev)).sqrt();
                OpticalRow::new(ev, nk.re, nk.im.max(0.0))
            })
            .collect();
        OpticalTable::new(metal_name, rows)
    }

    /// Pure Drude metal sampled over `[e_min_ev, e_max_ev]`.
    pub fn drude(params: &DrudeParams, e_min_ev: f64, e_max_ev: f64, points: usize) -> Result<Self> {
        let p = *params;
        OpticalTable::from_dielectric("drude", e_min_ev, e_max_ev, points, move |w| {
            p.epsilon_real_axis(w)
        })
    }

    /// Drude intraband response plus Lorentz interband oscillators.
    pub fn drude_lorentz(
        params: &DrudeParams,
        oscillators: &[LorentzOscillator],
        oscillator_plasma_ev: f64,
        e_min_ev: f64,
        e_max_ev: f64,
        points: usize,
    ) -> Result<Self> {
        let p = *params;
        let wp2 = UnitContext::SI.ev_to_rads(oscillator_plasma_ev).powi(2);
        let osc: Vec<_> = oscillators
            .iter()
            .map(|o| {
                (
                    o.strength,
                    UnitContext::SI.ev_to_rads(o.resonance_ev),
                    UnitContext::SI.ev_to_rads(o.width_ev),
                )
            })
            .collect();
        OpticalTable::from_dielectric("au-drude-lorentz", e_min_ev, e_max_ev, points, move |w| {
            osc.iter().fold(p.epsilon_real_axis(w), |acc, &(f, w0, g)| {
                acc + f * wp2 / Complex64::new(w0 * w0 - w * w, -g * w)
            })
        })
    }

    /// Generator for the bundled gold table: Drude (9.0 eV, 0.035 eV) with the
    /// gold interband oscillators, 2000 log-spaced points over 0.125–10000 eV.
    pub fn synthetic_gold() -> Result<Self> {
        OpticalTable::drude_lorentz(
            &DrudeParams::gold(),
            &GOLD_INTERBAND,
            GOLD_INTERBAND_PLASMA_EV,
            0.125,
            10_000.0,
            2000,
        )
    }

    /// The gold table shipped with the crate.
    pub fn bundled_gold() -> Self {
        let mut t = parse_csv(BUNDLED_GOLD_CSV.as_bytes(), Path::new("au_drude_lorentz.csv"))
            .expect("bundled table is valid");
        t.metal_name = "au-drude-lorentz".into();
        t
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("energy_ev,n,k\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.energy_ev, r.n, r.k));
        }
        out
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&JsonTable {
            metal_name: self.metal_name.clone(),
            rows: self.rows.clone(),
        })?)
    }

    pub fn save(&self, path: &Path, format: TableFormat) -> Result<()> {
        let text = match format {
            TableFormat::Csv => self.to_csv_string(),
            TableFormat::Json => self.to_json_string()?,
        };
        fs::write(path, text)?;
        Ok(())
    }
}

fn parse_csv(bytes: &[u8], path: &Path) -> Result<OpticalTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = rdr.headers()?.clone();
    let want = ["energy_ev", "n", "k"];
    if headers.len() != 3 || headers.iter().zip(want).any(|(h, w)| h != w) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("expected header energy_ev,n,k, found {:?}", headers),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |j: usize| -> Result<f64> {
            rec.get(j)
                .ok_or_else(|| Error::InvalidRow {
                    row: i + 1,
                    message: "missing column".into(),
                })?
                .parse::<f64>()
                .map_err(|e| Error::InvalidRow {
                    row: i + 1,
                    message: e.to_string(),
                })
        };
        rows.push(OpticalRow::new(field(0)?, field(1)?, field(2)?));
    }
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("table")
        .to_string();
    OpticalTable::new(name, rows)
}

/// Reads a table from `path`.
pub fn load_optical_table(path: &Path, format: TableFormat) -> Result<OpticalTable> {
    let bytes = fs::read(path)?;
    match format {
        TableFormat::Csv => parse_csv(&bytes, path),
        TableFormat::Json => {
            let parsed: JsonInput = serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            let (name, rows) = match parsed {
                JsonInput::Named(t) => (t.metal_name, t.rows),
                JsonInput::Bare(rows) => (
                    path.file_stem()
                        .and_then(|s| s.to_str())
                        .unwrap_or("table")
                        .to_string(),
                    rows,
                ),
            };
            let rows = rows
                .into_iter()
                .map(|r| OpticalRow::new(r.energy_ev, r.n, r.k))
                .collect();
            OpticalTable::new(name, rows)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn three_row_csv_converts_energy() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "au.csv", "energy_ev,n,k\n0.125,10,80\n1.0,0.5,6\n10.0,1.0,0.5\n");
        let t = load_optical_table(&p, TableFormat::Csv).unwrap();
        assert_eq!(t.rows().len(), 3);
        assert_eq!(t.rows()[1].omega, 1.51927e15);
        assert_eq!(t.rows()[0].omega, 0.125 * 1.51927e15);
        assert_eq!(t.rows()[0].eps_imag(), 1600.0);
        assert_eq!(t.metal_name(), "au");
    }

    #[test]
    fn negative_k_reports_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "bad.csv", "energy_ev,n,k\n0.1,1,1\n0.2,1,-0.5\n");
        match load_optical_table(&p, TableFormat::Csv) {
            Err(Error::InvalidRow { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_monotone_grid_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "bad.csv", "energy_ev,n,k\n0.2,1,1\n0.1,1,1\n");
        assert!(matches!(
            load_optical_table(&p, TableFormat::Csv),
            Err(Error::InvalidRow { row: 2, .. })
        ));
    }

    #[test]
    fn single_row_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "one.csv", "energy_ev,n,k\n0.2,1,1\n");
        assert!(load_optical_table(&p, TableFormat::Csv).is_err());
    }

    #[test]
    fn bad_header_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "h.csv", "ev,n,k\n0.2,1,1\n0.3,1,1\n");
        assert!(matches!(
            load_optical_table(&p, TableFormat::Csv),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn drude_table_round_trips_bit_identically() {
        let t = OpticalTable::drude(&DrudeParams::gold(), 0.125, 10_000.0, 500).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for (name, fmt) in [("d.csv", TableFormat::Csv), ("d.json", TableFormat::Json)] {
            let p = dir.path().join(name);
            t.save(&p, fmt).unwrap();
            let back = load_optical_table(&p, fmt).unwrap();
            assert_eq!(back.rows(), t.rows());
            let p2 = dir.path().join(format!("again-{name}"));
            back.save(&p2, fmt).unwrap();
            assert_eq!(fs::read(&p).unwrap(), fs::read(&p2).unwrap());
        }
    }

    #[test]
    fn drude_table_matches_imaginary_part() {
        let params = DrudeParams::gold();
        let t = OpticalTable::drude(&params, 0.125, 10_000.0, 500).unwrap();
        for r in t.rows().iter().step_by(37) {
            let w = r.omega;
            let expect = params.omega_p.powi(2) * params.gamma / (w * (w * w + params.gamma.powi(2)));
            assert!((r.eps_imag() / expect - 1.0).abs() < 1e-9, "{} {}", r.eps_imag(), expect);
        }
    }

    #[test]
    fn bundled_gold_matches_generator() {
        let generated = OpticalTable::synthetic_gold().unwrap();
        let bundled = OpticalTable::bundled_gold();
        // Bit patterns of the generator may shift with the optimisation level.
        assert_eq!(generated.rows().len(), bundled.rows().len());
        for (g, b) in generated.rows().iter().zip(bundled.rows()) {
            assert_eq!(g.energy_ev, b.energy_ev);
            assert!((g.n / b.n - 1.0).abs() < 1e-12 && (g.k / b.k - 1.0).abs() < 1e-12);
        }
    }
}
