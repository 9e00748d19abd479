//! Theory-experiment comparison inside a confidence band.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instrument::MeasurementSet;
use crate::units::{MPA, NM};

use super::budget::ConfidenceBand;

/// Windowed mean of P_theor − P_expt at one separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub z: f64,
    pub mean_diff: f64,
    pub half_width: f64,
    pub n_points: usize,
    pub outside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub label: String,
    pub confidence: f64,
    pub window: f64,
    pub rows: Vec<VerdictRow>,
    pub points_total: usize,
    pub points_outside: usize,
}

impl VerdictReport {
    pub fn fraction_outside(&self) -> f64 {
        if self.points_total == 0 {
            0.0
        } else {
            self.points_outside as f64 / self.points_total as f64
        }
    }

    /// True when every evaluated separation lies inside the band.
    pub fn consistent(&self) -> bool {
        self.rows.iter().all(|r| !r.outside)
    }

    /// True when every evaluated separation in [lo, hi] lies outside the band.
    pub fn excluded_over(&self, lo: f64, hi: f64) -> bool {
        let mut any = false;
        for r in self.rows.iter().filter(|r| r.z >= lo && r.z <= hi) {
            if !r.outside {
                return false;
            }
            any = true;
        }
        any
    }

    /// JSON report with separations in nm and pressures in mPa.
    pub fn to_json_string(&self) -> Result<String> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "z_nm": r.z / NM,
                    "mean_diff_mPa": r.mean_diff / MPA,
                    "half_width_mPa": r.half_width / MPA,
                    "n_points": r.n_points,
                    "outside": r.outside,
                })
            })
            .collect();
        let doc = serde_json::json!({
            "label": self.label,
            "confidence": self.confidence,
            "window_nm": self.window / NM,
            "consistent": self.consistent(),
            "points_total": self.points_total,
            "points_outside": self.points_outside,
            "fraction_outside": self.fraction_outside(),
            "rows": rows,
        });
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// Compare `theory` with the data at each separation of `eval_z`.
///
/// Differences are averaged over points within ±`window` of each separation
/// and compared with the local band half-width. Separately, every point is
/// compared with the half-width at its own separation.
pub fn verdict<F>(
    label: &str,
    sets: &[MeasurementSet],
    theory: F,
    band: &ConfidenceBand,
    eval_z: &[f64],
    window: f64,
) -> Result<VerdictReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(window > 0.0) {
        return Err(Error::invalid("averaging window must be positive"));
    }
    let mut diffs: Vec<(f64, f64)> = sets
        .par_iter()
        .flat_map_iter(|s| s.points.iter().copied())
        .filter(|(z, _)| band.covers(*z))
        .map(|(z, p)| theory(z).map(|t| (z, t - p)))
        .collect::<Result<_>>()?;
    diffs.sort_by(|a, b| a.0.total_cmp(&b.0));
    if diffs.is_empty() {
        return Err(Error::invalid("no data points inside the band range"));
    }

    let points_outside = diffs
        .iter()
        .filter(|(z, d)| d.abs() > band.half_width_at(*z).expect("covered"))
        .count();

    let rows = eval_z
        .iter()
        .map(|&z| {
            let half_width = band.half_width_at(z).ok_or_else(|| {
                Error::invalid(format!("separation {z:e} m outside the band"))
            })?;
            let lo = diffs.partition_point(|p| p.0 < z - window);
            let hi = diffs.partition_point(|p| p.0 <= z + window);
            let slice = &diffs[lo..hi];
            if slice.is_empty() {
                return Err(Error::invalid(format!("no data within the window at {z:e} m")));
            }
            let mean_diff = slice.iter().map(|p| p.1).sum::<f64>() / slice.len() as f64;
            Ok(VerdictRow {
                z,
                mean_diff,
                half_width,
                n_points: slice.len(),
                outside: mean_diff.abs() > half_width,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(VerdictReport {
        label: label.to_string(),
        confidence: band.confidence,
        window,
        rows,
        points_total: diffs.len(),
        points_outside,
    })
}
