//! Rejection of measurement sets that contain outlying results.
//!
//! Each bin is tested with the Grubbs statistic T_j = max|P − P̄|/s. When a bin
//! exceeds its critical value the set owning the extreme point collects an
//! exceedance. Under the null hypothesis a set owning m of n points in a
//! tested bin is blamed with probability α·m/n, so its exceedance count is
//! compared with a Poisson tail and flagged below α divided by the number of
//! sets.

use serde::{Deserialize, Serialize};
use statrs::distribution::{DiscreteCDF, Poisson};

use crate::error::{Error, Result};
use crate::instrument::MeasurementSet;

use super::pooled::BinnedData;
use super::tables::{check_confidence, grubbs_p_value, CriticalTables};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinTest {
    pub z_center: f64,
    pub n: usize,
    pub statistic: f64,
    pub critical: f64,
    pub exceeds: bool,
    /// Set owning the most extreme point.
    pub suspect_set: usize,
    /// 1 − p-value of the statistic: probability the extreme point is an outlier.
    pub outlier_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetScore {
    pub set_id: usize,
    pub exceedances: usize,
    pub expected: f64,
    pub p_value: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub bins: Vec<BinTest>,
    pub sets: Vec<SetScore>,
    pub skipped_bins: usize,
    pub warnings: Vec<String>,
}

impl OutlierReport {
    pub fn flagged(&self) -> Vec<usize> {
        self.sets.iter().filter(|s| s.flagged).map(|s| s.set_id).collect()
    }
}

pub fn detect_outlier_sets(
    sets: &[MeasurementSet],
    bin_width: f64,
    tables: &CriticalTables,
    beta: f64,
) -> Result<OutlierReport> {
    check_confidence(beta)?;
    let alpha = 1.0 - beta;
    let mut ids: Vec<usize> = sets.iter().map(|s| s.set_id).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != sets.len() {
        return Err(Error::invalid("set identifiers must be unique"));
    }
    let mut warnings = Vec::new();
    if sets.len() < 2 {
        warnings.push("fewer than two sets: no set can be singled out".to_string());
        return Ok(OutlierReport {
            bins: Vec::new(),
            sets: ids
                .iter()
                .map(|&set_id| SetScore {
                    set_id,
                    exceedances: 0,
                    expected: 0.0,
                    p_value: 1.0,
                    flagged: false,
                })
                .collect(),
            skipped_bins: 0,
            warnings,
        });
    }

    let data = BinnedData::new(sets, bin_width)?;
    let mut exceed = vec![0usize; ids.len()];
    let mut expected = vec![0.0f64; ids.len()];
    let slot = |id: usize| ids.binary_search(&id).expect("known set");
    let mut tests = Vec::new();
    let mut skipped = 0;

    for bin in &data.bins {
        let n = bin.n();
        if n < 3 {
            skipped += 1;
            continue;
        }
        let s = bin.variance().expect("n >= 3").sqrt();
        if s == 0.0 {
            skipped += 1;
            continue;
        }
        let mean = bin.mean();
        let (suspect, dev) = bin
            .members
            .iter()
            .map(|m| (m.0, (m.2 - mean).abs()))
            .fold((usize::MAX, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let statistic = dev / s;
        let critical = tables.grubbs(n, alpha)?;
        let exceeds = statistic > critical;
        for m in &bin.members {
            expected[slot(m.0)] += alpha / n as f64;
        }
        if exceeds {
            exceed[slot(suspect)] += 1;
        }
        tests.push(BinTest {
            z_center: bin.center(),
            n,
            statistic,
            critical,
            exceeds,
            suspect_set: suspect,
            outlier_probability: 1.0 - grubbs_p_value(n, statistic)?,
        });
    }
    if skipped > 0 {
        warnings.push(format!("{skipped} bins with fewer than 3 points or no spread skipped"));
    }

    let threshold = alpha / ids.len() as f64;
    let scores = ids
        .iter()
        .enumerate()
        .map(|(k, &set_id)| {
            let p_value = poisson_upper_tail(expected[k], exceed[k]);
            SetScore {
                set_id,
                exceedances: exceed[k],
                expected: expected[k],
                p_value,
                flagged: p_value < threshold,
            }
        })
        .collect();
    Ok(OutlierReport {
        bins: tests,
        sets: scores,
        skipped_bins: skipped,
        warnings,
    })
}

/// P(X ≥ k) for X ~ Poisson(mean).
fn poisson_upper_tail(mean: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mean <= 0.0 {
        return 0.0;
    }
    let dist = Poisson::new(mean).expect("positive mean");
    (1.0 - dist.cdf(k as u64 - 1)).max(0.0)
}
