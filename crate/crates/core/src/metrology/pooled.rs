//! Binning of repeated measurement sets and the pooled random error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instrument::MeasurementSet;

use super::tables::{check_confidence, CriticalTables};

/// Points of all sets falling in one separation subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    pub z_lo: f64,
    pub z_hi: f64,
    /// (set_id, z, P) of every point in the bin.
    pub members: Vec<(usize, f64, f64)>,
}

impl Bin {
    pub fn n(&self) -> usize {
        self.members.len()
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.z_lo + self.z_hi)
    }

    pub fn mean(&self) -> f64 {
        self.members.iter().map(|m| m.2).sum::<f64>() / self.n() as f64
    }

    /// Sample variance s_j²; `None` below two points.
    pub fn variance(&self) -> Option<f64> {
        let n = self.n();
        if n < 2 {
            return None;
        }
        let mean = self.mean();
        Some(self.members.iter().map(|m| (m.2 - mean).powi(2)).sum::<f64>() / (n - 1) as f64)
    }

    /// Variance of the bin mean, s_j²/n_j.
    pub fn variance_of_mean(&self) -> Option<f64> {
        self.variance().map(|v| v / self.n() as f64)
    }
}

/// All points partitioned into subintervals of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedData {
    pub z_start: f64,
    pub width: f64,
    pub bins: Vec<Bin>,
}

impl BinnedData {
    /// Bins of `width` starting at the smallest separation in the data.
    pub fn new(sets: &[MeasurementSet], width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::invalid("bin width must be positive"));
        }
        let all = sets.iter().flat_map(|s| s.points.iter().map(move |p| (s.set_id, p.0, p.1)));
        let (lo, hi) = all
            .clone()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
        if !lo.is_finite() {
            return Err(Error::invalid("no measurement points"));
        }
        let count = ((hi - lo) / width).floor() as usize + 1;
        let mut bins: Vec<Bin> = (0..count)
            .map(|j| Bin {
                z_lo: lo + j as f64 * width,
                z_hi: lo + (j + 1) as f64 * width,
                members: Vec::new(),
            })
            .collect();
        for p in all {
            let j = (((p.1 - lo) / width).floor() as usize).min(count - 1);
            bins[j].members.push(p);
        }
        Ok(BinnedData {
            z_start: lo,
            width,
            bins,
        })
    }

    pub fn bin_index(&self, z: f64) -> Option<usize> {
        if z < self.z_start {
            return None;
        }
        let j = ((z - self.z_start) / self.width).floor() as usize;
        (j < self.bins.len()).then_some(j)
    }
}

/// How many neighbouring bins enter the variance of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Neighbors {
    Fixed(usize),
    /// Smallest N in 3..=6 whose pooled variance changes by at most 25% on
    /// adding the next bin.
    Adaptive,
}

/// Random error at one separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomError {
    pub z: f64,
    /// Half-width t·s_P̄.
    pub half_width: f64,
    /// s_P̄.
    pub std_of_mean: f64,
    /// Mean pressure over the bins used.
    pub mean_pressure: f64,
    pub bins_used: usize,
    pub min_points: usize,
    pub student_t: f64,
}

const HOMOGENEITY: f64 = 0.25;

/// Bins with fewer points are not pooled; two points leave one degree of
/// freedom and a Student factor of 12.7.
pub const MIN_BIN_POINTS: usize = 3;

/// Usable bins closest to `j0`, nearest first, ties to the lower index.
fn nearest_bins(data: &BinnedData, j0: usize, count: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    let len = data.bins.len();
    for d in 0..len {
        for j in [j0.checked_sub(d), (d > 0).then_some(j0 + d)].into_iter().flatten() {
            if j < len && data.bins[j].n() >= MIN_BIN_POINTS {
                out.push(j);
                if out.len() == count {
                    return out;
                }
            }
        }
    }
    out
}

/// Variance of the mean at a point: max over equal and inverse-variance
/// influence coefficients of N Σ λ_j² s²_{P̄j}.
fn pooled_variance(data: &BinnedData, idx: &[usize]) -> f64 {
    let s2: Vec<f64> = idx
        .iter()
        .map(|&j| data.bins[j].variance_of_mean().expect("pooled bins hold several points"))
        .collect();
    let n = s2.len() as f64;
    let equal = s2.iter().sum::<f64>() / n;
    if s2.contains(&0.0) {
        return equal;
    }
    let inv_sum: f64 = s2.iter().map(|v| 1.0 / v).sum();
    let weighted: f64 = s2
        .iter()
        .map(|v| {
            let lambda = (1.0 / v) / inv_sum;
            lambda * lambda * v
        })
        .sum::<f64>()
        * n;
    equal.max(weighted)
}

fn choose_neighbors(data: &BinnedData, j0: usize) -> Vec<usize> {
    let mut current = nearest_bins(data, j0, 3);
    for n in 3..6 {
        let next = nearest_bins(data, j0, n + 1);
        if next.len() <= current.len() {
            break;
        }
        let a = pooled_variance(data, &current);
        let b = pooled_variance(data, &next);
        if a > 0.0 && (b / a - 1.0).abs() <= HOMOGENEITY {
            break;
        }
        current = next;
    }
    current
}

/// Random error of the mean pressure at `z0` at confidence `beta`.
pub fn pooled_random_error(
    data: &BinnedData,
    z0: f64,
    neighbors: Neighbors,
    tables: &CriticalTables,
    beta: f64,
) -> Result<RandomError> {
    check_confidence(beta)?;
    let j0 = data
        .bin_index(z0)
        .ok_or_else(|| Error::invalid(format!("separation {z0:e} m outside the data")))?;
    let idx = match neighbors {
        Neighbors::Fixed(0) => return Err(Error::invalid("at least one bin required")),
        Neighbors::Fixed(n) => nearest_bins(data, j0, n),
        Neighbors::Adaptive => choose_neighbors(data, j0),
    };
    if idx.is_empty() {
        return Err(Error::invalid(format!(
            "no populated bins near {z0:e} m"
        )));
    }
    let var = pooled_variance(data, &idx);
    let min_points = idx.iter().map(|&j| data.bins[j].n()).min().expect("non-empty");
    let t = tables.student_two_sided(min_points - 1, beta)?;
    let total: usize = idx.iter().map(|&j| data.bins[j].n()).sum();
    let mean_pressure = idx
        .iter()
        .map(|&j| data.bins[j].members.iter().map(|m| m.2).sum::<f64>())
        .sum::<f64>()
        / total as f64;
    let std_of_mean = var.sqrt();
    Ok(RandomError {
        z: z0,
        half_width: t * std_of_mean,
        std_of_mean,
        mean_pressure,
        bins_used: idx.len(),
        min_points,
        student_t: t,
    })
}
