//! Surface roughness: height histograms, geometric averaging, and the
//! multiplicative correction factor.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::NM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Plate,
    Sphere,
}

/// Fractions `v_i` of a surface lying at height `h_i` (metres).
#[derive(Debug, Clone, PartialEq)]
pub struct RoughnessHistogram {
    entries: Vec<(f64, f64)>,
    pub surface: Surface,
}

const BUNDLED_PLATE: &str = include_str!("../../data/plate_histogram.csv");
const BUNDLED_SPHERE: &str = include_str!("../../data/sphere_histogram.csv");

/// Bin counts and maximum heights (nm) of the measured histograms, with the
/// stochastic variances they produce (nm).
pub const PLATE_BINS: usize = 105;
pub const PLATE_MAX_NM: f64 = 20.65;
pub const PLATE_DELTA_NM: f64 = 4.06;
pub const SPHERE_BINS: usize = 112;
pub const SPHERE_MAX_NM: f64 = 11.06;
pub const SPHERE_DELTA_NM: f64 = 1.91;

impl RoughnessHistogram {
    /// Requires h_1 = 0, strictly increasing heights, v_i > 0 and Σv = 1.
    pub fn new(surface: Surface, entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("histogram has no entries"));
        }
        if entries[0].0 != 0.0 {
            return Err(Error::InvalidRow {
                row: 1,
                message: format!("first height must be 0, got {}", entries[0].0),
            });
        }
        for (i, &(h, v)) in entries.iter().enumerate() {
            if !(h.is_finite() && v.is_finite() && v > 0.0) {
                return Err(Error::InvalidRow {
                    row: i + 1,
                    message: format!("need finite height and positive fraction, got ({h}, {v})"),
                });
            }
            if i > 0 && h <= entries[i - 1].0 {
                return Err(Error::InvalidRow {
                    row: i + 1,
                    message: "heights are not strictly increasing".into(),
                });
            }
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("fractions sum to {total}, not 1")));
        }
        Ok(RoughnessHistogram { entries, surface })
    }

    /// A single bin: a perfectly flat surface.
    pub fn flat(surface: Surface) -> Self {
        RoughnessHistogram {
            entries: vec![(0.0, 1.0)],
            surface,
        }
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn max_height(&self) -> f64 {
        self.entries[self.entries.len() - 1].0
    }

    /// Discretized Gaussian on `bins` equally spaced heights over
    /// `[0, max_height]`, centred, with the width solved so that the
    /// stochastic variance equals `delta`.
    pub fn synthetic(surface: Surface, bins: usize, max_height: f64, delta: f64) -> Result<Self> {
        if bins < 3 || !(max_height > 0.0) || !(delta > 0.0) {
            return Err(Error::invalid("bad synthetic histogram parameters"));
        }
        let heights: Vec<f64> = (0..bins)
            .map(|i| max_height * i as f64 / (bins - 1) as f64)
            .collect();
        let mid = 0.5 * max_height;
        let build = |s: f64| -> Vec<(f64, f64)> {
            let w: Vec<f64> = heights
                .iter()
                .map(|h| (-0.5 * ((h - mid) / s).powi(2)).exp())
                .collect();
            let total: f64 = w.iter().sum();
            heights.iter().zip(w).map(|(&h, w)| (h, w / total)).collect()
        };
        let variance = |e: &[(f64, f64)]| {
            let h0: f64 = e.iter().map(|(h, v)| h * v).sum();
            e.iter().map(|(h, v)| (h0 - h).powi(2) * v).sum::<f64>().sqrt()
        };
        // Variance is increasing in the Gaussian width; bisect.
        let (mut lo, mut hi) = (1e-3 * max_height, 10.0 * max_height);
        if variance(&build(hi)) < delta {
            return Err(Error::invalid("requested variance exceeds what the height range allows"));
        }
        for _ in 0..200 {
            let s = 0.5 * (lo + hi);
            if variance(&build(s)) < delta {
                lo = s;
            } else {
                hi = s;
            }
        }
        RoughnessHistogram::new(surface, build(0.5 * (lo + hi)))
    }

    /// Bundled plate histogram: 105 bins up to 20.65 nm, δ = 4.06 nm.
    pub fn bundled_plate() -> Self {
        parse_csv(BUNDLED_PLATE, Surface::Plate).expect("bundled histogram is valid")
    }

    /// Bundled sphere histogram: 112 bins up to 11.06 nm, δ = 1.91 nm.
    pub fn bundled_sphere() -> Self {
        parse_csv(BUNDLED_SPHERE, Surface::Sphere).expect("bundled histogram is valid")
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("h_nm,v_fraction\n");
        for (h, v) in &self.entries {
            let _ = writeln!(out, "{},{}", h / NM, v);
        }
        out
    }

    pub fn load(path: &Path, surface: Surface) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        parse_csv(&text, surface).map_err(|e| match e {
            Error::Csv(err) => Error::Parse {
                path: path.to_path_buf(),
                message: err.to_string(),
            },
            other => other,
        })
    }
}

fn parse_csv(text: &str, surface: Surface) -> Result<RoughnessHistogram> {
    #[derive(Deserialize)]
    struct Row {
        h_nm: f64,
        v_fraction: f64,
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut entries = Vec::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        entries.push((row.h_nm * NM, row.v_fraction));
    }
    RoughnessHistogram::new(surface, entries)
}

/// H₀ = Σ h_i v_i, the level about which the profile has zero mean.
pub fn zero_roughness_level(hist: &RoughnessHistogram) -> f64 {
    hist.entries.iter().map(|(h, v)| h * v).sum()
}

/// δ_st = √(Σ (H₀ − h_i)² v_i).
pub fn stochastic_variance(hist: &RoughnessHistogram) -> f64 {
    let h0 = zero_roughness_level(hist);
    hist.entries
        .iter()
        .map(|(h, v)| (h0 - h).powi(2) * v)
        .sum::<f64>()
        .sqrt()
}

/// Pressure averaged over all local separations between the two rough
/// surfaces, z + H₀ᵖ + H₀ˢ − h_kᵖ − h_jˢ, with weights v_kᵖ v_jˢ.
/// `pressure_fn` is evaluated once per distinct local separation.
pub fn roughness_average<F>(
    pressure_fn: F,
    plate: &RoughnessHistogram,
    sphere: &RoughnessHistogram,
    z: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let base = z + zero_roughness_level(plate) + zero_roughness_level(sphere);
    let closest = base - plate.max_height() - sphere.max_height();
    if !(closest > 0.0) {
        return Err(Error::invalid(format!(
            "surfaces touch: smallest local separation {:.3} nm at z = {:.3} nm",
            closest / NM,
            z / NM
        )));
    }
    let local = |hp: f64, hs: f64| base - hp - hs;
    let mut distinct: Vec<f64> = plate
        .entries
        .iter()
        .flat_map(|&(hp, _)| sphere.entries.iter().map(move |&(hs, _)| local(hp, hs)))
        .collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let values = distinct
        .par_iter()
        .map(|&d| pressure_fn(d).map(|p| (d.to_bits(), p)))
        .collect::<Result<HashMap<u64, f64>>>()?;
    // Fixed summation order keeps the result independent of thread count.
    let mut total = 0.0;
    for &(hp, vp) in &plate.entries {
        let mut row = 0.0;
        for &(hs, vs) in &sphere.entries {
            row += vs * values[&local(hp, hs).to_bits()];
        }
        total += vp * row;
    }
    Ok(total)
}

/// η_r = 1 + 10[(δᵖ/z)² + (δˢ/z)²].
pub fn roughness_factor(z: f64, delta_p: f64, delta_s: f64) -> f64 {
    1.0 + 10.0 * ((delta_p / z).powi(2) + (delta_s / z).powi(2))
}

/// η_r · P, valid while both δ/z stay below 0.1.
pub fn roughness_multiplicative(pressure: f64, z: f64, delta_p: f64, delta_s: f64) -> Result<f64> {
    if !(z > 0.0) || delta_p < 0.0 || delta_s < 0.0 {
        return Err(Error::invalid("need z > 0 and non-negative variances"));
    }
    if delta_p / z >= 0.1 || delta_s / z >= 0.1 {
        return Err(Error::invalid(format!(
            "δ/z ≥ 0.1 at z = {:.1} nm: fourth-order terms are no longer negligible",
            z / NM
        )));
    }
    Ok(roughness_factor(z, delta_p, delta_s) * pressure)
}

/// Roughness coefficient c_corr tabulated against z / l_corr, for a periodic
/// profile of period `l_corr`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve {
    pub l_corr: f64,
    ratio: Vec<f64>,
    c: Vec<f64>,
}

impl CorrelationCurve {
    pub fn new(l_corr: f64, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::invalid("c_corr curve needs at least 3 points"));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::invalid("c_corr abscissae must increase strictly"));
        }
        if !(l_corr > 0.0) {
            return Err(Error::invalid("correlation length must be positive"));
        }
        let (ratio, c) = points.into_iter().unzip();
        Ok(CorrelationCurve { l_corr, ratio, c })
    }

    /// Reads a `z_over_l,c_corr` CSV.
    pub fn load(path: &Path, l_corr: f64) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            z_over_l: f64,
            c_corr: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let mut points = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            points.push((row.z_over_l, row.c_corr));
        }
        CorrelationCurve::new(l_corr, points)
    }

    fn derivative_at_node(&self, i: usize) -> f64 {
        let n = self.ratio.len();
        let (a, b) = match i {
            0 => (0, 1),
            _ if i == n - 1 => (n - 2, n - 1),
            _ => (i - 1, i + 1),
        };
        (self.c[b] - self.c[a]) / (self.ratio[b] - self.ratio[a])
    }

    fn bracket(&self, x: f64) -> Result<(usize, f64)> {
        let n = self.ratio.len();
        if !(self.ratio[0]..=self.ratio[n - 1]).contains(&x) {
            return Err(Error::invalid(format!(
                "z/l_corr = {x:.4} lies outside the c_corr curve [{}, {}]",
                self.ratio[0],
                self.ratio[n - 1]
            )));
        }
        let i = (self.ratio.partition_point(|&r| r <= x) - 1).min(n - 2);
        let t = (x - self.ratio[i]) / (self.ratio[i + 1] - self.ratio[i]);
        Ok((i, t))
    }

    /// c̃ = c − (1/5) z ∂c/∂z at separation `z`, with central differences at
    /// the nodes and linear interpolation between them.
    pub fn c_tilde(&self, z: f64) -> Result<f64> {
        let x = z / self.l_corr;
        let (i, t) = self.bracket(x)?;
        let c = (1.0 - t) * self.c[i] + t * self.c[i + 1];
        let dc_dx = (1.0 - t) * self.derivative_at_node(i) + t * self.derivative_at_node(i + 1);
        // z ∂c/∂z = x dc/dx
        Ok(c - 0.2 * x * dc_dx)
    }
}

/// η_r^corr = 1 + 10 c̃ [(δᵖ/z)² + (δˢ/z)²] for a given c̃.
pub fn roughness_factor_corr(z: f64, delta_p: f64, delta_s: f64, c_tilde: f64) -> f64 {
    1.0 + c_tilde * (roughness_factor(z, delta_p, delta_s) - 1.0)
}

/// η_r^corr with c̃ taken from a c_corr curve.
pub fn roughness_diffraction_factor(
    z: f64,
    delta_p: f64,
    delta_s: f64,
    curve: &CorrelationCurve,
) -> Result<f64> {
    Ok(roughness_factor_corr(z, delta_p, delta_s, curve.c_tilde(z)?))
}
