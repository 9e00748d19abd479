//! Error composition and the experimental, theoretical and comparison budgets.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{nm_label, MPA};

use super::tables::{check_confidence, CriticalTables};

/// k_β for 95% confidence when composing two uniformly distributed errors.
pub const K_BETA_95: f64 = 1.1;

/// k_β(r) in the intermediate regime of the random/systematic composition.
pub const K_BETA_MIXED: f64 = 0.8;

/// min(e₁ + e₂, k_β √(e₁² + e₂²)).
pub fn compose_uniform(e1: f64, e2: f64, k_beta: f64) -> Result<f64> {
    if !(e1 >= 0.0 && e2 >= 0.0 && k_beta > 0.0) || !(e1 + e2).is_finite() {
        return Err(Error::invalid(format!(
            "errors must be non-negative, got ({e1}, {e2}) with k = {k_beta}"
        )));
    }
    Ok((e1 + e2).min(k_beta * e1.hypot(e2)))
}

/// |P| · min(sum, 1.1·rss) of the relative frequency and radius errors.
pub fn systematic_error(pressure: f64, delta_omega_rel: f64, delta_r_rel: f64) -> Result<f64> {
    Ok(pressure.abs() * compose_uniform(delta_omega_rel, delta_r_rel, K_BETA_95)?)
}

/// Which branch of the random/systematic composition applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Random,
    Mixed,
    Systematic,
}

/// r < 0.8 → random, r > 8 → systematic, otherwise mixed (boundaries included).
pub fn regime(r: f64) -> Regime {
    if r < 0.8 {
        Regime::Random
    } else if r > 8.0 {
        Regime::Systematic
    } else {
        Regime::Mixed
    }
}

fn combine(random: f64, systematic: f64, r: f64) -> f64 {
    match regime(r) {
        Regime::Random => random,
        Regime::Systematic => systematic,
        Regime::Mixed => K_BETA_MIXED * (random + systematic),
    }
}

fn check_errors(random: f64, systematic: f64) -> Result<()> {
    if random >= 0.0 && systematic >= 0.0 && (random + systematic).is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "errors must be non-negative, got random {random}, systematic {systematic}"
        )))
    }
}

/// Total experimental error with r = systematic / random.
pub fn total_experimental_error(random: f64, systematic: f64) -> Result<f64> {
    check_errors(random, systematic)?;
    if random == 0.0 {
        return Ok(systematic);
    }
    Ok(combine(random, systematic, systematic / random))
}

/// Total experimental error with r measured against the standard deviation of
/// the mean rather than the random half-width.
pub fn total_experimental_error_pooled(
    random: f64,
    systematic: f64,
    std_of_mean: f64,
) -> Result<f64> {
    check_errors(random, systematic)?;
    if !(std_of_mean >= 0.0) {
        return Err(Error::invalid("standard deviation must be non-negative"));
    }
    if std_of_mean == 0.0 {
        return Ok(systematic.max(random));
    }
    Ok(combine(random, systematic, systematic / std_of_mean))
}

/// Relative theoretical error of the Casimir pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryError {
    /// Proximity-force error, z/R.
    pub pft: f64,
    /// Sample-to-sample optical data error.
    pub optical: f64,
    /// δ_o = min(sum, 1.1·rss) of the two above.
    pub other: f64,
    /// Separation error propagated through P ∝ z⁻⁴, 4Δz/z.
    pub separation: f64,
    /// 0.8(δ_z + δ_o).
    pub total: f64,
}

pub fn theoretical_relative_error(
    z: f64,
    radius: f64,
    delta_z: f64,
    delta_c_rel: f64,
) -> Result<TheoryError> {
    if !(z > 0.0 && radius > 0.0 && delta_z >= 0.0 && delta_c_rel >= 0.0) {
        return Err(Error::invalid("theoretical error needs positive z, R and non-negative errors"));
    }
    let pft = z / radius;
    let other = compose_uniform(pft, delta_c_rel, K_BETA_95)?;
    let separation = 4.0 * delta_z / z;
    Ok(TheoryError {
        pft,
        optical: delta_c_rel,
        other,
        separation,
        total: K_BETA_MIXED * (separation + other),
    })
}

/// |P| δ_tot.
pub fn theoretical_error(
    pressure: f64,
    z: f64,
    radius: f64,
    delta_z: f64,
    delta_c_rel: f64,
) -> Result<f64> {
    Ok(pressure.abs() * theoretical_relative_error(z, radius, delta_z, delta_c_rel)?.total)
}

/// Factor widening a 95% half-width to 99%: t_0.995(2)/t_0.975(2).
pub fn widening_99() -> f64 {
    let t = CriticalTables::embedded();
    t.student_t(2, 0.995).expect("tabulated") / t.student_t(2, 0.975).expect("tabulated")
}

/// Half-width of the confidence interval for P_theor − P_expt.
///
/// The 95% value composes both errors like two uniform ones; 99% widens it by
/// [`widening_99`]. Other confidence levels are not supported.
pub fn comparison_band(expt_err: f64, theor_err: f64, confidence: f64) -> Result<f64> {
    let base = compose_uniform(expt_err, theor_err, K_BETA_95)?;
    confidence_factor(confidence).map(|f| f * base)
}

pub(crate) fn confidence_factor(confidence: f64) -> Result<f64> {
    check_confidence(confidence)?;
    if (confidence - 0.95).abs() < 1e-12 {
        Ok(1.0)
    } else if (confidence - 0.99).abs() < 1e-12 {
        Ok(widening_99())
    } else {
        Err(Error::invalid(format!(
            "confidence {confidence} unsupported, use 0.95 or 0.99"
        )))
    }
}

/// Experimental error budget at one separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub z: f64,
    pub random_abs: f64,
    pub systematic_abs: f64,
    pub total_abs: f64,
    pub confidence: f64,
}

/// CSV with header `z_nm,random_mPa,syst_mPa,total_mPa`.
pub fn budget_to_csv_string(rows: &[ErrorBudget]) -> String {
    let mut out = String::from("z_nm,random_mPa,syst_mPa,total_mPa\n");
    for b in rows {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6}",
            nm_label(b.z),
            b.random_abs / MPA,
            b.systematic_abs / MPA,
            b.total_abs / MPA
        );
    }
    out
}

/// Half-width of the theory-experiment confidence interval on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBand {
    z: Vec<f64>,
    half_width: Vec<f64>,
    pub confidence: f64,
}

impl ConfidenceBand {
    pub fn new(z: Vec<f64>, half_width: Vec<f64>, confidence: f64) -> Result<Self> {
        check_confidence(confidence)?;
        if z.is_empty() || z.len() != half_width.len() {
            return Err(Error::invalid("band grid and half-widths must be non-empty and equal in length"));
        }
        if z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("band grid must be strictly increasing"));
        }
        if half_width.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::invalid("band half-widths must be positive"));
        }
        Ok(ConfidenceBand {
            z,
            half_width,
            confidence,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.z
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_width
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.z[0], self.z[self.z.len() - 1])
    }

    pub fn covers(&self, z: f64) -> bool {
        let (a, b) = self.domain();
        z >= a && z <= b
    }

    /// Linear interpolation; `None` outside the grid.
    pub fn half_width_at(&self, z: f64) -> Option<f64> {
        if !self.covers(z) {
            return None;
        }
        let i = self.z.partition_point(|&x| x <= z);
        if i == self.z.len() {
            return Some(self.half_width[i - 1]);
        }
        let (z0, z1) = (self.z[i - 1], self.z[i]);
        let t = (z - z0) / (z1 - z0);
        Some(self.half_width[i - 1] + t * (self.half_width[i] - self.half_width[i - 1]))
    }

    /// Same band with every half-width multiplied by `factor`.
    pub fn scaled(&self, factor: f64, confidence: f64) -> Result<Self> {
        ConfidenceBand::new(
            self.z.clone(),
            self.half_width.iter().map(|h| h * factor).collect(),
            confidence,
        )
    }

    /// The 99% band built from a 95% one.
    pub fn widened_to_99(&self) -> Result<Self> {
        if (self.confidence - 0.95).abs() > 1e-12 {
            return Err(Error::invalid("only a 95% band can be widened"));
        }
        self.scaled(widening_99(), 0.99)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("z_nm,half_width_mPa\n");
        for (z, h) in self.z.iter().zip(&self.half_width) {
            let _ = writeln!(out, "{},{:.6}", nm_label(*z), h / MPA);
        }
        out
    }
}
