//! Yukawa-type corrections to gravity: the equivalent plate-plate pressure of
//! the layered test bodies and the strength constraint implied by a
//! confidence band.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrology::ConfidenceBand;
use crate::units::{nm_label, G_NEWTON, NM};

pub const RHO_AU: f64 = 19.28e3;
pub const RHO_TI: f64 = 4.51e3;
pub const RHO_PT: f64 = 21.47e3;
pub const RHO_AL2O3: f64 = 4.1e3;
pub const RHO_SI: f64 = 2.33e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plate,
    Sphere,
}

/// One coating layer: density in kg/m³, thickness in m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub density: f64,
    pub thickness: f64,
}

/// Coatings listed from the gap inwards, on top of a substrate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub side: Side,
    pub layers: Vec<Layer>,
    pub substrate_density: f64,
}

impl LayerStack {
    pub fn new(side: Side, layers: Vec<Layer>, substrate_density: f64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("a stack needs at least one layer"));
        }
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(substrate_density) || layers.iter().any(|l| !ok(l.density) || !ok(l.thickness)) {
            return Err(Error::invalid("densities and thicknesses must be positive"));
        }
        Ok(LayerStack {
            side,
            layers,
            substrate_density,
        })
    }

    /// Au 200 nm on Ti 10 nm on sapphire.
    pub fn default_sphere() -> Self {
        LayerStack {
            side: Side::Sphere,
            layers: vec![
                Layer {
                    density: RHO_AU,
                    thickness: 200.0 * NM,
                },
                Layer {
                    density: RHO_TI,
                    thickness: 10.0 * NM,
                },
            ],
            substrate_density: RHO_AL2O3,
        }
    }

    /// Au 150 nm on Pt 10 nm on silicon.
    pub fn default_plate() -> Self {
        LayerStack {
            side: Side::Plate,
            layers: vec![
                Layer {
                    density: RHO_AU,
                    thickness: 150.0 * NM,
                },
                Layer {
                    density: RHO_PT,
                    thickness: 10.0 * NM,
                },
            ],
            substrate_density: RHO_SI,
        }
    }

    /// ρ₁ − Σ_k (ρ_k − ρ_{k+1}) e^{−(Δ₁+…+Δ_k)/λ}, with ρ_{N+1} the substrate.
    ///
    /// Evaluated as ρ_sub + Σ_k (ρ_k − ρ_{k+1})(1 − e^{−D_k/λ}) so both limits
    /// are exact.
    pub fn density_bracket(&self, lambda: f64) -> f64 {
        let mut depth = 0.0;
        let mut sum = self.substrate_density;
        for (k, layer) in self.layers.iter().enumerate() {
            depth += layer.thickness;
            let next = self
                .layers
                .get(k + 1)
                .map_or(self.substrate_density, |l| l.density);
            sum += (layer.density - next) * -(-depth / lambda).exp_m1();
        }
        sum
    }
}

/// Equivalent Yukawa pressure between two plates,
/// −2πGαλ² e^{−z/λ} B_sphere(λ) B_plate(λ).
pub fn yukawa_pressure(
    z: f64,
    alpha: f64,
    lambda: f64,
    plate: &LayerStack,
    sphere: &LayerStack,
) -> Result<f64> {
    if !(z.is_finite() && z > 0.0 && lambda.is_finite() && lambda > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!(
            "need z > 0 and λ > 0, got z = {z:e}, λ = {lambda:e}"
        )));
    }
    Ok(-2.0 * PI * G_NEWTON * alpha * lambda * lambda * (-z / lambda).exp()
        * sphere.density_bracket(lambda)
        * plate.density_bracket(lambda))
}

/// Largest allowed α at one λ and the separation giving it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExclusionPoint {
    pub lambda: f64,
    pub alpha_max: f64,
    pub z_star: f64,
}

/// α_max(λ) = min over the band grid of Δ_tot(z)/|P_hyp(z; α = 1, λ)|.
pub fn constrain_alpha(
    lambda: f64,
    band: &ConfidenceBand,
    plate: &LayerStack,
    sphere: &LayerStack,
) -> Result<ExclusionPoint> {
    let mut best = ExclusionPoint {
        lambda,
        alpha_max: f64::INFINITY,
        z_star: f64::NAN,
    };
    for (&z, &hw) in band.grid().iter().zip(band.half_widths()) {
        let p = yukawa_pressure(z, 1.0, lambda, plate, sphere)?.abs();
        let alpha = hw / p;
        if alpha < best.alpha_max {
            best.alpha_max = alpha;
            best.z_star = z;
        }
    }
    if !best.alpha_max.is_finite() {
        return Err(Error::Series(format!(
            "no finite constraint at λ = {:.1} nm",
            lambda / NM
        )));
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionCurve {
    pub points: Vec<ExclusionPoint>,
    pub confidence: f64,
}

impl ExclusionCurve {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("lambda_nm,alpha_max,z_star_nm\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{:e},{}", nm_label(p.lambda), p.alpha_max, nm_label(p.z_star));
        }
        out
    }
}

/// Logarithmic grid of `points` values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(Error::invalid("log grid needs 0 < lo < hi and at least two points"));
    }
    let step = (hi / lo).ln() / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                lo * (step * i as f64).exp()
            }
        })
        .collect())
}

pub fn exclusion_curve(
    lambdas: &[f64],
    band: &ConfidenceBand,
    plate: &LayerStack,
    sphere: &LayerStack,
) -> Result<ExclusionCurve> {
    let points = lambdas
        .par_iter()
        .map(|&l| constrain_alpha(l, band, plate, sphere))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExclusionCurve {
        points,
        confidence: band.confidence,
    })
}
