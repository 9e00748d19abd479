//! Dielectric response of the plate metal on the imaginary frequency axis.
//!
//! A [`DielectricModel`] combines one of the four thermal prescriptions with a
//! source for ε(iξ): the analytic Drude or plasma forms, or a tabulated
//! optical table pushed through the dispersion relation.

mod kk;
mod table;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use kk::epsilon_kk;
pub use table::{
    load_optical_table, LorentzOscillator, OpticalRow, OpticalTable, TableFormat, GOLD_INTERBAND,
    GOLD_INTERBAND_PLASMA_EV,
};

use crate::error::{Error, Result};
use crate::quad::Quadrature;
use crate::units::{UnitContext, C};

/// Free-electron parameters in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeParams {
    pub omega_p: f64,
    pub gamma: f64,
}

impl DrudeParams {
    pub fn new(omega_p: f64, gamma: f64) -> Result<Self> {
        if !(omega_p > 0.0 && omega_p.is_finite()) {
            return Err(Error::invalid(format!("ω_p must be positive, got {omega_p}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("γ must be non-negative, got {gamma}")));
        }
        Ok(DrudeParams { omega_p, gamma })
    }

    pub fn from_ev(omega_p_ev: f64, gamma_ev: f64) -> Result<Self> {
        let u = UnitContext::SI;
        DrudeParams::new(u.ev_to_rads(omega_p_ev), u.ev_to_rads(gamma_ev))
    }

    /// Gold: ω_p = 9.0 eV, γ = 0.035 eV.
    pub fn gold() -> Self {
        DrudeParams::from_ev(9.0, 0.035).expect("valid constants")
    }

    pub fn is_plasma(&self) -> bool {
        self.gamma == 0.0
    }

    /// ε(ω) = 1 − ω_p² / (ω(ω + iγ)) on the real axis.
    pub fn epsilon_real_axis(&self, omega: f64) -> Complex64 {
        let wp2 = self.omega_p * self.omega_p;
        Complex64::new(1.0, 0.0) - wp2 / (omega * Complex64::new(omega, self.gamma))
    }

    /// ε(iξ) = 1 + ω_p² / (ξ(ξ + γ)).
    pub fn epsilon_imag_axis(&self, xi: f64) -> f64 {
        1.0 + self.omega_p * self.omega_p / (xi * (xi + self.gamma))
    }
}

/// The four prescriptions for the thermal Casimir pressure. They share the
/// positive Matsubara frequencies and differ in how the l = 0 term is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Approach {
    /// Drude zero-frequency term: TM reflects perfectly, TE does not.
    Drude,
    /// Both polarizations reflect perfectly at zero frequency.
    Prescription,
    /// Plasma-model dielectric function throughout.
    Plasma,
    /// Leontovich surface impedance extrapolated from infrared optics.
    Impedance,
}

impl Approach {
    pub const ALL: [Approach; 4] = [
        Approach::Drude,
        Approach::Prescription,
        Approach::Plasma,
        Approach::Impedance,
    ];

    pub fn number(self) -> u8 {
        match self {
            Approach::Drude => 1,
            Approach::Prescription => 2,
            Approach::Plasma => 3,
            Approach::Impedance => 4,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        Approach::ALL
            .into_iter()
            .find(|a| a.number() == n)
            .ok_or_else(|| Error::invalid(format!("approach must be 1–4, got {n}")))
    }

    /// Positive-frequency terms use impedance reflection coefficients.
    pub fn uses_impedance(self) -> bool {
        matches!(self, Approach::Impedance)
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Where ε(iξ) comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    AnalyticDrude,
    AnalyticPlasma,
    TabulatedKK,
}

#[derive(Debug, Clone)]
pub struct DielectricModel {
    pub approach: Approach,
    pub source: Source,
    pub drude: DrudeParams,
    table: Option<Arc<OpticalTable>>,
    pub kk_quad: Quadrature,
}

impl DielectricModel {
    pub fn new(
        approach: Approach,
        source: Source,
        drude: DrudeParams,
        table: Option<Arc<OpticalTable>>,
    ) -> Result<Self> {
        match source {
            Source::AnalyticPlasma if !drude.is_plasma() => {
                return Err(Error::invalid("analytic plasma source requires γ = 0"))
            }
            Source::TabulatedKK if table.is_none() => {
                return Err(Error::invalid("tabulated source requires an optical table"))
            }
            _ => {}
        }
        Ok(DielectricModel {
            approach,
            source,
            drude,
            table,
            kk_quad: Quadrature::default(),
        })
    }

    /// Plasma model ε = 1 + ω_p²/ξ² for the given approach.
    pub fn plasma(approach: Approach, omega_p: f64) -> Result<Self> {
        DielectricModel::new(
            approach,
            Source::AnalyticPlasma,
            DrudeParams::new(omega_p, 0.0)?,
            None,
        )
    }

    pub fn analytic_drude(approach: Approach, drude: DrudeParams) -> Result<Self> {
        DielectricModel::new(approach, Source::AnalyticDrude, drude, None)
    }

    pub fn tabulated(approach: Approach, drude: DrudeParams, table: Arc<OpticalTable>) -> Result<Self> {
        DielectricModel::new(approach, Source::TabulatedKK, drude, Some(table))
    }

    pub fn with_kk_tolerance(mut self, rel_tol: f64) -> Self {
        self.kk_quad.rel_tol = rel_tol;
        self
    }

    /// Same dielectric data under a different prescription.
    pub fn with_approach(&self, approach: Approach) -> Self {
        DielectricModel {
            approach,
            ..self.clone()
        }
    }

    pub fn table(&self) -> Option<&OpticalTable> {
        self.table.as_deref()
    }

    pub fn omega_p(&self) -> f64 {
        self.drude.omega_p
    }

    pub fn epsilon(&self, xi: f64) -> Result<f64> {
        epsilon_imag_axis(self, xi)
    }

    pub fn impedance(&self, xi: f64) -> Result<f64> {
        impedance_imag_axis(self, xi)
    }
}

/// ε(iξ) for ξ > 0.
pub fn epsilon_imag_axis(model: &DielectricModel, xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::invalid(format!("ξ must be positive, got {xi}")));
    }
    let wp2 = model.drude.omega_p * model.drude.omega_p;
    match model.source {
        Source::AnalyticDrude => Ok(model.drude.epsilon_imag_axis(xi)),
        Source::AnalyticPlasma => Ok(1.0 + wp2 / (xi * xi)),
        Source::TabulatedKK => {
            let table = model.table.as_deref().expect("validated at construction");
            epsilon_kk(table, &model.drude, xi, &model.kk_quad)
        }
    }
}

/// Leontovich impedance Z(iξ) = 1/√ε(iξ).
pub fn impedance_imag_axis(model: &DielectricModel, xi: f64) -> Result<f64> {
    match model.source {
        Source::AnalyticPlasma => {
            if !(xi > 0.0 && xi.is_finite()) {
                return Err(Error::invalid(format!("ξ must be positive, got {xi}")));
            }
            let wp = model.drude.omega_p;
            Ok(xi / (wp * wp + xi * xi).sqrt())
        }
        _ => Ok(1.0 / epsilon_imag_axis(model, xi)?.sqrt()),
    }
}

/// Polarization- and momentum-dependent impedances at imaginary frequency
/// ω = iξ. Returns `(Z_par, Z_perp)`; their product is always 1/ε.
pub fn exact_impedances(epsilon: f64, xi: f64, k_perp: f64) -> (f64, f64) {
    let root = (xi * xi * epsilon + C * C * k_perp * k_perp).sqrt();
    (root / (xi * epsilon), xi / root)
}
