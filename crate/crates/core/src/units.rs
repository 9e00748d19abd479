//! Physical constants and unit conversions.
//!
//! Everything inside the crate is SI. Electron-volts appear only when reading
//! or writing files and when building models from the conventional eV values
//! of the Drude parameters.

/// Fundamental constants used throughout the computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitContext {
    /// Speed of light, m/s.
    pub c: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Elementary charge, C.
    pub e: f64,
    /// Angular frequency corresponding to 1 eV, rad/s.
    pub ev_to_rads: f64,
}

impl UnitContext {
    pub const SI: UnitContext = UnitContext {
        c: 2.997924e8,
        hbar: 1.05457e-34,
        k_b: 1.38065e-23,
        e: 1.602176e-19,
        ev_to_rads: 1.51927e15,
    };

    pub fn ev_to_rads(&self, ev: f64) -> f64 {
        ev * self.ev_to_rads
    }

    pub fn rads_to_ev(&self, omega: f64) -> f64 {
        omega / self.ev_to_rads
    }

    /// First Matsubara frequency 2π k_B T / ħ.
    pub fn matsubara_step(&self, temperature: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.k_b * temperature / self.hbar
    }
}

impl Default for UnitContext {
    fn default() -> Self {
        Self::SI
    }
}

pub const C: f64 = UnitContext::SI.c;
pub const HBAR: f64 = UnitContext::SI.hbar;
pub const K_B: f64 = UnitContext::SI.k_b;
pub const EV: f64 = UnitContext::SI.ev_to_rads;

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Newtonian gravitational constant, m³/(kg·s²).
pub const G_NEWTON: f64 = 6.674_30e-11;

/// Apéry's constant ζ(3).
pub const ZETA_3: f64 = 1.202_056_903_159_594_3;

pub const NM: f64 = 1e-9;

/// Separation in nm rounded to 1e-6 nm, for output columns.
pub fn nm_label(z: f64) -> f64 {
    (z / NM * 1e6).round() / 1e6
}
pub const MPA: f64 = 1e-3;
