//! Electrostatic pressure from random patch potentials.

use crate::error::{Error, Result};
use crate::quad::Quadrature;
use crate::units::EPSILON_0;

/// Variance of the surface potential and the wave-number band of the grains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchParams {
    /// σ_v² in V².
    pub sigma_v_sq: f64,
    /// Wave numbers in 1/m.
    pub k_min: f64,
    pub k_max: f64,
}

/// Work functions (eV) of the Au (111), (100) and (110) faces.
pub const GOLD_WORK_FUNCTIONS: [f64; 3] = [5.47, 5.37, 5.31];

impl PatchParams {
    pub fn new(sigma_v_sq: f64, k_min: f64, k_max: f64) -> Result<Self> {
        if !(sigma_v_sq >= 0.0 && sigma_v_sq.is_finite()) {
            return Err(Error::invalid(format!("σ_v² must be non-negative, got {sigma_v_sq}")));
        }
        if !(k_min > 0.0 && k_max > k_min && k_max.is_finite()) {
            return Err(Error::invalid(format!("need 0 < k_min < k_max, got {k_min}, {k_max}")));
        }
        Ok(PatchParams {
            sigma_v_sq,
            k_min,
            k_max,
        })
    }

    /// Gold film with grains between 25 and 300 nm.
    pub fn gold() -> Self {
        PatchParams::new(
            sigma_v_sq_from_work_functions(&GOLD_WORK_FUNCTIONS),
            0.0209e9,
            0.251e9,
        )
        .expect("valid constants")
    }
}

/// σ_v² = ½ Σ (V_i − V̄)² for faces of equal area. Work functions in eV give
/// potentials in V one for one.
pub fn sigma_v_sq_from_work_functions(work_functions: &[f64]) -> f64 {
    let n = work_functions.len() as f64;
    let mean = work_functions.iter().sum::<f64>() / n;
    0.5 * work_functions.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
}

/// P = −2ε₀σ_v²/(k_max² − k_min²) ∫ k³/sinh²(kz) dk over [k_min, k_max].
pub fn patch_pressure(z: f64, params: &PatchParams) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::invalid(format!("separation must be positive, got {z}")));
    }
    if params.sigma_v_sq == 0.0 {
        return Ok(0.0);
    }
    // k³/sinh²(kz) = 4k³e^{−2kz}/(1 − e^{−2kz})², written to avoid overflow.
    let integrand = |k: f64| {
        let e = (-2.0 * k * z).exp();
        let d = -(-2.0 * k * z).exp_m1();
        4.0 * k * k * k * e / (d * d)
    };
    let est = Quadrature::with_rel_tol(1e-10).integrate(integrand, params.k_min, params.k_max)?;
    let (a, b) = (params.k_min, params.k_max);
    Ok(-2.0 * EPSILON_0 * params.sigma_v_sq / (b * b - a * a) * est.value)
}
