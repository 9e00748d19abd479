//! Corrections applied to the bare plate–plate pressure.

mod patch;
mod roughness;

pub use patch::{patch_pressure, sigma_v_sq_from_work_functions, PatchParams, GOLD_WORK_FUNCTIONS};
pub use roughness::{
    roughness_average, roughness_diffraction_factor, roughness_factor, roughness_factor_corr,
    roughness_multiplicative, stochastic_variance, zero_roughness_level, CorrelationCurve,
    RoughnessHistogram, Surface, PLATE_BINS, PLATE_DELTA_NM, PLATE_MAX_NM, SPHERE_BINS,
    SPHERE_DELTA_NM, SPHERE_MAX_NM,
};
