//! Finite-temperature Lifshitz pressure between two identical plates.
//!
//! Each Matsubara term is written in the dimensionless variables
//! y = 2qz and ζ = 2zξ/c, where q² = k⊥² + ξ²/c². The pressure is then
//!
//! P(z) = −(k_B T / 8πz³) Σ'_l ∫_{ζ_l}^∞ y² Σ_pol [r⁻² e^y − 1]⁻¹ dy,
//!
//! with the prime giving the l = 0 term half weight.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{Approach, DielectricModel, Source};
use crate::quad::Quadrature;
use crate::units::{nm_label, UnitContext, C, HBAR, K_B, NM, ZETA_3};

/// Squared inverse reflection coefficients r⁻² for the two polarizations.
/// An infinite value means the medium does not reflect (r = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    pub r_par_sq_inv: f64,
    pub r_perp_sq_inv: f64,
}

impl ReflectionPair {
    pub const PERFECT: ReflectionPair = ReflectionPair {
        r_par_sq_inv: 1.0,
        r_perp_sq_inv: 1.0,
    };

    /// Neither polarization reflects.
    pub fn is_transparent(&self) -> bool {
        self.r_par_sq_inv.is_infinite() && self.r_perp_sq_inv.is_infinite()
    }

    /// Σ_pol y² [r⁻² e^y − 1]⁻¹, written to avoid overflow and cancellation.
    fn kernel(&self, y: f64) -> f64 {
        let e = (-y).exp();
        let em1 = -(-y).exp_m1();
        let one = |inv: f64| {
            if inv.is_infinite() {
                0.0
            } else {
                e / ((inv - 1.0) + em1)
            }
        };
        y * y * (one(self.r_par_sq_inv) + one(self.r_perp_sq_inv))
    }
}

fn inv_sq(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        let r = num / den;
        r * r
    }
}

/// Fresnel coefficients in scale-free form: `q` and `zeta` are the wave-vector
/// magnitude and ξ/c in any common unit.
fn fresnel(eps: f64, q: f64, zeta: f64) -> ReflectionPair {
    let d = eps - 1.0;
    let k = (q * q + d * zeta * zeta).sqrt();
    // εq − k and q − k without cancellation.
    let par_num = d * ((eps + 1.0) * q * q - zeta * zeta) / (eps * q + k);
    let perp_num = d * zeta * zeta / (q + k);
    ReflectionPair {
        r_par_sq_inv: inv_sq(eps * q + k, par_num),
        r_perp_sq_inv: inv_sq(q + k, perp_num),
    }
}

fn impedance(z: f64, q: f64, zeta: f64) -> ReflectionPair {
    ReflectionPair {
        r_par_sq_inv: inv_sq(q + z * zeta, q - z * zeta),
        r_perp_sq_inv: inv_sq(z * q + zeta, z * q - zeta),
    }
}

fn wave_numbers(xi: f64, k_perp: f64) -> Result<(f64, f64)> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::invalid(format!("ξ must be positive, got {xi}")));
    }
    if !(k_perp >= 0.0 && k_perp.is_finite()) {
        return Err(Error::invalid(format!("k⊥ must be non-negative, got {k_perp}")));
    }
    let zeta = xi / C;
    Ok(((k_perp * k_perp + zeta * zeta).sqrt(), zeta))
}

/// Reflection in terms of the permittivity ε(iξ) at transverse momentum k⊥.
pub fn reflection_fresnel(eps: f64, xi: f64, k_perp: f64) -> Result<ReflectionPair> {
    if !(eps >= 1.0) {
        return Err(Error::invalid(format!("ε(iξ) must be ≥ 1, got {eps}")));
    }
    let (q, zeta) = wave_numbers(xi, k_perp)?;
    Ok(fresnel(eps, q, zeta))
}

/// Reflection in terms of the Leontovich surface impedance Z(iξ).
pub fn reflection_impedance(z: f64, xi: f64, k_perp: f64) -> Result<ReflectionPair> {
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::invalid(format!("impedance must be non-negative, got {z}")));
    }
    let (q, zeta) = wave_numbers(xi, k_perp)?;
    Ok(impedance(z, q, zeta))
}

/// −π²ħc / (240 z⁴), the ideal-metal pressure at zero temperature.
pub fn ideal_pressure(z: f64) -> f64 {
    -PI * PI * HBAR * C / (240.0 * z.powi(4))
}

fn prefactor(z: f64, temperature: f64) -> f64 {
    -K_B * temperature / (8.0 * PI * z.powi(3))
}

fn check_geometry(z: f64, temperature: f64) -> Result<()> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::invalid(format!("separation must be positive, got {z}")));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::invalid(format!("temperature must be positive, got {temperature}")));
    }
    Ok(())
}

fn zero_frequency_integral(approach: Approach, w: f64, quad: &Quadrature) -> Result<f64> {
    // ∫₀^∞ y²/(e^y − 1) dy
    let perfect = 2.0 * ZETA_3;
    let te = |pair: fn(f64, f64) -> f64| -> Result<f64> {
        let est = quad.integrate_to_infinity(
            |y| {
                let r2 = pair(y, w);
                if r2 == 0.0 {
                    return 0.0;
                }
                let e = (-y).exp();
                y * y * r2 * e / (1.0 - r2 * e)
            },
            0.0,
        )?;
        Ok(est.value)
    };
    match approach {
        Approach::Drude => Ok(perfect),
        Approach::Prescription => Ok(2.0 * perfect),
        Approach::Plasma => Ok(perfect
            + te(|y, w| {
                let s = (y * y + w * w).sqrt();
                // (y − s)/(y + s) = −w²/(y + s)²
                let r = w * w / ((y + s) * (y + s));
                r * r
            })?),
        Approach::Impedance => Ok(perfect
            + te(|y, w| {
                let r = (y - w) / (y + w);
                r * r
            })?),
    }
}

/// The half-weighted l = 0 term of the Matsubara sum.
pub fn zero_frequency_pressure(approach: Approach, z: f64, temperature: f64, omega_p: f64) -> Result<f64> {
    zero_frequency_with(approach, z, temperature, omega_p, &Quadrature::default())
}

fn zero_frequency_with(
    approach: Approach,
    z: f64,
    temperature: f64,
    omega_p: f64,
    quad: &Quadrature,
) -> Result<f64> {
    check_geometry(z, temperature)?;
    if matches!(approach, Approach::Plasma | Approach::Impedance) && !(omega_p > 0.0) {
        return Err(Error::invalid(format!("ω_p must be positive, got {omega_p}")));
    }
    let w = 2.0 * z * omega_p / C;
    Ok(0.5 * prefactor(z, temperature) * zero_frequency_integral(approach, w, quad)?)
}

/// Pressure split into the l = 0 term and the sum over l ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureResult {
    pub total: f64,
    pub zero_freq_term: f64,
    pub positive_freq_sum: f64,
    /// Number of positive-frequency terms summed explicitly.
    pub truncation_order: usize,
    pub approach: Approach,
}

/// Matsubara frequencies ξ_l = 2πk_B T l/ħ for l = 0..=order.
#[derive(Debug, Clone, PartialEq)]
pub struct MatsubaraGrid {
    pub temperature: f64,
    pub frequencies: Vec<f64>,
}

impl MatsubaraGrid {
    pub fn new(temperature: f64, order: usize) -> Self {
        let step = UnitContext::SI.matsubara_step(temperature);
        MatsubaraGrid {
            temperature,
            frequencies: (0..=order).map(|l| step * l as f64).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.frequencies.len() - 1
    }
}

/// Separations accepted by [`casimir_pressure`].
pub const SEPARATION_RANGE: (f64, f64) = (50e-9, 5e-6);

/// Number of consecutive small terms that ends the Matsubara sum.
const QUIET_TERMS: usize = 3;

/// Evaluates the pressure for one dielectric model at one temperature,
/// caching ε(iξ_l) across separations.
#[derive(Debug)]
pub struct LifshitzSolver {
    model: DielectricModel,
    temperature: f64,
    tol: f64,
    quad: Quadrature,
    max_terms: usize,
    eps_cache: RwLock<Vec<f64>>,
}

impl LifshitzSolver {
    pub fn new(model: DielectricModel, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::invalid(format!("temperature must be positive, got {temperature}")));
        }
        Ok(LifshitzSolver {
            model,
            temperature,
            tol: 1e-7,
            quad: Quadrature::default(),
            max_terms: 100_000,
            eps_cache: RwLock::new(Vec::new()),
        })
    }

    /// Relative tolerance for both the truncation test and each k⊥ integral.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self.quad.rel_tol = tol;
        self
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn model(&self) -> &DielectricModel {
        &self.model
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    fn xi(&self, l: usize) -> f64 {
        UnitContext::SI.matsubara_step(self.temperature) * l as f64
    }

    /// ε(iξ_l), l ≥ 1. Tabulated values are computed in parallel blocks and kept.
    pub fn epsilon(&self, l: usize) -> Result<f64> {
        assert!(l >= 1, "ε at l = 0 is not used");
        if self.model.source != Source::TabulatedKK {
            return self.model.epsilon(self.xi(l));
        }
        if let Some(&e) = self.eps_cache.read().expect("cache lock").get(l - 1) {
            return Ok(e);
        }
        let mut cache = self.eps_cache.write().expect("cache lock");
        let have = cache.len();
        if l > have {
            let want = l.max(2 * have).max(64);
            let fresh: Result<Vec<f64>> = (have + 1..=want)
                .into_par_iter()
                .map(|j| self.model.epsilon(self.xi(j)))
                .collect();
            cache.extend(fresh?);
        }
        Ok(cache[l - 1])
    }

    fn reflection(&self, l: usize) -> Result<impl Fn(f64, f64) -> ReflectionPair> {
        let eps = self.epsilon(l)?;
        let z_imp = if self.model.approach.uses_impedance() {
            match self.model.source {
                Source::AnalyticPlasma => self.model.impedance(self.xi(l))?,
                _ => 1.0 / eps.sqrt(),
            }
        } else {
            f64::NAN
        };
        let use_imp = self.model.approach.uses_impedance();
        Ok(move |y: f64, zeta: f64| {
            if use_imp {
                impedance(z_imp, y, zeta)
            } else {
                fresnel(eps, y, zeta)
            }
        })
    }

    /// Dimensionless k⊥ integral of the l-th term, l ≥ 1.
    pub fn term_integral(&self, l: usize, z: f64) -> Result<f64> {
        let zeta = 2.0 * z * self.xi(l) / C;
        let refl = self.reflection(l)?;
        let est = self
            .quad
            .integrate_to_infinity(|s| refl(zeta + s, zeta).kernel(zeta + s), 0.0)?;
        Ok(est.value)
    }

    /// Contribution of the l-th Matsubara term in Pa, l ≥ 1.
    pub fn matsubara_term(&self, l: usize, z: f64) -> Result<f64> {
        Ok(prefactor(z, self.temperature) * self.term_integral(l, z)?)
    }

    pub fn zero_frequency(&self, z: f64) -> Result<f64> {
        zero_frequency_with(
            self.model.approach,
            z,
            self.temperature,
            self.model.omega_p(),
            &self.quad,
        )
    }

    /// Sum over l ≥ 1 with truncation, and the number of explicit terms.
    pub fn positive_frequency_sum(&self, z: f64) -> Result<(f64, usize)> {
        let mut sum = 0.0;
        let mut quiet = 0;
        let mut prev = f64::NAN;
        for l in 1..=self.max_terms {
            let t = self.matsubara_term(l, z)?;
            sum += t;
            if t.abs() < self.tol * sum.abs() {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet == QUIET_TERMS {
                let ratio = t / prev;
                if ratio > 0.0 && ratio < 1.0 {
                    sum += t * ratio / (1.0 - ratio);
                }
                return Ok((sum, l));
            }
            prev = t;
        }
        Err(Error::Truncation(self.max_terms))
    }

    pub fn pressure(&self, z: f64) -> Result<PressureResult> {
        check_geometry(z, self.temperature)?;
        let (lo, hi) = SEPARATION_RANGE;
        if !(lo..=hi).contains(&z) {
            return Err(Error::invalid(format!(
                "separation {:.1} nm outside [{:.0}, {:.0}] nm",
                z / NM,
                lo / NM,
                hi / NM
            )));
        }
        let zero = self.zero_frequency(z)?;
        let (pos, order) = self.positive_frequency_sum(z)?;
        Ok(PressureResult {
            total: zero + pos,
            zero_freq_term: zero,
            positive_freq_sum: pos,
            truncation_order: order,
            approach: self.model.approach,
        })
    }

    /// Pressures at many separations, evaluated in parallel.
    pub fn curve(&self, separations: &[f64]) -> Result<PressureCurve> {
        let points = separations
            .par_iter()
            .map(|&z| self.pressure(z).map(|r| PressurePoint { z, result: r }))
            .collect::<Result<Vec<_>>>()?;
        Ok(PressureCurve { points })
    }
}

/// Lifshitz pressure for `model` at separation `z`, temperature `T`, with
/// relative tolerance `tol` for truncation and quadrature.
pub fn casimir_pressure(model: &DielectricModel, z: f64, temperature: f64, tol: f64) -> Result<PressureResult> {
    LifshitzSolver::new(model.clone(), temperature)?
        .with_tolerance(tol)
        .pressure(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressurePoint {
    pub z: f64,
    pub result: PressureResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureCurve {
    pub points: Vec<PressurePoint>,
}

impl PressureCurve {
    pub fn separations(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.z).collect()
    }

    pub fn totals(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.result.total).collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("z_nm,P_Pa,P_l0_Pa,P_lge1_Pa,approach,trunc_order\n");
        for p in &self.points {
            let r = &p.result;
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e},{},{}",
                nm_label(p.z),
                r.total,
                r.zero_freq_term,
                r.positive_freq_sum,
                r.approach.number(),
                r.truncation_order
            );
        }
        out
    }

    pub fn to_json_string(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row {
            z_nm: f64,
            #[serde(rename = "P_Pa")]
            p: f64,
            #[serde(rename = "P_l0_Pa")]
            p_l0: f64,
            #[serde(rename = "P_lge1_Pa")]
            p_lge1: f64,
            approach: u8,
            trunc_order: usize,
        }
        let rows: Vec<Row> = self
            .points
            .iter()
            .map(|p| Row {
                z_nm: nm_label(p.z),
                p: p.result.total,
                p_l0: p.result.zero_freq_term,
                p_lge1: p.result.positive_freq_sum,
                approach: p.result.approach.number(),
                trunc_order: p.result.truncation_order,
            })
            .collect();
        Ok(serde_json::to_string_pretty(&rows)?)
    }
}
