//! End-to-end chain: theory curves for the four approaches, synthetic data,
//! outlier rejection, error budgets, confidence bands and verdicts.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrections::{roughness_average, RoughnessHistogram};
use crate::error::{Error, Result};
use crate::fixtures::COMPARISON_TABLE;
use crate::instrument::{
    pressure_resolution, synthesize_measurement_sets, MeasurementSet, OscillatorParams,
    OutlierPlant, SynthesisConfig,
};
use crate::interp::PressureInterpolant;
use crate::lifshitz::{zero_frequency_pressure, LifshitzSolver};
use crate::materials::{Approach, DielectricModel, DrudeParams, OpticalTable};
use crate::metrology::{
    comparison_band, detect_outlier_sets, pooled_random_error, systematic_error,
    theoretical_error, total_experimental_error_pooled, verdict, BinnedData, ConfidenceBand,
    CriticalTables, ErrorBudget, Neighbors, OutlierReport, RandomError, VerdictReport,
};
use crate::units::NM;

/// Separations at which theory and experiment are compared, m.
pub fn comparison_separations() -> Vec<f64> {
    COMPARISON_TABLE.iter().map(|r| r.z_nm * NM).collect()
}

/// How the theory curves are computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheorySettings {
    pub temperature: f64,
    pub tolerance: f64,
    /// Grid of the Lifshitz evaluations, m.
    pub raw_min: f64,
    pub raw_max: f64,
    pub raw_step: f64,
    /// Grid of the roughness-corrected curve, m.
    pub corrected_min: f64,
    pub corrected_max: f64,
    pub corrected_step: f64,
    pub roughness: bool,
}

impl Default for TheorySettings {
    fn default() -> Self {
        TheorySettings {
            temperature: 300.0,
            tolerance: 1e-7,
            raw_min: 110.0 * NM,
            raw_max: 800.0 * NM,
            raw_step: 10.0 * NM,
            corrected_min: 150.0 * NM,
            corrected_max: 760.0 * NM,
            corrected_step: 5.0 * NM,
            roughness: true,
        }
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && step > 0.0) {
        return Err(Error::invalid("grid needs 0 < min < max and a positive step"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

/// Pressure curves of all four approaches, with roughness if requested.
#[derive(Debug, Clone)]
pub struct TheoryCurves {
    curves: Vec<(Approach, PressureInterpolant)>,
    pub settings: TheorySettings,
}

impl TheoryCurves {
    pub fn compute(
        settings: TheorySettings,
        table: Arc<OpticalTable>,
        drude: DrudeParams,
        plate: &RoughnessHistogram,
        sphere: &RoughnessHistogram,
    ) -> Result<Self> {
        let zs = grid(settings.raw_min, settings.raw_max, settings.raw_step)?;
        let t = settings.temperature;
        let solve = |model: DielectricModel| -> Result<Vec<f64>> {
            let solver = LifshitzSolver::new(model, t)?.with_tolerance(settings.tolerance);
            Ok(solver.curve(&zs)?.totals())
        };
        let drude_curve = solve(DielectricModel::tabulated(Approach::Drude, drude, table.clone())?)?;
        // Approaches 1 and 2 differ only in the l = 0 term.
        let prescription_curve = zs
            .iter()
            .zip(&drude_curve)
            .map(|(&z, &p)| {
                Ok(p - zero_frequency_pressure(Approach::Drude, z, t, drude.omega_p)?
                    + zero_frequency_pressure(Approach::Prescription, z, t, drude.omega_p)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let plasma_curve = solve(DielectricModel::plasma(Approach::Plasma, drude.omega_p)?)?;
        let impedance_curve = solve(DielectricModel::tabulated(Approach::Impedance, drude, table)?)?;

        let raw = [
            (Approach::Drude, drude_curve),
            (Approach::Prescription, prescription_curve),
            (Approach::Plasma, plasma_curve),
            (Approach::Impedance, impedance_curve),
        ];
        let mut curves = Vec::with_capacity(4);
        for (approach, values) in raw {
            let interp = PressureInterpolant::new(&zs, &values)?;
            let interp = if settings.roughness {
                let zc = grid(
                    settings.corrected_min,
                    settings.corrected_max,
                    settings.corrected_step,
                )?;
                let corrected = zc
                    .par_iter()
                    .map(|&z| roughness_average(|x| Ok(interp.eval(x)), plate, sphere, z))
                    .collect::<Result<Vec<_>>>()?;
                PressureInterpolant::new(&zc, &corrected)?
            } else {
                interp
            };
            curves.push((approach, interp));
        }
        Ok(TheoryCurves { curves, settings })
    }

    /// The bundled gold table, gold Drude parameters and bundled roughness.
    pub fn canonical(settings: TheorySettings) -> Result<Self> {
        TheoryCurves::compute(
            settings,
            Arc::new(OpticalTable::bundled_gold()),
            DrudeParams::gold(),
            &RoughnessHistogram::bundled_plate(),
            &RoughnessHistogram::bundled_sphere(),
        )
    }

    pub fn interpolant(&self, approach: Approach) -> &PressureInterpolant {
        &self
            .curves
            .iter()
            .find(|(a, _)| *a == approach)
            .expect("all approaches present")
            .1
    }

    pub fn pressure(&self, approach: Approach, z: f64) -> Result<f64> {
        let interp = self.interpolant(approach);
        let (lo, hi) = interp.domain();
        if z < lo || z > hi {
            return Err(Error::invalid(format!(
                "separation {:.2} nm outside the theory grid [{:.0}, {:.0}] nm",
                z / NM,
                lo / NM,
                hi / NM
            )));
        }
        Ok(interp.eval(z))
    }
}

/// Metrological settings of the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub confidence: f64,
    pub bin_width: f64,
    pub neighbors: Neighbors,
    pub delta_z: f64,
    pub delta_c_rel: f64,
    pub delta_omega: f64,
    pub delta_radius: f64,
    pub oscillator: OscillatorParams,
    pub band_min: f64,
    pub band_max: f64,
    pub band_step: f64,
    pub window: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            confidence: 0.95,
            bin_width: 1.2 * NM,
            neighbors: Neighbors::Adaptive,
            delta_z: 0.6 * NM,
            delta_c_rel: 0.005,
            delta_omega: 2.0 * PI * 6e-3,
            delta_radius: 0.2e-6,
            oscillator: OscillatorParams::default(),
            band_min: 160.0 * NM,
            band_max: 750.0 * NM,
            band_step: 1.0 * NM,
            window: 3.0 * NM,
        }
    }
}

/// Result of the data-only part of the analysis.
#[derive(Debug, Clone)]
pub struct ExperimentAnalysis {
    pub outliers: OutlierReport,
    pub kept: Vec<MeasurementSet>,
    pub random: Vec<RandomError>,
    pub budgets: Vec<ErrorBudget>,
}

/// Reject outlying sets, then compute random, systematic and total errors on
/// the band grid.
pub fn analyze_experiment(
    sets: &[MeasurementSet],
    settings: &AnalysisSettings,
) -> Result<ExperimentAnalysis> {
    let tables = CriticalTables::embedded();
    let beta = settings.confidence;
    let outliers = detect_outlier_sets(sets, settings.bin_width, &tables, beta)?;
    let flagged = outliers.flagged();
    let kept: Vec<MeasurementSet> = sets
        .iter()
        .filter(|s| !flagged.contains(&s.set_id))
        .cloned()
        .collect();
    let data = BinnedData::new(&kept, settings.bin_width)?;
    let data_hi = data.z_start + data.bins.len() as f64 * data.width;
    let zs = grid(settings.band_min, settings.band_max, settings.band_step)?;
    let resolution = pressure_resolution(
        settings.oscillator.omega_0,
        settings.delta_omega,
        &settings.oscillator,
    );
    let radius_rel = settings.delta_radius / settings.oscillator.radius;

    let rows = zs
        .par_iter()
        .map(|&z| {
            let probe = z.clamp(data.z_start, data_hi * (1.0 - 1e-12));
            let mut r = pooled_random_error(&data, probe, settings.neighbors, &tables, beta)?;
            r.z = z;
            let p = r.mean_pressure;
            let syst = systematic_error(p, resolution / p.abs(), radius_rel)?;
            let total = total_experimental_error_pooled(r.half_width, syst, r.std_of_mean)?;
            Ok((
                r,
                ErrorBudget {
                    z,
                    random_abs: r.half_width,
                    systematic_abs: syst,
                    total_abs: total,
                    confidence: beta,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (random, budgets) = rows.into_iter().unzip();
    Ok(ExperimentAnalysis {
        outliers,
        kept,
        random,
        budgets,
    })
}

/// Confidence band for one theory, from the experimental budgets and the
/// theoretical error of that theory.
pub fn band_for_theory<F>(
    budgets: &[ErrorBudget],
    theory: F,
    settings: &AnalysisSettings,
    confidence: f64,
) -> Result<ConfidenceBand>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut z = Vec::with_capacity(budgets.len());
    let mut hw = Vec::with_capacity(budgets.len());
    for b in budgets {
        let p = theory(b.z)?;
        let theor = theoretical_error(
            p,
            b.z,
            settings.oscillator.radius,
            settings.delta_z,
            settings.delta_c_rel,
        )?;
        z.push(b.z);
        hw.push(comparison_band(b.total_abs, theor, confidence)?);
    }
    ConfidenceBand::new(z, hw, confidence)
}

/// Settings of the canonical synthetic experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSettings {
    pub seed: u64,
    pub synthesis: SynthesisConfig,
    pub theory: TheorySettings,
    pub analysis: AnalysisSettings,
}

impl Default for CanonicalSettings {
    fn default() -> Self {
        CanonicalSettings {
            seed: 20070101,
            synthesis: SynthesisConfig {
                outlier: Some(OutlierPlant {
                    set_index: 6,
                    shift_sigma: 5.0,
                }),
                ..Default::default()
            },
            theory: TheorySettings::default(),
            analysis: AnalysisSettings::default(),
        }
    }
}

/// Fully analysed canonical experiment with approach 4 as truth.
#[derive(Debug, Clone)]
pub struct CanonicalRun {
    pub settings: CanonicalSettings,
    pub theory: TheoryCurves,
    pub sets: Vec<MeasurementSet>,
    pub analysis: ExperimentAnalysis,
}

impl CanonicalRun {
    pub fn with_theory(settings: CanonicalSettings, theory: TheoryCurves) -> Result<Self> {
        let truth = theory.interpolant(Approach::Impedance);
        let sets = synthesize_measurement_sets(|z| truth.eval(z), &settings.synthesis, settings.seed)?;
        let analysis = analyze_experiment(&sets, &settings.analysis)?;
        Ok(CanonicalRun {
            settings,
            theory,
            sets,
            analysis,
        })
    }

    pub fn new(settings: CanonicalSettings) -> Result<Self> {
        let theory = TheoryCurves::canonical(settings.theory)?;
        CanonicalRun::with_theory(settings, theory)
    }

    pub fn band(&self, approach: Approach, confidence: f64) -> Result<ConfidenceBand> {
        band_for_theory(
            &self.analysis.budgets,
            |z| self.theory.pressure(approach, z),
            &self.settings.analysis,
            confidence,
        )
    }

    /// Verdict for one approach at the given separations.
    pub fn verdict(&self, approach: Approach, confidence: f64, eval_z: &[f64]) -> Result<VerdictReport> {
        let band = self.band(approach, confidence)?;
        verdict(
            &format!("approach {}", approach.number()),
            &self.analysis.kept,
            |z| self.theory.pressure(approach, z),
            &band,
            eval_z,
            self.settings.analysis.window,
        )
    }
}
