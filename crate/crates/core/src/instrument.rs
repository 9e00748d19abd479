//! Torsional-oscillator measurement chain.
//!
//! Separation bookkeeping, electrostatic calibration force, conversion of the
//! resonant frequency shift into an equivalent plate-plate pressure, and a
//! seeded generator of synthetic measurement sets.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{EPSILON_0, NM};

/// Mechanical and geometric constants of the oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    /// Natural angular resonant frequency, rad/s.
    pub omega_0: f64,
    /// b²/I in 1/kg.
    pub b2_over_i: f64,
    /// Sphere radius, m.
    pub radius: f64,
    /// Separation offset D, m.
    pub offset: f64,
    /// Lever arm b, m.
    pub lever_arm: f64,
    /// Capacitance-to-torque factor, N/F.
    pub k_cap: f64,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        OscillatorParams {
            omega_0: 2.0 * PI * 702.92,
            b2_over_i: 1.2579e9,
            radius: 148.7e-6,
            offset: 9349.7 * NM,
            lever_arm: 210e-6,
            k_cap: 50455.0,
        }
    }
}

impl OscillatorParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_0", self.omega_0),
            ("b2_over_i", self.b2_over_i),
            ("radius", self.radius),
            ("offset", self.offset),
            ("lever_arm", self.lever_arm),
            ("k_cap", self.k_cap),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// z = z_meas − D − bθ.
pub fn absolute_separation(z_meas: f64, offset: f64, lever_arm: f64, theta: f64) -> Result<f64> {
    let z = z_meas - offset - lever_arm * theta;
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::invalid(format!(
            "absolute separation must be positive, got {z:e} m"
        )));
    }
    Ok(z)
}

/// Capacitive angle detector geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorGeometry {
    /// Electrode width w, m.
    pub width: f64,
    /// Electrode length w', m.
    pub length: f64,
    /// Gap d_g, m.
    pub gap: f64,
    /// Total capacitance C_T, F.
    pub c_total: f64,
    /// Voltage noise density, V/√Hz.
    pub noise_density: f64,
    /// Excitation amplitude V_i, V.
    pub excitation: f64,
}

impl Default for DetectorGeometry {
    fn default() -> Self {
        DetectorGeometry {
            width: 250e-6,
            length: 190e-6,
            gap: 2e-6,
            c_total: 20e-12,
            noise_density: 10e-9,
            excitation: 1.0,
        }
    }
}

impl DetectorGeometry {
    /// Parallel-plate capacitance C_o = ε₀ w w' / d_g.
    pub fn electrode_capacitance(&self) -> f64 {
        EPSILON_0 * self.width * self.length / self.gap
    }
}

/// Δθ = (ΔV/V_i)(C_T/C_o)(2d_g/w') with ΔV = noise density × √ν.
pub fn angular_noise_floor(geom: &DetectorGeometry, bandwidth: f64) -> Result<f64> {
    let inputs = [
        geom.width,
        geom.length,
        geom.gap,
        geom.c_total,
        geom.noise_density,
        geom.excitation,
        bandwidth,
    ];
    if inputs.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::invalid("detector geometry and bandwidth must be positive"));
    }
    let dv = geom.noise_density * bandwidth.sqrt();
    Ok(dv / geom.excitation * geom.c_total / geom.electrode_capacitance() * 2.0 * geom.gap
        / geom.length)
}

const FORCE_SERIES_TOL: f64 = 1e-12;
const FORCE_SERIES_MAX_TERMS: usize = 50_000_000;

/// Magnitude of the exact sphere-plane electrostatic force.
///
/// F = 2πε₀(V − V₀)² Σ_{n≥1} (n coth nu − coth u)/sinh nu with cosh u = 1 + z/R.
/// The force is attractive; the returned value is its magnitude.
pub fn electrostatic_force(z: f64, radius: f64, v_applied: f64, v_0: f64) -> Result<f64> {
    if !(z.is_finite() && z > 0.0 && radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(format!(
            "separation and radius must be positive, got z = {z:e}, R = {radius:e}"
        )));
    }
    let dv = v_applied - v_0;
    if dv == 0.0 {
        return Ok(0.0);
    }
    // cosh u = 1 + x  ⇔  sinh(u/2) = √(x/2), accurate for small x.
    let u = 2.0 * (0.5 * z / radius).sqrt().asinh();
    if !(u.is_finite() && u > 0.0) {
        return Err(Error::Series(format!("degenerate geometry z/R = {:e}", z / radius)));
    }
    let coth_u = 1.0 / u.tanh();
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    // The n = 1 term vanishes identically.
    for n in 2..=FORCE_SERIES_MAX_TERMS {
        let t = force_term(n as f64, u, coth_u);
        sum += t;
        if t < prev && t <= FORCE_SERIES_TOL * sum {
            return Ok(2.0 * PI * EPSILON_0 * dv * dv * sum);
        }
        prev = t;
    }
    Err(Error::Series(format!(
        "electrostatic series not converged after {FORCE_SERIES_MAX_TERMS} terms"
    )))
}

fn force_term(n: f64, u: f64, coth_u: f64) -> f64 {
    let x = n * u;
    // 1/sinh x = 2e^{-x}/(1 − e^{-2x}); stays finite where sinh overflows.
    let e = (-x).exp();
    (n / x.tanh() - coth_u) * 2.0 * e / (1.0 - e * e)
}

/// P = −(1/2πR)(ω₀² − ω_r²) I/b².
pub fn pressure_from_frequency_shift(omega_r: f64, params: &OscillatorParams) -> Result<f64> {
    params.validate()?;
    if !(omega_r.is_finite() && omega_r >= 0.0 && omega_r <= params.omega_0) {
        return Err(Error::invalid(format!(
            "resonant frequency must lie in [0, ω₀], got {omega_r}"
        )));
    }
    let gradient = (params.omega_0 - omega_r) * (params.omega_0 + omega_r) / params.b2_over_i;
    Ok(-gradient / (2.0 * PI * params.radius))
}

/// Inverse of [`pressure_from_frequency_shift`].
pub fn frequency_from_pressure(pressure: f64, params: &OscillatorParams) -> Result<f64> {
    params.validate()?;
    let w0sq = params.omega_0 * params.omega_0;
    let shift = -pressure * 2.0 * PI * params.radius * params.b2_over_i;
    if !(pressure.is_finite() && pressure <= 0.0 && shift <= w0sq) {
        return Err(Error::invalid(format!(
            "pressure {pressure:e} Pa outside the invertible range"
        )));
    }
    Ok((w0sq - shift).sqrt())
}

/// Pressure change caused by a frequency error Δω_r near ω_r (first order).
pub fn pressure_resolution(omega_r: f64, delta_omega: f64, params: &OscillatorParams) -> f64 {
    2.0 * omega_r * delta_omega / (params.b2_over_i * 2.0 * PI * params.radius)
}

/// One repetition of the pressure measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub set_id: usize,
    /// (z in m, P in Pa), z strictly increasing.
    pub points: Vec<(f64, f64)>,
}

impl MeasurementSet {
    pub fn new(set_id: usize, points: Vec<(f64, f64)>) -> Result<Self> {
        for (i, w) in points.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidRow {
                    row: i + 2,
                    message: format!("set {set_id}: separations must increase"),
                });
            }
        }
        if points.iter().any(|(z, p)| !(z.is_finite() && *z > 0.0 && p.is_finite())) {
            return Err(Error::invalid(format!("set {set_id}: non-finite point")));
        }
        Ok(MeasurementSet { set_id, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Serialize sets as `set_id,z_nm,P_Pa`.
pub fn sets_to_csv_string(sets: &[MeasurementSet]) -> String {
    let mut out = String::from("set_id,z_nm,P_Pa\n");
    for set in sets {
        for (z, p) in &set.points {
            let _ = writeln!(out, "{},{},{:e}", set.set_id, z / NM, p);
        }
    }
    out
}

pub fn parse_sets_csv(text: &str) -> Result<Vec<MeasurementSet>> {
    #[derive(Deserialize)]
    struct Row {
        set_id: usize,
        z_nm: f64,
        #[serde(rename = "P_Pa")]
        p_pa: f64,
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut grouped: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        match grouped.iter_mut().find(|(id, _)| *id == row.set_id) {
            Some((_, pts)) => pts.push((row.z_nm * NM, row.p_pa)),
            None => grouped.push((row.set_id, vec![(row.z_nm * NM, row.p_pa)])),
        }
    }
    grouped
        .into_iter()
        .map(|(id, pts)| MeasurementSet::new(id, pts))
        .collect()
}

pub fn load_sets(path: &Path) -> Result<Vec<MeasurementSet>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_sets_csv(&text).map_err(|e| match e {
        Error::Csv(err) => Error::Parse {
            path: path.to_path_buf(),
            message: err.to_string(),
        },
        other => other,
    })
}

/// Per-point noise of the synthetic measurement.
///
/// Pressure noise is Gaussian. Separation errors are uniform: an independent
/// jitter per point and optionally one offset per set, both applied to the
/// true separation while the nominal one is reported. The offset D is
/// calibrated once for all sets, so its error is common to every point and is
/// carried by the theoretical error instead; the canonical model has no
/// per-set offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation of the pressure noise, Pa.
    pub sigma_pressure: f64,
    /// Half-width of the per-point separation error, m.
    pub point_jitter: f64,
    /// Half-width of the per-set separation error, m.
    pub set_jitter: f64,
}

impl NoiseModel {
    pub const NONE: NoiseModel = NoiseModel {
        sigma_pressure: 0.0,
        point_jitter: 0.0,
        set_jitter: 0.0,
    };

    /// Noise reproducing the measured error scale.
    pub fn canonical() -> Self {
        NoiseModel {
            sigma_pressure: 0.25e-3,
            point_jitter: 0.2 * NM,
            set_jitter: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        for v in [self.sigma_pressure, self.point_jitter, self.set_jitter] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid("noise amplitudes must be non-negative"));
            }
        }
        Ok(())
    }
}

/// A set whose pressures are displaced by a multiple of the noise σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierPlant {
    pub set_index: usize,
    pub shift_sigma: f64,
}

/// Layout of a synthetic experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub n_sets: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub min_points: usize,
    pub max_points: usize,
    pub noise: NoiseModel,
    pub outlier: Option<OutlierPlant>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            n_sets: 15,
            z_min: 160.0 * NM,
            z_max: 750.0 * NM,
            min_points: 288,
            max_points: 293,
            noise: NoiseModel::canonical(),
            outlier: None,
        }
    }
}

/// Generate `n_sets` sets on mutually misaligned, non-uniform grids.
///
/// Each set draws its own seed from a master stream, so output does not depend
/// on how the sets are scheduled across threads.
pub fn synthesize_measurement_sets<F>(
    truth: F,
    config: &SynthesisConfig,
    seed: u64,
) -> Result<Vec<MeasurementSet>>
where
    F: Fn(f64) -> f64 + Sync,
{
    config.noise.validate()?;
    if config.n_sets == 0 {
        return Err(Error::invalid("at least one set required"));
    }
    if !(config.z_min > 0.0 && config.z_max > config.z_min) {
        return Err(Error::invalid("separation range must be positive and increasing"));
    }
    if config.min_points < 2 || config.max_points < config.min_points {
        return Err(Error::invalid("invalid points-per-set range"));
    }
    if let Some(o) = config.outlier {
        if o.set_index >= config.n_sets {
            return Err(Error::invalid(format!(
                "outlier set {} out of range for {} sets",
                o.set_index, config.n_sets
            )));
        }
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..config.n_sets).map(|_| master.random()).collect();
    seeds
        .par_iter()
        .enumerate()
        .map(|(k, &s)| synthesize_one(&truth, config, k, s))
        .collect()
}

fn synthesize_one<F: Fn(f64) -> f64>(
    truth: &F,
    config: &SynthesisConfig,
    set_id: usize,
    seed: u64,
) -> Result<MeasurementSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(config.min_points..=config.max_points);
    let span = config.z_max - config.z_min;

    let gaps: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = gaps.iter().sum();
    // Shrink slightly and shift so grids of different sets do not coincide.
    let usable = span * rng.random_range(0.995..1.0);
    let start = config.z_min + rng.random_range(0.0..=(span - usable));
    let mut grid = Vec::with_capacity(n);
    let mut z = start;
    grid.push(z);
    for g in &gaps {
        z += g / total * usable;
        grid.push(z.min(config.z_max));
    }

    let noise = config.noise;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let set_shift = if noise.set_jitter > 0.0 {
        rng.random_range(-noise.set_jitter..=noise.set_jitter)
    } else {
        0.0
    };
    let outlier_shift = match config.outlier {
        Some(o) if o.set_index == set_id => o.shift_sigma * noise.sigma_pressure,
        _ => 0.0,
    };
    let points = grid
        .into_iter()
        .map(|z_nom| {
            let jitter = if noise.point_jitter > 0.0 {
                rng.random_range(-noise.point_jitter..=noise.point_jitter)
            } else {
                0.0
            };
            let eps: f64 = normal.sample(&mut rng);
            let p = truth(z_nom + set_shift + jitter) + noise.sigma_pressure * eps + outlier_shift;
            (z_nom, p)
        })
        .collect();
    MeasurementSet::new(set_id, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::MPA;

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn separation_bookkeeping() {
        let p = OscillatorParams::default();
        let z = absolute_separation(9509.7 * NM, p.offset, p.lever_arm, 0.0).unwrap();
        assert!((z - 160.0 * NM).abs() < 1e-15);
        let tilted = absolute_separation(9509.7 * NM, p.offset, p.lever_arm, 1e-5).unwrap();
        assert!((z - tilted - 2.1 * NM).abs() < 1e-15);
        assert!(absolute_separation(9000.0 * NM, p.offset, p.lever_arm, 0.0).is_err());
    }

    #[test]
    fn noise_floor_scaling() {
        let g = DetectorGeometry::default();
        let base = angular_noise_floor(&g, 1.0).unwrap();
        // (1e-8 V / 1 V)(20 pF / 0.2103 pF)(4 µm / 190 µm)
        let c_o = EPSILON_0 * 250e-6 * 190e-6 / 2e-6;
        let expect = 1e-8 * (20e-12 / c_o) * (4e-6 / 190e-6);
        assert!(rel(base, expect) < 1e-12);
        assert!(rel(base, 2.0e-8) < 0.01);
        assert!(rel(angular_noise_floor(&g, 4.0).unwrap(), 2.0 * base) < 1e-12);
        let doubled = DetectorGeometry {
            c_total: 2.0 * g.c_total,
            ..g
        };
        assert!(rel(angular_noise_floor(&doubled, 1.0).unwrap(), 2.0 * base) < 1e-12);
        assert!(angular_noise_floor(&g, 0.0).is_err());
    }

    #[test]
    fn force_vanishes_at_compensating_voltage() {
        assert_eq!(electrostatic_force(1e-6, 1e-4, 0.3, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn force_matches_proximity_limit() {
        let r = 148.7e-6;
        let z = r / 1000.0;
        let dv: f64 = 0.25;
        let f = electrostatic_force(z, r, dv, 0.0).unwrap();
        let pfa = PI * EPSILON_0 * r * dv * dv / z;
        assert!(rel(f, pfa) < 0.01, "{f} vs {pfa}");
    }

    #[test]
    fn force_matches_direct_summation() {
        let (z, r, dv): (f64, f64, f64) = (3e-6, 148.7e-6, 0.25);
        let u: f64 = (1.0 + z / r).acosh();
        let direct: f64 = (1..=10_000)
            .map(|n| {
                let nu = n as f64 * u;
                (n as f64 * nu.cosh() / nu.sinh() - u.cosh() / u.sinh()) / nu.sinh()
            })
            .filter(|t| t.is_finite())
            .sum();
        let expect = 2.0 * PI * EPSILON_0 * dv * dv * direct;
        let f = electrostatic_force(z, r, dv, 0.0).unwrap();
        assert!(rel(f, expect) < 1e-10, "{f} vs {expect}");
    }

    #[test]
    fn force_terms_decrease_eventually() {
        let u = (1.0 + 0.01f64).acosh();
        let coth_u = 1.0 / u.tanh();
        let terms: Vec<f64> = (2..400).map(|n| force_term(n as f64, u, coth_u)).collect();
        assert!(terms.iter().all(|t| *t > 0.0));
        let peak = terms
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(terms[peak..].windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn force_rejects_bad_geometry() {
        assert!(electrostatic_force(0.0, 1e-4, 1.0, 0.0).is_err());
        assert!(electrostatic_force(1e-6, -1e-4, 1.0, 0.0).is_err());
    }

    #[test]
    fn frequency_shift_conversion() {
        let p = OscillatorParams::default();
        assert_eq!(pressure_from_frequency_shift(p.omega_0, &p).unwrap(), 0.0);
        let dw = 2.0 * PI * 6e-3;
        let dp = pressure_from_frequency_shift(p.omega_0 - dw, &p).unwrap();
        assert!((dp.abs() / MPA - 0.283).abs() < 0.002, "{dp}");
        assert!(rel(pressure_resolution(p.omega_0, dw, &p), dp.abs()) < 1e-5);
        assert!(pressure_from_frequency_shift(1.01 * p.omega_0, &p).is_err());
    }

    #[test]
    fn frequency_round_trip() {
        let p = OscillatorParams::default();
        for pressure in [-1.1, -0.1, -1e-2] {
            let w = frequency_from_pressure(pressure, &p).unwrap();
            let back = pressure_from_frequency_shift(w, &p).unwrap();
            assert!(rel(back, pressure) < 1e-12, "{pressure} -> {back}");
        }
        // Below 10 mPa the shift ω₀ − ω_r is so small that rounding of ω_r
        // alone limits the round trip to a few ε·ω₀²/(ω₀² − ω_r²).
        for pressure in [-1e-3, -2e-5] {
            let w = frequency_from_pressure(pressure, &p).unwrap();
            let back = pressure_from_frequency_shift(w, &p).unwrap();
            let cond = p.omega_0.powi(2) / (p.omega_0.powi(2) - w * w);
            assert!(rel(back, pressure) < 4.0 * f64::EPSILON * cond, "{pressure} -> {back}");
        }
        assert!(frequency_from_pressure(0.5, &p).is_err());
    }

    #[test]
    fn magnitude_falls_as_frequency_rises() {
        let p = OscillatorParams::default();
        let mut last = f64::INFINITY;
        for k in 0..=50 {
            let w = p.omega_0 * k as f64 / 50.0;
            let mag = pressure_from_frequency_shift(w, &p).unwrap().abs();
            assert!(mag < last);
            last = mag;
        }
    }

    fn truth(z: f64) -> f64 {
        -1e-3 * (300.0 * NM / z).powi(4)
    }

    #[test]
    fn noiseless_sets_lie_on_truth() {
        let cfg = SynthesisConfig {
            noise: NoiseModel::NONE,
            ..Default::default()
        };
        let sets = synthesize_measurement_sets(truth, &cfg, 3).unwrap();
        assert_eq!(sets.len(), 15);
        for s in &sets {
            assert!((288..=293).contains(&s.len()));
            for (z, p) in &s.points {
                assert!(*z >= cfg.z_min && *z <= cfg.z_max);
                assert_eq!(*p, truth(*z));
            }
        }
        assert_ne!(sets[0].points[1].0, sets[1].points[1].0);
    }

    #[test]
    fn grids_are_non_uniform() {
        let sets = synthesize_measurement_sets(truth, &SynthesisConfig::default(), 9).unwrap();
        let steps: Vec<f64> = sets[0].points.windows(2).map(|w| w[1].0 - w[0].0).collect();
        let lo = steps.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = steps.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo > 1.5);
    }

    #[test]
    fn synthesis_is_deterministic() {
        let cfg = SynthesisConfig {
            outlier: Some(OutlierPlant {
                set_index: 4,
                shift_sigma: 5.0,
            }),
            ..Default::default()
        };
        let a = sets_to_csv_string(&synthesize_measurement_sets(truth, &cfg, 42).unwrap());
        let b = sets_to_csv_string(&synthesize_measurement_sets(truth, &cfg, 42).unwrap());
        assert_eq!(a, b);
        let c = sets_to_csv_string(&synthesize_measurement_sets(truth, &cfg, 43).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn csv_round_trip() {
        let sets = synthesize_measurement_sets(truth, &SynthesisConfig::default(), 1).unwrap();
        let text = sets_to_csv_string(&sets);
        let back = parse_sets_csv(&text).unwrap();
        assert_eq!(back.len(), sets.len());
        for (a, b) in sets.iter().zip(&back) {
            assert_eq!(a.set_id, b.set_id);
            for (p, q) in a.points.iter().zip(&b.points) {
                assert!((p.0 - q.0).abs() < 1e-20);
                assert_eq!(p.1, q.1);
            }
        }
    }

    #[test]
    fn unsorted_set_is_rejected() {
        assert!(MeasurementSet::new(0, vec![(2e-7, -1.0), (1e-7, -2.0)]).is_err());
    }
}
