//! Reference values used as regression fixtures, in SI units unless noted.

/// Impedance- and plasma-approach pressures at T = 300 K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureRow {
    pub z_nm: f64,
    pub impedance_l0: f64,
    pub impedance_lge1: f64,
    pub impedance: f64,
    pub plasma_l0: f64,
    pub plasma_lge1: f64,
    pub plasma: f64,
    /// Positive-frequency sum with the tabulated permittivity.
    pub tabulated_lge1: f64,
}

/// Drude and prescription zero-frequency terms and totals at T = 300 K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroFrequencyRow {
    pub z_nm: f64,
    pub drude_l0: f64,
    pub drude: f64,
    pub prescription_l0: f64,
    pub prescription: f64,
}

/// Half-width of the 95% band and mean theory-minus-experiment differences,
/// all in mPa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub z_nm: f64,
    pub band_mpa: f64,
    pub diff_impedance: f64,
    pub diff_plasma: f64,
    pub diff_drude: f64,
    pub diff_prescription: f64,
}

macro_rules! p {
    ($z:expr, $a:expr, $b:expr, $c:expr, $d:expr, $e:expr, $f:expr, $g:expr) => {
        PressureRow {
            z_nm: $z,
            impedance_l0: $a,
            impedance_lge1: $b,
            impedance: $c,
            plasma_l0: $d,
            plasma_lge1: $e,
            plasma: $f,
            tabulated_lge1: $g,
        }
    };
}

pub const PRESSURE_TABLE: [PressureRow; 10] = [
    p!(160.0, -0.0715, -1.0726, -1.1441, -0.0719, -1.0430, -1.1149, -1.07715),
    p!(200.0, -0.03834, -0.47096, -0.5093, -0.03847, -0.46335, -0.5018, -0.4724),
    p!(250.0, -0.02046, -0.20421, -0.2247, -0.02050, -0.20260, -0.2231, -0.2046),
    p!(300.0, -0.01220, -0.10214, -0.1143, -0.01222, -0.10182, -0.1140, -0.1023),
    p!(350.0, -0.007858, -0.056424, -0.06428, -0.007866, -0.056425, -0.06429, -0.05648),
    p!(400.0, -0.005358, -0.033547, -0.03890, -0.005362, -0.033616, -0.03898, -0.03357),
    p!(450.0, -0.003817, -0.021105, -0.02492, -0.003820, -0.021178, -0.02500, -0.02111),
    p!(500.0, -0.002816, -0.013887, -0.01670, -0.002817, -0.013948, -0.01676, -0.01389),
    p!(600.0, -0.001659, -0.006665, -0.008324, -0.001660, -0.006703, -0.008363, -0.006667),
    p!(700.0, -0.001059, -0.003546, -0.004605, -0.001059, -0.003569, -0.004628, -0.003547),
];

macro_rules! zf {
    ($z:expr, $a:expr, $b:expr, $c:expr, $d:expr) => {
        ZeroFrequencyRow {
            z_nm: $z,
            drude_l0: $a,
            drude: $b,
            prescription_l0: $c,
            prescription: $d,
        }
    };
}

pub const ZERO_FREQUENCY_TABLE: [ZeroFrequencyRow; 10] = [
    zf!(160.0, -0.04836, -1.1255, -0.0967, -1.1739),
    zf!(200.0, -0.0247, -0.4971, -0.0495, -0.5219),
    zf!(250.0, -0.0127, -0.2173, -0.0254, -0.2300),
    zf!(300.0, -0.00734, -0.1096, -0.0147, -0.1170),
    zf!(350.0, -0.00462, -0.06110, -0.00924, -0.06572),
    zf!(400.0, -0.00310, -0.03667, -0.00619, -0.03976),
    zf!(450.0, -0.00217, -0.02329, -0.00434, -0.02546),
    zf!(500.0, -0.00158, -0.01547, -0.00317, -0.01706),
    zf!(600.0, -0.000917, -0.007584, -0.001835, -0.008502),
    zf!(700.0, -0.000577, -0.004124, -0.001155, -0.004702),
];

macro_rules! cmp {
    ($z:expr, $b:expr, $d4:expr, $d3:expr, $d1:expr, $d2:expr) => {
        ComparisonRow {
            z_nm: $z,
            band_mpa: $b,
            diff_impedance: $d4,
            diff_plasma: $d3,
            diff_drude: $d1,
            diff_prescription: $d2,
        }
    };
}

pub const COMPARISON_TABLE: [ComparisonRow; 10] = [
    cmp!(170.0, 17.2, 2.01, 13.0, 18.8, -21.8),
    cmp!(180.0, 13.4, -0.74, 7.54, 14.4, -19.8),
    cmp!(200.0, 8.59, -1.21, 5.3, 11.0, -13.9),
    cmp!(250.0, 3.34, -0.31, 1.3, 7.09, -5.66),
    cmp!(300.0, 1.59, 0.34, 0.6, 5.07, -2.28),
    cmp!(350.0, 0.89, 0.38, 0.39, 3.58, -1.05),
    cmp!(400.0, 0.63, 0.28, 0.20, 2.59, -0.62),
    cmp!(500.0, 0.49, 0.11, 0.05, 1.37, -0.22),
    cmp!(600.0, 0.46, 0.08, 0.04, 0.82, -0.09),
    cmp!(700.0, 0.46, 0.02, -0.01, 0.51, -0.07),
];
