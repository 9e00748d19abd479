//! Embedded critical values: Student t quantiles for dof 1-200 and two-sided
//! Grubbs critical values for n = 3-30. Anything outside the tables falls back
//! to the quantile function.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub(crate) const STUDENT_T_975: [f64; 200] = [
    12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912,
    2.364624, 2.306004, 2.262157, 2.228139, 2.200985, 2.178813,
    2.160369, 2.144787, 2.131450, 2.119905, 2.109816, 2.100922,
    2.093024, 2.085963, 2.079614, 2.073873, 2.068658, 2.063899,
    2.059539, 2.055529, 2.051831, 2.048407, 2.045230, 2.042272,
    2.039513, 2.036933, 2.034515, 2.032245, 2.030108, 2.028094,
    2.026192, 2.024394, 2.022691, 2.021075, 2.019541, 2.018082,
    2.016692, 2.015368, 2.014103, 2.012896, 2.011741, 2.010635,
    2.009575, 2.008559, 2.007584, 2.006647, 2.005746, 2.004879,
    2.004045, 2.003241, 2.002465, 2.001717, 2.000995, 2.000298,
    1.999624, 1.998972, 1.998341, 1.997730, 1.997138, 1.996564,
    1.996008, 1.995469, 1.994945, 1.994437, 1.993943, 1.993464,
    1.992997, 1.992543, 1.992102, 1.991673, 1.991254, 1.990847,
    1.990450, 1.990063, 1.989686, 1.989319, 1.988960, 1.988610,
    1.988268, 1.987934, 1.987608, 1.987290, 1.986979, 1.986675,
    1.986377, 1.986086, 1.985802, 1.985523, 1.985251, 1.984984,
    1.984723, 1.984467, 1.984217, 1.983972, 1.983731, 1.983495,
    1.983264, 1.983038, 1.982815, 1.982597, 1.982383, 1.982173,
    1.981967, 1.981765, 1.981567, 1.981372, 1.981180, 1.980992,
    1.980808, 1.980626, 1.980448, 1.980272, 1.980100, 1.979930,
    1.979764, 1.979600, 1.979439, 1.979280, 1.979124, 1.978971,
    1.978820, 1.978671, 1.978524, 1.978380, 1.978239, 1.978099,
    1.977961, 1.977826, 1.977692, 1.977561, 1.977431, 1.977304,
    1.977178, 1.977054, 1.976931, 1.976811, 1.976692, 1.976575,
    1.976460, 1.976346, 1.976233, 1.976122, 1.976013, 1.975905,
    1.975799, 1.975694, 1.975590, 1.975488, 1.975387, 1.975288,
    1.975189, 1.975092, 1.974996, 1.974902, 1.974808, 1.974716,
    1.974625, 1.974535, 1.974446, 1.974358, 1.974271, 1.974185,
    1.974100, 1.974017, 1.973934, 1.973852, 1.973771, 1.973691,
    1.973612, 1.973534, 1.973457, 1.973381, 1.973305, 1.973231,
    1.973157, 1.973084, 1.973012, 1.972941, 1.972870, 1.972800,
    1.972731, 1.972663, 1.972595, 1.972528, 1.972462, 1.972396,
    1.972332, 1.972268, 1.972204, 1.972141, 1.972079, 1.972017,
    1.971957, 1.971896,
];

pub(crate) const STUDENT_T_995: [f64; 200] = [
    63.656741, 9.924843, 5.840909, 4.604095, 4.032143, 3.707428,
    3.499483, 3.355387, 3.249836, 3.169273, 3.105807, 3.054540,
    3.012276, 2.976843, 2.946713, 2.920782, 2.898231, 2.878440,
    2.860935, 2.845340, 2.831360, 2.818756, 2.807336, 2.796940,
    2.787436, 2.778715, 2.770683, 2.763262, 2.756386, 2.749996,
    2.744042, 2.738481, 2.733277, 2.728394, 2.723806, 2.719485,
    2.715409, 2.711558, 2.707913, 2.704459, 2.701181, 2.698066,
    2.695102, 2.692278, 2.689585, 2.687013, 2.684556, 2.682204,
    2.679952, 2.677793, 2.675722, 2.673734, 2.671823, 2.669985,
    2.668216, 2.666512, 2.664870, 2.663287, 2.661759, 2.660283,
    2.658857, 2.657479, 2.656145, 2.654854, 2.653604, 2.652394,
    2.651220, 2.650081, 2.648977, 2.647905, 2.646863, 2.645852,
    2.644869, 2.643913, 2.642983, 2.642078, 2.641198, 2.640340,
    2.639505, 2.638691, 2.637897, 2.637123, 2.636369, 2.635632,
    2.634914, 2.634212, 2.633527, 2.632858, 2.632204, 2.631565,
    2.630940, 2.630330, 2.629732, 2.629148, 2.628576, 2.628016,
    2.627468, 2.626931, 2.626405, 2.625891, 2.625386, 2.624891,
    2.624407, 2.623932, 2.623465, 2.623008, 2.622560, 2.622120,
    2.621688, 2.621265, 2.620849, 2.620440, 2.620039, 2.619645,
    2.619258, 2.618878, 2.618504, 2.618137, 2.617776, 2.617421,
    2.617072, 2.616729, 2.616392, 2.616060, 2.615733, 2.615412,
    2.615096, 2.614785, 2.614479, 2.614177, 2.613880, 2.613588,
    2.613300, 2.613017, 2.612738, 2.612463, 2.612192, 2.611925,
    2.611662, 2.611403, 2.611147, 2.610895, 2.610647, 2.610402,
    2.610161, 2.609923, 2.609688, 2.609456, 2.609228, 2.609003,
    2.608780, 2.608561, 2.608344, 2.608131, 2.607920, 2.607712,
    2.607506, 2.607304, 2.607103, 2.606906, 2.606711, 2.606518,
    2.606328, 2.606140, 2.605954, 2.605770, 2.605589, 2.605410,
    2.605233, 2.605058, 2.604886, 2.604715, 2.604546, 2.604379,
    2.604215, 2.604052, 2.603891, 2.603731, 2.603574, 2.603418,
    2.603264, 2.603112, 2.602961, 2.602813, 2.602665, 2.602520,
    2.602376, 2.602233, 2.602092, 2.601952, 2.601814, 2.601678,
    2.601543, 2.601409, 2.601276, 2.601145, 2.601016, 2.600887,
    2.600760, 2.600634,
];

pub(crate) const GRUBBS_05: [f64; 28] = [
    1.154305, 1.481250, 1.715037, 1.887145, 2.019969, 2.126645, 2.215004,
    2.289954, 2.354730, 2.411560, 2.462033, 2.507321, 2.548308, 2.585676,
    2.619964, 2.651599, 2.680931, 2.708246, 2.733780, 2.757735, 2.780277,
    2.801551, 2.821681, 2.840774, 2.858923, 2.876209, 2.892705, 2.908473,
];

pub(crate) const GRUBBS_01: [f64; 28] = [
    1.154685, 1.496250, 1.763678, 1.972817, 2.139106, 2.274365, 2.386810,
    2.482083, 2.564121, 2.635733, 2.698972, 2.755372, 2.806105, 2.852080,
    2.894014, 2.932482, 2.967951, 3.000804, 3.031358, 3.059879, 3.086592,
    3.111687, 3.135328, 3.157656, 3.178795, 3.198851, 3.217918, 3.236078,
];


/// Lookup of Student and Grubbs critical values.
#[derive(Debug, Clone, Copy, Default)]
pub struct CriticalTables;

impl CriticalTables {
    pub fn embedded() -> Self {
        CriticalTables
    }

    /// Quantile t_p(dof).
    pub fn student_t(&self, dof: usize, p: f64) -> Result<f64> {
        if dof == 0 {
            return Err(Error::invalid("Student t needs at least one degree of freedom"));
        }
        if !(p > 0.5 && p < 1.0) {
            return Err(Error::invalid(format!("quantile {p} outside (0.5, 1)")));
        }
        let table = if (p - 0.975).abs() < 1e-12 {
            Some(&STUDENT_T_975)
        } else if (p - 0.995).abs() < 1e-12 {
            Some(&STUDENT_T_995)
        } else {
            None
        };
        match table {
            Some(t) if dof <= t.len() => Ok(t[dof - 1]),
            _ => student_quantile(dof as f64, p),
        }
    }

    /// Two-sided half-width factor at confidence β: t_{(1+β)/2}(dof).
    pub fn student_two_sided(&self, dof: usize, beta: f64) -> Result<f64> {
        check_confidence(beta)?;
        self.student_t(dof, 0.5 * (1.0 + beta))
    }

    /// Two-sided Grubbs critical value T_{n, α}.
    pub fn grubbs(&self, n: usize, alpha: f64) -> Result<f64> {
        if n < 3 {
            return Err(Error::invalid(format!("Grubbs test needs n >= 3, got {n}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("significance {alpha} outside (0, 1)")));
        }
        let table = if (alpha - 0.05).abs() < 1e-12 {
            Some(&GRUBBS_05)
        } else if (alpha - 0.01).abs() < 1e-12 {
            Some(&GRUBBS_01)
        } else {
            None
        };
        match table {
            Some(t) if n - 3 < t.len() => Ok(t[n - 3]),
            _ => grubbs_formula(n, alpha),
        }
    }
}

pub(crate) fn check_confidence(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("confidence {beta} outside (0, 1)")))
    }
}

fn student_quantile(dof: f64, p: f64) -> Result<f64> {
    let dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(dist.inverse_cdf(p))
}

fn grubbs_formula(n: usize, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    let t = student_quantile(nf - 2.0, 1.0 - alpha / (2.0 * nf))?;
    Ok((nf - 1.0) / nf.sqrt() * (t * t / (nf - 2.0 + t * t)).sqrt())
}

/// Probability that the largest of n normal deviates has a Grubbs statistic
/// at least `g` (two-sided, Bonferroni form).
pub fn grubbs_p_value(n: usize, g: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid(format!("Grubbs test needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    let denom = (nf - 1.0).powi(2) - nf * g * g;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    let t = ((nf - 2.0) * nf * g * g / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, nf - 2.0).map_err(|e| Error::invalid(e.to_string()))?;
    Ok((2.0 * nf * dist.sf(t)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn student_table_matches_quantile_function() {
        for (table, p) in [(&STUDENT_T_975, 0.975), (&STUDENT_T_995, 0.995)] {
            for (i, v) in table.iter().enumerate() {
                let q = student_quantile((i + 1) as f64, p).unwrap();
                assert!((v - q).abs() < 2e-6 * q, "dof {} p {p}: {v} vs {q}", i + 1);
            }
        }
    }

    #[test]
    fn grubbs_table_matches_formula() {
        for (table, alpha) in [(&GRUBBS_05, 0.05), (&GRUBBS_01, 0.01)] {
            for (i, v) in table.iter().enumerate() {
                let g = grubbs_formula(i + 3, alpha).unwrap();
                assert!((v - g).abs() < 2e-6, "n {} alpha {alpha}: {v} vs {g}", i + 3);
            }
        }
    }

    #[test]
    fn familiar_values() {
        let t = CriticalTables::embedded();
        assert!((t.student_two_sided(2, 0.95).unwrap() - 4.302653).abs() < 1e-6);
        assert!((t.student_two_sided(2, 0.99).unwrap() - 9.924843).abs() < 1e-6);
        assert!((t.grubbs(10, 0.05).unwrap() - 2.289954).abs() < 1e-6);
    }

    #[test]
    fn monotone_within_tables() {
        for table in [&STUDENT_T_975, &STUDENT_T_995] {
            assert!(table.windows(2).all(|w| w[1] < w[0]));
        }
        for table in [&GRUBBS_05, &GRUBBS_01] {
            assert!(table.windows(2).all(|w| w[1] > w[0]));
        }
        assert!(STUDENT_T_995.iter().zip(&STUDENT_T_975).all(|(a, b)| a > b));
        assert!(GRUBBS_01.iter().zip(&GRUBBS_05).all(|(a, b)| a > b));
    }

    #[test]
    fn fallback_beyond_tables() {
        let t = CriticalTables::embedded();
        let big = t.student_t(500, 0.975).unwrap();
        assert!(big > 1.959964 && big < t.student_t(200, 0.975).unwrap());
        assert!(t.grubbs(40, 0.05).unwrap() > t.grubbs(30, 0.05).unwrap());
        assert!(t.student_t(0, 0.975).is_err());
        assert!(t.grubbs(2, 0.05).is_err());
    }

    #[test]
    fn p_value_at_critical_value_equals_alpha() {
        let t = CriticalTables::embedded();
        for n in [3, 8, 20] {
            let g = t.grubbs(n, 0.05).unwrap();
            let p = grubbs_p_value(n, g).unwrap();
            assert!((p - 0.05).abs() < 1e-4, "n {n}: {p}");
        }
        assert_eq!(grubbs_p_value(5, 10.0).unwrap(), 0.0);
    }
}
