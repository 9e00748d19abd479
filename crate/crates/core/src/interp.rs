//! Natural cubic splines, used to make pressure curves cheap to evaluate.

use crate::error::{Error, Result};

/// Natural cubic spline through `(x_i, y_i)`, extrapolated linearly with the
/// end slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::invalid("spline needs at least two (x, y) pairs"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::invalid("spline abscissae must be finite and strictly increasing"));
        }
        // Second derivatives from the tridiagonal system, Thomas algorithm.
        let mut m = vec![0.0; n];
        if n > 2 {
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
                c[i] = h1 / diag;
                d[i] = (rhs - h0 * d[i - 1]) / diag;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Ok(CubicSpline { x, y, m })
    }

    fn slope_at(&self, i: usize, at_right: bool) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let base = (self.y[i + 1] - self.y[i]) / h;
        if at_right {
            base + h * (self.m[i] + 2.0 * self.m[i + 1]) / 6.0
        } else {
            base - h * (2.0 * self.m[i] + self.m[i + 1]) / 6.0
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0] + self.slope_at(0, false) * (t - self.x[0]);
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1] + self.slope_at(n - 2, true) * (t - self.x[n - 1]);
        }
        let i = self.x.partition_point(|&v| v <= t) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }
}

/// A same-sign pressure curve interpolated as ln|P| against ln z.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureInterpolant {
    spline: CubicSpline,
    sign: f64,
}

impl PressureInterpolant {
    pub fn new(separations: &[f64], pressures: &[f64]) -> Result<Self> {
        let sign = pressures.first().map(|p| p.signum()).unwrap_or(0.0);
        if sign == 0.0 || pressures.iter().any(|p| p.signum() != sign || *p == 0.0) {
            return Err(Error::invalid("pressures must be nonzero and of one sign"));
        }
        if separations.iter().any(|z| !(*z > 0.0)) {
            return Err(Error::invalid("separations must be positive"));
        }
        let x = separations.iter().map(|z| z.ln()).collect();
        let y = pressures.iter().map(|p| p.abs().ln()).collect();
        Ok(PressureInterpolant {
            spline: CubicSpline::new(x, y)?,
            sign,
        })
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.sign * self.spline.eval(z.ln()).exp()
    }

    /// Local exponent n in P ∝ z^(−n).
    pub fn local_exponent(&self, z: f64) -> f64 {
        let h = 1e-4;
        let u = z.ln();
        -(self.spline.eval(u + h) - self.spline.eval(u - h)) / (2.0 * h)
    }

    pub fn domain(&self) -> (f64, f64) {
        let (a, b) = self.spline.domain();
        (a.exp(), b.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_cubic_interior() {
        // A natural spline reproduces linear data exactly.
        let x: Vec<f64> = (0..8).map(|i| i as f64 * 0.7).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let s = CubicSpline::new(x, y).unwrap();
        for t in [-1.0, 0.35, 2.2, 4.9, 6.0] {
            assert!((s.eval(t) - (3.0 - 2.0 * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_function_accuracy() {
        let x: Vec<f64> = (0..=60).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let s = CubicSpline::new(x, y).unwrap();
        for t in [0.5, 1.234, 2.0, 2.5] {
            assert!((s.eval(t) - f64::sin(t)).abs() < 1e-5, "{t}");
        }
    }

    #[test]
    fn power_law_is_exact_in_log_log() {
        let z: Vec<f64> = (0..10).map(|i| 100e-9 + i as f64 * 50e-9).collect();
        let p: Vec<f64> = z.iter().map(|z| -3e-27 * z.powi(-4)).collect();
        let f = PressureInterpolant::new(&z, &p).unwrap();
        for t in [90e-9, 123e-9, 333e-9, 600e-9] {
            assert!((f.eval(t) / (-3e-27 * f64::powi(t, -4)) - 1.0).abs() < 1e-12);
            assert!((f.local_exponent(t) - 4.0).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CubicSpline::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(CubicSpline::new(vec![0.0], vec![1.0]).is_err());
        assert!(PressureInterpolant::new(&[1.0, 2.0], &[-1.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn interpolates_its_nodes(ys in proptest::collection::vec(-10.0f64..10.0, 2..20)) {
            let x: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
            let s = CubicSpline::new(x.clone(), ys.clone()).unwrap();
            for (xi, yi) in x.iter().zip(&ys) {
                prop_assert!((s.eval(*xi) - yi).abs() < 1e-9);
            }
        }
    }
}
