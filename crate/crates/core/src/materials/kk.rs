//! Dispersion relation from Im ε(ω) on the real axis to ε(iξ).
//!
//! ε(iξ) − 1 = (2/π) ∫₀^∞ ω Im ε(ω) / (ω² + ξ²) dω, split into three parts:
//! the Drude continuation below the first tabulated frequency (closed form),
//! the tabulated range with log–log interpolation of Im ε between rows, and a
//! power-law continuation past the last row.

use std::f64::consts::FRAC_2_PI;

use crate::error::{Error, Result};
use crate::materials::{DrudeParams, OpticalTable};
use crate::quad::Quadrature;

/// (2/π) ∫₀^a ω Im ε_D(ω) / (ω² + ξ²) dω for the Drude model.
pub(crate) fn drude_low_frequency(params: &DrudeParams, a: f64, xi: f64, quad: &Quadrature) -> Result<f64> {
    let wp2 = params.omega_p * params.omega_p;
    let g = params.gamma;
    if g == 0.0 {
        // Im ε is a delta function at the origin.
        return Ok(wp2 / (xi * xi));
    }
    if (xi - g).abs() > 1e-4 * xi {
        let num = (a / g).atan() - (g / xi) * (a / xi).atan();
        return Ok(FRAC_2_PI * wp2 * num / ((xi - g) * (xi + g)));
    }
    // ξ ≈ γ: partial fractions cancel, integrate directly.
    let est = quad.integrate(
        |w| wp2 * g / ((w * w + g * g) * (w * w + xi * xi)),
        0.0,
        a,
    )?;
    Ok(FRAC_2_PI * est.value)
}

fn segment_exponent(lo: f64, hi: f64, w_lo: f64, w_hi: f64) -> Option<f64> {
    if lo > 0.0 && hi > 0.0 {
        Some((hi / lo).ln() / (w_hi / w_lo).ln())
    } else {
        None
    }
}

/// Contribution of the tabulated rows and the power-law tail.
pub(crate) fn tabulated_part(table: &OpticalTable, xi: f64, quad: &Quadrature) -> Result<f64> {
    let rows = table.rows();
    let xi2 = xi * xi;
    let mut sum = 0.0;
    for pair in rows.windows(2) {
        let (r0, r1) = (pair[0], pair[1]);
        let (e0, e1) = (r0.eps_imag(), r1.eps_imag());
        if e0 == 0.0 && e1 == 0.0 {
            continue;
        }
        let (u0, u1) = (r0.omega.ln(), r1.omega.ln());
        let est = match segment_exponent(e0, e1, r0.omega, r1.omega) {
            Some(s) => quad.integrate(
                |u| {
                    let w = u.exp();
                    let im = e0 * ((u - u0) * s).exp();
                    w * w * im / (w * w + xi2)
                },
                u0,
                u1,
            )?,
            None => {
                let slope = (e1 - e0) / (r1.omega - r0.omega);
                quad.integrate(
                    |u| {
                        let w = u.exp();
                        let im = e0 + slope * (w - r0.omega);
                        w * w * im / (w * w + xi2)
                    },
                    u0,
                    u1,
                )?
            }
        };
        sum += est.value;
    }

    let n = rows.len();
    let (last, prev) = (rows[n - 1], rows[n - 2]);
    let e_last = last.eps_imag();
    if e_last > 0.0 {
        let s = segment_exponent(prev.eps_imag(), e_last, prev.omega, last.omega).ok_or_else(|| {
            Error::invalid("cannot extrapolate Im ε past the table: last rows are not positive")
        })?;
        if s >= 0.0 {
            return Err(Error::invalid(format!(
                "Im ε must decrease past the last row to extrapolate (exponent {s})"
            )));
        }
        let ratio2 = (xi / last.omega).powi(2);
        let tail = quad.integrate_to_infinity(
            |u| e_last * (s * u).exp() / (1.0 + ratio2 * (-2.0 * u).exp()),
            0.0,
        )?;
        sum += tail.value;
    }
    Ok(FRAC_2_PI * sum)
}

/// ε(iξ) for a tabulated metal with Drude continuation below the table.
pub fn epsilon_kk(table: &OpticalTable, drude: &DrudeParams, xi: f64, quad: &Quadrature) -> Result<f64> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::invalid(format!("ξ must be positive, got {xi}")));
    }
    let low = drude_low_frequency(drude, table.omega_min(), xi, quad)?;
    let mid = tabulated_part(table, xi, quad)?;
    Ok(1.0 + low + mid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drude_closed_form_covers_full_axis() {
        let p = DrudeParams::gold();
        let q = Quadrature::default();
        let xi = 2.468e14;
        let full = drude_low_frequency(&p, f64::INFINITY, xi, &q).unwrap();
        let exact = p.omega_p.powi(2) / (xi * (xi + p.gamma));
        assert!((full / exact - 1.0).abs() < 1e-13);
    }

    #[test]
    fn drude_closed_form_near_gamma() {
        let p = DrudeParams::gold();
        let q = Quadrature::with_rel_tol(1e-11);
        let a = 0.125 * crate::units::EV;
        let xi = p.gamma * (1.0 + 1e-6);
        let near = drude_low_frequency(&p, a, xi, &q).unwrap();
        let off = drude_low_frequency(&p, a, p.gamma * 1.001, &q).unwrap();
        assert!((near / off - 1.0).abs() < 5e-3);
    }

    #[test]
    fn growing_tail_is_rejected() {
        let rows = vec![
            crate::materials::OpticalRow::new(1.0, 1.0, 1.0),
            crate::materials::OpticalRow::new(2.0, 1.0, 2.0),
        ];
        let t = OpticalTable::new("x", rows).unwrap();
        assert!(epsilon_kk(&t, &DrudeParams::gold(), 1e15, &Quadrature::default()).is_err());
    }
}

#[cfg(test)]
mod drude_oracle {
    use super::*;

    #[test]
    fn drude_table_reproduces_closed_form() {
        let p = DrudeParams::gold();
        let table = OpticalTable::drude(&p, 0.125, 10_000.0, 500).unwrap();
        let q = Quadrature::with_rel_tol(1e-9);
        let xi1 = crate::units::UnitContext::SI.matsubara_step(300.0);
        let mut worst: f64 = 0.0;
        for j in 0..=40 {
            let xi = xi1 * 100f64.powf(j as f64 / 40.0);
            let kk = epsilon_kk(&table, &p, xi, &q).unwrap();
            worst = worst.max((kk / p.epsilon_imag_axis(xi) - 1.0).abs());
        }
        assert!(worst < 1e-4, "worst relative error {worst:e}");
    }
}
