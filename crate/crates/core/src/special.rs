//! Gamma, Beta and sphere areas.

use crate::error::{Error, Result};
use std::f64::consts::PI;

// Lanczos approximation, g = 7, nine terms (the GSL / Numerical Recipes set).
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: f64) -> f64 {
    // z is the shifted argument x - 1
    let mut acc = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    acc
}

/// Γ(alpha) for alpha > 0.
///
/// Small integers and half-integers are returned from the exact product so
/// that the values feeding factorials carry no approximation error.
pub fn gamma(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("gamma requires alpha > 0, got {alpha}")));
    }
    Ok(gamma_unchecked(alpha))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x == x.floor() && x <= 30.0 {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    if (2.0 * x) == (2.0 * x).floor() && x <= 30.0 {
        // half integer: Γ(k + 1/2) = √π · (2k-1)!! / 2^k
        let mut acc = PI.sqrt();
        let mut y = 0.5;
        while y < x {
            acc *= y;
            y += 1.0;
        }
        return acc;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// ln Γ(alpha) for alpha > 0, usable where Γ itself overflows.
pub fn ln_gamma(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires alpha > 0, got {alpha}")));
    }
    if alpha < 30.0 {
        return Ok(gamma_unchecked(alpha).ln());
    }
    let z = alpha - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// B(a, b) = Γ(a)Γ(b)/Γ(a+b).
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Domain(format!("beta requires positive arguments, got ({a}, {b})")));
    }
    if a + b < 30.0 {
        Ok(gamma_unchecked(a) * gamma_unchecked(b) / gamma_unchecked(a + b))
    } else {
        Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
    }
}

/// Area of the unit sphere S^n ⊂ R^{n+1}: 2π^{(n+1)/2} / Γ((n+1)/2).
pub fn surface_area(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("surface_area requires n >= 1".into()));
    }
    Ok(sphere_area(n))
}

/// |S^n| without the n ≥ 1 guard; |S^0| = 2 counts the two endpoints.
pub(crate) fn sphere_area(n: usize) -> f64 {
    let h = (n as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / gamma_unchecked(h)
}
