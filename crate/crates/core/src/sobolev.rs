//! Sharp Sobolev constants on R^n and their moment-improved versions on S^n.

use crate::error::{Error, Result};
use crate::solver::closed_form_theta;
use crate::special::{gamma_unchecked, sphere_area};
use crate::sphere::Dimension;
use serde::{Deserialize, Serialize};

/// (n, p) with 1 < p < n and the derived exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevParams {
    pub n: usize,
    pub p: f64,
    /// p' = p/(p−1)
    pub p_prime: f64,
    /// p* = pn/(n−p)
    pub p_star: f64,
    /// θ = (n−p)/n = p/p*
    pub theta: f64,
}

impl SobolevParams {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        let nf = n as f64;
        if !(p > 1.0 && p < nf) {
            return Err(Error::Domain(format!("need 1 < p < n, got n = {n}, p = {p}")));
        }
        Ok(Self {
            n,
            p,
            p_prime: p / (p - 1.0),
            p_star: p * nf / (nf - p),
            theta: (nf - p) / nf,
        })
    }

    pub fn dimension(&self) -> Dimension {
        Dimension::new(self.n).expect("n > p > 1")
    }
}

/// S_{n,p} = (1/n)(n(p−1)/(n−p))^{1−1/p} (n!/(Γ(n/p)Γ(n+1−n/p)|S^{n−1}|))^{1/n}.
pub fn sharp_sobolev(params: &SobolevParams) -> f64 {
    let n = params.n as f64;
    let p = params.p;
    let factorial = gamma_unchecked(n + 1.0);
    let inner = factorial / (gamma_unchecked(n / p) * gamma_unchecked(n + 1.0 - n / p) * sphere_area(params.n - 1));
    (1.0 / n) * (n * (p - 1.0) / (n - p)).powf(1.0 - 1.0 / p) * inner.powf(1.0 / n)
}

/// The p = 2 constant in its classical form, √(4/(n(n−2)) · |S^n|^{−2/n}).
pub fn classical_p2_constant(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain("p = 2 requires n >= 3".into()));
    }
    let nf = n as f64;
    Ok((4.0 / (nf * (nf - 2.0)) * sphere_area(n).powf(-2.0 / nf)).sqrt())
}

/// S_{n,2,2} = 4/√(n(n+2)(n−2)(n−4)) · |S^n|^{−2/n}, n ≥ 5.
pub fn sharp_biharmonic(n: Dimension) -> Result<f64> {
    let n = n.get();
    if n <= 4 {
        return Err(Error::Domain(format!("biharmonic constant needs n >= 5, got {n}")));
    }
    let nf = n as f64;
    Ok(4.0 / (nf * (nf + 2.0) * (nf - 2.0) * (nf - 4.0)).sqrt() * sphere_area(n).powf(-2.0 / nf))
}

/// S_{n,p}^p / Θ(m, (n−p)/n, n) when Θ has a closed form.
pub fn improved_constant(params: &SobolevParams, m: u32) -> Result<f64> {
    let theta_value = closed_form_theta(m, params.theta, params.dimension())?.ok_or_else(|| {
        Error::NoClosedForm(format!(
            "Θ({m}, {}, {}); run the solver for a conjectural value",
            params.theta, params.n
        ))
    })?;
    Ok(sharp_sobolev(params).powf(params.p) / theta_value)
}

/// The higher-order constants S_{n,s,p} have no closed form; reports carry
/// their definition only.
pub fn higher_order_definition(n: usize, s: usize, p: f64) -> String {
    let target = format!("L^(np/(n-sp)) with n={n}, s={s}, p={p}");
    if s % 2 == 0 {
        format!("S_{{n,s,p}}: best c in |phi|_{target} <= c |Delta^(s/2) phi|_L^p over C_c^inf(R^n); not evaluated")
    } else {
        format!("S_{{n,s,p}}: best c in |phi|_{target} <= c |grad Delta^((s-1)/2) phi|_L^p over C_c^inf(R^n); not evaluated")
    }
}
