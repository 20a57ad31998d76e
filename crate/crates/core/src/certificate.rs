//! Orthonormal-frame certificates for degree-2 moments on S^n and for all
//! degrees on the circle.
//!
//! A measure Σ ν_i δ_{ξ_i} lies in M_2^c exactly when the vectors
//! u_0 = (√ν_i)_i, u_j = (√((n+1)ν_i) ξ_{i,j})_i are orthonormal in R^N.
//! Bessel's inequality then bounds each row mass (n+2)ν_i by 1, which gives
//! Σ ν_i^θ ≥ (n+2)^{1−θ}.

use crate::error::{Error, Result};
use crate::measure::{check_theta, energy_of, DiscreteMeasure};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const CERTIFICATE_TOL: f64 = 1e-8;

/// The n+2 frame vectors u_0, …, u_{n+1}, stored as rows (each of length N).
#[derive(Debug, Clone)]
pub struct GramFrame {
    pub vectors: DMatrix<f64>,
}

impl GramFrame {
    pub fn build(measure: &DiscreteMeasure) -> Self {
        let n = measure.dimension().get();
        let count = measure.len();
        let mut u = DMatrix::<f64>::zeros(n + 2, count);
        for (i, (p, &w)) in measure.points().iter().zip(measure.weights()).enumerate() {
            let s = w.sqrt();
            let t = ((n as f64 + 1.0) * w).sqrt();
            u[(0, i)] = s;
            for (j, c) in p.coords().iter().enumerate() {
                u[(j + 1, i)] = t * c;
            }
        }
        Self { vectors: u }
    }

    /// ⟨u_a, u_b⟩.
    pub fn gram(&self) -> DMatrix<f64> {
        &self.vectors * self.vectors.transpose()
    }

    /// Σ_a ⟨e_i, u_a⟩² for each coordinate i; equals (n+2)ν_i.
    pub fn parseval_sums(&self) -> Vec<f64> {
        self.vectors.column_iter().map(|c| c.norm_squared()).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramCertificate {
    pub max_orthonormality_deviation: f64,
    pub parseval_sums: Vec<f64>,
    /// Largest eigenvalue of the frame Gram matrix; bounds every Parseval sum.
    pub gram_max_eigenvalue: f64,
    /// (n+2)^{1−θ}(1−d)(1+(n+1)d)^{θ−1} with d the orthonormality deviation:
    /// a valid lower bound on Σν_i^θ for any measure whose frame deviates by
    /// at most d. Equals (n+2)^{1−θ} at d = 0.
    pub lower_bound: f64,
    /// (n+2)^{1−θ}, the bound that applies once the certificate holds.
    pub nominal_bound: f64,
    pub energy: f64,
    pub certified: bool,
    pub reason: Option<String>,
}

/// Frame certificate for M_2^c at exponent θ with acceptance tolerance `tol`.
pub fn gram_certificate_m2(measure: &DiscreteMeasure, theta: f64, tol: f64) -> Result<GramCertificate> {
    check_theta(theta)?;
    let n = measure.dimension().get();
    let frame = GramFrame::build(measure);
    let g = frame.gram();
    let k = n + 2;
    let mut dev: f64 = 0.0;
    for a in 0..k {
        for b in 0..k {
            let want = if a == b { 1.0 } else { 0.0 };
            dev = dev.max((g[(a, b)] - want).abs());
        }
    }
    let lambda_max = SymmetricEigen::new(g).eigenvalues.max();
    let parseval_sums = frame.parseval_sums();
    let kf = k as f64;
    let nominal_bound = kf.powf(1.0 - theta);
    let lower_bound = if dev < 1.0 {
        nominal_bound * (1.0 - dev) * (1.0 + (kf - 1.0) * dev).powf(theta - 1.0)
    } else {
        1.0
    };
    let mut reason = None;
    if measure.len() < k {
        reason = Some(format!(
            "support of {} points cannot carry {} orthonormal vectors",
            measure.len(),
            k
        ));
    } else if dev >= tol {
        reason = Some(format!("frame deviates from orthonormal by {dev:.3e}"));
    } else if parseval_sums.iter().any(|s| *s > 1.0 + tol) {
        reason = Some("a Parseval sum exceeds 1".into());
    }
    Ok(GramCertificate {
        max_orthonormality_deviation: dev,
        parseval_sums,
        gram_max_eigenvalue: lambda_max,
        lower_bound: lower_bound.max(1.0),
        nominal_bound,
        energy: energy_of(measure.weights(), theta),
        certified: reason.is_none(),
        reason,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleCertificate {
    pub max_unitarity_deviation: f64,
    /// (m+1)ν_j for each atom.
    pub parseval_sums: Vec<f64>,
    pub certified: bool,
}

/// Orthonormality of u_k = (√ν_j ξ_j^k)_j, k = 0..=m, in C^N with points
/// read as unit complex numbers. ⟨u_a, u_b⟩ = Σ_j ν_j ξ_j^{a−b}.
pub fn circle_certificate(measure: &DiscreteMeasure, m: u32, tol: f64) -> Result<CircleCertificate> {
    if measure.dimension().get() != 1 {
        return Err(Error::Unsupported(format!(
            "circle certificate needs n = 1, got n = {}",
            measure.dimension().get()
        )));
    }
    let m = m as usize;
    let zs: Vec<Complex64> = measure
        .points()
        .iter()
        .map(|p| Complex64::new(p.coords()[0], p.coords()[1]))
        .collect();
    let mut u = vec![vec![Complex64::new(0.0, 0.0); zs.len()]; m + 1];
    for (j, (z, &w)) in zs.iter().zip(measure.weights()).enumerate() {
        let mut pw = Complex64::new(w.sqrt(), 0.0);
        for row in u.iter_mut() {
            row[j] = pw;
            pw *= z;
        }
    }
    let mut dev: f64 = 0.0;
    for a in 0..=m {
        for b in 0..=m {
            let ip: Complex64 = u[a].iter().zip(&u[b]).map(|(x, y)| x * y.conj()).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            dev = dev.max((ip - want).norm());
        }
    }
    let parseval_sums = (0..zs.len()).map(|j| u.iter().map(|row| row[j].norm_sqr()).sum()).collect();
    Ok(CircleCertificate { max_unitarity_deviation: dev, parseval_sums, certified: dev < tol })
}
