//! Mean-zero polynomials of degree ≤ m restricted to S^n.
//!
//! The constraint space is spanned by centered monomials x^α − avg(x^α),
//! 1 ≤ |α| ≤ m. On the sphere these are linearly dependent (multiples of
//! |x|² − 1 vanish), so the basis is obtained from the eigen-decomposition
//! of their exact Gram matrix, dropping the null directions.

use crate::error::{Error, Result};
use crate::special::gamma_unchecked;
use crate::sphere::Dimension;
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Eigenvalues of the centered-monomial Gram matrix below this are treated
/// as relations generated by |x|² − 1.
pub const GRAM_EIGEN_CUTOFF: f64 = 1e-10;

/// Average of x^α over S^n with respect to normalized surface measure.
pub fn monomial_sphere_average(n: Dimension, exponents: &[u32]) -> Result<f64> {
    if exponents.len() != n.ambient() {
        return Err(Error::DimensionMismatch { expected: n.ambient(), got: exponents.len() });
    }
    Ok(monomial_average(exponents))
}

fn monomial_average(exponents: &[u32]) -> f64 {
    if exponents.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let d = exponents.len() as f64;
    let mut num = 1.0;
    let mut half_sum = 0.0;
    for &a in exponents {
        let h = (a as f64 + 1.0) / 2.0;
        num *= gamma_unchecked(h);
        half_sum += h;
    }
    // 2∏Γ((a_i+1)/2)/Γ(Σ(a_i+1)/2) divided by |S^n| = 2π^{d/2}/Γ(d/2)
    num / gamma_unchecked(half_sum) * gamma_unchecked(d / 2.0) / PI.powf(d / 2.0)
}

/// All exponent vectors of length `vars` with total degree ≤ `max_degree`,
/// graded lexicographic (constant first, then x_1 before x_2, …).
pub fn graded_lex_monomials(vars: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        let mut cur = vec![0u32; vars];
        push_degree(&mut out, &mut cur, 0, deg);
    }
    out
}

fn push_degree(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a;
        push_degree(out, cur, pos + 1, remaining - a);
    }
    cur[pos] = 0;
}

/// dim of P_m restricted to S^n, constants included.
pub fn restricted_dimension(n: usize, m: usize) -> usize {
    binomial(n + m, n) + if m == 0 { 0 } else { binomial(n + m - 1, n) }
}

fn binomial(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1))
}

/// L²(normalized μ)-orthonormal basis of mean-zero polynomials of degree ≤ m
/// on S^n, stored as coefficients over graded-lex monomials.
#[derive(Debug, Clone)]
pub struct MomentBasis {
    n: Dimension,
    m: u32,
    monomials: Vec<Vec<u32>>,
    /// rank × monomials, row-major.
    coeffs: Vec<f64>,
    /// For each coordinate j, the coefficients of ∂f_k/∂x_j (rank × monomials).
    grad_coeffs: Vec<Vec<f64>>,
    rank: usize,
}

impl MomentBasis {
    pub fn build(n: Dimension, m: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("moment degree must be >= 1".into()));
        }
        let vars = n.ambient();
        let monomials = graded_lex_monomials(vars, m);
        let nm = monomials.len();
        let avg: Vec<f64> = monomials.iter().map(|a| monomial_average(a)).collect();
        // centered monomials skip the constant at index 0
        let k = nm - 1;
        let mut gram = DMatrix::<f64>::zeros(k, k);
        let mut sum = vec![0u32; vars];
        for i in 0..k {
            for j in i..k {
                for (s, (a, b)) in sum.iter_mut().zip(monomials[i + 1].iter().zip(&monomials[j + 1])) {
                    *s = a + b;
                }
                let g = monomial_average(&sum) - avg[i + 1] * avg[j + 1];
                gram[(i, j)] = g;
                gram[(j, i)] = g;
            }
        }
        let eig = SymmetricEigen::new(gram);
        let mut order: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > GRAM_EIGEN_CUTOFF).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let rank = order.len();
        let mut coeffs = vec![0.0; rank * nm];
        for (row, &e) in order.iter().enumerate() {
            let v = eig.eigenvectors.column(e);
            // sign convention: the largest entry is positive
            let pivot = (0..k).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
            let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
            let scale = sign / eig.eigenvalues[e].sqrt();
            let mut constant = 0.0;
            for i in 0..k {
                let c = v[i] * scale;
                coeffs[row * nm + i + 1] = c;
                constant -= c * avg[i + 1];
            }
            coeffs[row * nm] = constant;
        }
        let index_of = |e: &[u32]| monomials.iter().position(|m| m.as_slice() == e);
        let mut grad_coeffs = vec![vec![0.0; rank * nm]; vars];
        for (a, mono) in monomials.iter().enumerate() {
            for j in 0..vars {
                if mono[j] == 0 {
                    continue;
                }
                let mut lowered = mono.clone();
                lowered[j] -= 1;
                let b = index_of(&lowered).expect("lower-degree monomial present");
                let factor = mono[j] as f64;
                for r in 0..rank {
                    grad_coeffs[j][r * nm + b] += factor * coeffs[r * nm + a];
                }
            }
        }
        Ok(Self { n, m, monomials, coeffs, grad_coeffs, rank })
    }

    pub fn dimension(&self) -> Dimension {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    /// Coefficients of basis function k over `monomials()`.
    pub fn coefficients(&self, k: usize) -> &[f64] {
        let nm = self.monomials.len();
        &self.coeffs[k * nm..(k + 1) * nm]
    }

    fn monomial_values(&self, x: &[f64], out: &mut [f64]) {
        let vars = x.len();
        let m = self.m as usize;
        let mut powers = vec![1.0; vars * (m + 1)];
        for j in 0..vars {
            for p in 1..=m {
                powers[j * (m + 1) + p] = powers[j * (m + 1) + p - 1] * x[j];
            }
        }
        for (o, mono) in out.iter_mut().zip(&self.monomials) {
            let mut v = 1.0;
            for (j, &a) in mono.iter().enumerate() {
                if a > 0 {
                    v *= powers[j * (m + 1) + a as usize];
                }
            }
            *o = v;
        }
    }

    /// Values f_k(x) for k < rank. `x` need not be unit length.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rank];
        self.eval_into(x, &mut out);
        out
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n.ambient(), "point dimension");
        let nm = self.monomials.len();
        let mut mono = vec![0.0; nm];
        self.monomial_values(x, &mut mono);
        for (k, o) in out.iter_mut().enumerate().take(self.rank) {
            *o = dot(&self.coeffs[k * nm..(k + 1) * nm], &mono);
        }
    }

    /// Values and Euclidean gradients; `grads[k * (n+1) + j]` = ∂f_k/∂x_j.
    pub fn eval_with_gradient(&self, x: &[f64], vals: &mut [f64], grads: &mut [f64]) {
        let vars = self.n.ambient();
        let nm = self.monomials.len();
        let mut mono = vec![0.0; nm];
        self.monomial_values(x, &mut mono);
        for k in 0..self.rank {
            let row = k * nm..(k + 1) * nm;
            vals[k] = dot(&self.coeffs[row.clone()], &mono);
            for j in 0..vars {
                grads[k * vars + j] = dot(&self.grad_coeffs[j][row.clone()], &mono);
            }
        }
    }

    /// r_k = Σ_i w_i f_k(x_i).
    pub fn residual(&self, points: &[&[f64]], weights: &[f64]) -> Result<Vec<f64>> {
        let mut r = vec![0.0; self.rank];
        let mut vals = vec![0.0; self.rank];
        for (x, &w) in points.iter().zip(weights) {
            if x.len() != self.n.ambient() {
                return Err(Error::DimensionMismatch { expected: self.n.ambient(), got: x.len() });
            }
            self.eval_into(x, &mut vals);
            for (ri, v) in r.iter_mut().zip(&vals) {
                *ri += w * v;
            }
        }
        Ok(r)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
