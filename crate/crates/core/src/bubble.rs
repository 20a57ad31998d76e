//! Almost-extremal test functions for the degree-2 constrained Sobolev
//! inequality on S^n.
//!
//! Truncated bubbles (ε + t^{p'})^{−n/p*} are placed at the vertices of a
//! regular simplex. Their p*-th power has small but nonzero degree-2
//! moments; a correction η²f_j supported in a bump away from the caps plus a
//! constant floor c₁ε^{−n/p+τ} removes them exactly. Along ε → 0 the Rayleigh
//! quotient ‖u‖_{p*}^p / ‖∇u‖_p^p approaches (n+2)^{−p/n} S_{n,p}^p.
//!
//! All integrals split exactly over disjoint supports: radial 1-D quadrature
//! on each cap (the integrands are radial there), a product rule on the bump,
//! and the constant floor everywhere else.

use crate::error::{Error, Result};
use crate::moments::MomentBasis;
use crate::quadrature::{CompensatedSum, QuadratureRule, RadialRule};
use crate::sobolev::{sharp_sobolev, SobolevParams};
use crate::special::{beta, sphere_area};
use crate::sphere::{geodesic_unchecked, make_configuration, ConfigurationKind, SpherePoint};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_DELTA: f64 = 0.3;
pub const DEFAULT_BUMP_RADIUS: f64 = 0.25;
pub const MAX_CONDITION: f64 = 1e8;

/// Parameters of v = Σ_i φ_ε(dist(x, x_i)).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BubbleProfile {
    pub params: SobolevParams,
    pub eps: f64,
    pub delta: f64,
    pub tau: f64,
    pub centers: Vec<SpherePoint>,
}

impl BubbleProfile {
    /// Upper limit for τ: min{n/p, 2/p', p*/p'}.
    pub fn tau_max(params: &SobolevParams) -> f64 {
        let n = params.n as f64;
        (n / params.p).min(2.0 / params.p_prime).min(params.p_star / params.p_prime)
    }

    pub fn default_tau(params: &SobolevParams) -> f64 {
        0.9 * Self::tau_max(params)
    }

    pub fn new(params: SobolevParams, eps: f64, delta: f64, tau: f64, centers: Vec<SpherePoint>) -> Result<Self> {
        if !(eps > 0.0 && eps < delta) {
            return Err(Error::Precondition(format!("need 0 < eps < delta, got eps = {eps}, delta = {delta}")));
        }
        let tmax = Self::tau_max(&params);
        if !(tau > 0.0 && tau < tmax) {
            return Err(Error::Precondition(format!("tau must lie in (0, {tmax}), got {tau}")));
        }
        if centers.iter().any(|c| c.dim() != params.n) {
            return Err(Error::DimensionMismatch { expected: params.n + 1, got: centers[0].coords().len() });
        }
        let min_sep = min_pairwise_distance(&centers);
        if min_sep <= 4.0 * delta {
            return Err(Error::Precondition(format!(
                "caps of radius 2·delta overlap: centers {min_sep:.4} apart, need > {}",
                4.0 * delta
            )));
        }
        Ok(Self { params, eps, delta, tau, centers })
    }

    /// Centers at the vertices of the standard regular simplex, default τ.
    pub fn simplex(params: SobolevParams, eps: f64, delta: f64) -> Result<Self> {
        let centers = make_configuration(&ConfigurationKind::Simplex, params.dimension(), None)?;
        Self::new(params, eps, delta, Self::default_tau(&params), centers)
    }

    /// ε^{−n/p+τ}: the order of the raw moments and of the floor.
    pub fn floor_scale(&self) -> f64 {
        self.eps.powf(-(self.params.n as f64) / self.params.p + self.tau)
    }

    fn exponent(&self) -> f64 {
        self.params.n as f64 / self.params.p_star
    }
}

fn min_pairwise_distance(points: &[SpherePoint]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.min(geodesic_unchecked(&points[i], &points[j]));
        }
    }
    best
}

/// Radial profile: the bubble on [0, δ], a linear taper to 0 on [δ, 2δ].
pub fn phi_eps(t: f64, profile: &BubbleProfile) -> f64 {
    let (eps, delta, a) = (profile.eps, profile.delta, profile.exponent());
    let pp = profile.params.p_prime;
    if t <= delta {
        (eps + t.max(0.0).powf(pp)).powf(-a)
    } else if t < 2.0 * delta {
        (eps + delta.powf(pp)).powf(-a) * (2.0 - t / delta)
    } else {
        0.0
    }
}

/// dφ_ε/dt (one-sided at the kinks t = δ, 2δ, which quadrature avoids).
pub fn phi_eps_derivative(t: f64, profile: &BubbleProfile) -> f64 {
    let (eps, delta, a) = (profile.eps, profile.delta, profile.exponent());
    let pp = profile.params.p_prime;
    if t <= delta {
        let t = t.max(0.0);
        -a * (eps + t.powf(pp)).powf(-a - 1.0) * pp * t.powf(pp - 1.0)
    } else if t < 2.0 * delta {
        -(eps + delta.powf(pp)).powf(-a) / delta
    } else {
        0.0
    }
}

/// Coefficients of the leading terms ∫v^{p*} ≈ c_num ε^{−n/p} and
/// ∫|∇v|^p ≈ c_grad ε^{−n/p*}, and their limiting ratio c_num^{p/p*}/c_grad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingCoefficients {
    pub c_num: f64,
    pub c_grad: f64,
    pub limit_ratio: f64,
}

pub fn leading_coefficients(params: &SobolevParams) -> Result<LeadingCoefficients> {
    let n = params.n as f64;
    let (p, pp, ps) = (params.p, params.p_prime, params.p_star);
    if n / p <= 1.0 {
        return Err(Error::Domain("leading coefficients need p < n".into()));
    }
    let area = sphere_area(params.n - 1);
    let c_num = area * ((n + 2.0) / pp) * beta(n / p, n / pp)?;
    let c_grad = area * ((n - p) / (p - 1.0)).powf(p) * ((n + 2.0) / pp) * beta(n / p - 1.0, n / pp + 1.0)?;
    Ok(LeadingCoefficients { c_num, c_grad, limit_ratio: c_num.powf(p / ps) / c_grad })
}

/// |closed Beta form of the limit − (n+2)^{−p/n} S_{n,p}^p|. The two sides
/// go through different code paths (Beta integrals vs. the factorial form of
/// S_{n,p}), so agreement checks both.
pub fn limit_identity_check(params: &SobolevParams) -> Result<f64> {
    let n = params.n as f64;
    let (p, pp, ps) = (params.p, params.p_prime, params.p_star);
    let lhs = sphere_area(params.n - 1).powf(-p / n)
        * ((p - 1.0) / (n - p)).powf(p)
        * ((n + 2.0) / pp).powf(-p / n)
        * beta(n / p, n / pp)?.powf(p / ps)
        / beta(n / p - 1.0, n / pp + 1.0)?;
    Ok((lhs - rayleigh_target(params)).abs())
}

/// (n+2)^{−p/n} S_{n,p}^p.
pub fn rayleigh_target(params: &SobolevParams) -> f64 {
    (params.n as f64 + 2.0).powf(-params.p / params.n as f64) * sharp_sobolev(params).powf(params.p)
}

/// Quadrature used for a profile: a graded radial rule on each cap, a rule
/// for the tangent directions of the cap moments, and a global product rule
/// for ∫f_k of the constant floor. The bubbles are far too narrow for any
/// global rule; the floor rule only has to be exact on degree-2 polynomials,
/// and a small one keeps round-off below what the floor constant amplifies.
#[derive(Debug, Clone)]
pub struct BubbleQuadrature {
    pub radial: RadialRule,
    pub tangent_polar: usize,
    pub tangent_azimuth: usize,
    pub bump_radial_panels: usize,
    pub bump_polar: usize,
    pub bump_azimuth: usize,
    pub floor_rule: QuadratureRule,
}

impl BubbleQuadrature {
    /// Panels graded geometrically (8 per decade) from 1e-4·ε^{1/p'} up to δ,
    /// then two panels across the taper. 12 Gauss nodes per panel.
    pub fn for_profile(profile: &BubbleProfile) -> Self {
        let scale = profile.eps.powf(1.0 / profile.params.p_prime);
        let delta = profile.delta;
        let mut breaks = vec![0.0];
        let mut r = (1e-4 * scale).min(1e-3 * delta);
        let q = 10f64.powf(1.0 / 8.0);
        while r < delta {
            breaks.push(r);
            r *= q;
        }
        breaks.extend([delta, 1.5 * delta, 2.0 * delta]);
        Self {
            radial: RadialRule::composite(&breaks, 12),
            tangent_polar: 4,
            tangent_azimuth: 8,
            bump_radial_panels: 8,
            bump_polar: 24,
            bump_azimuth: 64,
            floor_rule: QuadratureRule::product_gauss(profile.params.n, 8, 16),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BubbleIntegrals {
    pub i_pstar: f64,
    pub i_p: f64,
    pub i_grad: f64,
    /// ∫ v^{p*} f_k dμ for the orthonormal degree-2 basis.
    pub moment_vec: Vec<f64>,
}

fn cap_measure(profile: &BubbleProfile) -> f64 {
    (profile.centers.len() as f64) * sphere_area(profile.params.n - 1)
}

fn sin_jac(r: f64, n: usize) -> f64 {
    r.sin().powi(n as i32 - 1)
}

/// Integrals of the uncorrected v.
pub fn integrate_bubble(profile: &BubbleProfile, quad: &BubbleQuadrature, basis: &MomentBasis) -> Result<BubbleIntegrals> {
    let sep = min_pairwise_distance(&profile.centers);
    if sep <= 4.0 * profile.delta {
        return Err(Error::Precondition("bubble caps overlap".into()));
    }
    if basis.dimension().get() != profile.params.n {
        return Err(Error::DimensionMismatch { expected: profile.params.n + 1, got: basis.dimension().ambient() });
    }
    let n = profile.params.n;
    let (p, ps) = (profile.params.p, profile.params.p_star);
    let factor = cap_measure(profile);
    let i_pstar = factor * quad.radial.integrate(|r| phi_eps(r, profile).powf(ps) * sin_jac(r, n));
    let i_p = factor * quad.radial.integrate(|r| phi_eps(r, profile).powf(p) * sin_jac(r, n));
    let i_grad = factor * quad.radial.integrate(|r| phi_eps_derivative(r, profile).abs().powf(p) * sin_jac(r, n));
    let l = basis.rank();
    let mut moment_vec = vec![0.0; l];
    let mut vals = vec![0.0; l];
    for c in &profile.centers {
        let rule = QuadratureRule::cap(c, &quad.radial, quad.tangent_polar, quad.tangent_azimuth);
        let per_radius = rule.len() / quad.radial.len();
        for (idx, (x, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let r = quad.radial.nodes[idx / per_radius];
            let g = phi_eps(r, profile).powf(ps);
            if g == 0.0 {
                continue;
            }
            basis.eval_into(x.coords(), &mut vals);
            for (mk, v) in moment_vec.iter_mut().zip(&vals) {
                *mk += w * g * v;
            }
        }
    }
    Ok(BubbleIntegrals { i_pstar, i_p, i_grad, moment_vec })
}

/// Smooth bump exp(1 − 1/(1 − (d/ρ)²)) in the geodesic distance d from
/// `center`, supported in B_ρ(center).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bump {
    pub center: SpherePoint,
    pub radius: f64,
}

impl Bump {
    pub fn value(&self, d: f64) -> f64 {
        let s = d / self.radius;
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }

    pub fn derivative(&self, d: f64) -> f64 {
        let s = d / self.radius;
        if s >= 1.0 {
            0.0
        } else {
            let q = 1.0 - s * s;
            self.value(d) * (-2.0 * s / self.radius) / (q * q)
        }
    }

    /// Among the antipodes of the centers and a fixed spiral of candidate
    /// points, the one farthest from every center.
    pub fn away_from(centers: &[SpherePoint], radius: f64) -> Self {
        let n = centers[0].dim();
        let mut candidates: Vec<SpherePoint> = centers.iter().map(SpherePoint::neg).collect();
        for k in 0..400 {
            // golden-angle spiral lifted to R^{n+1}
            let t = (k as f64 + 0.5) / 400.0;
            let phi = k as f64 * 2.399_963_229_728_653;
            let mut v = vec![0.0; n + 1];
            v[0] = 1.0 - 2.0 * t;
            let s = (1.0 - v[0] * v[0]).sqrt();
            v[1] = s * phi.cos();
            if n >= 2 {
                v[2] = s * phi.sin();
            }
            for (j, vj) in v.iter_mut().enumerate().skip(3) {
                *vj = 0.3 * ((k * (j + 1)) as f64).sin();
            }
            if let Ok(p) = SpherePoint::from_vec(v) {
                candidates.push(p);
            }
        }
        let clearance = |c: &SpherePoint| centers.iter().map(|x| geodesic_unchecked(c, x)).fold(f64::INFINITY, f64::min);
        let center = candidates
            .into_iter()
            .max_by(|a, b| clearance(a).total_cmp(&clearance(b)))
            .expect("candidates");
        Self { center, radius }
    }
}

/// The moment-correction system A β = −m with A_kj = ∫ η² f_j f_k dμ.
#[derive(Debug, Clone)]
pub struct CorrectionSystem {
    pub basis: MomentBasis,
    pub bump: Bump,
    pub rule: QuadratureRule,
    pub gram: DMatrix<f64>,
    pub condition_number: f64,
    /// ∫ ψ_j dμ.
    pub psi_integrals: Vec<f64>,
}

impl CorrectionSystem {
    pub fn new(profile: &BubbleProfile, quad: &BubbleQuadrature, bump_radius: f64) -> Result<Self> {
        let basis = MomentBasis::build(profile.params.dimension(), 2)?;
        let bump = Bump::away_from(&profile.centers, bump_radius);
        let clearance = profile
            .centers
            .iter()
            .map(|x| geodesic_unchecked(&bump.center, x))
            .fold(f64::INFINITY, f64::min);
        if clearance - 2.0 * profile.delta <= bump.radius {
            return Err(Error::IllConditioned(format!(
                "bump of radius {} does not fit between the caps (clearance {:.4}); choose a smaller bump or delta",
                bump.radius,
                clearance - 2.0 * profile.delta
            )));
        }
        let breaks: Vec<f64> =
            (0..=quad.bump_radial_panels).map(|k| bump.radius * k as f64 / quad.bump_radial_panels as f64).collect();
        let radial = RadialRule::composite(&breaks, 16);
        let rule = QuadratureRule::cap(&bump.center, &radial, quad.bump_polar, quad.bump_azimuth);
        let l = basis.rank();
        let mut gram = DMatrix::<f64>::zeros(l, l);
        let mut psi_integrals = vec![0.0; l];
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let eta = bump.value(geodesic_unchecked(&bump.center, x));
            let e2 = eta * eta;
            if e2 == 0.0 {
                continue;
            }
            let f = basis.eval(x.coords());
            for j in 0..l {
                psi_integrals[j] += w * e2 * f[j];
                for k in 0..l {
                    gram[(k, j)] += w * e2 * f[j] * f[k];
                }
            }
        }
        let eig = SymmetricEigen::new(gram.clone());
        let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        let condition_number = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition_number < MAX_CONDITION) {
            return Err(Error::IllConditioned(format!(
                "correction Gram matrix has condition number {condition_number:.3e}; try a larger or relocated bump"
            )));
        }
        Ok(Self { basis, bump, rule, gram, condition_number, psi_integrals })
    }

    /// Σ_j β_j ψ_j(x) and its tangential gradient.
    fn correction_at(&self, beta: &[f64], x: &SpherePoint) -> (f64, Vec<f64>) {
        let d = x.coords().len();
        let dist = geodesic_unchecked(&self.bump.center, x);
        let eta = self.bump.value(dist);
        if eta == 0.0 {
            return (0.0, vec![0.0; d]);
        }
        let l = self.basis.rank();
        let mut vals = vec![0.0; l];
        let mut grads = vec![0.0; l * d];
        self.basis.eval_with_gradient(x.coords(), &mut vals, &mut grads);
        let xc = x.coords();
        let bc = self.bump.center.coords();
        // ∇d points away from the bump center
        let cosd: f64 = xc.iter().zip(bc).map(|(a, b)| a * b).sum();
        let mut dir: Vec<f64> = bc.iter().zip(xc).map(|(b, a)| -(b - cosd * a)).collect();
        let dn = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dn > 0.0 {
            dir.iter_mut().for_each(|v| *v /= dn);
        }
        let deta = self.bump.derivative(dist);
        let mut value = 0.0;
        let mut grad = vec![0.0; d];
        for j in 0..l {
            value += beta[j] * eta * eta * vals[j];
            let gf: Vec<f64> = (0..d).map(|a| grads[j * d + a]).collect();
            let radial: f64 = gf.iter().zip(xc).map(|(g, x)| g * x).sum();
            for a in 0..d {
                let tangential = gf[a] - radial * xc[a];
                grad[a] += beta[j] * (2.0 * eta * deta * dir[a] * vals[j] + eta * eta * tangential);
            }
        }
        (value, grad)
    }
}

/// u^{p*} = v^{p*} + Σβ_jψ_j + c₁ε^{−n/p+τ} with its integrals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectedTestFunction {
    pub profile: BubbleProfile,
    pub beta: Vec<f64>,
    pub c1: f64,
    pub floor: f64,
    pub i_pstar: f64,
    pub i_p: f64,
    pub i_grad: f64,
    /// ‖∫u^{p*} f_k dμ‖ after correction.
    pub moment_residual: f64,
    /// ‖∫v^{p*} f_k dμ‖ before correction.
    pub raw_moment_residual: f64,
    /// min over quadrature nodes of u^{p*}/ε^{−n/p+τ}; at least 1.
    pub min_floor_ratio: f64,
    #[serde(skip)]
    bump: Option<Bump>,
}

impl CorrectedTestFunction {
    pub fn rayleigh_quotient(&self) -> f64 {
        let ps = self.profile.params.p_star;
        self.i_pstar.powf(self.profile.params.p / ps) / self.i_grad
    }
}

pub fn corrected_test_function(
    profile: &BubbleProfile,
    system: &CorrectionSystem,
    quad: &BubbleQuadrature,
) -> Result<CorrectedTestFunction> {
    let raw = integrate_bubble(profile, quad, &system.basis)?;
    let l = system.basis.rank();
    let rhs = DVector::from_iterator(l, raw.moment_vec.iter().map(|m| -m));
    let chol = system
        .gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::IllConditioned("correction Gram matrix is not positive definite".into()))?;
    let mut beta = chol.solve(&rhs);
    // one step of iterative refinement
    let resid = &rhs - &system.gram * &beta;
    beta += chol.solve(&resid);
    let beta: Vec<f64> = beta.iter().copied().collect();

    let n = profile.params.n;
    let (p, ps) = (profile.params.p, profile.params.p_star);
    let floor = profile.floor_scale();
    // smallest c₁ = 2^k, k ≥ 0, with Σβψ + c₁·floor ≥ floor on every bump node
    let bump_values: Vec<(f64, Vec<f64>)> = system.rule.nodes.iter().map(|x| system.correction_at(&beta, x)).collect();
    let min_corr = bump_values.iter().map(|(v, _)| *v).fold(0.0, f64::min);
    let mut c1 = 1.0;
    while min_corr + c1 * floor < floor {
        c1 *= 2.0;
    }
    let level = c1 * floor;

    // caps
    let factor = cap_measure(profile);
    let cap_pstar = factor * quad.radial.integrate(|r| (phi_eps(r, profile).powf(ps) + level) * sin_jac(r, n));
    let cap_p = factor * quad.radial.integrate(|r| (phi_eps(r, profile).powf(ps) + level).powf(p / ps) * sin_jac(r, n));
    let cap_grad = factor
        * quad.radial.integrate(|r| {
            let phi = phi_eps(r, profile);
            if phi == 0.0 {
                return 0.0;
            }
            let w = phi.powf(ps) + level;
            let du = phi_eps_derivative(r, profile).abs() * phi.powf(ps - 1.0) * w.powf(1.0 / ps - 1.0);
            du.powf(p) * sin_jac(r, n)
        });
    let cap_area = factor * quad.radial.integrate(|r| sin_jac(r, n));

    // bump
    let mut bump_pstar = 0.0;
    let mut bump_p = 0.0;
    let mut bump_grad = 0.0;
    let mut bump_area = 0.0;
    let mut min_ratio = f64::INFINITY;
    for ((value, grad), w) in bump_values.iter().zip(&system.rule.weights) {
        let u_ps = value + level;
        bump_pstar += w * u_ps;
        bump_p += w * u_ps.powf(p / ps);
        let g = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        bump_grad += w * ((1.0 / ps) * u_ps.powf(1.0 / ps - 1.0) * g).powf(p);
        bump_area += w;
        min_ratio = min_ratio.min(u_ps / floor);
    }
    min_ratio = min_ratio.min(c1);

    let rest_area = sphere_area(n) - cap_area - bump_area;
    let i_pstar = cap_pstar + bump_pstar + level * rest_area;
    let i_p = cap_p + bump_p + level.powf(p / ps) * rest_area;
    let i_grad = cap_grad + bump_grad;

    // moments: ∫v^{p*}f + Σβ_j∫ψ_j f + level·∫f
    let mut acc = vec![CompensatedSum::default(); l];
    for (x, w) in quad.floor_rule.nodes.iter().zip(&quad.floor_rule.weights) {
        let f = system.basis.eval(x.coords());
        for (a, v) in acc.iter_mut().zip(&f) {
            a.add(w * v);
        }
    }
    let floor_moments: Vec<f64> = acc.iter().map(CompensatedSum::value).collect();
    let corrected: Vec<f64> = (0..l)
        .map(|k| {
            let a: f64 = (0..l).map(|j| system.gram[(k, j)] * beta[j]).sum();
            raw.moment_vec[k] + a + level * floor_moments[k]
        })
        .collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    Ok(CorrectedTestFunction {
        profile: profile.clone(),
        c1,
        floor,
        i_pstar,
        i_p,
        i_grad,
        moment_residual: norm(&corrected),
        raw_moment_residual: norm(&raw.moment_vec),
        min_floor_ratio: min_ratio,
        beta,
        bump: Some(system.bump.clone()),
    })
}

impl CorrectedTestFunction {
    /// u^{p*}(x) for a point x, given the correction system it was built with.
    pub fn pstar_power_at(&self, system: &CorrectionSystem, x: &SpherePoint) -> f64 {
        let v: f64 = self
            .profile
            .centers
            .iter()
            .map(|c| phi_eps(geodesic_unchecked(c, x), &self.profile))
            .sum();
        let (corr, _) = system.correction_at(&self.beta, x);
        v.powf(self.profile.params.p_star) + corr + self.c1 * self.floor
    }

    pub fn bump(&self) -> Option<&Bump> {
        self.bump.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub i_pstar: f64,
    pub i_p: f64,
    pub i_grad: f64,
    pub moment_residual: f64,
    pub r: f64,
    pub target: f64,
    pub rel_err: f64,
    pub raw_moment_residual: f64,
    pub beta_max: f64,
    pub c1: f64,
}

pub const SWEEP_CSV_HEADER: &str = "eps,I_pstar,I_p,I_grad,moment_residual,R,target,rel_err";

/// Rayleigh quotients of the corrected test function along `eps_list`,
/// simplex centers, default τ and bump.
pub fn rayleigh_sweep(params: &SobolevParams, eps_list: &[f64], delta: f64) -> Result<Vec<SweepRow>> {
    if eps_list.is_empty() {
        return Err(Error::Precondition("empty eps list".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("eps list must be strictly descending".into()));
    }
    let target = rayleigh_target(params);
    eps_list
        .par_iter()
        .map(|&eps| {
            let profile = BubbleProfile::simplex(*params, eps, delta)?;
            let quad = BubbleQuadrature::for_profile(&profile);
            let system = CorrectionSystem::new(&profile, &quad, DEFAULT_BUMP_RADIUS)?;
            let u = corrected_test_function(&profile, &system, &quad)?;
            let r = u.rayleigh_quotient();
            Ok(SweepRow {
                eps,
                i_pstar: u.i_pstar,
                i_p: u.i_p,
                i_grad: u.i_grad,
                moment_residual: u.moment_residual,
                r,
                target,
                rel_err: (r - target).abs() / target,
                raw_moment_residual: u.raw_moment_residual,
                beta_max: u.beta.iter().fold(0.0, |a, b| a.max(b.abs())),
                c1: u.c1,
            })
        })
        .collect()
}

/// CSV with the fixed header and 17 significant digits per value.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [r.eps, r.i_pstar, r.i_p, r.i_grad, r.moment_residual, r.r, r.target, r.rel_err];
        let line: Vec<String> = cells.iter().map(|v| format_f64(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// 17 significant digits, scientific notation.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}
