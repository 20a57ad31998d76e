//! Quadrature: Gauss–Legendre, adaptive Gauss–Kronrod, and rules on S^n.

use crate::special::sphere_area;
use crate::sphere::SpherePoint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    // Newton in θ = arccos x keeps 1 − x² = sin²θ accurate near the endpoints.
    for i in 0..m {
        let mut theta = PI * (i as f64 + 0.75) / (n as f64 + 0.5);
        for _ in 0..100 {
            let x = theta.cos();
            let (p, q) = legendre_pair(n, x);
            let s = theta.sin();
            // dP_n/dθ = −sinθ·P_n'(x) = n(x P_n − P_{n−1}) / sinθ
            let dtheta = p * s / (n as f64 * (x * p - q));
            theta -= dtheta;
            if dtheta.abs() < 1e-16 {
                break;
            }
        }
        let (x, s) = (theta.cos(), theta.sin());
        let (_, q) = legendre_pair(n, x);
        let w = 2.0 * s * s / (n as f64 * q).powi(2);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// (P_n(x), P_{n−1}(x)) by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    (
        x.iter().map(|t| c + h * t).collect(),
        w.iter().map(|wi| h * wi).collect(),
    )
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = GK_WEIGHTS_K[7] * fc;
    let mut gauss = GK_WEIGHTS_G[3] * fc;
    for j in 0..7 {
        let dx = h * GK_NODES[j];
        let s = f(c - dx) + f(c + dx);
        kron += GK_WEIGHTS_K[j] * s;
        if j % 2 == 1 {
            gauss += GK_WEIGHTS_G[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over [a, b].
///
/// Bisects until the Kronrod/Gauss difference on each piece is below its
/// share of `max(abs_tol, rel_tol·|I|)`. Nodes never touch the endpoints.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    let (whole, err) = gk15(&f, a, b);
    let mut pieces = vec![(a, b, whole, err)];
    for _ in 0..20_000 {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (l, le) = gk15(&f, lo, mid);
        let (r, re) = gk15(&f, mid, hi);
        pieces.push((lo, mid, l, le));
        pieces.push((mid, hi, r, re));
    }
    // sum smallest first
    let mut vals: Vec<f64> = pieces.iter().map(|p| p.2).collect();
    vals.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    vals.iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    ProductGauss,
    MonteCarlo,
    /// Product rule on a geodesic cap: radial Gauss panels times a rule on
    /// the tangent sphere of directions.
    CapProduct,
}

/// Nodes and weights for ∫_{S^n} g dμ (unnormalized surface measure).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub nodes: Vec<SpherePoint>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Product Gauss rule on S^n with `polar` nodes per polar angle and
    /// `azimuth` equispaced nodes on the innermost circle.
    pub fn product_gauss(n: usize, polar: usize, azimuth: usize) -> Self {
        let raw = product_rule_raw(n, polar, azimuth);
        let (nodes, weights) = raw
            .into_iter()
            .map(|(x, w)| (SpherePoint::new_unchecked(x), w))
            .unzip();
        Self { kind: RuleKind::ProductGauss, nodes, weights }
    }

    /// `count` i.i.d. uniform points, each weighted |S^n|/count.
    pub fn monte_carlo(n: usize, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = sphere_area(n) / count as f64;
        let nodes = (0..count)
            .map(|_| {
                let v: Vec<f64> = (0..=n).map(|_| StandardNormal.sample(&mut rng)).collect();
                SpherePoint::from_vec(v).expect("gaussian sample is nonzero")
            })
            .collect();
        Self { kind: RuleKind::MonteCarlo, nodes, weights: vec![w; count] }
    }

    /// Product rule on the geodesic cap B_radius(center): `radial` gives
    /// (r, w) pairs for ∫ dr, directions come from a product rule on S^{n-1}.
    pub fn cap(center: &SpherePoint, radial: &RadialRule, polar: usize, azimuth: usize) -> Self {
        let n = center.dim();
        let frame = tangent_frame(center);
        let dirs: Vec<(Vec<f64>, f64)> = if n == 1 {
            vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]
        } else {
            product_rule_raw(n - 1, polar, azimuth)
        };
        let mut nodes = Vec::with_capacity(radial.nodes.len() * dirs.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
            let (s, c) = r.sin_cos();
            let jac = s.powi(n as i32 - 1);
            for (d, wd) in &dirs {
                let mut x: Vec<f64> = center.coords().iter().map(|v| c * v).collect();
                for (k, t) in frame.iter().enumerate() {
                    for (xi, ti) in x.iter_mut().zip(t) {
                        *xi += s * d[k] * ti;
                    }
                }
                nodes.push(SpherePoint::from_vec(x).expect("cap node is nonzero"));
                weights.push(wr * jac * wd);
            }
        }
        Self { kind: RuleKind::CapProduct, nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().copied().collect::<CompensatedSum>().value()
    }

    pub fn integrate<F: Fn(&SpherePoint) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).collect::<CompensatedSum>().value()
    }
}

/// Neumaier-compensated running sum. Plain summation over the 10⁵–10⁶ nodes
/// of a global rule loses ~N·ulp, which is visible once integrals of
/// mean-zero functions get multiplied by large floor constants.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::default();
        iter.into_iter().for_each(|v| acc.add(v));
        acc
    }
}

/// n orthonormal vectors spanning the tangent space at `center`.
pub(crate) fn tangent_frame(center: &SpherePoint) -> Vec<Vec<f64>> {
    let c = center.coords();
    let d = c.len();
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    let mut basis: Vec<Vec<f64>> = vec![c.to_vec()];
    for k in 0..d {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= dot * bi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v.clone());
            frame.push(v);
        }
        if frame.len() == d - 1 {
            break;
        }
    }
    frame
}

fn product_rule_raw(n: usize, polar: usize, azimuth: usize) -> Vec<(Vec<f64>, f64)> {
    if n == 1 {
        let h = 2.0 * PI / azimuth as f64;
        return (0..azimuth)
            .map(|j| {
                let phi = (j as f64 + 0.5) * h;
                (vec![phi.cos(), phi.sin()], h)
            })
            .collect();
    }
    let inner = product_rule_raw(n - 1, polar, azimuth);
    let mut out = Vec::with_capacity(polar * inner.len());
    if n == 2 {
        let (zs, wz) = gauss_legendre(polar);
        for (z, w) in zs.iter().zip(&wz) {
            let s = (1.0 - z * z).sqrt();
            for (y, wy) in &inner {
                let mut x = Vec::with_capacity(n + 1);
                x.push(*z);
                x.extend(y.iter().map(|v| s * v));
                out.push((x, w * wy));
            }
        }
    } else {
        let (ts, wt) = gauss_legendre_on(0.0, PI, polar);
        for (t, w) in ts.iter().zip(&wt) {
            let (s, c) = t.sin_cos();
            let jac = s.powi(n as i32 - 1);
            for (y, wy) in &inner {
                let mut x = Vec::with_capacity(n + 1);
                x.push(c);
                x.extend(y.iter().map(|v| s * v));
                out.push((x, w * jac * wy));
            }
        }
    }
    out
}

/// One-dimensional rule for ∫ g(r) dr on a radial interval.
#[derive(Debug, Clone, Default)]
pub struct RadialRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialRule {
    /// Composite Gauss–Legendre with `per_panel` nodes on each
    /// [breaks[k], breaks[k+1]]. Nodes never land on a breakpoint.
    pub fn composite(breaks: &[f64], per_panel: usize) -> Self {
        let mut rule = RadialRule::default();
        for pair in breaks.windows(2) {
            if pair[1] <= pair[0] {
                continue;
            }
            let (x, w) = gauss_legendre_on(pair[0], pair[1], per_panel);
            rule.nodes.extend(x);
            rule.weights.extend(w);
        }
        rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&r, w)| w * f(r)).sum()
    }
}
