//! Points on S^n, geodesic distance and the canonical configurations.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const NORM_TOL: f64 = 1e-12;
const ACOS_CLAMP: f64 = 1e-14;

/// Sphere dimension n (the ambient space is R^{n+1}).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("sphere dimension must be >= 1".into()));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn ambient(self) -> usize {
        self.0 + 1
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

/// A unit vector in R^{n+1}.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SpherePoint(Vec<f64>);

impl SpherePoint {
    /// Accepts `coords` only if it is already unit length to 1e-12.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Domain("a sphere point needs at least 2 coordinates".into()));
        }
        let norm = norm(&coords);
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("point is not unit length (norm {norm})")));
        }
        Ok(Self(coords))
    }

    /// Normalizes `coords` onto the sphere.
    pub fn from_vec(mut coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Domain("a sphere point needs at least 2 coordinates".into()));
        }
        let norm = norm(&coords);
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Ok(Self(coords))
    }

    pub(crate) fn new_unchecked(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    /// e_k in R^{n+1} (zero based).
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = vec![0.0; n + 1];
        v[k] = 1.0;
        Self(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// Sphere dimension n.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }

    pub fn euclidean_distance(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn rotated(&self, q: &DMatrix<f64>) -> Self {
        let v = q * nalgebra::DVector::from_column_slice(&self.0);
        Self::from_vec(v.as_slice().to_vec()).expect("orthogonal map preserves norm")
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        SpherePoint::new(v).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Great-circle distance in [0, π].
pub fn geodesic_distance(x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    if x.0.len() != y.0.len() {
        return Err(Error::DimensionMismatch { expected: x.0.len(), got: y.0.len() });
    }
    Ok(geodesic_unchecked(x, y))
}

pub(crate) fn geodesic_unchecked(x: &SpherePoint, y: &SpherePoint) -> f64 {
    let c = x.dot(y);
    if c >= 1.0 - ACOS_CLAMP {
        // acos loses half the digits near 1; the chord is exact there
        let chord = x.euclidean_distance(y);
        return 2.0 * (0.5 * chord).min(1.0).asin();
    }
    if c <= -1.0 + ACOS_CLAMP {
        let chord = x.euclidean_distance(&y.neg());
        return PI - 2.0 * (0.5 * chord).min(1.0).asin();
    }
    c.clamp(-1.0, 1.0).acos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConfigurationKind {
    /// {ξ, −ξ}.
    Antipodal { xi: Vec<f64> },
    /// Vertices of a regular (n+1)-simplex inscribed in S^n.
    Simplex,
    /// ±e_1, …, ±e_{n+1}.
    CrossPolytope,
    /// e^{i(α + 2πj/count)}, j = 0..count, on S^1 only.
    RootsOfUnity { count: usize, alpha: f64 },
}

/// Builds one of the canonical configurations, optionally followed by a
/// seeded Haar-random orthogonal transform.
pub fn make_configuration(
    kind: &ConfigurationKind,
    n: Dimension,
    rotation_seed: Option<u64>,
) -> Result<Vec<SpherePoint>> {
    let n = n.get();
    let points = match kind {
        ConfigurationKind::Antipodal { xi } => {
            if xi.len() != n + 1 {
                return Err(Error::DimensionMismatch { expected: n + 1, got: xi.len() });
            }
            let p = SpherePoint::from_vec(xi.clone())?;
            let q = p.neg();
            vec![p, q]
        }
        ConfigurationKind::Simplex => simplex_vertices(n),
        ConfigurationKind::CrossPolytope => (0..=n)
            .flat_map(|k| {
                let e = SpherePoint::basis(n, k);
                let m = e.neg();
                [e, m]
            })
            .collect(),
        ConfigurationKind::RootsOfUnity { count, alpha } => {
            if n != 1 {
                return Err(Error::Unsupported(format!("roots of unity live on S^1, not S^{n}")));
            }
            if *count < 1 {
                return Err(Error::Unsupported("roots of unity need count >= 1".into()));
            }
            (0..*count)
                .map(|j| {
                    let t = alpha + 2.0 * PI * j as f64 / *count as f64;
                    SpherePoint::new_unchecked(vec![t.cos(), t.sin()])
                })
                .collect()
        }
    };
    Ok(match rotation_seed {
        Some(seed) => {
            let q = random_orthogonal(n + 1, seed);
            points.iter().map(|p| p.rotated(&q)).collect()
        }
        None => points,
    })
}

// Helmert basis of the hyperplane orthogonal to (1,…,1) in R^{n+2}; the
// projected standard basis vectors are the simplex vertices.
fn simplex_vertices(n: usize) -> Vec<SpherePoint> {
    let verts = n + 2;
    let scale = (1.0 - 1.0 / verts as f64).sqrt();
    (0..verts)
        .map(|i| {
            let coords = (1..verts)
                .map(|k| {
                    let kf = k as f64;
                    let h = if i < k {
                        1.0
                    } else if i == k {
                        -kf
                    } else {
                        0.0
                    };
                    h / (kf * (kf + 1.0)).sqrt() / scale
                })
                .collect();
            SpherePoint::from_vec(coords).expect("simplex vertex is nonzero")
        })
        .collect()
}

/// Haar-distributed orthogonal matrix from the QR factorization of a
/// Gaussian matrix with sign-corrected R diagonal.
pub fn random_orthogonal(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_orthogonal_with(dim, &mut rng)
}

pub(crate) fn random_orthogonal_with<R: rand::Rng>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col *= -1.0;
        }
    }
    q
}

/// Result of matching a point set to a target up to O(n+1) and relabeling.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub rotation: DMatrix<f64>,
    /// `permutation[i]` is the target index matched with point i.
    pub permutation: Vec<usize>,
    /// Largest Euclidean distance between an aligned point and its match.
    pub max_deviation: f64,
}

/// Orthogonal Procrustes over all relabelings (exhaustive, so only for
/// small sets). Returns `None` when the set sizes differ.
pub fn procrustes_align(points: &[SpherePoint], target: &[SpherePoint]) -> Option<Alignment> {
    if points.len() != target.len() || points.is_empty() || points.len() > 9 {
        return None;
    }
    let d = points[0].0.len();
    if points.iter().chain(target).any(|p| p.0.len() != d) {
        return None;
    }
    let k = points.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best: Option<Alignment> = None;
    let mut consider = |perm: &[usize]| {
        let mut h = DMatrix::<f64>::zeros(d, d);
        for (i, &j) in perm.iter().enumerate() {
            for a in 0..d {
                for b in 0..d {
                    h[(a, b)] += target[j].0[a] * points[i].0[b];
                }
            }
        }
        let svd = h.svd(true, true);
        let (Some(u), Some(vt)) = (svd.u, svd.v_t) else { return };
        let rot = u * vt;
        let dev = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| points[i].rotated(&rot).euclidean_distance(&target[j]))
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| dev < b.max_deviation) {
            best = Some(Alignment { rotation: rot, permutation: perm.to_vec(), max_deviation: dev });
        }
    };
    // Heap's algorithm
    let mut c = vec![0usize; k];
    consider(&perm);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            consider(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn distances() {
        let e1 = SpherePoint::basis(2, 0);
        let e2 = SpherePoint::basis(2, 1);
        assert_eq!(geodesic_distance(&e1, &e1).unwrap(), 0.0);
        assert_relative_eq!(geodesic_distance(&e1, &e1.neg()).unwrap(), PI, max_relative = 1e-15);
        assert_relative_eq!(geodesic_distance(&e1, &e2).unwrap(), PI / 2.0, max_relative = 1e-15);
        let f = SpherePoint::basis(3, 0);
        assert!(matches!(geodesic_distance(&e1, &f), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn nearly_collinear_points_do_not_produce_nan() {
        let a = SpherePoint::from_vec(vec![1.0, 1e-9, 0.0]).unwrap();
        let b = SpherePoint::from_vec(vec![1.0, -1e-9, 0.0]).unwrap();
        let d = geodesic_distance(&a, &b).unwrap();
        assert_relative_eq!(d, 2e-9, max_relative = 1e-6);
        let d = geodesic_distance(&a, &b.neg()).unwrap();
        assert!(d.is_finite() && (PI - d - 2e-9).abs() < 1e-12);
    }

    #[test]
    fn simplex_in_two_dimensions() {
        let pts = make_configuration(&ConfigurationKind::Simplex, dim(2), None).unwrap();
        assert_eq!(pts.len(), 4);
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_relative_eq!(pts[i].euclidean_distance(&pts[j]), 1.632_993_161_855_452, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn antipodal_and_roots() {
        let pts = make_configuration(
            &ConfigurationKind::Antipodal { xi: vec![1.0, 0.0, 0.0] },
            dim(2),
            None,
        )
        .unwrap();
        assert_eq!(pts[0].dot(&pts[1]), -1.0);
        let roots = make_configuration(&ConfigurationKind::RootsOfUnity { count: 4, alpha: 0.0 }, dim(1), None).unwrap();
        let want = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (p, w) in roots.iter().zip(want) {
            assert!((p.coords()[0] - w[0]).abs() < 1e-15 && (p.coords()[1] - w[1]).abs() < 1e-15);
        }
        assert!(make_configuration(&ConfigurationKind::RootsOfUnity { count: 4, alpha: 0.0 }, dim(2), None).is_err());
    }

    #[test]
    fn cross_polytope_size() {
        let pts = make_configuration(&ConfigurationKind::CrossPolytope, dim(3), Some(5)).unwrap();
        assert_eq!(pts.len(), 8);
    }

    #[test]
    fn procrustes_recovers_rotation_and_labels() {
        let base = make_configuration(&ConfigurationKind::Simplex, dim(3), None).unwrap();
        let mut moved = make_configuration(&ConfigurationKind::Simplex, dim(3), Some(11)).unwrap();
        moved.swap(0, 3);
        let al = procrustes_align(&moved, &base).unwrap();
        assert!(al.max_deviation < 1e-12, "{}", al.max_deviation);
        let octa = make_configuration(&ConfigurationKind::CrossPolytope, dim(2), None).unwrap();
        let tetra_plus = make_configuration(&ConfigurationKind::Simplex, dim(4), None).unwrap();
        assert!(procrustes_align(&octa[..4], &tetra_plus[..4]).is_none());
    }

    proptest! {
        #[test]
        fn configurations_are_unit_and_simplex_is_centered(n in 1usize..7, seed in any::<u64>()) {
            for kind in [ConfigurationKind::Simplex, ConfigurationKind::CrossPolytope] {
                let pts = make_configuration(&kind, dim(n), Some(seed)).unwrap();
                for p in &pts {
                    prop_assert!((norm(p.coords()) - 1.0).abs() < 1e-12);
                }
                let mut sum = vec![0.0; n + 1];
                for p in &pts {
                    for (s, c) in sum.iter_mut().zip(p.coords()) { *s += c; }
                }
                prop_assert!(norm(&sum) < 1e-10);
            }
            let pts = make_configuration(&ConfigurationKind::Simplex, dim(n), Some(seed)).unwrap();
            let want = -1.0 / (n as f64 + 1.0);
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    prop_assert!((pts[i].dot(&pts[j]) - want).abs() < 1e-12);
                }
            }
        }
    }
}
