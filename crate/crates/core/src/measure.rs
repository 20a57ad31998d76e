//! Finitely supported probability measures on S^n.

use crate::error::{Error, Result};
use crate::moments::MomentBasis;
use crate::sphere::{geodesic_unchecked, Dimension, SpherePoint};
use serde::{Deserialize, Serialize};

pub const WEIGHT_SUM_TOL: f64 = 1e-12;
pub const DEFAULT_MERGE_TOL: f64 = 1e-6;

/// Σ ν_i δ_{ξ_i} with ν_i > 0 and Σ ν_i = 1. Zero-weight atoms are dropped
/// on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureFile", into = "MeasureFile")]
pub struct DiscreteMeasure {
    n: Dimension,
    points: Vec<SpherePoint>,
    weights: Vec<f64>,
}

/// On-disk shape: `{"n": int, "points": [[f64; n+1], …], "weights": [f64, …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub n: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl TryFrom<MeasureFile> for DiscreteMeasure {
    type Error = Error;
    fn try_from(f: MeasureFile) -> Result<Self> {
        let n = Dimension::new(f.n)?;
        let points = f
            .points
            .into_iter()
            .map(|p| {
                if p.len() != n.ambient() {
                    return Err(Error::DimensionMismatch { expected: n.ambient(), got: p.len() });
                }
                SpherePoint::new(p)
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteMeasure::new(points, f.weights)
    }
}

impl From<DiscreteMeasure> for MeasureFile {
    fn from(m: DiscreteMeasure) -> Self {
        MeasureFile {
            n: m.n.get(),
            points: m.points.into_iter().map(SpherePoint::into_coords).collect(),
            weights: m.weights,
        }
    }
}

impl DiscreteMeasure {
    pub fn new(points: Vec<SpherePoint>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let n = Dimension::new(points[0].dim())?;
        if let Some(p) = points.iter().find(|p| p.dim() != n.get()) {
            return Err(Error::DimensionMismatch { expected: n.ambient(), got: p.coords().len() });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidMeasure("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        let (points, weights): (Vec<_>, Vec<_>) =
            points.into_iter().zip(weights).filter(|(_, w)| *w > 0.0).unzip();
        Ok(Self { n, points, weights })
    }

    /// Uniform weights on `points`.
    pub fn uniform(points: Vec<SpherePoint>) -> Result<Self> {
        let k = points.len();
        if k == 0 {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let w = vec![1.0 / k as f64; k];
        // 1/k summed k times can miss 1 by a few ulps; rebalance the last entry
        let mut w = w;
        let partial: f64 = w[..k - 1].iter().sum();
        w[k - 1] = 1.0 - partial;
        Self::new(points, w)
    }

    pub fn dimension(&self) -> Dimension {
        self.n
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point_slices(&self) -> Vec<&[f64]> {
        self.points.iter().map(|p| p.coords()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Applies an orthogonal matrix to every atom.
    pub fn rotated(&self, q: &nalgebra::DMatrix<f64>) -> Self {
        Self {
            n: self.n,
            points: self.points.iter().map(|p| p.rotated(q)).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// Σ ν_i^θ over the support.
pub fn theta_energy(measure: &DiscreteMeasure, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(energy_of(measure.weights(), theta))
}

pub(crate) fn energy_of(weights: &[f64], theta: f64) -> f64 {
    weights.iter().filter(|w| **w > 0.0).map(|w| w.powf(theta)).sum()
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta must lie in (0, 1), got {theta}")));
    }
    Ok(())
}

/// Moment residual vector of `measure` against `basis` and its norm.
pub fn moment_residual(measure: &DiscreteMeasure, basis: &MomentBasis) -> Result<(Vec<f64>, f64)> {
    if measure.dimension() != basis.dimension() {
        return Err(Error::DimensionMismatch {
            expected: basis.dimension().ambient(),
            got: measure.dimension().ambient(),
        });
    }
    let r = basis.residual(&measure.point_slices(), measure.weights())?;
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok((r, norm))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub residual_norm: f64,
}

/// Whether `measure` lies in M_m^c up to `tol` in moment-residual norm.
pub fn is_feasible(measure: &DiscreteMeasure, m: u32, tol: f64) -> Result<Feasibility> {
    let basis = MomentBasis::build(measure.dimension(), m)?;
    is_feasible_with(measure, &basis, tol)
}

pub fn is_feasible_with(measure: &DiscreteMeasure, basis: &MomentBasis, tol: f64) -> Result<Feasibility> {
    if !(tol > 0.0) {
        return Err(Error::Domain("feasibility tolerance must be positive".into()));
    }
    let (_, residual_norm) = moment_residual(measure, basis)?;
    Ok(Feasibility { feasible: residual_norm < tol, residual_norm })
}

/// Replaces each cluster of atoms (single linkage at geodesic distance
/// `dist_tol`) by one atom at the normalized weighted mean carrying the
/// summed weight. Clusters are emitted in order of their first member.
pub fn merge_close_points(measure: &DiscreteMeasure, dist_tol: f64) -> Result<DiscreteMeasure> {
    if !(dist_tol >= 0.0) {
        return Err(Error::Domain("merge tolerance must be nonnegative".into()));
    }
    let k = measure.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..k {
        for j in (i + 1)..k {
            if geodesic_unchecked(&measure.points[i], &measure.points[j]) <= dist_tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..k {
        let r = find(&mut parent, i);
        match roots.iter().position(|&x| x == r) {
            Some(pos) => members[pos].push(i),
            None => {
                roots.push(r);
                members.push(vec![i]);
            }
        }
    }
    if members.len() == k {
        return Ok(measure.clone());
    }
    let d = measure.n.ambient();
    let mut points = Vec::with_capacity(members.len());
    let mut weights = Vec::with_capacity(members.len());
    for group in members {
        let w: f64 = group.iter().map(|&i| measure.weights[i]).sum();
        if group.len() == 1 {
            points.push(measure.points[group[0]].clone());
            weights.push(w);
            continue;
        }
        let mut mean = vec![0.0; d];
        for &i in &group {
            for (m, c) in mean.iter_mut().zip(measure.points[i].coords()) {
                *m += measure.weights[i] * c;
            }
        }
        let len = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len < 1e-8 * w {
            return Err(Error::Merge("weighted mean of the cluster is numerically zero".into()));
        }
        points.push(SpherePoint::from_vec(mean)?);
        weights.push(w);
    }
    // keep the sum exact after regrouping
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    DiscreteMeasure::new(points, weights)
}
