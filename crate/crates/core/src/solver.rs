//! Numerical minimization of Σν_i^θ over moment-vanishing measures.
//!
//! Each restart runs a quadratic-penalty outer loop around a projected
//! gradient inner loop: weights step then project onto the probability
//! simplex, points step along the tangent space then renormalize. Between
//! outer iterations tiny atoms are pruned. After the loop close atoms are
//! merged and a minimum-norm Gauss–Newton solve drives the moment residual
//! to round-off on the surviving support.

use crate::error::{Error, Result};
use crate::measure::{check_theta, energy_of, merge_close_points, moment_residual, DiscreteMeasure, DEFAULT_MERGE_TOL};
use crate::moments::MomentBasis;
use crate::quadrature::tangent_frame;
use crate::sphere::{make_configuration, random_orthogonal_with, ConfigurationKind, Dimension, SpherePoint};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Weights below this are clamped inside the energy gradient.
pub const WEIGHT_GRADIENT_FLOOR: f64 = 1e-12;
/// Atoms lighter than this are pruned between outer iterations.
pub const PRUNE_WEIGHT: f64 = 1e-10;
const ENERGY_TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub support_size: usize,
    pub restarts: usize,
    pub max_outer_iters: usize,
    pub max_inner_iters: usize,
    pub penalty_init: f64,
    pub penalty_growth: f64,
    pub step_size: f64,
    pub grad_tol: f64,
    pub residual_tol: f64,
    pub merge_tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            support_size: 8,
            restarts: 20,
            max_outer_iters: 12,
            max_inner_iters: 3000,
            penalty_init: 10.0,
            penalty_growth: 10.0,
            step_size: 1e-2,
            grad_tol: 1e-10,
            residual_tol: 1e-8,
            merge_tol: DEFAULT_MERGE_TOL,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Domain(msg.to_string()));
        if self.support_size < 1 {
            return bad("support_size must be >= 1");
        }
        if self.restarts < 1 {
            return bad("restarts must be >= 1");
        }
        if !(self.penalty_growth > 1.0) {
            return bad("penalty_growth must exceed 1");
        }
        if !(self.penalty_init > 0.0) || !(self.step_size > 0.0) {
            return bad("penalty_init and step_size must be positive");
        }
        if !(self.grad_tol > 0.0) || !(self.residual_tol > 0.0) || !(self.merge_tol >= 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub n: usize,
    pub m: u32,
    pub theta: f64,
    pub best_measure: DiscreteMeasure,
    pub energy: f64,
    pub residual_norm: f64,
    pub closed_form: Option<f64>,
    pub gap: Option<f64>,
    /// Set when no closed form is known: the energy is an upper bound only.
    pub conjectural: bool,
    pub iterations: usize,
    pub converged: bool,
    pub restarts_converged: usize,
    pub best_restart: usize,
}

/// Θ(m, θ, n) where a closed form is known.
pub fn closed_form_theta(m: u32, theta: f64, n: Dimension) -> Result<Option<f64>> {
    check_theta(theta)?;
    let n = n.get() as f64;
    let count = if n == 1.0 {
        Some(m as f64 + 1.0)
    } else {
        match m {
            1 => Some(2.0),
            2 => Some(n + 2.0),
            3 => Some(2.0 * n + 2.0),
            _ => None,
        }
    };
    Ok(count.map(|c| c.powf(1.0 - theta)))
}

/// Smallest support that can carry a measure in M_m^c, where known.
pub fn minimal_support(n: Dimension, m: u32) -> usize {
    let nn = n.get();
    if nn == 1 {
        return m as usize + 1;
    }
    match m {
        1 => 2,
        2 => nn + 2,
        3 => 2 * nn + 2,
        _ => nn + 2,
    }
}

/// Probability weights on a fixed support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() || alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Domain("weights must be nonnegative and finite".into()));
        }
        let s: f64 = alphas.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("weights sum to {s}, not 1")));
        }
        Ok(Self(alphas))
    }

    pub fn alphas(&self) -> &[f64] {
        &self.0
    }
}

/// Unit vectors with these weights can have zero weighted sum iff no
/// weight exceeds the total of the others.
pub fn weight_feasibility_m1(w: &WeightVector) -> bool {
    let max = w.0.iter().cloned().fold(0.0, f64::max);
    2.0 * max <= 1.0 + 1e-12
}

/// Exhaustive minimum of Σα_i^θ over grid weights (multiples of
/// 1/grid_steps) on at most `max_support` atoms satisfying the polygon
/// inequality.
pub fn bruteforce_theta_m1(theta: f64, max_support: usize, grid_steps: usize) -> Result<f64> {
    check_theta(theta)?;
    if !(1..=5).contains(&max_support) || !(1..=200).contains(&grid_steps) {
        return Err(Error::Domain("bruteforce needs 1 <= support <= 5 and 1 <= grid_steps <= 200".into()));
    }
    let h = 1.0 / grid_steps as f64;
    let mut best = f64::INFINITY;
    let mut parts = Vec::with_capacity(max_support);
    // nonincreasing compositions suffice: the energy and the feasibility
    // test are symmetric in the weights
    fn walk(rem: usize, cap: usize, slots: usize, parts: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if rem == 0 {
            visit(parts);
            return;
        }
        if slots == 0 {
            return;
        }
        for p in (1..=cap.min(rem)).rev() {
            parts.push(p);
            walk(rem - p, p, slots - 1, parts, visit);
            parts.pop();
        }
    }
    walk(grid_steps, grid_steps, max_support, &mut parts, &mut |ps| {
        if 2 * ps[0] > grid_steps {
            return;
        }
        let e: f64 = ps.iter().map(|&p| (p as f64 * h).powf(theta)).sum();
        if e < best {
            best = e;
        }
    });
    Ok(best)
}

/// Euclidean projection onto {w ≥ 0, Σw = 1}.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut tau = 0.0;
    for (j, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (j as f64 + 1.0);
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

/// Working state of one restart: K atoms with flat point storage.
#[derive(Debug, Clone)]
struct State {
    dim: usize,
    weights: Vec<f64>,
    points: Vec<f64>,
}

impl State {
    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    fn len(&self) -> usize {
        self.weights.len()
    }

    fn random<R: Rng>(n: usize, k: usize, rng: &mut R) -> Self {
        let dim = n + 1;
        let mut points = Vec::with_capacity(k * dim);
        for _ in 0..k {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            points.extend(v.iter().map(|x| x / norm));
        }
        // uniform on the simplex
        let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = raw.iter().sum();
        Self { dim, weights: raw.iter().map(|x| x / s).collect(), points }
    }

    fn from_measure(m: &DiscreteMeasure) -> Self {
        Self {
            dim: m.dimension().ambient(),
            weights: m.weights().to_vec(),
            points: m.points().iter().flat_map(|p| p.coords().iter().copied()).collect(),
        }
    }

    /// Drops atoms with zero weight.
    fn compact(&mut self) {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect();
        self.points = keep.iter().flat_map(|&i| self.point(i).to_vec()).collect();
        self.weights = keep.iter().map(|&i| self.weights[i]).collect();
    }

    fn to_measure(&self) -> Result<DiscreteMeasure> {
        let pts = (0..self.len())
            .map(|i| SpherePoint::from_vec(self.point(i).to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let s: f64 = self.weights.iter().sum();
        let w = self.weights.iter().map(|x| x / s).collect();
        DiscreteMeasure::new(pts, w)
    }
}

struct Problem<'a> {
    basis: &'a MomentBasis,
    theta: f64,
}

impl Problem<'_> {
    fn residual(&self, s: &State) -> Vec<f64> {
        let l = self.basis.rank();
        let mut r = vec![0.0; l];
        let mut vals = vec![0.0; l];
        for i in 0..s.len() {
            if s.weights[i] == 0.0 {
                continue;
            }
            self.basis.eval_into(s.point(i), &mut vals);
            for (rk, v) in r.iter_mut().zip(&vals) {
                *rk += s.weights[i] * v;
            }
        }
        r
    }

    fn objective(&self, s: &State, rho: f64) -> f64 {
        let r = self.residual(s);
        energy_of(&s.weights, self.theta) + 0.5 * rho * r.iter().map(|x| x * x).sum::<f64>()
    }

    /// (∇_w F, tangent ∇_x F).
    fn gradient(&self, s: &State, rho: f64) -> (Vec<f64>, Vec<f64>) {
        let l = self.basis.rank();
        let d = s.dim;
        let r = self.residual(s);
        let mut gw = vec![0.0; s.len()];
        let mut gx = vec![0.0; s.len() * d];
        let mut vals = vec![0.0; l];
        let mut grads = vec![0.0; l * d];
        for i in 0..s.len() {
            let w = s.weights[i];
            let x = s.point(i);
            self.basis.eval_with_gradient(x, &mut vals, &mut grads);
            let mut g = self.theta * w.max(WEIGHT_GRADIENT_FLOOR).powf(self.theta - 1.0);
            g += rho * vals.iter().zip(&r).map(|(v, rk)| v * rk).sum::<f64>();
            gw[i] = g;
            if w == 0.0 {
                continue;
            }
            let out = &mut gx[i * d..(i + 1) * d];
            for k in 0..l {
                let c = rho * w * r[k];
                for j in 0..d {
                    out[j] += c * grads[k * d + j];
                }
            }
            let radial: f64 = out.iter().zip(x).map(|(a, b)| a * b).sum();
            for j in 0..d {
                out[j] -= radial * x[j];
            }
        }
        (gw, gx)
    }
}

struct InnerStats {
    iterations: usize,
}

fn inner_loop(p: &Problem, s: &mut State, rho: f64, cfg: &SolverConfig, steps: &mut (f64, f64)) -> InnerStats {
    let mut f = p.objective(s, rho);
    let mut quiet = 0;
    let mut it = 0;
    while it < cfg.max_inner_iters {
        it += 1;
        let f_start = f;
        // weights
        let (gw, _) = p.gradient(s, rho);
        loop {
            let trial: Vec<f64> = s.weights.iter().zip(&gw).map(|(w, g)| w - steps.0 * g).collect();
            let w_new = project_simplex(&trial);
            let mut cand = s.clone();
            let delta: Vec<f64> = w_new.iter().zip(&s.weights).map(|(a, b)| a - b).collect();
            cand.weights = w_new;
            let f_new = p.objective(&cand, rho);
            let lin: f64 = gw.iter().zip(&delta).map(|(g, d)| g * d).sum();
            let quad: f64 = delta.iter().map(|d| d * d).sum::<f64>() / (2.0 * steps.0);
            if f_new <= f + lin + quad + 1e-15 * f.abs() {
                *s = cand;
                f = f_new;
                steps.0 *= 1.5;
                break;
            }
            steps.0 *= 0.5;
            if steps.0 < 1e-30 {
                break;
            }
        }
        // points
        let (_, gx) = p.gradient(s, rho);
        let gnorm2: f64 = gx.iter().map(|g| g * g).sum();
        if gnorm2 > 0.0 {
            loop {
                let mut cand = s.clone();
                for i in 0..cand.len() {
                    let x = &mut cand.points[i * s.dim..(i + 1) * s.dim];
                    for (xj, gj) in x.iter_mut().zip(&gx[i * s.dim..(i + 1) * s.dim]) {
                        *xj -= steps.1 * gj;
                    }
                    let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    x.iter_mut().for_each(|v| *v /= nrm);
                }
                let f_new = p.objective(&cand, rho);
                if f_new <= f - 1e-4 * steps.1 * gnorm2 {
                    *s = cand;
                    f = f_new;
                    steps.1 *= 1.5;
                    break;
                }
                steps.1 *= 0.5;
                if steps.1 < 1e-30 {
                    break;
                }
            }
        }
        if (f_start - f).abs() <= cfg.grad_tol * f.abs().max(1.0) {
            quiet += 1;
            if quiet >= 5 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    InnerStats { iterations: it }
}

fn residual_norm(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn prune(s: &mut State) {
    let mut changed = false;
    for w in s.weights.iter_mut() {
        if *w > 0.0 && *w < PRUNE_WEIGHT {
            *w = 0.0;
            changed = true;
        }
    }
    if changed {
        let t: f64 = s.weights.iter().sum();
        s.weights.iter_mut().for_each(|w| *w /= t);
    }
}

/// Minimum-norm Gauss–Newton on the moment equations (plus Σw = 1) over
/// weights and tangent point displacements. Atoms keep positive weight;
/// returns the final residual norm.
fn feasibility_polish(p: &Problem, s: &mut State, target: f64, max_iters: usize) -> f64 {
    s.compact();
    let l = p.basis.rank();
    let d = s.dim;
    let n = d - 1;
    let mut r = p.residual(s);
    let mut rn = residual_norm(&r);
    for _ in 0..max_iters {
        if rn < target {
            break;
        }
        let k = s.len();
        let cols = k + k * n;
        let mut jac = DMatrix::<f64>::zeros(l + 1, cols);
        let mut rhs = DVector::<f64>::zeros(l + 1);
        let mut vals = vec![0.0; l];
        let mut grads = vec![0.0; l * d];
        let mut frames = Vec::with_capacity(k);
        for i in 0..k {
            let x = s.point(i).to_vec();
            p.basis.eval_with_gradient(&x, &mut vals, &mut grads);
            let frame = tangent_frame(&SpherePoint::new_unchecked(x));
            for kk in 0..l {
                jac[(kk, i)] = vals[kk];
                for (t, tv) in frame.iter().enumerate() {
                    let dirder: f64 = (0..d).map(|j| grads[kk * d + j] * tv[j]).sum();
                    jac[(kk, k + i * n + t)] = s.weights[i] * dirder;
                }
            }
            jac[(l, i)] = 1.0;
            frames.push(frame);
        }
        for kk in 0..l {
            rhs[kk] = -r[kk];
        }
        rhs[l] = 1.0 - s.weights.iter().sum::<f64>();
        let jjt = &jac * jac.transpose();
        let lambda = 1e-14 * jjt.diagonal().max().max(1e-300);
        let mut reg = jjt.clone();
        for i in 0..=l {
            reg[(i, i)] += lambda;
        }
        let Some(chol) = reg.cholesky() else { break };
        let y = chol.solve(&rhs);
        let step = jac.transpose() * y;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut cand = s.clone();
            let mut ok = true;
            for i in 0..k {
                let w = s.weights[i] + t * step[i];
                if w <= 0.0 {
                    ok = false;
                    break;
                }
                cand.weights[i] = w;
                let x = &mut cand.points[i * d..(i + 1) * d];
                for (tt, tv) in frames[i].iter().enumerate() {
                    let a = t * step[k + i * n + tt];
                    for j in 0..d {
                        x[j] += a * tv[j];
                    }
                }
                let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter_mut().for_each(|v| *v /= nrm);
            }
            if ok {
                let sum: f64 = cand.weights.iter().sum();
                cand.weights.iter_mut().for_each(|w| *w /= sum);
                let r_new = p.residual(&cand);
                let rn_new = residual_norm(&r_new);
                if rn_new < rn {
                    *s = cand;
                    r = r_new;
                    rn = rn_new;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    rn
}

#[derive(Debug, Clone)]
struct RestartOutcome {
    measure: DiscreteMeasure,
    energy: f64,
    residual: f64,
    iterations: usize,
}

fn finish(p: &Problem, mut s: State, cfg: &SolverConfig, iterations: usize) -> Result<RestartOutcome> {
    prune(&mut s);
    let mut rn = feasibility_polish(p, &mut s, 1e-14, 60);
    let mut measure = s.to_measure()?;
    // merge, then restore feasibility on the merged support
    for _ in 0..3 {
        let merged = match merge_close_points(&measure, cfg.merge_tol) {
            Ok(m) => m,
            Err(_) => break,
        };
        if merged.len() == measure.len() {
            break;
        }
        let mut st = State::from_measure(&merged);
        rn = feasibility_polish(p, &mut st, 1e-14, 60);
        measure = st.to_measure()?;
    }
    let (_, res) = moment_residual(&measure, p.basis)?;
    let _ = rn;
    Ok(RestartOutcome { energy: energy_of(measure.weights(), p.theta), residual: res, measure, iterations })
}

fn run_restart(p: &Problem, init: State, cfg: &SolverConfig) -> Result<RestartOutcome> {
    let mut s = init;
    let mut rho = cfg.penalty_init;
    let mut steps = (cfg.step_size, cfg.step_size);
    let mut iterations = 0;
    for _ in 0..cfg.max_outer_iters {
        let stats = inner_loop(p, &mut s, rho, cfg, &mut steps);
        iterations += stats.iterations;
        prune(&mut s);
        if residual_norm(&p.residual(&s)) < cfg.residual_tol {
            break;
        }
        rho *= cfg.penalty_growth;
        steps.0 /= cfg.penalty_growth;
        steps.1 /= cfg.penalty_growth;
    }
    finish(p, s, cfg, iterations)
}

/// Per-restart RNG stream derived from (seed, restart index).
fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn lex_cmp(a: &DiscreteMeasure, b: &DiscreteMeasure) -> std::cmp::Ordering {
    let fa = a.points().iter().flat_map(|p| p.coords());
    let fb = b.points().iter().flat_map(|p| p.coords());
    for (x, y) in fa.zip(fb) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

fn better(a: &RestartOutcome, b: &RestartOutcome, tol: f64) -> bool {
    let (fa, fb) = (a.residual < tol, b.residual < tol);
    if fa != fb {
        return fa;
    }
    if !fa {
        return a.residual < b.residual;
    }
    if (a.energy - b.energy).abs() > ENERGY_TIE {
        return a.energy < b.energy;
    }
    if a.measure.len() != b.measure.len() {
        return a.measure.len() < b.measure.len();
    }
    lex_cmp(&a.measure, &b.measure) == std::cmp::Ordering::Less
}

/// Upper bound on Θ(m, θ, n) by penalized projected gradient with restarts.
pub fn minimize_theta(n: Dimension, m: u32, theta: f64, cfg: &SolverConfig) -> Result<OptimizerReport> {
    let inits: Vec<State> = (0..cfg.restarts)
        .map(|r| State::random(n.get(), cfg.support_size, &mut restart_rng(cfg.seed, r)))
        .collect();
    solve_from_states(n, m, theta, cfg, inits)
}

/// Same as [`minimize_theta`] but starting from the given measures, one
/// restart each.
pub fn minimize_theta_from(
    n: Dimension,
    m: u32,
    theta: f64,
    cfg: &SolverConfig,
    starts: &[DiscreteMeasure],
) -> Result<OptimizerReport> {
    if let Some(bad) = starts.iter().find(|s| s.dimension() != n) {
        return Err(Error::DimensionMismatch { expected: n.ambient(), got: bad.dimension().ambient() });
    }
    let inits = starts.iter().map(State::from_measure).collect();
    solve_from_states(n, m, theta, cfg, inits)
}

fn solve_from_states(n: Dimension, m: u32, theta: f64, cfg: &SolverConfig, inits: Vec<State>) -> Result<OptimizerReport> {
    check_theta(theta)?;
    cfg.validate()?;
    if inits.is_empty() {
        return Err(Error::Domain("no starting points".into()));
    }
    let basis = MomentBasis::build(n, m)?;
    let problem = Problem { basis: &basis, theta };
    let outcomes: Vec<Result<RestartOutcome>> =
        inits.into_par_iter().map(|init| run_restart(&problem, init, cfg)).collect();
    let mut best: Option<(usize, RestartOutcome)> = None;
    let mut iterations = 0;
    let mut converged_count = 0;
    for (idx, out) in outcomes.into_iter().enumerate() {
        let Ok(out) = out else { continue };
        iterations += out.iterations;
        if out.residual < cfg.residual_tol {
            converged_count += 1;
        }
        if best.as_ref().is_none_or(|(_, b)| better(&out, b, cfg.residual_tol)) {
            best = Some((idx, out));
        }
    }
    let (best_restart, best) = best.ok_or_else(|| Error::Domain("every restart failed".into()))?;
    let closed_form = closed_form_theta(m, theta, n)?;
    Ok(OptimizerReport {
        n: n.get(),
        m,
        theta,
        energy: best.energy,
        residual_norm: best.residual,
        gap: closed_form.map(|c| best.energy - c),
        closed_form,
        conjectural: closed_form.is_none(),
        iterations,
        converged: best.residual < cfg.residual_tol,
        restarts_converged: converged_count,
        best_restart,
        best_measure: best.measure,
    })
}

/// Drives a random (or given) measure onto M_m^c without regard to energy.
/// Used to sample feasible measures.
pub fn feasibility_solve(start: &DiscreteMeasure, basis: &MomentBasis, tol: f64) -> Result<Option<DiscreteMeasure>> {
    let problem = Problem { basis, theta: 0.5 };
    let mut s = State::from_measure(start);
    let rn = feasibility_polish(&problem, &mut s, tol * 1e-3, 200);
    if rn >= tol {
        return Ok(None);
    }
    let m = s.to_measure()?;
    let (_, res) = moment_residual(&m, basis)?;
    Ok((res < tol).then_some(m))
}

/// Random measure with `k` atoms (uniform points, flat-Dirichlet weights).
pub fn random_measure(n: Dimension, k: usize, seed: u64) -> Result<DiscreteMeasure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    State::random(n.get(), k, &mut rng).to_measure()
}

/// A random measure in M_2^c: a Dirichlet mixture of randomly rotated
/// simplices and cross-polytopes (both carry uniform measures in M_2^c),
/// jittered and then polished back onto the constraint set. Gives generic
/// feasible measures without hunting for feasible points from scratch.
/// `None` if no attempt polishes below `tol`.
pub fn random_feasible_m2(n: Dimension, seed: u64, tol: f64) -> Result<Option<DiscreteMeasure>> {
    let basis = MomentBasis::build(n, 2)?;
    let d = n.ambient();
    for attempt in 0..10 {
        let mut rng = restart_rng(seed, attempt);
        let parts = rng.random_range(1..=3usize);
        let mix: Vec<f64> = {
            let raw: Vec<f64> = (0..parts).map(|_| Exp1.sample(&mut rng)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        };
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for &share in &mix {
            let kind = if rng.random_bool(0.5) { ConfigurationKind::Simplex } else { ConfigurationKind::CrossPolytope };
            let q = random_orthogonal_with(d, &mut rng);
            let pts = make_configuration(&kind, n, None)?;
            let k = pts.len() as f64;
            for pt in pts {
                let jitter: Vec<f64> = pt
                    .rotated(&q)
                    .coords()
                    .iter()
                    .map(|v| v + 0.1 * Distribution::<f64>::sample(&StandardNormal, &mut rng))
                    .collect();
                points.push(SpherePoint::from_vec(jitter)?);
                weights.push(share / k * (1.0 + 0.2 * (rng.random::<f64>() - 0.5)));
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let start = DiscreteMeasure::new(points, weights)?;
        if let Some(m) = feasibility_solve(&start, &basis, tol)? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn closed_forms() {
        assert_relative_eq!(closed_form_theta(1, 0.5, dim(4)).unwrap().unwrap(), 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(closed_form_theta(3, 0.5, dim(2)).unwrap().unwrap(), 6f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(closed_form_theta(5, 0.5, dim(1)).unwrap().unwrap(), 6f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(closed_form_theta(2, 0.25, dim(3)).unwrap().unwrap(), 5f64.powf(0.75), max_relative = 1e-15);
        assert_eq!(closed_form_theta(4, 0.5, dim(2)).unwrap(), None);
        assert!(closed_form_theta(1, 1.2, dim(2)).is_err());
    }

    #[test]
    fn polygon_inequality() {
        assert!(weight_feasibility_m1(&WeightVector::new(vec![0.5, 0.5]).unwrap()));
        assert!(!weight_feasibility_m1(&WeightVector::new(vec![0.6, 0.3, 0.1]).unwrap()));
        assert!(weight_feasibility_m1(&WeightVector::new(vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap()));
        assert!(WeightVector::new(vec![0.6, 0.6]).is_err());
    }

    // Independent check of the polygon criterion: scan angle grids on S^1
    // for the smallest achievable |Σ α_i e^{iφ_i}|.
    #[test]
    fn polygon_criterion_agrees_with_angle_scan() {
        let scan = |w: &[f64]| {
            let steps = 360;
            let mut best = f64::INFINITY;
            for a in 0..steps {
                for b in 0..steps {
                    let (t1, t2) = (
                        std::f64::consts::TAU * a as f64 / steps as f64,
                        std::f64::consts::TAU * b as f64 / steps as f64,
                    );
                    let x = w[0] + w[1] * t1.cos() + w[2] * t2.cos();
                    let y = w[1] * t1.sin() + w[2] * t2.sin();
                    best = best.min((x * x + y * y).sqrt());
                }
            }
            best
        };
        assert!(scan(&[0.6, 0.3, 0.1]) > 0.19);
        assert!(scan(&[0.4, 0.35, 0.25]) < 0.02);
        assert!(weight_feasibility_m1(&WeightVector::new(vec![0.4, 0.35, 0.25]).unwrap()));
    }

    #[test]
    fn bruteforce_values() {
        for theta in [0.3, 0.5, 0.9] {
            let b = bruteforce_theta_m1(theta, 3, 100).unwrap();
            assert_relative_eq!(b, 2f64.powf(1.0 - theta), max_relative = 1e-14);
        }
        let b = bruteforce_theta_m1(0.9, 4, 60).unwrap();
        assert_relative_eq!(b, 1.071_773_462_536_293, max_relative = 1e-12);
        // with exactly two atoms only (½, ½) passes
        assert_relative_eq!(bruteforce_theta_m1(0.37, 2, 8).unwrap(), 2f64.powf(0.63), max_relative = 1e-14);
        assert!(bruteforce_theta_m1(0.5, 6, 10).is_err());
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        for x in &p {
            assert_relative_eq!(*x, 1.0 / 3.0, max_relative = 1e-15);
        }
        assert_eq!(project_simplex(&[2.0, 0.0, -1.0]), vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.2, 0.3, 0.1]);
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::default();
        assert!(c.validate().is_ok());
        c.penalty_growth = 1.0;
        assert!(c.validate().is_err());
        let c = SolverConfig { residual_tol: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
