//! COBYLA, SPSA and analytic-gradient descent behind one `minimize` call.
//!
//! Every optimizer records the objective at its incumbent weights once per
//! iteration. Evaluation counts are in objective-equivalents: a gradient
//! costs [`Objective::gradient_cost`] evaluations.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::usage;
use crate::math;
use crate::{Error, Result};

/// A deterministic scalar function of `dim()` weights.
pub trait Objective {
    fn dim(&self) -> usize;

    fn eval(&self, w: &[f64]) -> Result<f64>;

    fn gradient(&self, _w: &[f64]) -> Result<Vec<f64>> {
        Err(Error::UnsupportedModel(
            "objective has no analytic gradient".into(),
        ))
    }

    /// Cost of one `gradient` call in objective evaluations.
    fn gradient_cost(&self) -> usize {
        2 * self.dim()
    }
}

/// Adapts closures to [`Objective`].
pub struct FnObjective<F, G = fn(&[f64]) -> Vec<f64>> {
    dim: usize,
    f: F,
    grad: Option<G>,
}

impl<F: Fn(&[f64]) -> f64> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f, grad: None }
    }
}

impl<F: Fn(&[f64]) -> f64, G: Fn(&[f64]) -> Vec<f64>> FnObjective<F, G> {
    pub fn with_gradient(dim: usize, f: F, grad: G) -> Self {
        Self {
            dim,
            f,
            grad: Some(grad),
        }
    }
}

impl<F: Fn(&[f64]) -> f64, G: Fn(&[f64]) -> Vec<f64>> Objective for FnObjective<F, G> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, w: &[f64]) -> Result<f64> {
        Ok((self.f)(w))
    }

    fn gradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        match &self.grad {
            Some(g) => Ok(g(w)),
            None => Err(Error::UnsupportedModel(
                "objective has no analytic gradient".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Cobyla,
    Spsa,
    Aqgd,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 3] = [OptimizerKind::Cobyla, OptimizerKind::Spsa, OptimizerKind::Aqgd];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Cobyla => "cobyla",
            OptimizerKind::Spsa => "spsa",
            OptimizerKind::Aqgd => "aqgd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Trust radius schedule for COBYLA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CobylaParams {
    pub rho_begin: f64,
    pub rho_end: f64,
}

impl Default for CobylaParams {
    fn default() -> Self {
        Self {
            rho_begin: 1.0,
            rho_end: 1e-4,
        }
    }
}

/// Gain sequences `a_k = a / (k + 1 + A)^alpha`, `c_k = c / (k + 1)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpsaParams {
    pub a: f64,
    pub big_a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for SpsaParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            big_a: 10.0,
            c: 0.1,
            alpha: 0.602,
            gamma: 0.101,
        }
    }
}

/// Gradient descent step `v ← μ v + ∇f`, `w ← w - η v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AqgdParams {
    pub learning_rate: f64,
    pub momentum: f64,
}

impl Default for AqgdParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.3,
            momentum: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub max_iters: usize,
    pub seed: u64,
    pub cobyla: CobylaParams,
    pub spsa: SpsaParams,
    pub aqgd: AqgdParams,
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind) -> Self {
        Self {
            kind,
            max_iters: 100,
            seed: 0,
            cobyla: CobylaParams::default(),
            spsa: SpsaParams::default(),
            aqgd: AqgdParams::default(),
        }
    }

    pub fn max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    /// Objective at `w0`.
    pub initial_loss: f64,
    /// Objective at the incumbent after each iteration.
    pub losses: Vec<f64>,
    pub final_weights: Vec<f64>,
    pub evaluations: usize,
}

impl TrainTrace {
    pub fn iterations(&self) -> usize {
        self.losses.len()
    }

    pub fn final_loss(&self) -> f64 {
        self.losses.last().copied().unwrap_or(self.initial_loss)
    }
}

/// Seeded uniform draw on `[-π, π]` for each weight.
pub fn initial_weights(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m).map(|_| rng.random_range(-PI..=PI)).collect()
}

/// Counts evaluations and turns non-finite values into errors.
struct Counted<'a, O: ?Sized> {
    objective: &'a O,
    evaluations: usize,
}

impl<O: Objective + ?Sized> Counted<'_, O> {
    fn eval(&mut self, w: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let value = self.objective.eval(w)?;
        if !value.is_finite() {
            return Err(Error::NonFinite {
                value,
                weights: w.to_vec(),
            });
        }
        Ok(value)
    }

    fn gradient(&mut self, w: &[f64]) -> Result<Vec<f64>> {
        self.evaluations += self.objective.gradient_cost();
        let g = self.objective.gradient(w)?;
        if let Some(&bad) = g.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                value: bad,
                weights: w.to_vec(),
            });
        }
        Ok(g)
    }
}

pub fn minimize<O: Objective + ?Sized>(
    objective: &O,
    w0: &[f64],
    config: &OptimizerConfig,
) -> Result<TrainTrace> {
    if w0.len() != objective.dim() {
        return Err(usage!(
            "initial weights have length {}, objective takes {}",
            w0.len(),
            objective.dim()
        ));
    }
    if config.max_iters == 0 {
        return Err(usage!("max_iters must be at least 1"));
    }
    let mut counted = Counted {
        objective,
        evaluations: 0,
    };
    let (initial_loss, losses, final_weights) = match config.kind {
        OptimizerKind::Aqgd => aqgd(&mut counted, w0, config.max_iters, config.aqgd)?,
        OptimizerKind::Spsa => spsa(&mut counted, w0, config.max_iters, config.spsa, config.seed)?,
        OptimizerKind::Cobyla => cobyla(&mut counted, w0, config.max_iters, config.cobyla)?,
    };
    Ok(TrainTrace {
        initial_loss,
        losses,
        final_weights,
        evaluations: counted.evaluations,
    })
}

type Run = (f64, Vec<f64>, Vec<f64>);

fn aqgd<O: Objective + ?Sized>(
    obj: &mut Counted<'_, O>,
    w0: &[f64],
    max_iters: usize,
    p: AqgdParams,
) -> Result<Run> {
    let mut w = w0.to_vec();
    let initial = obj.eval(&w)?;
    let mut velocity = vec![0.0; w.len()];
    let mut losses = Vec::with_capacity(max_iters);
    for _ in 0..max_iters {
        let g = obj.gradient(&w)?;
        for ((wi, vi), gi) in w.iter_mut().zip(&mut velocity).zip(&g) {
            *vi = p.momentum * *vi + gi;
            *wi -= p.learning_rate * *vi;
        }
        losses.push(obj.eval(&w)?);
    }
    Ok((initial, losses, w))
}

fn spsa<O: Objective + ?Sized>(
    obj: &mut Counted<'_, O>,
    w0: &[f64],
    max_iters: usize,
    p: SpsaParams,
    seed: u64,
) -> Result<Run> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = w0.to_vec();
    let initial = obj.eval(&w)?;
    let mut losses = Vec::with_capacity(max_iters);
    let mut plus = vec![0.0; w.len()];
    let mut minus = vec![0.0; w.len()];
    for k in 0..max_iters {
        let kf = k as f64;
        let ak = p.a / math::powf(kf + 1.0 + p.big_a, p.alpha);
        let ck = p.c / math::powf(kf + 1.0, p.gamma);
        let delta: Vec<f64> = (0..w.len())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        for i in 0..w.len() {
            plus[i] = w[i] + ck * delta[i];
            minus[i] = w[i] - ck * delta[i];
        }
        let diff = (obj.eval(&plus)? - obj.eval(&minus)?) / (2.0 * ck);
        // Rademacher components are ±1, so 1/Δ_i = Δ_i
        for (wi, di) in w.iter_mut().zip(&delta) {
            *wi -= ak * diff * di;
        }
        losses.push(obj.eval(&w)?);
    }
    Ok((initial, losses, w))
}

/// Inverse of a small dense matrix by Gauss-Jordan elimination with partial
/// pivoting. `None` when a pivot falls below `1e-14` times the matrix scale.
fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for row in 0..n {
            if row != col {
                let factor = a[row][col];
                if factor != 0.0 {
                    for j in 0..n {
                        a[row][j] -= factor * a[col][j];
                        inv[row][j] -= factor * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// Powell's COBYLA without constraints: a simplex of `n + 1` points defines
/// a linear model of the objective, and each iteration either steps to the
/// trust-region boundary along the model's descent direction or repairs the
/// simplex geometry. The radius `rho` only shrinks, from `rho_begin` down to
/// `rho_end`, once steps at the current radius stop paying off.
fn cobyla<O: Objective + ?Sized>(
    obj: &mut Counted<'_, O>,
    w0: &[f64],
    max_iters: usize,
    p: CobylaParams,
) -> Result<Run> {
    const ALPHA: f64 = 0.25; // minimum vertex distance from the opposite face, in units of rho
    const BETA: f64 = 2.1; // maximum edge length, in units of rho
    const ACCEPT: f64 = 0.1; // actual/predicted reduction below which rho shrinks

    let n = w0.len();
    if n == 0 {
        return Err(usage!("COBYLA needs at least one variable"));
    }
    if !(p.rho_begin >= p.rho_end && p.rho_end > 0.0) {
        return Err(usage!(
            "COBYLA needs rho_begin >= rho_end > 0, got {} and {}",
            p.rho_begin,
            p.rho_end
        ));
    }

    let mut rho = p.rho_begin;
    let initial = obj.eval(w0)?;
    let mut points = vec![w0.to_vec()];
    let mut values = vec![initial];
    for i in 0..n {
        let mut x = w0.to_vec();
        x[i] += rho;
        values.push(obj.eval(&x)?);
        points.push(x);
    }

    let mut losses = Vec::with_capacity(max_iters);
    let best_value = |values: &[f64]| values.iter().copied().fold(f64::INFINITY, f64::min);

    while losses.len() < max_iters {
        // best vertex first; ties keep the earlier one
        let best = (0..=n).fold(0, |b, i| if values[i] < values[b] { i } else { b });
        points.swap(0, best);
        values.swap(0, best);
        let x0 = points[0].clone();
        let f0 = values[0];

        let edges: Vec<Vec<f64>> = points[1..]
            .iter()
            .map(|p| p.iter().zip(&x0).map(|(a, b)| a - b).collect())
            .collect();
        let Some(inv) = invert(edges.clone()) else {
            // degenerate simplex: rebuild it around the incumbent
            for i in 0..n {
                let mut x = x0.clone();
                x[i] += rho;
                values[i + 1] = obj.eval(&x)?;
                points[i + 1] = x;
            }
            losses.push(best_value(&values));
            continue;
        };
        // column i of the inverse is orthogonal to every edge but edge i
        let normals: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|r| inv[r][i]).collect()).collect();
        let df: Vec<f64> = values[1..].iter().map(|v| v - f0).collect();
        let grad: Vec<f64> = (0..n).map(|r| dot(&inv[r], &df)).collect();

        let lengths: Vec<f64> = edges.iter().map(|e| norm(e)).collect();
        let face_dist: Vec<f64> = normals.iter().map(|c| 1.0 / norm(c)).collect();
        let too_long = (0..n)
            .filter(|&i| lengths[i] > BETA * rho)
            .max_by(|&i, &j| lengths[i].total_cmp(&lengths[j]));
        let too_flat = (0..n)
            .filter(|&i| face_dist[i] < ALPHA * rho)
            .min_by(|&i, &j| face_dist[i].total_cmp(&face_dist[j]));

        if let Some(j) = too_long.or(too_flat) {
            // geometry step: move vertex j to distance rho from x0 along the
            // face normal, on the side the model predicts to be downhill
            let c = &normals[j];
            let cn = norm(c);
            let sign = if dot(&grad, c) > 0.0 { -1.0 } else { 1.0 };
            let x: Vec<f64> = x0.iter().zip(c).map(|(a, ci)| a + sign * rho * ci / cn).collect();
            values[j + 1] = obj.eval(&x)?;
            points[j + 1] = x;
            losses.push(best_value(&values));
            continue;
        }

        let gnorm = norm(&grad);
        if gnorm == 0.0 {
            if rho <= p.rho_end {
                break;
            }
            rho = shrink(rho, p.rho_end);
            continue;
        }
        let step: Vec<f64> = grad.iter().map(|g| -rho * g / gnorm).collect();
        let x: Vec<f64> = x0.iter().zip(&step).map(|(a, s)| a + s).collect();
        let f = obj.eval(&x)?;
        let predicted = rho * gnorm;
        let ratio = (f0 - f) / predicted;

        // replacing vertex j by x scales the simplex volume by |step · c_j|
        let (j, score) = (0..n)
            .map(|i| {
                let weight = (lengths[i] / rho).max(1.0);
                (i, dot(&step, &normals[i]).abs() * weight)
            })
            .fold((0, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
        if f < f0 || score > 1.0 {
            values[j + 1] = f;
            points[j + 1] = x;
        }
        losses.push(best_value(&values));

        if ratio < ACCEPT {
            if rho <= p.rho_end {
                break;
            }
            rho = shrink(rho, p.rho_end);
        }
    }

    let best = (0..=n).fold(0, |b, i| if values[i] < values[b] { i } else { b });
    Ok((initial, losses, points.swap_remove(best)))
}

fn shrink(rho: f64, rho_end: f64) -> f64 {
    let next = rho / 2.0;
    if next <= 1.5 * rho_end {
        rho_end
    } else {
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shifted_square(target: f64) -> FnObjective<impl Fn(&[f64]) -> f64> {
        FnObjective::new(1, move |w: &[f64]| (w[0] - target) * (w[0] - target))
    }

    #[test]
    fn cobyla_scalar_quadratic() {
        let obj = shifted_square(2.0);
        let t = minimize(&obj, &[0.0], &OptimizerConfig::new(OptimizerKind::Cobyla)).unwrap();
        assert!((t.final_weights[0] - 2.0).abs() < 1e-3, "{:?}", t.final_weights);
        assert!(t.iterations() <= 100);
        assert!(t.final_loss() <= t.initial_loss);
    }

    #[test]
    fn cobyla_rosenbrock_progresses() {
        let obj = FnObjective::new(2, |w: &[f64]| {
            (1.0 - w[0]).powi(2) + 10.0 * (w[1] - w[0] * w[0]).powi(2)
        });
        let cfg = OptimizerConfig::new(OptimizerKind::Cobyla).max_iters(2000);
        let t = minimize(&obj, &[-1.0, 1.0], &cfg).unwrap();
        assert!(t.final_loss() < 1e-3, "{}", t.final_loss());
    }

    #[test]
    fn cobyla_losses_never_increase() {
        let obj = FnObjective::new(3, |w: &[f64]| {
            w.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 0.5).powi(2)).sum()
        });
        let t = minimize(&obj, &[0.0; 3], &OptimizerConfig::new(OptimizerKind::Cobyla)).unwrap();
        for pair in t.losses.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
        assert!(t.final_loss() < 1e-4);
    }

    #[test]
    fn aqgd_sum_of_squares() {
        let obj = FnObjective::with_gradient(
            4,
            |w: &[f64]| w.iter().map(|v| v * v).sum(),
            |w: &[f64]| w.iter().map(|v| 2.0 * v).collect(),
        );
        let t = minimize(&obj, &[1.0; 4], &OptimizerConfig::new(OptimizerKind::Aqgd)).unwrap();
        assert!(t.final_loss() < 1e-6);
        assert_eq!(t.iterations(), 100);
        assert_eq!(t.evaluations, 1 + 100 * (2 * 4 + 1));
        for pair in t.losses.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
    }

    #[test]
    fn aqgd_momentum_still_converges() {
        let obj = FnObjective::with_gradient(
            2,
            |w: &[f64]| w.iter().map(|v| v * v).sum(),
            |w: &[f64]| w.iter().map(|v| 2.0 * v).collect(),
        );
        let mut cfg = OptimizerConfig::new(OptimizerKind::Aqgd);
        cfg.aqgd.momentum = 0.25;
        let t = minimize(&obj, &[1.0, -2.0], &cfg).unwrap();
        assert!(t.final_loss() < 1e-6);
    }

    #[test]
    fn aqgd_requires_gradient() {
        let obj = shifted_square(1.0);
        assert!(matches!(
            minimize(&obj, &[0.0], &OptimizerConfig::new(OptimizerKind::Aqgd)),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn spsa_scalar_quadratic() {
        let obj = shifted_square(1.0);
        let cfg = OptimizerConfig::new(OptimizerKind::Spsa).seed(7);
        let t = minimize(&obj, &[0.0], &cfg).unwrap();
        assert!(t.final_loss() < 1e-2, "{}", t.final_loss());
        assert_eq!(t.evaluations, 1 + 3 * 100);
    }

    #[test]
    fn spsa_is_seed_deterministic() {
        let obj = FnObjective::new(3, |w: &[f64]| w.iter().map(|v| (v - 1.0).powi(2)).sum());
        let cfg = OptimizerConfig::new(OptimizerKind::Spsa).seed(99);
        let a = minimize(&obj, &[0.0; 3], &cfg).unwrap();
        let b = minimize(&obj, &[0.0; 3], &cfg).unwrap();
        assert_eq!(a, b);
        let c = minimize(&obj, &[0.0; 3], &cfg.seed(100)).unwrap();
        assert_ne!(a.losses, c.losses);
    }

    #[test]
    fn non_finite_loss_aborts_with_weights() {
        let obj = FnObjective::new(1, |w: &[f64]| if w[0] > 0.5 { f64::NAN } else { 1.0 - w[0] });
        let err = minimize(&obj, &[0.0], &OptimizerConfig::new(OptimizerKind::Cobyla)).unwrap_err();
        match err {
            Error::NonFinite { value, weights } => {
                assert!(value.is_nan());
                assert!(weights[0] > 0.5);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn bad_arguments() {
        let obj = shifted_square(1.0);
        let cfg = OptimizerConfig::new(OptimizerKind::Spsa);
        assert!(minimize(&obj, &[0.0, 1.0], &cfg).is_err());
        assert!(minimize(&obj, &[0.0], &cfg.max_iters(0)).is_err());
    }

    #[test]
    fn initial_weights_are_seeded_and_bounded() {
        let a = initial_weights(8, 5);
        assert_eq!(a, initial_weights(8, 5));
        assert!(a.iter().all(|w| (-PI..=PI).contains(w)));
    }

    #[test]
    fn invert_small_matrix() {
        let inv = invert(vec![vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let expected = [[0.6, -0.2], [-0.2, 0.4]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
        assert!(invert(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).is_none());
    }

    #[test]
    fn optimizer_names() {
        for k in OptimizerKind::ALL {
            assert_eq!(OptimizerKind::parse(k.name()), Some(k));
        }
    }
}
