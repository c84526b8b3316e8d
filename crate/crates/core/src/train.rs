//! Losses, optimizers and the training loop.
//!
//! Training points are Hermite-root collocation nodes. The network output is
//! wrapped in the problem's trial solution `h₁ + h₂·N`, then scored either
//! against the analytic wave function (supervised) or by the mean squared
//! Schrödinger residual.

use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::collocation::CollocationGrid;
use crate::error::{Error, Result};
use crate::network::{backward_from_output, forward, Gradients, NetworkParams};
use crate::problems::{fd_margin, schrodinger_residual, LaplacianMode, Problem, WaveModel, FD_STEP, FD_WEIGHTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    Sgd,
    Adam,
}

impl Optimizer {
    pub fn default_learning_rate(self) -> f64 {
        match self {
            Optimizer::Sgd => 1e-3,
            Optimizer::Adam => 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Batch {
    Full,
    /// Draw this many distinct points per iteration.
    Stochastic(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossMode {
    /// Mean squared error against the analytic wave function.
    Supervised,
    /// Mean squared Schrödinger residual.
    Residual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub adam: AdamParams,
    pub batch: Batch,
    pub loss_mode: LossMode,
    pub seed: u64,
    /// Stop once `‖w_new − w‖₂` drops below this; `0` disables the check.
    pub stop_tol: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            learning_rate: Optimizer::Adam.default_learning_rate(),
            optimizer: Optimizer::Adam,
            adam: AdamParams::default(),
            batch: Batch::Full,
            loss_mode: LossMode::Supervised,
            seed: 42,
            stop_tol: 0.0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self, n_points: usize) -> Result<()> {
        let a = &self.adam;
        if !(a.beta1 > 0.0 && a.beta1 < 1.0 && a.beta2 > 0.0 && a.beta2 < 1.0) {
            return Err(Error::config("Adam betas must lie strictly between 0 and 1"));
        }
        if !(a.epsilon > 0.0) {
            return Err(Error::config("Adam epsilon must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning rate must be positive"));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::config("stop tolerance must be non-negative"));
        }
        if let Batch::Stochastic(k) = self.batch {
            if k == 0 || k > n_points {
                return Err(Error::config(format!("batch size {k} not in 1..={n_points}")));
            }
        }
        Ok(())
    }
}

/// Result of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    /// Loss at the start of each iteration, before its update.
    pub loss_history: Vec<f64>,
    pub final_params: NetworkParams,
    pub wall_time: f64,
    pub seed: u64,
}

impl TrainingTrace {
    pub fn final_loss(&self) -> Option<f64> {
        self.loss_history.last().copied()
    }
}

/// `Σ (pᵢ − aᵢ)² / N`.
pub fn mse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::config(format!(
            "length mismatch: {} predictions vs {} targets",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::config("mse of an empty grid"));
    }
    let sum: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok(sum / predicted.len() as f64)
}

/// Mean of the squared Schrödinger residual over `points` (finite-difference Laplacian).
pub fn residual_loss<M: WaveModel + ?Sized>(model: &M, problem: &Problem, points: &[(f64, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::config("residual loss over no points"));
    }
    let mut sum = 0.0;
    for &(x, y) in points {
        let r = schrodinger_residual(model, problem, x, y, LaplacianMode::FiniteDifference)?;
        sum += r * r;
    }
    Ok(sum / points.len() as f64)
}

/// `w ← w − λ g`.
pub fn sgd_step(w: &mut [f64], g: &[f64], learning_rate: f64) {
    debug_assert_eq!(w.len(), g.len());
    for (wi, gi) in w.iter_mut().zip(g) {
        *wi -= learning_rate * gi;
    }
}

/// First and second moment estimates plus step count.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(state: &mut AdamState, w: &mut [f64], g: &[f64], learning_rate: f64, params: AdamParams) {
    debug_assert!(state.m.len() == w.len() && state.v.len() == w.len() && g.len() == w.len());
    let AdamParams { beta1, beta2, epsilon } = params;
    let step = (state.t + 1) as i32;
    let c1 = 1.0 - beta1.powi(step);
    let c2 = 1.0 - beta2.powi(step);
    for i in 0..w.len() {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g[i] * g[i];
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        w[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
    }
    state.t += 1;
}

/// A differentiable training loss over a fixed point set.
pub trait Objective {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mean loss over `indices` and its gradient.
    fn loss_and_gradient(&self, params: &NetworkParams, indices: &[usize]) -> Result<(f64, Gradients)>;
}

/// Squared error between `h₁ + h₂·N` and fixed targets.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedObjective {
    pub points: Vec<(f64, f64)>,
    pub targets: Vec<f64>,
    pub envelopes: Vec<f64>,
    pub offsets: Vec<f64>,
}

impl SupervisedObjective {
    /// Bare network output against `targets`.
    pub fn new(points: Vec<(f64, f64)>, targets: Vec<f64>) -> Result<Self> {
        if points.len() != targets.len() {
            return Err(Error::config("points and targets differ in length"));
        }
        let n = points.len();
        Ok(Self { points, targets, envelopes: vec![1.0; n], offsets: vec![0.0; n] })
    }

    /// Trial solution against the problem's analytic wave function.
    pub fn for_problem(problem: &Problem, points: Vec<(f64, f64)>) -> Self {
        let targets = points.iter().map(|&(x, y)| problem.analytic_psi(x, y)).collect();
        let envelopes = points.iter().map(|&(x, y)| problem.envelope(x, y)).collect();
        let offsets = points.iter().map(|&(x, y)| problem.offset(x, y)).collect();
        Self { points, targets, envelopes, offsets }
    }
}

impl Objective for SupervisedObjective {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn loss_and_gradient(&self, params: &NetworkParams, indices: &[usize]) -> Result<(f64, Gradients)> {
        let n = indices.len() as f64;
        let mut loss = 0.0;
        let mut grads = Gradients::zeros_like(params);
        for &i in indices {
            let (x, y) = self.points[i];
            let trace = forward(params, x, y)?;
            let h2 = self.envelopes[i];
            let err = self.targets[i] - (self.offsets[i] + h2 * trace.output);
            loss += err * err;
            let g = backward_from_output(params, &trace, -2.0 * h2 * err / n)?;
            grads.accumulate(&g, 1.0);
        }
        Ok((loss / n, grads))
    }
}

/// Network wrapped in the problem's trial solution.
#[derive(Debug, Clone, Copy)]
pub struct TrialNetwork<'a> {
    pub params: &'a NetworkParams,
    pub problem: &'a Problem,
}

impl WaveModel for TrialNetwork<'_> {
    fn value(&self, x: f64, y: f64) -> f64 {
        match forward(self.params, x, y) {
            Ok(t) => self.problem.offset(x, y) + self.problem.envelope(x, y) * t.output,
            Err(_) => f64::NAN,
        }
    }
}

/// Mean squared Schrödinger residual of the trial network. The gradient is
/// exact for the discretised loss: the residual is linear in the trial values
/// on the finite-difference stencil, so each stencil point back-propagates
/// its own weight.
#[derive(Debug, Clone)]
pub struct ResidualObjective<'a> {
    pub problem: &'a Problem,
    pub points: Vec<(f64, f64)>,
}

impl<'a> ResidualObjective<'a> {
    pub fn new(problem: &'a Problem, points: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !problem.domain.contains_with_margin(x, y, fd_margin())) {
            return Err(Error::config(format!("training point ({x}, {y}) is too close to the domain edge")));
        }
        Ok(Self { problem, points })
    }

    /// Stencil points and the residual's coefficient on each trial value.
    fn stencil(&self, x: f64, y: f64) -> Vec<((f64, f64), f64)> {
        let h = FD_STEP;
        let lap = -self.problem.kinetic_factor() / (12.0 * h * h);
        let mut out = Vec::with_capacity(9);
        let center = self.problem.potential(x, y) - self.problem.energy() + 2.0 * lap * FD_WEIGHTS[2].1;
        out.push(((x, y), center));
        for &(k, w) in FD_WEIGHTS.iter().filter(|(k, _)| *k != 0.0) {
            out.push(((x + k * h, y), lap * w));
            out.push(((x, y + k * h), lap * w));
        }
        out
    }
}

impl Objective for ResidualObjective<'_> {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn loss_and_gradient(&self, params: &NetworkParams, indices: &[usize]) -> Result<(f64, Gradients)> {
        let n = indices.len() as f64;
        let mut loss = 0.0;
        let mut grads = Gradients::zeros_like(params);
        for &i in indices {
            let (x, y) = self.points[i];
            let stencil = self.stencil(x, y);
            let mut traces = Vec::with_capacity(stencil.len());
            let mut residual = 0.0;
            for &((sx, sy), c) in &stencil {
                let t = forward(params, sx, sy)?;
                let g = self.problem.offset(sx, sy) + self.problem.envelope(sx, sy) * t.output;
                residual += c * g;
                traces.push(t);
            }
            loss += residual * residual;
            for (t, &((sx, sy), c)) in traces.iter().zip(&stencil) {
                let d_out = 2.0 * residual * c * self.problem.envelope(sx, sy) / n;
                grads.accumulate(&backward_from_output(params, t, d_out)?, 1.0);
            }
        }
        Ok((loss / n, grads))
    }
}

fn batch_indices(config: &TrainingConfig, n: usize, iteration: usize) -> Vec<usize> {
    match config.batch {
        Batch::Full => (0..n).collect(),
        Batch::Stochastic(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(iteration as u64);
            let mut idx = sample(&mut rng, n, k).into_vec();
            idx.sort_unstable();
            idx
        }
    }
}

/// Gradient-descent loop over any [`Objective`].
pub fn optimize<O: Objective + ?Sized>(
    objective: &O,
    mut params: NetworkParams,
    config: &TrainingConfig,
) -> Result<TrainingTrace> {
    config.validate(objective.len())?;
    if objective.is_empty() {
        return Err(Error::config("no training points"));
    }
    let start = Instant::now();
    let mut history = Vec::with_capacity(config.iterations);
    let mut adam = AdamState::new(params.num_params());
    let mut w = params.flatten();

    for it in 0..config.iterations {
        let indices = batch_indices(config, objective.len(), it);
        let (loss, grads) = objective.loss_and_gradient(&params, &indices).map_err(|e| {
            if e.is_numerical() {
                Error::NonFiniteLoss { iteration: it }
            } else {
                e
            }
        })?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { iteration: it });
        }
        history.push(loss);

        let g = grads.flatten();
        let before = w.clone();
        match config.optimizer {
            Optimizer::Sgd => sgd_step(&mut w, &g, config.learning_rate),
            Optimizer::Adam => adam_step(&mut adam, &mut w, &g, config.learning_rate, config.adam),
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLoss { iteration: it });
        }
        params.assign_flat(&w)?;

        if config.stop_tol > 0.0 {
            let step: f64 = w.iter().zip(&before).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if step < config.stop_tol {
                break;
            }
        }
    }

    Ok(TrainingTrace {
        loss_history: history,
        final_params: params,
        wall_time: start.elapsed().as_secs_f64(),
        seed: config.seed,
    })
}

/// Train on the tensor nodes of `grid` against `problem`.
pub fn train(
    problem: &Problem,
    params: NetworkParams,
    config: &TrainingConfig,
    grid: &CollocationGrid,
) -> Result<TrainingTrace> {
    let points = grid.nodes_2d.clone();
    if points.is_empty() {
        return Err(Error::config("training needs a 2D collocation grid"));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !problem.domain.contains(x, y)) {
        return Err(Error::config(format!("training point ({x}, {y}) lies outside the {} domain", problem.name())));
    }
    match config.loss_mode {
        LossMode::Supervised => optimize(&SupervisedObjective::for_problem(problem, points), params, config),
        LossMode::Residual => optimize(&ResidualObjective::new(problem, points)?, params, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collocation::problem_grid;
    use crate::network::{init_params, Activation};
    use crate::problems::{box_problem, oscillator_problem, trial_solution};
    use approx::assert_abs_diff_eq;

    #[test]
    fn mse_examples() {
        let a = [0.5, -1.0, 2.0];
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        let shifted: Vec<f64> = a.iter().map(|v| v + 1.0).collect();
        assert_eq!(mse(&shifted, &a).unwrap(), 1.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 3.0]).unwrap(), 5.0);
        assert!(matches!(mse(&[1.0], &[1.0, 2.0]), Err(Error::Config(_))));
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn sgd_examples() {
        let mut w = vec![1.0, 2.0];
        sgd_step(&mut w, &[0.0, 0.0], 0.3);
        assert_eq!(w, vec![1.0, 2.0]);
        let mut w = vec![1.0];
        sgd_step(&mut w, &[2.0], 0.1);
        assert_abs_diff_eq!(w[0], 0.8, epsilon = 1e-15);
        let mut w = vec![1.0, 2.0];
        sgd_step(&mut w, &[1.0, -1.0], 0.5);
        assert_eq!(w, vec![0.5, 2.5]);
    }

    #[test]
    fn adam_examples() {
        let p = AdamParams::default();
        let mut s = AdamState::new(1);
        let mut w = vec![3.0];
        adam_step(&mut s, &mut w, &[0.0], 0.001, p);
        assert_eq!(w[0], 3.0);

        let mut s = AdamState::new(1);
        let mut w = vec![0.0];
        adam_step(&mut s, &mut w, &[1.0], 0.001, p);
        assert_abs_diff_eq!(w[0], -0.001 / (1.0 + 1e-8), epsilon = 1e-15);
        adam_step(&mut s, &mut w, &[1.0], 0.001, p);
        assert_abs_diff_eq!(w[0], -0.002, epsilon = 1e-6);
        assert_eq!(s.t, 2);
    }

    #[test]
    fn adam_matches_scalar_hand_trace() {
        // Scalar recursion written out independently of the vector code.
        let (b1, b2, eps, lr) = (0.8, 0.95, 1e-6, 0.05);
        let grads = [0.3, -1.2, 0.7, 2.0];
        let (mut m, mut v, mut w) = (0.0f64, 0.0f64, 1.5f64);
        let mut state = AdamState::new(1);
        let mut wv = vec![1.5];
        for (t, &g) in grads.iter().enumerate() {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t as i32 + 1));
            let vh = v / (1.0 - b2.powi(t as i32 + 1));
            w -= lr * mh / (vh.sqrt() + eps);
            adam_step(&mut state, &mut wv, &[g], lr, AdamParams { beta1: b1, beta2: b2, epsilon: eps });
            assert_eq!(wv[0], w);
        }
    }

    #[test]
    fn residual_loss_examples() {
        let p = box_problem(1.0, 1, 1).unwrap();
        let pts = vec![(0.3, 0.4), (0.5, 0.5), (0.8, 0.15)];
        assert!(residual_loss(&p.analytic_model(), &p, &pts).unwrap() < 1e-5);
        let zero = |_: f64, _: f64| 0.0;
        assert_eq!(residual_loss(&zero, &p, &pts).unwrap(), 0.0);

        // A model scaled by 2 is still an eigenfunction.
        let doubled = |x: f64, y: f64| 2.0 * p.analytic_psi(x, y);
        assert!(residual_loss(&doubled, &p, &pts).unwrap() < 1e-4);
        // A constant has residual −E·c everywhere in the box.
        let one = |_: f64, _: f64| 1.0;
        assert_abs_diff_eq!(residual_loss(&one, &p, &pts).unwrap(), p.energy().powi(2), epsilon = 1e-6);
        assert!(residual_loss(&p.analytic_model(), &p, &[(1.5, 0.5)]).is_err());
    }

    #[test]
    fn supervised_objective_gradient_matches_finite_differences() {
        let problem = box_problem(1.0, 1, 1).unwrap();
        let pts = vec![(0.2, 0.3), (0.5, 0.7), (0.9, 0.1)];
        let obj = SupervisedObjective::for_problem(&problem, pts);
        check_objective_gradient(&obj, Activation::Hermite { max_degree: 5 }, 1e-6);
    }

    #[test]
    fn residual_objective_gradient_matches_finite_differences() {
        let problem = oscillator_problem(1.0, 1.0, 1.0, 1.0).unwrap();
        let obj = ResidualObjective::new(&problem, vec![(0.2, -0.3), (1.1, 0.4)]).unwrap();
        check_objective_gradient(&obj, Activation::Sigmoid, 1e-4);
    }

    fn check_objective_gradient<O: Objective>(obj: &O, activation: Activation, tol: f64) {
        let params = init_params(&[2, 4, 3, 1], activation, 17).unwrap();
        let idx: Vec<usize> = (0..obj.len()).collect();
        let (_, g) = obj.loss_and_gradient(&params, &idx).unwrap();
        let g = g.flatten();
        let base = params.flatten();
        let h = 1e-6;
        for k in 0..base.len() {
            let eval = |delta: f64| {
                let mut w = base.clone();
                w[k] += delta;
                let mut p = params.clone();
                p.assign_flat(&w).unwrap();
                obj.loss_and_gradient(&p, &idx).unwrap().0
            };
            let numeric = (eval(h) - eval(-h)) / (2.0 * h);
            let scale = g[k].abs().max(numeric.abs()).max(1e-3);
            assert!((g[k] - numeric).abs() / scale < tol, "param {k}: {} vs {numeric}", g[k]);
        }
    }

    #[test]
    fn residual_objective_loss_matches_residual_loss() {
        let problem = box_problem(1.0, 1, 1).unwrap();
        let params = init_params(&[2, 5, 1], Activation::Hermite { max_degree: 5 }, 3).unwrap();
        let pts = vec![(0.25, 0.5), (0.6, 0.6)];
        let obj = ResidualObjective::new(&problem, pts.clone()).unwrap();
        let (loss, _) = obj.loss_and_gradient(&params, &[0, 1]).unwrap();
        let model = TrialNetwork { params: &params, problem: &problem };
        assert_abs_diff_eq!(loss, residual_loss(&model, &problem, &pts).unwrap(), epsilon = 1e-9 * loss.max(1.0));
        let raw = |x: f64, y: f64| forward(&params, x, y).unwrap().output;
        assert_eq!(model.value(0.25, 0.5), trial_solution(&raw, &problem, 0.25, 0.5));
    }

    #[test]
    fn zero_iterations_leave_params_alone() {
        let problem = box_problem(1.0, 1, 1).unwrap();
        let grid = problem_grid(&problem, 4).unwrap();
        let params = init_params(&[2, 5, 1], Activation::Sigmoid, 1).unwrap();
        let config = TrainingConfig { iterations: 0, ..Default::default() };
        let trace = train(&problem, params.clone(), &config, &grid).unwrap();
        assert!(trace.loss_history.is_empty());
        assert_eq!(trace.final_params, params);
    }

    #[test]
    fn training_is_reproducible() {
        let problem = box_problem(1.0, 1, 1).unwrap();
        let grid = problem_grid(&problem, 5).unwrap();
        let config = TrainingConfig { iterations: 40, batch: Batch::Stochastic(10), seed: 5, ..Default::default() };
        let run = || {
            let p = init_params(&[2, 6, 6, 1], Activation::Hermite { max_degree: 5 }, 5).unwrap();
            train(&problem, p, &config, &grid).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.loss_history, b.loss_history);
        assert_eq!(a.final_params, b.final_params);
    }

    #[test]
    fn batch_draws_depend_only_on_seed_and_iteration() {
        let config = TrainingConfig { batch: Batch::Stochastic(7), seed: 9, ..Default::default() };
        assert_eq!(batch_indices(&config, 30, 4), batch_indices(&config, 30, 4));
        assert_ne!(batch_indices(&config, 30, 4), batch_indices(&config, 30, 5));
        let idx = batch_indices(&config, 30, 4);
        assert_eq!(idx.len(), 7);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn small_step_sgd_descends_monotonically() {
        let pts: Vec<(f64, f64)> =
            (0..6).flat_map(|i| (0..6).map(move |j| (i as f64 / 5.0 - 0.5, j as f64 / 5.0 - 0.5))).collect();
        let targets = pts.iter().map(|&(x, y)| x * x + 0.5 * y * y - 0.3 * x * y).collect();
        let obj = SupervisedObjective::new(pts, targets).unwrap();
        let params = init_params(&[2, 8, 1], Activation::Sigmoid, 21).unwrap();
        let config =
            TrainingConfig { iterations: 50, optimizer: Optimizer::Sgd, learning_rate: 1e-4, ..Default::default() };
        let trace = optimize(&obj, params, &config).unwrap();
        assert_eq!(trace.loss_history.len(), 50);
        assert!(trace.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn early_stop_truncates_history() {
        let problem = box_problem(1.0, 1, 1).unwrap();
        let grid = problem_grid(&problem, 3).unwrap();
        let params = init_params(&[2, 4, 1], Activation::Sigmoid, 2).unwrap();
        let config = TrainingConfig {
            iterations: 500,
            optimizer: Optimizer::Sgd,
            learning_rate: 1e-3,
            stop_tol: 1.0,
            ..Default::default()
        };
        let trace = train(&problem, params, &config, &grid).unwrap();
        assert_eq!(trace.loss_history.len(), 1);
    }

    #[test]
    fn config_validation() {
        let bad = TrainingConfig { adam: AdamParams { beta1: 1.0, ..Default::default() }, ..Default::default() };
        assert!(bad.validate(10).is_err());
        let bad = TrainingConfig { batch: Batch::Stochastic(11), ..Default::default() };
        assert!(bad.validate(10).is_err());
        assert!(TrainingConfig::default().validate(10).is_ok());
    }

    #[test]
    fn divergence_reports_iteration() {
        let problem = box_problem(1.0, 1, 1).unwrap();
        let grid = problem_grid(&problem, 3).unwrap();
        let params = init_params(&[2, 4, 1], Activation::Sigmoid, 2).unwrap();
        let config =
            TrainingConfig { iterations: 50, optimizer: Optimizer::Sgd, learning_rate: 1e300, ..Default::default() };
        match train(&problem, params, &config, &grid) {
            Err(Error::NonFiniteLoss { iteration }) => assert!(iteration > 0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn points_outside_domain_rejected() {
        let problem = oscillator_problem(1.0, 1.0, 1.0, 1.0).unwrap();
        // Largest root of H₄₀ is well beyond 5.
        let grid = crate::collocation::build_grid(39, crate::collocation::Dim::Two, vec![]).unwrap();
        let params = init_params(&[2, 3, 1], Activation::Sigmoid, 0).unwrap();
        assert!(matches!(
            train(&problem, params, &TrainingConfig { iterations: 1, ..Default::default() }, &grid),
            Err(Error::Config(_))
        ));
    }
}
