//! Proximal-gradient training for `(1/n) sum loss(y_i (w.x_i + b)) + lambda ||w||_1`.
//!
//! Each step is a soft-thresholded gradient step on `w` and a plain gradient step on
//! the unpenalized intercept. The step length comes from a Barzilai-Borwein curvature
//! estimate and is accepted against the largest objective of the last few iterates
//! (a non-monotone sufficient-decrease test), doubling the curvature until it passes.
//!
//! Iterations run on a working set of features with centered columns; centering only
//! moves the intercept, so the objective and its minimizer are unchanged.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Classifier, DesignMatrix, Loss, Strategy};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub max_iterations: usize,
    /// Stop once the KKT residual falls below this.
    pub kkt_tolerance: f64,
    /// Stop once consecutive objectives differ by less than this (relative).
    pub relative_tolerance: f64,
    /// Number of past objectives the acceptance test compares against; 1 is monotone.
    pub memory: usize,
    /// Sufficient-decrease constant of the acceptance test.
    pub sigma: f64,
    /// Keep every accepted `(objective, reference)` pair in the report.
    pub record_trace: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            max_iterations: 5000,
            kkt_tolerance: 1e-5,
            relative_tolerance: 1e-10,
            memory: 5,
            sigma: 1e-4,
            record_trace: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Kkt,
    Stagnation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub iterations: usize,
    /// Objective evaluations, including rejected trial steps.
    pub evaluations: usize,
    pub kkt_residual: f64,
    pub objective: f64,
    pub stop: StopReason,
    #[serde(skip)]
    pub trace: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub strategy: Strategy,
    pub classifier: Classifier,
    pub lambda: f64,
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub report: TrainReport,
}

impl LinearModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        row.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>() + self.intercept
    }

    /// Fraction of rows classified correctly; a zero decision value counts as wrong.
    pub fn accuracy(&self, x: &DesignMatrix) -> f64 {
        let correct = (0..x.rows())
            .filter(|&i| x.labels()[i] * self.decision(x.row(i)) > 0.0)
            .count();
        correct as f64 / x.rows() as f64
    }

    /// Fraction of exactly zero weights.
    pub fn sparsity(&self) -> f64 {
        self.weights.iter().filter(|&&w| w == 0.0).count() as f64 / self.weights.len() as f64
    }

    pub fn nonzeros(&self) -> usize {
        self.weights.iter().filter(|&&w| w != 0.0).count()
    }
}

/// Largest violation of the first-order optimality conditions.
pub fn kkt_residual(grad_w: &[f64], grad_b: f64, weights: &[f64], lambda: f64) -> f64 {
    grad_w
        .iter()
        .zip(weights)
        .map(|(&g, &w)| {
            if w == 0.0 {
                (g.abs() - lambda).max(0.0)
            } else {
                (g + lambda * w.signum()).abs()
            }
        })
        .fold(grad_b.abs(), f64::max)
}

/// Smallest `lambda` for which all weights are zero at the optimum.
pub fn lambda_max(x: &DesignMatrix, loss: Loss) -> f64 {
    let b = loss.intercept_only_optimum(x.labels());
    let (gw, _) = loss.gradient(x, &vec![0.0; x.cols()], b);
    gw.iter().fold(0.0, |m, g| m.max(g.abs()))
}

#[inline]
fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Evaluation machinery for one (possibly column-restricted) problem.
struct Problem<'a> {
    x: &'a DesignMatrix,
    loss: Loss,
    lambda: f64,
}

impl Problem<'_> {
    /// Decision values `w.x_i + b`.
    fn decisions(&self, w: &[f64], b: f64, out: &mut [f64]) {
        for (i, z) in out.iter_mut().enumerate() {
            *z = self.x.row(i).iter().zip(w).map(|(a, v)| a * v).sum::<f64>() + b;
        }
    }

    fn objective(&self, w: &[f64], z: &[f64]) -> f64 {
        let labels = self.x.labels();
        let data: f64 = z.iter().zip(labels).map(|(z, y)| self.loss.value(y * z)).sum();
        data / z.len() as f64 + self.lambda * w.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn gradient(&self, z: &[f64], grad_w: &mut [f64]) -> f64 {
        let n = z.len() as f64;
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (i, (&zi, &y)) in z.iter().zip(self.x.labels()).enumerate() {
            let coef = self.loss.slope(y * zi) * y / n;
            if coef == 0.0 {
                continue;
            }
            grad_b += coef;
            for (g, a) in grad_w.iter_mut().zip(self.x.row(i)) {
                *g += coef * a;
            }
        }
        grad_b
    }
}

const CURVATURE_MIN: f64 = 1e-10;
const CURVATURE_MAX: f64 = 1e30;
/// Minimum number of violating features admitted to the working set per pass.
const WORKING_SET_GROWTH: usize = 10;

enum InnerStop {
    Kkt,
    Stagnation,
    Budget,
}

/// Proximal-gradient iterations on `problem`, updating `w` and `b` in place.
/// Returns the iterations used and why it stopped.
fn sparsa(
    problem: &Problem<'_>,
    w: &mut Vec<f64>,
    b: &mut f64,
    settings: &SolverSettings,
    kkt_tolerance: f64,
    budget: usize,
    trace: &mut Vec<(f64, f64)>,
    evaluations: &mut usize,
) -> (usize, InnerStop) {
    let n = problem.x.rows();
    let d = problem.x.cols();
    let lambda = problem.lambda;
    let mut z = vec![0.0; n];
    problem.decisions(w, *b, &mut z);
    let mut objective = problem.objective(w, &z);
    let mut grad_w = vec![0.0; d];
    let mut grad_b = problem.gradient(&z, &mut grad_w);

    let mut w_new = vec![0.0; d];
    let mut z_new = vec![0.0; n];
    let mut grad_w_new = vec![0.0; d];
    let memory = settings.memory.max(1);
    let mut history = VecDeque::with_capacity(memory);
    history.push_back(objective);
    let mut curvature = 1.0;

    for iteration in 0..budget {
        if kkt_residual(&grad_w, grad_b, w, lambda) < kkt_tolerance {
            return (iteration, InnerStop::Kkt);
        }

        let reference = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (objective_new, b_new, step_sq) = loop {
            let step = 1.0 / curvature;
            let threshold = lambda * step;
            for j in 0..d {
                w_new[j] = soft_threshold(w[j] - step * grad_w[j], threshold);
            }
            let b_try = *b - step * grad_b;
            problem.decisions(&w_new, b_try, &mut z_new);
            let candidate = problem.objective(&w_new, &z_new);
            *evaluations += 1;
            let step_sq =
                w_new.iter().zip(w.iter()).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() + (b_try - *b) * (b_try - *b);
            if candidate <= reference - 0.5 * settings.sigma * curvature * step_sq {
                break (candidate, b_try, step_sq);
            }
            curvature *= 2.0;
            if curvature > CURVATURE_MAX {
                // no representable step decreases the objective any further
                return (iteration, InnerStop::Stagnation);
            }
        };
        debug_assert!(objective_new <= reference);
        if settings.record_trace {
            trace.push((objective_new, reference));
        }

        let grad_b_new = problem.gradient(&z_new, &mut grad_w_new);
        let mut s_dot_r = (b_new - *b) * (grad_b_new - grad_b);
        for j in 0..d {
            s_dot_r += (w_new[j] - w[j]) * (grad_w_new[j] - grad_w[j]);
        }
        curvature = if s_dot_r > 0.0 && step_sq > 0.0 {
            (s_dot_r / step_sq).clamp(CURVATURE_MIN, CURVATURE_MAX)
        } else {
            CURVATURE_MIN
        };

        // progress over the whole acceptance window, since single non-monotone steps can stall
        let change = (reference - objective_new).abs() / objective_new.abs().max(f64::MIN_POSITIVE);
        std::mem::swap(w, &mut w_new);
        std::mem::swap(&mut z, &mut z_new);
        std::mem::swap(&mut grad_w, &mut grad_w_new);
        *b = b_new;
        grad_b = grad_b_new;
        objective = objective_new;
        if history.len() == memory {
            history.pop_front();
        }
        history.push_back(objective);

        if change < settings.relative_tolerance {
            let stop = if kkt_residual(&grad_w, grad_b, w, lambda) < kkt_tolerance {
                InnerStop::Kkt
            } else {
                InnerStop::Stagnation
            };
            return (iteration + 1, stop);
        }
    }
    (budget, InnerStop::Budget)
}

/// Cold start from `w = 0` and the intercept-only optimum.
pub fn train(x: &DesignMatrix, classifier: Classifier, lambda: f64, settings: &SolverSettings) -> Result<LinearModel> {
    let b0 = classifier.loss().intercept_only_optimum(x.labels());
    train_warm(x, classifier, lambda, settings, &vec![0.0; x.cols()], b0)
}

pub fn train_l1_logistic(x: &DesignMatrix, lambda: f64, settings: &SolverSettings) -> Result<LinearModel> {
    train(x, Classifier::Logistic, lambda, settings)
}

pub fn train_l1_svm(x: &DesignMatrix, lambda: f64, settings: &SolverSettings) -> Result<LinearModel> {
    train(x, Classifier::Svm, lambda, settings)
}

/// Starts from the given weights and intercept, e.g. the solution for a nearby `lambda`.
///
/// Iterations run over a working set of features: the current support plus every
/// feature violating its optimality condition. The set grows until the full problem
/// satisfies the KKT conditions, so the result solves the full problem.
pub fn train_warm(
    x: &DesignMatrix,
    classifier: Classifier,
    lambda: f64,
    settings: &SolverSettings,
    init_weights: &[f64],
    init_intercept: f64,
) -> Result<LinearModel> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidProtocol(format!("lambda {lambda} must be non-negative")));
    }
    if init_weights.len() != x.cols() {
        return Err(Error::InvalidDesign("initial weights have the wrong length".into()));
    }
    let loss = classifier.loss();
    let full = Problem { x, loss, lambda };
    let mut w = init_weights.to_vec();
    let mut b = init_intercept;
    let mut z = vec![0.0; x.rows()];
    let mut grad_w = vec![0.0; x.cols()];
    let mut active: Vec<bool> = w.iter().map(|&v| v != 0.0).collect();
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut evaluations = 0;
    let mut last_stop = None;

    loop {
        full.decisions(&w, b, &mut z);
        let grad_b = full.gradient(&z, &mut grad_w);
        let residual = kkt_residual(&grad_w, grad_b, &w, lambda);
        let stop = if residual < settings.kkt_tolerance {
            Some(StopReason::Kkt)
        } else {
            let mut violators: Vec<usize> = (0..x.cols())
                .filter(|&j| !active[j] && grad_w[j].abs() > lambda)
                .collect();
            violators.sort_by(|&i, &j| grad_w[j].abs().total_cmp(&grad_w[i].abs()).then(i.cmp(&j)));
            let support = w.iter().filter(|&&v| v != 0.0).count();
            violators.truncate(support.max(WORKING_SET_GROWTH));
            let grew = !violators.is_empty();
            for j in violators {
                active[j] = true;
            }
            match last_stop {
                Some(InnerStop::Budget) => return Err(Error::NonConvergence { iterations, residual }),
                Some(_) if !grew => Some(StopReason::Stagnation),
                _ => None,
            }
        };
        if let Some(stop) = stop {
            return Ok(LinearModel {
                strategy: x.strategy(),
                classifier,
                lambda,
                intercept: b,
                report: TrainReport {
                    iterations,
                    evaluations,
                    kkt_residual: residual,
                    objective: full.objective(&w, &z),
                    stop,
                    trace,
                },
                weights: w,
            });
        }

        let columns: Vec<usize> = (0..x.cols()).filter(|&j| active[j]).collect();
        if columns.is_empty() {
            // only the intercept is off, and it has a closed form at w = 0
            b = loss.intercept_only_optimum(x.labels());
            last_stop = Some(InnerStop::Kkt);
            continue;
        }
        // Centered columns with intercept b + w.mu: the same objective, better conditioned.
        let restricted = x.columns(&columns)?;
        let n = x.rows() as f64;
        let mut means = vec![0.0; columns.len()];
        for i in 0..x.rows() {
            for (m, v) in means.iter_mut().zip(restricted.row(i)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let centered: Vec<f64> = restricted
            .data()
            .chunks(columns.len())
            .flat_map(|row| row.iter().zip(&means).map(|(v, m)| v - m))
            .collect();
        let centered = DesignMatrix::from_flat(x.rows(), columns.len(), centered, x.labels().to_vec(), x.strategy())?;
        let problem = Problem {
            x: &centered,
            loss,
            lambda,
        };
        let shift = |w: &[f64]| w.iter().zip(&means).map(|(a, m)| a * m).sum::<f64>();
        let mut w_active: Vec<f64> = columns.iter().map(|&j| w[j]).collect();
        let mut b_centered = b + shift(&w_active);
        let (used, inner) = sparsa(
            &problem,
            &mut w_active,
            &mut b_centered,
            settings,
            // centering moves the feature gradient by at most max|mu| |grad_b|
            settings.kkt_tolerance / (1.0 + means.iter().fold(0.0, |m: f64, v| m.max(v.abs()))),
            settings.max_iterations - iterations,
            &mut trace,
            &mut evaluations,
        );
        b = b_centered - shift(&w_active);
        iterations += used;
        for (&j, &v) in columns.iter().zip(&w_active) {
            w[j] = v;
        }
        last_stop = Some(inner);
    }
}
