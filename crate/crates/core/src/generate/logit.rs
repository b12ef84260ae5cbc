//! Multinomial logistic regression on soft cause/effect observations.
//!
//! The model puts a linear score y_c = b_c0 + sum_j b_cj x_j on every
//! effect state except the last, which serves as the reference with score
//! zero; effect probabilities are the softmax of the scores. Observed
//! effect probabilities enter the log-likelihood as fractional case
//! weights, so soft training rows need no rounding. Fitting is plain
//! Newton-Raphson with step halving, plus an optional ridge on the
//! non-intercept coefficients to keep separable data from diverging.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::observations::ObservationSet;
use crate::prob::ProbVector;

/// A fitted multinomial logit: coefficient row c holds
/// (b_c0, b_c1, .., b_cn) for effect state c; the last effect state is the
/// reference with all coefficients fixed at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitModel {
    coefficients: DMatrix<f64>,
    effect_labels: Vec<String>,
}

impl LogitModel {
    /// Wraps raw coefficients; `coefficients` must be (m-1) x (n+1) for m
    /// effect labels.
    pub fn new(coefficients: DMatrix<f64>, effect_labels: Vec<String>) -> Result<Self> {
        if effect_labels.is_empty() || coefficients.nrows() + 1 != effect_labels.len() {
            return Err(Error::Dimension {
                what: "coefficient rows vs effect states",
                expected: effect_labels.len().saturating_sub(1),
                actual: coefficients.nrows(),
            });
        }
        if coefficients.nrows() > 0 && coefficients.ncols() == 0 {
            return Err(Error::validation(
                "coefficient rows need at least an intercept",
            ));
        }
        if coefficients.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("coefficients must be finite"));
        }
        Ok(LogitModel {
            coefficients,
            effect_labels,
        })
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn effect_labels(&self) -> &[String] {
        &self.effect_labels
    }

    /// Number of cause states the model expects.
    pub fn cause_count(&self) -> usize {
        self.coefficients.ncols().saturating_sub(1)
    }

    /// Index of the reference effect state (the last one).
    pub fn reference_state(&self) -> usize {
        self.effect_labels.len() - 1
    }
}

/// Effect probabilities for one cause distribution: softmax of the linear
/// scores with the reference state pinned at score zero.
pub fn logit_predict(model: &LogitModel, cause: &ProbVector) -> Result<ProbVector> {
    if cause.len() != model.cause_count() {
        return Err(Error::Dimension {
            what: "cause states vs model inputs",
            expected: model.cause_count(),
            actual: cause.len(),
        });
    }
    let values = softmax_row(&model.coefficients, cause.values());
    Ok(ProbVector::from_normalized(
        model.effect_labels.clone(),
        values,
    ))
}

fn softmax_row(coefficients: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let classes = coefficients.nrows();
    let mut scores = Vec::with_capacity(classes + 1);
    for c in 0..classes {
        let mut y = coefficients[(c, 0)];
        for (j, &xj) in x.iter().enumerate() {
            y += coefficients[(c, j + 1)] * xj;
        }
        scores.push(y);
    }
    scores.push(0.0); // reference state
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|y| (y - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Penalised log-likelihood of the observations under the model: effect
/// probabilities act as fractional case weights, and the ridge penalty
/// applies to the non-intercept coefficients only.
pub fn penalized_log_likelihood(
    observations: &ObservationSet,
    model: &LogitModel,
    reg: f64,
) -> Result<f64> {
    let problem = Problem::new(observations, reg)?;
    problem.check_model(model)?;
    Ok(problem.log_likelihood(&problem.flatten(model)))
}

/// Analytic gradient of [`penalized_log_likelihood`] with respect to the
/// coefficients, flattened row by row: class 0 intercept first, then its
/// cause weights, then class 1, and so on.
pub fn penalized_gradient(
    observations: &ObservationSet,
    model: &LogitModel,
    reg: f64,
) -> Result<Vec<f64>> {
    let problem = Problem::new(observations, reg)?;
    problem.check_model(model)?;
    Ok(problem
        .gradient(&problem.flatten(model))
        .iter()
        .copied()
        .collect())
}

/// Fits the multinomial logit by Newton-Raphson.
///
/// Stops when the infinity norm of the penalised gradient drops to `tol`.
/// Each Newton step is halved (up to 30 times) until the log-likelihood
/// does not decrease; if no such step exists or `max_iter` runs out, the
/// fit is reported as [`Error::NonConvergence`].
pub fn fit_multinomial_logit(
    observations: &ObservationSet,
    reg: f64,
    max_iter: usize,
    tol: f64,
) -> Result<LogitModel> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::validation("tol must be finite and > 0"));
    }
    if max_iter == 0 {
        return Err(Error::validation("max_iter must be at least 1"));
    }
    let problem = Problem::new(observations, reg)?;
    let mut beta = DVector::<f64>::zeros(problem.parameter_count());
    // A single effect state has no free parameters.
    if problem.parameter_count() == 0 {
        return problem.model(&beta, observations);
    }
    let mut ll = problem.log_likelihood(&beta);

    for iteration in 1..=max_iter {
        let gradient = problem.gradient(&beta);
        if gradient.amax() <= tol {
            return problem.model(&beta, observations);
        }
        let direction =
            problem
                .newton_direction(&beta, &gradient)
                .ok_or(Error::NonConvergence {
                    iterations: iteration,
                })?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=30 {
            let candidate = &beta + &direction * step;
            let candidate_ll = problem.log_likelihood(&candidate);
            if candidate_ll.is_finite() && candidate_ll >= ll {
                beta = candidate;
                ll = candidate_ll;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                iterations: iteration,
            });
        }
    }
    // One last chance: the cap may land exactly on the optimum.
    if problem.gradient(&beta).amax() <= tol {
        return problem.model(&beta, observations);
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
    })
}

/// Design matrix, targets and penalty for one fitting problem.
struct Problem {
    design: DMatrix<f64>,  // k x (n+1), leading ones column
    targets: DMatrix<f64>, // k x m
    classes: usize,        // m - 1
    reg: f64,
}

impl Problem {
    fn new(observations: &ObservationSet, reg: f64) -> Result<Self> {
        if !(reg.is_finite() && reg >= 0.0) {
            return Err(Error::validation("reg must be finite and >= 0"));
        }
        let k = observations.row_count();
        let n = observations.combined_arity();
        let m = observations.effect().arity();
        let design = DMatrix::from_fn(k, n + 1, {
            let rows: Vec<Vec<f64>> = (0..k).map(|r| observations.combined_cause_row(r)).collect();
            move |r, j| if j == 0 { 1.0 } else { rows[r][j - 1] }
        });
        let targets = DMatrix::from_fn(k, m, |r, i| observations.effect().row(r)[i]);
        Ok(Problem {
            design,
            targets,
            classes: m - 1,
            reg,
        })
    }

    fn parameter_count(&self) -> usize {
        self.classes * self.design.ncols()
    }

    fn check_model(&self, model: &LogitModel) -> Result<()> {
        if model.coefficients.nrows() != self.classes
            || model.coefficients.ncols() != self.design.ncols()
        {
            return Err(Error::Dimension {
                what: "model coefficients vs observation shape",
                expected: self.parameter_count(),
                actual: model.coefficients.len(),
            });
        }
        Ok(())
    }

    fn flatten(&self, model: &LogitModel) -> DVector<f64> {
        let width = self.design.ncols();
        DVector::from_fn(self.parameter_count(), |idx, _| {
            model.coefficients[(idx / width, idx % width)]
        })
    }

    fn unflatten(&self, beta: &DVector<f64>) -> DMatrix<f64> {
        let width = self.design.ncols();
        DMatrix::from_fn(self.classes, width, |c, j| beta[c * width + j])
    }

    /// Class probabilities for every observation row.
    fn probabilities(&self, beta: &DVector<f64>) -> DMatrix<f64> {
        let coefficients = self.unflatten(beta);
        let k = self.design.nrows();
        let m = self.classes + 1;
        let mut probs = DMatrix::<f64>::zeros(k, m);
        for r in 0..k {
            let x: Vec<f64> = (1..self.design.ncols())
                .map(|j| self.design[(r, j)])
                .collect();
            for (i, p) in softmax_row(&coefficients, &x).into_iter().enumerate() {
                probs[(r, i)] = p;
            }
        }
        probs
    }

    fn log_likelihood(&self, beta: &DVector<f64>) -> f64 {
        let probs = self.probabilities(beta);
        let mut ll = 0.0;
        for r in 0..self.targets.nrows() {
            for i in 0..self.targets.ncols() {
                let weight = self.targets[(r, i)];
                if weight > 0.0 {
                    ll += weight * probs[(r, i)].ln();
                }
            }
        }
        ll - 0.5 * self.reg * self.penalty_norm(beta)
    }

    fn penalty_norm(&self, beta: &DVector<f64>) -> f64 {
        let width = self.design.ncols();
        beta.iter()
            .enumerate()
            .filter(|(idx, _)| idx % width != 0)
            .map(|(_, b)| b * b)
            .sum()
    }

    fn gradient(&self, beta: &DVector<f64>) -> DVector<f64> {
        let probs = self.probabilities(beta);
        let width = self.design.ncols();
        let mut gradient = DVector::<f64>::zeros(self.parameter_count());
        for c in 0..self.classes {
            for j in 0..width {
                let mut g = 0.0;
                for r in 0..self.design.nrows() {
                    g += (self.targets[(r, c)] - probs[(r, c)]) * self.design[(r, j)];
                }
                if j != 0 {
                    g -= self.reg * beta[c * width + j];
                }
                gradient[c * width + j] = g;
            }
        }
        gradient
    }

    /// Solves -H d = g for the ascent direction d.
    fn newton_direction(
        &self,
        beta: &DVector<f64>,
        gradient: &DVector<f64>,
    ) -> Option<DVector<f64>> {
        let probs = self.probabilities(beta);
        let width = self.design.ncols();
        let dim = self.parameter_count();
        let mut neg_hessian = DMatrix::<f64>::zeros(dim, dim);
        for r in 0..self.design.nrows() {
            for c1 in 0..self.classes {
                let p1 = probs[(r, c1)];
                for c2 in 0..self.classes {
                    let p2 = probs[(r, c2)];
                    let w = if c1 == c2 { p1 * (1.0 - p1) } else { -p1 * p2 };
                    if w == 0.0 {
                        continue;
                    }
                    for j1 in 0..width {
                        let u1 = self.design[(r, j1)];
                        if u1 == 0.0 {
                            continue;
                        }
                        for j2 in 0..width {
                            neg_hessian[(c1 * width + j1, c2 * width + j2)] +=
                                w * u1 * self.design[(r, j2)];
                        }
                    }
                }
            }
        }
        for idx in 0..dim {
            if idx % width != 0 {
                neg_hessian[(idx, idx)] += self.reg;
            }
        }
        if let Some(chol) = neg_hessian.clone().cholesky() {
            return Some(chol.solve(gradient));
        }
        neg_hessian.lu().solve(gradient)
    }

    fn model(&self, beta: &DVector<f64>, observations: &ObservationSet) -> Result<LogitModel> {
        LogitModel::new(
            self.unflatten(beta),
            observations.effect().labels().to_vec(),
        )
    }
}
