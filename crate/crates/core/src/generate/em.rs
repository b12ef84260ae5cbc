//! Expectation-maximisation over cause/effect observations.
//!
//! Every observation row fixes a (possibly soft) distribution over the
//! combined cause states and one over the effect states, so the expected
//! count contributed to cell (i, j) is the fractional co-occurrence
//! x_j * z_i; hard rows contribute whole counts and the procedure reduces
//! to maximum likelihood counting. The M-step normalises the expected
//! counts per column, and iteration stops once the log-likelihood
//! improvement drops to `epsilon`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::observations::ObservationSet;
use crate::prob::Cpt;

/// Initialisation of the table parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmInit {
    /// All columns uniform.
    Uniform,
    /// Random positive columns drawn from the given seed; restart r uses
    /// seed + r, so runs are reproducible.
    SeededRandom(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    /// Convergence threshold on the absolute log-likelihood change.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub init: EmInit,
    /// Number of independent runs; the best final log-likelihood wins.
    pub restarts: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            epsilon: 1e-6,
            max_iterations: 1000,
            init: EmInit::Uniform,
            restarts: 1,
        }
    }
}

impl EmConfig {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::validation("epsilon must be finite and > 0"));
        }
        if self.max_iterations == 0 {
            return Err(Error::validation("max_iterations must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::validation("restarts must be at least 1"));
        }
        Ok(())
    }
}

/// Result of an EM run.
#[derive(Debug, Clone, PartialEq)]
pub struct EmFit {
    pub cpt: Cpt,
    /// Iterations performed by the winning run.
    pub iterations: usize,
    pub final_log_likelihood: f64,
    /// Log-likelihood after initialisation and after every iteration.
    pub log_likelihood_trace: Vec<f64>,
    /// False when the run hit `max_iterations` before the threshold.
    pub converged: bool,
}

/// Fits a table by expectation-maximisation.
///
/// Returns the best fit over `config.restarts` runs. A run that exhausts
/// `max_iterations` without meeting `epsilon` is reported as
/// [`Error::EmNonConvergence`] carrying the fit so far.
pub fn em_cpt(observations: &ObservationSet, config: &EmConfig) -> Result<EmFit> {
    config.validate()?;
    let n = observations.combined_arity();
    let m = observations.effect().arity();
    let k = observations.row_count();

    let cause_rows: Vec<Vec<f64>> = (0..k).map(|r| observations.combined_cause_row(r)).collect();
    let effect_rows: Vec<&[f64]> = (0..k).map(|r| observations.effect().row(r)).collect();

    // Expected counts from fully observed (soft) rows do not depend on the
    // current parameters, so they are accumulated once.
    let mut counts = DMatrix::<f64>::zeros(m, n);
    for (x, z) in cause_rows.iter().zip(&effect_rows) {
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (i, &zi) in z.iter().enumerate() {
                counts[(i, j)] += xj * zi;
            }
        }
    }

    let mut best: Option<EmFit> = None;
    for restart in 0..config.restarts {
        let theta0 = match config.init {
            EmInit::Uniform => DMatrix::from_element(m, n, 1.0 / m as f64),
            EmInit::SeededRandom(seed) => random_columns(m, n, seed.wrapping_add(restart as u64)),
        };
        let fit = run_em(&counts, theta0, observations, config);
        let replace = match &best {
            None => true,
            Some(current) => fit.final_log_likelihood > current.final_log_likelihood,
        };
        if replace {
            best = Some(fit);
        }
    }
    let best = best.expect("at least one restart");
    if best.converged {
        Ok(best)
    } else {
        Err(Error::EmNonConvergence(Box::new(best)))
    }
}

fn run_em(
    counts: &DMatrix<f64>,
    theta0: DMatrix<f64>,
    observations: &ObservationSet,
    config: &EmConfig,
) -> EmFit {
    let (m, n) = (counts.nrows(), counts.ncols());
    let mut theta = theta0;
    let mut trace = vec![log_likelihood(counts, &theta)];
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..config.max_iterations {
        iterations += 1;
        // M-step; columns without mass keep their current estimate.
        for j in 0..n {
            let total: f64 = (0..m).map(|i| counts[(i, j)]).sum();
            if total > 0.0 {
                for i in 0..m {
                    theta[(i, j)] = counts[(i, j)] / total;
                }
            }
        }
        let ll = log_likelihood(counts, &theta);
        let previous = *trace.last().expect("trace starts non-empty");
        trace.push(ll);
        if (ll - previous).abs() <= config.epsilon {
            converged = true;
            break;
        }
    }

    let cpt = Cpt::new(
        observations.effect().labels().to_vec(),
        observations.combined_cause_labels(),
        theta,
    )
    .expect("M-step columns are normalised")
    .with_arity_profile(observations.arity_profile())
    .expect("profile matches combined arity");
    EmFit {
        cpt,
        iterations,
        final_log_likelihood: *trace.last().expect("non-empty"),
        log_likelihood_trace: trace,
        converged,
    }
}

/// Expected log-likelihood of the data under the table: the fractional
/// counts weight the log parameters. Zero counts contribute nothing; a
/// positive count on a zero parameter makes the data impossible.
fn log_likelihood(counts: &DMatrix<f64>, theta: &DMatrix<f64>) -> f64 {
    let mut ll = 0.0;
    for (count, parameter) in counts.iter().zip(theta.iter()) {
        if *count > 0.0 {
            if *parameter == 0.0 {
                return f64::NEG_INFINITY;
            }
            ll += count * parameter.ln();
        }
    }
    ll
}

fn random_columns(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = DMatrix::<f64>::zeros(m, n);
    for j in 0..n {
        let mut sum = 0.0;
        for i in 0..m {
            // Bounded away from zero so no state starts impossible.
            let v: f64 = rng.random_range(0.05..1.0);
            entries[(i, j)] = v;
            sum += v;
        }
        for i in 0..m {
            entries[(i, j)] /= sum;
        }
    }
    entries
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::mle_cpt;
    use crate::observations::NodeBlock;

    fn single_soft_row_set() -> ObservationSet {
        let causes = NodeBlock::new("X", ["x1", "x2"], vec![vec![0.25, 0.75]], 1e-6).unwrap();
        let effects = NodeBlock::new("Z", ["z1", "z2"], vec![vec![0.6, 0.4]], 1e-6).unwrap();
        ObservationSet::new(vec![causes], effects).unwrap()
    }

    #[test]
    fn matches_mle_on_complete_hard_data() {
        let causes = NodeBlock::new(
            "X",
            ["x1", "x2"],
            vec![
                vec![1.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
            ],
            1e-6,
        )
        .unwrap();
        let effects = NodeBlock::new(
            "Z",
            ["z1", "z2"],
            vec![
                vec![1.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, 1.0],
            ],
            1e-6,
        )
        .unwrap();
        let set = ObservationSet::new(vec![causes], effects).unwrap();
        let em = em_cpt(&set, &EmConfig::default()).unwrap();
        let mle = mle_cpt(&set, false).unwrap();
        for j in 0..2 {
            for i in 0..2 {
                assert!((em.cpt.entry(i, j) - mle.cpt.entry(i, j)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn single_row_converges_in_two_iterations() {
        // Hand E/M step: counts x_j * z_i give columns (0.6, 0.4) twice;
        // the second iteration only confirms convergence.
        let fit = em_cpt(&single_soft_row_set(), &EmConfig::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.iterations <= 2);
        for j in 0..2 {
            assert!((fit.cpt.entry(0, j) - 0.6).abs() < 1e-12);
            assert!((fit.cpt.entry(1, j) - 0.4).abs() < 1e-12);
        }
        // ln P after init (uniform) and after the first M-step, by hand.
        assert!((fit.log_likelihood_trace[0] - 0.5f64.ln()).abs() < 1e-12);
        let expected = 0.6 * 0.6f64.ln() + 0.4 * 0.4f64.ln();
        assert!((fit.final_log_likelihood - expected).abs() < 1e-12);
    }

    #[test]
    fn iteration_cap_reports_non_convergence_with_partial_fit() {
        let config = EmConfig {
            epsilon: 1e-6,
            max_iterations: 1,
            ..EmConfig::default()
        };
        match em_cpt(&single_soft_row_set(), &config) {
            Err(Error::EmNonConvergence(fit)) => {
                assert_eq!(fit.iterations, 1);
                assert!(!fit.converged);
                // The partial fit already carries the M-step estimate.
                assert!((fit.cpt.entry(0, 0) - 0.6).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn log_likelihood_never_decreases() {
        let config = EmConfig {
            init: EmInit::SeededRandom(11),
            restarts: 3,
            ..EmConfig::default()
        };
        let fit = em_cpt(&single_soft_row_set(), &config).unwrap();
        for pair in fit.log_likelihood_trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-12);
        }
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let config = EmConfig {
            init: EmInit::SeededRandom(7),
            restarts: 3,
            ..EmConfig::default()
        };
        let a = em_cpt(&single_soft_row_set(), &config).unwrap();
        let b = em_cpt(&single_soft_row_set(), &config).unwrap();
        assert_eq!(a.cpt.entries(), b.cpt.entries());
        assert_eq!(a.log_likelihood_trace, b.log_likelihood_trace);
    }

    #[test]
    fn rejects_bad_config() {
        let set = single_soft_row_set();
        for config in [
            EmConfig {
                epsilon: 0.0,
                ..EmConfig::default()
            },
            EmConfig {
                max_iterations: 0,
                ..EmConfig::default()
            },
            EmConfig {
                restarts: 0,
                ..EmConfig::default()
            },
        ] {
            assert!(em_cpt(&set, &config).is_err());
        }
    }
}
