//! Goodness measures for predicted effects and for whole tables.
//!
//! Probabilities shift between states rather than scale, so the measures
//! here are absolute: half the L1 distance between two distributions is the
//! total probability mass that moved, and lies in [0, 1] by construction.
//! Relative errors are deliberately absent; near-zero probabilities make
//! them meaningless.

use crate::error::{Error, Result};
use crate::observations::ObservationSet;
use crate::prob::{predict_effects, Cpt, ProbVector};

/// Every per-effect and per-table measure for one table against one test
/// set.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodnessReport {
    /// Shift error per observation (half L1 distance), in [0, 1].
    pub per_observation_errors: Vec<f64>,
    /// Mean of the per-observation shift errors.
    pub mean_absolute_error: f64,
    /// Mean absolute error per effect state, in [0, 1] each.
    pub state_errors: Vec<f64>,
    /// Mean of the state errors; also the average probability mass that
    /// shifted per state.
    pub total_average_shift_error: f64,
    /// Fraction of observations whose most probable state was identified;
    /// ties on either side count as a miss.
    pub diagnostic_goodness: f64,
    /// 1 - diagnostic_goodness.
    pub diagnostic_error: f64,
    pub observation_count: usize,
    /// Effect state labels, for report rendering.
    pub effect_labels: Vec<String>,
}

/// Half L1 distance between an observed and a predicted effect vector: the
/// probability mass that shifted between states. 0 when equal, 1 when the
/// supports are disjoint.
pub fn effect_shift_error(z: &ProbVector, z_hat: &ProbVector) -> Result<f64> {
    if z.len() != z_hat.len() {
        return Err(Error::Dimension {
            what: "effect vector lengths",
            expected: z.len(),
            actual: z_hat.len(),
        });
    }
    Ok(half_l1(z.values(), z_hat.values()))
}

fn half_l1(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Mean absolute error per effect state across k paired rows, plus the
/// average over states.
pub fn state_errors(observed: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    check_matrix_pair(observed, predicted)?;
    let k = observed.len();
    let m = observed[0].len();
    let mut errors = vec![0.0; m];
    for (z, z_hat) in observed.iter().zip(predicted) {
        for (j, error) in errors.iter_mut().enumerate() {
            *error += (z[j] - z_hat[j]).abs();
        }
    }
    for error in &mut errors {
        *error /= k as f64;
    }
    let mean = errors.iter().sum::<f64>() / m as f64;
    Ok((errors, mean))
}

/// Fraction of rows whose observed and predicted maximum states agree.
///
/// A row counts as agreement only if both sides have a unique maximum and
/// the maxima coincide; any tie is a miss, since a tied prediction does not
/// identify a state. Returns (goodness, error).
pub fn diagnostic_goodness(observed: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<(f64, f64)> {
    check_matrix_pair(observed, predicted)?;
    let mut agreeing = 0usize;
    for (z, z_hat) in observed.iter().zip(predicted) {
        if let (Some(a), Some(b)) = (unique_argmax(z), unique_argmax(z_hat)) {
            if a == b {
                agreeing += 1;
            }
        }
    }
    let g = agreeing as f64 / observed.len() as f64;
    Ok((g, 1.0 - g))
}

/// Index of the strictly largest entry, or None on a tie.
fn unique_argmax(row: &[f64]) -> Option<usize> {
    let mut best = 0;
    let mut ties = false;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
            ties = false;
        } else if v == row[best] {
            ties = true;
        }
    }
    (!ties).then_some(best)
}

fn check_matrix_pair(observed: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<()> {
    if observed.len() != predicted.len() || observed.is_empty() {
        return Err(Error::Dimension {
            what: "observation rows vs prediction rows",
            expected: observed.len(),
            actual: predicted.len(),
        });
    }
    let m = observed[0].len();
    for row in observed.iter().chain(predicted) {
        if row.len() != m {
            return Err(Error::Dimension {
                what: "effect states per row",
                expected: m,
                actual: row.len(),
            });
        }
    }
    Ok(())
}

/// Shift error between two tables: the mean over columns of the
/// per-column half L1 distance.
pub fn cpt_shift_error(cpt: &Cpt, other: &Cpt) -> Result<f64> {
    check_same_shape(cpt, other)?;
    let n = cpt.cols();
    let total: f64 = (0..n)
        .map(|j| half_l1(&cpt.column(j), &other.column(j)))
        .sum();
    Ok(total / n as f64)
}

/// Kullback-Leibler divergence of `other` from `cpt`, with the columns
/// weighted by the cause distribution `x`.
///
/// Zero reference entries contribute nothing; a positive reference entry
/// against a zero approximation makes the divergence infinite, which is
/// returned as `f64::INFINITY` rather than an error.
pub fn cpt_kl_divergence(cpt: &Cpt, other: &Cpt, x: &ProbVector) -> Result<f64> {
    check_same_shape(cpt, other)?;
    check_weight(cpt, x)?;
    let mut divergence = 0.0;
    for (j, &weight) in x.values().iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let mut column_sum = 0.0;
        for i in 0..cpt.rows() {
            let p = cpt.entry(i, j);
            if p == 0.0 {
                continue;
            }
            let q = other.entry(i, j);
            if q == 0.0 {
                return Ok(f64::INFINITY);
            }
            column_sum += p * (p / q).ln();
        }
        divergence += weight * column_sum;
    }
    // Rounding can leave a tiny negative total for near-identical tables.
    Ok(divergence.max(0.0))
}

/// Squared Euclidean distance between two tables, columns weighted by `x`.
pub fn cpt_euclidean(cpt: &Cpt, other: &Cpt, x: &ProbVector) -> Result<f64> {
    check_same_shape(cpt, other)?;
    check_weight(cpt, x)?;
    let mut distance = 0.0;
    for (j, &weight) in x.values().iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let column_sum: f64 = (0..cpt.rows())
            .map(|i| {
                let d = cpt.entry(i, j) - other.entry(i, j);
                d * d
            })
            .sum();
        distance += weight * column_sum;
    }
    Ok(distance)
}

fn check_same_shape(a: &Cpt, b: &Cpt) -> Result<()> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Dimension {
            what: "table shapes",
            expected: a.rows() * a.cols(),
            actual: b.rows() * b.cols(),
        });
    }
    Ok(())
}

fn check_weight(cpt: &Cpt, x: &ProbVector) -> Result<()> {
    if x.len() != cpt.cols() {
        return Err(Error::Dimension {
            what: "weight vector vs table columns",
            expected: cpt.cols(),
            actual: x.len(),
        });
    }
    Ok(())
}

/// Predicted effect vectors for every row of a test set: combine the parent
/// rows, multiply through the table.
pub fn predicted_effects(cpt: &Cpt, test: &ObservationSet) -> Result<Vec<ProbVector>> {
    check_compatible(cpt, test)?;
    let labels = test.combined_cause_labels();
    let mut out = Vec::with_capacity(test.row_count());
    for r in 0..test.row_count() {
        let combined = ProbVector::from_normalized(labels.clone(), test.combined_cause_row(r));
        out.push(predict_effects(cpt, &combined)?);
    }
    Ok(out)
}

/// Scores a table against a test set with every measure of
/// [`GoodnessReport`].
pub fn evaluate_cpt(cpt: &Cpt, test: &ObservationSet) -> Result<GoodnessReport> {
    let predictions = predicted_effects(cpt, test)?;
    let observed: Vec<Vec<f64>> = test.effect().rows().to_vec();
    let predicted: Vec<Vec<f64>> = predictions.iter().map(|p| p.values().to_vec()).collect();

    let per_observation_errors: Vec<f64> = observed
        .iter()
        .zip(&predicted)
        .map(|(z, z_hat)| half_l1(z, z_hat))
        .collect();
    let mean_absolute_error =
        per_observation_errors.iter().sum::<f64>() / per_observation_errors.len() as f64;
    let (state_errors, total_average_shift_error) = state_errors(&observed, &predicted)?;
    let (diagnostic_goodness, diagnostic_error) = diagnostic_goodness(&observed, &predicted)?;

    Ok(GoodnessReport {
        per_observation_errors,
        mean_absolute_error,
        state_errors,
        total_average_shift_error,
        diagnostic_goodness,
        diagnostic_error,
        observation_count: test.row_count(),
        effect_labels: cpt.effect_labels().to_vec(),
    })
}

fn check_compatible(cpt: &Cpt, test: &ObservationSet) -> Result<()> {
    if test.combined_arity() != cpt.cols() {
        return Err(Error::Dimension {
            what: "combined cause states vs table columns",
            expected: cpt.cols(),
            actual: test.combined_arity(),
        });
    }
    if test.effect().arity() != cpt.rows() {
        return Err(Error::Dimension {
            what: "effect states vs table rows",
            expected: cpt.rows(),
            actual: test.effect().arity(),
        });
    }
    if let Some(profile) = cpt.cause_arity_profile() {
        if profile != test.arity_profile() {
            return Err(Error::Dimension {
                what: "parent arity profile vs table profile",
                expected: profile.iter().product(),
                actual: test.combined_arity(),
            });
        }
    }
    Ok(())
}
