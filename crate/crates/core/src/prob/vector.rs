//! Discrete probability vectors over labelled states.

use crate::error::{Error, Result};

/// Default tolerance for validating externally supplied probabilities.
///
/// Elicited or transcribed data usually carries rounding noise in the last
/// printed digit, so inputs may miss the simplex by up to this amount and
/// are repaired by renormalisation.
pub const INPUT_TOLERANCE: f64 = 1e-6;

/// A discrete probability distribution over named states.
///
/// Values are validated on construction and renormalised to sum to one, so
/// every `ProbVector` in circulation is a valid distribution. The vector is
/// immutable afterwards and can be shared freely between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl ProbVector {
    /// Builds a probability vector from raw values.
    ///
    /// Values may miss the probability simplex by up to `tolerance`: small
    /// negative entries are clamped to zero and the vector is renormalised.
    /// Anything worse is rejected as a [`Error::Validation`].
    pub fn new<L, I>(labels: I, values: Vec<f64>, tolerance: f64) -> Result<Self>
    where
        L: Into<String>,
        I: IntoIterator<Item = L>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        check_labels(&labels)?;
        if labels.len() != values.len() {
            return Err(Error::Dimension {
                what: "state labels vs values",
                expected: labels.len(),
                actual: values.len(),
            });
        }
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::validation("tolerance must be finite and >= 0"));
        }
        for (label, &v) in labels.iter().zip(&values) {
            if !v.is_finite() {
                return Err(Error::validation(format!(
                    "state {label:?} has non-finite probability {v}"
                )));
            }
            if v < -tolerance {
                return Err(Error::validation(format!(
                    "state {label:?} has probability {v} below -{tolerance}"
                )));
            }
        }
        let mut values = values;
        for v in &mut values {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > tolerance {
            return Err(Error::validation(format!(
                "probabilities sum to {sum}, off from 1 by more than {tolerance}"
            )));
        }
        for v in &mut values {
            *v /= sum;
        }
        Ok(ProbVector { labels, values })
    }

    /// Hard evidence: all probability mass on `state`.
    pub fn hard<L, I>(labels: I, state: usize) -> Result<Self>
    where
        L: Into<String>,
        I: IntoIterator<Item = L>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        check_labels(&labels)?;
        if state >= labels.len() {
            return Err(Error::Dimension {
                what: "hard evidence state index",
                expected: labels.len(),
                actual: state,
            });
        }
        let mut values = vec![0.0; labels.len()];
        values[state] = 1.0;
        Ok(ProbVector { labels, values })
    }

    /// The uniform distribution over the given states.
    pub fn uniform<L, I>(labels: I) -> Result<Self>
    where
        L: Into<String>,
        I: IntoIterator<Item = L>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        check_labels(&labels)?;
        let n = labels.len();
        Ok(ProbVector {
            values: vec![1.0 / n as f64; n],
            labels,
        })
    }

    /// Internal constructor for values that already sum to one by
    /// construction (products, marginals, softmax outputs). Skips the
    /// renormalisation so callers that promise exactness keep it bit-for-bit.
    pub(crate) fn from_normalized(labels: Vec<String>, values: Vec<f64>) -> Self {
        debug_assert_eq!(labels.len(), values.len());
        debug_assert!(values.iter().all(|v| (-1e-12..=1.0 + 1e-9).contains(v)));
        debug_assert!((values.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        ProbVector { labels, values }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Returns the evidence state if this vector is hard evidence, i.e.
    /// exactly one entry carries probability one.
    pub fn hard_state(&self) -> Option<usize> {
        let mut hit = None;
        for (i, &v) in self.values.iter().enumerate() {
            if v == 1.0 {
                if hit.is_some() {
                    return None;
                }
                hit = Some(i);
            } else if v != 0.0 {
                return None;
            }
        }
        hit
    }
}

fn check_labels(labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::validation(
            "a probability vector needs at least one state",
        ));
    }
    for (i, label) in labels.iter().enumerate() {
        if label.is_empty() {
            return Err(Error::validation(format!("state {i} has an empty label")));
        }
        if labels[..i].contains(label) {
            return Err(Error::validation(format!(
                "duplicate state label {label:?}"
            )));
        }
    }
    Ok(())
}
