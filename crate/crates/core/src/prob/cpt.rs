//! Conditional probability tables and joint probability tables.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::prob::ProbVector;

/// How far a stored column may drift from summing to exactly one.
pub const COLUMN_SUM_TOLERANCE: f64 = 1e-9;

/// A column-stochastic conditional probability table P(Z|X).
///
/// Entry `(i, j)` is the probability of effect state `i` given combined
/// cause state `j`; every column sums to one within
/// [`COLUMN_SUM_TOLERANCE`]. When the causes are the combination of several
/// parents, `cause_arity_profile` records the per-parent state counts, with
/// earlier parents varying slower along the columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    effect_labels: Vec<String>,
    cause_labels: Vec<String>,
    entries: DMatrix<f64>,
    cause_arity_profile: Option<Vec<usize>>,
}

impl Cpt {
    /// Builds a table from entries that already satisfy the invariants:
    /// all entries in `[0, 1]` and column sums within
    /// [`COLUMN_SUM_TOLERANCE`] of one.
    pub fn new<L1, L2>(effect_labels: L1, cause_labels: L2, entries: DMatrix<f64>) -> Result<Self>
    where
        L1: IntoIterator,
        L1::Item: Into<String>,
        L2: IntoIterator,
        L2::Item: Into<String>,
    {
        let effect_labels: Vec<String> = effect_labels.into_iter().map(Into::into).collect();
        let cause_labels: Vec<String> = cause_labels.into_iter().map(Into::into).collect();
        check_label_block("effect", &effect_labels, entries.nrows())?;
        check_label_block("cause", &cause_labels, entries.ncols())?;
        for j in 0..entries.ncols() {
            let mut sum = 0.0;
            for i in 0..entries.nrows() {
                let v = entries[(i, j)];
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(Error::validation(format!(
                        "entry ({i}, {j}) = {v} is not a probability"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > COLUMN_SUM_TOLERANCE {
                return Err(Error::validation(format!(
                    "column {:?} sums to {sum}, off from 1 by more than {COLUMN_SUM_TOLERANCE}",
                    cause_labels[j]
                )));
            }
        }
        Ok(Cpt {
            effect_labels,
            cause_labels,
            entries,
            cause_arity_profile: None,
        })
    }

    /// Builds a table from raw columns with input hygiene: tiny negatives
    /// (within `tolerance`) are clamped and each column is renormalised.
    ///
    /// Published tables rounded to a few decimals rarely sum to exactly one
    /// per column; this constructor accepts them.
    pub fn normalized<L1, L2>(
        effect_labels: L1,
        cause_labels: L2,
        entries: DMatrix<f64>,
        tolerance: f64,
    ) -> Result<Self>
    where
        L1: IntoIterator,
        L1::Item: Into<String>,
        L2: IntoIterator,
        L2::Item: Into<String>,
    {
        let mut entries = entries;
        for j in 0..entries.ncols() {
            let mut sum = 0.0;
            for i in 0..entries.nrows() {
                let v = entries[(i, j)];
                if !v.is_finite() || v < -tolerance || v > 1.0 + tolerance {
                    return Err(Error::validation(format!(
                        "entry ({i}, {j}) = {v} is out of range for tolerance {tolerance}"
                    )));
                }
                let v = v.clamp(0.0, 1.0);
                entries[(i, j)] = v;
                sum += v;
            }
            if (sum - 1.0).abs() > tolerance {
                return Err(Error::validation(format!(
                    "column {j} sums to {sum}, off from 1 by more than {tolerance}"
                )));
            }
            for i in 0..entries.nrows() {
                entries[(i, j)] /= sum;
            }
        }
        Cpt::new(effect_labels, cause_labels, entries)
    }

    /// Attaches the per-parent arity profile. The product of the arities
    /// must equal the number of columns.
    pub fn with_arity_profile(mut self, profile: Vec<usize>) -> Result<Self> {
        let product: usize = profile.iter().product();
        if profile.is_empty() || product != self.cols() {
            return Err(Error::Dimension {
                what: "arity profile product vs cause states",
                expected: self.cols(),
                actual: product,
            });
        }
        self.cause_arity_profile = Some(profile);
        Ok(self)
    }

    /// The identity table over one node's states: each cause state maps to
    /// the effect state of the same index.
    pub fn identity<L, I>(labels: I) -> Result<Self>
    where
        L: Into<String> + Clone,
        I: IntoIterator<Item = L>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        Cpt::new(
            labels.clone(),
            labels,
            DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 }),
        )
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn effect_labels(&self) -> &[String] {
        &self.effect_labels
    }

    pub fn cause_labels(&self) -> &[String] {
        &self.cause_labels
    }

    pub fn cause_arity_profile(&self) -> Option<&[usize]> {
        self.cause_arity_profile.as_deref()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn entry(&self, effect: usize, cause: usize) -> f64 {
        self.entries[(effect, cause)]
    }

    /// One column as a plain vector, bit-for-bit as stored.
    pub fn column(&self, cause: usize) -> Vec<f64> {
        self.entries.column(cause).iter().copied().collect()
    }

    /// One column as a probability vector over the effect states,
    /// preserving the stored values exactly.
    pub fn column_vector(&self, cause: usize) -> ProbVector {
        ProbVector::from_normalized(self.effect_labels.clone(), self.column(cause))
    }
}

/// A joint probability table P(Z, X): all entries sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    effect_labels: Vec<String>,
    cause_labels: Vec<String>,
    entries: DMatrix<f64>,
}

impl JointTable {
    pub fn new(
        effect_labels: Vec<String>,
        cause_labels: Vec<String>,
        entries: DMatrix<f64>,
    ) -> Result<Self> {
        check_label_block("effect", &effect_labels, entries.nrows())?;
        check_label_block("cause", &cause_labels, entries.ncols())?;
        let mut total = 0.0;
        for &v in entries.iter() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(format!(
                    "joint entry {v} is not a probability"
                )));
            }
            total += v;
        }
        if (total - 1.0).abs() > COLUMN_SUM_TOLERANCE {
            return Err(Error::validation(format!(
                "joint table sums to {total}, off from 1 by more than {COLUMN_SUM_TOLERANCE}"
            )));
        }
        Ok(JointTable {
            effect_labels,
            cause_labels,
            entries,
        })
    }

    pub fn effect_labels(&self) -> &[String] {
        &self.effect_labels
    }

    pub fn cause_labels(&self) -> &[String] {
        &self.cause_labels
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn entry(&self, effect: usize, cause: usize) -> f64 {
        self.entries[(effect, cause)]
    }
}

fn check_label_block(what: &str, labels: &[String], expected: usize) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::validation(format!(
            "{what} labels must not be empty"
        )));
    }
    if labels.len() != expected {
        return Err(Error::Dimension {
            what: "label count vs matrix dimension",
            expected,
            actual: labels.len(),
        });
    }
    for (i, label) in labels.iter().enumerate() {
        if label.is_empty() {
            return Err(Error::validation(format!(
                "{what} state {i} has an empty label"
            )));
        }
        if labels[..i].contains(label) {
            return Err(Error::validation(format!(
                "duplicate {what} state label {label:?}"
            )));
        }
    }
    Ok(())
}
