//! Combining independent parent distributions into one vector and back.
//!
//! A converging subnet (several parents, one child) is equivalent to a
//! simple two-node net whose single parent ranges over all combinations of
//! the original parent states. The combine operator performs that flattening
//! by repeated outer products; earlier parents vary slower, so the combined
//! entry for states `(i1, .., ik)` sits at the mixed-radix index
//! `((i1 * n2 + i2) * n3 + ..)`. Combined labels are the concatenated state
//! labels, e.g. `e1r1, e1r2, ..`.

use crate::error::{Error, Result};
use crate::prob::ProbVector;

/// Flattens one or more independent parent distributions into a single
/// distribution over the combined states.
pub fn combine(parents: &[ProbVector]) -> Result<ProbVector> {
    if parents.is_empty() {
        return Err(Error::validation("combine needs at least one parent"));
    }
    let mut values: Vec<f64> = parents[0].values().to_vec();
    let mut labels: Vec<String> = parents[0].labels().to_vec();
    for parent in &parents[1..] {
        let mut next_values = Vec::with_capacity(values.len() * parent.len());
        let mut next_labels = Vec::with_capacity(values.len() * parent.len());
        for (acc_label, &acc) in labels.iter().zip(&values) {
            for (label, &p) in parent.labels().iter().zip(parent.values()) {
                next_values.push(acc * p);
                next_labels.push(format!("{acc_label}{label}"));
            }
        }
        values = next_values;
        labels = next_labels;
    }
    for (i, label) in labels.iter().enumerate() {
        if labels[..i].contains(label) {
            return Err(Error::validation(format!(
                "combined state label {label:?} is not unique; rename the parent states"
            )));
        }
    }
    Ok(ProbVector::from_normalized(labels, values))
}

/// Recovers the per-parent marginals from a combined distribution.
///
/// This inverts [`combine`] whenever the combined vector is a product of
/// independent parents. For non-product vectors the marginals are still
/// returned, but combining them again will not reproduce the input.
/// Concatenated labels cannot be split back reliably, so each output uses
/// positional labels `s1, s2, ..`.
pub fn split_combined(combined: &ProbVector, arities: &[usize]) -> Result<Vec<ProbVector>> {
    let product: usize = arities.iter().product();
    if arities.is_empty() || product != combined.len() {
        return Err(Error::Dimension {
            what: "arity product vs combined length",
            expected: combined.len(),
            actual: product,
        });
    }
    if arities.contains(&0) {
        return Err(Error::validation("arities must be positive"));
    }
    let values = combined.values();
    let mut suffix = product;
    let mut out = Vec::with_capacity(arities.len());
    for &arity in arities {
        suffix /= arity;
        let mut marginal = vec![0.0; arity];
        for (flat, &v) in values.iter().enumerate() {
            marginal[(flat / suffix) % arity] += v;
        }
        let labels = (1..=arity).map(|i| format!("s{i}")).collect();
        out.push(ProbVector::from_normalized(labels, marginal));
    }
    Ok(out)
}
