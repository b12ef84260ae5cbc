//! Maximum likelihood estimation by relative frequencies.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::observations::ObservationSet;
use crate::prob::Cpt;

/// A counted table plus the cause states that were never observed; those
/// columns are uniform placeholders rather than estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct MleCpt {
    pub cpt: Cpt,
    pub empty_columns: Vec<usize>,
}

/// Relative-frequency estimate P(z_i | x_j) = N(z_i, x_j) / N(x_j).
///
/// Counting needs hard evidence. With `rounding` set, soft rows are first
/// snapped to their most probable state (ties resolved to the lowest state
/// index); without it a soft row is an error. Cause states with no
/// occurrences get a uniform column and are reported in `empty_columns`.
pub fn mle_cpt(observations: &ObservationSet, rounding: bool) -> Result<MleCpt> {
    let n = observations.combined_arity();
    let m = observations.effect().arity();
    let k = observations.row_count();

    let mut cause_counts = vec![0.0_f64; n];
    let mut joint_counts = DMatrix::<f64>::zeros(m, n);
    for r in 0..k {
        let mut flat = 0;
        for parent in observations.parents() {
            let state = observed_state(parent.row(r), rounding).ok_or(Error::SoftEvidence {
                row: r + 1,
                node: parent.name().to_string(),
            })?;
            flat = flat * parent.arity() + state;
        }
        let effect =
            observed_state(observations.effect().row(r), rounding).ok_or(Error::SoftEvidence {
                row: r + 1,
                node: observations.effect().name().to_string(),
            })?;
        cause_counts[flat] += 1.0;
        joint_counts[(effect, flat)] += 1.0;
    }

    let mut empty_columns = Vec::new();
    let mut entries = DMatrix::<f64>::zeros(m, n);
    for (j, &count) in cause_counts.iter().enumerate() {
        if count == 0.0 {
            empty_columns.push(j);
            for i in 0..m {
                entries[(i, j)] = 1.0 / m as f64;
            }
        } else {
            for i in 0..m {
                entries[(i, j)] = joint_counts[(i, j)] / count;
            }
        }
    }

    let cpt = Cpt::new(
        observations.effect().labels().to_vec(),
        observations.combined_cause_labels(),
        entries,
    )?
    .with_arity_profile(observations.arity_profile())?;
    Ok(MleCpt { cpt, empty_columns })
}

/// The state a row pins down: its hard state, or with `rounding` the argmax.
fn observed_state(row: &[f64], rounding: bool) -> Option<usize> {
    if rounding {
        let mut best = 0;
        for (i, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = i;
            }
        }
        return Some(best);
    }
    let mut hit = None;
    for (i, &v) in row.iter().enumerate() {
        if v == 1.0 {
            hit = Some(i);
        } else if v != 0.0 {
            return None;
        }
    }
    hit
}
