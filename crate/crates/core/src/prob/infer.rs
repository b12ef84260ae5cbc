//! Forward and reverse inference on a single converging subnet.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::prob::{combine, Cpt, JointTable, ProbVector};

/// Effect probabilities z = C x for a cause distribution x.
///
/// With hard evidence this selects the matching column bit-for-bit, since
/// the remaining terms contribute exact zeros.
pub fn predict_effects(cpt: &Cpt, cause: &ProbVector) -> Result<ProbVector> {
    if cause.len() != cpt.cols() {
        return Err(Error::Dimension {
            what: "cause states vs table columns",
            expected: cpt.cols(),
            actual: cause.len(),
        });
    }
    let x = cause.values();
    let values = (0..cpt.rows())
        .map(|i| (0..cpt.cols()).map(|j| cpt.entry(i, j) * x[j]).sum())
        .collect();
    Ok(ProbVector::from_normalized(
        cpt.effect_labels().to_vec(),
        values,
    ))
}

/// Joint probability table P(Z, X): entry (i, j) = c_ij * x_j.
pub fn joint_table(cpt: &Cpt, cause: &ProbVector) -> Result<JointTable> {
    if cause.len() != cpt.cols() {
        return Err(Error::Dimension {
            what: "cause states vs table columns",
            expected: cpt.cols(),
            actual: cause.len(),
        });
    }
    let x = cause.values();
    let entries = DMatrix::from_fn(cpt.rows(), cpt.cols(), |i, j| cpt.entry(i, j) * x[j]);
    JointTable::new(
        cpt.effect_labels().to_vec(),
        cpt.cause_labels().to_vec(),
        entries,
    )
}

/// What to do when a reversed column would divide by a zero effect marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroMarginalPolicy {
    /// Fail with [`Error::DegenerateMarginal`]. The 0/0 case has no
    /// principled answer, so this is the default everywhere.
    Fail,
    /// Fill the affected column with the uniform distribution.
    ImputeUniform,
}

/// Reverses a table with Bayes' rule: given P(Z|X) and P(X), returns P(X|Z).
///
/// The joint table is formed first, then each row is divided by the effect
/// marginal it belongs to. The result is an n x m table whose causes are the
/// original effect states.
pub fn reverse_cpt(cpt: &Cpt, cause: &ProbVector, policy: ZeroMarginalPolicy) -> Result<Cpt> {
    let joint = joint_table(cpt, cause)?;
    let marginals: Vec<f64> = (0..cpt.rows())
        .map(|i| (0..cpt.cols()).map(|j| joint.entry(i, j)).sum())
        .collect();
    let n = cpt.cols();
    let mut entries = DMatrix::<f64>::zeros(n, cpt.rows());
    for (i, &marginal) in marginals.iter().enumerate() {
        if marginal == 0.0 {
            match policy {
                ZeroMarginalPolicy::Fail => {
                    return Err(Error::DegenerateMarginal {
                        state: cpt.effect_labels()[i].clone(),
                    })
                }
                ZeroMarginalPolicy::ImputeUniform => {
                    for j in 0..n {
                        entries[(j, i)] = 1.0 / n as f64;
                    }
                }
            }
        } else {
            for j in 0..n {
                entries[(j, i)] = joint.entry(i, j) / marginal;
            }
        }
    }
    Cpt::new(
        cpt.cause_labels().to_vec(),
        cpt.effect_labels().to_vec(),
        entries,
    )
}

/// Evidence on one parent of a converging subnet.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    /// Index of the parent this evidence belongs to.
    pub node: usize,
    pub kind: EvidenceKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvidenceKind {
    /// The parent is observed in exactly one state.
    Hard(usize),
    /// A distribution over the parent's states.
    Soft(ProbVector),
}

impl Evidence {
    pub fn hard(node: usize, state: usize) -> Self {
        Evidence {
            node,
            kind: EvidenceKind::Hard(state),
        }
    }

    pub fn soft(node: usize, vector: ProbVector) -> Self {
        Evidence {
            node,
            kind: EvidenceKind::Soft(vector),
        }
    }
}

/// Effect probabilities from per-parent evidence.
///
/// All-hard evidence selects exactly one column of the table. Mixed evidence
/// is equivalent to combining the evidence vectors and multiplying through
/// the table, which amounts to a convex combination of columns.
pub fn effects_from_evidence(cpt: &Cpt, evidence: &[Evidence]) -> Result<ProbVector> {
    let profile = cpt.cause_arity_profile().ok_or_else(|| {
        Error::validation("table has no cause arity profile; cannot address parents")
    })?;
    if evidence.len() != profile.len() {
        return Err(Error::Dimension {
            what: "evidence items vs parents",
            expected: profile.len(),
            actual: evidence.len(),
        });
    }
    let mut per_parent: Vec<Option<&Evidence>> = vec![None; profile.len()];
    for item in evidence {
        if item.node >= profile.len() {
            return Err(Error::Dimension {
                what: "evidence node index vs parents",
                expected: profile.len(),
                actual: item.node,
            });
        }
        if per_parent[item.node].replace(item).is_some() {
            return Err(Error::validation(format!(
                "parent {} has more than one evidence item",
                item.node
            )));
        }
    }
    let per_parent: Vec<&Evidence> = per_parent.into_iter().map(Option::unwrap).collect();

    for (p, item) in per_parent.iter().enumerate() {
        let arity = profile[p];
        match &item.kind {
            EvidenceKind::Hard(state) if *state >= arity => {
                return Err(Error::Dimension {
                    what: "hard evidence state vs parent arity",
                    expected: arity,
                    actual: *state,
                })
            }
            EvidenceKind::Soft(v) if v.len() != arity => {
                return Err(Error::Dimension {
                    what: "soft evidence length vs parent arity",
                    expected: arity,
                    actual: v.len(),
                })
            }
            _ => {}
        }
    }

    // All parents hard: exactly one column, bit-for-bit.
    let hard_states: Option<Vec<usize>> = per_parent
        .iter()
        .map(|item| match item.kind {
            EvidenceKind::Hard(state) => Some(state),
            EvidenceKind::Soft(_) => None,
        })
        .collect();
    if let Some(states) = hard_states {
        let mut flat = 0;
        for (state, &arity) in states.iter().zip(profile) {
            flat = flat * arity + state;
        }
        return Ok(cpt.column_vector(flat));
    }

    let vectors: Vec<ProbVector> = per_parent
        .iter()
        .enumerate()
        .map(|(p, item)| match &item.kind {
            EvidenceKind::Hard(state) => {
                let labels: Vec<String> = (1..=profile[p]).map(|i| format!("s{i}")).collect();
                ProbVector::hard(labels, *state)
            }
            EvidenceKind::Soft(v) => Ok(v.clone()),
        })
        .collect::<Result<_>>()?;
    let combined = combine(&vectors)?;
    // The combined labels are synthetic; only the values feed the product.
    predict_effects(cpt, &combined)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cpt_2x2() -> Cpt {
        // Columns (1, 0) and (0.5, 0.5).
        let entries = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 0.5]);
        Cpt::new(["z1", "z2"], ["x1", "x2"], entries).unwrap()
    }

    #[test]
    fn identity_cpt_echoes_the_cause() {
        let cpt = Cpt::identity(["a", "b", "c"]).unwrap();
        let x = ProbVector::new(["a", "b", "c"], vec![0.2, 0.3, 0.5], 1e-6).unwrap();
        let z = predict_effects(&cpt, &x).unwrap();
        assert_eq!(z.values(), &[0.2, 0.3, 0.5]);
    }

    #[test]
    fn uniform_cause_yields_row_means() {
        let cpt = cpt_2x2();
        let x = ProbVector::uniform(["x1", "x2"]).unwrap();
        let z = predict_effects(&cpt, &x).unwrap();
        // Row means by direct averaging.
        assert!((z.values()[0] - 0.75).abs() < 1e-15);
        assert!((z.values()[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn predict_rejects_dimension_mismatch() {
        let cpt = cpt_2x2();
        let x = ProbVector::uniform(["a", "b", "c"]).unwrap();
        assert!(matches!(
            predict_effects(&cpt, &x),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn joint_of_identity_and_uniform_is_diagonal() {
        let cpt = Cpt::identity(["a", "b"]).unwrap();
        let x = ProbVector::uniform(["a", "b"]).unwrap();
        let joint = joint_table(&cpt, &x).unwrap();
        assert_eq!(joint.entry(0, 0), 0.5);
        assert_eq!(joint.entry(1, 1), 0.5);
        assert_eq!(joint.entry(0, 1), 0.0);
        assert_eq!(joint.entry(1, 0), 0.0);
    }

    #[test]
    fn joint_with_hard_cause_is_a_single_column() {
        let cpt = cpt_2x2();
        let x = ProbVector::hard(["x1", "x2"], 1).unwrap();
        let joint = joint_table(&cpt, &x).unwrap();
        assert_eq!(joint.entry(0, 0), 0.0);
        assert_eq!(joint.entry(0, 1), 0.5);
        assert_eq!(joint.entry(1, 1), 0.5);
    }

    #[test]
    fn reverse_of_identity_is_identity() {
        let cpt = Cpt::identity(["a", "b"]).unwrap();
        let x = ProbVector::uniform(["a", "b"]).unwrap();
        let rev = reverse_cpt(&cpt, &x, ZeroMarginalPolicy::Fail).unwrap();
        assert_eq!(rev.entry(0, 0), 1.0);
        assert_eq!(rev.entry(1, 1), 1.0);
    }

    #[test]
    fn reverse_matches_hand_bayes_computation() {
        // Joint = ((0.5, 0.25), (0, 0.25)); marginals (0.75, 0.25).
        // P(X|Z=z1) = (2/3, 1/3), P(X|Z=z2) = (0, 1).
        let cpt = cpt_2x2();
        let x = ProbVector::uniform(["x1", "x2"]).unwrap();
        let rev = reverse_cpt(&cpt, &x, ZeroMarginalPolicy::Fail).unwrap();
        assert!((rev.entry(0, 0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((rev.entry(1, 0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((rev.entry(0, 1) - 0.0).abs() < 1e-12);
        assert!((rev.entry(1, 1) - 1.0).abs() < 1e-12);
        assert_eq!(rev.cause_labels(), cpt_2x2().effect_labels());
    }

    #[test]
    fn reverse_fails_or_imputes_on_zero_marginal() {
        // Effect state z2 is unreachable under this cause.
        let cpt = cpt_2x2();
        let x = ProbVector::hard(["x1", "x2"], 0).unwrap();
        let err = reverse_cpt(&cpt, &x, ZeroMarginalPolicy::Fail).unwrap_err();
        assert!(matches!(err, Error::DegenerateMarginal { .. }), "{err}");

        let rev = reverse_cpt(&cpt, &x, ZeroMarginalPolicy::ImputeUniform).unwrap();
        assert_eq!(rev.entry(0, 1), 0.5);
        assert_eq!(rev.entry(1, 1), 0.5);
    }

    #[test]
    fn all_hard_evidence_selects_one_column_exactly() {
        let entries = DMatrix::from_row_slice(2, 4, &[0.1, 0.2, 0.3, 0.4, 0.9, 0.8, 0.7, 0.6]);
        let cpt = Cpt::new(["z1", "z2"], ["a1b1", "a1b2", "a2b1", "a2b2"], entries)
            .unwrap()
            .with_arity_profile(vec![2, 2])
            .unwrap();
        let z = effects_from_evidence(&cpt, &[Evidence::hard(0, 1), Evidence::hard(1, 0)]).unwrap();
        assert_eq!(z.values()[0].to_bits(), 0.3f64.to_bits());
        assert_eq!(z.values()[1].to_bits(), 0.7f64.to_bits());
    }

    #[test]
    fn mixed_evidence_matches_combine_then_predict() {
        let entries = DMatrix::from_row_slice(2, 4, &[0.1, 0.2, 0.3, 0.4, 0.9, 0.8, 0.7, 0.6]);
        let cpt = Cpt::new(["z1", "z2"], ["a1b1", "a1b2", "a2b1", "a2b2"], entries)
            .unwrap()
            .with_arity_profile(vec![2, 2])
            .unwrap();
        let soft = ProbVector::new(["b1", "b2"], vec![0.25, 0.75], 1e-6).unwrap();
        let via_evidence = effects_from_evidence(
            &cpt,
            &[Evidence::hard(0, 0), Evidence::soft(1, soft.clone())],
        )
        .unwrap();
        let combined = combine(&[ProbVector::hard(["a1", "a2"], 0).unwrap(), soft]).unwrap();
        let direct = predict_effects(&cpt, &combined).unwrap();
        assert_eq!(via_evidence.values(), direct.values());
    }

    #[test]
    fn evidence_errors() {
        let cpt = cpt_2x2();
        // No arity profile attached.
        assert!(effects_from_evidence(&cpt, &[Evidence::hard(0, 0)]).is_err());

        let cpt = cpt.with_arity_profile(vec![2]).unwrap();
        // Wrong number of items.
        assert!(effects_from_evidence(&cpt, &[]).is_err());
        // State out of range.
        assert!(matches!(
            effects_from_evidence(&cpt, &[Evidence::hard(0, 5)]),
            Err(Error::Dimension { .. })
        ));
    }
}
