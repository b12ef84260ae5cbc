//! Parsing and resolution of `--evidence` arguments.
//!
//! Evidence items must be given in parent order, one per parent. A value of
//! the form `p1,p2,..` is soft evidence; anything else is a hard state
//! label. Hard labels are resolved against the combined cause labels of the
//! table: all-hard evidence concatenates the labels and selects the
//! matching column directly, while mixed evidence maps each hard label to
//! its parent state by substring matching against the combined labels.

use cptgen::error::{Error, Result};
use cptgen::prob::{effects_from_evidence, Evidence, EvidenceKind};
use cptgen::{Cpt, ProbVector};

#[derive(Debug, Clone)]
pub enum EvidenceSpec {
    Hard(String),
    Soft(Vec<f64>),
}

/// Parses one `node=value` argument.
pub fn parse_evidence(arg: &str) -> Result<(String, EvidenceSpec)> {
    let (node, value) = arg.split_once('=').ok_or_else(|| Error::Validation {
        reason: format!("evidence {arg:?} is not of the form node=state or node=p1,p2,.."),
    })?;
    if node.is_empty() || value.is_empty() {
        return Err(Error::Validation {
            reason: format!("evidence {arg:?} has an empty node or value"),
        });
    }
    let numbers: Option<Vec<f64>> = value
        .split(',')
        .map(|field| field.trim().parse::<f64>().ok())
        .collect();
    match numbers {
        Some(values) => Ok((node.to_string(), EvidenceSpec::Soft(values))),
        None => Ok((node.to_string(), EvidenceSpec::Hard(value.to_string()))),
    }
}

/// Computes the effect distribution for the given evidence.
pub fn infer_effects(
    cpt: &Cpt,
    evidence: &[(String, EvidenceSpec)],
    tolerance: f64,
) -> Result<ProbVector> {
    if evidence.is_empty() {
        return Err(Error::Validation {
            reason: "at least one --evidence item is required".into(),
        });
    }
    if let Some(profile) = cpt.cause_arity_profile() {
        if evidence.len() != profile.len() {
            return Err(Error::Validation {
                reason: format!(
                    "evidence is required for every parent: table has {} parents, got {} items",
                    profile.len(),
                    evidence.len()
                ),
            });
        }
    }

    let all_hard: Option<Vec<&str>> = evidence
        .iter()
        .map(|(_, spec)| match spec {
            EvidenceSpec::Hard(label) => Some(label.as_str()),
            EvidenceSpec::Soft(_) => None,
        })
        .collect();
    if let Some(labels) = all_hard {
        let combined = labels.concat();
        let column = cpt
            .cause_labels()
            .iter()
            .position(|label| *label == combined)
            .ok_or_else(|| Error::Validation {
                reason: format!("unknown evidence combination {combined:?} (check state labels and parent order)"),
            })?;
        return Ok(cpt.column_vector(column));
    }

    let profile = cpt.cause_arity_profile().ok_or_else(|| Error::Validation {
        reason: "soft evidence needs a table with an #arities line".into(),
    })?;
    let items: Vec<Evidence> = evidence
        .iter()
        .enumerate()
        .map(|(parent, (node, spec))| {
            let kind = match spec {
                EvidenceSpec::Hard(label) => {
                    EvidenceKind::Hard(resolve_hard_state(cpt, profile, parent, node, label)?)
                }
                EvidenceSpec::Soft(values) => {
                    if values.len() != profile[parent] {
                        return Err(Error::Validation {
                            reason: format!(
                                "soft evidence for {node} has {} values, parent has {} states",
                                values.len(),
                                profile[parent]
                            ),
                        });
                    }
                    let labels: Vec<String> = (1..=values.len()).map(|i| format!("s{i}")).collect();
                    EvidenceKind::Soft(ProbVector::new(labels, values.clone(), tolerance)?)
                }
            };
            Ok(Evidence { node: parent, kind })
        })
        .collect::<Result<_>>()?;
    effects_from_evidence(cpt, &items)
}

/// Maps a hard state label to its state index within one parent by checking
/// which block of combined labels consistently contains it.
fn resolve_hard_state(
    cpt: &Cpt,
    profile: &[usize],
    parent: usize,
    node: &str,
    label: &str,
) -> Result<usize> {
    let suffix: usize = profile[parent + 1..].iter().product();
    let arity = profile[parent];
    let mut matches = Vec::new();
    for state in 0..arity {
        let consistent = cpt
            .cause_labels()
            .iter()
            .enumerate()
            .filter(|(flat, _)| (flat / suffix) % arity == state)
            .all(|(_, combined)| combined.contains(label));
        if consistent {
            matches.push(state);
        }
    }
    match matches.as_slice() {
        [state] => Ok(*state),
        [] => Err(Error::Validation {
            reason: format!("unknown state label {label:?} for parent {node}"),
        }),
        _ => Err(Error::Validation {
            reason: format!(
                "state label {label:?} for parent {node} is ambiguous; pass soft evidence instead"
            ),
        }),
    }
}
