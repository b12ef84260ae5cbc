//! Building a table by probing a predictor with canonical hard evidence.
//!
//! Any function that maps a cause distribution to an effect distribution
//! determines a table: evaluating it at every hard-evidence vector yields
//! the columns one by one. Applied to a fitted logit this turns the
//! regression into a table usable inside a Bayesian network.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::prob::{Cpt, ProbVector};

/// Extracts the table of `predictor` by evaluating it at each canonical
/// hard-evidence vector over `cause_labels`. Column i is the predictor's
/// output for hard state i, stored without renormalisation.
pub fn extract_cpt<F>(mut predictor: F, cause_labels: &[String]) -> Result<Cpt>
where
    F: FnMut(&ProbVector) -> Result<ProbVector>,
{
    if cause_labels.is_empty() {
        return Err(Error::validation(
            "extraction needs at least one cause state",
        ));
    }
    let n = cause_labels.len();
    let mut effect_labels: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let hard = ProbVector::hard(cause_labels.to_vec(), i)?;
        let output = predictor(&hard).map_err(|e| Error::PredictorRange {
            column: i,
            reason: e.to_string(),
        })?;
        match &effect_labels {
            None => effect_labels = Some(output.labels().to_vec()),
            Some(labels) if labels.as_slice() != output.labels() => {
                return Err(Error::PredictorRange {
                    column: i,
                    reason: "effect states differ from earlier columns".into(),
                })
            }
            Some(_) => {}
        }
        columns.push(output.values().to_vec());
    }
    let effect_labels = effect_labels.expect("n >= 1");
    let m = effect_labels.len();
    let entries = DMatrix::from_fn(m, n, |i, j| columns[j][i]);
    Cpt::new(effect_labels, cause_labels.to_vec(), entries).map_err(|e| match e {
        Error::Validation { reason } => Error::PredictorRange { column: 0, reason },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::predict_effects;

    #[test]
    fn extraction_inverts_prediction_exactly() {
        let entries =
            DMatrix::from_row_slice(2, 3, &[0.1118, 0.3407, 0.447, 0.8882, 0.6593, 0.553]);
        let cpt = Cpt::new(["z1", "z2"], ["x1", "x2", "x3"], entries).unwrap();
        let extracted = extract_cpt(|x| predict_effects(&cpt, x), cpt.cause_labels()).unwrap();
        assert_eq!(extracted.entries(), cpt.entries());
        assert_eq!(extracted.effect_labels(), cpt.effect_labels());
    }

    #[test]
    fn predictor_errors_are_wrapped_with_the_column() {
        let err = extract_cpt(
            |_| Err(Error::validation("boom")),
            &["x1".to_string(), "x2".to_string()],
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::PredictorRange { column: 0, .. }),
            "{err}"
        );
    }

    #[test]
    fn inconsistent_effect_states_are_rejected() {
        let mut calls = 0;
        let err = extract_cpt(
            move |_| {
                calls += 1;
                let labels: Vec<String> = if calls == 1 {
                    vec!["a".into(), "b".into()]
                } else {
                    vec!["a".into(), "c".into()]
                };
                Ok(ProbVector::uniform(labels).unwrap())
            },
            &["x1".to_string(), "x2".to_string()],
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::PredictorRange { column: 1, .. }),
            "{err}"
        );
    }
}
