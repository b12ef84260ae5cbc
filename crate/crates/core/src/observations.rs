//! Paired cause/effect observations for one converging subnet.

use crate::error::{Error, Result};
use crate::prob::ProbVector;

/// One node's block of observed probability vectors, row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeBlock {
    name: String,
    labels: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl NodeBlock {
    /// Validates every row as a probability vector with the given input
    /// tolerance; rows are stored renormalised.
    pub fn new<L, I>(
        name: impl Into<String>,
        labels: I,
        rows: Vec<Vec<f64>>,
        tolerance: f64,
    ) -> Result<Self>
    where
        L: Into<String>,
        I: IntoIterator<Item = L>,
    {
        let name = name.into();
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut stored = Vec::with_capacity(rows.len());
        for (r, row) in rows.into_iter().enumerate() {
            let vector = ProbVector::new(labels.clone(), row, tolerance).map_err(|e| {
                Error::RowValidation {
                    row: r + 1,
                    node: name.clone(),
                    reason: e.to_string(),
                }
            })?;
            stored.push(vector.values().to_vec());
        }
        Ok(NodeBlock {
            name,
            labels,
            rows: stored,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn arity(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row_vector(&self, r: usize) -> ProbVector {
        ProbVector::from_normalized(self.labels.clone(), self.rows[r].clone())
    }

    pub(crate) fn with_rows(&self, rows: Vec<Vec<f64>>) -> NodeBlock {
        NodeBlock {
            name: self.name.clone(),
            labels: self.labels.clone(),
            rows,
        }
    }
}

/// k paired observations of parent probability vectors and one effect
/// probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    parents: Vec<NodeBlock>,
    effect: NodeBlock,
}

impl ObservationSet {
    pub fn new(parents: Vec<NodeBlock>, effect: NodeBlock) -> Result<Self> {
        if parents.is_empty() {
            return Err(Error::validation(
                "an observation set needs at least one parent node",
            ));
        }
        let k = effect.row_count();
        if k == 0 {
            return Err(Error::validation(
                "an observation set needs at least one row",
            ));
        }
        for parent in &parents {
            if parent.row_count() != k {
                return Err(Error::Dimension {
                    what: "parent block row count vs effect block",
                    expected: k,
                    actual: parent.row_count(),
                });
            }
        }
        Ok(ObservationSet { parents, effect })
    }

    pub fn row_count(&self) -> usize {
        self.effect.row_count()
    }

    pub fn parents(&self) -> &[NodeBlock] {
        &self.parents
    }

    pub fn effect(&self) -> &NodeBlock {
        &self.effect
    }

    /// Per-parent state counts, in parent order.
    pub fn arity_profile(&self) -> Vec<usize> {
        self.parents.iter().map(NodeBlock::arity).collect()
    }

    /// Number of combined cause states (product of the parent arities).
    pub fn combined_arity(&self) -> usize {
        self.parents.iter().map(NodeBlock::arity).product()
    }

    /// Labels of the combined cause states, earlier parents varying slower.
    pub fn combined_cause_labels(&self) -> Vec<String> {
        let mut labels = vec![String::new()];
        for parent in &self.parents {
            let mut next = Vec::with_capacity(labels.len() * parent.arity());
            for prefix in &labels {
                for label in parent.labels() {
                    next.push(format!("{prefix}{label}"));
                }
            }
            labels = next;
        }
        labels
    }

    /// Row `r` of the combined cause matrix X: the flattened product of the
    /// parent rows.
    pub fn combined_cause_row(&self, r: usize) -> Vec<f64> {
        let mut values = vec![1.0];
        for parent in &self.parents {
            let row = parent.row(r);
            let mut next = Vec::with_capacity(values.len() * row.len());
            for &acc in &values {
                for &p in row {
                    next.push(acc * p);
                }
            }
            values = next;
        }
        values
    }

    /// Restricts the set to the given row indices, in the given order.
    pub(crate) fn select_rows(&self, keep: &[usize]) -> ObservationSet {
        let pick = |block: &NodeBlock| {
            block.with_rows(keep.iter().map(|&r| block.row(r).to_vec()).collect())
        };
        ObservationSet {
            parents: self.parents.iter().map(pick).collect(),
            effect: pick(&self.effect),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_parent_set() -> ObservationSet {
        let e = NodeBlock::new(
            "E",
            ["e1", "e2"],
            vec![vec![1.0, 0.0], vec![0.3, 0.7]],
            1e-6,
        )
        .unwrap();
        let r = NodeBlock::new(
            "R",
            ["r1", "r2"],
            vec![vec![0.0, 1.0], vec![0.5, 0.5]],
            1e-6,
        )
        .unwrap();
        let d = NodeBlock::new(
            "D",
            ["d1", "d2", "d3"],
            vec![vec![0.2, 0.3, 0.5], vec![1.0, 0.0, 0.0]],
            1e-6,
        )
        .unwrap();
        ObservationSet::new(vec![e, r], d).unwrap()
    }

    #[test]
    fn block_reports_offending_row() {
        let err = NodeBlock::new(
            "E",
            ["e1", "e2"],
            vec![vec![0.5, 0.5], vec![0.9, 0.3]],
            1e-6,
        )
        .unwrap_err();
        match err {
            Error::RowValidation { row, node, .. } => {
                assert_eq!(row, 2);
                assert_eq!(node, "E");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn row_counts_must_agree() {
        let e = NodeBlock::new("E", ["e1", "e2"], vec![vec![0.5, 0.5]], 1e-6).unwrap();
        let d = NodeBlock::new(
            "D",
            ["d1", "d2"],
            vec![vec![0.5, 0.5], vec![1.0, 0.0]],
            1e-6,
        )
        .unwrap();
        assert!(ObservationSet::new(vec![e], d).is_err());
    }

    #[test]
    fn combined_rows_follow_the_ordering_contract() {
        let set = two_parent_set();
        assert_eq!(set.combined_arity(), 4);
        assert_eq!(
            set.combined_cause_labels(),
            ["e1r1", "e1r2", "e2r1", "e2r2"].map(String::from)
        );
        // Row 0: hard (e1, r2) -> combined index 1.
        assert_eq!(set.combined_cause_row(0), vec![0.0, 1.0, 0.0, 0.0]);
        // Row 1: (.3 .7) x (.5 .5).
        let row = set.combined_cause_row(1);
        assert!((row[0] - 0.15).abs() < 1e-15);
        assert!((row[1] - 0.15).abs() < 1e-15);
        assert!((row[2] - 0.35).abs() < 1e-15);
        assert!((row[3] - 0.35).abs() < 1e-15);
    }
}
