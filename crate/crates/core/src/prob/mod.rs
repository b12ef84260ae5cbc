//! Probability vectors, conditional probability tables and the inference
//! operations of a single converging subnet.

mod combine;
mod cpt;
mod infer;
mod vector;

pub use combine::{combine, split_combined};
pub use cpt::{Cpt, JointTable, COLUMN_SUM_TOLERANCE};
pub use infer::{
    effects_from_evidence, joint_table, predict_effects, reverse_cpt, Evidence, EvidenceKind,
    ZeroMarginalPolicy,
};
pub use vector::{ProbVector, INPUT_TOLERANCE};
