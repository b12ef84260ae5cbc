//! Conditional probability table generation for converging Bayesian subnets.
//!
//! A converging subnet is one effect node with one or more parent cause
//! nodes. Its conditional probability table (CPT) is a column-stochastic
//! m x n matrix, one column per combined cause state. This crate builds
//! such tables from paired cause/effect observations, which may be soft
//! evidence (probability vectors rather than single states), and scores
//! the results:
//!
//! * [`prob`] - probability vectors, tables, the combine operator and
//!   forward/reverse inference;
//! * [`generate`] - the generation routes: relative-frequency counting,
//!   expectation-maximisation, a least-squares basis repaired by boundary
//!   limitation or potential surge, and column extraction from a fitted
//!   multinomial logit;
//! * [`goodness`] - shift errors, diagnostic goodness and table
//!   comparison measures;
//! * [`io`] - the observation CSV format, the `#cpt v1` table format, and
//!   report emission.

pub mod error;
pub mod generate;
pub mod goodness;
pub mod io;
pub mod observations;
pub mod prob;

pub use error::{Error, Result};
pub use observations::{NodeBlock, ObservationSet};
pub use prob::{Cpt, Evidence, EvidenceKind, JointTable, ProbVector};
