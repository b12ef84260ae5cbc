//! The table generation routes: counting, expectation-maximisation,
//! least-squares basis with probability repair, and column extraction from
//! fitted predictors.

mod em;
mod extract;
mod least_squares;
mod logit;
mod mle;
mod repair;

pub use em::{em_cpt, EmConfig, EmFit, EmInit};
pub use extract::extract_cpt;
pub use least_squares::{cpt_basis_least_squares, CptBasis};
pub use logit::{
    fit_multinomial_logit, logit_predict, penalized_gradient, penalized_log_likelihood, LogitModel,
};
pub use mle::{mle_cpt, MleCpt};
pub use repair::{boundary_limitation, potential_surge, ColumnFix, RepairedCpt};
