//! Least-squares estimation of an unconstrained table basis.
//!
//! Stacking the k combined cause rows into X (k x n) and the effect rows
//! into Z (k x m), the conditional mean of z given x is estimated by the
//! normal equations B = (X'X)^-1 X'Z. The transpose of B is an m x n basis
//! whose entries may leave [0, 1]; the repair methods turn it into a proper
//! table.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::observations::ObservationSet;

/// An unconstrained m x n table estimate: finite entries, but not
/// necessarily probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CptBasis {
    effect_labels: Vec<String>,
    cause_labels: Vec<String>,
    entries: DMatrix<f64>,
    cause_arity_profile: Option<Vec<usize>>,
}

impl CptBasis {
    pub fn new(
        effect_labels: Vec<String>,
        cause_labels: Vec<String>,
        entries: DMatrix<f64>,
    ) -> Result<Self> {
        if effect_labels.len() != entries.nrows() || cause_labels.len() != entries.ncols() {
            return Err(Error::Dimension {
                what: "basis labels vs matrix shape",
                expected: effect_labels.len() * cause_labels.len(),
                actual: entries.nrows() * entries.ncols(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("basis entries must be finite"));
        }
        Ok(CptBasis {
            effect_labels,
            cause_labels,
            entries,
            cause_arity_profile: None,
        })
    }

    pub fn with_arity_profile(mut self, profile: Vec<usize>) -> Self {
        self.cause_arity_profile = Some(profile);
        self
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
}

/// Least-squares table basis from observations.
///
/// Solves the normal equations (X'X + ridge I) B = X'Z by Cholesky
/// factorisation, with one step of iterative refinement to keep the
/// residual X'(Z - XB) at working precision. With `ridge = 0` a rank
/// deficient X is reported as [`Error::SingularMatrix`]; a small positive
/// ridge regularises such systems instead.
pub fn cpt_basis_least_squares(observations: &ObservationSet, ridge: f64) -> Result<CptBasis> {
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::validation("ridge must be finite and >= 0"));
    }
    let k = observations.row_count();
    let n = observations.combined_arity();
    let m = observations.effect().arity();

    let x = DMatrix::from_fn(k, n, {
        let rows: Vec<Vec<f64>> = (0..k).map(|r| observations.combined_cause_row(r)).collect();
        move |r, j| rows[r][j]
    });
    let z = DMatrix::from_fn(k, m, |r, i| observations.effect().row(r)[i]);

    let xtx = x.transpose() * &x;
    let xtz = x.transpose() * &z;
    let mut normal = xtx.clone();
    for j in 0..n {
        normal[(j, j)] += ridge;
    }
    let chol = Factor::new(&normal).ok_or(Error::SingularMatrix)?;
    let mut b = chol.solve(&xtz);
    // One refinement step; for well-posed systems this pushes the residual
    // orthogonality down to rounding noise.
    let residual = &xtz - &normal * &b;
    b += chol.solve(&residual);

    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    let basis = CptBasis::new(
        observations.effect().labels().to_vec(),
        observations.combined_cause_labels(),
        b.transpose(),
    )?;
    Ok(basis.with_arity_profile(observations.arity_profile()))
}

/// Cholesky factor with an explicit rank check: a pivot that falls below
/// `PIVOT_TOLERANCE` relative to the largest diagonal entry means the
/// normal matrix is numerically singular. The stock factorisation happily
/// absorbs rounding noise on exactly rank-deficient systems, which must be
/// reported instead.
struct Factor {
    lower: DMatrix<f64>,
}

const PIVOT_TOLERANCE: f64 = 1e-12;

impl Factor {
    fn new(matrix: &DMatrix<f64>) -> Option<Factor> {
        let n = matrix.nrows();
        let max_diag = (0..n).map(|i| matrix[(i, i)]).fold(0.0_f64, f64::max);
        let threshold = PIVOT_TOLERANCE * max_diag.max(f64::MIN_POSITIVE);
        let mut lower = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut pivot = matrix[(j, j)];
            for k in 0..j {
                pivot -= lower[(j, k)] * lower[(j, k)];
            }
            if pivot.is_nan() || pivot <= threshold {
                return None;
            }
            let root = pivot.sqrt();
            lower[(j, j)] = root;
            for i in j + 1..n {
                let mut value = matrix[(i, j)];
                for k in 0..j {
                    value -= lower[(i, k)] * lower[(j, k)];
                }
                lower[(i, j)] = value / root;
            }
        }
        Some(Factor { lower })
    }

    fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.lower.nrows();
        let mut out = rhs.clone();
        for col in 0..out.ncols() {
            for i in 0..n {
                let mut value = out[(i, col)];
                for k in 0..i {
                    value -= self.lower[(i, k)] * out[(k, col)];
                }
                out[(i, col)] = value / self.lower[(i, i)];
            }
            for i in (0..n).rev() {
                let mut value = out[(i, col)];
                for k in i + 1..n {
                    value -= self.lower[(k, i)] * out[(k, col)];
                }
                out[(i, col)] = value / self.lower[(i, i)];
            }
        }
        out
    }
}
