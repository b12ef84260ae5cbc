//! Turning an unconstrained basis into a proper probability table.
//!
//! Two per-column repairs are provided. Boundary limitation clamps every
//! entry into [0, 1] and renormalises. Potential surge translates a column
//! with negative entries upwards by its minimum and renormalises, keeping
//! the relative spacing of the entries instead of flattening everything
//! below zero.

use nalgebra::DMatrix;

use crate::generate::CptBasis;
use crate::prob::Cpt;

/// How a column had to be altered to become a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnFix {
    /// Entries outside [0, 1] were clamped before renormalising.
    Clamped,
    /// The column was translated by its negative minimum before
    /// renormalising.
    Shifted,
    /// The column carried no usable mass and was set uniform.
    Uniform,
}

/// A repaired table plus the per-column adjustments that were necessary.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairedCpt {
    pub cpt: Cpt,
    /// (column index, fix) for every column that needed one.
    pub fixes: Vec<(usize, ColumnFix)>,
}

/// Boundary limitation: clamp each column into [0, 1], renormalise, and
/// fall back to potential surge for all-negative columns (clamping those
/// would erase the column entirely). A column that still carries no mass
/// becomes uniform.
pub fn boundary_limitation(basis: &CptBasis) -> RepairedCpt {
    repair(basis, |column| {
        if column.iter().all(|&v| v < 0.0) {
            return surge_column(column);
        }
        let clamped_any = column.iter().any(|&v| !(0.0..=1.0).contains(&v));
        let mut fixed: Vec<f64> = column.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let sum: f64 = fixed.iter().sum();
        if sum == 0.0 {
            return uniform_column(column.len());
        }
        for v in &mut fixed {
            *v /= sum;
        }
        (fixed, clamped_any.then_some(ColumnFix::Clamped))
    })
}

/// Potential surge: translate columns with negative entries into the
/// positive range by the negative of their minimum, then renormalise.
/// Columns without negative entries are only renormalised. A column that is
/// all zeros after the shift (all entries equal) becomes uniform.
pub fn potential_surge(basis: &CptBasis) -> RepairedCpt {
    repair(basis, surge_column)
}

fn repair(
    basis: &CptBasis,
    fix_column: impl Fn(&[f64]) -> (Vec<f64>, Option<ColumnFix>),
) -> RepairedCpt {
    let (m, n) = (basis.rows(), basis.cols());
    let mut entries = DMatrix::<f64>::zeros(m, n);
    let mut fixes = Vec::new();
    for j in 0..n {
        let column: Vec<f64> = (0..m).map(|i| basis.entry(i, j)).collect();
        let (fixed, fix) = fix_column(&column);
        if let Some(fix) = fix {
            fixes.push((j, fix));
        }
        for (i, v) in fixed.into_iter().enumerate() {
            entries[(i, j)] = v;
        }
    }
    let cpt = Cpt::new(
        basis.effect_labels().to_vec(),
        basis.cause_labels().to_vec(),
        entries,
    )
    .expect("repaired columns are normalised by construction");
    let cpt = match basis.cause_arity_profile() {
        Some(profile) => cpt
            .with_arity_profile(profile.to_vec())
            .expect("basis profile matches its column count"),
        None => cpt,
    };
    RepairedCpt { cpt, fixes }
}

fn surge_column(column: &[f64]) -> (Vec<f64>, Option<ColumnFix>) {
    let min = column.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted = min < 0.0;
    let mut fixed: Vec<f64> = if shifted {
        column.iter().map(|v| v - min).collect()
    } else {
        column.to_vec()
    };
    let sum: f64 = fixed.iter().sum();
    if sum == 0.0 {
        return uniform_column(column.len());
    }
    for v in &mut fixed {
        *v /= sum;
    }
    (fixed, shifted.then_some(ColumnFix::Shifted))
}

fn uniform_column(m: usize) -> (Vec<f64>, Option<ColumnFix>) {
    (vec![1.0 / m as f64; m], Some(ColumnFix::Uniform))
}
