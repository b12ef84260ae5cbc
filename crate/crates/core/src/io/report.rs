//! Emission of goodness reports and plot data.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::goodness::GoodnessReport;
use crate::io::observations::format_value;
use crate::prob::ProbVector;

/// Formats a fraction as a percentage with two decimals, e.g. `92.86%`.
pub fn format_percent(value: f64) -> String {
    if value.is_infinite() {
        return if value > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    format!("{:.2}%", value * 100.0)
}

/// Writes the key/value report, percentages with two decimals.
pub fn write_report(report: &GoodnessReport, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("observation_count,{}\n", report.observation_count));
    out.push_str(&format!(
        "diagnostic_goodness,{}\n",
        format_percent(report.diagnostic_goodness)
    ));
    out.push_str(&format!(
        "diagnostic_error,{}\n",
        format_percent(report.diagnostic_error)
    ));
    out.push_str(&format!(
        "mean_absolute_error,{}\n",
        format_percent(report.mean_absolute_error)
    ));
    out.push_str(&format!(
        "total_average_shift_error,{}\n",
        format_percent(report.total_average_shift_error)
    ));
    for (label, error) in report.effect_labels.iter().zip(&report.state_errors) {
        out.push_str(&format!("state_error_{label},{}\n", format_percent(*error)));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes the per-observation shift errors and the paired observed and
/// predicted effect rows next to the report, for bar-chart rendering.
/// Returns the two file paths.
pub fn write_plot_data(
    report: &GoodnessReport,
    observed: &[Vec<f64>],
    predicted: &[ProbVector],
    report_path: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let errors_path = sibling(report_path, "effect_errors");
    let pairs_path = sibling(report_path, "effect_pairs");

    let mut errors = String::from("observation,shift_error\n");
    for (i, delta) in report.per_observation_errors.iter().enumerate() {
        errors.push_str(&format!("{},{}\n", i + 1, format_value(*delta)));
    }
    fs::write(&errors_path, errors)?;

    let mut pairs = String::from("observation,source");
    for label in &report.effect_labels {
        pairs.push(',');
        pairs.push_str(label);
    }
    pairs.push('\n');
    for (i, (row, prediction)) in observed.iter().zip(predicted).enumerate() {
        pairs.push_str(&format!("{},observed", i + 1));
        for &v in row {
            pairs.push(',');
            pairs.push_str(&format_value(v));
        }
        pairs.push('\n');
        pairs.push_str(&format!("{},predicted", i + 1));
        for &v in prediction.values() {
            pairs.push(',');
            pairs.push_str(&format_value(v));
        }
        pairs.push('\n');
    }
    fs::write(&pairs_path, pairs)?;
    Ok((errors_path, pairs_path))
}

fn sibling(report_path: &Path, suffix: &str) -> PathBuf {
    let stem = report_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    report_path.with_file_name(format!("{stem}_{suffix}.csv"))
}
