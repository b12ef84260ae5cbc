//! The `#cpt v1` table file format.
//!
//! Layout, one record per line, comma separated, LF written and CRLF
//! accepted:
//!
//! ```text
//! #cpt v1
//! e1r1,e1r2,..            cause labels
//! #arities 3,3             optional parent arity profile
//! d1,0.1118..,..           one row per effect state: label then n values
//! ```
//!
//! Values are written with 17 significant digits, so a save/load round
//! trip reproduces every probability bit for bit.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::io::observations::format_value;
use crate::prob::Cpt;

const MAGIC: &str = "#cpt v1";
const ARITIES_PREFIX: &str = "#arities ";

pub fn save_cpt(cpt: &Cpt, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&cpt.cause_labels().join(","));
    out.push('\n');
    if let Some(profile) = cpt.cause_arity_profile() {
        out.push_str(ARITIES_PREFIX);
        out.push_str(
            &profile
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    for i in 0..cpt.rows() {
        out.push_str(&cpt.effect_labels()[i]);
        for j in 0..cpt.cols() {
            out.push(',');
            out.push_str(&format_value(cpt.entry(i, j)));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_cpt(path: &Path) -> Result<Cpt> {
    let content = fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        reason: e.to_string(),
    })?;
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };

    let mut lines = content
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate();
    let (_, magic) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    if magic != MAGIC {
        return Err(parse_err(1, format!("expected {MAGIC:?}, found {magic:?}")));
    }
    let (_, label_line) = lines
        .next()
        .ok_or_else(|| parse_err(2, "missing cause labels".into()))?;
    let cause_labels: Vec<String> = label_line.split(',').map(str::to_string).collect();
    let n = cause_labels.len();

    let mut arities: Option<Vec<usize>> = None;
    let mut rows: Vec<(usize, String, Vec<f64>)> = Vec::new();
    for (index, line) in lines {
        let lineno = index + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(spec) = line.strip_prefix(ARITIES_PREFIX) {
            if !rows.is_empty() || arities.is_some() {
                return Err(parse_err(lineno, "misplaced #arities line".into()));
            }
            let parsed: std::result::Result<Vec<usize>, _> =
                spec.split(',').map(|s| s.trim().parse()).collect();
            arities = Some(
                parsed.map_err(|_| parse_err(lineno, format!("cannot parse arities {spec:?}")))?,
            );
            continue;
        }
        let mut fields = line.split(',');
        let label = fields.next().expect("split yields at least one field");
        let values: Vec<f64> = fields
            .map(|field| {
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(lineno, format!("cannot parse probability {field:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != n {
            return Err(parse_err(
                lineno,
                format!("expected {n} probabilities, found {}", values.len()),
            ));
        }
        rows.push((lineno, label.to_string(), values));
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no effect rows".into()));
    }

    let m = rows.len();
    let effect_labels: Vec<String> = rows.iter().map(|(_, label, _)| label.clone()).collect();
    let entries = DMatrix::from_fn(m, n, |i, j| rows[i].2[j]);
    let mut cpt = Cpt::new(effect_labels, cause_labels, entries)?;
    if let Some(profile) = arities {
        cpt = cpt.with_arity_profile(profile)?;
    }
    Ok(cpt)
}
