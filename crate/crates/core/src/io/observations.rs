//! CSV ingestion and emission of observation tables.
//!
//! A file carries one column per node state, named `node:state`, with the
//! nodes in schema order and the effect node last. An optional leading
//! `site` column identifies where the observation was taken and is ignored
//! for computation. Values are plain decimal probabilities; every node
//! block of every row must form a probability vector.

use std::collections::HashSet;
use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};
use crate::observations::{NodeBlock, ObservationSet};

/// Ordered node layout of an observation file: every node with its state
/// labels, the last node being the effect.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSchema {
    node_specs: Vec<(String, Vec<String>)>,
}

impl ObservationSchema {
    /// At least one parent plus the effect node; states unique per node.
    pub fn new(node_specs: Vec<(String, Vec<String>)>) -> Result<Self> {
        if node_specs.len() < 2 {
            return Err(Error::validation(
                "a schema needs at least one parent node and one effect node",
            ));
        }
        for (node, states) in &node_specs {
            if node.is_empty() {
                return Err(Error::validation("node names must not be empty"));
            }
            if states.is_empty() {
                return Err(Error::validation(format!("node {node:?} has no states")));
            }
            let mut seen = HashSet::new();
            for state in states {
                if state.is_empty() || !seen.insert(state) {
                    return Err(Error::validation(format!(
                        "node {node:?} has an empty or duplicate state label"
                    )));
                }
            }
        }
        let mut names = HashSet::new();
        for (node, _) in &node_specs {
            if !names.insert(node) {
                return Err(Error::validation(format!("duplicate node name {node:?}")));
            }
        }
        Ok(ObservationSchema { node_specs })
    }

    /// Reconstructs a schema from `node:state` header columns, grouping
    /// consecutive columns by node name.
    pub fn from_header<S: AsRef<str>>(columns: &[S]) -> Result<Self> {
        let mut node_specs: Vec<(String, Vec<String>)> = Vec::new();
        for column in columns {
            let column = column.as_ref();
            let (node, state) = column.split_once(':').ok_or_else(|| Error::Schema {
                expected: "node:state".into(),
                found: column.into(),
            })?;
            match node_specs.last_mut() {
                Some((name, states)) if name == node => states.push(state.to_string()),
                _ => node_specs.push((node.to_string(), vec![state.to_string()])),
            }
        }
        ObservationSchema::new(node_specs)
    }

    pub fn node_specs(&self) -> &[(String, Vec<String>)] {
        &self.node_specs
    }

    pub fn effect_node(&self) -> &str {
        &self.node_specs.last().expect("at least two nodes").0
    }

    /// The expected data columns, `node:state` in schema order.
    pub fn header(&self) -> Vec<String> {
        self.node_specs
            .iter()
            .flat_map(|(node, states)| states.iter().map(move |s| format!("{node}:{s}")))
            .collect()
    }
}

/// Reads the header of an observation file and infers its schema.
pub fn read_schema(path: &Path) -> Result<ObservationSchema> {
    let mut reader = open_reader(path)?;
    let headers = read_headers(&mut reader, path)?;
    let columns = strip_site_column(&headers);
    ObservationSchema::from_header(&columns)
}

/// Loads an observation file against a schema.
///
/// The header must match the schema's columns exactly (after an optional
/// leading `site` column). Every node block of every row is validated as a
/// probability vector with the given tolerance; errors carry the offending
/// row and node.
pub fn load_observations(
    path: &Path,
    schema: &ObservationSchema,
    tolerance: f64,
) -> Result<ObservationSet> {
    let mut reader = open_reader(path)?;
    let headers = read_headers(&mut reader, path)?;
    let has_site = !headers.is_empty() && headers[0] == "site";
    let columns = strip_site_column(&headers);
    let expected = schema.header();
    if columns.len() != expected.len() {
        return Err(Error::Schema {
            expected: expected.join(","),
            found: columns.join(","),
        });
    }
    for (found, expected) in columns.iter().zip(&expected) {
        if found != expected {
            return Err(Error::Schema {
                expected: expected.clone(),
                found: found.clone(),
            });
        }
    }

    let mut blocks: Vec<Vec<Vec<f64>>> = schema.node_specs.iter().map(|_| Vec::new()).collect();
    for (index, record) in reader.records().enumerate() {
        let line = index + 2; // header is line 1
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason: e.to_string(),
        })?;
        let offset = usize::from(has_site);
        if record.len() != expected.len() + offset {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                reason: format!(
                    "expected {} columns, found {}",
                    expected.len() + offset,
                    record.len()
                ),
            });
        }
        let mut cursor = offset;
        for (block, (_, states)) in blocks.iter_mut().zip(&schema.node_specs) {
            let mut row = Vec::with_capacity(states.len());
            for _ in states {
                let field = record.get(cursor).expect("length checked");
                let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    reason: format!(
                        "column {:?}: cannot parse {field:?} as a probability",
                        expected[cursor - offset]
                    ),
                })?;
                row.push(value);
                cursor += 1;
            }
            block.push(row);
        }
    }

    let mut node_blocks = Vec::with_capacity(schema.node_specs.len());
    for ((node, states), rows) in schema.node_specs.iter().zip(blocks) {
        node_blocks.push(NodeBlock::new(node, states.clone(), rows, tolerance)?);
    }
    let effect = node_blocks.pop().expect("at least two nodes");
    ObservationSet::new(node_blocks, effect)
}

/// Writes an observation set in the same layout `load_observations` reads,
/// 17 significant digits per value so reloading is value-identical.
pub fn save_observations(set: &ObservationSet, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = Vec::new();
    for block in set.parents().iter().chain([set.effect()]) {
        for state in block.labels() {
            header.push(format!("{}:{state}", block.name()));
        }
    }
    writer.write_record(&header)?;
    for r in 0..set.row_count() {
        let mut record = Vec::new();
        for block in set.parents().iter().chain([set.effect()]) {
            for &v in block.row(r) {
                record.push(format_value(v));
            }
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Drops rows whose full value tuple (all parents plus effect) repeats an
/// earlier row exactly, keeping first occurrences in order. Equality is
/// bit-level: rows differing in the last decimal place stay distinct.
pub fn dedup(set: &ObservationSet) -> ObservationSet {
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut keep = Vec::new();
    for r in 0..set.row_count() {
        let mut key = Vec::new();
        for block in set.parents().iter().chain([set.effect()]) {
            key.extend(block.row(r).iter().map(|v| v.to_bits()));
        }
        if seen.insert(key) {
            keep.push(r);
        }
    }
    set.select_rows(&keep)
}

/// 17 significant digits: enough to reproduce any f64 exactly on parse.
pub(crate) fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        reason: e.to_string(),
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file))
}

fn read_headers(reader: &mut csv::Reader<File>, path: &Path) -> Result<Vec<String>> {
    let mut records = reader.records();
    match records.next() {
        Some(Ok(record)) => Ok(record.iter().map(|s| s.trim().to_string()).collect()),
        Some(Err(e)) => Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            reason: e.to_string(),
        }),
        None => Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            reason: "file has no header".into(),
        }),
    }
}

fn strip_site_column(headers: &[String]) -> Vec<String> {
    if !headers.is_empty() && headers[0] == "site" {
        headers[1..].to_vec()
    } else {
        headers.to_vec()
    }
}
