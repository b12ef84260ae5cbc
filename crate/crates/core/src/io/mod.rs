//! File formats: observation CSVs, `#cpt v1` tables, goodness reports.

mod cpt_file;
mod observations;
mod report;

pub use cpt_file::{load_cpt, save_cpt};
pub use observations::{
    dedup, load_observations, read_schema, save_observations, ObservationSchema,
};
pub use report::{format_percent, write_plot_data, write_report};
