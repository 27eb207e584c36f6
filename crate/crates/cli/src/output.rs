//! JSON and CSV emission to files (atomically) or stdout.

use std::io::Write;
use std::path::Path;

use bbmflow_core::verification::Table;
use serde::Serialize;

use crate::ensemble_file::write_atomic;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("reports serialize");
    out.push(b'\n');
    out
}

/// Header row of column names, then one row per table row; missing cells are empty.
pub fn to_csv(table: &Table) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        let cells = row.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default());
        w.write_record(cells).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}
