use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::RunConfig;

/// Rows computed by a subcommand. `failure` is set when a row could not be
/// computed; the rows before it are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub notes: Vec<String>,
    pub failure: Option<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
            failure: None,
        }
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(out: &mut impl Write, config: &RunConfig, table: &Table) -> io::Result<()> {
    writeln!(out, "# jacobi {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "# config: {}", config.to_json())?;
    writeln!(out, "# seed: {}", config.seed)?;
    if !config.no_timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        writeln!(out, "# timestamp: {secs}")?;
    }
    for note in &table.notes {
        writeln!(out, "# {note}")?;
    }
    match &table.failure {
        None => writeln!(out, "# status: complete")?,
        Some(msg) => writeln!(out, "# status: partial ({} rows): {msg}", table.rows.len())?,
    }
    writeln!(out, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_value(v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
