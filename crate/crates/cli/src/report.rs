//! Versioned JSON reports and CSV tables.

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Tabular part of a report: CSV columns and rows of JSON scalars.
#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn objects(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect::<Map<_, _>>()))
            .collect()
    }
}

/// Everything a subcommand produced.
pub struct Outcome {
    pub result: Value,
    pub table: Table,
    /// False when a checked property failed.
    pub pass: bool,
}

#[derive(Serialize)]
struct Timings {
    elapsed_ms: f64,
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    command: &'a str,
    argv: &'a [String],
    config: &'a Value,
    seed: u64,
    pass: bool,
    result: &'a Value,
    rows: Vec<Value>,
    /// Wall-clock only; excluded when comparing runs.
    timings: Timings,
}

/// Writes `<dir>/<stem>.json` (and `.csv` when the table has columns); returns the JSON text.
#[allow(clippy::too_many_arguments)]
pub fn emit(dir: &Path, stem: &str, command: &str, argv: &[String], config: &Value, seed: u64, out: &Outcome, elapsed_ms: f64) -> Result<(String, Vec<PathBuf>)> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command,
        argv,
        config,
        seed,
        pass: out.pass,
        result: &out.result,
        rows: out.table.objects(),
        timings: Timings { elapsed_ms },
    };
    let text = serde_json::to_string_pretty(&report)?;
    let json_path = dir.join(format!("{stem}.json"));
    std::fs::write(&json_path, &text).with_context(|| format!("writing {}", json_path.display()))?;
    let mut paths = vec![json_path];
    if !out.table.columns.is_empty() {
        let csv_path = dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
        w.write_record(&out.table.columns)?;
        for r in &out.table.rows {
            w.write_record(r.iter().map(|v| match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            }))?;
        }
        w.flush().with_context(|| format!("writing {}", csv_path.display()))?;
        paths.push(csv_path);
    }
    Ok((text, paths))
}

pub const SCHEMA_HELP: &str = "\
Every run writes <out>/<name>.json with fields:
  schema_version  integer, currently 1
  command         subcommand path, e.g. \"threshold mc\"
  argv            arguments after the program name; `ftqc rerun <report>` replays them
  config          parsed options of the subcommand
  seed            the --seed value; the only source of randomness
  pass            false when a checked property failed (exit code 1)
  result          subcommand-specific object
  rows            the CSV table as objects (empty when the command is not tabular)
  timings         {elapsed_ms}; the only field that differs between identical runs
The output directory is --out, else $FTQC_OUT_DIR, else the current directory.

CSV columns by command:
  code check        position, pauli_x, pauli_z, logical, trace_distance
  gadget verify     input, fidelity
  gadget spread     gate, kind, max_per_block
  compile           period, step, first_level, end_level
  threshold analytic r, effective_rate, sparse_prob_bound, minimal_bad_bound
  threshold mc      trial_block, sparse_fraction, stderr
  route             gate, swaps
  univcheck         (none)
";
