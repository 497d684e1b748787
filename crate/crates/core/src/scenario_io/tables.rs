//! CSV time series behind the demand, price, total and cut-down charts.
//!
//! | file          | columns                                      |
//! |---------------|----------------------------------------------|
//! | `demands.csv` | `slot, b0 .. b{n-1}`                         |
//! | `prices.csv`  | `slot, p0 .. p{n-1}`                         |
//! | `totals.csv`  | `slot, total_true, capacity, constraint_ok`  |
//! | `cutdown.csv` | `building, initial, final, cut`              |
//!
//! Reals use 10 significant digits (`%.10g` style), LF line endings.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::record::SimulationRecord;

pub const CSV_FILES: [&str; 4] = ["demands.csv", "prices.csv", "totals.csv", "cutdown.csv"];

/// Formats like C's `%.{digits}g`: shortest of fixed or exponent notation,
/// trailing zeros removed.
pub fn format_sig(v: f64, digits: usize) -> String {
    assert!(digits > 0);
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim(&format!("{v:.decimals$}"))
    }
}

fn num<S: Scalar>(v: S) -> String {
    format_sig(v.widen(), 10)
}

/// Column names and rows of one table, already rendered as text.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn per_slot<S: Scalar>(
    record: &SimulationRecord<S>,
    prefix: &str,
    pick: impl Fn(&crate::protocol::SlotOutcome<S>) -> &[S],
) -> Table {
    let mut header = vec!["slot".to_string()];
    header.extend((0..record.n()).map(|i| format!("{prefix}{i}")));
    let rows = record
        .slots
        .iter()
        .map(|s| {
            let mut row = vec![s.slot.to_string()];
            row.extend(pick(s).iter().map(|&v| num(v)));
            row
        })
        .collect();
    Table { header, rows }
}

pub fn demands_table<S: Scalar>(record: &SimulationRecord<S>) -> Table {
    per_slot(record, "b", |s| &s.demands)
}

pub fn prices_table<S: Scalar>(record: &SimulationRecord<S>) -> Table {
    per_slot(record, "p", |s| &s.prices)
}

pub fn totals_table<S: Scalar>(record: &SimulationRecord<S>) -> Table {
    let capacity = num(record.scenario.pricing.capacity);
    Table {
        header: ["slot", "total_true", "capacity", "constraint_ok"]
            .map(String::from)
            .to_vec(),
        rows: record
            .slots
            .iter()
            .map(|s| {
                vec![
                    s.slot.to_string(),
                    num(s.total_true),
                    capacity.clone(),
                    s.constraint_ok.to_string(),
                ]
            })
            .collect(),
    }
}

pub fn cutdown_table<S: Scalar>(record: &SimulationRecord<S>) -> Table {
    Table {
        header: ["building", "initial", "final", "cut"]
            .map(String::from)
            .to_vec(),
        rows: (0..record.n())
            .map(|i| {
                vec![
                    i.to_string(),
                    num(record.scenario.initial_demand[i]),
                    num(record.final_demands[i]),
                    num(record.cut_down[i]),
                ]
            })
            .collect(),
    }
}

fn write_table(path: &Path, table: &Table) -> Result<()> {
    let to_err = |e: csv::Error| Error::io(path, std::io::Error::other(e.to_string()));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(to_err)?;
    w.write_record(&table.header).map_err(to_err)?;
    for row in &table.rows {
        w.write_record(row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the four CSV files into `dir`, creating it if needed.
pub fn write_csv<S: Scalar>(record: &SimulationRecord<S>, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tables = [
        demands_table(record),
        prices_table(record),
        totals_table(record),
        cutdown_table(record),
    ];
    let mut written = Vec::with_capacity(4);
    for (name, table) in CSV_FILES.iter().zip(&tables) {
        let path = dir.join(name);
        write_table(&path, table)?;
        written.push(path);
    }
    Ok(written)
}
