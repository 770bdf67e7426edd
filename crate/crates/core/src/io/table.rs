//! Column tables for series output. CSV is the canonical form; JSON carries
//! the same columns as `{"columns": [...], "rows": [[...], ...]}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{HistogramDensity, LcrCurve};
use crate::theory::CorrelationSeries;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("row {row} has {got} values, header has {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("non-finite value in column {column}, row {row}")]
    NonFinite { row: usize, column: String },
    #[error("cannot parse {text:?} on line {line}")]
    Parse { line: usize, text: String },
    #[error("columns have different lengths")]
    LengthMismatch,
    #[error("table has no header")]
    NoHeader,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Table {
        Table { columns, rows: Vec::new() }
    }

    /// Builds a table from named columns of equal length.
    pub fn from_columns(cols: Vec<(String, Vec<f64>)>) -> Result<Table, TableError> {
        let len = cols.first().map_or(0, |c| c.1.len());
        if cols.iter().any(|c| c.1.len() != len) {
            return Err(TableError::LengthMismatch);
        }
        let rows = (0..len).map(|i| cols.iter().map(|c| c.1[i]).collect()).collect();
        let table = Table {
            columns: cols.into_iter().map(|c| c.0).collect(),
            rows,
        };
        table.check()?;
        Ok(table)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    fn check(&self) -> Result<(), TableError> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(TableError::Ragged {
                    row: i,
                    expected: self.columns.len(),
                    got: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(TableError::NonFinite {
                    row: i,
                    column: self.columns[j].clone(),
                });
            }
        }
        Ok(())
    }

    /// CSV with 17 significant digits, enough to round-trip every f64.
    pub fn to_csv(&self) -> Result<String, TableError> {
        self.check()?;
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String, TableError> {
        self.check()?;
        Ok(serde_json::to_string_pretty(self).expect("finite tables always serialize"))
    }
}

pub fn parse_csv(text: &str) -> Result<Table, TableError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(TableError::NoHeader)?;
    let mut table = Table::new(header.split(',').map(|s| s.trim().to_string()).collect());
    for (i, line) in lines {
        let row = line
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| TableError::Parse {
                    line: i + 1,
                    text: s.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        table.rows.push(row);
    }
    table.check()?;
    Ok(table)
}

/// `lag_s, fd_tau, value[, oracle_value]` for a series and optional oracle.
pub fn correlation_table(
    series: &CorrelationSeries,
    oracle: Option<&CorrelationSeries>,
) -> Result<Table, TableError> {
    let mut cols = vec![
        ("lag_s".to_string(), series.grid.lags().to_vec()),
        ("fd_tau".to_string(), series.grid.fd_tau()),
        ("value".to_string(), series.values.clone()),
    ];
    if let Some(o) = oracle {
        cols.push(("oracle_value".to_string(), o.values.clone()));
    }
    Table::from_columns(cols)
}

/// `z, density[, oracle_density]` at the bin centres.
pub fn histogram_table(h: &HistogramDensity, oracle: Option<Vec<f64>>) -> Result<Table, TableError> {
    let mut cols = vec![
        ("z".to_string(), h.bin_centres()),
        ("density".to_string(), h.densities.clone()),
    ];
    if let Some(o) = oracle {
        cols.push(("oracle_density".to_string(), o));
    }
    Table::from_columns(cols)
}

/// `rho, rate, std_err[, oracle_rate]`.
pub fn lcr_table(c: &LcrCurve, oracle: Option<Vec<f64>>) -> Result<Table, TableError> {
    let mut cols = vec![
        ("rho".to_string(), c.thresholds.clone()),
        ("rate".to_string(), c.rates.clone()),
        ("std_err".to_string(), c.std_err.clone()),
    ];
    if let Some(o) = oracle {
        cols.push(("oracle_rate".to_string(), o));
    }
    Table::from_columns(cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let t = Table::from_columns(vec![("a".into(), vec![0.1, 2.0]), ("b".into(), vec![-3.0, 1e-300])]).unwrap();
        let csv = t.to_csv().unwrap();
        assert_eq!(csv.lines().next(), Some("a,b"));
        assert_eq!(csv.lines().nth(1), Some("1.0000000000000001e-1,-3.0000000000000000e0"));
        assert_eq!(parse_csv(&csv).unwrap(), t);
    }

    #[test]
    fn json_mirrors_csv() {
        let t = Table::from_columns(vec![("x".into(), vec![1.5]), ("y".into(), vec![2.5])]).unwrap();
        let back: Table = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(
            Table::from_columns(vec![("x".into(), vec![1.0]), ("y".into(), vec![])]),
            Err(TableError::LengthMismatch)
        );
        assert!(matches!(
            Table::from_columns(vec![("x".into(), vec![f64::NAN])]),
            Err(TableError::NonFinite { .. })
        ));
        assert!(matches!(parse_csv("a,b\n1,2\n3\n"), Err(TableError::Ragged { row: 1, .. })));
        assert!(matches!(parse_csv("a\nfoo\n"), Err(TableError::Parse { line: 2, .. })));
        assert_eq!(parse_csv(""), Err(TableError::NoHeader));
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 1..50)) {
            let t = Table::from_columns(vec![("v".into(), values.clone())]).unwrap();
            let back = parse_csv(&t.to_csv().unwrap()).unwrap();
            let got = back.column("v").unwrap();
            for (a, b) in values.iter().zip(&got) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            let json: Table = serde_json::from_str(&t.to_json().unwrap()).unwrap();
            prop_assert_eq!(json, back);
        }
    }
}
