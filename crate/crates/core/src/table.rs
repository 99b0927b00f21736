//! Numeric CSV tables with a time column, used for file-level smoothing.
//!
//! A table may start with `#`-prefixed header lines, each followed by one
//! value line (the trial-file preamble); these are carried through untouched.

use std::fmt::Write as _;

use thiserror::Error;

use crate::ingest::raw_columns;
use crate::smoothing::{uniform_grid, Fitted, SmoothError, Smoother};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("table has no data rows")]
    Empty,
    #[error("raw-count trial files must be ingested before smoothing")]
    RawCounts,
    #[error(transparent)]
    Smooth(#[from] SmoothError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub preamble: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }
}

pub fn parse_table(text: &str) -> Result<Table, TableError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let mut idx = 0;
    let mut preamble = Vec::new();
    while idx < lines.len() && lines[idx].1.starts_with('#') {
        preamble.push(lines[idx].1.to_string());
        if let Some(&(_, value)) = lines.get(idx + 1) {
            preamble.push(value.to_string());
        }
        idx += 2;
    }
    let &(header_line, header) = lines.get(idx).ok_or(TableError::Empty)?;
    if header
        .split(',')
        .map(str::trim)
        .eq(raw_columns().iter().copied())
    {
        return Err(TableError::RawCounts);
    }
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    if columns.len() < 2 {
        return Err(TableError::Parse {
            line: header_line,
            message: "need a time column and at least one value column".into(),
        });
    }
    let mut rows = Vec::new();
    for &(line, body) in &lines[idx + 1..] {
        let row = body
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| TableError::Parse {
                        line,
                        message: format!("`{}` is not a finite number", f.trim()),
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if row.len() != columns.len() {
            return Err(TableError::Parse {
                line,
                message: format!("expected {} fields, found {}", columns.len(), row.len()),
            });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(TableError::Empty);
    }
    Ok(Table {
        preamble,
        columns,
        rows,
    })
}

pub fn format_table(table: &Table) -> String {
    let mut out = String::new();
    for line in &table.preamble {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Smooth every value column against the first (time) column, evaluating on
/// the original times or on a uniform grid at `resample_hz`.
pub fn smooth_table(
    table: &Table,
    method: Smoother,
    resample_hz: Option<f64>,
) -> Result<Table, TableError> {
    let t = table.column(0);
    let method = method.capped(t.len());
    let grid = match resample_hz {
        Some(rate) => {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(SmoothError::InvalidRate(rate).into());
            }
            uniform_grid(t[0], t[t.len() - 1], rate)
        }
        None => t.clone(),
    };
    let mut rows: Vec<Vec<f64>> = grid.iter().map(|&g| vec![g]).collect();
    for k in 1..table.columns.len() {
        let fitted = Fitted::fit(&t, &table.column(k), method)?;
        for (row, &g) in rows.iter_mut().zip(&grid) {
            row.push(fitted.eval(g));
        }
    }
    Ok(Table {
        preamble: table.preamble.clone(),
        columns: table.columns.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knot_fixture_resampled() {
        let table = parse_table("x,y\n0,0\n1,1\n2,0\n").unwrap();
        let out = smooth_table(&table, Smoother::Spline, Some(2.0)).unwrap();
        let text = format_table(&out);
        assert!(text.contains("0.500000,0.687500\n"), "{text}");
        assert_eq!(out.rows.len(), 5);
    }

    #[test]
    fn preamble_preserved() {
        let text = "# a,b\n1,2\n# c\nx\nt,v\n0,1\n1,3\n";
        let table = parse_table(text).unwrap();
        assert_eq!(table.preamble.len(), 4);
        let out = format_table(&smooth_table(&table, Smoother::Polynomial(7), None).unwrap());
        assert!(
            out.starts_with("# a,b\n1,2\n# c\nx\nt,v\n0.000000,1.000000\n1.000000,3.000000\n"),
            "{out}"
        );
    }

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(parse_table(""), Err(TableError::Empty));
        assert_eq!(parse_table("t,v\n"), Err(TableError::Empty));
        assert!(matches!(
            parse_table("t,v\n0,a\n"),
            Err(TableError::Parse { line: 2, .. })
        ));
        let raw = format!("{}\n0,0,0,0,0,0,0,0,0,0,0,0,0,0\n", raw_columns().join(","));
        assert_eq!(parse_table(&raw), Err(TableError::RawCounts));
    }
}
