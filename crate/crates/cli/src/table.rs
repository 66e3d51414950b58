//! Result tables and their CSV form.
//!
//! A CSV file starts with `#`-prefixed metadata lines, followed by a header
//! of `name_unit` columns and one numeric record per sweep point.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Absolute slack of the `se ≤ bound` check.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn header(&self) -> String {
        format!("{}_{}", self.name, self.unit)
    }
}

/// What to draw when the table is plotted.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: usize,
    pub ys: Vec<usize>,
    pub log_x: bool,
    pub log_y: bool,
    pub x_label: String,
    pub y_label: String,
}

/// A row where a spectral-efficiency column exceeds its bound column.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundViolation {
    pub row: usize,
    pub se_column: String,
    pub se: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub title: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
    /// `(se column, bound column)` pairs checked on write.
    pub bound_checks: Vec<(usize, usize)>,
    pub plot: Option<PlotSpec>,
}

impl ResultTable {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            columns: Vec::new(),
            rows: Vec::new(),
            metadata: Vec::new(),
            bound_checks: Vec::new(),
            plot: None,
        }
    }

    pub fn add_column(&mut self, name: impl Into<String>, unit: impl Into<String>) -> usize {
        assert!(self.rows.is_empty(), "columns must be declared before rows");
        self.columns.push(Column {
            name: name.into(),
            unit: unit.into(),
        });
        self.columns.len() - 1
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "incomplete row in {}", self.title);
        self.rows.push(row);
    }

    pub fn add_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, header: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.header() == header)
    }

    /// Values of the column whose header is `header`.
    pub fn column(&self, header: &str) -> Option<Vec<f64>> {
        let i = self.column_index(header)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn headers(&self) -> Vec<String> {
        self.columns.iter().map(Column::header).collect()
    }

    pub fn check_bounds(&self) -> Vec<BoundViolation> {
        let mut out = Vec::new();
        for (row_index, row) in self.rows.iter().enumerate() {
            for &(se, bound) in &self.bound_checks {
                if !(row[se] <= row[bound] + BOUND_TOLERANCE) {
                    out.push(BoundViolation {
                        row: row_index,
                        se_column: self.columns[se].header(),
                        se: row[se],
                        bound: row[bound],
                    });
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut text = String::new();
        for (key, value) in &self.metadata {
            if value.contains('\n') {
                let _ = writeln!(text, "# {key}:");
                for line in value.lines() {
                    let _ = writeln!(text, "#   {line}");
                }
            } else {
                let _ = writeln!(text, "# {key}: {value}");
            }
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(self.headers()).expect("in-memory write");
        for row in &self.rows {
            writer
                .write_record(row.iter().map(|v| format_value(*v)))
                .expect("in-memory write");
        }
        let body = writer.into_inner().expect("in-memory write");
        text.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
        text
    }

    /// Writes `<dir>/<title>.csv` and, when `plot` is set, `<dir>/<title>.svg`.
    /// The files are written even when a bound check fails; the violation is
    /// then recorded in the preamble and returned as a numerical error.
    pub fn write(&self, dir: &Path, plot: bool) -> CliResult<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
        let violations = self.check_bounds();
        let mut table = self.clone();
        if !self.bound_checks.is_empty() {
            let status = if violations.is_empty() {
                "pass".to_string()
            } else {
                format!("fail ({} of {} checks)", violations.len(), self.rows.len() * self.bound_checks.len())
            };
            table.add_meta("bound_check", status);
        }

        let csv_path = dir.join(format!("{}.csv", self.title));
        std::fs::write(&csv_path, table.to_csv()).map_err(|source| CliError::Output {
            path: csv_path.clone(),
            source,
        })?;
        let mut written = vec![csv_path];
        if plot && self.plot.is_some() {
            let svg_path = dir.join(format!("{}.svg", self.title));
            crate::plot::render_svg(self, &svg_path)?;
            written.push(svg_path);
        }

        if let Some(first) = violations.first() {
            return Err(CliError::Numerical(format!(
                "{} row(s) of {} exceed the spectral-efficiency bound; first: row {} {} = {} > {}",
                violations.len(),
                self.title,
                first.row,
                first.se_column,
                first.se,
                first.bound
            )));
        }
        Ok(written)
    }
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e15)`.
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Drops the metadata lines whose values change from run to run.
pub fn strip_volatile(csv: &str) -> String {
    csv.lines()
        .filter(|l| !(l.starts_with("# timestamp") || l.starts_with("# runtime")))
        .map(|l| format!("{l}\n"))
        .collect()
}
