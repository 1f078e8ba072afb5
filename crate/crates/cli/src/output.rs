use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    /// Floats carry 17 significant digits so reruns are byte-identical.
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Float(x) => x.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u32> for Cell {
    fn from(i: u32) -> Self {
        Cell::Int(i.into())
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Tidy rows `series, x, log10(value)` for plotting; non-positive values are skipped.
    pub fn push_log(&mut self, series: &str, x: impl Into<Cell>, value: f64) {
        if value > 0.0 {
            self.push(vec![series.into(), x.into(), value.log10().into()]);
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: csv::Error| CliError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_float_format() {
        assert_eq!(Cell::from(0.125).render(), "1.2500000000000000e-1");
        assert_eq!(Cell::from(f64::NAN).render(), "NaN");
        assert_eq!(Cell::from(3u32).render(), "3");
    }
}
