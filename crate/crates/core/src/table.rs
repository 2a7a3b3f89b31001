//! Plain CSV tables with a schema comment line and fixed float formatting.

use std::fmt::Write as _;

/// Version tag written on the first line of every table.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    /// Unquoted text; floats use 17 significant digits so that output
    /// round-trips exactly.
    pub fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; panics if its width differs from the header, which
    /// is always a programming error.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema: bqclab/{} v{}\n", self.name, SCHEMA_VERSION).into_bytes();
        {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut out);
            let io = "writing CSV to memory cannot fail";
            w.write_record(&self.columns).expect(io);
            for row in &self.rows {
                w.write_record(row.iter().map(Cell::render)).expect(io);
            }
            w.flush().expect(io);
        }
        String::from_utf8(out).expect("CSV built from UTF-8 strings")
    }

    /// Two space-separated numeric columns, one point per line.
    pub fn plot_data(&self, x: &str, y: &str) -> Option<String> {
        let (ix, iy) = (self.column(x)?, self.column(y)?);
        let mut out = format!("# {x} {y}\n");
        for row in &self.rows {
            let _ = writeln!(out, "{} {}", row[ix].render(), row[iy].render());
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &["k", "error", "label"]);
        t.push(vec![4usize.into(), 0.1.into(), "a,b".into()]);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# schema: bqclab/demo v1");
        assert_eq!(lines[1], "k,error,label");
        assert_eq!(lines[2], "4,1.0000000000000001e-1,\"a,b\"");
        assert!(!csv.contains('\r'));
        assert_eq!(t.plot_data("k", "error").unwrap(), "# k error\n4 1.0000000000000001e-1\n");
    }

    #[test]
    fn floats_round_trip() {
        for v in [1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }
}
