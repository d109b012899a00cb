//! Report rows and emission. One fixed row schema serves every subcommand:
//! `prime,k,brute,semi_analytic,closed_form,residual,skipped,reason`.
//! Columns that do not apply to a subcommand are left empty; the `reason`
//! column doubles as a row label for subcommands that scan a grid of
//! parameters (its meaning per subcommand is spelled out in `--help`).

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::io::Write;

pub const CSV_HEADER: &str = "prime,k,brute,semi_analytic,closed_form,residual,skipped,reason";

/// One table cell: exact integer, float, or absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Empty,
}

impl Cell {
    pub fn csv(&self) -> String {
        match *self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_f64(v),
            Cell::Empty => String::new(),
        }
    }
}

/// Shortest-roundtrip decimal with -0 normalized to 0.
fn format_f64(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v}")
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Cell::Int(v) => {
                if let Ok(small) = i64::try_from(v) {
                    s.serialize_i64(small)
                } else {
                    s.serialize_str(&v.to_string())
                }
            }
            Cell::Float(v) => s.serialize_f64(if v == 0.0 { 0.0 } else { v }),
            Cell::Empty => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub prime: u64,
    pub k: u32,
    pub brute: Cell,
    pub semi_analytic: Cell,
    pub closed_form: Cell,
    pub residual: Cell,
    pub skipped: bool,
    pub reason: Option<String>,
}

impl ReportRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.prime,
            self.k,
            self.brute.csv(),
            self.semi_analytic.csv(),
            self.closed_form.csv(),
            self.residual.csv(),
            self.skipped,
            csv_escape(self.reason.as_deref().unwrap_or(""))
        )
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SignCountsOut {
    pub negative: u64,
    pub zero: u64,
    pub positive: u64,
}

impl SignCountsOut {
    pub fn push(&mut self, v: f64) {
        if v < 0.0 {
            self.negative += 1;
        } else if v > 0.0 {
            self.positive += 1;
        } else {
            self.zero += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Summary {
    pub main_term_avg: Option<f64>,
    pub lower_term_avg: Option<f64>,
    pub sign_counts: SignCountsOut,
}

impl Serialize for Summary {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Summary", 3)?;
        st.serialize_field("main_term_avg", &self.main_term_avg.map(zero_norm))?;
        st.serialize_field("lower_term_avg", &self.lower_term_avg.map(zero_norm))?;
        st.serialize_field("sign_counts", &self.sign_counts)?;
        st.end()
    }
}

fn zero_norm(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// Config echo: alphabetical key order (BTreeMap) keeps JSON diffable.
pub type ConfigEcho = BTreeMap<&'static str, serde_json::Value>;

#[derive(Debug, Serialize)]
pub struct Report {
    pub config: ConfigEcho,
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::from(CSV_HEADER);
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.csv());
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let mut out =
                    serde_json::to_string_pretty(self).expect("report is always serializable");
                out.push('\n');
                out
            }
        }
    }

    pub fn write(&self, format: Format, out: Option<&std::path::Path>) -> std::io::Result<()> {
        let text = self.render(format);
        match out {
            Some(path) => std::fs::write(path, text),
            None => std::io::stdout().write_all(text.as_bytes()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_render() {
        assert_eq!(Cell::Int(-3).csv(), "-3");
        assert_eq!(Cell::Float(-0.25).csv(), "-0.25");
        assert_eq!(Cell::Float(-0.0).csv(), "0");
        assert_eq!(Cell::Empty.csv(), "");
    }

    #[test]
    fn csv_escaping() {
        assert_eq!(csv_escape("plain words"), "plain words");
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn header_is_pinned() {
        assert_eq!(
            CSV_HEADER,
            "prime,k,brute,semi_analytic,closed_form,residual,skipped,reason"
        );
    }
}
