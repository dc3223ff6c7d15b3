use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::{CMat, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 2,
        }
    }
}

/// Fixed-header rows written by the CSV format.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            wtr.write_record(row).map_err(io)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf8"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub verb: String,
    pub tool_version: String,
    pub inputs: Value,
    pub verdict: Outcome,
    pub summary: String,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    #[serde(skip)]
    pub table: Table,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(std::io::Error::other(e)))?;
                s.push('\n');
                Ok(s)
            }
        }
    }
}

/// Writes the report to `out`, or to stdout when `out` is `None`.
pub fn write_report(report: &RunReport, format: Format, out: Option<&Path>) -> Result<()> {
    let text = report.render(format)?;
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub(crate) fn json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

pub(crate) fn matrix_json(m: &CMat) -> Value {
    let rows: Vec<Vec<C64>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect();
    json(&rows)
}

pub(crate) fn coords_cells(z: &[C64]) -> [String; 2] {
    let re: Vec<String> = z.iter().map(|c| c.re.to_string()).collect();
    let im: Vec<String> = z.iter().map(|c| c.im.to_string()).collect();
    [re.join(";"), im.join(";")]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_csv() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn wall_time_is_omitted() {
        let r = RunReport {
            verb: "v".into(),
            tool_version: "0".into(),
            inputs: Value::Null,
            verdict: Outcome::Pass,
            summary: String::new(),
            results: Value::Null,
            wall_time: None,
            table: Table::default(),
        };
        assert!(!r.render(Format::Json).unwrap().contains("wall_time"));
    }
}
