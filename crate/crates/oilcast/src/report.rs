//! Result tables and their JSON, CSV and Markdown renderings.
//!
//! JSON carries a whole report. CSV holds one table per file, with the report
//! metadata on leading `#` lines; numbers are written at full precision so
//! JSON -> CSV -> JSON is lossless.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl Cell {
    fn to_csv_field(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // Debug keeps a decimal point or exponent, so floats stay floats
            Cell::Num(f) => format!("{f:?}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn from_csv_field(s: &str) -> Self {
        if s.is_empty() {
            return Cell::Missing;
        }
        if let Ok(i) = s.parse::<i64>() {
            return Cell::Int(i);
        }
        if s.bytes().any(|b| b.is_ascii_digit()) {
            if let Ok(f) = s.parse::<f64>() {
                return Cell::Num(f);
            }
        }
        match s {
            "true" => Cell::Bool(true),
            "false" => Cell::Bool(false),
            _ => Cell::Text(s.to_string()),
        }
    }

    fn to_markdown(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(f) if *f != 0.0 && f.abs() < 1e-3 => format!("{f:.4e}"),
            Cell::Num(f) => format!("{f:.4}"),
            Cell::Bool(true) => "yes".into(),
            Cell::Bool(false) => "no".into(),
            Cell::Text(s) => s.replace('|', "\\|"),
            Cell::Missing => "-".into(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Num(f) => Some(f),
            Cell::Int(i) => Some(i as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    /// File-name friendly identifier.
    pub name: String,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(name: &str, title: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table `{}`", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell at `row` in the named column.
    pub fn get(&self, row: usize, column: &str) -> Option<&Cell> {
        self.rows.get(row)?.get(self.column(column)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub title: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Json { context: "report".into(), source })
    }

    /// One CSV document for the table at `index`.
    pub fn table_csv(&self, index: usize) -> String {
        let t = &self.tables[index];
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let mut out = format!(
            "# report: {}\n# config_hash: {}\n# seeds: {}\n# table: {}\n# title: {}\n",
            self.title,
            self.config_hash,
            seeds.join(" "),
            t.name,
            t.title
        );
        for note in &t.notes {
            out.push_str(&format!("# note: {note}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&t.columns).expect("in-memory write");
        for row in &t.rows {
            w.write_record(row.iter().map(Cell::to_csv_field)).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
        out
    }

    /// Rebuilds a report from the CSV documents of all its tables.
    pub fn from_csv(documents: &[String]) -> Result<Self> {
        let mut report: Option<Report> = None;
        for doc in documents {
            let (meta, table) = parse_table_csv(doc)?;
            let r = report.get_or_insert_with(|| Report {
                title: meta.report.clone(),
                config_hash: meta.config_hash.clone(),
                seeds: meta.seeds.clone(),
                tables: Vec::new(),
            });
            if r.config_hash != meta.config_hash {
                return Err(Error::Report(format!("table `{}` comes from another run", table.name)));
            }
            r.tables.push(table);
        }
        report.ok_or_else(|| Error::Report("no tables".into()))
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("# {}\n\nconfig hash `{}`, seeds {:?}\n", self.title, self.config_hash, self.seeds);
        for t in &self.tables {
            out.push_str(&format!("\n## {}\n\n", t.title));
            out.push_str(&format!("| {} |\n", t.columns.join(" | ")));
            out.push_str(&format!("|{}\n", "---|".repeat(t.columns.len())));
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(Cell::to_markdown).collect();
                out.push_str(&format!("| {} |\n", cells.join(" | ")));
            }
            for note in &t.notes {
                out.push_str(&format!("\n{note}\n"));
            }
        }
        out
    }
}

struct CsvMeta {
    report: String,
    config_hash: String,
    seeds: Vec<u64>,
}

fn parse_table_csv(doc: &str) -> Result<(CsvMeta, Table)> {
    let mut meta = CsvMeta { report: String::new(), config_hash: String::new(), seeds: Vec::new() };
    let mut table = Table::new("", "", &[]);
    let mut body = String::new();
    for line in doc.lines() {
        let Some(comment) = line.strip_prefix("# ") else {
            body.push_str(line);
            body.push('\n');
            continue;
        };
        let (key, value) = comment.split_once(": ").unwrap_or((comment.trim_end_matches(':'), ""));
        match key {
            "report" => meta.report = value.into(),
            "config_hash" => meta.config_hash = value.into(),
            "seeds" => {
                meta.seeds = value
                    .split_whitespace()
                    .map(|s| s.parse().map_err(|_| Error::Report(format!("bad seed `{s}`"))))
                    .collect::<Result<_>>()?
            }
            "table" => table.name = value.into(),
            "title" => table.title = value.into(),
            "note" => table.notes.push(value.into()),
            other => return Err(Error::Report(format!("unknown metadata `{other}`"))),
        }
    }
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let bad = |e: csv::Error| Error::Report(e.to_string());
    table.columns = reader.headers().map_err(bad)?.iter().map(str::to_string).collect();
    for record in reader.records() {
        table.rows.push(record.map_err(bad)?.iter().map(Cell::from_csv_field).collect());
    }
    Ok((meta, table))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut t = Table::new("sweep", "Hit rate by lag", &["lag", "hit", "stable", "note", "ic"]);
        t.push(vec![1usize.into(), 71.55555555555556.into(), true.into(), "ok, fine".into(), Cell::Missing]);
        t.push(vec![2usize.into(), 3.0.into(), false.into(), "".into(), 1e-7.into()]);
        t.notes.push("reference values are not targets".into());
        let mut u = Table::new("summary", "Summary", &["sample", "rmse"]);
        u.push(vec!["in-sample".into(), 0.1234567890123.into()]);
        Report { title: "demo".into(), config_hash: "abc".into(), seeds: vec![4, 5], tables: vec![t, u] }
    }

    #[test]
    fn json_csv_json_is_lossless() {
        let r = sample();
        let json = r.to_json();
        let back = Report::from_json(&json).unwrap();
        let docs: Vec<String> = (0..back.tables.len()).map(|i| back.table_csv(i)).collect();
        let again = Report::from_csv(&docs).unwrap();
        // an empty text field reads back as missing
        let mut expect = r.clone();
        expect.tables[0].rows[1][3] = Cell::Missing;
        assert_eq!(again, expect);
        assert_eq!(Report::from_json(&again.to_json()).unwrap(), expect);
    }

    #[test]
    fn rendering_is_deterministic() {
        let r = sample();
        assert_eq!(r.to_json(), sample().to_json());
        assert_eq!(r.table_csv(0), sample().table_csv(0));
        let csv = r.table_csv(0);
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
    }

    #[test]
    fn markdown_uses_four_decimals() {
        let md = sample().to_markdown();
        assert!(md.contains("| 1 | 71.5556 | yes | ok, fine | - |"));
        assert!(md.contains("| in-sample | 0.1235 |"));
        assert!(md.contains("| 1.0000e-7 |"));
    }
}
