use clap::ValueEnum;
use congrusum::verify::{format_real, Skipped, SweepReport, VerificationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Rows of string cells under a fixed header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Table {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    /// An array with one object per row; every value is a string.
    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), serde_json::Value::String(v.clone())))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("json");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

pub const RECORD_COLUMNS: [&str; 10] = [
    "check_id",
    "params",
    "kind",
    "lhs",
    "rhs",
    "ratio",
    "deviation",
    "tolerance",
    "pass",
    "note",
];

pub fn format_params(params: &[(String, i64)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

pub fn record_row(r: &VerificationRecord) -> Vec<String> {
    vec![
        r.check_id.clone(),
        format_params(&r.params),
        r.kind.name().to_string(),
        r.lhs.to_string(),
        r.rhs.to_string(),
        format_real(r.ratio),
        opt_real(r.deviation),
        opt_real(r.tolerance),
        r.pass.to_string(),
        r.note.clone(),
    ]
}

fn skipped_row(check_id: &str, s: &Skipped) -> Vec<String> {
    let mut row = vec![String::new(); RECORD_COLUMNS.len()];
    row[0] = check_id.to_string();
    row[1] = format_params(&s.params);
    row[2] = "skipped".to_string();
    row[8] = "skipped".to_string();
    row[9] = s.reason.clone();
    row
}

/// Records first, in sweep order, then skipped units.
pub fn report_table(report: &SweepReport) -> Table {
    let mut t = Table::new(&RECORD_COLUMNS);
    for r in &report.records {
        t.push(record_row(r));
    }
    for s in &report.skipped {
        t.push(skipped_row(&report.check_id, s));
    }
    t
}

pub fn report_summary(report: &SweepReport) -> String {
    let ranges = report
        .ranges
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ");
    format!(
        "{} [{}]: {} records, {} failures, {} skipped, worst ratio {}",
        report.check_id,
        ranges,
        report.records.len(),
        report.failures,
        report.skipped.len(),
        format_real(report.worst_ratio)
    )
}
