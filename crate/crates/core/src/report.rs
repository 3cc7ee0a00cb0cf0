//! Report types and their text/CSV rendering.
//!
//! Numbers are printed with 12 digits after the decimal point using `.` as
//! separator; negative zero is printed as zero. Output does not depend on the
//! locale or the platform.

use std::fmt::Write as _;

use crate::doublet::{EventRecord, RunStatistics};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?} (expected text or csv)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub quantity: String,
    pub pure: f64,
    pub mixed: f64,
    pub abs_diff: f64,
}

impl ReportRow {
    pub fn new(quantity: &str, pure: f64, mixed: f64) -> Self {
        ReportRow { quantity: quantity.to_string(), pure, mixed, abs_diff: (pure - mixed).abs() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraVerdict {
    pub algebra: String,
    pub indistinguishable: bool,
    pub max_gap: f64,
    pub witness_gap: f64,
}

/// Side-by-side values for two preparations.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub title: String,
    /// Free-form `key = value` header lines.
    pub notes: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
    pub verdicts: Vec<AlgebraVerdict>,
}

impl ComparisonReport {
    pub fn row(&self, quantity: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn verdict(&self, algebra: &str) -> Option<&AlgebraVerdict> {
        self.verdicts.iter().find(|v| v.algebra == algebra)
    }
}

/// The external observer's state summary and the internal observer's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerReport {
    pub seed: u64,
    /// `(quantity, value)` computed on the external observer's density.
    pub external: Vec<(String, f64)>,
    pub outcome: EventRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Comparison(ComparisonReport),
    Run(RunStatistics),
    Wigner(WignerReport),
}

pub fn format_number(x: f64) -> String {
    let s = format!("{x:.12}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn emit_report(report: &Report, format: Format) -> String {
    match (report, format) {
        (Report::Comparison(r), Format::Csv) => comparison_csv(r),
        (Report::Comparison(r), Format::Text) => comparison_text(r),
        (Report::Run(r), Format::Csv) => run_csv(r),
        (Report::Run(r), Format::Text) => run_text(r),
        (Report::Wigner(r), Format::Csv) => wigner_csv(r),
        (Report::Wigner(r), Format::Text) => wigner_text(r),
    }
}

fn comparison_csv(r: &ComparisonReport) -> String {
    let mut out = String::new();
    for (k, v) in &r.notes {
        writeln!(out, "# {k} = {v}").unwrap();
    }
    out.push_str("quantity,pure,mixed,abs_diff\n");
    for row in &r.rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.quantity,
            format_number(row.pure),
            format_number(row.mixed),
            format_number(row.abs_diff)
        )
        .unwrap();
    }
    out
}

fn pad_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn comparison_text(r: &ComparisonReport) -> String {
    let mut out = format!("== {} ==\n", r.title);
    for (k, v) in &r.notes {
        writeln!(out, "{k} = {v}").unwrap();
    }
    let mut table = vec![vec!["quantity".into(), "pure".into(), "mixed".into(), "abs_diff".into()]];
    for row in &r.rows {
        table.push(vec![
            row.quantity.clone(),
            format_number(row.pure),
            format_number(row.mixed),
            format_number(row.abs_diff),
        ]);
    }
    out.push_str(&pad_table(&table));
    if !r.verdicts.is_empty() {
        out.push_str("\nrestriction verdicts (pure vs mixed):\n");
        let mut vt = vec![vec!["algebra".into(), "verdict".into(), "max_gap".into(), "witness_gap".into()]];
        for v in &r.verdicts {
            vt.push(vec![
                v.algebra.clone(),
                if v.indistinguishable { "indistinguishable".into() } else { "distinguishable".into() },
                format_number(v.max_gap),
                format_number(v.witness_gap),
            ]);
        }
        out.push_str(&pad_table(&vt));
    }
    out
}

fn run_header(r: &RunStatistics) -> Vec<(String, String)> {
    vec![
        ("seed".into(), r.seed.to_string()),
        ("samples".into(), r.samples.to_string()),
        ("mode".into(), r.mode.as_str().into()),
    ]
}

fn run_csv(r: &RunStatistics) -> String {
    let mut out = String::new();
    let header: Vec<String> = run_header(r).into_iter().map(|(k, v)| format!("{k} = {v}")).collect();
    writeln!(out, "# {}", header.join(", ")).unwrap();
    out.push_str("outcome_label,outcome_value,count,frequency,theory\n");
    for l in r.active_labels() {
        writeln!(
            out,
            "{},{},{},{},{}",
            l,
            format_number(r.outcome_values[&l]),
            r.counts[&l],
            format_number(r.empirical_frequencies[&l]),
            format_number(r.theory_probabilities[&l])
        )
        .unwrap();
    }
    out
}

fn run_text(r: &RunStatistics) -> String {
    let mut out = String::from("== simulate ==\n");
    for (k, v) in run_header(r) {
        writeln!(out, "{k} = {v}").unwrap();
    }
    let mut table = vec![vec![
        "outcome_label".into(),
        "outcome_value".into(),
        "count".into(),
        "frequency".into(),
        "theory".into(),
    ]];
    for l in r.active_labels() {
        table.push(vec![
            l.to_string(),
            format_number(r.outcome_values[&l]),
            r.counts[&l].to_string(),
            format_number(r.empirical_frequencies[&l]),
            format_number(r.theory_probabilities[&l]),
        ]);
    }
    out.push_str(&pad_table(&table));
    out.push('\n');
    let summary = vec![
        vec!["empirical_pointer_mean".to_string(), format_number(r.empirical_pointer_mean)],
        vec!["theory_pointer_mean".to_string(), format_number(r.theory_pointer_mean)],
        vec!["purity_rate".to_string(), format_number(r.purity_rate)],
        vec!["it_expectation".to_string(), format_number(r.it_expectation)],
        vec!["chi_square".to_string(), format_number(r.chi_square)],
    ];
    out.push_str(&pad_table(&summary));
    out
}

fn wigner_rows(r: &WignerReport) -> Vec<(String, String)> {
    let mut rows: Vec<(String, String)> =
        r.external.iter().map(|(k, v)| (format!("external_{k}"), format_number(*v))).collect();
    rows.push(("internal_outcome_label".into(), r.outcome.outcome_label.to_string()));
    rows.push(("internal_outcome_value".into(), format_number(r.outcome.outcome_value)));
    rows
}

fn wigner_csv(r: &WignerReport) -> String {
    let mut out = format!("# seed = {}\nquantity,value\n", r.seed);
    for (k, v) in wigner_rows(r) {
        writeln!(out, "{k},{v}").unwrap();
    }
    out
}

fn wigner_text(r: &WignerReport) -> String {
    let mut out = format!("== wigner ==\nseed = {}\n", r.seed);
    let table: Vec<Vec<String>> = wigner_rows(r).into_iter().map(|(k, v)| vec![k, v]).collect();
    out.push_str(&pad_table(&table));
    out
}

/// Parses CSV emitted by [`emit_report`]: skips `#` lines, returns the header
/// and the data rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, message: "missing CSV header".into() })?;
    let header: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        if fields.len() != header.len() {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        rows.push(fields);
    }
    Ok((header, rows))
}
