use std::fs;
use std::io::{self, Write};
use std::path::Path;

use ffstat_core::render::rational_text;
use ffstat_core::FieldSpec;
use serde_json::{json, Value};

use crate::args::{Cli, Command, Counterexample, Format};
use crate::commands::Outcome;

pub const CSV_HEADER: [&str; 10] = [
    "q",
    "k",
    "m",
    "lambda",
    "cell_id",
    "count",
    "expected_num",
    "expected_den",
    "abs_dev",
    "covered",
];

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Pi { .. } => "pi",
        Command::PiType { .. } => "pi-type",
        Command::Interval { .. } => "interval",
        Command::Progression { .. } => "progression",
        Command::ScanIntervals { .. } => "scan-intervals",
        Command::ScanProgressions { .. } => "scan-progressions",
        Command::MeanVariance { .. } => "mean-variance",
        Command::VarianceTrend { .. } => "variance-trend",
        Command::Radical { .. } => "radical",
        Command::Nu { .. } => "nu",
        Command::Counterexample(Counterexample::M0 { .. }) => "counterexample m0",
        Command::Counterexample(Counterexample::M1 { .. }) => "counterexample m1",
        Command::Hypotheses { .. } => "hypotheses",
        Command::Totient { .. } => "totient",
        Command::PartitionProb { .. } => "partition-prob",
    }
}

fn field_json(field: &FieldSpec) -> Value {
    let modulus: Vec<String> = field.modulus().iter().map(|d| d.to_string()).collect();
    json!({ "p": field.p(), "nu": field.nu(), "modulus": modulus.join(",") })
}

pub fn render(cli: &Cli, outcome: &Outcome, timing_ms: Option<u64>) -> Result<String, String> {
    match cli.format {
        Format::Json => {
            let mut params = outcome.params.clone();
            if let Some(o) = params.as_object_mut() {
                o.insert("seed".into(), json!(cli.seed));
                o.insert("budget".into(), json!(cli.budget));
                o.insert("dry_run".into(), json!(cli.dry_run));
            }
            let report = json!({
                "tool_version": env!("CARGO_PKG_VERSION"),
                "field": outcome.field.as_ref().map(field_json),
                "command": command_name(&cli.command),
                "params": params,
                "result": outcome.result,
                "excluded": outcome.excluded,
                "timing_ms": timing_ms,
            });
            let mut text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
            text.push('\n');
            Ok(text)
        }
        Format::Text => Ok(format!("{}\n", outcome.headline)),
        Format::Csv if cli.dry_run => Ok(format!("{}\n", outcome.headline)),
        Format::Csv => {
            let report = outcome
                .scan
                .as_ref()
                .ok_or("csv output is only available for scan-intervals and scan-progressions")?;
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(CSV_HEADER).map_err(|e| e.to_string())?;
            for cell in report.per_cell.iter().flatten() {
                writer
                    .write_record([
                        report.q.to_string(),
                        report.k.to_string(),
                        report.m.to_string(),
                        report.lambda.to_string(),
                        cell.cell_id.to_string(),
                        cell.count.to_string(),
                        cell.expected.numer().to_string(),
                        cell.expected.denom().to_string(),
                        rational_text(&cell.abs_dev),
                        cell.covered().to_string(),
                    ])
                    .map_err(|e| e.to_string())?;
            }
            let bytes = writer.into_inner().map_err(|e| e.to_string())?;
            String::from_utf8(bytes).map_err(|e| e.to_string())
        }
    }
}

pub fn write(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}
