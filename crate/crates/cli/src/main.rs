mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Format};
use commands::{Outcome, SweepRow};
use report::{emit, error_json, CliError, CliResult, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.common.out.as_deref();
    let result = commands::run(&cli.command, &cli.common).and_then(|o| render(&o, cli.common.format));
    match result {
        Ok((text, status)) => match emit(&text, out) {
            Ok(()) => ExitCode::from(status.code()),
            Err(e) => fail(&e, None),
        },
        Err(e) => fail(&e, out),
    }
}

fn fail(err: &CliError, out: Option<&std::path::Path>) -> ExitCode {
    let text = error_json(err);
    if emit(&text, out).is_err() {
        println!("{text}");
    }
    eprintln!("schatten: {err}");
    ExitCode::from(Status::Failed.code())
}

fn render(outcome: &Outcome, format: Format) -> CliResult<(String, Status)> {
    let text = match (format, &outcome.table) {
        (Format::Csv, Some(rows)) => csv_table(rows)?,
        _ => serde_json::to_string_pretty(&outcome.report)
            .map_err(|e| CliError::new("serialization", e))?,
    };
    Ok((text, outcome.status))
}

fn csv_table(rows: &[SweepRow]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::new("csv", e);
    w.write_record(["p", "norm", "verdict"]).map_err(err)?;
    for row in rows {
        let norm = row.norm.map_or("inf".to_string(), |n| n.to_string());
        w.write_record([row.p.to_string(), norm, row.verdict.to_string()])
            .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::new("csv", e))?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::new("csv", e))?;
    Ok(text.trim_end().to_string())
}
