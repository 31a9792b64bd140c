use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use schatten_core::measure::SCHEMA_VERSION;
use serde::Serialize;
use serde_json::Value;

/// Exit statuses: 0 success, 1 error or failed check, 2 inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
    Inconclusive,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
            Status::Inconclusive => 2,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl fmt::Display) -> Self {
        Self {
            kind,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Common envelope of every report.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: &'static str,
    pub seed: u64,
    pub inputs: BTreeMap<String, Value>,
    pub tolerances: BTreeMap<String, f64>,
    pub overrides: BTreeMap<String, f64>,
    pub status: &'static str,
    pub result: Value,
}

impl Report {
    pub fn new(command: &'static str, seed: u64) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            command,
            seed,
            inputs: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            overrides: BTreeMap::new(),
            status: "ok",
            result: Value::Null,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) -> CliResult<()> {
        self.inputs.insert(key.into(), to_value(value)?);
        Ok(())
    }

    pub fn set_status(&mut self, status: Status) {
        self.status = match status {
            Status::Ok => "ok",
            Status::Failed => "failed",
            Status::Inconclusive => "inconclusive",
        };
    }
}

pub fn to_value(v: impl Serialize) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::new("serialization", e))
}

pub fn error_json(err: &CliError) -> String {
    let body = serde_json::json!({
        "schema": SCHEMA_VERSION,
        "error": { "kind": err.kind, "message": err.message },
    });
    serde_json::to_string_pretty(&body).expect("error object serializes")
}

pub fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| CliError::new("io", format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| CliError::new("io", e))
        }
    }
}
