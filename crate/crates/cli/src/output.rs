use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::Common;

/// Result of a subcommand: a JSON report and the overall verdict.
pub struct Outcome {
    name: &'static str,
    report: Value,
    pub passed: bool,
    elapsed: Option<f64>,
}

impl Outcome {
    pub fn new(name: &'static str, report: Value, passed: bool) -> Self {
        Outcome {
            name,
            report,
            passed,
            elapsed: None,
        }
    }

    pub fn set_elapsed(&mut self, seconds: f64) {
        self.elapsed = Some(seconds);
    }

    pub fn summary(&self) -> String {
        format!("{}: {}", self.name, if self.passed { "passed" } else { "FAILED" })
    }

    fn to_json(&self) -> Value {
        let mut v = json!({
            "command": self.name,
            "passed": self.passed,
            "result": self.report,
        });
        if let Some(t) = self.elapsed {
            v["elapsed_seconds"] = json!(t);
        }
        v
    }
}

#[derive(Debug)]
pub enum Failure {
    /// Input missing, unreadable or not matching its schema (exit 2).
    Parse { kind: String, message: String },
    /// A construction or check failed (exit 1).
    Check { kind: String, message: String },
}

fn variant_name(e: &blidkit::Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

impl Failure {
    pub fn parse(message: impl Display) -> Self {
        Failure::Parse {
            kind: "InvalidInput".into(),
            message: message.to_string(),
        }
    }

    pub fn usage(message: impl Display) -> Self {
        Failure::Parse {
            kind: "Usage".into(),
            message: message.to_string(),
        }
    }

    pub fn invalid(e: blidkit::Error) -> Self {
        Failure::Parse {
            kind: variant_name(&e),
            message: e.to_string(),
        }
    }

    pub fn internal(message: impl Display) -> Self {
        Failure::Check {
            kind: "Internal".into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Parse { .. } => 2,
            Failure::Check { .. } => 1,
        }
    }

    pub fn report(&self) -> String {
        let (error, kind, message) = match self {
            Failure::Parse { kind, message } => ("ParseError", kind, message),
            Failure::Check { kind, message } => ("CheckFailed", kind, message),
        };
        let v = json!({
            "error": error,
            "kind": kind,
            "message": message,
            "exit_code": self.exit_code(),
        });
        serde_json::to_string_pretty(&v).unwrap_or_default()
    }
}

impl From<blidkit::Error> for Failure {
    fn from(e: blidkit::Error) -> Self {
        Failure::Check {
            kind: variant_name(&e),
            message: e.to_string(),
        }
    }
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(common: &Common) -> Result<Self, Failure> {
        fs::create_dir_all(&common.out)
            .map_err(|e| Failure::internal(format!("cannot create {}: {e}", common.out.display())))?;
        Ok(Output {
            dir: common.out.clone(),
        })
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| Failure::internal(format!("cannot write {}: {e}", path.display())))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).map_err(Failure::internal)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_report(&self, outcome: &Outcome) -> Result<(), Failure> {
        self.write_json(&format!("{}.json", outcome.name), &outcome.to_json())
    }
}

/// Read and deserialize the `--input` file, if given.
pub fn read_input<T: DeserializeOwned>(common: &Common) -> Result<Option<T>, Failure> {
    match &common.input {
        None => Ok(None),
        Some(path) => read_json(path).map(Some),
    }
}

pub fn require_input<T: DeserializeOwned>(common: &Common) -> Result<T, Failure> {
    read_input(common)?.ok_or_else(|| Failure::parse("this subcommand needs --input <path>"))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

/// Format a float for CSV; non-finite values become empty cells.
pub fn cell(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}
