use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Failure of a subcommand, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(netosc::Error),
}

impl From<netosc::Error> for CliError {
    fn from(e: netosc::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(e) if e.is_numeric() => 3,
            CliError::Lib(_) => 2,
        }
    }

    pub fn to_json(&self, command: &str) -> Value {
        let (kind, message) = match self {
            CliError::Usage(m) => ("UsageError", m.clone()),
            CliError::Lib(e) => (e.kind(), e.to_string()),
        };
        json!({
            "command": command,
            "status": "error",
            "exit_code": self.exit_code(),
            "error": { "kind": kind, "message": message },
        })
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Machine-readable summary printed on stdout.
pub struct Report {
    command: &'static str,
    inputs: Vec<Value>,
    parameters: Value,
    outputs: Vec<String>,
    result: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new<P: Serialize>(command: &'static str, parameters: &P) -> Self {
        Self {
            command,
            inputs: Vec::new(),
            parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
            outputs: Vec::new(),
            result: Value::Null,
        }
    }

    /// Records the digest of an input file.
    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path)?;
        self.inputs.push(json!({ "path": path.display().to_string(), "sha256": sha256_hex(&bytes) }));
        Ok(())
    }

    /// Creates `path` (and its parent directory) and hands a buffered writer
    /// to `fill`.
    pub fn write_file<F>(&mut self, path: &Path, fill: F) -> CliResult<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> netosc::Result<()>,
    {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(File::create(path)?);
        fill(&mut w)?;
        w.flush()?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn outputs(&mut self, paths: &[PathBuf]) {
        self.outputs.extend(paths.iter().map(|p| p.display().to_string()));
    }

    pub fn result(&mut self, result: Value) {
        self.result = result;
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "status": "ok",
            "inputs": self.inputs,
            "parameters": self.parameters,
            "outputs": self.outputs,
            "result": self.result,
        })
    }
}

/// JSON numbers cannot hold non-finite values; those become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}
