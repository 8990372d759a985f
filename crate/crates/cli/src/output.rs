use std::io::Write;
use std::path::Path;

use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    Core(micprob::Error),
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_computational() => 4,
            CliError::Core(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn class(&self) -> &'static str {
        match self.code() {
            2 => "UsageError",
            3 => "ValidationError",
            _ => "ComputationError",
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Core(e) => (e.name(), e.to_string()),
            CliError::Usage(m) => ("Usage", m.clone()),
            CliError::Io(m) => ("Io", m.clone()),
        };
        serde_json::json!({ "error": self.class(), "kind": kind, "message": message }).to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Writes `text` to `out`, or to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            match so
                .write_all(text.as_bytes())
                .and_then(|_| if text.ends_with('\n') { Ok(()) } else { so.write_all(b"\n") })
            {
                // reader went away, e.g. `| head`
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|e| CliError::Io(e.to_string())),
            }
        }
    }
}

pub fn emit_json<T: Serialize>(out: Option<&Path>, v: &T) -> CliResult<()> {
    emit(out, &micprob::io::to_json_string(v))
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes CSV records into a string.
pub fn csv_string(header: &[String], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}
