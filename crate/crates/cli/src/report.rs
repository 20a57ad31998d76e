use serde::Serialize;
use std::io::Write;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::CliError;

/// Everything a report carries besides its payload. Runs with the same
/// config differ only in `timestamp`.
#[derive(Debug, Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: C,
    pub result: R,
    pub timestamp: Timestamp,
}

#[derive(Debug, Serialize)]
pub struct Timestamp {
    pub unix_seconds: u64,
    pub wall_clock_seconds: f64,
}

impl Timestamp {
    pub fn since(start: Instant) -> Self {
        Self {
            unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        }
    }
}

pub fn envelope<C: Serialize, R: Serialize>(
    command: &'static str,
    seed: Option<u64>,
    config: C,
    result: R,
    start: Instant,
) -> Envelope<C, R> {
    Envelope {
        tool: "theta-extremal",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed,
        config,
        result,
        timestamp: Timestamp::since(start),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary file in the target directory, then renames,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
