use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use super::CliError;

pub const TOOL: &str = "krillwalk";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_error(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Writes `{tool, version, config, result}` as pretty JSON.
pub fn write_json(path: Option<&Path>, cfg: &RunConfig, result: impl Serialize) -> Result<(), CliError> {
    let doc = serde_json::json!({
        "tool": TOOL,
        "version": VERSION,
        "config": cfg.to_json(),
        "result": result,
    });
    let mut w = open(path)?;
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::Runtime(e.to_string()))
}

/// A CSV table preceded by `#` lines carrying the tool, version, and config.
pub struct CsvSink {
    writer: csv::Writer<Box<dyn Write>>,
}

impl CsvSink {
    pub fn create(path: Option<&Path>, cfg: &RunConfig, header: &[&str]) -> Result<Self, CliError> {
        let mut raw = open(path)?;
        let mut preamble = format!("# tool = {TOOL}\n# version = {VERSION}\n");
        for line in cfg.to_kv().lines() {
            preamble.push_str("# ");
            preamble.push_str(line);
            preamble.push('\n');
        }
        raw.write_all(preamble.as_bytes())
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(raw);
        writer.write_record(header).map_err(csv_error)?;
        Ok(CsvSink { writer })
    }

    pub fn row(&mut self, row: impl Serialize) -> Result<(), CliError> {
        self.writer.serialize(row).map_err(csv_error)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush().map_err(|e| CliError::Runtime(e.to_string()))
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Path of the sidecar holding run metadata that varies between runs.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Path of the marker left behind by a failed run.
pub fn partial_marker(path: Option<&Path>) -> PathBuf {
    match path {
        Some(p) => {
            let mut s = p.as_os_str().to_owned();
            s.push(".partial");
            PathBuf::from(s)
        }
        None => PathBuf::from(format!("{TOOL}.partial")),
    }
}

#[derive(Serialize)]
pub struct RunMeta<'a> {
    pub tool: &'a str,
    pub version: &'a str,
    pub command: &'a str,
    pub seed: Option<&'a str>,
    pub threads: usize,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
}

pub fn write_meta(path: &Path, meta: &RunMeta<'_>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(meta).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}
