//! Headered JSONL and CSV persistence shared by all pipeline stages.
//!
//! Every file the toolkit emits starts with a manifest header carrying the
//! config hash, the master seed, and the tool version, so that any output can
//! be traced back to the exact run that produced it. Readers in this module
//! skip that header transparently.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AuditError, Result};

/// Provenance header written as the first line/rows of every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHeader {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl FileHeader {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        FileHeader {
            config_hash: config_hash.into(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: FileHeader,
}

/// A row that failed to deserialize, reported with its 1-based line number.
#[derive(Debug, Clone)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

fn is_header_line(line: &str) -> bool {
    serde_json::from_str::<HeaderLine>(line).is_ok()
}

/// Reads a JSONL file, skipping a leading manifest header and blank lines.
/// Any malformed row aborts with its line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let (rows, errors) = read_jsonl_lenient(path)?;
    if let Some(first) = errors.first() {
        return Err(AuditError::malformed(path, first.line, first.message.clone()));
    }
    Ok(rows)
}

/// Like [`read_jsonl`] but collects per-row failures instead of aborting,
/// so callers can report unmappable rows with line numbers.
pub fn read_jsonl_lenient<T: DeserializeOwned>(path: &Path) -> Result<(Vec<T>, Vec<RowError>)> {
    let file = File::open(path).map_err(|e| AuditError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| AuditError::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if idx == 0 && is_header_line(trimmed) {
            continue;
        }
        match serde_json::from_str::<T>(trimmed) {
            Ok(row) => rows.push(row),
            Err(e) => errors.push(RowError {
                line: idx + 1,
                message: e.to_string(),
            }),
        }
    }
    Ok((rows, errors))
}

/// Reads just the manifest header of a JSONL file, if present.
pub fn read_jsonl_header(path: &Path) -> Result<Option<FileHeader>> {
    let file = File::open(path).map_err(|e| AuditError::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| AuditError::io(path, e))?;
    Ok(serde_json::from_str::<HeaderLine>(first.trim())
        .ok()
        .map(|h| h.header))
}

/// Writes a JSONL file with an optional manifest header line.
pub fn write_jsonl<T: Serialize>(
    path: &Path,
    header: Option<&FileHeader>,
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    let mut file = File::create(path).map_err(|e| AuditError::io(path, e))?;
    if let Some(h) = header {
        let line = serde_json::to_string(&HeaderLine { header: h.clone() })
            .expect("header serializes");
        writeln!(file, "{line}").map_err(|e| AuditError::io(path, e))?;
    }
    for row in rows {
        let line = serde_json::to_string(&row)
            .map_err(|e| AuditError::malformed(path, 0, e.to_string()))?;
        writeln!(file, "{line}").map_err(|e| AuditError::io(path, e))?;
    }
    file.flush().map_err(|e| AuditError::io(path, e))?;
    Ok(())
}

/// Serializes one record as a single line and appends it with one write call,
/// so a killed run never leaves a torn record behind.
pub fn append_jsonl_record<T: Serialize>(file: &mut File, path: &Path, row: &T) -> Result<()> {
    let mut line = serde_json::to_string(row)
        .map_err(|e| AuditError::malformed(path, 0, e.to_string()))?;
    line.push('\n');
    file.write_all(line.as_bytes())
        .map_err(|e| AuditError::io(path, e))?;
    file.flush().map_err(|e| AuditError::io(path, e))?;
    Ok(())
}

/// Plain CSV emitter: `#`-prefixed manifest lines, then a column header,
/// then rows. Fields are written verbatim; callers only pass comma-free
/// values (codes, numbers, space-joined tokens).
pub struct CsvFile {
    lines: Vec<String>,
}

impl CsvFile {
    pub fn new(header: &FileHeader, columns: &[&str]) -> Self {
        let mut lines = vec![
            format!("# config_hash={}", header.config_hash),
            format!("# seed={}", header.seed),
            format!("# version={}", header.version),
        ];
        lines.push(columns.join(","));
        CsvFile { lines }
    }

    /// Extra `#`-prefixed annotation placed with the manifest block.
    pub fn note(&mut self, note: &str) {
        self.lines.insert(self.lines.len() - 1, format!("# {note}"));
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert!(fields.iter().all(|f| !f.contains(',') && !f.contains('\n')));
        self.lines.push(fields.join(","));
    }

    pub fn to_string(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string()).map_err(|e| AuditError::io(path, e))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// First 16 hex characters of SHA-256; used for content-addressed run
/// directories and config hashes.
pub fn short_hash(bytes: &[u8]) -> String {
    sha256_hex(bytes)[..16].to_string()
}

/// SHA-256 of a file's contents, for input manifests.
pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| AuditError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}
