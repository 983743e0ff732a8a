//! Crawl results and the newline-delimited JSON snapshot store.
//!
//! A run writes one file, `<run_id>.ndjson`, holding one [`ScrapeSnapshot`]
//! per crawled domain. Link order inside each fetch is preserved as
//! extracted from the page.

use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Why a fetch produced no HTTP response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransportError {
    Timeout,
    Dns,
    Tls,
    Connect,
    TooManyRedirects,
    RobotsDisallowed,
    InvalidUrl,
    Body,
    Other,
}

impl TransportError {
    pub fn as_str(self) -> &'static str {
        match self {
            TransportError::Timeout => "timeout",
            TransportError::Dns => "dns",
            TransportError::Tls => "tls",
            TransportError::Connect => "connect",
            TransportError::TooManyRedirects => "too-many-redirects",
            TransportError::RobotsDisallowed => "robots-disallowed",
            TransportError::InvalidUrl => "invalid-url",
            TransportError::Body => "body",
            TransportError::Other => "other",
        }
    }
}

/// An HTTP status code or a transport failure tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FetchStatus {
    Http(u16),
    Transport(TransportError),
}

impl FetchStatus {
    pub fn is_success(self) -> bool {
        matches!(self, FetchStatus::Http(code) if (200..300).contains(&code))
    }
}

impl fmt::Display for FetchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FetchStatus::Http(code) => write!(f, "{code}"),
            FetchStatus::Transport(t) => f.write_str(t.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchResult {
    /// Final URL after redirects.
    pub url: String,
    pub status: FetchStatus,
    /// Hex SHA-256 of the body; absent when no body was read.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_hash: Option<String>,
    pub fetched_at: String,
    /// Absolute http(s) URLs in document order. Empty unless `status` is 2xx.
    pub links: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExclusionReason {
    /// The root page answered 404.
    #[serde(rename = "root-404")]
    Root404,
    /// The root page could not be retrieved successfully for any other reason.
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScrapeSnapshot {
    pub run_id: String,
    pub domain: String,
    pub level: u8,
    pub excluded: bool,
    pub reason: Option<ExclusionReason>,
    pub fetches: Vec<FetchResult>,
}

impl ScrapeSnapshot {
    /// Every extracted link across all fetches, in fetch then document order.
    pub fn links(&self) -> impl Iterator<Item = &str> {
        self.fetches
            .iter()
            .flat_map(|f| f.links.iter().map(String::as_str))
    }
}

/// Run ids become file names, so they are restricted to `[A-Za-z0-9._-]`.
pub fn validate_run_id(run_id: &str) -> Result<()> {
    let ok = !run_id.is_empty()
        && !run_id.starts_with('.')
        && run_id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "invalid run id {run_id:?}"
        )))
    }
}

/// Directory of per-run snapshot files.
#[derive(Debug, Clone)]
pub struct SnapshotStore {
    dir: PathBuf,
}

impl SnapshotStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SnapshotStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn run_path(&self, run_id: &str) -> PathBuf {
        self.dir.join(format!("{run_id}.ndjson"))
    }

    pub fn exists(&self, run_id: &str) -> bool {
        self.run_path(run_id).exists()
    }

    /// Start writing a run. Fails if the run exists unless `overwrite` is set.
    pub fn create(&self, run_id: &str, overwrite: bool) -> Result<SnapshotWriter> {
        validate_run_id(run_id)?;
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.run_path(run_id);
        let mut options = OpenOptions::new();
        options.write(true);
        if overwrite {
            options.create(true).truncate(true);
        } else {
            options.create_new(true);
        }
        let file = options.open(&path).map_err(|e| Error::io(&path, e))?;
        Ok(SnapshotWriter {
            path,
            out: BufWriter::new(file),
            written: 0,
        })
    }

    pub fn read(&self, run_id: &str) -> Result<Vec<ScrapeSnapshot>> {
        validate_run_id(run_id)?;
        read_snapshots(&self.run_path(run_id))
    }
}

pub fn read_snapshots(path: &Path) -> Result<Vec<ScrapeSnapshot>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let snapshot = serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(snapshot);
    }
    Ok(out)
}

/// Appends snapshots to a run file, one JSON object per line.
#[derive(Debug)]
pub struct SnapshotWriter {
    path: PathBuf,
    out: BufWriter<File>,
    written: usize,
}

impl SnapshotWriter {
    pub fn append(&mut self, snapshot: &ScrapeSnapshot) -> Result<()> {
        let line = serde_json::to_string(snapshot)?;
        writeln!(self.out, "{line}").map_err(|e| Error::io(&self.path, e))?;
        self.out.flush().map_err(|e| Error::io(&self.path, e))?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}
