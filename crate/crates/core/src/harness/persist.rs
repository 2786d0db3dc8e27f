//! Content-addressed result files.
//!
//! A run is a pair of files in one directory:
//!
//! * `<kind>-<id>.manifest`: UTF-8 `key = value` lines, keys sorted. It echoes
//!   the configuration, the per-realization seeds, the crate version, solver
//!   tolerances and `table.sha256`, the SHA-256 of the table file.
//! * `<kind>-<id>.csv`: comma-separated table with a header row.
//!
//! `<id>` is the first 64 bits, in hex, of the SHA-256 of the manifest bytes.
//! Identical runs therefore produce identical file names and bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_SUFFIX: &str = "manifest";
pub const TABLE_SUFFIX: &str = "csv";

/// Sorted key/value record attached to every persisted result.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunManifest {
    entries: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let (key, value) = (key.into(), value.into());
        assert!(
            !key.contains('=') && !key.contains('\n') && key.trim() == key && !key.is_empty(),
            "invalid manifest key {key:?}"
        );
        assert!(!value.contains('\n'), "manifest values are single-line");
        self.entries.insert(key, value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Canonical text: one `key = value` line per entry in key order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = RunManifest::new();
        for (i, line) in text.lines().enumerate() {
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| Error::Integrity(format!("manifest line {} is not `key = value`", i + 1)))?;
            if m.entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Integrity(format!("manifest key {k} repeated")));
            }
        }
        Ok(m)
    }

    /// 64-bit hex digest of the canonical text.
    pub fn run_id(&self) -> String {
        short_digest(self.to_text().as_bytes())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn short_digest(bytes: &[u8]) -> String {
    sha256_hex(bytes)[..16].to_string()
}

/// A result type with a CSV table representation.
pub trait Persist: Sized {
    /// File name prefix and manifest `kind`.
    const KIND: &'static str;
    const COLUMNS: &'static [&'static str];

    fn rows(&self) -> Vec<Vec<String>>;

    /// Rebuilds the result from its table and manifest.
    fn from_table(file: &str, table: &str, manifest: &RunManifest) -> Result<Self>;

    /// Adds result-level entries to the manifest before it is hashed.
    fn annotate(&self, _manifest: &mut RunManifest) {}

    fn to_table(&self) -> String {
        let mut s = Self::COLUMNS.join(",");
        s.push('\n');
        for row in self.rows() {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Splits a table into cells, checking the header and the column count.
pub(crate) fn parse_table(file: &str, table: &str, columns: &[&str]) -> Result<Vec<Vec<String>>> {
    let schema = |row: usize, column: &str, reason: String| Error::Schema {
        file: file.into(),
        row,
        column: column.into(),
        reason,
    };
    let mut lines = table.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    for (i, want) in columns.iter().enumerate() {
        match header.get(i) {
            Some(got) if got.trim() == *want => {}
            got => return Err(schema(0, want, format!("header has {got:?}"))),
        }
    }
    if header.len() > columns.len() {
        return Err(schema(0, header[columns.len()], "unexpected column".into()));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
        if cells.len() < columns.len() {
            return Err(schema(i + 1, columns[cells.len()], "missing value".into()));
        }
        if cells.len() > columns.len() {
            return Err(schema(
                i + 1,
                "<extra>",
                format!("{} values for {} columns", cells.len(), columns.len()),
            ));
        }
        rows.push(cells);
    }
    Ok(rows)
}

pub(crate) fn parse_cell<T: FromStr>(file: &str, row: usize, column: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Schema {
        file: file.into(),
        row,
        column: column.into(),
        reason: format!("cannot parse {raw:?}"),
    })
}

pub(crate) fn manifest_number<T: FromStr>(manifest: &RunManifest, key: &str) -> Result<T> {
    manifest
        .get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Integrity(format!("manifest lacks a valid {key}")))
}

/// Paths and id of a persisted run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SavedRun {
    pub run_id: String,
    pub manifest: PathBuf,
    pub table: PathBuf,
}

fn paths(dir: &Path, kind: &str, id: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{kind}-{id}.{MANIFEST_SUFFIX}")),
        dir.join(format!("{kind}-{id}.{TABLE_SUFFIX}")),
    )
}

/// Writes the table and manifest; rewriting an identical run is a no-op.
pub fn save_run<T: Persist>(result: &T, manifest: &RunManifest, dir: &Path) -> Result<SavedRun> {
    let table = result.to_table();
    let mut manifest = manifest.clone();
    result.annotate(&mut manifest);
    manifest.insert("kind", T::KIND);
    manifest.insert("table.sha256", sha256_hex(table.as_bytes()));
    let text = manifest.to_text();
    let id = short_digest(text.as_bytes());
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (mpath, tpath) = paths(dir, T::KIND, &id);
    fs::write(&tpath, &table).map_err(|e| Error::io(&tpath, e))?;
    fs::write(&mpath, &text).map_err(|e| Error::io(&mpath, e))?;
    Ok(SavedRun {
        run_id: id,
        manifest: mpath,
        table: tpath,
    })
}

/// Reads a run back, validating the manifest hash, the table schema and the
/// table digest, in that order.
pub fn load_run<T: Persist>(dir: &Path, run_id: &str) -> Result<(T, RunManifest)> {
    let empty = match fs::read_dir(dir) {
        Ok(mut it) => it.next().is_none(),
        Err(_) => true,
    };
    if empty {
        return Err(Error::NotFound(format!("no runs in {}", dir.display())));
    }
    let (mpath, tpath) = paths(dir, T::KIND, run_id);
    let text = fs::read_to_string(&mpath)
        .map_err(|_| Error::Integrity(format!("manifest {} is missing or unreadable", mpath.display())))?;
    let actual = short_digest(text.as_bytes());
    if actual != run_id {
        return Err(Error::Integrity(format!(
            "manifest {} hashes to {actual}, not {run_id}",
            mpath.display()
        )));
    }
    let manifest = RunManifest::parse(&text)?;
    if manifest.get("kind") != Some(T::KIND) {
        return Err(Error::Integrity(format!(
            "manifest {} is not a {} run",
            mpath.display(),
            T::KIND
        )));
    }
    let table = fs::read_to_string(&tpath)
        .map_err(|_| Error::Integrity(format!("table {} is missing or unreadable", tpath.display())))?;
    let name = tpath
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let result = T::from_table(&name, &table, &manifest)?;
    let digest = sha256_hex(table.as_bytes());
    if manifest.get("table.sha256") != Some(digest.as_str()) {
        return Err(Error::Integrity(format!(
            "table {} does not match the digest recorded in its manifest",
            tpath.display()
        )));
    }
    Ok((result, manifest))
}
