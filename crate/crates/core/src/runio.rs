//! Run artifacts on disk: atomic writes, the per-run directory layout, and
//! a content-addressed cache for exhaustive-search results.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::lattice::LatticeKind;
use crate::optimize::{RestartSummary, RunRecord};
use crate::oracle::{OracleKey, StoredOracle};

/// Write via a sibling temp file and rename, so readers never observe a
/// partially written artifact.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    std::io::Write::write_all(&mut tmp, contents.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, &text)
}

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    format!("{:x}", hasher.finalize())
}

/// File layout of one training run directory.
pub struct RunDir {
    pub root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunDir { root: root.into() }
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn summary_path(&self) -> PathBuf {
        self.root.join("summary.json")
    }

    fn restart_dir(&self, index: usize) -> PathBuf {
        self.root.join(format!("restart_{index:02}"))
    }

    pub fn write_manifest<T: Serialize>(&self, manifest: &T) -> Result<()> {
        write_json(&self.manifest_path(), manifest)
    }

    pub fn write_summary(&self, summary: &RestartSummary) -> Result<()> {
        write_json(&self.summary_path(), summary)
    }

    /// Persist one restart: CVaR trace, bitstring ledger, best parameters.
    pub fn write_restart(&self, record: &RunRecord) -> Result<()> {
        let dir = self.restart_dir(record.restart_index);
        let mut trace = String::from("iteration,cvar\n");
        for (i, c) in record.cvar_trace.iter().enumerate() {
            trace.push_str(&format!("{i},{c}\n"));
        }
        atomic_write(&dir.join("trace.csv"), &trace)?;

        let mut ledger = String::from("bitstring,energy,first_seen_iter\n");
        for (bits, entry) in &record.ledger {
            ledger.push_str(&format!(
                "{bits},{},{}\n",
                entry.energy, entry.first_seen_iter
            ));
        }
        atomic_write(&dir.join("ledger.csv"), &ledger)?;

        write_json(&dir.join("params.json"), record)
    }
}

/// Cache key: hash over everything the exhaustive search result depends on.
pub fn oracle_cache_key(
    sequence: &str,
    lattice: LatticeKind,
    max_k: usize,
    exclude_bonded: bool,
    matrix_sha256: &str,
) -> String {
    sha256_hex(&format!(
        "{sequence}|{lattice}|{max_k}|{exclude_bonded}|{matrix_sha256}"
    ))
}

pub fn oracle_cache_path(cache_dir: &Path, key: &str) -> PathBuf {
    cache_dir.join(format!("{key}.json"))
}

/// Load a cached exhaustive-search result if one exists and its stored key
/// fields match the request exactly.
pub fn load_cached_oracle(cache_dir: &Path, key: &OracleKey) -> Option<StoredOracle> {
    let hash = oracle_cache_key(
        &key.sequence,
        key.lattice,
        key.max_k,
        key.exclude_bonded,
        &key.matrix_sha256,
    );
    let path = oracle_cache_path(cache_dir, &hash);
    let text = fs::read_to_string(path).ok()?;
    let stored: StoredOracle = serde_json::from_str(&text).ok()?;
    let k = &stored.key;
    (k.sequence == key.sequence
        && k.lattice == key.lattice
        && k.max_k == key.max_k
        && k.exclude_bonded == key.exclude_bonded
        && k.matrix_sha256 == key.matrix_sha256)
        .then_some(stored)
}

pub fn store_cached_oracle(cache_dir: &Path, stored: &StoredOracle) -> Result<()> {
    let key = &stored.key;
    let hash = oracle_cache_key(
        &key.sequence,
        key.lattice,
        key.max_k,
        key.exclude_bonded,
        &key.matrix_sha256,
    );
    write_json(&oracle_cache_path(cache_dir, &hash), stored)
}
