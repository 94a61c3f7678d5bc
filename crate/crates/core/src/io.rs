//! Output files: JSON manifests, raw field snapshots with JSON sidecars and tidy CSV.
//! Every file carries the library version and the hash of the run configuration.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::born_wave::GridField;
use crate::error::{Error, Result};

pub use crate::VERSION;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the canonical (key-sorted, compact) JSON form of a configuration.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let value = serde_json::to_value(config)?;
    Ok(sha256_hex(&serde_json::to_vec(&value)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: String,
    pub version: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub files: Vec<FileEntry>,
    pub results: serde_json::Value,
    pub pass: Option<bool>,
}

impl Manifest {
    pub fn new<T: Serialize>(kind: &str, config: &T) -> Result<Self> {
        Ok(Self {
            kind: kind.into(),
            version: VERSION.into(),
            config_hash: config_hash(config)?,
            config: serde_json::to_value(config)?,
            files: Vec::new(),
            results: serde_json::Value::Null,
            pass: None,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_bytes(path, &serde_json::to_vec_pretty(self)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Writes `bytes` to `dir/name` and returns its manifest entry.
pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<FileEntry> {
    write_bytes(&dir.join(name), bytes)?;
    Ok(FileEntry { name: name.into(), sha256: sha256_hex(bytes) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub m: usize,
    pub l: f64,
    pub time: Option<f64>,
    /// Interleaved little-endian f64 `(re, im)`, row-major with the last axis fastest.
    pub layout: String,
    pub data_sha256: String,
    pub config_hash: String,
    pub version: String,
}

const LAYOUT: &str = "c64le-row-major";

/// `dir/stem.bin` plus `dir/stem.json`.
pub fn write_field(dir: &Path, stem: &str, f: &GridField, time: Option<f64>, config_hash: &str) -> Result<Vec<FileEntry>> {
    let mut bytes = Vec::with_capacity(16 * f.data().len());
    for z in f.data() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    let bin = write_file(dir, &format!("{stem}.bin"), &bytes)?;
    let side = FieldSidecar {
        m: f.m(),
        l: f.l(),
        time,
        layout: LAYOUT.into(),
        data_sha256: bin.sha256.clone(),
        config_hash: config_hash.into(),
        version: VERSION.into(),
    };
    let json = write_file(dir, &format!("{stem}.json"), &serde_json::to_vec_pretty(&side)?)?;
    Ok(vec![bin, json])
}

pub fn read_field(dir: &Path, stem: &str) -> Result<(GridField, FieldSidecar)> {
    let side: FieldSidecar = serde_json::from_slice(&std::fs::read(dir.join(format!("{stem}.json")))?)?;
    if side.layout != LAYOUT {
        return Err(Error::Io(format!("unknown field layout {}", side.layout)));
    }
    let bytes = std::fs::read(dir.join(format!("{stem}.bin")))?;
    if sha256_hex(&bytes) != side.data_sha256 {
        return Err(Error::Io(format!("{stem}.bin does not match its sidecar hash")));
    }
    if bytes.len() != 16 * side.m.pow(3) {
        return Err(Error::Io(format!("{stem}.bin has {} bytes, expected {}", bytes.len(), 16 * side.m.pow(3))));
    }
    let data = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok((GridField::from_samples(side.m, side.l, data)?, side))
}

/// `#` comment line naming the library version and config hash.
pub fn provenance_line(config_hash: &str) -> String {
    format!("# backscatter {VERSION} config {config_hash}\n")
}

/// Tidy CSV, one row per record, after the provenance line.
pub fn csv_bytes<T: Serialize>(rows: &[T], config_hash: &str) -> Result<Vec<u8>> {
    let mut out = provenance_line(config_hash).into_bytes();
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    out.extend(w.into_inner().map_err(|e| Error::Io(e.to_string()))?);
    Ok(out)
}

pub fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T], config_hash: &str) -> Result<FileEntry> {
    write_file(dir, name, &csv_bytes(rows, config_hash)?)
}
