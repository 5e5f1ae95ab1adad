//! Artifact files: CSV/JSONL bodies, atomic writes and the run manifest.

use crate::error::Result;
use crate::seeding::SAMPLER_SCHEME;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Version tag of every emitted file layout.
pub const SCHEMA_VERSION: &str = "rmf-lab-schema-1";

/// Long-format CSV with a leading `#` comment row naming the schema, the
/// sampler scheme and the run parameters.
pub struct Csv {
    body: String,
}

impl Csv {
    pub fn new(table: &str, meta: &[(&str, String)], columns: &[&str]) -> Self {
        let mut body = format!("# schema={SCHEMA_VERSION}/{table} sampler={SAMPLER_SCHEME}");
        for (k, v) in meta {
            let _ = write!(body, " {k}={v}");
        }
        body.push('\n');
        body.push_str(&columns.join(","));
        body.push('\n');
        Self { body }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.body.push(',');
            }
            self.body.push_str(f.as_ref());
            first = false;
        }
        self.body.push('\n');
    }

    pub fn into_string(self) -> String {
        self.body
    }
}

/// Shortest round-trip rendering of a float; empty for `None`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// One JSON object per line.
pub fn jsonl<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).map_err(|e| crate::Error::Invariant(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Writes files into one directory, each through a temporary file and a
/// rename, and records their checksums.
pub struct ArtifactWriter {
    dir: PathBuf,
    records: Vec<FileRecord>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), records: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.dir.join(name), contents.as_bytes())?;
        self.records.push(FileRecord {
            name: name.to_string(),
            bytes: contents.len() as u64,
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    pub fn records(&self) -> &[FileRecord] {
        &self.records
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut c = Csv::new("demo", &[("seed", "3".into())], &["a", "b"]);
        c.row([num(0.1), opt_num(None)]);
        assert_eq!(
            c.into_string(),
            format!("# schema={SCHEMA_VERSION}/demo sampler={SAMPLER_SCHEME} seed=3\na,b\n0.1,\n")
        );
    }

    #[test]
    fn atomic_write_and_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path()).unwrap();
        w.write("x.txt", "abc").unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("x.txt")).unwrap(), "abc");
        assert_eq!(
            w.records()[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }
}
