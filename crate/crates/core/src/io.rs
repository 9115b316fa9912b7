//! Artifact output: JSON reports, round-trip CSV tables, binary field dumps
//! and a manifest with content hashes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::frw4::{GridSpec, SpectralField};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Rust's `Display` for `f64` is the shortest string that parses back to the
/// same value.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub format: String,
    pub grid: GridSpec,
    pub real: bool,
    pub xi: f64,
    /// Complex values as interleaved little-endian `f64` pairs.
    pub values: usize,
}

pub const FIELD_FORMAT: &str = "twistqft-field-v1";

pub fn field_bytes(field: &SpectralField) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * field.values.len());
    for v in &field.values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn field_from_bytes(header: &FieldHeader, bytes: &[u8]) -> Result<SpectralField> {
    if header.format != FIELD_FORMAT {
        return Err(Error::Io(format!("unknown field format {:?}", header.format)));
    }
    if header.values != header.grid.len() || bytes.len() != 16 * header.values {
        return Err(Error::Io(format!(
            "field payload has {} bytes, header expects {} values on a grid of {}",
            bytes.len(),
            header.values,
            header.grid.len()
        )));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("chunk of 16"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("chunk of 16"));
            Complex64::new(re, im)
        })
        .collect();
    let mut field = SpectralField::new(header.grid.clone(), values)?;
    field.real = header.real;
    Ok(field)
}

/// Writes `<stem>.json` and `<stem>.bin`.
pub fn write_field(stem: &Path, field: &SpectralField, xi: f64) -> Result<()> {
    let header = FieldHeader {
        format: FIELD_FORMAT.into(),
        grid: field.grid.clone(),
        real: field.real,
        xi,
        values: field.values.len(),
    };
    fs::write(stem.with_extension("json"), json_string(&header)?)?;
    fs::write(stem.with_extension("bin"), field_bytes(field))?;
    Ok(())
}

pub fn read_field(stem: &Path) -> Result<(SpectralField, f64)> {
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(stem.with_extension("json"))?)
        .map_err(|e| Error::Io(e.to_string()))?;
    let bytes = fs::read(stem.with_extension("bin"))?;
    Ok((field_from_bytes(&header, &bytes)?, header.xi))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub artifacts: Vec<ArtifactEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Output directory that records every file it writes.
#[derive(Debug)]
pub struct ArtifactDir {
    root: PathBuf,
    entries: Vec<ArtifactEntry>,
}

impl ArtifactDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root, entries: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, data).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(ArtifactEntry { path: name.into(), sha256: sha256_hex(data) });
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        self.bytes(name, json_string(value)?.as_bytes())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf> {
        self.bytes(name, csv_string(header, rows).as_bytes())
    }

    pub fn field(&mut self, stem: &str, field: &SpectralField, xi: f64) -> Result<()> {
        let header = FieldHeader {
            format: FIELD_FORMAT.into(),
            grid: field.grid.clone(),
            real: field.real,
            xi,
            values: field.values.len(),
        };
        self.json(&format!("{stem}.json"), &header)?;
        self.bytes(&format!("{stem}.bin"), &field_bytes(field))?;
        Ok(())
    }

    pub fn entries(&self) -> &[ArtifactEntry] {
        &self.entries
    }

    /// Writes the manifest; artifacts are listed in name order.
    pub fn finish(mut self, command: &str, config_text: &str, seed: u64) -> Result<Manifest> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed,
            artifacts: self.entries,
        };
        let path = self.root.join(MANIFEST_NAME);
        fs::write(&path, json_string(&manifest)?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frw4::{Lattice, TimeGrid};

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, f64::MAX, 5e-324, 123456789.0] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn field_round_trip() {
        let grid = GridSpec::new(TimeGrid::new(1.0, 2.0, 5).unwrap(), Lattice::cubic(4, 3.0).unwrap());
        let f = SpectralField::from_fn(&grid, |t, x| t * (x[0] - 0.3 * x[2]).cos());
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("phi");
        write_field(&stem, &f, 0.25).unwrap();
        let (g, xi) = read_field(&stem).unwrap();
        assert_eq!(g, f);
        assert_eq!(xi, 0.25);
        let header: FieldHeader = serde_json::from_str(&fs::read_to_string(stem.with_extension("json")).unwrap()).unwrap();
        assert!(field_from_bytes(&header, &field_bytes(&f)[..32]).is_err());
    }

    #[test]
    fn manifest_lists_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = ArtifactDir::create(dir.path().join("run")).unwrap();
        out.csv("b.csv", &["x", "y"], &[vec![1.0, 0.5]]).unwrap();
        out.json("a.json", &vec![1, 2]).unwrap();
        let m = out.finish("test", "seed=1\n", 1).unwrap();
        assert_eq!(m.artifacts[0].path, "a.json");
        let text = fs::read(dir.path().join("run/b.csv")).unwrap();
        assert_eq!(text, b"x,y\n1,0.5\n");
        assert_eq!(m.artifacts[1].sha256, sha256_hex(&text));
        assert_eq!(sha256_hex(b"").len(), 64);
    }
}
