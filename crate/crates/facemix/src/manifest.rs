//! Dataset manifests and JSONL helpers.
//!
//! A manifest is one JSON object per line:
//! `{"path": "<image>", "label": <int>, "landmarks": "<sidecar>"}`.
//! Paths are stored as written (normally relative) and resolved against
//! the manifest's parent directory when loading.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::FaceImage;
use crate::landmarks::{parse_landmark_file, LandmarkSet};
use crate::par;

/// One labeled image with its landmark sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: usize,
    pub landmarks: String,
}

/// An image and its landmarks loaded into memory.
#[derive(Debug, Clone)]
pub struct LoadedSample {
    pub image: FaceImage,
    pub landmarks: LandmarkSet,
    pub label: usize,
}

/// Read a JSONL file into typed records.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

/// Write records as one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    read_jsonl(path)
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    write_jsonl(path, entries)
}

/// Resolve a manifest-relative path.
pub fn resolve(base_dir: &Path, stored: &str) -> PathBuf {
    let p = Path::new(stored);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

/// Load every entry's image and landmarks, in manifest order.
///
/// `manifest_path` anchors relative entry paths. I/O errors carry the
/// offending file path.
pub fn load_samples(
    manifest_path: impl AsRef<Path>,
    entries: &[ManifestEntry],
) -> Result<Vec<LoadedSample>> {
    let base = manifest_path
        .as_ref()
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .to_path_buf();
    par::try_map_indexed(entries, |_, entry| {
        let img_path = resolve(&base, &entry.path);
        let image = FaceImage::load_png(&img_path)?;
        let lm_path = resolve(&base, &entry.landmarks);
        let bytes = fs::read(&lm_path).map_err(|e| Error::io(&lm_path, e))?;
        let landmarks = parse_landmark_file(&bytes)?;
        Ok(LoadedSample {
            image,
            landmarks,
            label: entry.label,
        })
    })
}

/// Number of classes implied by a set of labels (max label + 1).
pub fn class_count(labels: impl IntoIterator<Item = usize>) -> usize {
    labels.into_iter().max().map_or(0, |m| m + 1)
}

/// Append-style helper for writers that stream records line by line.
pub struct JsonlWriter {
    path: PathBuf,
    file: fs::File,
}

impl JsonlWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Self { path, file })
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> Result<()> {
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        self.file
            .write_all(&line)
            .map_err(|e| Error::io(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let entries = vec![
            ManifestEntry {
                path: "img/a.png".into(),
                label: 0,
                landmarks: "lms/a.json".into(),
            },
            ManifestEntry {
                path: "img/b.png".into(),
                label: 2,
                landmarks: "lms/b.json".into(),
            },
        ];
        write_manifest(&path, &entries).unwrap();
        let back = read_manifest(&path).unwrap();
        assert_eq!(back, entries);
    }

    #[test]
    fn read_jsonl_skips_blank_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        fs::write(&path, "{\"path\":\"a\",\"label\":0,\"landmarks\":\"l\"}\n\n").unwrap();
        let back: Vec<ManifestEntry> = read_jsonl(&path).unwrap();
        assert_eq!(back.len(), 1);
    }

    #[test]
    fn class_count_is_max_plus_one() {
        assert_eq!(class_count([0, 2, 1]), 3);
        assert_eq!(class_count([]), 0);
    }
}
