//! On-disk layout, checksummed files and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::PipelineError;

pub const MANIFEST: &str = "manifest.json";

/// Paths of a run directory.
#[derive(Clone, Debug)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn stages(&self) -> PathBuf {
        self.root.join("stages")
    }

    pub fn stage(&self, tag: &str) -> PathBuf {
        self.stages().join(format!("stage-{tag}.json"))
    }

    pub fn checkpoints(&self, tag: &str) -> PathBuf {
        self.root.join("checkpoints").join(tag)
    }

    pub fn contexts(&self) -> PathBuf {
        self.root.join("contexts")
    }

    /// `name` is one of `K1`, `K2`, `K3`.
    pub fn context(&self, name: &str) -> PathBuf {
        self.contexts().join(format!("{name}.cxt"))
    }

    pub fn report(&self) -> PathBuf {
        self.root.join("reports").join("report.json")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join(MANIFEST)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".sha256");
    PathBuf::from(s)
}

/// Writes via a temporary file and rename, so a killed run never leaves a
/// half-written file under the final name.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `bytes` together with a digest sidecar.
pub fn write_sealed(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    write_atomic(path, bytes)?;
    write_atomic(&sidecar(path), format!("{}\n", sha256_hex(bytes)).as_bytes())
}

/// Reads a sealed file, or `None` if it does not exist.
pub fn read_sealed(path: &Path) -> Result<Option<Vec<u8>>, PipelineError> {
    if !path.exists() {
        return Ok(None);
    }
    let bytes = fs::read(path)?;
    let integrity = |message: String| PipelineError::Integrity {
        path: path.display().to_string(),
        message,
    };
    let expected = fs::read_to_string(sidecar(path)).map_err(|e| integrity(format!("no checksum: {e}")))?;
    let actual = sha256_hex(&bytes);
    if expected.trim() != actual {
        return Err(integrity(format!(
            "checksum {actual} does not match recorded {}",
            expected.trim()
        )));
    }
    Ok(Some(bytes))
}

fn relative_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), PipelineError> {
    if !dir.exists() {
        return Ok(());
    }
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            relative_files(root, &path, out)?;
        } else if !path.to_string_lossy().ends_with(".sha256") {
            out.push(path.strip_prefix(root).expect("under root").to_path_buf());
        }
    }
    Ok(())
}

/// Digests of every result file under `stages/`, `contexts/` and `reports/`.
pub fn collect_digests(layout: &Layout) -> Result<BTreeMap<String, String>, PipelineError> {
    let root = layout.root();
    let mut files = Vec::new();
    for dir in ["stages", "contexts", "reports"] {
        relative_files(root, &root.join(dir), &mut files)?;
    }
    files
        .into_iter()
        .map(|rel| {
            let bytes = fs::read(root.join(&rel))?;
            Ok((rel.to_string_lossy().replace('\\', "/"), sha256_hex(&bytes)))
        })
        .collect()
}

pub fn write_manifest(layout: &Layout) -> Result<BTreeMap<String, String>, PipelineError> {
    let digests = collect_digests(layout)?;
    let text = serde_json::to_string_pretty(&digests).expect("serialisable") + "\n";
    write_atomic(&layout.manifest(), text.as_bytes())?;
    Ok(digests)
}

/// Compares the files on disk with the recorded manifest.
pub fn check_manifest(layout: &Layout) -> Result<(), PipelineError> {
    let path = layout.manifest();
    let text = fs::read_to_string(&path)?;
    let recorded: BTreeMap<String, String> =
        serde_json::from_str(&text).map_err(|e| PipelineError::Json(format!("{}: {e}", path.display())))?;
    let actual = collect_digests(layout)?;
    for (file, digest) in &recorded {
        match actual.get(file) {
            Some(d) if d == digest => {}
            Some(_) => {
                return Err(PipelineError::Integrity {
                    path: file.clone(),
                    message: "content differs from manifest".into(),
                })
            }
            None => {
                return Err(PipelineError::Integrity {
                    path: file.clone(),
                    message: "listed in manifest but missing".into(),
                })
            }
        }
    }
    if let Some(extra) = actual.keys().find(|f| !recorded.contains_key(*f)) {
        return Err(PipelineError::Integrity {
            path: extra.clone(),
            message: "not listed in manifest".into(),
        });
    }
    Ok(())
}
