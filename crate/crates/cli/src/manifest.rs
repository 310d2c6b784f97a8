//! Pool manifests: the on-disk description of a case pool.
//!
//! TOML document with an optional dataset-level seed and one `[[case]]` table
//! per case: `id` (required, unique), `image` / `truth` (paths relative to
//! the manifest file) and `difficulty`, each optional. Referenced files must
//! exist at load time; validation happens before any compute starts.

use crate::maskfile::{self, MaskFileError};
use eigenrank_core::{BackendError, BinaryMask, CaseId, GroundTruthSource, Pool, SyntheticBackend};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {}: {detail}", path.display())]
    Parse { path: PathBuf, detail: String },
    #[error("manifest {} contains an empty case id", path.display())]
    EmptyId { path: PathBuf },
    #[error("manifest lists case id {id:?} more than once")]
    DuplicateId { id: String },
    #[error("case {case}: referenced file {} does not exist", path.display())]
    MissingFile { case: String, path: PathBuf },
    #[error("case {case} has no {field}, required by the synthetic backend")]
    MissingField { case: String, field: &'static str },
    #[error(transparent)]
    Mask(#[from] MaskFileError),
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ManifestDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, rename = "case")]
    pub cases: Vec<CaseDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct CaseDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<f64>,
}

/// One validated manifest entry with paths resolved against the manifest dir.
#[derive(Debug, Clone)]
pub struct ManifestCase {
    pub id: CaseId,
    pub image: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub difficulty: Option<f64>,
}

/// A loaded, validated pool manifest.
#[derive(Debug)]
pub struct PoolManifest {
    /// Dataset-level generation seed; commands take their run seeds
    /// explicitly, this one just travels with the document.
    #[allow(dead_code)]
    pub seed: Option<u64>,
    pub cases: Vec<ManifestCase>,
    index: BTreeMap<CaseId, usize>,
}

impl PoolManifest {
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let doc: ManifestDoc = toml::from_str(&text).map_err(|e| ManifestError::Parse {
            path: path.to_path_buf(),
            // parser messages span lines; error output is one line per reason
            detail: e
                .to_string()
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" "),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));

        let mut cases = Vec::with_capacity(doc.cases.len());
        let mut index = BTreeMap::new();
        for entry in doc.cases {
            let id = CaseId::new(entry.id.clone()).map_err(|_| ManifestError::EmptyId {
                path: path.to_path_buf(),
            })?;
            if index.contains_key(&id) {
                return Err(ManifestError::DuplicateId { id: entry.id });
            }
            let resolve = |rel: Option<String>| -> Result<Option<PathBuf>, ManifestError> {
                match rel {
                    None => Ok(None),
                    Some(rel) => {
                        let resolved = base.join(rel);
                        if !resolved.exists() {
                            return Err(ManifestError::MissingFile {
                                case: id.as_str().to_string(),
                                path: resolved,
                            });
                        }
                        Ok(Some(resolved))
                    }
                }
            };
            let case = ManifestCase {
                image: resolve(entry.image)?,
                truth: resolve(entry.truth)?,
                difficulty: entry.difficulty,
                id: id.clone(),
            };
            index.insert(id, cases.len());
            cases.push(case);
        }
        Ok(Self {
            seed: doc.seed,
            cases,
            index,
        })
    }

    pub fn pool(&self) -> Pool {
        Pool::new(self.cases.iter().map(|c| c.id.clone()).collect())
            .expect("ids validated unique at load")
    }

    pub fn case(&self, id: &CaseId) -> Option<&ManifestCase> {
        self.index.get(id).map(|&i| &self.cases[i])
    }

    /// Build the in-process synthetic backend: every case needs a difficulty
    /// and a truth mask.
    pub fn synthetic_backend(&self) -> Result<SyntheticBackend, ManifestError> {
        let mut parts = Vec::with_capacity(self.cases.len());
        for case in &self.cases {
            let difficulty = case.difficulty.ok_or_else(|| ManifestError::MissingField {
                case: case.id.as_str().to_string(),
                field: "difficulty",
            })?;
            let truth_path = case
                .truth
                .as_ref()
                .ok_or_else(|| ManifestError::MissingField {
                    case: case.id.as_str().to_string(),
                    field: "truth",
                })?;
            let truth = maskfile::read_mask(truth_path)?;
            parts.push((case.id.clone(), difficulty, truth));
        }
        Ok(SyntheticBackend::from_parts(parts))
    }

    /// Ground-truth access backed by the manifest's truth paths.
    pub fn truth_source(&self) -> ManifestTruth {
        ManifestTruth {
            paths: self
                .cases
                .iter()
                .filter_map(|c| c.truth.clone().map(|p| (c.id.clone(), p)))
                .collect(),
        }
    }

    pub fn has_truth_for_all(&self) -> bool {
        self.cases.iter().all(|c| c.truth.is_some())
    }
}

/// Reads truth masks on demand from manifest paths.
pub struct ManifestTruth {
    paths: BTreeMap<CaseId, PathBuf>,
}

impl GroundTruthSource for ManifestTruth {
    fn truth(&self, case: &CaseId) -> Result<BinaryMask, BackendError> {
        let path = self
            .paths
            .get(case)
            .ok_or_else(|| format!("no truth mask listed for case {case}"))?;
        Ok(maskfile::read_mask(path)?)
    }
}

/// Serialize and atomically write a manifest document.
pub(crate) fn write_manifest(path: &Path, doc: &ManifestDoc) -> Result<(), ManifestError> {
    let text = toml::to_string(doc).expect("manifest documents always serialize");
    maskfile::atomic_write(path, text.as_bytes()).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maskfile::write_mask;

    fn write_tmp_mask(dir: &Path, name: &str) -> PathBuf {
        let path = dir.join(name);
        write_mask(&BinaryMask::filled(4, 4, 1).unwrap(), &path).unwrap();
        path
    }

    #[test]
    fn load_validates_and_resolves() {
        let dir = tempfile::tempdir().unwrap();
        write_tmp_mask(dir.path(), "a.emsk");
        let manifest_path = dir.path().join("manifest.toml");
        fs::write(
            &manifest_path,
            "seed = 7\n[[case]]\nid = \"a\"\ntruth = \"a.emsk\"\ndifficulty = 0.5\n",
        )
        .unwrap();
        let manifest = PoolManifest::load(&manifest_path).unwrap();
        assert_eq!(manifest.seed, Some(7));
        assert_eq!(manifest.pool().len(), 1);
        assert!(manifest.has_truth_for_all());
        let backend = manifest.synthetic_backend().unwrap();
        assert_eq!(backend.pool().len(), 1);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = dir.path().join("manifest.toml");
        fs::write(
            &manifest_path,
            "[[case]]\nid = \"a\"\n[[case]]\nid = \"a\"\n",
        )
        .unwrap();
        assert!(matches!(
            PoolManifest::load(&manifest_path),
            Err(ManifestError::DuplicateId { .. })
        ));
    }

    #[test]
    fn missing_files_are_rejected_at_load() {
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = dir.path().join("manifest.toml");
        fs::write(
            &manifest_path,
            "[[case]]\nid = \"a\"\ntruth = \"gone.emsk\"\n",
        )
        .unwrap();
        assert!(matches!(
            PoolManifest::load(&manifest_path),
            Err(ManifestError::MissingFile { .. })
        ));
    }

    #[test]
    fn synthetic_backend_requires_fields() {
        let dir = tempfile::tempdir().unwrap();
        write_tmp_mask(dir.path(), "a.emsk");
        let manifest_path = dir.path().join("manifest.toml");
        fs::write(&manifest_path, "[[case]]\nid = \"a\"\ntruth = \"a.emsk\"\n").unwrap();
        let manifest = PoolManifest::load(&manifest_path).unwrap();
        assert!(matches!(
            manifest.synthetic_backend(),
            Err(ManifestError::MissingField {
                field: "difficulty",
                ..
            })
        ));
    }

    #[test]
    fn parse_errors_carry_detail() {
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = dir.path().join("manifest.toml");
        fs::write(&manifest_path, "not toml [").unwrap();
        assert!(matches!(
            PoolManifest::load(&manifest_path),
            Err(ManifestError::Parse { .. })
        ));
    }
}
