//! Subprocess segmenter backend: the seam where a real training system
//! attaches without recompilation.
//!
//! Protocol:
//!   - train:   `<cmd> train --manifest <subset-manifest> --model-out <dir>`
//!   - predict: `<cmd> predict --model <dir> --image <path> --out <mask-path>`
//!
//! The subset manifest is a regular pool manifest restricted to the training
//! subset, with absolute paths and the engine's per-subset train seed in its
//! `seed` field. Predictions come back as `.emsk` mask files; a nonzero exit,
//! a failed spawn, or a malformed output mask each surface as distinct errors
//! carrying the captured diagnostics.

use crate::manifest::{write_manifest, CaseDoc, ManifestDoc, PoolManifest};
use crate::maskfile::{self, MaskFileError};
use eigenrank_core::{BackendError, BinaryMask, CaseId, SegmenterBackend};
use std::cell::Cell;
use std::path::{Path, PathBuf};
use std::process::Command;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("backend command is empty")]
    EmptyCommand,
    #[error("cannot prepare working directory {}: {source}", path.display())]
    Workspace {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to spawn {program}: {source}")]
    Spawn {
        program: String,
        #[source]
        source: std::io::Error,
    },
    #[error("train command exited with status {code:?}: {stderr}")]
    TrainFailed { code: Option<i32>, stderr: String },
    #[error("predict command exited with status {code:?}: {stderr}")]
    PredictFailed { code: Option<i32>, stderr: String },
    #[error("predict output for case {case} is malformed: {source}")]
    MalformedMask {
        case: String,
        #[source]
        source: MaskFileError,
    },
    #[error("case {case} has no image path in the manifest")]
    NoImage { case: String },
    #[error("case {case} is not in the manifest")]
    UnknownCase { case: String },
    #[error(transparent)]
    Manifest(#[from] crate::manifest::ManifestError),
}

/// Handle to a trained external model: the directory the trainer filled.
#[derive(Debug, Clone)]
pub struct ExternalModel {
    dir: PathBuf,
    tag: String,
}

impl ExternalModel {
    /// Wrap an existing model directory (for `rank --mode fixed`).
    pub fn at(dir: PathBuf) -> Self {
        let tag = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".to_string());
        Self { dir, tag }
    }
}

pub struct ExternalBackend<'m> {
    train_argv: Vec<String>,
    predict_argv: Vec<String>,
    manifest: &'m PoolManifest,
    work_dir: PathBuf,
    counter: Cell<usize>,
}

impl<'m> ExternalBackend<'m> {
    pub fn new(
        manifest: &'m PoolManifest,
        train_cmd: &str,
        predict_cmd: &str,
        work_dir: PathBuf,
    ) -> Result<Self, ExternalError> {
        let split = |cmd: &str| -> Result<Vec<String>, ExternalError> {
            let argv: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            if argv.is_empty() {
                return Err(ExternalError::EmptyCommand);
            }
            Ok(argv)
        };
        let backend = Self {
            train_argv: split(train_cmd)?,
            predict_argv: split(predict_cmd)?,
            manifest,
            work_dir,
            counter: Cell::new(0),
        };
        std::fs::create_dir_all(&backend.work_dir).map_err(|source| ExternalError::Workspace {
            path: backend.work_dir.clone(),
            source,
        })?;
        Ok(backend)
    }

    fn run(argv: &[String], args: &[&Path]) -> Result<std::process::Output, ExternalError> {
        let mut command = Command::new(&argv[0]);
        command.args(&argv[1..]);
        for arg in args {
            command.arg(arg);
        }
        command.output().map_err(|source| ExternalError::Spawn {
            program: argv[0].clone(),
            source,
        })
    }

    fn write_subset_manifest(
        &self,
        subset: &[CaseId],
        seed: u64,
        path: &Path,
    ) -> Result<(), ExternalError> {
        let absolute = |p: &Path| -> String {
            std::path::absolute(p)
                .unwrap_or_else(|_| p.to_path_buf())
                .to_string_lossy()
                .into_owned()
        };
        let mut cases = Vec::with_capacity(subset.len());
        for id in subset {
            let entry = self
                .manifest
                .case(id)
                .ok_or_else(|| ExternalError::UnknownCase {
                    case: id.as_str().to_string(),
                })?;
            cases.push(CaseDoc {
                id: id.as_str().to_string(),
                image: entry.image.as_deref().map(absolute),
                truth: entry.truth.as_deref().map(absolute),
                difficulty: entry.difficulty,
            });
        }
        write_manifest(
            path,
            &ManifestDoc {
                seed: Some(seed),
                cases,
            },
        )?;
        Ok(())
    }
}

/// Case ids come from user manifests; keep prediction filenames inside the
/// working directory whatever the id contains.
fn safe_component(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn first_line(stderr: &[u8]) -> String {
    let text = String::from_utf8_lossy(stderr);
    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let mut line = line.trim().to_string();
    line.truncate(400);
    line
}

impl SegmenterBackend for ExternalBackend<'_> {
    type Model = ExternalModel;

    fn train(&self, subset: &[CaseId], seed: u64) -> Result<ExternalModel, BackendError> {
        let index = self.counter.get();
        self.counter.set(index + 1);
        let tag = format!("model-{index:03}");
        let model_dir = self.work_dir.join(&tag);
        std::fs::create_dir_all(&model_dir).map_err(|source| ExternalError::Workspace {
            path: model_dir.clone(),
            source,
        })?;
        let manifest_path = self.work_dir.join(format!("subset-{index:03}.toml"));
        self.write_subset_manifest(subset, seed, &manifest_path)?;

        let output = Self::run(
            &self.train_argv,
            &[
                Path::new("train"),
                Path::new("--manifest"),
                &manifest_path,
                Path::new("--model-out"),
                &model_dir,
            ],
        )?;
        if !output.status.success() {
            return Err(Box::new(ExternalError::TrainFailed {
                code: output.status.code(),
                stderr: first_line(&output.stderr),
            }));
        }
        Ok(ExternalModel {
            dir: model_dir,
            tag,
        })
    }

    fn predict(&self, model: &ExternalModel, case: &CaseId) -> Result<BinaryMask, BackendError> {
        let entry = self
            .manifest
            .case(case)
            .ok_or_else(|| ExternalError::UnknownCase {
                case: case.as_str().to_string(),
            })?;
        let image = entry.image.as_ref().ok_or_else(|| ExternalError::NoImage {
            case: case.as_str().to_string(),
        })?;
        let out_path = self.work_dir.join(format!(
            "pred-{}-{}.emsk",
            model.tag,
            safe_component(case.as_str())
        ));

        let output = Self::run(
            &self.predict_argv,
            &[
                Path::new("predict"),
                Path::new("--model"),
                &model.dir,
                Path::new("--image"),
                image,
                Path::new("--out"),
                &out_path,
            ],
        )?;
        if !output.status.success() {
            return Err(Box::new(ExternalError::PredictFailed {
                code: output.status.code(),
                stderr: first_line(&output.stderr),
            }));
        }
        maskfile::read_mask(&out_path).map_err(|source| {
            Box::new(ExternalError::MalformedMask {
                case: case.as_str().to_string(),
                source,
            }) as BackendError
        })
    }
}
