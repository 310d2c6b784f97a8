//! Desk-scale synthetic laboratory: a deterministic dataset generator and a
//! perturbation segmenter that stands in for a trained deep model.
//!
//! Each case carries a scalar difficulty in [0, 1]. That one latent drives
//! both the image noise and the backend's prediction error, so "hard for the
//! ensemble" and "hard in truth" coincide by construction — which is what the
//! selection and failure-prediction behavior tests need to certify.
//!
//! A synthetic model is just a learned difficulty center theta (the mean
//! difficulty of its training subset plus a small seeded jitter). Predictions
//! degrade with |case difficulty − theta|: the truth boundary is eroded or
//! dilated with radius proportional to the distance, then pixels flip at a
//! rate rising linearly with it. Distinct models perturb through distinct
//! streams, so far-from-theta cases are where models visibly disagree.

use crate::backend::{BackendError, GroundTruthSource, SegmenterBackend};
use crate::mask::{dice, BinaryMask, MaskError};
use crate::pool::{CaseId, Pool};
use crate::seeds;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

const PURPOSE_CASE: u64 = 0x10;

/// Morph radius at distance u is `u * MORPH_RADIUS_FACTOR * min(w, h)`,
/// rounded to whole pixels.
pub const MORPH_RADIUS_FACTOR: f64 = 0.15;

/// Pixel flip rate at distance u is `base_flip_rate + FLIP_RATE_SLOPE * u`.
pub const FLIP_RATE_SLOPE: f64 = 0.2;

/// Default training jitter amplitude on theta.
pub const DEFAULT_JITTER_AMPLITUDE: f64 = 0.02;

/// Default distance-independent flip rate.
pub const DEFAULT_BASE_FLIP_RATE: f64 = 0.01;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("dataset must contain at least one case")]
    EmptyDataset,
    #[error("synthetic images must be at least 16x16, got {width}x{height}")]
    BadDimensions { width: usize, height: usize },
    #[error("training subset is empty")]
    EmptySubset,
    #[error("unknown case id {id:?}")]
    UnknownCase { id: String },
    #[error("epsilon must lie in [0, 1], got {value}")]
    BadEpsilon { value: f64 },
    #[error("ensemble size must be at least 2, got {value}")]
    BadOrder { value: usize },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("no ensemble sizes given")]
    NoSizes,
    #[error("could not realize a feasible matrix for t={t}, epsilon={epsilon}")]
    Infeasible { t: usize, epsilon: f64 },
    #[error(transparent)]
    Matrix(#[from] crate::matrix::MatrixError),
}

/// Grayscale image with values in [0, 1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        assert_eq!(pixels.len(), width * height);
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }
}

/// One generated case: image, reference mask, and the difficulty latent.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCase {
    pub id: CaseId,
    /// In [0, 1]; drives image noise and backend error alike.
    pub difficulty: f64,
    pub image: GrayImage,
    pub truth: BinaryMask,
}

/// Handle produced by [`SyntheticBackend::train`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticModel {
    /// Learned difficulty center in [0, 1].
    pub theta: f64,
    /// Stream seed; distinct models perturb through distinct streams.
    pub jitter_seed: u64,
}

/// 3x3 box blur with edge clamping.
fn box_blur(width: usize, height: usize, pixels: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; pixels.len()];
    for y in 0..height {
        for x in 0..width {
            let mut sum = 0.0;
            let mut n = 0.0;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height {
                        sum += pixels[ny as usize * width + nx as usize];
                        n += 1.0;
                    }
                }
            }
            out[y * width + x] = sum / n;
        }
    }
    out
}

/// Generate `n` cases deterministically. Difficulties are uniform on [0, 1];
/// each truth mask is an axis-aligned ellipse with seeded center and axes;
/// the image is the blurred truth plus noise of amplitude proportional to
/// difficulty. Every case draws from its own derived stream, so the dataset
/// is identical for identical `(n, width, height, seed)`.
pub fn generate_dataset(
    n: usize,
    width: usize,
    height: usize,
    seed: u64,
) -> Result<Vec<SyntheticCase>, SynthError> {
    if n == 0 {
        return Err(SynthError::EmptyDataset);
    }
    if width < 16 || height < 16 {
        return Err(SynthError::BadDimensions { width, height });
    }

    let mut cases = Vec::with_capacity(n);
    for j in 0..n {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seeds::combine(seeds::combine(seed, PURPOSE_CASE), j as u64));
        let difficulty: f64 = rng.random();
        let cx = width as f64 * (0.35 + 0.30 * rng.random::<f64>());
        let cy = height as f64 * (0.35 + 0.30 * rng.random::<f64>());
        let rx = width as f64 * (0.16 + 0.14 * rng.random::<f64>());
        let ry = height as f64 * (0.16 + 0.14 * rng.random::<f64>());
        let truth = BinaryMask::from_fn(width, height, |x, y| {
            let dx = (x as f64 + 0.5 - cx) / rx;
            let dy = (y as f64 + 0.5 - cy) / ry;
            dx * dx + dy * dy <= 1.0
        });

        let base: Vec<f64> = truth.pixels().iter().map(|&v| f64::from(v)).collect();
        let blurred = box_blur(width, height, &box_blur(width, height, &base));
        let pixels: Vec<f64> = blurred
            .iter()
            .map(|&v| {
                let noise = 0.5 * difficulty * (2.0 * rng.random::<f64>() - 1.0);
                (v + noise).clamp(0.0, 1.0)
            })
            .collect();

        cases.push(SyntheticCase {
            id: CaseId::new(format!("case-{j:05}")).expect("generated ids are nonempty"),
            difficulty,
            image: GrayImage::new(width, height, pixels),
            truth,
        });
    }
    Ok(cases)
}

struct CaseEntry {
    difficulty: f64,
    truth: BinaryMask,
}

/// Perturbation segmenter over a fixed synthetic dataset.
pub struct SyntheticBackend {
    order: Vec<CaseId>,
    entries: BTreeMap<CaseId, CaseEntry>,
    jitter_amplitude: f64,
    base_flip_rate: f64,
}

impl SyntheticBackend {
    pub fn new(cases: &[SyntheticCase]) -> Self {
        Self::from_parts(
            cases
                .iter()
                .map(|c| (c.id.clone(), c.difficulty, c.truth.clone())),
        )
    }

    /// Build from bare (id, difficulty, truth) triples, e.g. a manifest.
    pub fn from_parts(parts: impl IntoIterator<Item = (CaseId, f64, BinaryMask)>) -> Self {
        let mut order = Vec::new();
        let mut entries = BTreeMap::new();
        for (id, difficulty, truth) in parts {
            order.push(id.clone());
            entries.insert(id, CaseEntry { difficulty, truth });
        }
        Self {
            order,
            entries,
            jitter_amplitude: DEFAULT_JITTER_AMPLITUDE,
            base_flip_rate: DEFAULT_BASE_FLIP_RATE,
        }
    }

    /// Override the training jitter amplitude (0 disables jitter).
    pub fn with_jitter_amplitude(mut self, amplitude: f64) -> Self {
        self.jitter_amplitude = amplitude;
        self
    }

    /// Override the distance-independent flip rate (0 disables baseline noise).
    pub fn with_base_flip_rate(mut self, rate: f64) -> Self {
        self.base_flip_rate = rate;
        self
    }

    /// Pool over the dataset in insertion order.
    pub fn pool(&self) -> Pool {
        Pool::new(self.order.clone()).expect("backend ids are unique by construction")
    }

    fn entry(&self, case: &CaseId) -> Result<&CaseEntry, SynthError> {
        self.entries
            .get(case)
            .ok_or_else(|| SynthError::UnknownCase {
                id: case.as_str().to_string(),
            })
    }
}

fn erode(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    BinaryMask::from_fn(w, h, |x, y| {
        mask.pixel(x, y) == 1
            && x > 0
            && mask.pixel(x - 1, y) == 1
            && x + 1 < w
            && mask.pixel(x + 1, y) == 1
            && y > 0
            && mask.pixel(x, y - 1) == 1
            && y + 1 < h
            && mask.pixel(x, y + 1) == 1
    })
}

fn dilate(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    BinaryMask::from_fn(w, h, |x, y| {
        mask.pixel(x, y) == 1
            || (x > 0 && mask.pixel(x - 1, y) == 1)
            || (x + 1 < w && mask.pixel(x + 1, y) == 1)
            || (y > 0 && mask.pixel(x, y - 1) == 1)
            || (y + 1 < h && mask.pixel(x, y + 1) == 1)
    })
}

impl SegmenterBackend for SyntheticBackend {
    type Model = SyntheticModel;

    /// theta = mean subset difficulty plus seeded jitter, clamped to [0, 1].
    fn train(&self, subset: &[CaseId], seed: u64) -> Result<SyntheticModel, BackendError> {
        if subset.is_empty() {
            return Err(Box::new(SynthError::EmptySubset));
        }
        let mut sum = 0.0;
        for case in subset {
            sum += self.entry(case).map_err(Box::new)?.difficulty;
        }
        let mean = sum / subset.len() as f64;
        let jitter = if self.jitter_amplitude == 0.0 {
            0.0
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            self.jitter_amplitude * (2.0 * rng.random::<f64>() - 1.0)
        };
        Ok(SyntheticModel {
            theta: (mean + jitter).clamp(0.0, 1.0),
            jitter_seed: seed,
        })
    }

    /// Truth perturbed through the stream seeded by (jitter_seed, case id):
    /// one erode-or-dilate pass per radius step, then independent pixel flips.
    fn predict(&self, model: &SyntheticModel, case: &CaseId) -> Result<BinaryMask, BackendError> {
        let entry = self.entry(case).map_err(Box::new)?;
        let distance = (entry.difficulty - model.theta).abs();
        let mut rng =
            ChaCha8Rng::seed_from_u64(seeds::combine_str(model.jitter_seed, case.as_str()));

        let (w, h) = (entry.truth.width(), entry.truth.height());
        let radius = (distance * MORPH_RADIUS_FACTOR * w.min(h) as f64).round() as usize;
        let mut mask = entry.truth.clone();
        if radius > 0 {
            let grow: bool = rng.random();
            for _ in 0..radius {
                mask = if grow { dilate(&mask) } else { erode(&mask) };
            }
        }

        let flip_rate = self.base_flip_rate + FLIP_RATE_SLOPE * distance;
        if flip_rate > 0.0 {
            let mut pixels = mask.pixels().to_vec();
            for value in pixels.iter_mut() {
                if rng.random::<f64>() < flip_rate {
                    *value = 1 - *value;
                }
            }
            mask = BinaryMask::new(w, h, pixels).expect("flips keep pixels binary");
        }
        Ok(mask)
    }
}

impl GroundTruthSource for SyntheticBackend {
    fn truth(&self, case: &CaseId) -> Result<BinaryMask, BackendError> {
        Ok(self.entry(case).map_err(Box::new)?.truth.clone())
    }
}

/// Dice of a prediction against the case's reference mask.
pub fn true_dice_eval(prediction: &BinaryMask, case: &SyntheticCase) -> Result<f64, MaskError> {
    dice(prediction, &case.truth)
}
