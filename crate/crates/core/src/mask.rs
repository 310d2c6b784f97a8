//! Binary segmentation masks and pairwise overlap metrics.
//!
//! A [`BinaryMask`] is the unit of comparison everywhere in this crate: one
//! case, one 2D mask. The two metrics here ([`dice`] and [`jaccard`]) count
//! pixels in exact integer arithmetic and divide once, in `f64`.

use thiserror::Error;

/// Errors for mask construction and pairwise comparisons.
#[derive(Debug, Error, PartialEq)]
pub enum MaskError {
    #[error("mask dimensions must be positive, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("mask buffer holds {actual} pixels, expected {expected} for {width}x{height}")]
    BadLength {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("pixel {index} has value {value}, masks are strictly binary")]
    BadPixel { index: usize, value: u8 },
    #[error("cannot compare a {a_width}x{a_height} mask with a {b_width}x{b_height} mask")]
    DimensionMismatch {
        a_width: usize,
        a_height: usize,
        b_width: usize,
        b_height: usize,
    },
}

/// A 2D binary segmentation image, immutable after construction.
///
/// Invariants: `pixels.len() == width * height`, every pixel is 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl BinaryMask {
    /// Validates dimensions, length and binary values.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::EmptyDimensions { width, height });
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(MaskError::BadLength {
                width,
                height,
                expected,
                actual: pixels.len(),
            });
        }
        if let Some(index) = pixels.iter().position(|&v| v > 1) {
            return Err(MaskError::BadPixel {
                index,
                value: pixels[index],
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Constant mask; `value` must be 0 or 1.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, MaskError> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a mask from a per-pixel predicate, row-major.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(u8::from(f(x, y)));
            }
        }
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

    /// Row-major pixel buffer.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Number of pixels equal to 1.
    pub fn foreground_count(&self) -> usize {
        self.pixels.iter().filter(|&&v| v == 1).count()
    }
}

fn check_same_dims(a: &BinaryMask, b: &BinaryMask) -> Result<(), MaskError> {
    if a.width != b.width || a.height != b.height {
        return Err(MaskError::DimensionMismatch {
            a_width: a.width,
            a_height: a.height,
            b_width: b.width,
            b_height: b.height,
        });
    }
    Ok(())
}

fn intersection_count(a: &BinaryMask, b: &BinaryMask) -> usize {
    a.pixels
        .iter()
        .zip(&b.pixels)
        .filter(|&(&p, &q)| p == 1 && q == 1)
        .count()
}

/// Dice overlap 2|A∩B| / (|A|+|B|).
///
/// Two empty masks score 1 (identical outputs always agree maximally), so the
/// diagonal of any pairwise matrix is 1 unconditionally; empty vs nonempty
/// scores 0.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64, MaskError> {
    check_same_dims(a, b)?;
    let ca = a.foreground_count();
    let cb = b.foreground_count();
    if ca == 0 && cb == 0 {
        return Ok(1.0);
    }
    let inter = intersection_count(a, b);
    Ok((2 * inter) as f64 / (ca + cb) as f64)
}

/// Jaccard overlap |A∩B| / |A∪B|; a monotone transform of Dice, J = D/(2−D).
/// Same empty-mask conventions as [`dice`].
pub fn jaccard(a: &BinaryMask, b: &BinaryMask) -> Result<f64, MaskError> {
    check_same_dims(a, b)?;
    let ca = a.foreground_count();
    let cb = b.foreground_count();
    if ca == 0 && cb == 0 {
        return Ok(1.0);
    }
    let inter = intersection_count(a, b);
    let union = ca + cb - inter;
    Ok(inter as f64 / union as f64)
}

/// Which pairwise overlap metric to use when building agreement matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapMetric {
    #[default]
    Dice,
    Jaccard,
}

impl OverlapMetric {
    pub fn score(&self, a: &BinaryMask, b: &BinaryMask) -> Result<f64, MaskError> {
        match self {
            OverlapMetric::Dice => dice(a, b),
            OverlapMetric::Jaccard => jaccard(a, b),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OverlapMetric::Dice => "dice",
            OverlapMetric::Jaccard => "jaccard",
        }
    }
}
