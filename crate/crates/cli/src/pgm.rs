//! Binary PGM (P5) writer for synthetic images. Write-only: the engine never
//! reads images, it just hands their paths to external backends.

use crate::maskfile::atomic_write;
use eigenrank_core::GrayImage;
use std::path::Path;

pub fn write_pgm(image: &GrayImage, path: &Path) -> Result<(), std::io::Error> {
    let mut bytes = Vec::with_capacity(32 + image.pixels().len());
    bytes.extend_from_slice(format!("P5\n{} {}\n255\n", image.width(), image.height()).as_bytes());
    for &v in image.pixels() {
        bytes.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
    }
    atomic_write(path, &bytes)
}
