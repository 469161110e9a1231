//! Image decoding, PNG export and atomic file writes.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Cursor, Write};
use std::path::{Path, PathBuf};

use image::{GrayImage, ImageFormat};

use dmdsal::{BinaryMask, RgbImage, SaliencyMap};

pub const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "ppm", "pgm", "pnm"];

pub fn load_rgb(path: &Path) -> Result<RgbImage, String> {
    let img = image::open(path)
        .map_err(|e| format!("cannot decode {}: {e}", path.display()))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = img.pixels().map(|p| p.0).collect();
    RgbImage::new(w, h, pixels).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_gray(path: &Path) -> Result<(usize, usize, Vec<u8>), String> {
    let img = image::open(path)
        .map_err(|e| format!("cannot decode {}: {e}", path.display()))?
        .to_luma8();
    Ok((img.width() as usize, img.height() as usize, img.into_raw()))
}

/// Grayscale map, `value / 255`.
pub fn load_map(path: &Path) -> Result<SaliencyMap, String> {
    let (w, h, bytes) = load_gray(path)?;
    SaliencyMap::from_u8(w, h, &bytes).map_err(|e| format!("{}: {e}", path.display()))
}

/// Ground-truth mask, binarized at 128.
pub fn load_mask(path: &Path) -> Result<BinaryMask, String> {
    let (w, h, bytes) = load_gray(path)?;
    BinaryMask::from_gray(w, h, &bytes).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn encode_png(width: usize, height: usize, bytes: Vec<u8>) -> Vec<u8> {
    let img = GrayImage::from_raw(width as u32, height as u32, bytes).expect("buffer matches dimensions");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).expect("PNG encoding to memory");
    out.into_inner()
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), String> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| format!("cannot write {}: {e}", path.display());
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn write_map(path: &Path, map: &SaliencyMap) -> Result<(), String> {
    write_atomic(path, &encode_png(map.width(), map.height(), map.to_u8()))
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<(), String> {
    let (h, w) = mask.dims();
    write_atomic(path, &encode_png(w, h, mask.to_u8()))
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Image files of a directory keyed by stem, sorted. Two files sharing a
/// stem are an error.
pub fn images_by_stem(dir: &Path) -> Result<BTreeMap<String, PathBuf>, String> {
    let entries = fs::read_dir(dir).map_err(|e| format!("cannot read directory {}: {e}", dir.display()))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| format!("cannot read directory {}: {e}", dir.display()))?.path();
        if !path.is_file() || !has_image_extension(&path) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else {
            continue;
        };
        if let Some(prev) = out.insert(stem.clone(), path.clone()) {
            return Err(format!(
                "stem {stem:?} is shared by {} and {}",
                prev.display(),
                path.display()
            ));
        }
    }
    Ok(out)
}
