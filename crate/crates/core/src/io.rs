//! Raw binary image container (`<name>.json` sidecar + `<name>.raw` payload) and
//! 16-bit PGM import.
//!
//! The payload is `width * height` little-endian binary32 values in row-major
//! order with no header or padding. The sidecar carries the geometry and the
//! acquisition metadata.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Image, Meta};

/// Offset between stored CT values and HU: raw 0 is -1024 HU.
pub const PGM_HU_OFFSET: f64 = 1024.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    width: usize,
    height: usize,
    dtype: String,
    order: String,
    units: String,
    mas: Option<f64>,
    slice_id: Option<String>,
}

/// Resolves the sidecar and payload paths for a container. `path` may be the
/// bare stem or either of the two files.
pub fn container_paths(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("raw") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let mut json = stem.clone().into_os_string();
    json.push(".json");
    let mut raw = stem.into_os_string();
    raw.push(".raw");
    (json.into(), raw.into())
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let (json_path, raw_path) = container_paths(path.as_ref());
    for p in [&json_path, &raw_path] {
        if !p.is_file() {
            return Err(Error::MissingFile(p.clone()));
        }
    }
    let text = fs::read_to_string(&json_path).map_err(|e| Error::io(&json_path, e))?;
    let sidecar: Sidecar =
        serde_json::from_str(&text).map_err(|e| Error::BadSidecar(e.to_string()))?;
    if sidecar.dtype != "f32le" {
        return Err(Error::BadSidecar(format!("dtype `{}`", sidecar.dtype)));
    }
    if sidecar.order != "row-major" {
        return Err(Error::BadSidecar(format!("order `{}`", sidecar.order)));
    }
    if sidecar.width == 0 || sidecar.height == 0 {
        return Err(Error::BadSidecar(format!(
            "extent {}x{}",
            sidecar.width, sidecar.height
        )));
    }

    let bytes = fs::read(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
    let declared = (sidecar.width as u64) * (sidecar.height as u64) * 4;
    if bytes.len() as u64 != declared {
        return Err(Error::SidecarMismatch {
            declared,
            actual: bytes.len() as u64,
        });
    }
    let pixels: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let img = Image::new(sidecar.width, sidecar.height, pixels)?;
    Ok(img.with_meta(Meta {
        mas: sidecar.mas,
        slice_id: sidecar.slice_id,
    }))
}

/// Writes the container, rounding every pixel to binary32.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let (json_path, raw_path) = container_paths(path.as_ref());
    let mut payload = Vec::with_capacity(img.len() * 4);
    for (i, &v) in img.pixels().iter().enumerate() {
        let f = v as f32;
        if !f.is_finite() {
            return Err(Error::NonFinitePixel(i));
        }
        payload.extend_from_slice(&f.to_le_bytes());
    }
    let sidecar = Sidecar {
        width: img.width(),
        height: img.height(),
        dtype: "f32le".into(),
        order: "row-major".into(),
        units: "HU".into(),
        mas: img.meta().mas,
        slice_id: img.meta().slice_id.clone(),
    };
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    fs::write(&raw_path, payload).map_err(|e| Error::io(&raw_path, e))?;
    fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
    Ok(())
}

/// Reads a binary (`P5`) PGM with maxval 65535 and maps stored values to HU
/// as `raw - 1024`.
pub fn import_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes)
}

fn parse_pgm(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::BadMagic);
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // whitespace and `#` comments may separate header tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::BadPgm("truncated header".into()))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 65535 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::BadPgm("missing separator after maxval".into()));
    }
    pos += 1;

    let (width, height) = (width as usize, height as usize);
    let data = &bytes[pos..];
    if data.len() != width * height * 2 {
        return Err(Error::BadPgm(format!(
            "expected {} sample bytes, found {}",
            width * height * 2,
            data.len()
        )));
    }
    let pixels = data
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 - PGM_HU_OFFSET)
        .collect();
    Image::new(width, height, pixels)
}
