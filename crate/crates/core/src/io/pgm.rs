//! Binary PGM (P5) depth maps: 16-bit big-endian samples, maxval 65535,
//! values in millimetres. Camera intrinsics ride in a sidecar JSON
//! `{ "fx": .., "fy": .., "cx": .., "cy": .. }`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{DepthImage, Intrinsics};

use super::atomic_write;

/// Parse one whitespace/comment-delimited header token starting at `pos`.
fn next_token(data: &[u8], pos: &mut usize) -> Result<String> {
    // Skip whitespace and '#' comments.
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Format("truncated PGM header".into()));
    }
    Ok(String::from_utf8_lossy(&data[start..*pos]).into_owned())
}

pub fn read_pgm16(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let data = fs::read(path)?;
    let mut pos = 0usize;
    let magic = next_token(&data, &mut pos)?;
    if magic != "P5" {
        return Err(Error::Format(format!(
            "{}: expected P5 magic, got `{magic}`",
            path.display()
        )));
    }
    let width: usize = next_token(&data, &mut pos)?
        .parse()
        .map_err(|_| Error::Format("bad PGM width".into()))?;
    let height: usize = next_token(&data, &mut pos)?
        .parse()
        .map_err(|_| Error::Format("bad PGM height".into()))?;
    let maxval: u32 = next_token(&data, &mut pos)?
        .parse()
        .map_err(|_| Error::Format("bad PGM maxval".into()))?;
    if maxval != 65535 {
        return Err(Error::Format(format!(
            "{}: depth PGM requires maxval 65535, got {maxval}",
            path.display()
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let need = width * height * 2;
    if data.len() < pos + need {
        return Err(Error::Format(format!(
            "{}: raster truncated ({} bytes, need {need})",
            path.display(),
            data.len().saturating_sub(pos)
        )));
    }
    let mut samples = Vec::with_capacity(width * height);
    for chunk in data[pos..pos + need].chunks_exact(2) {
        samples.push(u16::from_be_bytes([chunk[0], chunk[1]]));
    }
    Ok((width, height, samples))
}

pub fn write_pgm16(path: &Path, width: usize, height: usize, samples: &[u16]) -> Result<()> {
    if samples.len() != width * height {
        return Err(Error::Format(format!(
            "sample count {} does not match {width}x{height}",
            samples.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    out.reserve(samples.len() * 2);
    for s in samples {
        out.extend_from_slice(&s.to_be_bytes());
    }
    atomic_write(path, &out)
}

/// Load a depth frame from a PGM plus its intrinsics sidecar JSON.
pub fn load_depth_image(pgm_path: &Path, intrinsics_path: &Path) -> Result<DepthImage> {
    let (width, height, samples) = read_pgm16(pgm_path)?;
    let intrinsics: Intrinsics = serde_json::from_str(&fs::read_to_string(intrinsics_path)?)?;
    DepthImage::new(width, height, samples, intrinsics)
}
