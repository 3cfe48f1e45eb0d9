//! Binary PGM (P5) images and `DPTH` float depth rasters.

use anyhow::{bail, Context, Result};
use perimkit::projection::Image;

/// 8-bit P5 from intensities in [0, 1].
pub fn write_pgm(img: &Image<f64>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.data.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn write_mask_pgm(mask: &Image<bool>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width, mask.height).into_bytes();
    out.extend(mask.data.iter().map(|&m| if m { 255u8 } else { 0 }));
    out
}

/// Reads P5 with maxval up to 65535; returns intensities scaled to [0, 1].
pub fn read_pgm(bytes: &[u8]) -> Result<Image<f64>> {
    let mut pos = 0usize;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            bail!("truncated PGM header");
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        bail!("not a binary PGM (P5)");
    }
    let w: usize = token()?.parse().context("bad PGM width")?;
    let h: usize = token()?.parse().context("bad PGM height")?;
    let maxval: usize = token()?.parse().context("bad PGM maxval")?;
    if maxval == 0 || maxval > 65535 {
        bail!("PGM maxval {maxval} out of range");
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let bpp = if maxval < 256 { 1 } else { 2 };
    let need = w * h * bpp;
    if bytes.len() < pos + need {
        bail!("PGM raster truncated: need {need} bytes");
    }
    let raw = &bytes[pos..pos + need];
    let data: Vec<f64> = if bpp == 1 {
        raw.iter().map(|&b| b as f64 / maxval as f64).collect()
    } else {
        raw.chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / maxval as f64)
            .collect()
    };
    Ok(Image::new(w, h, data)?)
}

pub fn read_mask_pgm(bytes: &[u8]) -> Result<Image<bool>> {
    let img = read_pgm(bytes)?;
    Ok(Image::new(img.width, img.height, img.data.iter().map(|&v| v > 0.0).collect())?)
}

/// `DPTH`, u32 width, u32 height (little endian), then f32 depths row-major.
pub fn write_depth(img: &Image<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * img.data.len());
    out.extend_from_slice(b"DPTH");
    out.extend_from_slice(&(img.width as u32).to_le_bytes());
    out.extend_from_slice(&(img.height as u32).to_le_bytes());
    for &d in &img.data {
        out.extend_from_slice(&(d as f32).to_le_bytes());
    }
    out
}

pub fn read_depth(bytes: &[u8]) -> Result<Image<f64>> {
    if bytes.len() < 12 || &bytes[..4] != b"DPTH" {
        bail!("not a DPTH depth raster");
    }
    let w = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() != 4 * w * h {
        bail!("DPTH body is {} bytes, expected {}", body.len(), 4 * w * h);
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok(Image::new(w, h, data)?)
}
