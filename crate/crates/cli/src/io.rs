//! Point-cloud file formats.
//!
//! * `xyz-text`: one point per line, at least three whitespace-separated
//!   floats; columns past the third are features. `#` starts a comment and
//!   blank lines are ignored. Every data line must have the same width.
//! * `bin-f32`: magic `FPC1`, little-endian `u32` point count `n` and
//!   feature width `c`, then `n * 3` `f32` coordinates and `n * c` `f32`
//!   features.

use std::fs;
use std::path::Path;

use fpo_core::{Point, PointCloud};

use crate::error::{FpoError, Result};

pub const MAGIC: &[u8; 4] = b"FPC1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[value(name = "xyz-text")]
    XyzText,
    #[value(name = "bin-f32")]
    BinF32,
}

impl Format {
    /// `.xyz` and `.txt` are text; anything else is binary.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("xyz" | "txt") => Format::XyzText,
            _ => Format::BinF32,
        }
    }
}

pub fn load_cloud(path: &Path, format: Format) -> Result<PointCloud> {
    let bytes = fs::read(path).map_err(|e| FpoError::io(path, e))?;
    match format {
        Format::XyzText => {
            let text = String::from_utf8(bytes).map_err(|e| FpoError::Parse {
                path: path.into(),
                location: format!("byte {}", e.utf8_error().valid_up_to()),
                message: "input is not UTF-8 text".into(),
            })?;
            parse_xyz(&text, path)
        }
        Format::BinF32 => parse_bin(&bytes, path),
    }
}

pub fn save_cloud(cloud: &PointCloud, path: &Path, format: Format) -> Result<()> {
    let bytes = match format {
        Format::XyzText => write_xyz(cloud).into_bytes(),
        Format::BinF32 => write_bin(cloud),
    };
    fs::write(path, bytes).map_err(|e| FpoError::io(path, e))
}

pub fn parse_xyz(text: &str, path: &Path) -> Result<PointCloud> {
    let parse_err = |line: usize, message: String| FpoError::Parse {
        path: path.into(),
        location: format!("line {line}"),
        message,
    };
    let mut coords: Vec<Point> = Vec::new();
    let mut features = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| parse_err(lineno, format!("`{tok}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() < 3 {
            return Err(parse_err(lineno, format!("expected at least 3 columns, found {}", values.len())));
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(parse_err(lineno, format!("expected {w} columns, found {}", values.len())));
            }
            Some(_) => {}
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(fpo_core::Error::Validation(format!("line {lineno}: non-finite value")).into());
        }
        coords.push([values[0], values[1], values[2]]);
        features.extend_from_slice(&values[3..]);
    }
    let c = width.map_or(0, |w| w - 3);
    Ok(PointCloud::with_features(coords, features, c)?)
}

pub fn write_xyz(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        let row: Vec<String> = p.iter().chain(cloud.feature(i)).map(|v| v.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_bin(bytes: &[u8], path: &Path) -> Result<PointCloud> {
    let short = |offset: usize, what: &str| FpoError::Parse {
        path: path.into(),
        location: format!("byte {offset}"),
        message: format!("file ends before {what}"),
    };
    if bytes.len() < 4 {
        return Err(short(bytes.len(), "the magic number"));
    }
    if &bytes[..4] != MAGIC {
        return Err(FpoError::Parse {
            path: path.into(),
            location: "byte 0".into(),
            message: "missing FPC1 magic".into(),
        });
    }
    let read_u32 = |at: usize, what: &str| -> Result<usize> {
        let raw = bytes.get(at..at + 4).ok_or_else(|| short(bytes.len(), what))?;
        Ok(u32::from_le_bytes(raw.try_into().expect("4 bytes")) as usize)
    };
    let n = read_u32(4, "the point count")?;
    let c = read_u32(8, "the feature width")?;
    let coord_bytes = n * 3 * 4;
    let feature_bytes = n * c * 4;
    let body = &bytes[12..];
    if body.len() < coord_bytes {
        return Err(short(bytes.len(), "all coordinates"));
    }
    if body.len() < coord_bytes + feature_bytes {
        return Err(short(bytes.len(), "all features"));
    }
    if body.len() > coord_bytes + feature_bytes {
        return Err(FpoError::Parse {
            path: path.into(),
            location: format!("byte {}", 12 + coord_bytes + feature_bytes),
            message: "unexpected trailing data".into(),
        });
    }
    let floats: Vec<f64> = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64)
        .collect();
    let coords = floats[..n * 3].chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
    Ok(PointCloud::with_features(coords, floats[n * 3..].to_vec(), c)?)
}

/// Serializes to `bin-f32`. Values are narrowed to `f32`.
pub fn write_bin(cloud: &PointCloud) -> Vec<u8> {
    let n = cloud.len();
    let c = cloud.feature_width();
    let mut out = Vec::with_capacity(12 + 4 * n * (3 + c));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(c as u32).to_le_bytes());
    for p in cloud.coords() {
        for &v in p {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    for &v in cloud.features() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}
