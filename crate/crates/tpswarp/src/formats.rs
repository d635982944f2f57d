//! Bit-exact serialization of control points, flows, and images.
//!
//! Control points travel as a canonical JSON document
//! `{"width":W,"height":H,"points":[[x,y],...]}` (row-major order, shortest
//! round-trip decimals). Flows use the common dense-flow binary container:
//! the little-endian f32 202021.25 as magic, two little-endian 32-bit
//! integers for width and height, then row-major interleaved (u, v) f32
//! pairs. Images are 8-bit grayscale or RGB rasters mapped to [0, 1] by
//! value/255 on read and round(value * 255) on write.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::geom::Vec2;
use crate::scalar::Scalar;
use crate::tps::ControlPointSet;
use crate::warp::Image;

/// Magic value of the flow container, stored as a little-endian f32.
pub const FLOW_MAGIC: f32 = 202021.25;

#[derive(Serialize)]
struct PointsDoc {
    width: u32,
    height: u32,
    points: Vec<[f64; 2]>,
}

/// Canonical bytes of a control-point document.
pub fn points_to_vec(set: &ControlPointSet<f64>) -> Result<Vec<u8>> {
    let doc = PointsDoc {
        width: set.frame_width(),
        height: set.frame_height(),
        points: set.points().iter().map(|p| [p.x, p.y]).collect(),
    };
    serde_json::to_vec(&doc).map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn write_points(path: impl AsRef<Path>, set: &ControlPointSet<f64>) -> Result<()> {
    fs::write(path, points_to_vec(set)?)?;
    Ok(())
}

pub fn points_from_slice(bytes: &[u8]) -> Result<ControlPointSet<f64>> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| Error::ParseError {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| schema("document", "is not an object"))?;
    let width = require_u32(obj, "width")?;
    let height = require_u32(obj, "height")?;
    let raw = obj
        .get("points")
        .ok_or_else(|| schema("points", "is missing"))?
        .as_array()
        .ok_or_else(|| schema("points", "is not an array"))?;
    let mut points = Vec::with_capacity(raw.len());
    for (i, entry) in raw.iter().enumerate() {
        let pair = entry
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| schema("points", &format!("entry {i} is not an [x, y] pair")))?;
        let x = pair[0]
            .as_f64()
            .ok_or_else(|| schema("points", &format!("entry {i} has a non-numeric x")))?;
        let y = pair[1]
            .as_f64()
            .ok_or_else(|| schema("points", &format!("entry {i} has a non-numeric y")))?;
        points.push(Vec2::new(x, y));
    }
    ControlPointSet::new(points, width, height)
}

pub fn read_points(path: impl AsRef<Path>) -> Result<ControlPointSet<f64>> {
    points_from_slice(&fs::read(path)?)
}

fn schema(field: &str, reason: &str) -> Error {
    Error::SchemaError {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

fn require_u32(obj: &serde_json::Map<String, Value>, field: &str) -> Result<u32> {
    let v = obj.get(field).ok_or_else(|| schema(field, "is missing"))?;
    v.as_u64()
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| schema(field, "is not a 32-bit unsigned integer"))
}

/// serde_json reports 1-based line/column; convert back to a byte offset.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let mut remaining = line.saturating_sub(1);
    let mut offset = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if b == b'\n' {
            remaining -= 1;
            offset = i + 1;
        }
    }
    (offset + column.saturating_sub(1)).min(bytes.len())
}

/// Flow container bytes: magic, width, height, then (u, v) pairs.
pub fn flow_to_vec<T: Scalar>(flow: &FlowField<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + flow.vectors().len() * 8);
    out.extend_from_slice(&FLOW_MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for v in flow.vectors() {
        out.extend_from_slice(&(v.x.to_f64_lossy() as f32).to_le_bytes());
        out.extend_from_slice(&(v.y.to_f64_lossy() as f32).to_le_bytes());
    }
    out
}

pub fn write_flow<T: Scalar>(path: impl AsRef<Path>, flow: &FlowField<T>) -> Result<()> {
    fs::write(path, flow_to_vec(flow))?;
    Ok(())
}

pub fn flow_from_slice(bytes: &[u8]) -> Result<FlowField<f32>> {
    if bytes.len() < 12 {
        return Err(Error::TruncatedFile {
            expected: 12,
            actual: bytes.len(),
        });
    }
    let magic = f32::from_le_bytes(bytes[0..4].try_into().unwrap());
    if magic.to_bits() != FLOW_MAGIC.to_bits() {
        return Err(Error::BadMagic);
    }
    let width = i32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = i32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if width < 2 || height < 2 {
        return Err(Error::InvalidDimensions {
            width: width.max(0) as u32,
            height: height.max(0) as u32,
        });
    }
    let (width, height) = (width as u32, height as u32);
    let count = width as usize * height as usize;
    let expected = 12 + count * 8;
    if bytes.len() != expected {
        return Err(Error::TruncatedFile {
            expected,
            actual: bytes.len(),
        });
    }
    let mut vectors = Vec::with_capacity(count);
    for i in 0..count {
        let base = 12 + i * 8;
        let u = f32::from_le_bytes(bytes[base..base + 4].try_into().unwrap());
        let v = f32::from_le_bytes(bytes[base + 4..base + 8].try_into().unwrap());
        vectors.push(Vec2::new(u, v));
    }
    FlowField::from_vectors(width, height, vectors)
}

pub fn read_flow(path: impl AsRef<Path>) -> Result<FlowField<f32>> {
    flow_from_slice(&fs::read(path)?)
}

/// Reads an 8-bit grayscale or RGB raster image; intensities map to [0, 1]
/// by value/255 exactly. Anything else (16-bit, alpha layouts) is rejected.
pub fn read_image<T: Scalar>(path: impl AsRef<Path>) -> Result<Image<T>> {
    let dynamic = image::open(path).map_err(map_image_error)?;
    let to_unit = |v: &u8| T::of(f64::from(*v) / 255.0);
    match dynamic {
        image::DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            let samples = buf.into_raw().iter().map(to_unit).collect();
            Image::new(w, h, 1, samples)
        }
        image::DynamicImage::ImageRgb8(buf) => {
            let (w, h) = buf.dimensions();
            let samples = buf.into_raw().iter().map(to_unit).collect();
            Image::new(w, h, 3, samples)
        }
        other => Err(Error::UnsupportedFormat(format!(
            "{:?} (expected 8-bit grayscale or RGB)",
            other.color()
        ))),
    }
}

/// Writes an image as an 8-bit raster, `round(value * 255)` clamped; the
/// container is chosen from the file extension.
pub fn write_image<T: Scalar>(path: impl AsRef<Path>, img: &Image<T>) -> Result<()> {
    let bytes: Vec<u8> = img
        .samples()
        .iter()
        .map(|&s| (s.to_f64_lossy() * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    let color = if img.channels() == 1 {
        image::ExtendedColorType::L8
    } else {
        image::ExtendedColorType::Rgb8
    };
    image::save_buffer(path, &bytes, img.width(), img.height(), color).map_err(map_image_error)
}

fn map_image_error(e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::Io(io),
        image::ImageError::Unsupported(u) => Error::UnsupportedFormat(u.to_string()),
        other => Error::DecodeError(other.to_string()),
    }
}
