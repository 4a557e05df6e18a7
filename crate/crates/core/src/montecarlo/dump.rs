//! Compact binary serialization of sampled trajectories, for handing paths
//! to external tooling without the cost of a text format.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic  b"WSPD"
//! version u32          currently 1
//! count   u64          total number of samples across all paths
//! records count x { path u32, ray u32, time f64, radius f64 }
//! ```
//!
//! Records are grouped by path in writing order, so path ids are contiguous
//! from zero and nondecreasing; readers enforce this.

use super::{McError, PathSample};
use crate::domain::StarPoint;
use std::io::{Read, Write};

const MAGIC: [u8; 4] = *b"WSPD";
const VERSION: u32 = 1;

/// Serializes trajectories into the binary dump layout.
pub fn write_path_dump<W: Write>(writer: &mut W, paths: &[PathSample]) -> Result<(), McError> {
    if paths.len() > u32::MAX as usize {
        return Err(McError::BadDump(format!(
            "{} paths exceed the 32-bit path id space",
            paths.len()
        )));
    }
    let count: u64 = paths.iter().map(|p| p.steps.len() as u64).sum();
    writer.write_all(&MAGIC)?;
    writer.write_all(&VERSION.to_le_bytes())?;
    writer.write_all(&count.to_le_bytes())?;
    for (index, path) in paths.iter().enumerate() {
        if path.steps.is_empty() {
            return Err(McError::BadDump(format!(
                "path {index} has no samples and cannot be represented"
            )));
        }
        for &(time, point) in &path.steps {
            if point.ray > u32::MAX as usize {
                return Err(McError::BadDump(format!(
                    "ray {} exceeds the 32-bit ray space",
                    point.ray
                )));
            }
            writer.write_all(&(index as u32).to_le_bytes())?;
            writer.write_all(&(point.ray as u32).to_le_bytes())?;
            writer.write_all(&time.to_le_bytes())?;
            writer.write_all(&point.r.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_array<R: Read, const N: usize>(reader: &mut R) -> Result<[u8; N], McError> {
    let mut buf = [0u8; N];
    reader.read_exact(&mut buf)?;
    Ok(buf)
}

/// Reads back a dump produced by [`write_path_dump`].
pub fn read_path_dump<R: Read>(reader: &mut R) -> Result<Vec<PathSample>, McError> {
    let magic: [u8; 4] = read_array(reader)?;
    if magic != MAGIC {
        return Err(McError::BadDump("bad magic bytes".into()));
    }
    let version = u32::from_le_bytes(read_array(reader)?);
    if version != VERSION {
        return Err(McError::BadDump(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let count = u64::from_le_bytes(read_array(reader)?);
    let mut paths: Vec<PathSample> = Vec::new();
    for _ in 0..count {
        let path = u32::from_le_bytes(read_array(reader)?) as usize;
        let ray = u32::from_le_bytes(read_array(reader)?) as usize;
        let time = f64::from_le_bytes(read_array(reader)?);
        let radius = f64::from_le_bytes(read_array(reader)?);
        if !radius.is_finite() || radius < 0.0 || !time.is_finite() {
            return Err(McError::BadDump(format!(
                "sample on path {path} has invalid coordinates ({time}, {radius})"
            )));
        }
        if path == paths.len() {
            paths.push(PathSample { steps: Vec::new() });
        } else if path + 1 != paths.len() {
            return Err(McError::BadDump(format!(
                "path ids must be contiguous and grouped, got {path} with {} paths read",
                paths.len()
            )));
        }
        paths
            .last_mut()
            .expect("pushed above")
            .steps
            .push((time, StarPoint { ray, r: radius }));
    }
    Ok(paths)
}
