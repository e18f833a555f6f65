//! Trajectory and point-cloud file formats.
//!
//! Trajectories are CSV with header `t,x,y,z`. Point clouds are either
//! plain-text XYZ (one `x y z` triple per line, `#` comments) or CSV with
//! header `x,y,z`; the format is picked by file extension. Floats are
//! written with 17 significant digits, so a write/parse round trip is
//! value-exact and byte-stable.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::patterns::GeoTrajectory;
use crate::spherelets::PointCloud;

/// A parsed trajectory plus any non-fatal notes (for example out-of-order
/// rows that were sorted on load).
#[derive(Debug, Clone)]
pub struct LoadedTrajectory {
    pub trajectory: GeoTrajectory,
    pub warnings: Vec<String>,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_float(path: &Path, line: usize, field: &str, token: &str) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("invalid {field} value '{}'", token.trim())))
}

/// Reads a `t,x,y,z` CSV trajectory. Rows are sorted by time after the
/// load (with a warning); exact duplicate rows collapse to one, while rows
/// that repeat a time stamp with a different point are rejected.
pub fn parse_trajectory(path: impl AsRef<Path>) -> Result<LoadedTrajectory> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((no, raw)) => {
                let t = raw.trim();
                if t.is_empty() || t.starts_with('#') {
                    continue;
                }
                break (no + 1, t);
            }
            None => return Err(parse_err(path, 1, "empty trajectory file")),
        }
    };
    let normalized: String = header.1.split(',').map(|c| c.trim()).collect::<Vec<_>>().join(",");
    if normalized != "t,x,y,z" {
        return Err(parse_err(
            path,
            header.0,
            format!("expected header 't,x,y,z', found '{}'", header.1),
        ));
    }
    let mut rows: Vec<(f64, Vector3<f64>)> = Vec::new();
    for (no, raw) in lines {
        let line_no = no + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').collect();
        if cols.len() != 4 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected 4 comma-separated values, found {}", cols.len()),
            ));
        }
        let t = parse_float(path, line_no, "t", cols[0])?;
        let x = parse_float(path, line_no, "x", cols[1])?;
        let y = parse_float(path, line_no, "y", cols[2])?;
        let z = parse_float(path, line_no, "z", cols[3])?;
        if !t.is_finite() {
            return Err(parse_err(path, line_no, "non-finite time stamp"));
        }
        rows.push((t, Vector3::new(x, y, z)));
    }
    if rows.is_empty() {
        return Err(parse_err(path, header.0, "trajectory has no data rows"));
    }
    let mut warnings = Vec::new();
    if rows.windows(2).any(|w| w[0].0 > w[1].0) {
        warnings.push(format!(
            "{}: rows were not sorted by time; sorted on load",
            path.display()
        ));
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let mut deduped: Vec<(f64, Vector3<f64>)> = Vec::with_capacity(rows.len());
    for row in rows {
        match deduped.last() {
            Some(last) if last.0 == row.0 => {
                if last.1 == row.1 {
                    warnings.push(format!(
                        "{}: dropped exact duplicate row at t = {}",
                        path.display(),
                        row.0
                    ));
                } else {
                    return Err(Error::NonMonotoneTrajectory(row.0));
                }
            }
            _ => deduped.push(row),
        }
    }
    Ok(LoadedTrajectory {
        trajectory: GeoTrajectory::new(deduped)?,
        warnings,
    })
}

/// Formats a float with 17 significant digits (value-exact for f64).
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a trajectory as `t,x,y,z` CSV.
pub fn write_trajectory(path: impl AsRef<Path>, traj: &GeoTrajectory) -> Result<()> {
    let mut out = String::from("t,x,y,z\n");
    for (t, p) in traj.samples() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_float(*t),
            fmt_float(p.x),
            fmt_float(p.y),
            fmt_float(p.z)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a point cloud, picking the format by extension: `.csv` expects an
/// `x,y,z` header, anything else is plain-text XYZ triples.
pub fn parse_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let is_csv = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("csv"))
        .unwrap_or(false);
    if is_csv {
        parse_cloud_csv(path)
    } else {
        parse_cloud_xyz(path)
    }
}

fn parse_cloud_xyz(path: &Path) -> Result<PointCloud> {
    let text = fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let cols: Vec<&str> = trimmed.split_whitespace().collect();
        if cols.len() != 3 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected 3 whitespace-separated values, found {}", cols.len()),
            ));
        }
        points.push(Vector3::new(
            parse_float(path, line_no, "x", cols[0])?,
            parse_float(path, line_no, "y", cols[1])?,
            parse_float(path, line_no, "z", cols[2])?,
        ));
    }
    if points.is_empty() {
        return Err(parse_err(path, 1, "point cloud file has no points"));
    }
    PointCloud::new(points)
}

fn parse_cloud_csv(path: &Path) -> Result<PointCloud> {
    let text = fs::read_to_string(path)?;
    let mut points = Vec::new();
    let mut saw_header = false;
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            let normalized: String =
                trimmed.split(',').map(|c| c.trim()).collect::<Vec<_>>().join(",");
            if normalized != "x,y,z" {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("expected header 'x,y,z', found '{trimmed}'"),
                ));
            }
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').collect();
        if cols.len() != 3 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected 3 comma-separated values, found {}", cols.len()),
            ));
        }
        points.push(Vector3::new(
            parse_float(path, line_no, "x", cols[0])?,
            parse_float(path, line_no, "y", cols[1])?,
            parse_float(path, line_no, "z", cols[2])?,
        ));
    }
    if points.is_empty() {
        return Err(parse_err(path, 1, "point cloud file has no points"));
    }
    PointCloud::new(points)
}

/// Writes a point cloud as `x,y,z` CSV.
pub fn write_cloud_csv(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    let mut out = String::from("x,y,z\n");
    for p in cloud.points() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_float(p.x),
            fmt_float(p.y),
            fmt_float(p.z)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Serializes a value as pretty JSON (UTF-8, lowercase snake_case keys).
pub fn write_json<T: serde::Serialize>(path: impl AsRef<Path>, value: &T) -> Result<PathBuf> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("json serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(path.to_path_buf())
}
