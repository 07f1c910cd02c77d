//! ASCII PLY point clouds: `vertex` elements with x, y, z and optional
//! nx, ny, nz properties, coordinates in millimetres.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

use super::atomic_write;

pub fn write_ply(path: &Path, cloud: &PointCloud) -> Result<()> {
    let mut out = Vec::new();
    let has_normals = cloud.normals().is_some();
    write!(
        out,
        "ply\nformat ascii 1.0\ncomment point cloud in millimetres\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\n",
        cloud.len()
    )?;
    if has_normals {
        writeln!(
            out,
            "property float nx\nproperty float ny\nproperty float nz"
        )?;
    }
    writeln!(out, "end_header")?;
    let normals = cloud.normals();
    for (i, p) in cloud.points().iter().enumerate() {
        // Micron precision for coordinates; normals get more digits so the
        // unit-length invariant survives the round trip.
        write!(out, "{:.3} {:.3} {:.3}", p.x, p.y, p.z)?;
        if let Some(ns) = normals {
            let n = ns[i];
            write!(out, " {:.9} {:.9} {:.9}", n.x, n.y, n.z)?;
        }
        out.push(b'\n');
    }
    atomic_write(path, &out)
}

pub fn read_ply(path: &Path) -> Result<PointCloud> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(Error::Format(format!(
            "{}: missing `ply` magic",
            path.display()
        )));
    }

    let mut vertex_count: Option<usize> = None;
    let mut properties: Vec<String> = Vec::new();
    let mut in_vertex_element = false;
    for line in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("comment") {
            continue;
        }
        if line == "end_header" {
            break;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                if tok.next() != Some("ascii") {
                    return Err(Error::Format(format!(
                        "{}: only ascii PLY is supported",
                        path.display()
                    )));
                }
            }
            Some("element") => {
                let name = tok.next().unwrap_or("");
                in_vertex_element = name == "vertex";
                if in_vertex_element {
                    let count = tok
                        .next()
                        .and_then(|c| c.parse().ok())
                        .ok_or_else(|| Error::Format("bad vertex count".into()))?;
                    vertex_count = Some(count);
                }
            }
            Some("property") if in_vertex_element => {
                let _ty = tok.next();
                if let Some(name) = tok.next() {
                    properties.push(name.to_string());
                }
            }
            _ => {}
        }
    }
    let vertex_count =
        vertex_count.ok_or_else(|| Error::Format("no vertex element in PLY header".into()))?;

    let find = |name: &str| properties.iter().position(|p| p == name);
    let (xi, yi, zi) = match (find("x"), find("y"), find("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => {
            return Err(Error::Format(format!(
                "{}: vertex element lacks x/y/z properties",
                path.display()
            )))
        }
    };
    let normal_idx = match (find("nx"), find("ny"), find("nz")) {
        (Some(a), Some(b), Some(c)) => Some((a, b, c)),
        (None, None, None) => None,
        _ => {
            return Err(Error::Format(format!(
                "{}: partial normal properties",
                path.display()
            )))
        }
    };

    let mut points = Vec::with_capacity(vertex_count);
    let mut normals = normal_idx.map(|_| Vec::with_capacity(vertex_count));
    for (row, line) in lines.take(vertex_count).enumerate() {
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Format(format!("bad number `{t}` in vertex {row}")))
            })
            .collect::<Result<_>>()?;
        if values.len() < properties.len() {
            return Err(Error::Format(format!(
                "vertex {row} has {} values, header lists {} properties",
                values.len(),
                properties.len()
            )));
        }
        points.push(Vector3::new(values[xi], values[yi], values[zi]));
        if let (Some((a, b, c)), Some(ns)) = (normal_idx, normals.as_mut()) {
            ns.push(Vector3::new(values[a], values[b], values[c]));
        }
    }
    if points.len() != vertex_count {
        return Err(Error::Format(format!(
            "{}: expected {vertex_count} vertices, found {}",
            path.display(),
            points.len()
        )));
    }
    match normals {
        Some(ns) => PointCloud::with_normals(points, ns),
        None => Ok(PointCloud::from_points(points)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_normals() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ply");
        let cloud = PointCloud::with_normals(
            vec![
                Vector3::new(1.25, -2.5, 2500.0),
                Vector3::new(0.001, 7.75, 2400.125),
            ],
            vec![Vector3::new(0.0, 0.0, -1.0), Vector3::new(1.0, 0.0, 0.0)],
        )
        .unwrap();
        write_ply(&path, &cloud).unwrap();
        let back = read_ply(&path).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in cloud.points().iter().zip(back.points()) {
            assert!((a - b).norm() < 1e-3);
        }
        for (a, b) in cloud.normals().unwrap().iter().zip(back.normals().unwrap()) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn round_trip_without_normals() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.ply");
        let cloud = PointCloud::from_points(vec![Vector3::new(10.0, 20.0, 30.0)]);
        write_ply(&path, &cloud).unwrap();
        let back = read_ply(&path).unwrap();
        assert!(back.normals().is_none());
        assert_eq!(back.len(), 1);
    }

    #[test]
    fn rejects_binary_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.ply");
        fs::write(
            &path,
            "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n",
        )
        .unwrap();
        assert!(matches!(read_ply(&path), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_truncated_body() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ply");
        fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n",
        )
        .unwrap();
        assert!(matches!(read_ply(&path), Err(Error::Format(_))));
    }

    #[test]
    fn accepts_double_properties_and_extra_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.ply");
        fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\nproperty uchar red\nend_header\n1.5 2.5 3.5 255\n",
        )
        .unwrap();
        let cloud = read_ply(&path).unwrap();
        assert_eq!(cloud.points()[0], Vector3::new(1.5, 2.5, 3.5));
    }
}
