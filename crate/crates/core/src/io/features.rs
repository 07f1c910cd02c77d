//! CSV tables: feature matrices (header row = dimension names), label
//! columns, and distance matrices with probe ids across the first row and
//! gallery ids down the first column.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::atomic_write;

fn parse_f64(field: &str, context: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("{context}: bad number `{field}`")))
}

/// Feature matrix CSV: header row names the dimensions, one sample per row.
pub fn read_features_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::MissingInput(format!("{}: {e}", path.display())))?;
    let dims: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != dims.len() {
            return Err(Error::Format(format!(
                "{}: row {i} has {} fields, header has {}",
                path.display(),
                record.len(),
                dims.len()
            )));
        }
        let row: Vec<f64> = record
            .iter()
            .map(|f| parse_f64(f, &format!("{} row {i}", path.display())))
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    Ok((dims, rows))
}

pub fn write_features_csv(path: &Path, dims: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&dims.join(","));
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Feature CSV with a leading `id` column, used for target-domain samples.
pub fn read_features_with_ids(path: &Path) -> Result<(Vec<String>, Vec<DVector<f64>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::MissingInput(format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() || headers.get(0).map(str::trim) != Some("id") {
        return Err(Error::Format(format!(
            "{}: first column must be `id`",
            path.display()
        )));
    }
    let width = headers.len();
    let mut ids = Vec::new();
    let mut features = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != width {
            return Err(Error::Format(format!(
                "{}: row {i} has {} fields, header has {width}",
                path.display(),
                record.len()
            )));
        }
        ids.push(record.get(0).unwrap_or("").trim().to_string());
        let row: Vec<f64> = record
            .iter()
            .skip(1)
            .map(|f| parse_f64(f, &format!("{} row {i}", path.display())))
            .collect::<Result<_>>()?;
        features.push(DVector::from_vec(row));
    }
    Ok((ids, features))
}

pub fn write_features_with_ids(
    path: &Path,
    ids: &[String],
    features: &[DVector<f64>],
) -> Result<()> {
    if ids.len() != features.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} ids vs {} feature rows",
            ids.len(),
            features.len()
        )));
    }
    let dim = features.first().map_or(0, |f| f.len());
    let mut out = String::from("id");
    for j in 0..dim {
        out.push_str(&format!(",f{j}"));
    }
    out.push('\n');
    for (id, f) in ids.iter().zip(features) {
        out.push_str(id);
        for v in f.iter() {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// One label per row under a `label` header.
pub fn read_labels_csv(path: &Path) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::MissingInput(format!("{}: {e}", path.display())))?;
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        labels.push(
            record
                .get(0)
                .ok_or_else(|| Error::Format("empty label row".into()))?
                .trim()
                .to_string(),
        );
    }
    Ok(labels)
}

pub fn write_labels_csv(path: &Path, labels: &[String]) -> Result<()> {
    let mut out = String::from("label\n");
    for l in labels {
        out.push_str(l);
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Distance matrix CSV: first row holds probe ids, first column gallery ids,
/// cell (gallery g, probe p) = distance. In memory the matrix is
/// probe-major: `m[(p, g)]`.
pub fn write_distance_matrix(
    path: &Path,
    gallery_ids: &[String],
    probe_ids: &[String],
    dist: &DMatrix<f64>,
) -> Result<()> {
    if dist.nrows() != probe_ids.len() || dist.ncols() != gallery_ids.len() {
        return Err(Error::ShapeMismatch(format!(
            "matrix {}x{} vs {} probes x {} gallery",
            dist.nrows(),
            dist.ncols(),
            probe_ids.len(),
            gallery_ids.len()
        )));
    }
    let mut out = String::from("id");
    for p in probe_ids {
        out.push(',');
        out.push_str(p);
    }
    out.push('\n');
    for (g, gid) in gallery_ids.iter().enumerate() {
        out.push_str(gid);
        for p in 0..probe_ids.len() {
            out.push_str(&format!(",{}", dist[(p, g)]));
        }
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_distance_matrix(path: &Path) -> Result<(Vec<String>, Vec<String>, DMatrix<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::MissingInput(format!("{}: {e}", path.display())))?;
    let probe_ids: Vec<String> = reader
        .headers()?
        .iter()
        .skip(1)
        .map(|h| h.trim().to_string())
        .collect();
    let mut gallery_ids = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != probe_ids.len() + 1 {
            return Err(Error::Format(format!(
                "{}: row {i} has {} fields, expected {}",
                path.display(),
                record.len(),
                probe_ids.len() + 1
            )));
        }
        gallery_ids.push(record.get(0).unwrap_or("").trim().to_string());
        values.push(
            record
                .iter()
                .skip(1)
                .map(|f| parse_f64(f, &format!("{} row {i}", path.display())))
                .collect::<Result<_>>()?,
        );
    }
    let mut dist = DMatrix::zeros(probe_ids.len(), gallery_ids.len());
    for (g, row) in values.iter().enumerate() {
        for (p, &v) in row.iter().enumerate() {
            dist[(p, g)] = v;
        }
    }
    Ok((gallery_ids, probe_ids, dist))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn features_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let dims = vec!["a".to_string(), "b".to_string()];
        let rows = vec![vec![1.5, -2.0], vec![0.25, 1e-9]];
        write_features_csv(&path, &dims, &rows).unwrap();
        let (d, r) = read_features_csv(&path).unwrap();
        assert_eq!(d, dims);
        assert_eq!(r, rows);
    }

    #[test]
    fn distance_matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let gallery = vec!["g0".to_string(), "g1".to_string(), "g2".to_string()];
        let probes = vec!["p0".to_string(), "p1".to_string()];
        let dist = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        write_distance_matrix(&path, &gallery, &probes, &dist).unwrap();
        let (g, p, back) = read_distance_matrix(&path).unwrap();
        assert_eq!(g, gallery);
        assert_eq!(p, probes);
        assert_eq!(back, dist);
        // Check the on-disk orientation: row g0 carries probe distances.
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "id,p0,p1");
        assert_eq!(lines[1], "g0,1,4");
    }

    #[test]
    fn ids_features_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let ids = vec!["a#0".to_string(), "b#1".to_string()];
        let features = vec![
            DVector::from_vec(vec![1.0, 2.0]),
            DVector::from_vec(vec![3.0, 4.0]),
        ];
        write_features_with_ids(&path, &ids, &features).unwrap();
        let (back_ids, back_f) = read_features_with_ids(&path).unwrap();
        assert_eq!(back_ids, ids);
        assert_eq!(back_f, features);
    }
}
