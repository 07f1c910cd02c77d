//! Per-frame descriptor JSON. The `dvcov` object follows the
//! `{ "within": [[36 numbers row-major], ...], "between": [...],
//! "empty_flags": [...] }` layout (flags concatenate within then between),
//! extended with the grid dimensions so the layout is self-describing.
//! `ed` is `{ "ed": [...] }` and `skl` a bare 13-number array.

use std::fs;
use std::path::Path;

use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

use crate::covdesc::{CovKind, CovMatrix6, DVCovDescriptor, EigenDepthFeature};
use crate::error::{Error, Result};
use crate::recognition::FrameDescriptor;
use crate::skeleton::{SkeletonFeature, SKELETON_FEATURE_LEN};

use super::atomic_write;

#[derive(Debug, Serialize, Deserialize)]
struct DvcovJson {
    rows: usize,
    cols: usize,
    within: Vec<Vec<f64>>,
    between: Vec<Vec<f64>>,
    empty_flags: Vec<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdJson {
    ed: Vec<f64>,
}

/// On-disk frame record produced by extraction.
#[derive(Debug, Serialize, Deserialize)]
pub struct FrameDescriptorFile {
    pub person: String,
    pub group: String,
    pub frame: usize,
    dvcov: DvcovJson,
    ed: EdJson,
    skl: Vec<f64>,
}

fn matrix_to_row_major(m: &Matrix6<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(36);
    for i in 0..6 {
        for j in 0..6 {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn matrix_from_row_major(values: &[f64]) -> Result<Matrix6<f64>> {
    if values.len() != 36 {
        return Err(Error::Format(format!(
            "covariance block has {} numbers, expected 36",
            values.len()
        )));
    }
    let mut m = Matrix6::zeros();
    for i in 0..6 {
        for j in 0..6 {
            m[(i, j)] = values[i * 6 + j];
        }
    }
    Ok(m)
}

impl FrameDescriptorFile {
    pub fn from_parts(
        person: &str,
        group: &str,
        frame: usize,
        descriptor: &FrameDescriptor,
    ) -> Self {
        let d = &descriptor.dvcov;
        let mut empty_flags = d.within_empty.clone();
        empty_flags.extend_from_slice(&d.between_empty);
        FrameDescriptorFile {
            person: person.to_string(),
            group: group.to_string(),
            frame,
            dvcov: DvcovJson {
                rows: d.rows,
                cols: d.cols,
                within: d
                    .within
                    .iter()
                    .map(|c| matrix_to_row_major(c.matrix()))
                    .collect(),
                between: d
                    .between
                    .iter()
                    .map(|c| matrix_to_row_major(c.matrix()))
                    .collect(),
                empty_flags,
            },
            ed: EdJson {
                ed: descriptor.ed.x.clone(),
            },
            skl: descriptor.skl.v.to_vec(),
        }
    }

    pub fn into_descriptor(self) -> Result<FrameDescriptor> {
        let n_within = self.dvcov.within.len();
        let n_between = self.dvcov.between.len();
        if self.dvcov.empty_flags.len() != n_within + n_between {
            return Err(Error::Format(format!(
                "empty_flags has {} entries, expected {}",
                self.dvcov.empty_flags.len(),
                n_within + n_between
            )));
        }
        let within = self
            .dvcov
            .within
            .iter()
            .map(|v| Ok(CovMatrix6::new(CovKind::Within, matrix_from_row_major(v)?)))
            .collect::<Result<Vec<_>>>()?;
        let between = self
            .dvcov
            .between
            .iter()
            .map(|v| Ok(CovMatrix6::new(CovKind::Between, matrix_from_row_major(v)?)))
            .collect::<Result<Vec<_>>>()?;
        let dvcov = DVCovDescriptor {
            rows: self.dvcov.rows,
            cols: self.dvcov.cols,
            within,
            between,
            within_empty: self.dvcov.empty_flags[..n_within].to_vec(),
            between_empty: self.dvcov.empty_flags[n_within..].to_vec(),
        };
        if self.skl.len() != SKELETON_FEATURE_LEN {
            return Err(Error::Format(format!(
                "skl has {} entries, expected {SKELETON_FEATURE_LEN}",
                self.skl.len()
            )));
        }
        let mut v = [0.0; SKELETON_FEATURE_LEN];
        v.copy_from_slice(&self.skl);
        Ok(FrameDescriptor {
            dvcov,
            ed: EigenDepthFeature { x: self.ed.ed },
            skl: SkeletonFeature { v },
        })
    }
}

pub fn write_frame_descriptor(
    path: &Path,
    person: &str,
    group: &str,
    frame: usize,
    descriptor: &FrameDescriptor,
) -> Result<()> {
    let file = FrameDescriptorFile::from_parts(person, group, frame, descriptor);
    atomic_write(path, serde_json::to_string(&file)?.as_bytes())
}

pub fn read_frame_descriptor(path: &Path) -> Result<(String, String, FrameDescriptor)> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::MissingInput(format!(
            "descriptor {}: {e}; run `extract` first",
            path.display()
        ))
    })?;
    let file: FrameDescriptorFile = serde_json::from_str(&text)?;
    let person = file.person.clone();
    let group = file.group.clone();
    Ok((person, group, file.into_descriptor()?))
}
