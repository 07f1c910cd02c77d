//! Dataset and auxiliary-set manifests, plus skeleton JSON files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SkeletonJoints;
use crate::transfer::AuxiliaryDataset;

use super::atomic_write;
use super::features::{read_features_csv, read_labels_csv};

/// One frame of a capture sequence: a point cloud file plus its skeleton.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FrameEntry {
    pub cloud: String,
    pub skeleton: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestPerson {
    pub id: String,
    pub sequences: BTreeMap<String, Vec<FrameEntry>>,
}

/// `{ "persons": [ { "id", "sequences": { "<group>": [ {cloud, skeleton} ] } } ] }`
/// with paths interpreted relative to the manifest file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct DatasetManifest {
    pub persons: Vec<ManifestPerson>,
}

impl DatasetManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        atomic_write(path, serde_json::to_string_pretty(self)?.as_bytes())
    }
}

/// Load a manifest and remember its directory for resolving relative paths.
pub fn load_manifest(path: &Path) -> Result<(DatasetManifest, PathBuf)> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::MissingInput(format!("manifest {}: {e}", path.display())))?;
    let manifest: DatasetManifest = serde_json::from_str(&text)?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((manifest, base))
}

pub fn load_skeleton(path: &Path) -> Result<SkeletonJoints> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::MissingInput(format!("skeleton {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_skeleton(path: &Path, joints: &SkeletonJoints) -> Result<()> {
    atomic_write(path, serde_json::to_string_pretty(joints)?.as_bytes())
}

/// Auxiliary RGB-D manifest: CSV matrices for each modality plus labels.
/// `metadata` is free-form provenance (e.g. how the visual features were
/// computed) and is not interpreted.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AuxManifest {
    pub visual: String,
    pub depth: String,
    pub labels: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl AuxManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        atomic_write(path, serde_json::to_string_pretty(self)?.as_bytes())
    }
}

/// Load the auxiliary dataset referenced by a manifest.
pub fn load_aux_dataset(path: &Path) -> Result<AuxiliaryDataset> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::MissingInput(format!("aux manifest {}: {e}", path.display())))?;
    let manifest: AuxManifest = serde_json::from_str(&text)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let (_, visual) = read_features_csv(&base.join(&manifest.visual))?;
    let (_, depth) = read_features_csv(&base.join(&manifest.depth))?;
    let labels = read_labels_csv(&base.join(&manifest.labels))?;
    let visual: Vec<DVector<f64>> = visual.into_iter().map(DVector::from_vec).collect();
    let depth: Vec<DVector<f64>> = depth.into_iter().map(DVector::from_vec).collect();
    AuxiliaryDataset::new(visual, depth, labels)
}
