//! File formats: 16-bit PGM depth maps, ASCII PLY clouds, JSON manifests and
//! descriptors, CSV feature/label/distance tables.

mod descriptor;
mod features;
mod manifest;
mod model;
mod pgm;
mod ply;

pub use descriptor::{read_frame_descriptor, write_frame_descriptor, FrameDescriptorFile};
pub use features::{
    read_distance_matrix, read_features_csv, read_features_with_ids, read_labels_csv,
    write_distance_matrix, write_features_csv, write_features_with_ids, write_labels_csv,
};
pub use manifest::{
    load_aux_dataset, load_manifest, load_skeleton, save_skeleton, AuxManifest, DatasetManifest,
    FrameEntry, ManifestPerson,
};
pub use model::{read_transfer_model, write_transfer_model};
pub use pgm::{load_depth_image, read_pgm16, write_pgm16};
pub use ply::{read_ply, write_ply};

use std::fs;
use std::path::Path;

use crate::error::Result;

/// Write a file atomically: write to a sibling temp path, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
