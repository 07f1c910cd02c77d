//! Subcommand implementations.

pub mod evaluate;
pub mod extract;
pub mod synth;
pub mod transfer_apply;
pub mod transfer_train;
pub mod verify;

use std::path::{Path, PathBuf};

use anyhow::Result;
use depth_reid::Error;

/// Exit codes: 0 success, 1 usage, 2 data, 3 numerical failure.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(core) = err.downcast_ref::<Error>() {
        return match core {
            Error::NotPositiveDefinite
            | Error::Conditioning(_)
            | Error::ZeroVariance
            | Error::ZeroMean
            | Error::DegenerateNeighborhood
            | Error::DegenerateExtent(_) => 3,
            Error::InvalidParam(_) | Error::WrongGridKind { .. } => 1,
            _ => 2,
        };
    }
    2
}

/// `<out>/descriptors/<person>__<group>__<frame idx>.json`
pub fn descriptor_path(out_dir: &Path, person: &str, group: &str, frame: usize) -> PathBuf {
    out_dir
        .join("descriptors")
        .join(format!("{person}__{group}__{frame:04}.json"))
}

/// Person identity of a sample id: the part before `#`, or the whole id.
pub fn person_of_id(id: &str) -> &str {
    id.split_once('#').map(|(p, _)| p).unwrap_or(id)
}

/// Load every frame descriptor referenced by the manifest into a dataset.
pub fn load_extracted_dataset(
    manifest: &depth_reid::io::DatasetManifest,
    out_dir: &Path,
) -> Result<depth_reid::Dataset> {
    use depth_reid::recognition::{Dataset, PersonRecords};
    let mut data = Dataset::default();
    for person in &manifest.persons {
        let mut records = PersonRecords {
            id: person.id.clone(),
            groups: Default::default(),
        };
        for (group, frames) in &person.sequences {
            let mut list = Vec::with_capacity(frames.len());
            for (idx, _) in frames.iter().enumerate() {
                let path = descriptor_path(out_dir, &person.id, group, idx);
                let (_, _, descriptor) = depth_reid::io::read_frame_descriptor(&path)?;
                list.push(descriptor);
            }
            records.groups.insert(group.clone(), list);
        }
        data.persons.push(records);
    }
    Ok(data)
}
