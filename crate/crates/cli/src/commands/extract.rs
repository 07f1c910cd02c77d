//! `extract`: per-frame descriptor files from a dataset manifest.
//!
//! Each frame goes cloud -> normals -> segmentation -> DVCov -> ED, plus the
//! skeleton feature; results land in `<out>/descriptors/`. Extraction is
//! idempotent (up-to-date outputs are skipped by mtime) and per-frame
//! failures are collected into a report instead of aborting the run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use depth_reid::covdesc::{extract_dvcov, extract_ed, ExtractConfig};
use depth_reid::geometry::estimate_normals;
use depth_reid::io;
use depth_reid::recognition::FrameDescriptor;
use depth_reid::skeleton::skeleton_feature;

use crate::config::ExperimentConfig;

use super::descriptor_path;

#[derive(Debug, Serialize)]
struct FrameFailure {
    person: String,
    group: String,
    frame: usize,
    cloud: String,
    error: String,
}

#[derive(Debug, Serialize)]
struct ExtractReport {
    total: usize,
    extracted: usize,
    up_to_date: usize,
    failures: Vec<FrameFailure>,
}

struct FrameJob {
    person: String,
    group: String,
    frame: usize,
    cloud: PathBuf,
    skeleton: PathBuf,
    output: PathBuf,
}

fn mtime(path: &Path) -> Option<SystemTime> {
    fs::metadata(path).and_then(|m| m.modified()).ok()
}

fn up_to_date(job: &FrameJob) -> bool {
    let Some(out) = mtime(&job.output) else {
        return false;
    };
    let newer_input = [&job.cloud, &job.skeleton]
        .into_iter()
        .filter_map(|p| mtime(p))
        .any(|t| t > out);
    !newer_input
}

/// Load a cloud from a PLY file, or back-project a 16-bit PGM depth map via
/// its `<stem>.intrinsics.json` sidecar.
fn load_cloud(path: &Path) -> Result<depth_reid::PointCloud> {
    if path.extension().and_then(|e| e.to_str()) == Some("pgm") {
        let sidecar = path.with_extension("intrinsics.json");
        let img = io::load_depth_image(path, &sidecar)?;
        Ok(depth_reid::geometry::depth_to_pointcloud(&img)?)
    } else {
        Ok(io::read_ply(path)?)
    }
}

fn run_job(job: &FrameJob, cfg: &ExtractConfig, normals_k: usize) -> Result<()> {
    let cloud = load_cloud(&job.cloud)?;
    let joints = io::load_skeleton(&job.skeleton)?;
    let cloud = estimate_normals(&cloud, normals_k)?;
    let dvcov = extract_dvcov(&cloud, &joints, cfg)?;
    let ed = extract_ed(&dvcov)?;
    let skl = skeleton_feature(&joints)?;
    let descriptor = FrameDescriptor { dvcov, ed, skl };
    io::write_frame_descriptor(&job.output, &job.person, &job.group, job.frame, &descriptor)?;
    Ok(())
}

pub fn run(config: &ExperimentConfig) -> Result<()> {
    let manifest_path = config.manifest_path()?;
    let out_dir = config.output_dir_path()?.to_path_buf();
    let (manifest, base) = io::load_manifest(manifest_path)?;
    fs::create_dir_all(out_dir.join("descriptors"))
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let extract_cfg = ExtractConfig {
        rows: config.grid_rows(),
        cols: config.grid_cols(),
        eps_rel: config.eps_rel(),
    };
    let normals_k = config.normals_k();

    let mut jobs = Vec::new();
    for person in &manifest.persons {
        for (group, frames) in &person.sequences {
            for (frame, entry) in frames.iter().enumerate() {
                jobs.push(FrameJob {
                    person: person.id.clone(),
                    group: group.clone(),
                    frame,
                    cloud: base.join(&entry.cloud),
                    skeleton: base.join(&entry.skeleton),
                    output: descriptor_path(&out_dir, &person.id, group, frame),
                });
            }
        }
    }
    let total = jobs.len();
    if total == 0 {
        bail!("manifest lists no frames");
    }

    let results: Vec<(usize, Option<String>, bool)> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, job)| {
            if up_to_date(job) {
                return (i, None, true);
            }
            match run_job(job, &extract_cfg, normals_k) {
                Ok(()) => (i, None, false),
                Err(e) => (i, Some(format!("{e:#}")), false),
            }
        })
        .collect();

    let mut failures = Vec::new();
    let mut up_to_date_count = 0;
    let mut extracted = 0;
    for (i, error, skipped) in results {
        if skipped {
            up_to_date_count += 1;
        } else if let Some(error) = error {
            let job = &jobs[i];
            failures.push(FrameFailure {
                person: job.person.clone(),
                group: job.group.clone(),
                frame: job.frame,
                cloud: job.cloud.display().to_string(),
                error,
            });
        } else {
            extracted += 1;
        }
    }

    let report = ExtractReport {
        total,
        extracted,
        up_to_date: up_to_date_count,
        failures,
    };
    io::atomic_write(
        &out_dir.join("extract_report.json"),
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?;
    println!(
        "extract: {} frames ({} extracted, {} up to date, {} failed); report at {}",
        total,
        report.extracted,
        report.up_to_date,
        report.failures.len(),
        out_dir.join("extract_report.json").display()
    );
    for f in report.failures.iter().take(10) {
        eprintln!(
            "  failed {}/{} frame {}: {} ({})",
            f.person, f.group, f.frame, f.error, f.cloud
        );
    }
    if report.failures.len() * 2 > total {
        bail!(
            "{} of {} frames failed extraction",
            report.failures.len(),
            total
        );
    }
    Ok(())
}
