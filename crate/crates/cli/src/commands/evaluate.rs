//! `evaluate`: run the configured matching protocol over extracted
//! descriptors and emit the CMC curve as CSV plus a JSON summary.

use std::fs;

use anyhow::{Context, Result};
use serde::Serialize;

use depth_reid::io;
use depth_reid::recognition::{run_protocol, CmcCurve, ProtocolOptions};

use crate::config::ExperimentConfig;

use super::load_extracted_dataset;

#[derive(Debug, Serialize)]
struct EvaluationSummary {
    config: ExperimentConfig,
    seed: u64,
    mean: Vec<f64>,
    per_trial: Vec<Vec<f64>>,
    warnings: Vec<String>,
}

pub fn cmc_csv(curve: &CmcCurve) -> String {
    let mut out = String::from("rank,accuracy\n");
    for (k, acc) in curve.accuracies.iter().enumerate() {
        out.push_str(&format!("{},{:.6}\n", k + 1, acc));
    }
    out
}

pub fn run(config: &ExperimentConfig) -> Result<()> {
    let manifest_path = config.manifest_path()?;
    let out_dir = config.output_dir_path()?.to_path_buf();
    let (manifest, _) = io::load_manifest(manifest_path)?;
    let data = load_extracted_dataset(&manifest, &out_dir)?;

    let descriptor = config.descriptor_choice()?;
    let protocol = config.protocol_choice()?;
    let mut opts = ProtocolOptions::new(descriptor, protocol, config.trials(), config.seed());
    opts.gallery_group = config.gallery_group();
    opts.probe_group = config.probe_group();
    let result = run_protocol(&data, &opts)?;

    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let stem = format!(
        "{}_{}",
        descriptor.as_str().replace('+', "_"),
        protocol.as_str()
    );
    let csv_path = out_dir.join(format!("cmc_{stem}.csv"));
    io::atomic_write(&csv_path, cmc_csv(&result.mean).as_bytes())?;

    let summary = EvaluationSummary {
        config: config.echo(),
        seed: result.seed,
        mean: result.mean.accuracies.clone(),
        per_trial: result
            .per_trial
            .iter()
            .map(|c| c.accuracies.clone())
            .collect(),
        warnings: result.warnings.clone(),
    };
    let json_path = out_dir.join(format!("evaluation_{stem}.json"));
    io::atomic_write(
        &json_path,
        serde_json::to_string_pretty(&summary)?.as_bytes(),
    )?;

    println!(
        "evaluate: {} {} over {} trials, rank-1 {:.4}; wrote {} and {}",
        descriptor.as_str(),
        protocol.as_str(),
        config.trials(),
        result.mean.rank1(),
        csv_path.display(),
        json_path.display()
    );
    for w in result.warnings.iter().take(5) {
        eprintln!("  warning: {w}");
    }
    Ok(())
}
