//! `transfer-train`: fit the kernelized feature transfer model on an
//! auxiliary RGB-D set and persist it with its diagnostics.

use anyhow::{bail, Result};

use depth_reid::io;
use depth_reid::transfer::{fit_transfer, KernelConfig, TransferHyperParams};

use crate::config::ExperimentConfig;

pub fn hyper_params(config: &ExperimentConfig) -> TransferHyperParams {
    let defaults = TransferHyperParams::default();
    let t = config.transfer.as_ref();
    TransferHyperParams {
        beta: t.and_then(|t| t.beta).unwrap_or(defaults.beta),
        gamma1: t.and_then(|t| t.gamma1).unwrap_or(defaults.gamma1),
        gamma1p: t.and_then(|t| t.gamma1p).unwrap_or(defaults.gamma1p),
        gamma0: t.and_then(|t| t.gamma0).unwrap_or(defaults.gamma0),
        gamma0p: t.and_then(|t| t.gamma0p).unwrap_or(defaults.gamma0p),
        m: t.and_then(|t| t.m).unwrap_or(defaults.m),
    }
}

pub fn run(config: &ExperimentConfig) -> Result<()> {
    let Some(t) = config.transfer.as_ref() else {
        bail!("transfer-train needs a transfer block or --aux-manifest/--model flags");
    };
    let Some(aux_path) = t.aux_manifest.as_ref() else {
        bail!("no auxiliary manifest configured; pass --aux-manifest");
    };
    let Some(model_path) = t.model.as_ref() else {
        bail!("no model output path configured; pass --model");
    };

    let aux = io::load_aux_dataset(aux_path)?;
    let hp = hyper_params(config);
    let kc = KernelConfig::from_mean_distances(&aux)?;
    let model = fit_transfer(&aux, &hp, &kc)?;
    io::write_transfer_model(model_path, &model)?;

    let d = &model.diagnostics;
    let max_residual = d
        .residual_norms
        .iter()
        .zip(&d.b1a_norms)
        .map(|(r, s)| r / s.max(1e-300))
        .fold(0.0f64, f64::max);
    println!(
        "transfer-train: {} samples, {} classes, m = {}; top eigenvalue {:.4e}, max relative residual {:.2e}, orthonormality dev {:.2e}; wrote {}",
        aux.len(),
        aux.class_count(),
        model.latent_dim(),
        d.eigenvalues.first().copied().unwrap_or(0.0),
        max_residual,
        d.b2_orthonormality_dev,
        model_path.display()
    );
    Ok(())
}
