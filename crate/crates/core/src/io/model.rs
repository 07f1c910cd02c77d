//! Transfer-model persistence: one JSON file holding anchors, the projection
//! (row-major), kernel bandwidths, hyperparameters and fit diagnostics.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transfer::{FitDiagnostics, KernelConfig, TransferHyperParams, TransferModel};

use super::atomic_write;

#[derive(Debug, Serialize, Deserialize)]
struct ModelJson {
    anchors: Vec<Vec<f64>>,
    /// N_s rows of m columns.
    projection: Vec<Vec<f64>>,
    kernel: KernelConfig,
    hyper: TransferHyperParams,
    diagnostics: FitDiagnostics,
}

pub fn write_transfer_model(path: &Path, model: &TransferModel) -> Result<()> {
    let json = ModelJson {
        anchors: model
            .anchors
            .iter()
            .map(|a| a.as_slice().to_vec())
            .collect(),
        projection: (0..model.projection.nrows())
            .map(|i| model.projection.row(i).iter().copied().collect())
            .collect(),
        kernel: model.kernel,
        hyper: model.hyper,
        diagnostics: model.diagnostics.clone(),
    };
    atomic_write(path, serde_json::to_string(&json)?.as_bytes())
}

pub fn read_transfer_model(path: &Path) -> Result<TransferModel> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::MissingInput(format!(
            "model {}: {e}; run `transfer-train` first",
            path.display()
        ))
    })?;
    let json: ModelJson = serde_json::from_str(&text)?;
    let n_s = json.projection.len();
    let m = json.projection.first().map_or(0, |r| r.len());
    if json.anchors.len() != n_s {
        return Err(Error::Format(format!(
            "model has {} anchors but {} projection rows",
            json.anchors.len(),
            n_s
        )));
    }
    let mut projection = DMatrix::zeros(n_s, m);
    for (i, row) in json.projection.iter().enumerate() {
        if row.len() != m {
            return Err(Error::Format("ragged projection rows".into()));
        }
        for (j, &v) in row.iter().enumerate() {
            projection[(i, j)] = v;
        }
    }
    Ok(TransferModel {
        anchors: json.anchors.into_iter().map(DVector::from_vec).collect(),
        projection,
        kernel: json.kernel,
        hyper: json.hyper,
        diagnostics: json.diagnostics,
    })
}
