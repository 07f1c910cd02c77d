//! Experiment configuration: a JSON file whose every field can be overridden
//! by a command-line flag of the same name.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use depth_reid::covdesc::{DEFAULT_EPS_REL, DEFAULT_GRID_COLS, DEFAULT_GRID_ROWS};
use depth_reid::recognition::{DescriptorChoice, Protocol};

pub const DEFAULT_NORMALS_K: usize = 10;
pub const DEFAULT_TRIALS: usize = 10;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_ETA: f64 = 0.3;

/// Accepts either a single number or a list in JSON.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum EtaSpec {
    One(f64),
    Many(Vec<f64>),
}

impl EtaSpec {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            EtaSpec::One(v) => vec![*v],
            EtaSpec::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TransferBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aux_manifest: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_features: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rgb_distances: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma1p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma0p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<EtaSpec>,
}

/// The experiment file. Relative paths are resolved against the config
/// file's directory (or the working directory when given by flag).
#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_cols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normals_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_rel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gallery_group: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_group: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferBlock>,
}

/// Flag-level overrides shared by every subcommand; mirrors the config file
/// field for field.
#[derive(Debug, Clone, Args, Default)]
pub struct ConfigOverrides {
    /// JSON experiment config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Dataset manifest JSON.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Descriptor: dvcov, ed, skl, ed+skl or dvcov+skl.
    #[arg(long)]
    pub descriptor: Option<String>,
    /// Protocol: single_shot or multi_shot.
    #[arg(long)]
    pub protocol: Option<String>,
    /// Number of evaluation trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// RNG seed driving splits and gallery sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Voxel grid rows.
    #[arg(long)]
    pub grid_rows: Option<usize>,
    /// Voxel grid columns.
    #[arg(long)]
    pub grid_cols: Option<usize>,
    /// Neighbour count for normal estimation.
    #[arg(long)]
    pub normals_k: Option<usize>,
    /// Relative covariance regularization.
    #[arg(long)]
    pub eps_rel: Option<f64>,
    /// Sequence group providing gallery frames.
    #[arg(long)]
    pub gallery_group: Option<String>,
    /// Sequence group providing probe frames.
    #[arg(long)]
    pub probe_group: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Auxiliary RGB-D manifest (transfer).
    #[arg(long)]
    pub aux_manifest: Option<PathBuf>,
    /// Transfer model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Target visual feature CSV (first column `id`).
    #[arg(long)]
    pub target_features: Option<PathBuf>,
    /// Precomputed RGB distance matrix CSV.
    #[arg(long)]
    pub rgb_distances: Option<PathBuf>,
    /// Mean-discrepancy weight multiplier.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Depth between-class weight.
    #[arg(long)]
    pub gamma1: Option<f64>,
    /// Depth within-class weight.
    #[arg(long)]
    pub gamma1p: Option<f64>,
    /// Visual between-class weight.
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// Visual within-class weight.
    #[arg(long)]
    pub gamma0p: Option<f64>,
    /// Latent subspace dimension.
    #[arg(long)]
    pub m: Option<usize>,
    /// Fusion weight(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eta: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        // Resolve paths relative to the config file's directory. Absolutize
        // so a config echo stays valid wherever it gets written.
        let base = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let base = std::fs::canonicalize(&base).unwrap_or(base);
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&path);
                }
            }
        };
        fix(&mut self.manifest);
        fix(&mut self.output_dir);
        if let Some(t) = &mut self.transfer {
            fix(&mut t.aux_manifest);
            fix(&mut t.model);
            fix(&mut t.target_features);
            fix(&mut t.rgb_distances);
        }
    }

    /// Apply flag overrides on top of the file config.
    pub fn apply(&mut self, flags: &ConfigOverrides) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if flags.$field.is_some() {
                    self.$field = flags.$field.clone();
                })*
            };
        }
        take!(
            manifest,
            descriptor,
            protocol,
            trials,
            seed,
            grid_rows,
            grid_cols,
            normals_k,
            eps_rel,
            gallery_group,
            probe_group,
            output_dir
        );
        let wants_transfer = flags.aux_manifest.is_some()
            || flags.model.is_some()
            || flags.target_features.is_some()
            || flags.rgb_distances.is_some()
            || flags.beta.is_some()
            || flags.gamma1.is_some()
            || flags.gamma1p.is_some()
            || flags.gamma0.is_some()
            || flags.gamma0p.is_some()
            || flags.m.is_some()
            || flags.eta.is_some();
        if wants_transfer {
            let t = self.transfer.get_or_insert_with(TransferBlock::default);
            macro_rules! take_t {
                ($($field:ident),*) => {
                    $(if flags.$field.is_some() {
                        t.$field = flags.$field.clone();
                    })*
                };
            }
            take_t!(
                aux_manifest,
                model,
                target_features,
                rgb_distances,
                beta,
                gamma1,
                gamma1p,
                gamma0,
                gamma0p,
                m
            );
            if let Some(eta) = &flags.eta {
                t.eta = Some(EtaSpec::Many(eta.clone()));
            }
        }
    }

    pub fn from_flags(flags: &ConfigOverrides) -> Result<Self> {
        let mut cfg = match &flags.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(flags);
        Ok(cfg)
    }

    pub fn descriptor_choice(&self) -> Result<DescriptorChoice> {
        let name = self.descriptor.as_deref().unwrap_or("ed+skl");
        Ok(name.parse::<DescriptorChoice>()?)
    }

    pub fn protocol_choice(&self) -> Result<Protocol> {
        let name = self.protocol.as_deref().unwrap_or("single_shot");
        Ok(name.parse::<Protocol>()?)
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn grid_rows(&self) -> usize {
        self.grid_rows.unwrap_or(DEFAULT_GRID_ROWS)
    }

    pub fn grid_cols(&self) -> usize {
        self.grid_cols.unwrap_or(DEFAULT_GRID_COLS)
    }

    pub fn normals_k(&self) -> usize {
        self.normals_k.unwrap_or(DEFAULT_NORMALS_K)
    }

    pub fn eps_rel(&self) -> f64 {
        self.eps_rel.unwrap_or(DEFAULT_EPS_REL)
    }

    pub fn gallery_group(&self) -> String {
        self.gallery_group
            .clone()
            .unwrap_or_else(|| "gallery".into())
    }

    pub fn probe_group(&self) -> String {
        self.probe_group.clone().unwrap_or_else(|| "probe".into())
    }

    pub fn manifest_path(&self) -> Result<&Path> {
        match &self.manifest {
            Some(p) => Ok(p),
            None => bail!("no dataset manifest configured; pass --manifest or set `manifest`"),
        }
    }

    pub fn output_dir_path(&self) -> Result<&Path> {
        match &self.output_dir {
            Some(p) => Ok(p),
            None => bail!("no output directory configured; pass --output-dir or set `output_dir`"),
        }
    }

    pub fn etas(&self) -> Vec<f64> {
        self.transfer
            .as_ref()
            .and_then(|t| t.eta.as_ref())
            .map(|e| e.to_vec())
            .unwrap_or_else(|| vec![DEFAULT_ETA])
    }

    /// Fully resolved echo for result files: defaults filled in so a rerun
    /// from the echo reproduces the run.
    pub fn echo(&self) -> ExperimentConfig {
        let mut out = self.clone();
        out.descriptor = Some(
            self.descriptor_choice()
                .map(|d| d.as_str().to_string())
                .unwrap_or_else(|_| "ed+skl".into()),
        );
        out.protocol = Some(
            self.protocol_choice()
                .map(|p| p.as_str().to_string())
                .unwrap_or_else(|_| "single_shot".into()),
        );
        out.trials = Some(self.trials());
        out.seed = Some(self.seed());
        out.grid_rows = Some(self.grid_rows());
        out.grid_cols = Some(self.grid_cols());
        out.normals_k = Some(self.normals_k());
        out.eps_rel = Some(self.eps_rel());
        out.gallery_group = Some(self.gallery_group());
        out.probe_group = Some(self.probe_group());
        out
    }
}
