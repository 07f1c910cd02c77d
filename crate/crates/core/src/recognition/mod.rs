//! Matching and evaluation: PCA/LDA subspace learning, the two fusion
//! matchers, CMC curves and the randomized single/multi-shot protocols.

mod cmc;
mod protocol;
mod subspace;

pub use cmc::{cmc_evaluate, CmcCurve, CmcOutcome};
pub use protocol::{
    run_protocol, Dataset, DescriptorChoice, FrameDescriptor, PersonRecords, Protocol,
    ProtocolOptions, ProtocolResult, DEFAULT_MULTI_SHOT,
};
pub use subspace::{fit_subspace, lda_fit, pca_fit, LdaModel, PcaModel, SubspaceModel};

use nalgebra::{DMatrix, DVector};

use crate::covdesc::{DVCovDescriptor, EigenDepthFeature};
use crate::error::{Error, Result};
use crate::skeleton::{skl_distance, SkeletonFeature};
use crate::spdmanifold;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetRole {
    Train,
    Gallery,
    Probe,
}

/// Feature vectors with one identity label per vector.
#[derive(Debug, Clone)]
pub struct LabeledFeatureSet {
    pub features: Vec<DVector<f64>>,
    pub labels: Vec<String>,
    pub role: SetRole,
}

impl LabeledFeatureSet {
    pub fn new(features: Vec<DVector<f64>>, labels: Vec<String>, role: SetRole) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} features vs {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some(first) = features.first() {
            let d = first.len();
            if features.iter().any(|f| f.len() != d) {
                return Err(Error::ShapeMismatch(
                    "feature vectors have mixed dimensions".into(),
                ));
            }
        }
        Ok(LabeledFeatureSet {
            features,
            labels,
            role,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, |f| f.len())
    }

    /// Distinct labels in first-occurrence order.
    pub fn distinct_labels(&self) -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        for l in &self.labels {
            if !seen.iter().any(|s| s == l) {
                seen.push(l.clone());
            }
        }
        seen
    }
}

/// Concatenate Eigen-depth and skeleton features into one vector
/// (within blocks, then between blocks, then the 13 skeleton elements).
pub fn fuse_ed_skl(ed: &EigenDepthFeature, skl: &SkeletonFeature) -> DVector<f64> {
    let mut v = Vec::with_capacity(ed.len() + skl.v.len());
    v.extend_from_slice(&ed.x);
    v.extend_from_slice(&skl.v);
    DVector::from_vec(v)
}

/// Pairwise Euclidean distances, probe rows by gallery columns.
pub fn euclidean_distance_matrix(probe: &[DVector<f64>], gallery: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(probe.len(), gallery.len());
    for (i, p) in probe.iter().enumerate() {
        for (j, g) in gallery.iter().enumerate() {
            m[(i, j)] = (p - g).norm();
        }
    }
    m
}

/// Train a PCA(100)+LDA subspace on `train`, project gallery and probe, and
/// return their pairwise Euclidean distances (probe x gallery). Training
/// identities must be disjoint from gallery/probe identities.
pub fn match_ed_skl(
    train: &LabeledFeatureSet,
    gallery: &LabeledFeatureSet,
    probe: &LabeledFeatureSet,
) -> Result<DMatrix<f64>> {
    for l in gallery.labels.iter().chain(&probe.labels) {
        if train.labels.contains(l) {
            return Err(Error::Protocol(format!(
                "training identity `{l}` also appears in the test set"
            )));
        }
    }
    let model = fit_subspace(train, 100)?;
    let g: Vec<DVector<f64>> = gallery.features.iter().map(|f| model.project(f)).collect();
    let p: Vec<DVector<f64>> = probe.features.iter().map(|f| model.project(f)).collect();
    Ok(euclidean_distance_matrix(&p, &g))
}

/// Training-free matcher: entry (i, j) is the descriptor geodesic-sum
/// distance plus the skeleton Euclidean distance between probe i and
/// gallery j.
pub fn match_dvcov_skl(
    gallery: &[(&DVCovDescriptor, &SkeletonFeature)],
    probe: &[(&DVCovDescriptor, &SkeletonFeature)],
) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(probe.len(), gallery.len());
    for (i, (pd, ps)) in probe.iter().enumerate() {
        for (j, (gd, gs)) in gallery.iter().enumerate() {
            m[(i, j)] = spdmanifold::dvcov_distance(pd, gd)? + skl_distance(ps, gs);
        }
    }
    Ok(m)
}
