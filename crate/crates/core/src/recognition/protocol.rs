//! Randomized evaluation protocols: identity split, gallery sampling,
//! trial averaging.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::covdesc::{DVCovDescriptor, EigenDepthFeature};
use crate::error::{Error, Result};
use crate::skeleton::SkeletonFeature;

use super::{
    cmc_evaluate, euclidean_distance_matrix, fuse_ed_skl, match_dvcov_skl, match_ed_skl, CmcCurve,
    LabeledFeatureSet, SetRole,
};

pub const DEFAULT_MULTI_SHOT: usize = 5;

/// Everything extracted from one frame.
#[derive(Debug, Clone)]
pub struct FrameDescriptor {
    pub dvcov: DVCovDescriptor,
    pub ed: EigenDepthFeature,
    pub skl: SkeletonFeature,
}

#[derive(Debug, Clone)]
pub struct PersonRecords {
    pub id: String,
    pub groups: BTreeMap<String, Vec<FrameDescriptor>>,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub persons: Vec<PersonRecords>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.persons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.persons.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    SingleShot,
    MultiShot,
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_shot" => Ok(Protocol::SingleShot),
            "multi_shot" => Ok(Protocol::MultiShot),
            other => Err(Error::InvalidParam(format!(
                "unknown protocol `{other}` (expected single_shot or multi_shot)"
            ))),
        }
    }
}

impl Protocol {
    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::SingleShot => "single_shot",
            Protocol::MultiShot => "multi_shot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorChoice {
    Dvcov,
    Ed,
    Skl,
    EdSkl,
    DvcovSkl,
}

impl FromStr for DescriptorChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dvcov" => Ok(DescriptorChoice::Dvcov),
            "ed" => Ok(DescriptorChoice::Ed),
            "skl" => Ok(DescriptorChoice::Skl),
            "ed+skl" => Ok(DescriptorChoice::EdSkl),
            "dvcov+skl" => Ok(DescriptorChoice::DvcovSkl),
            other => Err(Error::InvalidParam(format!(
                "unknown descriptor `{other}` (expected dvcov, ed, skl, ed+skl or dvcov+skl)"
            ))),
        }
    }
}

impl DescriptorChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            DescriptorChoice::Dvcov => "dvcov",
            DescriptorChoice::Ed => "ed",
            DescriptorChoice::Skl => "skl",
            DescriptorChoice::EdSkl => "ed+skl",
            DescriptorChoice::DvcovSkl => "dvcov+skl",
        }
    }

    /// Whether the matcher needs a disjoint training split.
    pub fn needs_training(&self) -> bool {
        matches!(self, DescriptorChoice::Ed | DescriptorChoice::EdSkl)
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolOptions {
    pub descriptor: DescriptorChoice,
    pub protocol: Protocol,
    pub trials: usize,
    pub seed: u64,
    pub gallery_group: String,
    pub probe_group: String,
    pub multi_shot_count: usize,
    /// Maximum CMC rank; defaults to the number of test classes.
    pub k_max: Option<usize>,
}

impl ProtocolOptions {
    pub fn new(descriptor: DescriptorChoice, protocol: Protocol, trials: usize, seed: u64) -> Self {
        ProtocolOptions {
            descriptor,
            protocol,
            trials,
            seed,
            gallery_group: "gallery".into(),
            probe_group: "probe".into(),
            multi_shot_count: DEFAULT_MULTI_SHOT,
            k_max: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub mean: CmcCurve,
    pub per_trial: Vec<CmcCurve>,
    pub seed: u64,
    pub warnings: Vec<String>,
}

fn vector_feature(choice: DescriptorChoice, frame: &FrameDescriptor) -> DVector<f64> {
    match choice {
        DescriptorChoice::Ed => DVector::from_vec(frame.ed.x.clone()),
        DescriptorChoice::Skl => DVector::from_column_slice(&frame.skl.v),
        DescriptorChoice::EdSkl => fuse_ed_skl(&frame.ed, &frame.skl),
        _ => unreachable!("matrix descriptors have no vector form"),
    }
}

/// One evaluation trial: split identities, sample the gallery, score the
/// probe set, return the CMC curve.
fn run_trial(
    data: &Dataset,
    opts: &ProtocolOptions,
    trial: usize,
    warnings: &mut Vec<String>,
) -> Result<CmcCurve> {
    let n = data.persons.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(trial as u64);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let train_count = n.div_ceil(2);
    let (train_ids, test_ids) = order.split_at(train_count);
    if test_ids.is_empty() {
        return Err(Error::Protocol("no identities left for testing".into()));
    }

    let shots = match opts.protocol {
        Protocol::SingleShot => 1,
        Protocol::MultiShot => opts.multi_shot_count,
    };

    // Gallery: sampled frames from the gallery group of each test person.
    let mut gallery_frames: Vec<&FrameDescriptor> = Vec::new();
    let mut gallery_labels: Vec<String> = Vec::new();
    // Probe: every frame of the probe group of each test person.
    let mut probe_frames: Vec<&FrameDescriptor> = Vec::new();
    let mut probe_labels: Vec<String> = Vec::new();

    for &pid in test_ids {
        let person = &data.persons[pid];
        let frames = person
            .groups
            .get(&opts.gallery_group)
            .filter(|f| !f.is_empty())
            .ok_or_else(|| {
                Error::Protocol(format!(
                    "person `{}` has no frames in gallery group `{}`",
                    person.id, opts.gallery_group
                ))
            })?;
        let picks: Vec<usize> = if frames.len() >= shots {
            let mut idx = rand::seq::index::sample(&mut rng, frames.len(), shots).into_vec();
            idx.sort_unstable();
            idx
        } else {
            warnings.push(format!(
                "trial {trial}: person `{}` has {} gallery frames, need {shots}; sampling with replacement",
                person.id,
                frames.len()
            ));
            (0..shots)
                .map(|_| rng.random_range(0..frames.len()))
                .collect()
        };
        for i in picks {
            gallery_frames.push(&frames[i]);
            gallery_labels.push(person.id.clone());
        }
        match person.groups.get(&opts.probe_group) {
            Some(frames) if !frames.is_empty() => {
                for f in frames {
                    probe_frames.push(f);
                    probe_labels.push(person.id.clone());
                }
            }
            _ => warnings.push(format!(
                "trial {trial}: person `{}` has no frames in probe group `{}`",
                person.id, opts.probe_group
            )),
        }
    }
    if probe_frames.is_empty() {
        return Err(Error::Protocol("no probe frames in this trial".into()));
    }

    let dist: DMatrix<f64> = match opts.descriptor {
        DescriptorChoice::Dvcov => {
            let g: Vec<_> = gallery_frames.iter().map(|f| (&f.dvcov, &f.skl)).collect();
            let p: Vec<_> = probe_frames.iter().map(|f| (&f.dvcov, &f.skl)).collect();
            let zero = SkeletonFeature { v: [0.0; 13] };
            let g: Vec<_> = g.iter().map(|(d, _)| (*d, &zero)).collect();
            let p: Vec<_> = p.iter().map(|(d, _)| (*d, &zero)).collect();
            match_dvcov_skl(&g, &p)?
        }
        DescriptorChoice::DvcovSkl => {
            let g: Vec<_> = gallery_frames.iter().map(|f| (&f.dvcov, &f.skl)).collect();
            let p: Vec<_> = probe_frames.iter().map(|f| (&f.dvcov, &f.skl)).collect();
            match_dvcov_skl(&g, &p)?
        }
        DescriptorChoice::Skl => {
            let g: Vec<DVector<f64>> = gallery_frames
                .iter()
                .map(|f| vector_feature(opts.descriptor, f))
                .collect();
            let p: Vec<DVector<f64>> = probe_frames
                .iter()
                .map(|f| vector_feature(opts.descriptor, f))
                .collect();
            euclidean_distance_matrix(&p, &g)
        }
        DescriptorChoice::Ed | DescriptorChoice::EdSkl => {
            // Training set: every frame of every group of the training split.
            let mut train_features = Vec::new();
            let mut train_labels = Vec::new();
            for &pid in train_ids {
                let person = &data.persons[pid];
                for frames in person.groups.values() {
                    for f in frames {
                        train_features.push(vector_feature(opts.descriptor, f));
                        train_labels.push(person.id.clone());
                    }
                }
            }
            let train = LabeledFeatureSet::new(train_features, train_labels, SetRole::Train)?;
            let gallery = LabeledFeatureSet::new(
                gallery_frames
                    .iter()
                    .map(|f| vector_feature(opts.descriptor, f))
                    .collect(),
                gallery_labels.clone(),
                SetRole::Gallery,
            )?;
            let probe = LabeledFeatureSet::new(
                probe_frames
                    .iter()
                    .map(|f| vector_feature(opts.descriptor, f))
                    .collect(),
                probe_labels.clone(),
                SetRole::Probe,
            )?;
            match_ed_skl(&train, &gallery, &probe)?
        }
    };

    let test_classes = test_ids.len();
    let k_max = opts.k_max.unwrap_or(test_classes).max(1);
    let outcome = cmc_evaluate(&dist, &gallery_labels, &probe_labels, k_max)?;
    if outcome.unmatched_probes > 0 {
        warnings.push(format!(
            "trial {trial}: {} probes have no gallery class",
            outcome.unmatched_probes
        ));
    }
    Ok(outcome.curve)
}

/// Repeat the split/sample/match/evaluate cycle `trials` times and average
/// the curves. Each trial draws from its own RNG stream of the given seed, so
/// results are reproducible and trial-order independent.
pub fn run_protocol(data: &Dataset, opts: &ProtocolOptions) -> Result<ProtocolResult> {
    if data.persons.len() < 2 {
        return Err(Error::Protocol(format!(
            "need at least 2 persons, got {}",
            data.persons.len()
        )));
    }
    if opts.trials == 0 {
        return Err(Error::InvalidParam("trials must be >= 1".into()));
    }
    let mut warnings = Vec::new();
    let mut per_trial = Vec::with_capacity(opts.trials);
    for t in 0..opts.trials {
        per_trial.push(run_trial(data, opts, t, &mut warnings)?);
    }
    let mean = CmcCurve::mean(&per_trial)?;
    Ok(ProtocolResult {
        mean,
        per_trial,
        seed: opts.seed,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covdesc::{extract_dvcov, extract_ed, ExtractConfig};
    use crate::geometry::estimate_normals;
    use crate::skeleton::skeleton_feature;
    use crate::synthbench::{generate_body, identity_spec};

    fn tiny_dataset(persons: usize, frames_per_group: usize, seed: u64) -> Dataset {
        let cfg = ExtractConfig::default();
        let mut out = Dataset::default();
        for p in 0..persons {
            let mut groups: BTreeMap<String, Vec<FrameDescriptor>> = BTreeMap::new();
            for (gi, group) in ["gallery", "probe"].iter().enumerate() {
                let mut frames = Vec::new();
                for f in 0..frames_per_group {
                    let mut spec = identity_spec(p);
                    spec.noise_sigma = 2.0;
                    let frame_seed = seed
                        .wrapping_add((p as u64) << 20)
                        .wrapping_add((gi as u64) << 10)
                        .wrapping_add(f as u64);
                    let (labeled, joints) = generate_body(&spec, frame_seed);
                    let cloud = estimate_normals(&labeled.cloud, 10).unwrap();
                    let dvcov = extract_dvcov(&cloud, &joints, &cfg).unwrap();
                    let ed = extract_ed(&dvcov).unwrap();
                    let skl = skeleton_feature(&joints).unwrap();
                    frames.push(FrameDescriptor { dvcov, ed, skl });
                }
                groups.insert(group.to_string(), frames);
            }
            out.persons.push(PersonRecords {
                id: format!("p{p:02}"),
                groups,
            });
        }
        out
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let data = tiny_dataset(4, 2, 5);
        let opts = ProtocolOptions::new(DescriptorChoice::Skl, Protocol::SingleShot, 1, 99);
        let a = run_protocol(&data, &opts).unwrap();
        let b = run_protocol(&data, &opts).unwrap();
        assert_eq!(a.mean.accuracies, b.mean.accuracies);
        assert_eq!(a.per_trial.len(), 1);
    }

    #[test]
    fn identical_frames_give_perfect_rank1() {
        // Paper-style sanity check: if every frame of a person is identical,
        // single-shot matching is trivially perfect for any sane matcher.
        let mut data = tiny_dataset(4, 1, 7);
        for person in &mut data.persons {
            let frame = person.groups["gallery"][0].clone();
            person
                .groups
                .insert("probe".into(), vec![frame.clone(), frame.clone()]);
            person.groups.insert("gallery".into(), vec![frame]);
        }
        for choice in [
            DescriptorChoice::Skl,
            DescriptorChoice::Dvcov,
            DescriptorChoice::DvcovSkl,
        ] {
            let opts = ProtocolOptions::new(choice, Protocol::SingleShot, 2, 3);
            let res = run_protocol(&data, &opts).unwrap();
            assert!(
                (res.mean.rank1() - 1.0).abs() < 1e-12,
                "{choice:?} rank1 = {}",
                res.mean.rank1()
            );
        }
    }

    #[test]
    fn multi_shot_uses_min_rule_and_warns_on_short_galleries() {
        let data = tiny_dataset(4, 2, 11);
        let mut opts = ProtocolOptions::new(DescriptorChoice::Skl, Protocol::MultiShot, 1, 5);
        opts.multi_shot_count = 5;
        // Only 2 gallery frames available: replacement warning expected.
        let res = run_protocol(&data, &opts).unwrap();
        assert!(res
            .warnings
            .iter()
            .any(|w| w.contains("sampling with replacement")));
        assert!(res.mean.is_monotone());
    }

    #[test]
    fn multi_shot_min_rule_matches_hand_computation() {
        // Hand-built two-person set with constant 13-vectors; the class
        // distance is the min over that class's gallery entries.
        let g_feats: Vec<DVector<f64>> = [1.0, 10.0, 5.0, 6.0]
            .iter()
            .map(|&v| DVector::from_column_slice(&[v; 13]))
            .collect();
        let p_feats: Vec<DVector<f64>> = [4.0, 4.9]
            .iter()
            .map(|&v| DVector::from_column_slice(&[v; 13]))
            .collect();
        let dist = euclidean_distance_matrix(&p_feats, &g_feats);
        let g_labels: Vec<String> = ["a", "a", "b", "b"].iter().map(|s| s.to_string()).collect();
        let p_labels: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let out = cmc_evaluate(&dist, &g_labels, &p_labels, 2).unwrap();
        // Probe a at 4.0: min-dist 3*sqrt(13) to class a {1, 10} but only
        // 1*sqrt(13) to class b {5, 6} -> its own class ranks 2nd.
        // Probe b at 4.9: 0.1*sqrt(13) to b beats 3.9*sqrt(13) to a -> rank 1.
        assert_eq!(out.curve.accuracies, vec![0.5, 1.0]);
    }

    #[test]
    fn trials_are_stream_independent() {
        // Trial t's curve must not depend on how many trials run before it.
        let data = tiny_dataset(4, 3, 13);
        let mut opts = ProtocolOptions::new(DescriptorChoice::Skl, Protocol::SingleShot, 3, 41);
        let three = run_protocol(&data, &opts).unwrap();
        opts.trials = 1;
        let one = run_protocol(&data, &opts).unwrap();
        assert_eq!(three.per_trial[0].accuracies, one.per_trial[0].accuracies);
    }
}
