//! The 13-element skeleton physique feature and its Euclidean distance.
//!
//! Elements, in order (distances in cm, ratios dimensionless):
//! (a) head height, (b) neck height, (c) neck-left shoulder,
//! (d) neck-right shoulder, (e) torso-right shoulder, (f) right arm length,
//! (g) left arm length, (h) right upper leg, (i) left upper leg,
//! (j) torso length, (k) hip-hip, (l) j/h, (m) j/i.
//!
//! Heights are measured against a floor estimate: the minimum foot height
//! when foot joints are present, otherwise the lowest knee minus the median
//! upper-leg length as a lower-leg allowance.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::SkeletonJoints;

pub const SKELETON_FEATURE_LEN: usize = 13;
const MM_PER_CM: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFeature {
    pub v: [f64; SKELETON_FEATURE_LEN],
}

impl SkeletonFeature {
    pub fn as_slice(&self) -> &[f64] {
        &self.v
    }
}

fn dist(a: Vector3<f64>, b: Vector3<f64>) -> f64 {
    (a - b).norm()
}

/// Floor height estimate in mm.
fn floor_y(joints: &SkeletonJoints) -> f64 {
    match (joints.left_foot, joints.right_foot) {
        (Some(l), Some(r)) => l.y.min(r.y),
        (Some(l), None) => l.y,
        (None, Some(r)) => r.y,
        (None, None) => {
            let left_upper = dist(joints.left_hip, joints.left_knee);
            let right_upper = dist(joints.right_hip, joints.right_knee);
            let allowance = 0.5 * (left_upper + right_upper);
            joints.left_knee.y.min(joints.right_knee.y) - allowance
        }
    }
}

/// Compute the 13-element feature from joint positions (mm in, cm out).
pub fn skeleton_feature(joints: &SkeletonJoints) -> Result<SkeletonFeature> {
    joints.validate()?;
    let right_upper_leg = dist(joints.right_hip, joints.right_knee);
    let left_upper_leg = dist(joints.left_hip, joints.left_knee);
    if right_upper_leg == 0.0 || left_upper_leg == 0.0 {
        return Err(Error::DegenerateSkeleton(
            "zero upper-leg length makes the torso/leg ratios undefined".into(),
        ));
    }
    let floor = floor_y(joints);
    let torso_len = dist(joints.neck, joints.torso);

    let mm = [
        joints.head.y - floor,
        joints.neck.y - floor,
        dist(joints.neck, joints.left_shoulder),
        dist(joints.neck, joints.right_shoulder),
        dist(joints.torso, joints.right_shoulder),
        dist(joints.right_shoulder, joints.right_elbow)
            + dist(joints.right_elbow, joints.right_hand),
        dist(joints.left_shoulder, joints.left_elbow) + dist(joints.left_elbow, joints.left_hand),
        right_upper_leg,
        left_upper_leg,
        torso_len,
        dist(joints.right_hip, joints.left_hip),
    ];
    let mut v = [0.0; SKELETON_FEATURE_LEN];
    for (i, d) in mm.iter().enumerate() {
        v[i] = d / MM_PER_CM;
    }
    v[11] = v[9] / v[7];
    v[12] = v[9] / v[8];
    Ok(SkeletonFeature { v })
}

/// Euclidean distance between two skeleton features.
pub fn skl_distance(a: &SkeletonFeature, b: &SkeletonFeature) -> f64 {
    a.v.iter()
        .zip(&b.v)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
