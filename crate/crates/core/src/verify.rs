//! Randomized property suites behind the `verify` command: the log-spectrum
//! equivalence and the eigenvalue rotation invariance, each reporting its
//! worst observed deviation.

use std::time::{Duration, Instant};

use nalgebra::{Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::covdesc::{between_voxel_covariance, within_voxel_covariance, CovKind, CovMatrix6};
use crate::error::Result;
use crate::geometry::RigidMotion;
use crate::linalg;
use crate::spdmanifold::{log_spectrum_equivalence, random_spd6};

#[derive(Debug, Clone, Copy)]
pub struct SuiteReport {
    pub cases: usize,
    pub max_deviation: f64,
    pub elapsed: Duration,
}

/// Over `pairs` random SPD(6) pairs, the gap between the Euclidean
/// log-spectrum distance and the geodesic distance to the
/// rotation-normalized matrix, as `|lhs - rhs| / max(1, rhs)`.
pub fn log_spectrum_equivalence_suite(pairs: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev: f64 = 0.0;
    for _ in 0..pairs {
        let c1 = CovMatrix6::new(CovKind::Within, random_spd6(&mut rng));
        let c2 = CovMatrix6::new(CovKind::Within, random_spd6(&mut rng));
        let (lhs, rhs) = log_spectrum_equivalence(&c1, &c2)?;
        max_dev = max_dev.max((lhs - rhs).abs() / rhs.max(1.0));
    }
    Ok(SuiteReport {
        cases: pairs,
        max_deviation: max_dev,
        elapsed: start.elapsed(),
    })
}

fn random_feature_set(rng: &mut ChaCha8Rng, len: usize) -> Vec<Vector6<f64>> {
    (0..len)
        .map(|_| {
            let mut n = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0f64),
            );
            if n.norm() < 1e-6 {
                n = Vector3::z();
            }
            n.normalize_mut();
            Vector6::new(
                rng.random_range(-300.0..300.0),
                rng.random_range(-300.0..300.0),
                rng.random_range(2000.0..3000.0),
                n.x,
                n.y,
                n.z,
            )
        })
        .collect()
}

/// Over `sets` random voxel feature sets moved by random rigid motions, the
/// worst relative disagreement of the sorted within- and between-voxel
/// covariance spectra before versus after the motion.
pub fn rotation_invariance_suite(sets: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev: f64 = 0.0;
    for _ in 0..sets {
        let m = rng.random_range(4..48);
        let n = rng.random_range(4..48);
        let p = random_feature_set(&mut rng, m);
        let q = random_feature_set(&mut rng, n);
        let motion = RigidMotion::random(&mut rng, 1000.0);
        let p2: Vec<Vector6<f64>> = p.iter().map(|f| motion.apply_feature(f)).collect();
        let q2: Vec<Vector6<f64>> = q.iter().map(|f| motion.apply_feature(f)).collect();

        let spectra = |c: &CovMatrix6| {
            let (vals, _) = linalg::sym_eigen6_desc(c.matrix());
            vals
        };
        let pairs = [
            (
                spectra(&within_voxel_covariance(&p)?),
                spectra(&within_voxel_covariance(&p2)?),
            ),
            (
                spectra(&between_voxel_covariance(&p, &q)?),
                spectra(&between_voxel_covariance(&p2, &q2)?),
            ),
        ];
        for (before, after) in pairs {
            for i in 0..6 {
                let dev = (before[i] - after[i]).abs() / before[i].abs().max(1.0);
                max_dev = max_dev.max(dev);
            }
        }
    }
    Ok(SuiteReport {
        cases: sets,
        max_deviation: max_dev,
        elapsed: start.elapsed(),
    })
}
