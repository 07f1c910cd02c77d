//! Cumulative Matching Characteristic evaluation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Cumulative recognition rates indexed by rank k = 1..K.
#[derive(Debug, Clone, PartialEq)]
pub struct CmcCurve {
    pub accuracies: Vec<f64>,
}

impl CmcCurve {
    /// Accuracy at 1-based rank `k` (saturates past the end).
    pub fn rank(&self, k: usize) -> f64 {
        if self.accuracies.is_empty() || k == 0 {
            return 0.0;
        }
        self.accuracies[(k - 1).min(self.accuracies.len() - 1)]
    }

    pub fn rank1(&self) -> f64 {
        self.rank(1)
    }

    pub fn is_monotone(&self) -> bool {
        self.accuracies.windows(2).all(|w| w[1] >= w[0] - 1e-12)
            && self.accuracies.last().is_none_or(|&a| a <= 1.0 + 1e-12)
    }

    /// Pointwise mean of several curves of equal length.
    pub fn mean(curves: &[CmcCurve]) -> Result<CmcCurve> {
        let first = curves
            .first()
            .ok_or_else(|| Error::ShapeMismatch("no curves to average".into()))?;
        let k = first.accuracies.len();
        if curves.iter().any(|c| c.accuracies.len() != k) {
            return Err(Error::ShapeMismatch("curves have different lengths".into()));
        }
        let mut acc = vec![0.0; k];
        for c in curves {
            for (a, v) in acc.iter_mut().zip(&c.accuracies) {
                *a += v;
            }
        }
        let n = curves.len() as f64;
        Ok(CmcCurve {
            accuracies: acc.into_iter().map(|a| a / n).collect(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CmcOutcome {
    pub curve: CmcCurve,
    /// Probes whose identity never appears in the gallery (permanent misses).
    pub unmatched_probes: usize,
}

/// Rank gallery *classes* per probe by their minimum distance over that
/// class's gallery entries (the multi-shot rule; single-shot is the one-entry
/// special case). Ties break by stable first-occurrence gallery order. A
/// probe whose class is absent from the gallery counts as a permanent miss.
pub fn cmc_evaluate(
    dist: &DMatrix<f64>,
    gallery_labels: &[String],
    probe_labels: &[String],
    k_max: usize,
) -> Result<CmcOutcome> {
    if dist.nrows() != probe_labels.len() || dist.ncols() != gallery_labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "distance matrix is {}x{}, labels are {} probes x {} gallery",
            dist.nrows(),
            dist.ncols(),
            probe_labels.len(),
            gallery_labels.len()
        )));
    }
    if k_max == 0 {
        return Err(Error::InvalidParam("k_max must be >= 1".into()));
    }
    // Classes in first-occurrence gallery order.
    let mut classes: Vec<&str> = Vec::new();
    let mut class_of_gallery = Vec::with_capacity(gallery_labels.len());
    for l in gallery_labels {
        let idx = match classes.iter().position(|c| c == l) {
            Some(i) => i,
            None => {
                classes.push(l);
                classes.len() - 1
            }
        };
        class_of_gallery.push(idx);
    }

    let mut hits = vec![0usize; classes.len()];
    let mut unmatched = 0usize;
    let mut class_dist = vec![f64::INFINITY; classes.len()];
    for (pi, pl) in probe_labels.iter().enumerate() {
        let Some(true_class) = classes.iter().position(|c| c == pl) else {
            unmatched += 1;
            continue;
        };
        class_dist.fill(f64::INFINITY);
        for (gj, &c) in class_of_gallery.iter().enumerate() {
            let d = dist[(pi, gj)];
            if d < class_dist[c] {
                class_dist[c] = d;
            }
        }
        let dt = class_dist[true_class];
        let mut rank = 1usize;
        for (c, &d) in class_dist.iter().enumerate() {
            if c == true_class {
                continue;
            }
            if d < dt || (d == dt && c < true_class) {
                rank += 1;
            }
        }
        hits[rank - 1] += 1;
    }

    let n = probe_labels.len().max(1) as f64;
    let mut accuracies = Vec::with_capacity(k_max);
    let mut cum = 0usize;
    for k in 0..k_max {
        if k < hits.len() {
            cum += hits[k];
        }
        accuracies.push(cum as f64 / n);
    }
    Ok(CmcOutcome {
        curve: CmcCurve { accuracies },
        unmatched_probes: unmatched,
    })
}
