//! Depth voxel covariance descriptors (DVCov) and the Eigen-depth feature.
//!
//! A body cloud is described by 6x6 covariance matrices of the stacked
//! `[x y z nx ny nz]` point features: one *within-voxel* covariance per cell
//! of an overlapped grid, and one *between-voxel* covariance per 8-adjacent
//! pair of a non-overlapped grid. Because a rigid viewpoint change acts on
//! these matrices as an orthogonal congruence, their eigenvalue spectra are
//! invariant to rotation and location change; the Eigen-depth feature stacks
//! the log-spectra into a plain Euclidean vector.

use nalgebra::{Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::geometry::{self, PointCloud, SkeletonJoints};
use crate::linalg;

pub const DEFAULT_GRID_ROWS: usize = 6;
pub const DEFAULT_GRID_COLS: usize = 2;
pub const DEFAULT_EPS_REL: f64 = 1e-6;
/// Absolute floor for the regularization scale (units of the matrix).
pub const EPS_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovKind {
    Within,
    Between,
}

/// Symmetric 6x6 covariance over `[x y z nx ny nz]` features. Symmetry is
/// enforced at construction; positivity only after [`regularize`].
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix6 {
    kind: CovKind,
    m: Matrix6<f64>,
}

impl CovMatrix6 {
    pub fn new(kind: CovKind, m: Matrix6<f64>) -> Self {
        CovMatrix6 {
            kind,
            m: linalg::symmetrize6(&m),
        }
    }

    pub fn kind(&self) -> CovKind {
        self.kind
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.m
    }
}

/// Per-cell within-voxel covariances (overlapped grid, row-major cell order)
/// plus per-pair between-voxel covariances (non-overlapped grid, lexicographic
/// 8-adjacent pair order). Cells or pairs with too few points carry a
/// regularized zero matrix and an empty flag.
#[derive(Debug, Clone, PartialEq)]
pub struct DVCovDescriptor {
    pub rows: usize,
    pub cols: usize,
    pub within: Vec<CovMatrix6>,
    pub between: Vec<CovMatrix6>,
    pub within_empty: Vec<bool>,
    pub between_empty: Vec<bool>,
}

impl DVCovDescriptor {
    pub fn expected_within(rows: usize, cols: usize) -> usize {
        (2 * rows - 1) * (2 * cols - 1)
    }

    pub fn expected_between(rows: usize, cols: usize) -> usize {
        geometry::king_graph_edges(rows, cols).len()
    }

    pub fn layout_matches(&self, other: &DVCovDescriptor) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.within.len() == other.within.len()
            && self.between.len() == other.between.len()
    }

    /// Feature length of the Eigen-depth vector for this layout.
    pub fn ed_len(&self) -> usize {
        6 * (self.within.len() + self.between.len())
    }
}

/// Concatenated log-eigenvalue blocks, one 6-block per descriptor matrix
/// (within cells first, then between pairs), each block non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDepthFeature {
    pub x: Vec<f64>,
}

impl EigenDepthFeature {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Unbiased sample covariance of the feature vectors inside one voxel.
pub fn within_voxel_covariance(features: &[Vector6<f64>]) -> Result<CovMatrix6> {
    let m = features.len();
    if m < 2 {
        return Err(Error::InsufficientPoints { need: 2, got: m });
    }
    let mut mean = Vector6::zeros();
    for f in features {
        mean += f;
    }
    mean /= m as f64;
    let mut cov = Matrix6::zeros();
    for f in features {
        let d = f - mean;
        cov += d * d.transpose();
    }
    cov /= (m - 1) as f64;
    Ok(CovMatrix6::new(CovKind::Within, cov))
}

/// Between-voxel covariance
/// `(1/mn) sum_i sum_j (f_i - g_j)(f_i - g_j)^T`,
/// computed in the algebraically equivalent O(m+n) form
/// `(1/m) sum f f^T + (1/n) sum g g^T - mu_f mu_g^T - mu_g mu_f^T`.
/// Both sets are shifted by their joint mean first; the result is shift
/// invariant, and centring keeps the outer-product sums well conditioned.
pub fn between_voxel_covariance(
    p_features: &[Vector6<f64>],
    q_features: &[Vector6<f64>],
) -> Result<CovMatrix6> {
    let (m, n) = (p_features.len(), q_features.len());
    if m < 1 || n < 1 {
        return Err(Error::InsufficientPoints {
            need: 1,
            got: m.min(n),
        });
    }
    let mut center = Vector6::zeros();
    for f in p_features.iter().chain(q_features) {
        center += f;
    }
    center /= (m + n) as f64;

    let mut sum_ff = Matrix6::zeros();
    let mut mu_f = Vector6::zeros();
    for f in p_features {
        let f = f - center;
        sum_ff += f * f.transpose();
        mu_f += f;
    }
    let mut sum_gg = Matrix6::zeros();
    let mut mu_g = Vector6::zeros();
    for g in q_features {
        let g = g - center;
        sum_gg += g * g.transpose();
        mu_g += g;
    }
    mu_f /= m as f64;
    mu_g /= n as f64;

    let mut cov = sum_ff / m as f64 + sum_gg / n as f64;
    cov -= mu_f * mu_g.transpose();
    cov -= mu_g * mu_f.transpose();
    Ok(CovMatrix6::new(CovKind::Between, cov))
}

/// Ridge regularization `C + eps I` with
/// `eps = eps_rel * max(trace(C)/6, EPS_FLOOR)`, making the spectrum strictly
/// positive so its logarithm exists.
pub fn regularize(c: &CovMatrix6, eps_rel: f64) -> Result<CovMatrix6> {
    if !(eps_rel > 0.0) {
        return Err(Error::InvalidParam(format!(
            "eps_rel must be positive, got {eps_rel}"
        )));
    }
    if !linalg::all_finite6(c.matrix()) {
        return Err(Error::InvalidMatrix("non-finite entries".into()));
    }
    let eps = eps_rel * (c.matrix().trace() / 6.0).max(EPS_FLOOR);
    Ok(CovMatrix6::new(
        c.kind(),
        c.matrix() + Matrix6::identity() * eps,
    ))
}

/// Descending log-spectrum `[ln l1 ... ln l6]` of an SPD matrix.
pub fn eigen_depth(c: &CovMatrix6) -> Result<Vector6<f64>> {
    let (vals, _) = linalg::sym_eigen6_desc(c.matrix());
    if vals.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(vals.map(f64::ln))
}

#[derive(Debug, Clone, Copy)]
pub struct ExtractConfig {
    pub rows: usize,
    pub cols: usize,
    pub eps_rel: f64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            rows: DEFAULT_GRID_ROWS,
            cols: DEFAULT_GRID_COLS,
            eps_rel: DEFAULT_EPS_REL,
        }
    }
}

/// Full descriptor pipeline for one frame: segment torso+head, grid the
/// segment (overlapped for within, plain for between), compute and
/// regularize every covariance. Cells with fewer than 2 points and pairs
/// with an empty side get `regularize(0)` and an empty flag.
pub fn extract_dvcov(
    cloud: &PointCloud,
    joints: &SkeletonJoints,
    cfg: &ExtractConfig,
) -> Result<DVCovDescriptor> {
    if cloud.normals().is_none() {
        return Err(Error::MissingNormals);
    }
    let segment = geometry::segment_torso_head(cloud, joints)?;
    let features = segment.feature_vectors()?;

    let zero = |kind: CovKind| CovMatrix6::new(kind, Matrix6::zeros());

    let within_grid = geometry::build_voxel_grid(&segment, cfg.rows, cfg.cols, true)?;
    let mut within = Vec::with_capacity(within_grid.cell_count());
    let mut within_empty = Vec::with_capacity(within_grid.cell_count());
    for cell in within_grid.cells() {
        if cell.len() < 2 {
            within.push(regularize(&zero(CovKind::Within), cfg.eps_rel)?);
            within_empty.push(true);
        } else {
            let feats: Vec<Vector6<f64>> = cell.iter().map(|&i| features[i]).collect();
            within.push(regularize(&within_voxel_covariance(&feats)?, cfg.eps_rel)?);
            within_empty.push(false);
        }
    }

    let between_grid = geometry::build_voxel_grid(&segment, cfg.rows, cfg.cols, false)?;
    let pairs = geometry::adjacent_voxel_pairs(&between_grid)?;
    let mut between = Vec::with_capacity(pairs.len());
    let mut between_empty = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        let (ca, cb) = (between_grid.cell(a), between_grid.cell(b));
        if ca.is_empty() || cb.is_empty() {
            between.push(regularize(&zero(CovKind::Between), cfg.eps_rel)?);
            between_empty.push(true);
        } else {
            let fa: Vec<Vector6<f64>> = ca.iter().map(|&i| features[i]).collect();
            let fb: Vec<Vector6<f64>> = cb.iter().map(|&i| features[i]).collect();
            between.push(regularize(
                &between_voxel_covariance(&fa, &fb)?,
                cfg.eps_rel,
            )?);
            between_empty.push(false);
        }
    }

    Ok(DVCovDescriptor {
        rows: cfg.rows,
        cols: cfg.cols,
        within,
        between,
        within_empty,
        between_empty,
    })
}

/// Stack the log-spectrum of every descriptor matrix: within cells in cell
/// order, then between pairs in pair order.
pub fn extract_ed(d: &DVCovDescriptor) -> Result<EigenDepthFeature> {
    let mut x = Vec::with_capacity(d.ed_len());
    for c in d.within.iter().chain(&d.between) {
        x.extend_from_slice(eigen_depth(c)?.as_slice());
    }
    Ok(EigenDepthFeature { x })
}
