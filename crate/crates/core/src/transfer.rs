//! Kernelized implicit feature transfer: learn a discriminative common
//! latent subspace linking RGB visual features and depth features on an
//! auxiliary RGB-D set, then estimate depth features for RGB-only samples.
//!
//! Fitting maximizes between-class scatter of both modalities against a
//! denominator combining their within-class scatters and the per-class
//! visual/depth mean discrepancy. With Gaussian-kernelized features and the
//! representer theorem, everything reduces to the generalized eigenproblem
//! `B1 A = lambda B2 A` over stacked kernel coefficients of size `2 N_s`:
//!
//! * `B1   = gamma0 B_bv + gamma1 B_bd` (zero-padded between-class scatters)
//! * `B2   = beta' B_vd + gamma0' B_wv + gamma1' B_wd`
//! * `B_vd = (1/C) sum_c U_c U_c^T`, the class-mean discrepancy term.
//!
//! The visual half of the top-m eigenvectors projects kernelized visual
//! features into the latent subspace, which is where estimated depth
//! features live.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Ridge scale applied to `trace(B2) / (2 N_s)`.
const B2_RIDGE_REL: f64 = 1e-8;

/// Paired visual/depth features with identity labels.
#[derive(Debug, Clone)]
pub struct AuxiliaryDataset {
    pub visual: Vec<DVector<f64>>,
    pub depth: Vec<DVector<f64>>,
    pub labels: Vec<String>,
}

impl AuxiliaryDataset {
    pub fn new(
        visual: Vec<DVector<f64>>,
        depth: Vec<DVector<f64>>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if visual.len() != depth.len() || visual.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} visual vs {} depth vs {} labels",
                visual.len(),
                depth.len(),
                labels.len()
            )));
        }
        for set in [&visual, &depth] {
            if let Some(first) = set.first() {
                if set.iter().any(|f| f.len() != first.len()) {
                    return Err(Error::ShapeMismatch(
                        "feature vectors have mixed dimensions".into(),
                    ));
                }
            }
        }
        Ok(AuxiliaryDataset {
            visual,
            depth,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.visual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visual.is_empty()
    }

    pub fn class_count(&self) -> usize {
        let mut seen: Vec<&str> = Vec::new();
        for l in &self.labels {
            if !seen.contains(&l.as_str()) {
                seen.push(l);
            }
        }
        seen.len()
    }
}

/// Gaussian kernel bandwidths for the two modalities.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelConfig {
    pub gamma_v: f64,
    pub gamma_d: f64,
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_v > 0.0 && self.gamma_d > 0.0) {
            return Err(Error::InvalidParam(format!(
                "kernel bandwidths must be positive (gamma_v={}, gamma_d={})",
                self.gamma_v, self.gamma_d
            )));
        }
        Ok(())
    }

    /// Bandwidths `1 / dist_m^2` from the mean pairwise distance of each
    /// modality over the auxiliary set.
    pub fn from_mean_distances(aux: &AuxiliaryDataset) -> Result<KernelConfig> {
        let gamma = |set: &[DVector<f64>]| -> Result<f64> {
            let mean = mean_pairwise_distance(set);
            if !(mean > 0.0) {
                return Err(Error::ZeroMean);
            }
            Ok(1.0 / (mean * mean))
        };
        Ok(KernelConfig {
            gamma_v: gamma(&aux.visual)?,
            gamma_d: gamma(&aux.depth)?,
        })
    }
}

/// Mean Euclidean distance over unordered distinct pairs.
pub fn mean_pairwise_distance(set: &[DVector<f64>]) -> f64 {
    let n = set.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += (&set[i] - &set[j]).norm();
        }
    }
    sum / (n * (n - 1) / 2) as f64
}

/// Trade-off weights; each is divided by the trace of its matrix at fit time.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TransferHyperParams {
    /// Weight multiplier for the visual/depth mean-discrepancy term.
    pub beta: f64,
    /// Depth between-class scatter weight.
    pub gamma1: f64,
    /// Depth within-class scatter weight.
    pub gamma1p: f64,
    /// Visual between-class scatter weight.
    pub gamma0: f64,
    /// Visual within-class scatter weight.
    pub gamma0p: f64,
    /// Latent subspace dimension (clamped to 2 N_s).
    pub m: usize,
}

impl Default for TransferHyperParams {
    fn default() -> Self {
        TransferHyperParams {
            beta: 10.0,
            gamma1: 10.0,
            gamma1p: 10.0,
            gamma0: 1.0,
            gamma0p: 1.0,
            m: 700,
        }
    }
}

impl TransferHyperParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("beta", self.beta),
            ("gamma1", self.gamma1),
            ("gamma1p", self.gamma1p),
            ("gamma0", self.gamma0),
            ("gamma0p", self.gamma0p),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if self.m == 0 {
            return Err(Error::InvalidParam("m must be >= 1".into()));
        }
        Ok(())
    }
}

/// Solver health data kept alongside the fitted model.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FitDiagnostics {
    /// Eigenvalues of the kept columns, descending.
    pub eigenvalues: Vec<f64>,
    /// Per-column residual norms `||B1 a - lambda B2 a||`.
    pub residual_norms: Vec<f64>,
    /// Per-column `||B1 a||`, the residual's natural scale.
    pub b1a_norms: Vec<f64>,
    /// Backward-error residuals
    /// `||B1 a - lambda B2 a|| / ((||B1||_F + |lambda| ||B2||_F) ||a||)`.
    pub backward_errors: Vec<f64>,
    /// Max deviation of `A^T B2 A` from the identity over kept columns.
    pub b2_orthonormality_dev: f64,
    /// Mean-discrepancy objective `tr(A^T B_vd A)` at the kept columns.
    pub omega_vd: f64,
    /// Numerator objective `tr(A^T B1 A)` at the kept columns.
    pub objective: f64,
    /// Ridge added to B2.
    pub ridge: f64,
}

/// Fitted transfer model: the training visual features act as kernel
/// anchors, and `projection` maps kernelized visual features into the
/// m-dimensional latent subspace.
#[derive(Debug, Clone)]
pub struct TransferModel {
    pub anchors: Vec<DVector<f64>>,
    /// N_s x m visual coefficient block of the eigenvector matrix.
    pub projection: DMatrix<f64>,
    pub kernel: KernelConfig,
    pub hyper: TransferHyperParams,
    pub diagnostics: FitDiagnostics,
}

impl TransferModel {
    pub fn latent_dim(&self) -> usize {
        self.projection.ncols()
    }

    pub fn anchor_dim(&self) -> usize {
        self.anchors.first().map_or(0, |a| a.len())
    }
}

/// Gaussian kernel responses of `f` against every anchor:
/// `[exp(-gamma ||a_1 - f||^2), ..., exp(-gamma ||a_n - f||^2)]`.
pub fn kernel_vector(
    anchors: &[DVector<f64>],
    f: &DVector<f64>,
    gamma: f64,
) -> Result<DVector<f64>> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParam(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if let Some(first) = anchors.first() {
        if first.len() != f.len() {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                got: f.len(),
            });
        }
    }
    Ok(DVector::from_iterator(
        anchors.len(),
        anchors
            .iter()
            .map(|a| (-gamma * (a - f).norm_squared()).exp()),
    ))
}

/// Between/within-class weight matrices:
/// `A^b_ij = 1/N_s - 1/N_c` for same-class pairs and `1/N_s` otherwise;
/// `A^w_ij = 1/N_c` for same-class pairs and `0` otherwise.
pub fn scatter_weights(labels: &[String]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = labels.len();
    let mut class_size = vec![0usize; n];
    for i in 0..n {
        class_size[i] = labels.iter().filter(|l| **l == labels[i]).count();
    }
    let inv_ns = 1.0 / n as f64;
    let mut a_b = DMatrix::zeros(n, n);
    let mut a_w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                let inv_nc = 1.0 / class_size[i] as f64;
                a_b[(i, j)] = inv_ns - inv_nc;
                a_w[(i, j)] = inv_nc;
            } else {
                a_b[(i, j)] = inv_ns;
            }
        }
    }
    (a_b, a_w)
}

/// `sum_ij W_ij (f_i - f_j)(f_i - f_j)^T` over the columns of `f`, through
/// the Laplacian identity `2 F (D - W) F^T` for symmetric `W`.
fn weighted_pair_scatter(f: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let mut lap = -w.clone();
    for i in 0..n {
        let row_sum: f64 = w.row(i).iter().sum();
        lap[(i, i)] += row_sum;
    }
    let s = f * lap * f.transpose() * 2.0;
    linalg::symmetrize_dyn(&s)
}

fn pad_block(s: &DMatrix<f64>, n: usize, offset: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((offset, offset), (n, n)).copy_from(s);
    out
}

/// A fitted model along with the solver-side matrices, for verification.
#[derive(Debug, Clone)]
pub struct TransferFitDetail {
    pub model: TransferModel,
    /// Full 2 N_s x m coefficient matrix (visual rows, then depth rows).
    pub coefficients: DMatrix<f64>,
    /// Numerator of the solved pencil.
    pub b1: DMatrix<f64>,
    /// Denominator of the solved pencil, ridge included.
    pub b2: DMatrix<f64>,
}

/// Fit the transfer model on an auxiliary set. See the module docs for the
/// matrix assembly; eigenvectors are scaled so `A^T B2 A = I` and signed so
/// each column's largest entry is positive.
pub fn fit_transfer(
    aux: &AuxiliaryDataset,
    hp: &TransferHyperParams,
    kc: &KernelConfig,
) -> Result<TransferModel> {
    Ok(fit_transfer_detailed(aux, hp, kc)?.model)
}

/// [`fit_transfer`], additionally exposing the full coefficient matrix and
/// the assembled pencil for residual and orthonormality verification.
pub fn fit_transfer_detailed(
    aux: &AuxiliaryDataset,
    hp: &TransferHyperParams,
    kc: &KernelConfig,
) -> Result<TransferFitDetail> {
    hp.validate()?;
    kc.validate()?;
    let n_s = aux.len();
    let c = aux.class_count();
    if c < 2 {
        return Err(Error::TooFewClasses { need: 2, got: c });
    }
    if n_s < c {
        return Err(Error::ShapeMismatch(format!(
            "N_s = {n_s} < C = {c} classes"
        )));
    }
    let m = hp.m.min(2 * n_s);

    // Kernelized feature matrices, one column per sample.
    let mut f_v = DMatrix::zeros(n_s, n_s);
    let mut f_d = DMatrix::zeros(n_s, n_s);
    for i in 0..n_s {
        f_v.set_column(i, &kernel_vector(&aux.visual, &aux.visual[i], kc.gamma_v)?);
        f_d.set_column(i, &kernel_vector(&aux.depth, &aux.depth[i], kc.gamma_d)?);
    }

    let (a_b, a_w) = scatter_weights(&aux.labels);
    let s_bv = weighted_pair_scatter(&f_v, &a_b);
    let s_wv = weighted_pair_scatter(&f_v, &a_w);
    let s_bd = weighted_pair_scatter(&f_d, &a_b);
    let s_wd = weighted_pair_scatter(&f_d, &a_w);

    let b_bv = pad_block(&s_bv, n_s, 0);
    let b_wv = pad_block(&s_wv, n_s, 0);
    let b_bd = pad_block(&s_bd, n_s, n_s);
    let b_wd = pad_block(&s_wd, n_s, n_s);

    // Class-mean discrepancy term B_vd = (1/C) sum_c U_c U_c^T with
    // U_c = mean_c [f~_v; -f~_d].
    let mut classes: Vec<&str> = Vec::new();
    for l in &aux.labels {
        if !classes.iter().any(|x| x == l) {
            classes.push(l);
        }
    }
    let mut b_vd = DMatrix::zeros(2 * n_s, 2 * n_s);
    for class in &classes {
        let members: Vec<usize> = aux
            .labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l == class)
            .map(|(i, _)| i)
            .collect();
        let inv = 1.0 / members.len() as f64;
        let mut u = DVector::zeros(2 * n_s);
        for &i in &members {
            for r in 0..n_s {
                u[r] += inv * f_v[(r, i)];
                u[n_s + r] -= inv * f_d[(r, i)];
            }
        }
        b_vd.ger(1.0 / c as f64, &u, &u, 1.0);
    }
    let b_vd = linalg::symmetrize_dyn(&b_vd);

    // Trace-normalized weights.
    let weight = |raw: f64, trace: f64, name: &str| -> Result<f64> {
        if raw == 0.0 {
            return Ok(0.0);
        }
        if !(trace > 0.0) {
            return Err(Error::Conditioning(format!(
                "trace of {name} is {trace}; cannot normalize its weight"
            )));
        }
        Ok(raw / trace)
    };
    let beta_p = weight(hp.beta, b_vd.trace(), "B_vd")?;
    let gamma1 = weight(hp.gamma1, b_bd.trace(), "B_bd")?;
    let gamma1p = weight(hp.gamma1p, b_wd.trace(), "B_wd")?;
    let gamma0 = weight(hp.gamma0, b_bv.trace(), "B_bv")?;
    let gamma0p = weight(hp.gamma0p, b_wv.trace(), "B_wv")?;

    let b1 = &b_bv * gamma0 + &b_bd * gamma1;
    let mut b2 = &b_vd * beta_p + &b_wv * gamma0p + &b_wd * gamma1p;
    let b2_trace = b2.trace();
    if !(b2_trace > 0.0) {
        return Err(Error::Conditioning(format!(
            "B2 has non-positive trace {b2_trace}; increase the scatter weights"
        )));
    }
    let ridge = B2_RIDGE_REL * b2_trace / (2 * n_s) as f64;
    for i in 0..2 * n_s {
        b2[(i, i)] += ridge;
    }

    let (_rough_vals, vecs) = linalg::gen_eig_sym_dyn(&b1, &b2).map_err(|e| {
        Error::Conditioning(format!(
            "B2 ({}x{}, trace {:.3e}, ridge {:.3e}) is numerically indefinite: {e}",
            2 * n_s,
            2 * n_s,
            b2_trace,
            ridge
        ))
    })?;

    let mut kept = vecs.columns(0, m).into_owned();

    // One orthonormalization refinement. The whitened solve cannot resolve
    // B2's near-null cluster below eps * ||B2||, which leaves the raw Gram a
    // couple of decades above machine precision; re-centring against the
    // compensated Gram restores A^T B2 A = I to working accuracy.
    let gram = linalg::dd_gram(&kept, &b2);
    let chol = nalgebra::Cholesky::new(gram)
        .ok_or_else(|| Error::Conditioning("refinement Gram lost positive definiteness".into()))?;
    let solved = chol
        .l()
        .solve_lower_triangular(&kept.transpose())
        .ok_or_else(|| Error::Conditioning("singular refinement factor".into()))?;
    kept = solved.transpose();

    // Rayleigh-Ritz re-extraction in the kept subspace. Right-multiplications
    // never change the span, so diagonalizing the projected numerator against
    // the now-orthonormal basis restores per-column eigenvector quality that
    // the refinement's triangular mixing disturbed.
    let projected = linalg::symmetrize_dyn(&(kept.transpose() * &b1 * &kept));
    let (ritz_vals, ritz_vecs) = linalg::sym_eigen_dyn_desc(&projected);
    kept *= &ritz_vecs;
    let eigenvalues: Vec<f64> = ritz_vals.iter().copied().collect();
    linalg::fix_column_signs(&mut kept);

    // Residual diagnostics on the solved (ridged) pencil.
    let b1_norm = b1.norm();
    let b2_norm = b2.norm();
    let mut residual_norms = Vec::with_capacity(m);
    let mut b1a_norms = Vec::with_capacity(m);
    let mut backward_errors = Vec::with_capacity(m);
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        let a = kept.column(j).into_owned();
        let b1a = &b1 * &a;
        let res = (&b1a - &b2 * &a * lambda).norm();
        residual_norms.push(res);
        b1a_norms.push(b1a.norm());
        backward_errors.push(res / ((b1_norm + lambda.abs() * b2_norm) * a.norm()).max(1e-300));
    }
    let orth_dev = linalg::dd_gram_identity_dev(&kept, &b2);
    let omega_vd = (kept.transpose() * &b_vd * &kept).trace();
    let objective = (kept.transpose() * &b1 * &kept).trace();

    let projection = kept.rows(0, n_s).into_owned();
    if projection.iter().any(|v| !v.is_finite()) {
        return Err(Error::Conditioning(
            "projection contains non-finite entries".into(),
        ));
    }
    let model = TransferModel {
        anchors: aux.visual.clone(),
        projection,
        kernel: *kc,
        hyper: TransferHyperParams { m, ..*hp },
        diagnostics: FitDiagnostics {
            eigenvalues,
            residual_norms,
            b1a_norms,
            backward_errors,
            b2_orthonormality_dev: orth_dev,
            omega_vd,
            objective,
            ridge,
        },
    };
    Ok(TransferFitDetail {
        model,
        coefficients: kept,
        b1,
        b2,
    })
}

/// Estimated depth feature of a visual feature: kernelize against the
/// anchors, then project into the latent subspace.
pub fn estimate_depth_feature(model: &TransferModel, f_v: &DVector<f64>) -> Result<DVector<f64>> {
    let k = kernel_vector(&model.anchors, f_v, model.kernel.gamma_v)?;
    Ok(model.projection.transpose() * k)
}

/// Euclidean distance between the estimated depth features of two visual
/// samples.
pub fn transfer_distance(
    model: &TransferModel,
    f_v1: &DVector<f64>,
    f_v2: &DVector<f64>,
) -> Result<f64> {
    let a = estimate_depth_feature(model, f_v1)?;
    let b = estimate_depth_feature(model, f_v2)?;
    Ok((a - b).norm())
}

/// Score-level fusion of mean-normalized distances:
/// `(1 - eta) d_rgb / rgb_mean + eta d_depth / depth_mean`.
pub fn fuse_scores(
    dist_rgb: f64,
    dist_d: f64,
    eta: f64,
    norm_rgb_mean: f64,
    norm_d_mean: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParam(format!(
            "eta must lie in [0, 1], got {eta}"
        )));
    }
    if !(norm_rgb_mean > 0.0) || !(norm_d_mean > 0.0) {
        return Err(Error::ZeroMean);
    }
    Ok((1.0 - eta) * dist_rgb / norm_rgb_mean + eta * dist_d / norm_d_mean)
}
