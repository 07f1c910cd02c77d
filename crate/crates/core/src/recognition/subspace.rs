//! PCA and ridge-regularized LDA, composed into the matching subspace.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

use super::LabeledFeatureSet;

/// Relative eigenvalue cutoff for the retained PCA rank.
const PCA_RANK_TOL: f64 = 1e-10;
/// LDA ridge scale on trace(S_w)/p.
const LDA_RIDGE_REL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    /// d x p, orthonormal columns, descending variance.
    pub basis: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
}

/// Principal directions of the training set: top `p = min(p_max, rank)`
/// eigenvectors of the sample covariance, descending.
pub fn pca_fit(train: &LabeledFeatureSet, p_max: usize) -> Result<PcaModel> {
    let n = train.len();
    if n < 2 {
        return Err(Error::InsufficientPoints { need: 2, got: n });
    }
    if p_max == 0 {
        return Err(Error::InvalidParam("p_max must be >= 1".into()));
    }
    let d = train.dim();
    let mut mean = DVector::zeros(d);
    for f in &train.features {
        mean += f;
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(d, d);
    for f in &train.features {
        let c = f - &mean;
        cov.ger(1.0, &c, &c, 1.0);
    }
    cov /= (n - 1) as f64;
    let (vals, vecs) = linalg::sym_eigen_dyn_desc(&cov);
    if vals[0] <= 1e-18 {
        return Err(Error::ZeroVariance);
    }
    let rank = vals.iter().filter(|&&v| v > vals[0] * PCA_RANK_TOL).count();
    let p = rank.min(p_max);
    let mut basis = vecs.columns(0, p).into_owned();
    linalg::fix_column_signs(&mut basis);
    Ok(PcaModel {
        mean,
        basis,
        eigenvalues: vals.rows(0, p).into_owned(),
    })
}

#[derive(Debug, Clone)]
pub struct LdaModel {
    /// p x q discriminant directions, q = min(c - 1, p).
    pub basis: DMatrix<f64>,
    /// Classes that contributed a single sample (no within-class scatter).
    pub singleton_classes: usize,
}

/// Fisher discriminant directions from the generalized eigenproblem
/// `S_b w = lambda (S_w + delta I) w`, ridge `delta = 1e-6 trace(S_w)/p`.
/// Single-sample classes still shape `S_b` but add nothing to `S_w`.
pub fn lda_fit(train: &LabeledFeatureSet) -> Result<LdaModel> {
    let n = train.len();
    if n == 0 {
        return Err(Error::InsufficientPoints { need: 2, got: 0 });
    }
    let p = train.dim();
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in train.labels.iter().enumerate() {
        by_class.entry(l.as_str()).or_default().push(i);
    }
    let c = by_class.len();
    if c < 2 {
        return Err(Error::TooFewClasses { need: 2, got: c });
    }

    let mut global_mean = DVector::zeros(p);
    for f in &train.features {
        global_mean += f;
    }
    global_mean /= n as f64;

    let mut s_w = DMatrix::zeros(p, p);
    let mut s_b = DMatrix::zeros(p, p);
    let mut singleton_classes = 0;
    for members in by_class.values() {
        let mut mu = DVector::zeros(p);
        for &i in members {
            mu += &train.features[i];
        }
        mu /= members.len() as f64;
        let dm = &mu - &global_mean;
        s_b.ger(members.len() as f64, &dm, &dm, 1.0);
        if members.len() == 1 {
            singleton_classes += 1;
            continue;
        }
        for &i in members {
            let d = &train.features[i] - &mu;
            s_w.ger(1.0, &d, &d, 1.0);
        }
    }

    let mut ridge = LDA_RIDGE_REL * s_w.trace() / p as f64;
    if !(ridge > 0.0) {
        // No within-class scatter at all; a tiny ridge keyed to S_b keeps the
        // pencil definite and the solution becomes the top S_b directions.
        ridge = 1e-12 * (s_b.trace() / p as f64).max(1.0);
    }
    let b2 = &s_w + DMatrix::identity(p, p) * ridge;
    let (_, vecs) = linalg::gen_eig_sym_dyn(&s_b, &b2)?;
    let q = (c - 1).min(p);
    let mut basis = vecs.columns(0, q).into_owned();
    linalg::fix_column_signs(&mut basis);
    Ok(LdaModel {
        basis,
        singleton_classes,
    })
}

/// PCA followed by LDA, with the composed projection cached.
#[derive(Debug, Clone)]
pub struct SubspaceModel {
    pub mean: DVector<f64>,
    pub pca_basis: DMatrix<f64>,
    pub lda_basis: DMatrix<f64>,
    /// d x q composition `pca_basis * lda_basis`.
    pub projection: DMatrix<f64>,
    pub singleton_classes: usize,
}

impl SubspaceModel {
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        self.projection.transpose() * (x - &self.mean)
    }

    pub fn output_dim(&self) -> usize {
        self.projection.ncols()
    }
}

pub fn fit_subspace(train: &LabeledFeatureSet, p_max: usize) -> Result<SubspaceModel> {
    let pca = pca_fit(train, p_max)?;
    let projected: Vec<DVector<f64>> = train
        .features
        .iter()
        .map(|f| pca.basis.transpose() * (f - &pca.mean))
        .collect();
    let reduced = LabeledFeatureSet::new(projected, train.labels.clone(), train.role)?;
    let lda = lda_fit(&reduced)?;
    let projection = &pca.basis * &lda.basis;
    Ok(SubspaceModel {
        mean: pca.mean,
        pca_basis: pca.basis,
        lda_basis: lda.basis,
        projection,
        singleton_classes: lda.singleton_classes,
    })
}
