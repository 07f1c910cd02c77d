//! Small shared linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3, Vector6};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// One standard-normal f64 draw; pins the sample type for inference.
pub(crate) fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Stable descending order for a slice of eigenvalues. Ties keep ascending
/// index order, which makes downstream layouts deterministic.
pub(crate) fn desc_order(vals: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    idx
}

pub(crate) fn symmetrize6(m: &Matrix6<f64>) -> Matrix6<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn symmetrize_dyn(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn all_finite6(m: &Matrix6<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Eigendecomposition of a symmetric 3x3 matrix, eigenvalues descending.
pub(crate) fn sym_eigen3_desc(m: &Matrix3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let se = nalgebra::SymmetricEigen::new(*m);
    let order = desc_order(se.eigenvalues.as_slice());
    let mut vals = Vector3::zeros();
    let mut vecs = Matrix3::zeros();
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = se.eigenvalues[src];
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Eigendecomposition of a symmetric 6x6 matrix, eigenvalues descending.
pub(crate) fn sym_eigen6_desc(m: &Matrix6<f64>) -> (Vector6<f64>, Matrix6<f64>) {
    let se = nalgebra::SymmetricEigen::new(*m);
    let order = desc_order(se.eigenvalues.as_slice());
    let mut vals = Vector6::zeros();
    let mut vecs = Matrix6::zeros();
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = se.eigenvalues[src];
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Eigendecomposition of a symmetric dynamic matrix, eigenvalues descending.
pub(crate) fn sym_eigen_dyn_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let se = nalgebra::SymmetricEigen::new(m.clone());
    let order = desc_order(se.eigenvalues.as_slice());
    let mut vals = DVector::zeros(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = se.eigenvalues[src];
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Generalized eigenvalues of the symmetric-definite pencil `A z = lambda B z`
/// with `B` SPD, via Cholesky whitening: B = L L^T, M = L^-1 A L^-T.
/// Returns eigenvalues in descending order.
pub(crate) fn gen_eigvals6(a: &Matrix6<f64>, b: &Matrix6<f64>) -> Result<Vector6<f64>> {
    let chol = nalgebra::Cholesky::new(*b).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(a)
        .ok_or(Error::NotPositiveDefinite)?;
    let m = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(Error::NotPositiveDefinite)?;
    let (vals, _) = sym_eigen6_desc(&symmetrize6(&m));
    Ok(vals)
}

/// Solve the symmetric-definite generalized eigenproblem `A x = lambda B x`
/// (`B` SPD) by spectral whitening: with `B = U S U^T`, eigendecompose
/// `S^-1/2 U^T A U S^-1/2` and map eigenvectors back through `U S^-1/2`.
/// Eigenvalues come back descending and the eigenvector matrix X satisfies
/// X^T B X = I. Unlike triangular-solve whitening, the orthonormality error
/// stays near machine precision even when `B` is barely definite.
pub(crate) fn gen_eig_sym_dyn(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (s, u) = sym_eigen_dyn_desc(b);
    if s.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let n = b.nrows();
    // W = U S^-1/2.
    let mut w = u.clone();
    for j in 0..n {
        let inv_sqrt = 1.0 / s[j].sqrt();
        for i in 0..n {
            w[(i, j)] *= inv_sqrt;
        }
    }
    let m = symmetrize_dyn(&(w.transpose() * a * &w));
    let (vals, vecs) = sym_eigen_dyn_desc(&m);
    Ok((vals, w * vecs))
}

/// Error-free transformation: `a + b = s + e` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let a2 = s - b;
    let b2 = s - a2;
    let e = (a - a2) + (b - b2);
    (s, e)
}

/// Error-free product via Dekker splitting: `a * b = p + e` exactly.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    const SPLIT: f64 = 134217729.0; // 2^27 + 1
    let p = a * b;
    let a_hi = {
        let t = SPLIT * a;
        t - (t - a)
    };
    let a_lo = a - a_hi;
    let b_hi = {
        let t = SPLIT * b;
        t - (t - b)
    };
    let b_lo = b - b_hi;
    let e = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo;
    (p, e)
}

/// Compensated accumulator with roughly double-double precision.
#[derive(Default, Clone, Copy)]
pub(crate) struct DdSum {
    hi: f64,
    lo: f64,
}

impl DdSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        self.hi = s;
        self.lo += e;
    }

    #[inline]
    pub fn add_prod(&mut self, a: f64, b: f64) {
        let (p, e) = two_prod(a, b);
        self.add(p);
        self.lo += e;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Max deviation of `X^T M X` from the identity under compensated
/// evaluation.
pub(crate) fn dd_gram_identity_dev(x: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let g = dd_gram(x, m);
    let mut dev: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let want = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g[(i, j)] - want).abs());
        }
    }
    dev
}

/// Full compensated Gram `X^T M X`: Y = M X is held as (hi, lo) pairs so no
/// precision is lost before the final dot products.
pub(crate) fn dd_gram(x: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let cols = x.ncols();
    let mut y_hi = DMatrix::zeros(n, cols);
    let mut y_lo = DMatrix::zeros(n, cols);
    for j in 0..cols {
        for i in 0..n {
            let mut acc = DdSum::default();
            for k in 0..n {
                acc.add_prod(m[(i, k)], x[(k, j)]);
            }
            y_hi[(i, j)] = acc.hi;
            y_lo[(i, j)] = acc.lo;
        }
    }
    let mut g = DMatrix::zeros(cols, cols);
    for i in 0..cols {
        for j in i..cols {
            let mut acc = DdSum::default();
            for k in 0..n {
                acc.add_prod(x[(k, i)], y_hi[(k, j)]);
                acc.lo += x[(k, i)] * y_lo[(k, j)];
            }
            let v = acc.value();
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Flip each column so its largest-magnitude entry is positive. Makes
/// eigenvector output reproducible across runs.
pub(crate) fn fix_column_signs(m: &mut DMatrix<f64>) {
    for j in 0..m.ncols() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for i in 0..m.nrows() {
            let a = m[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if m[(best, j)] < 0.0 {
            for i in 0..m.nrows() {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
}
