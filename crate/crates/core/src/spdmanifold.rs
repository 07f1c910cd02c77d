//! Affine-invariant geometry on SPD(6): geodesic distance, rotation
//! normalization and the equivalence between log-spectrum Euclidean distance
//! and the geodesic distance to the rotation-normalized matrix.

use nalgebra::{Matrix6, Vector6};
use rand::Rng;

use crate::covdesc::{eigen_depth, CovMatrix6, DVCovDescriptor};
use crate::error::{Error, Result};
use crate::linalg;

/// Generalized eigenvalues of an SPD pencil, descending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedSpectrum {
    pub lambdas: [f64; 6],
}

/// Generalized eigenvalues of `(C1, C2)`, i.e. the spectrum of `C1^-1 C2`,
/// computed through the Cholesky-whitened symmetric form `L^-1 C2 L^-T`
/// with `C1 = L L^T`. Descending order.
pub fn generalized_spectrum(c1: &Matrix6<f64>, c2: &Matrix6<f64>) -> Result<GeneralizedSpectrum> {
    let vals = linalg::gen_eigvals6(c2, c1)?;
    if vals.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    let mut lambdas = [0.0; 6];
    lambdas.copy_from_slice(vals.as_slice());
    Ok(GeneralizedSpectrum { lambdas })
}

/// Affine-invariant geodesic distance
/// `sqrt(sum_k ln^2 lambda_k(C1, C2))` between two SPD matrices.
pub fn geodesic_distance(c1: &CovMatrix6, c2: &CovMatrix6) -> Result<f64> {
    let spec = generalized_spectrum(c1.matrix(), c2.matrix())?;
    Ok(spec
        .lambdas
        .iter()
        .map(|l| l.ln().powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Rotation-normalized covariance from `C2` to `C1`: carries `C2`'s spectrum
/// in `C1`'s eigenbasis, `U1 diag(lambda_2) U1^T`, with both spectra taken in
/// descending order.
pub fn rotation_normalize(c1: &CovMatrix6, c2: &CovMatrix6) -> Result<CovMatrix6> {
    let (v1, u1) = linalg::sym_eigen6_desc(c1.matrix());
    let (v2, _) = linalg::sym_eigen6_desc(c2.matrix());
    if v1.iter().chain(v2.iter()).any(|&v| v <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let normalized = u1 * Matrix6::from_diagonal(&v2) * u1.transpose();
    Ok(CovMatrix6::new(c2.kind(), normalized))
}

/// Outcome of a descriptor distance, carrying how many matrix pairs actually
/// contributed versus how many were skipped for empty flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvcovDistance {
    pub distance: f64,
    pub compared: usize,
    pub skipped: usize,
}

impl DvcovDistance {
    /// True when every pair was skipped and the distance is vacuously zero.
    pub fn is_vacuous(&self) -> bool {
        self.compared == 0
    }
}

/// Sum of geodesic distances over corresponding within and between matrices.
/// Pairs where either side is flagged empty are skipped symmetrically.
pub fn dvcov_distance_detailed(
    d1: &DVCovDescriptor,
    d2: &DVCovDescriptor,
) -> Result<DvcovDistance> {
    if !d1.layout_matches(d2) {
        return Err(Error::LayoutMismatch(format!(
            "{}x{} ({} within, {} between) vs {}x{} ({} within, {} between)",
            d1.rows,
            d1.cols,
            d1.within.len(),
            d1.between.len(),
            d2.rows,
            d2.cols,
            d2.within.len(),
            d2.between.len()
        )));
    }
    let mut sum = 0.0;
    let mut compared = 0;
    let mut skipped = 0;
    let sides = [
        (&d1.within, &d1.within_empty, &d2.within, &d2.within_empty),
        (
            &d1.between,
            &d1.between_empty,
            &d2.between,
            &d2.between_empty,
        ),
    ];
    for (m1, e1, m2, e2) in sides {
        for i in 0..m1.len() {
            if e1[i] || e2[i] {
                skipped += 1;
                continue;
            }
            sum += geodesic_distance(&m1[i], &m2[i])?;
            compared += 1;
        }
    }
    Ok(DvcovDistance {
        distance: sum,
        compared,
        skipped,
    })
}

/// Plain descriptor distance; see [`dvcov_distance_detailed`] for skip counts.
pub fn dvcov_distance(d1: &DVCovDescriptor, d2: &DVCovDescriptor) -> Result<f64> {
    Ok(dvcov_distance_detailed(d1, d2)?.distance)
}

/// Evaluate both sides of the log-spectrum equivalence:
/// `lhs = ||x2 - x1||` between Eigen-depth vectors and
/// `rhs = dist(C1, rotation_normalize(C1, C2))`.
pub fn log_spectrum_equivalence(c1: &CovMatrix6, c2: &CovMatrix6) -> Result<(f64, f64)> {
    let x1 = eigen_depth(c1)?;
    let x2 = eigen_depth(c2)?;
    let lhs = (x2 - x1).norm();
    let normalized = rotation_normalize(c1, c2)?;
    let rhs = geodesic_distance(c1, &normalized)?;
    Ok((lhs, rhs))
}

/// Random SPD(6) with condition number at most 1e4: `Q^T D Q` with `Q` from
/// the QR of a standard-normal matrix and `D` log-uniform in [1e-2, 1e2].
pub fn random_spd6<R: Rng + ?Sized>(rng: &mut R) -> Matrix6<f64> {
    let mut g: Matrix6<f64> = Matrix6::zeros();
    for i in 0..6 {
        for j in 0..6 {
            g[(i, j)] = linalg::std_normal(rng);
        }
    }
    let qr = g.qr();
    let q = qr.q();
    let mut d = Vector6::zeros();
    for i in 0..6 {
        let exp = rng.random_range(-2.0..2.0);
        d[i] = 10f64.powf(exp);
    }
    let a = q.transpose() * Matrix6::from_diagonal(&d) * q;
    linalg::symmetrize6(&a)
}
