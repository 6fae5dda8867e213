use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Condition-number threshold beyond which a Gram matrix is reported as
/// ill-conditioned rather than silently solved.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Condition number of a Hermitian positive semi-definite matrix, from its
/// (real) eigenvalue spread.
pub fn hermitian_condition(gram: &DMatrix<Complex64>) -> Result<f64> {
    if gram.nrows() != gram.ncols() {
        return Err(Error::DimensionMismatch(
            "condition of a non-square matrix".into(),
        ));
    }
    let eigs = SymmetricEigen::new(gram.clone()).eigenvalues;
    let max = eigs.iter().cloned().fold(f64::MIN, f64::max);
    let min = eigs.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        return Err(Error::SingularMatrix {
            context: "hermitian condition estimate",
        });
    }
    Ok(max / min)
}

fn checked_gram(x: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if x.nrows() < x.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system is underdetermined",
            x.nrows(),
            x.ncols()
        )));
    }
    let gram = x.adjoint() * x;
    let cond = hermitian_condition(&gram)?;
    if cond > CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            cond,
            limit: CONDITION_LIMIT,
        });
    }
    Ok(gram)
}

/// Least-squares solution (XᴴX)⁻¹ Xᴴ y.
pub fn ls_solve(x: &DMatrix<Complex64>, y: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} rows but y has {} entries",
            x.nrows(),
            y.len()
        )));
    }
    let gram = checked_gram(x)?;
    let chol = Cholesky::new(gram).ok_or(Error::SingularMatrix {
        context: "least-squares normal equations",
    })?;
    Ok(chol.solve(&(x.adjoint() * y)))
}

/// Unbiased-estimator MSE floor tr{σ² (XᴴX)⁻¹} for white noise of variance
/// `sigma2_noise`.
pub fn crlb_variance(x: &DMatrix<Complex64>, sigma2_noise: f64) -> Result<f64> {
    if sigma2_noise < 0.0 {
        return Err(Error::InvalidParameter(
            "noise variance must be >= 0".into(),
        ));
    }
    let gram = checked_gram(x)?;
    let chol = Cholesky::new(gram).ok_or(Error::SingularMatrix {
        context: "least-squares normal equations",
    })?;
    let inv = chol.inverse();
    let trace: f64 = (0..inv.nrows()).map(|i| inv[(i, i)].re).sum();
    Ok(sigma2_noise * trace)
}

/// Regressor of the structured channel-estimation model, √M · Δ · F_{M,L},
/// with `delta_diag` holding the diagonal of Δ.
pub fn sce_regression(
    delta_diag: &DVector<Complex64>,
    f_ml: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    let m = f_ml.nrows();
    if delta_diag.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "diagonal has {} entries but the partial DFT has {} rows",
            delta_diag.len(),
            m
        )));
    }
    let scale = (m as f64).sqrt();
    let mut out = f_ml.clone();
    for r in 0..m {
        let factor = delta_diag[r] * scale;
        for c in 0..out.ncols() {
            out[(r, c)] *= factor;
        }
    }
    Ok(out)
}
