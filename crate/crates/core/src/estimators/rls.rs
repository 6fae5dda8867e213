use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Exponentially-weighted recursive least squares over block observations.
///
/// Each call to [`RlsState::update`] absorbs a block `(X_i, y_i)` of the
/// linear model y = X h + n:
///
/// corr ← λ·corr + X_iᴴX_i,  estimate ← estimate + corr⁻¹·X_iᴴ(y_i − X_i·estimate)
///
/// With λ = 1 the estimate equals the δ-regularized batch least-squares
/// solution of all data seen so far. Blocks are absorbed with a direct
/// Hermitian solve; sizes stay small enough that the inversion lemma would
/// buy nothing.
#[derive(Debug, Clone)]
pub struct RlsState {
    estimate: DVector<Complex64>,
    corr: DMatrix<Complex64>,
    lambda: f64,
    delta: f64,
    block_index: usize,
}

impl RlsState {
    /// Starts from the zero estimate with corr(0) = δ·I.
    pub fn new(dim: usize, lambda: f64, delta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "estimator dimension must be >= 1".into(),
            ));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "forgetting factor {lambda} outside (0, 1]"
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "initialization scale {delta} must be positive"
            )));
        }
        Ok(Self {
            estimate: DVector::zeros(dim),
            corr: DMatrix::identity(dim, dim) * Complex64::new(delta, 0.0),
            lambda,
            delta,
            block_index: 0,
        })
    }

    pub fn estimate(&self) -> &DVector<Complex64> {
        &self.estimate
    }

    pub fn corr(&self) -> &DMatrix<Complex64> {
        &self.corr
    }

    pub fn dim(&self) -> usize {
        self.estimate.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn block_index(&self) -> usize {
        self.block_index
    }

    /// Absorbs one observation block.
    pub fn update(&mut self, x: &DMatrix<Complex64>, y: &DVector<Complex64>) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "regressor has {} columns, estimator dimension is {}",
                x.ncols(),
                self.dim()
            )));
        }
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "regressor has {} rows but target has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        let gram = x.adjoint() * x;
        let xh_y = x.adjoint() * y;
        self.update_from_gram(&gram, &xh_y)
    }

    /// Absorbs one block given its Gram matrix X_iᴴX_i and cross-correlation
    /// X_iᴴy_i. Algebraically identical to [`RlsState::update`]; callers that
    /// can form these products cheaply from structure use this entry.
    pub fn update_from_gram(
        &mut self,
        gram: &DMatrix<Complex64>,
        xh_y: &DVector<Complex64>,
    ) -> Result<()> {
        let dim = self.dim();
        if gram.shape() != (dim, dim) || xh_y.len() != dim {
            return Err(Error::DimensionMismatch(
                "gram/cross-correlation shapes do not match the estimator dimension".into(),
            ));
        }
        self.corr *= Complex64::new(self.lambda, 0.0);
        self.corr += gram;
        let rhs = xh_y - gram * &self.estimate;
        let chol = Cholesky::new(self.corr.clone()).ok_or(Error::SingularMatrix {
            context: "rls correlation matrix",
        })?;
        self.estimate += chol.solve(&rhs);
        self.block_index += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<Complex64> {
        DVector::from_fn(n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    #[test]
    fn zero_innovation_leaves_estimate_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut state = RlsState::new(3, 0.9, 1.0).unwrap();
        let x0 = random_matrix(&mut rng, 5, 3);
        let y0 = random_vector(&mut rng, 5);
        state.update(&x0, &y0).unwrap();
        let before = state.estimate().clone();
        let x1 = random_matrix(&mut rng, 5, 3);
        let y1 = &x1 * &before;
        state.update(&x1, &y1).unwrap();
        assert!((state.estimate() - &before).norm() < 1e-12);
        assert_eq!(state.block_index(), 2);
    }

    #[test]
    fn unit_forgetting_matches_regularized_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dim = 6;
        let delta = 1e-6;
        let mut state = RlsState::new(dim, 1.0, delta).unwrap();
        let mut gram_sum = DMatrix::identity(dim, dim) * Complex64::new(delta, 0.0);
        let mut rhs_sum = DVector::zeros(dim);
        for _ in 0..50 {
            let x = random_matrix(&mut rng, 9, dim);
            let y = random_vector(&mut rng, 9);
            gram_sum += x.adjoint() * &x;
            rhs_sum += x.adjoint() * &y;
            state.update(&x, &y).unwrap();
        }
        let batch = Cholesky::new(gram_sum).unwrap().solve(&rhs_sum);
        let rel = (state.estimate() - &batch).norm() / batch.norm();
        assert!(rel <= 1e-8, "relative error {rel}");
    }

    #[test]
    fn invalid_hyperparameters_rejected() {
        assert!(RlsState::new(0, 0.9, 1.0).is_err());
        assert!(RlsState::new(4, 0.0, 1.0).is_err());
        assert!(RlsState::new(4, 1.1, 1.0).is_err());
        assert!(RlsState::new(4, 0.9, 0.0).is_err());
    }
}
