use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::ChannelRealization;
use crate::sim::{LinkContext, SystemConfig};

/// Equivalent M-tap MMSE receive filter ŵ_e computed from perfect channel
/// knowledge (the oracle receiver).
///
/// The full MMSE matrix factors as diag(ŵ_e)·I_e, with ŵ_e the row sums of
/// V = (1/√Nc)(1/Nc·ΣΛ_k I_e I_eᴴ Λ_kᴴ + σ²I)⁻¹ Λ₁; the detector applies the
/// conjugate of ŵ_e through the block's data matrix.
pub fn mmse_weights_ideal(ctx: &LinkContext, sigma2: f64) -> Result<DVector<Complex64>> {
    let cfg = ctx.cfg();
    let lambdas: Vec<&DVector<Complex64>> = (0..cfg.users).map(|user| ctx.lambda(user)).collect();
    mmse_weights_from_spectra(&lambdas, cfg.symbols_per_block, cfg.spreading_gain, sigma2)
}

/// Core of the oracle receiver, taking the per-user diagonal spectra Λ_k
/// directly; the first spectrum belongs to the desired user.
pub fn mmse_weights_from_spectra(
    lambdas: &[&DVector<Complex64>],
    n_symbols: usize,
    spreading_gain: usize,
    sigma2: f64,
) -> Result<DVector<Complex64>> {
    if sigma2 < 0.0 {
        return Err(Error::InvalidParameter(
            "noise variance must be >= 0".into(),
        ));
    }
    let first = lambdas
        .first()
        .ok_or_else(|| Error::InvalidParameter("need at least one user spectrum".into()))?;
    let m = first.len();
    if m != n_symbols * spreading_gain || lambdas.iter().any(|l| l.len() != m) {
        return Err(Error::DimensionMismatch(
            "user spectra do not match the block geometry".into(),
        ));
    }
    let n = n_symbols;
    let nc = spreading_gain as f64;
    let cov = covariance_of_z(lambdas, n, nc, sigma2);
    let inv = Cholesky::new(cov)
        .ok_or(Error::SingularMatrix {
            context: "mmse receiver covariance",
        })?
        .inverse();

    // Row sums of V = (1/√Nc)·inv·Λ₁.
    let lambda1 = lambdas[0];
    let scale = 1.0 / nc.sqrt();
    Ok(DVector::from_fn(m, |row, _| {
        let mut acc = Complex64::new(0.0, 0.0);
        for col in ((row % n)..m).step_by(n) {
            acc += inv[(row, col)] * lambda1[col];
        }
        acc * scale
    }))
}

/// Covariance of the frequency-domain received block: nonzero only between
/// bins in the same residue class modulo N.
fn covariance_of_z(
    lambdas: &[&DVector<Complex64>],
    n: usize,
    nc: f64,
    sigma2: f64,
) -> DMatrix<Complex64> {
    let m = lambdas[0].len();
    let mut cov = DMatrix::zeros(m, m);
    for row in 0..m {
        for col in ((row % n)..m).step_by(n) {
            let mut acc = Complex64::new(0.0, 0.0);
            for lam in lambdas {
                acc += lam[row] * lam[col].conj();
            }
            cov[(row, col)] = acc / nc;
        }
        cov[(row, row)] += Complex64::new(sigma2, 0.0);
    }
    cov
}

/// Residual symbol MSE of the oracle receiver, E||b − b̂_mmse||², the floor
/// every adaptive receiver is compared against. Divided by N it estimates the
/// per-symbol measurement-error variance of the linear model b = Y·w + ε.
pub fn mmse_min_cost(ctx: &LinkContext, sigma2: f64) -> Result<f64> {
    let cfg = ctx.cfg();
    let n = cfg.symbols_per_block;
    let nc = cfg.spreading_gain as f64;
    let m = cfg.block_chips();
    let lambdas: Vec<&DVector<Complex64>> = (0..cfg.users).map(|user| ctx.lambda(user)).collect();
    let cov = covariance_of_z(&lambdas, n, nc, sigma2);
    let chol = Cholesky::new(cov).ok_or(Error::SingularMatrix {
        context: "mmse receiver covariance",
    })?;
    // Cross-covariance P = E[z bᴴ] = (1/√Nc)·Λ₁·I_e·F_N.
    let p = DMatrix::from_fn(m, n, |row, col| {
        ctx.lambda(0)[row] * ctx.dft_n()[(row % n, col)] / Complex64::new(nc.sqrt(), 0.0)
    });
    let solved = chol.solve(&p);
    let mut captured = 0.0;
    for row in 0..m {
        for col in 0..n {
            captured += (p[(row, col)].conj() * solved[(row, col)]).re;
        }
    }
    Ok(n as f64 - captured)
}

/// Free-standing variant building the link context internally.
pub fn mmse_receiver_ideal(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    sigma2: f64,
) -> Result<DVector<Complex64>> {
    mmse_weights_ideal(&LinkContext::new(cfg, ch)?, sigma2)
}

/// Soft symbol estimates b̂ = Y·w and their BPSK hard decisions; a zero soft
/// value decides +1 so detection is deterministic.
pub fn detect(
    y_mat: &DMatrix<Complex64>,
    w: &DVector<Complex64>,
) -> Result<(DVector<f64>, DVector<Complex64>)> {
    if y_mat.ncols() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "data matrix has {} columns but the filter has {} taps",
            y_mat.ncols(),
            w.len()
        )));
    }
    let soft = y_mat * w;
    let hard = DVector::from_fn(soft.len(), |i, _| if soft[i].re < 0.0 { -1.0 } else { 1.0 });
    Ok((hard, soft))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_filter_decides_all_ones() {
        let y = DMatrix::from_element(4, 6, Complex64::new(0.5, -0.2));
        let w = DVector::zeros(6);
        let (hard, soft) = detect(&y, &w).unwrap();
        assert!(soft.iter().all(|s| s.norm() == 0.0));
        assert!(hard.iter().all(|&b| b == 1.0));
    }
}
