use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Unitary DFT matrix of a given order, entry (a, b) = exp(-j 2π a b / M) / √M.
///
/// The matrix is symmetric (not Hermitian), and its conjugate transpose is its
/// inverse.
#[derive(Debug, Clone)]
pub struct DftMatrix {
    order: usize,
    entries: DMatrix<Complex64>,
}

impl DftMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// First `l` columns, the tall matrix that maps a length-`l` impulse
    /// response onto the frequency response of its zero-padded extension.
    pub fn partial(&self, l: usize) -> Result<DMatrix<Complex64>> {
        if l == 0 || l > self.order {
            return Err(Error::InvalidParameter(format!(
                "partial DFT width {l} out of range 1..={}",
                self.order
            )));
        }
        Ok(self.entries.columns(0, l).into_owned())
    }
}

/// Builds the order-`m` unitary DFT matrix.
pub fn dft_matrix(m: usize) -> Result<DftMatrix> {
    if m == 0 {
        return Err(Error::InvalidParameter("DFT order must be >= 1".into()));
    }
    let scale = 1.0 / (m as f64).sqrt();
    // Reduce a*b modulo m before forming the angle so large orders do not lose
    // precision in the phase.
    let entries = DMatrix::from_fn(m, m, |a, b| {
        let k = (a * b) % m;
        let angle = -2.0 * PI * (k as f64) / (m as f64);
        Complex64::from_polar(scale, angle)
    });
    Ok(DftMatrix { order: m, entries })
}

/// First `l` columns of the order-`m` DFT matrix.
pub fn partial_dft(m: usize, l: usize) -> Result<DMatrix<Complex64>> {
    dft_matrix(m)?.partial(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn order_one_is_identity() {
        let f = dft_matrix(1).unwrap();
        assert_eq!(f.order(), 1);
        assert_abs_diff_eq!(f.as_matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.as_matrix()[(0, 0)].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn order_two_matches_closed_form() {
        let f = dft_matrix(2).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        let expect = [[s, s], [s, -s]];
        for a in 0..2 {
            for b in 0..2 {
                assert_abs_diff_eq!(f.as_matrix()[(a, b)].re, expect[a][b], epsilon = 1e-15);
                assert_abs_diff_eq!(f.as_matrix()[(a, b)].im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn unitary_up_to_order_64() {
        for m in 1..=64 {
            let f = dft_matrix(m).unwrap();
            let gram = f.as_matrix().adjoint() * f.as_matrix();
            for a in 0..m {
                for b in 0..m {
                    let want = if a == b { 1.0 } else { 0.0 };
                    let got = gram[(a, b)];
                    assert!(
                        (got.re - want).abs() <= 1e-12 && got.im.abs() <= 1e-12,
                        "M={m}: FᴴF deviates at ({a},{b}): {got}"
                    );
                }
            }
        }
    }

    #[test]
    fn symmetric_entries() {
        let f = dft_matrix(16).unwrap();
        for a in 0..16 {
            for b in 0..16 {
                assert_eq!(f.as_matrix()[(a, b)], f.as_matrix()[(b, a)]);
            }
        }
    }

    #[test]
    fn partial_takes_leading_columns() {
        let f = dft_matrix(8).unwrap();
        let p = f.partial(3).unwrap();
        assert_eq!(p.shape(), (8, 3));
        for a in 0..8 {
            for b in 0..3 {
                assert_eq!(p[(a, b)], f.as_matrix()[(a, b)]);
            }
        }
        assert!(f.partial(0).is_err());
        assert!(f.partial(9).is_err());
        assert!(dft_matrix(0).is_err());
    }
}
