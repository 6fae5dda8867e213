use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Circulant matrix whose first column is `v` zero-padded to length `m`;
/// column `c` is the first column cyclically shifted down by `c`.
pub fn circulant_from_first_column(v: &[Complex64], m: usize) -> Result<DMatrix<Complex64>> {
    if v.len() > m {
        return Err(Error::DimensionMismatch(format!(
            "first column has {} entries, longer than matrix order {m}",
            v.len()
        )));
    }
    let mut out = DMatrix::zeros(m, m);
    for c in 0..m {
        for (l, &x) in v.iter().enumerate() {
            out[((l + c) % m, c)] = x;
        }
    }
    Ok(out)
}

/// Eigenvalue vector of the circulant matrix built from `h` (zero-padded to
/// order `m`): entry `a` equals Σ_l h(l)·exp(-j 2π a l / m), the diagonal of
/// F·H·Fᴴ. Equals √m times the partial DFT of `h`.
pub fn diagonalize_circulant(h: &[Complex64], m: usize) -> Result<DVector<Complex64>> {
    if h.len() > m {
        return Err(Error::DimensionMismatch(format!(
            "tap vector has {} entries, longer than block size {m}",
            h.len()
        )));
    }
    let mut out = DVector::zeros(m);
    for a in 0..m {
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, &tap) in h.iter().enumerate() {
            let k = (a * l) % m;
            let angle = -2.0 * PI * (k as f64) / (m as f64);
            acc += tap * Complex64::from_polar(1.0, angle);
        }
        out[a] = acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dft_matrix;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_taps(rng: &mut ChaCha8Rng, l: usize) -> Vec<Complex64> {
        (0..l)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect()
    }

    #[test]
    fn single_tap_gives_identity() {
        let c = circulant_from_first_column(&[Complex64::new(1.0, 0.0)], 3).unwrap();
        assert_eq!(c, DMatrix::identity(3, 3));
    }

    #[test]
    fn delayed_tap_gives_cyclic_shift() {
        let v = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let c = circulant_from_first_column(&v, 3).unwrap();
        // Shift-down-by-one permutation: e_k -> e_{k+1 mod 3}.
        let mut want = DMatrix::zeros(3, 3);
        want[(1, 0)] = Complex64::new(1.0, 0.0);
        want[(2, 1)] = Complex64::new(1.0, 0.0);
        want[(0, 2)] = Complex64::new(1.0, 0.0);
        assert_eq!(c, want);
    }

    #[test]
    fn rejects_overlong_column() {
        let v = vec![Complex64::new(1.0, 0.0); 5];
        assert!(circulant_from_first_column(&v, 3).is_err());
        assert!(diagonalize_circulant(&v, 3).is_err());
    }

    #[test]
    fn impulse_diagonalizes_to_ones() {
        let h = [Complex64::new(1.0, 0.0)];
        let d = diagonalize_circulant(&h, 12).unwrap();
        for a in 0..12 {
            assert!((d[a] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn single_delayed_tap_walks_the_unit_circle() {
        let h = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let d = diagonalize_circulant(&h, 4).unwrap();
        let want = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        for a in 0..4 {
            assert!((d[a] - want[a]).norm() < 1e-14, "bin {a}: {}", d[a]);
        }
    }

    #[test]
    fn matches_dft_similarity_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let m = rng.gen_range(2..=64);
            let l = rng.gen_range(1..=m);
            let h = random_taps(&mut rng, l);
            let f = dft_matrix(m).unwrap();
            let circ = circulant_from_first_column(&h, m).unwrap();
            let sim = f.as_matrix() * circ * f.as_matrix().adjoint();
            let diag = diagonalize_circulant(&h, m).unwrap();
            for a in 0..m {
                for b in 0..m {
                    if a == b {
                        assert!(
                            (sim[(a, a)] - diag[a]).norm() <= 1e-10,
                            "diagonal mismatch at {a} (M={m}, L={l})"
                        );
                    } else {
                        assert!(
                            sim[(a, b)].norm() <= 1e-10,
                            "off-diagonal energy at ({a},{b}) (M={m}, L={l})"
                        );
                    }
                }
            }
        }
    }
}
