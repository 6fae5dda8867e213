use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Walsh-Hadamard code matrix built by the Sylvester recursion.
///
/// Column `k` is the ±1 spreading code of user `k`; columns are mutually
/// orthogonal with SᵀS = Nc·I exactly in integer arithmetic.
pub fn walsh_codes(nc: usize) -> Result<DMatrix<i32>> {
    if nc == 0 || !nc.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "spreading gain {nc} is not a power of two"
        )));
    }
    let mut h = DMatrix::from_element(1, 1, 1i32);
    let mut size = 1;
    while size < nc {
        let mut next = DMatrix::zeros(2 * size, 2 * size);
        for r in 0..size {
            for c in 0..size {
                let v = h[(r, c)];
                next[(r, c)] = v;
                next[(r, c + size)] = v;
                next[(r + size, c)] = v;
                next[(r + size, c + size)] = -v;
            }
        }
        h = next;
        size *= 2;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_cases() {
        assert_eq!(walsh_codes(1).unwrap(), DMatrix::from_element(1, 1, 1));
        let s2 = walsh_codes(2).unwrap();
        assert_eq!(s2[(0, 0)], 1);
        assert_eq!(s2[(0, 1)], 1);
        assert_eq!(s2[(1, 0)], 1);
        assert_eq!(s2[(1, 1)], -1);
    }

    #[test]
    fn rejects_non_powers_of_two() {
        for nc in [0usize, 3, 6, 12] {
            assert!(walsh_codes(nc).is_err(), "Nc={nc} should be rejected");
        }
    }

    #[test]
    fn gram_is_scaled_identity_exactly() {
        for nc in [1usize, 2, 4, 8, 16, 64] {
            let s = walsh_codes(nc).unwrap();
            let gram = s.transpose() * &s;
            for r in 0..nc {
                for c in 0..nc {
                    let want = if r == c { nc as i32 } else { 0 };
                    assert_eq!(gram[(r, c)], want, "Nc={nc} at ({r},{c})");
                }
            }
        }
    }
}
