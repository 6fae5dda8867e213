use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform split of a length-`raw_len` parameter vector into `num_groups`
/// groups. When the group count does not divide the length, the vector is
/// conceptually zero-padded at the tail up to `padded_len`; padded entries
/// carry shrinkage but contribute no energy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPartition {
    raw_len: usize,
    num_groups: usize,
    padded_len: usize,
    group_size: usize,
}

impl GroupPartition {
    pub fn new(raw_len: usize, num_groups: usize) -> Result<Self> {
        if raw_len == 0 {
            return Err(Error::InvalidParameter(
                "parameter length must be >= 1".into(),
            ));
        }
        if num_groups == 0 || num_groups > raw_len {
            return Err(Error::InvalidParameter(format!(
                "group count {num_groups} out of range 1..={raw_len}"
            )));
        }
        let group_size = raw_len.div_ceil(num_groups);
        let padded_len = group_size * num_groups;
        Ok(Self {
            raw_len,
            num_groups,
            padded_len,
            group_size,
        })
    }

    pub fn raw_len(&self) -> usize {
        self.raw_len
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn padded_len(&self) -> usize {
        self.padded_len
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    /// Group index owning entry `l` of the (padded) vector.
    pub fn group_of(&self, l: usize) -> usize {
        debug_assert!(l < self.padded_len);
        l / self.group_size
    }

    /// Index range of group `s` clipped to the raw (unpadded) length.
    pub fn raw_range(&self, s: usize) -> std::ops::Range<usize> {
        let start = s * self.group_size;
        let end = ((s + 1) * self.group_size).min(self.raw_len);
        start..end.max(start)
    }
}

/// Per-group energies h_{Σ,s} = Σ_{l in group s} |h(l)|² of a parameter
/// vector under a partition. Padded tail entries contribute zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupEnergies {
    values: Vec<f64>,
}

impl GroupEnergies {
    pub fn from_vector(v: &DVector<Complex64>, p: &GroupPartition) -> Result<Self> {
        if v.len() != p.raw_len() && v.len() != p.padded_len() {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} fits neither raw {} nor padded {} length",
                v.len(),
                p.raw_len(),
                p.padded_len()
            )));
        }
        let mut values = vec![0.0; p.num_groups()];
        for l in 0..v.len() {
            values[p.group_of(l)] += v[l].norm_sqr();
        }
        Ok(Self { values })
    }

    /// Wraps raw non-negative energies (mostly for synthetic test instances).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "energy vector must be non-empty".into(),
            ));
        }
        if values.iter().any(|&e| !e.is_finite() || e < 0.0) {
            return Err(Error::InvalidParameter(
                "group energies must be finite and non-negative".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_groups(&self) -> usize {
        self.values.len()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Rearranges a padded vector into the padded_len × S block-diagonal matrix
/// whose column `s` holds the entries of group `s`. Multiplying by
/// (1_S + α) scales every group by its own shrinkage factor.
pub fn block_diag_groups(v: &DVector<Complex64>, p: &GroupPartition) -> Result<DMatrix<Complex64>> {
    if v.len() != p.padded_len() {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} != padded length {}",
            v.len(),
            p.padded_len()
        )));
    }
    let mut out = DMatrix::zeros(p.padded_len(), p.num_groups());
    for l in 0..v.len() {
        out[(l, p.group_of(l))] = v[l];
    }
    Ok(out)
}

/// Zero-pads a raw-length vector up to the partition's padded length.
pub fn pad_to_partition(v: &DVector<Complex64>, p: &GroupPartition) -> Result<DVector<Complex64>> {
    if v.len() != p.raw_len() {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} != raw length {}",
            v.len(),
            p.raw_len()
        )));
    }
    let mut out = DVector::zeros(p.padded_len());
    out.rows_mut(0, v.len()).copy_from(v);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cvec(xs: &[(f64, f64)]) -> DVector<Complex64> {
        DVector::from_iterator(xs.len(), xs.iter().map(|&(r, i)| Complex64::new(r, i)))
    }

    #[test]
    fn partition_edges() {
        let p = GroupPartition::new(10, 1).unwrap();
        assert_eq!((p.padded_len(), p.group_size()), (10, 10));
        let p = GroupPartition::new(10, 10).unwrap();
        assert_eq!((p.padded_len(), p.group_size()), (10, 1));
        let p = GroupPartition::new(10, 4).unwrap();
        assert_eq!((p.padded_len(), p.group_size()), (12, 3));
        assert!(GroupPartition::new(0, 1).is_err());
        assert!(GroupPartition::new(4, 0).is_err());
        assert!(GroupPartition::new(4, 5).is_err());
    }

    #[test]
    fn block_diag_structure() {
        let v = cvec(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        let p = GroupPartition::new(4, 2).unwrap();
        let b = block_diag_groups(&v, &p).unwrap();
        assert_eq!(b.shape(), (4, 2));
        assert_eq!(b[(0, 0)], v[0]);
        assert_eq!(b[(1, 0)], v[1]);
        assert_eq!(b[(2, 1)], v[2]);
        assert_eq!(b[(3, 1)], v[3]);
        assert_eq!(b[(0, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(b[(2, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn single_group_is_column() {
        let v = cvec(&[(1.0, 2.0), (3.0, -1.0)]);
        let p = GroupPartition::new(2, 1).unwrap();
        let b = block_diag_groups(&v, &p).unwrap();
        assert_eq!(b.shape(), (2, 1));
        assert_eq!(b.column(0), v.column(0));
    }

    #[test]
    fn length_mismatch_rejected() {
        let v = cvec(&[(1.0, 0.0); 3]);
        let p = GroupPartition::new(4, 2).unwrap();
        assert!(block_diag_groups(&v, &p).is_err());
    }

    #[test]
    fn energy_totals_track_norm() {
        let v = cvec(&[(1.0, 1.0), (0.5, 0.0), (0.0, -2.0)]);
        let p = GroupPartition::new(3, 2).unwrap();
        let e = GroupEnergies::from_vector(&v, &p).unwrap();
        assert_eq!(e.num_groups(), 2);
        assert!((e.total() - v.norm_squared()).abs() < 1e-12);
        assert!((e.values()[0] - 2.25).abs() < 1e-12);
        assert!((e.values()[1] - 4.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn partition_invariants(l in 1usize..200, s_seed in 0usize..200) {
            let s = 1 + s_seed % l;
            let p = GroupPartition::new(l, s).unwrap();
            prop_assert_eq!(p.group_size() * p.num_groups(), p.padded_len());
            prop_assert!(p.padded_len() >= l);
            prop_assert!(p.padded_len() - l < s);
        }

        #[test]
        fn block_diag_reconstructs(l in 1usize..60, s_seed in 0usize..60, seed in 0u64..1000) {
            use rand::prelude::*;
            let s = 1 + s_seed % l;
            let p = GroupPartition::new(l, s).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v = DVector::from_fn(l, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let padded = pad_to_partition(&v, &p).unwrap();
            let b = block_diag_groups(&padded, &p).unwrap();
            let ones = DVector::from_element(s, Complex64::new(1.0, 0.0));
            let back = b * ones;
            for i in 0..p.padded_len() {
                prop_assert_eq!(back[i], padded[i]);
            }
        }
    }
}
