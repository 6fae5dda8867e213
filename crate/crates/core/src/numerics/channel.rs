use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Discrete equivalent channel impulse response at chip spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    taps: DVector<Complex64>,
    tap_spacing: f64,
}

impl ChannelRealization {
    /// `allow_zero` admits the all-zero test channel; every other realization
    /// must carry positive energy.
    pub fn new(taps: DVector<Complex64>, tap_spacing: f64, allow_zero: bool) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidParameter(
                "channel needs at least one tap".into(),
            ));
        }
        if taps.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "channel taps must be finite".into(),
            ));
        }
        let energy: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
        if energy <= 0.0 && !allow_zero {
            return Err(Error::InvalidParameter(
                "channel has zero energy (pass allow_zero for the null test channel)".into(),
            ));
        }
        Ok(Self { taps, tap_spacing })
    }

    pub fn taps(&self) -> &DVector<Complex64> {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn tap_spacing(&self) -> f64 {
        self.tap_spacing
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(ChannelRealization::new(DVector::zeros(0), 1e-9, false).is_err());
        let bad = DVector::from_vec(vec![Complex64::new(f64::NAN, 0.0)]);
        assert!(ChannelRealization::new(bad, 1e-9, false).is_err());
    }

    #[test]
    fn zero_channel_needs_opt_in() {
        let z = DVector::zeros(4);
        assert!(ChannelRealization::new(z.clone(), 1e-9, false).is_err());
        let ch = ChannelRealization::new(z, 1e-9, true).unwrap();
        assert_eq!(ch.energy(), 0.0);
    }
}
