use nalgebra::DVector;
use num_complex::Complex64;

use super::opcount;
use crate::error::{Error, Result};
use crate::numerics::{GroupEnergies, GroupPartition};

/// Shrinkage exponents are kept strictly inside (-1, 0): the LMS recursions
/// can transiently leave the admissible range, so every update is projected
/// back onto this interval.
pub const ALPHA_CLAMP_MIN: f64 = -1.0 + 1e-6;
pub const ALPHA_CLAMP_MAX: f64 = -1e-12;

/// Group-energy estimates are constrained to stay positive; the floor is far
/// below any dynamically meaningful scale.
const PM_FLOOR: f64 = 1e-300;

/// How the per-group energy estimates P̂ feeding the shrinkage update are
/// obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GseMode {
    /// P̂ taken directly from the group energies of the current RLS estimate.
    EstimatorBased,
    /// As `EstimatorBased`, then refined by a gradient step on the MSE cost
    /// with a per-entry revert when the step would turn an energy negative.
    AutoTuned,
}

/// Adaptive group-based shrinkage state layered on an external RLS estimate.
///
/// Per block: maintain the cumulative mean of the RLS trajectory, estimate
/// the equivalent noise variance from the distance to that mean, refresh the
/// per-group energies, and move the shrinkage exponents down the estimated
/// MSE gradient.
#[derive(Debug, Clone)]
pub struct GseState {
    alpha: DVector<f64>,
    pm: DVector<f64>,
    running_mean: DVector<Complex64>,
    sigma2: f64,
    mu: f64,
    mu_p: f64,
    partition: GroupPartition,
    mode: GseMode,
    inner_iterations: usize,
    updates: usize,
}

impl GseState {
    pub fn new(partition: GroupPartition, mode: GseMode, mu: f64, mu_p: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step size mu = {mu} must be positive"
            )));
        }
        if !(mu_p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step size mu_p = {mu_p} must be positive"
            )));
        }
        let s = partition.num_groups();
        Ok(Self {
            alpha: DVector::zeros(s),
            pm: DVector::from_element(s, PM_FLOOR),
            running_mean: DVector::zeros(partition.raw_len()),
            sigma2: 0.0,
            mu,
            mu_p,
            partition,
            mode,
            inner_iterations: 1,
            updates: 0,
        })
    }

    /// Number of refinement iterations of the energy estimates per block in
    /// auto-tuned mode. Kept configurable for experimentation; one iteration
    /// is the operating point.
    pub fn with_inner_iterations(mut self, c: usize) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidParameter(
                "inner iteration count must be >= 1".into(),
            ));
        }
        self.inner_iterations = c;
        Ok(self)
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn pm(&self) -> &DVector<f64> {
        &self.pm
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn running_mean(&self) -> &DVector<Complex64> {
        &self.running_mean
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    pub fn mode(&self) -> GseMode {
        self.mode
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    /// Biased estimate for the current shrinkage exponents.
    pub fn apply(&self, rls_est: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        gse_apply(rls_est, &self.alpha, &self.partition)
    }

    /// Absorbs the RLS estimate of the current block and moves the shrinkage
    /// exponents one LMS step.
    pub fn step(&mut self, rls_est: &DVector<Complex64>) -> Result<()> {
        let l = self.partition.raw_len();
        let s = self.partition.num_groups();
        if rls_est.len() != l {
            return Err(Error::DimensionMismatch(format!(
                "estimate length {} != parameter length {l}",
                rls_est.len()
            )));
        }

        self.updates += 1;
        let inv_i = 1.0 / self.updates as f64;

        // Cumulative mean of the RLS trajectory and the instantaneous
        // equivalent-noise-variance estimate ||est - mean||² / S.
        let mut dist_sq = 0.0;
        for idx in 0..l {
            let mean = self.running_mean[idx] + (rls_est[idx] - self.running_mean[idx]) * inv_i;
            self.running_mean[idx] = mean;
            dist_sq += (rls_est[idx] - mean).norm_sqr();
        }
        self.sigma2 = dist_sq / s as f64;
        opcount::add(2 * l as u64 + 1);

        // Group energies of the RLS estimate.
        let mut pm_eb = vec![0.0f64; s];
        for idx in 0..l {
            pm_eb[self.partition.group_of(idx)] += rls_est[idx].norm_sqr();
        }
        for e in pm_eb.iter_mut() {
            *e = e.max(PM_FLOOR);
        }
        opcount::add(l as u64);

        match self.mode {
            GseMode::EstimatorBased => {
                for g in 0..s {
                    self.pm[g] = pm_eb[g];
                }
            }
            GseMode::AutoTuned => {
                for g in 0..s {
                    let mut pm = pm_eb[g];
                    for _ in 0..self.inner_iterations {
                        let grad = at_pm_gradient(self.sigma2, self.alpha[g], pm);
                        let cand = pm - self.mu_p * grad;
                        if cand < 0.0 {
                            pm = pm_eb[g];
                            break;
                        }
                        pm = cand.max(PM_FLOOR);
                    }
                    self.pm[g] = pm;
                }
                opcount::add(8 * s as u64 * self.inner_iterations as u64);
            }
        }

        // LMS step on the shrinkage exponents; the factor of 2 from the real
        // gradient is absorbed into the step size.
        for g in 0..s {
            let grad = self.sigma2 * (1.0 + self.alpha[g]) + self.pm[g] * self.alpha[g];
            self.alpha[g] =
                (self.alpha[g] - self.mu * grad).clamp(ALPHA_CLAMP_MIN, ALPHA_CLAMP_MAX);
        }
        opcount::add(3 * s as u64);
        Ok(())
    }
}

/// Closed-form minimizer of the shrinkage MSE cost:
/// α_s = -σ̃² / (σ̃² + h_{Σ,s}), with the convention α_s = 0 when both the
/// noise variance and the group energy vanish.
pub fn gse_optimal_alpha(energies: &GroupEnergies, sigma2_tilde: f64) -> Result<DVector<f64>> {
    if !(sigma2_tilde >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "equivalent noise variance {sigma2_tilde} must be >= 0"
        )));
    }
    Ok(DVector::from_iterator(
        energies.num_groups(),
        energies.values().iter().map(|&h| {
            if sigma2_tilde == 0.0 {
                0.0
            } else {
                -sigma2_tilde / (sigma2_tilde + h)
            }
        }),
    ))
}

/// Scales every entry of group `s` by (1 + α_s). Accepts a raw-length or
/// padded-length estimate and preserves its length.
pub fn gse_apply(
    est: &DVector<Complex64>,
    alpha: &DVector<f64>,
    p: &GroupPartition,
) -> Result<DVector<Complex64>> {
    if est.len() != p.raw_len() && est.len() != p.padded_len() {
        return Err(Error::DimensionMismatch(format!(
            "estimate length {} fits neither raw {} nor padded {} length",
            est.len(),
            p.raw_len(),
            p.padded_len()
        )));
    }
    if alpha.len() != p.num_groups() {
        return Err(Error::DimensionMismatch(format!(
            "alpha has {} entries for {} groups",
            alpha.len(),
            p.num_groups()
        )));
    }
    let mut out = est.clone();
    for idx in 0..out.len() {
        out[idx] *= 1.0 + alpha[p.group_of(idx)];
    }
    Ok(out)
}

/// Instantaneous equivalent-noise-variance estimate
/// σ̃̂² = ||rls_est − running_mean||² / S.
pub fn estimate_noise_var(
    rls_est: &DVector<Complex64>,
    running_mean: &DVector<Complex64>,
    s: usize,
) -> Result<f64> {
    if rls_est.len() != running_mean.len() {
        return Err(Error::DimensionMismatch(format!(
            "estimate length {} != running mean length {}",
            rls_est.len(),
            running_mean.len()
        )));
    }
    if s == 0 {
        return Err(Error::InvalidParameter("group count must be >= 1".into()));
    }
    Ok((rls_est - running_mean).norm_squared() / s as f64)
}

/// Estimated gradient of the shrinkage MSE cost with respect to α (half the
/// real gradient; the step size absorbs the factor of 2):
/// ĝ_s = σ̃²(1 + α_s) + P̂_s α_s.
pub fn eb_alpha_gradient(sigma2: f64, alpha: &DVector<f64>, pm: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(alpha.len(), |g, _| {
        sigma2 * (1.0 + alpha[g]) + pm[g] * alpha[g]
    })
}

/// Estimated gradient of the expanded MSE cost with respect to one group
/// energy P̂_s, treating α as its optimal response to P̂:
/// 2σ̃²(1+α)·σ̃²/(σ̃²+P̂)² + 2αP̂·σ̃²/(σ̃²+P̂)² + α².
/// When σ̃² + P̂ = 0 the expression degenerates to its α² limit.
pub fn at_pm_gradient(sigma2: f64, alpha: f64, pm: f64) -> f64 {
    let denom = sigma2 + pm;
    if denom == 0.0 {
        return alpha * alpha;
    }
    let w = sigma2 / (denom * denom);
    2.0 * sigma2 * (1.0 + alpha) * w + 2.0 * alpha * pm * w + alpha * alpha
}
