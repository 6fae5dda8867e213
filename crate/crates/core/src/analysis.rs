//! Closed-form MSE machinery for the shrinkage estimators: the cost surface
//! over shrinkage exponents, the per-group lower bound, brute-force oracles
//! and the ordering checks across group counts.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::numerics::{ChannelRealization, GroupEnergies, GroupPartition};

/// Shrinkage MSE cost f(α) = σ̃² Σ (1+α_s)² + Σ α_s² h_{Σ,s}.
pub fn mse_of_alpha(
    alpha: &DVector<f64>,
    energies: &GroupEnergies,
    sigma2_tilde: f64,
) -> Result<f64> {
    if alpha.len() != energies.num_groups() {
        return Err(Error::DimensionMismatch(format!(
            "alpha has {} entries for {} groups",
            alpha.len(),
            energies.num_groups()
        )));
    }
    let mut acc = 0.0;
    for (g, &h) in energies.values().iter().enumerate() {
        let a = alpha[g];
        acc += sigma2_tilde * (1.0 + a) * (1.0 + a) + a * a * h;
    }
    Ok(acc)
}

/// MSE floor of the optimally-shrunk estimator with `s` uniform groups:
/// v − Σ_s v² / (S·v + h_{Σ,s}·S²). Degenerate terms where both the
/// variance and the group energy vanish contribute zero.
pub fn mse_lower_bound(v: f64, energies: &GroupEnergies, s: usize) -> Result<f64> {
    if v < 0.0 {
        return Err(Error::InvalidParameter("variance must be >= 0".into()));
    }
    if s != energies.num_groups() {
        return Err(Error::DimensionMismatch(format!(
            "group count {s} != energy vector length {}",
            energies.num_groups()
        )));
    }
    let s_f = s as f64;
    let mut reduction = 0.0;
    for &h in energies.values() {
        let denom = s_f * v + h * s_f * s_f;
        if denom > 0.0 {
            reduction += v * v / denom;
        }
    }
    Ok(v - reduction)
}

/// Exhaustive grid minimizer of [`mse_of_alpha`] over
/// α_s ∈ {−1+step, …, −step, 0}; the oracle for the closed form. The grid is
/// exponential in the group count, so only S ≤ 3 is accepted.
pub fn grid_search_alpha(
    energies: &GroupEnergies,
    sigma2_tilde: f64,
    step: f64,
) -> Result<DVector<f64>> {
    let s = energies.num_groups();
    if s > 3 {
        return Err(Error::InvalidParameter(format!(
            "exhaustive grid search supports at most 3 groups, got {s}"
        )));
    }
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::InvalidParameter(format!(
            "grid step {step} outside (0, 0.1]"
        )));
    }
    let k = (1.0 / step).round() as i64;
    // Per-axis cost tables: f is a sum of per-group terms, evaluated once per
    // grid coordinate and combined additively during the scan.
    let axis: Vec<f64> = (1..=k).map(|j| ((j - k) as f64) * step).collect();
    let tables: Vec<Vec<f64>> = energies
        .values()
        .iter()
        .map(|&h| {
            axis.iter()
                .map(|&a| sigma2_tilde * (1.0 + a) * (1.0 + a) + a * a * h)
                .collect()
        })
        .collect();

    let mut best = vec![0usize; s];
    let mut best_val = f64::INFINITY;
    let mut idx = vec![0usize; s];
    loop {
        let val: f64 = (0..s).map(|g| tables[g][idx[g]]).sum();
        // Ties resolve toward zero shrinkage (the scan ends at α = 0), which
        // is the convention of the closed form on degenerate axes.
        if val <= best_val {
            best_val = val;
            best.copy_from_slice(&idx);
        }
        // Odometer increment over the S-dimensional grid.
        let mut g = 0;
        loop {
            if g == s {
                return Ok(DVector::from_iterator(s, best.iter().map(|&j| axis[j])));
            }
            idx[g] += 1;
            if idx[g] < axis.len() {
                break;
            }
            idx[g] = 0;
            g += 1;
        }
    }
}

/// Grid of the MSE difference between the shrunk and unshrunk estimators for
/// two groups, sampled over shrinkage factors (1+α₁, 1+α₂) ∈ (0, 1]².
#[derive(Debug, Clone)]
pub struct DeltaMseSurface {
    /// Shrinkage-factor sample points shared by both axes.
    pub factors: Vec<f64>,
    /// `values[i][j]` = δMSE at (factors[i], factors[j]).
    pub values: Vec<Vec<f64>>,
}

impl DeltaMseSurface {
    /// Grid coordinates (sf1, sf2) of the smallest sampled δMSE.
    pub fn grid_minimum(&self) -> (f64, f64, f64) {
        let mut best = (0usize, 0usize);
        let mut best_val = f64::INFINITY;
        for i in 0..self.factors.len() {
            for j in 0..self.factors.len() {
                if self.values[i][j] < best_val {
                    best_val = self.values[i][j];
                    best = (i, j);
                }
            }
        }
        (self.factors[best.0], self.factors[best.1], best_val)
    }
}

/// δMSE(α) = f(α) − S·σ̃²: the analytic gap between the shrunk estimator and
/// the unbiased one, zero by construction at shrinkage factors (1, 1).
pub fn delta_mse_surface(
    energies: &GroupEnergies,
    sigma2_tilde: f64,
    step: f64,
) -> Result<DeltaMseSurface> {
    if energies.num_groups() != 2 {
        return Err(Error::InvalidParameter(format!(
            "surface is defined for exactly 2 groups, got {}",
            energies.num_groups()
        )));
    }
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "grid step {step} outside (0, 0.5]"
        )));
    }
    let k = (1.0 / step).round() as usize;
    let factors: Vec<f64> = (1..=k).map(|j| j as f64 / k as f64).collect();
    let unbiased = 2.0 * sigma2_tilde;
    let h = energies.values();
    let mut values = vec![vec![0.0; k]; k];
    for (i, &sf1) in factors.iter().enumerate() {
        let a1 = sf1 - 1.0;
        let t1 = sigma2_tilde * sf1 * sf1 + a1 * a1 * h[0];
        for (j, &sf2) in factors.iter().enumerate() {
            let a2 = sf2 - 1.0;
            values[i][j] = t1 + sigma2_tilde * sf2 * sf2 + a2 * a2 * h[1] - unbiased;
        }
    }
    Ok(DeltaMseSurface { factors, values })
}

/// Arithmetic-mean/harmonic-mean style inequality over positive entries:
/// Σ 1/a_s ≥ S² / Σ a_s. Returns the slack (LHS − RHS), non-negative when
/// the inequality holds.
pub fn check_group_inequality(a: &[f64]) -> Result<(bool, f64)> {
    if a.is_empty() {
        return Err(Error::InvalidParameter("need at least one entry".into()));
    }
    if a.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidParameter(
            "entries must be strictly positive".into(),
        ));
    }
    let lhs: f64 = a.iter().map(|&x| 1.0 / x).sum();
    let rhs = (a.len() as f64).powi(2) / a.iter().sum::<f64>();
    let slack = lhs - rhs;
    Ok((slack >= 0.0, slack))
}

/// Lower bounds along a chain of group counts plus the ordering assertions
/// they must satisfy.
#[derive(Debug, Clone)]
pub struct StatementReport {
    /// (group count, lower bound) in chain order.
    pub bounds: Vec<(usize, f64)>,
    /// Worst signed margin of bound(1) ≥ bound(S) over the chain.
    pub margin_vs_single: f64,
    /// Worst signed margin of bound(S) ≥ bound(L) over the chain.
    pub margin_vs_full: f64,
}

/// Evaluates the lower bound for every group count in `chain` and checks that
/// the single-group bound dominates all others while the fully-split bound
/// is dominated by all others.
///
/// The chain must be sorted, contain both 1 and L, and every entry must
/// divide L so each count induces a uniform partition without padding.
pub fn verify_statements(
    h: &ChannelRealization,
    v: f64,
    chain: &[usize],
) -> Result<StatementReport> {
    let l = h.len();
    if chain.first() != Some(&1) || chain.last() != Some(&l) {
        return Err(Error::InvalidParameter(format!(
            "chain must start at 1 and end at the parameter length {l}"
        )));
    }
    if chain.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "chain must be strictly increasing".into(),
        ));
    }
    if let Some(&bad) = chain.iter().find(|&&s| l % s != 0) {
        return Err(Error::InvalidParameter(format!(
            "group count {bad} does not divide the parameter length {l}"
        )));
    }

    let mut bounds = Vec::with_capacity(chain.len());
    for &s in chain {
        let p = GroupPartition::new(l, s)?;
        let e = GroupEnergies::from_vector(h.taps(), &p)?;
        bounds.push((s, mse_lower_bound(v, &e, s)?));
    }
    let single = bounds[0].1;
    let full = bounds[bounds.len() - 1].1;
    let margin_vs_single = bounds
        .iter()
        .filter(|&&(s, _)| s != 1)
        .map(|&(_, b)| single - b)
        .fold(f64::INFINITY, f64::min);
    let margin_vs_full = bounds
        .iter()
        .filter(|&&(s, _)| s != l)
        .map(|&(_, b)| b - full)
        .fold(f64::INFINITY, f64::min);
    Ok(StatementReport {
        bounds,
        margin_vs_single,
        margin_vs_full,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::gse_optimal_alpha;
    use nalgebra::DVector;
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn energies(vals: &[f64]) -> GroupEnergies {
        GroupEnergies::from_values(vals.to_vec()).unwrap()
    }

    #[test]
    fn cost_at_reference_points() {
        let e = energies(&[0.7, 1.1, 0.2]);
        let sigma2 = 0.4;
        let zero = DVector::zeros(3);
        assert!((mse_of_alpha(&zero, &e, sigma2).unwrap() - 3.0 * sigma2).abs() < 1e-15);
        let full = DVector::from_element(3, -1.0);
        assert!((mse_of_alpha(&full, &e, sigma2).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cost_at_optimum_equals_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let s = rng.gen_range(1..6);
            let e = GroupEnergies::from_values((0..s).map(|_| rng.gen::<f64>() * 3.0).collect())
                .unwrap();
            let v = rng.gen::<f64>() * 2.0 + 1e-6;
            let sigma2 = v / s as f64;
            let opt = gse_optimal_alpha(&e, sigma2).unwrap();
            let f_opt = mse_of_alpha(&opt, &e, sigma2).unwrap();
            let bound = mse_lower_bound(v, &e, s).unwrap();
            assert!(
                (f_opt - bound).abs() <= 1e-10 * bound.max(1.0),
                "f(α*) = {f_opt}, bound = {bound}"
            );
            // The optimal shrinkage never exceeds the unbiased MSE.
            assert!(f_opt <= v + 1e-12);
        }
    }

    #[test]
    fn lower_bound_reference_points() {
        // Zero channel: the bound collapses to zero exactly.
        let e = energies(&[0.0, 0.0]);
        assert_eq!(mse_lower_bound(1.3, &e, 2).unwrap(), 0.0);

        // Single group: v / (1 + v/||h||²).
        let e = energies(&[2.0]);
        let v = 0.8;
        let want = v / (1.0 + v / 2.0);
        assert!((mse_lower_bound(v, &e, 1).unwrap() - want).abs() < 1e-12);

        // Equal energies E per group: v − v²/(v + E·S).
        let e = energies(&[0.5, 0.5, 0.5, 0.5]);
        let v = 1.2;
        let want = v - v * v / (v + 0.5 * 4.0);
        assert!((mse_lower_bound(v, &e, 4).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn grid_search_degenerate_and_small_cases() {
        let e = energies(&[0.3, 0.9]);
        let g = grid_search_alpha(&e, 0.0, 0.01).unwrap();
        assert_eq!(g, DVector::zeros(2));

        let e = energies(&[1.5]);
        let sigma2 = 0.5;
        let g = grid_search_alpha(&e, sigma2, 0.005).unwrap();
        let opt = gse_optimal_alpha(&e, sigma2).unwrap();
        assert!((g[0] - opt[0]).abs() <= 0.005 + 1e-12);

        let e = energies(&[0.3, 0.9, 1.2, 0.1]);
        assert!(grid_search_alpha(&e, 0.5, 0.01).is_err());
        let e = energies(&[0.3]);
        assert!(grid_search_alpha(&e, 0.5, 0.2).is_err());
    }

    #[test]
    fn closed_form_never_loses_to_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..30 {
            let e = energies(&[rng.gen::<f64>() * 2.0, rng.gen::<f64>() * 2.0]);
            let sigma2 = rng.gen::<f64>() + 1e-3;
            let opt = gse_optimal_alpha(&e, sigma2).unwrap();
            let grid = grid_search_alpha(&e, sigma2, 0.01).unwrap();
            let f_opt = mse_of_alpha(&opt, &e, sigma2).unwrap();
            let f_grid = mse_of_alpha(&grid, &e, sigma2).unwrap();
            assert!(f_opt <= f_grid + 1e-12);
        }
    }

    #[test]
    fn surface_zero_at_unit_factors_and_consistent_minimum() {
        let e = energies(&[0.9, 0.15]);
        let sigma2 = 0.2;
        let surf = delta_mse_surface(&e, sigma2, 0.01).unwrap();
        let k = surf.factors.len();
        assert_eq!(surf.factors[k - 1], 1.0);
        assert_eq!(surf.values[k - 1][k - 1], 0.0);

        let (sf1, sf2, val) = surf.grid_minimum();
        assert!(val < 0.0);
        let opt = gse_optimal_alpha(&e, sigma2).unwrap();
        assert!((sf1 - (1.0 + opt[0])).abs() <= 0.01 + 1e-12);
        assert!((sf2 - (1.0 + opt[1])).abs() <= 0.01 + 1e-12);
        // Interior minimum: strictly inside (0,1) on both axes.
        for a in [opt[0], opt[1]] {
            assert!(1.0 + a > 0.0 && 1.0 + a < 1.0);
        }
    }

    #[test]
    fn surface_requires_two_groups() {
        let e = energies(&[1.0]);
        assert!(delta_mse_surface(&e, 0.1, 0.01).is_err());
    }

    #[test]
    fn inequality_reference_points() {
        let (ok, slack) = check_group_inequality(&[1.0, 1.0]).unwrap();
        assert!(ok);
        assert_eq!(slack, 0.0);

        let (ok, slack) = check_group_inequality(&[1.0, 3.0]).unwrap();
        assert!(ok);
        assert!((slack - 1.0 / 3.0).abs() < 1e-12);

        assert!(check_group_inequality(&[1.0, 0.0]).is_err());
        assert!(check_group_inequality(&[1.0, -2.0]).is_err());
        assert!(check_group_inequality(&[]).is_err());
    }

    #[test]
    fn inequality_fuzz() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20_000 {
            let s = rng.gen_range(2..=16);
            let a: Vec<f64> = (0..s).map(|_| rng.gen::<f64>() * 99.99 + 0.01).collect();
            let (ok, slack) = check_group_inequality(&a).unwrap();
            assert!(ok, "violation with slack {slack} on {a:?}");
        }
    }

    fn channel_from(taps: &[f64]) -> ChannelRealization {
        let v = DVector::from_iterator(taps.len(), taps.iter().map(|&t| Complex64::new(t, 0.0)));
        ChannelRealization::new(v, 1e-9, true).unwrap()
    }

    #[test]
    fn statements_on_reference_channels() {
        // Flat channel: every bound is defined and the orderings hold.
        let flat = channel_from(&[0.5; 8]);
        let rep = verify_statements(&flat, 0.7, &[1, 2, 4, 8]).unwrap();
        assert!(rep.margin_vs_single >= -1e-12);
        assert!(rep.margin_vs_full >= -1e-12);

        // Single-tap channel: strictly decreasing along the chain.
        let spike = channel_from(&[1.0, 0.0, 0.0, 0.0]);
        let rep = verify_statements(&spike, 0.7, &[1, 2, 4]).unwrap();
        assert!(rep.bounds[0].1 > rep.bounds[1].1);
        assert!(rep.bounds[1].1 > rep.bounds[2].1);

        // Null channel: all bounds zero.
        let zero = channel_from(&[0.0; 4]);
        let rep = verify_statements(&zero, 0.9, &[1, 2, 4]).unwrap();
        for &(_, b) in &rep.bounds {
            assert_eq!(b, 0.0);
        }
    }

    #[test]
    fn statements_chain_validation() {
        let ch = channel_from(&[0.4; 12]);
        assert!(verify_statements(&ch, 0.5, &[1, 5, 12]).is_err()); // 5 ∤ 12
        assert!(verify_statements(&ch, 0.5, &[2, 12]).is_err()); // missing 1
        assert!(verify_statements(&ch, 0.5, &[1, 6]).is_err()); // missing L
        assert!(verify_statements(&ch, 0.5, &[1, 6, 4, 12]).is_err()); // unsorted
        assert!(verify_statements(&ch, 0.5, &[1, 2, 3, 4, 6, 12]).is_ok());
    }

    #[test]
    fn statement_orderings_hold_on_random_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..50 {
            let taps: Vec<f64> = (0..24).map(|_| rng.gen::<f64>() - 0.5).collect();
            let ch = channel_from(&taps);
            let v = rng.gen::<f64>() * 3.0 + 1e-3;
            let rep = verify_statements(&ch, v, &[1, 2, 3, 4, 6, 8, 12, 24]).unwrap();
            assert!(
                rep.margin_vs_single >= -1e-12,
                "statement 1 margin {}",
                rep.margin_vs_single
            );
            assert!(
                rep.margin_vs_full >= -1e-12,
                "statement 2 margin {}",
                rep.margin_vs_full
            );
        }
    }
}
