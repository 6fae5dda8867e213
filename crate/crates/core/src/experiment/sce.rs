use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::estimators::{GseMode, GseState, RlsState};
use crate::experiment::output::{ResultPayload, RunOutput, Series, TrajectoryResult};
use crate::experiment::rng::{substream, StreamKind};
use crate::experiment::spec::{EstimatorKind, ExperimentSpec, Scenario};
use crate::experiment::{mean_over_trials, par_map_trials};
use crate::numerics::{ChannelRealization, GroupEnergies, GroupPartition};
use crate::sim::LinkContext;

/// Per-trial learning curves; the runner averages these over trials. The
/// reference columns follow the decimated block grid of
/// [`reference_grid`].
pub(crate) struct SceTrialCurves {
    pub mse: Vec<Vec<f64>>,
    pub crlb: Vec<f64>,
    pub rls_var: Vec<f64>,
    pub bounds: Vec<Vec<f64>>,
}

/// Trailing window of blocks over which the reference curves always run at
/// full rate (steady-state comparisons live there).
pub(crate) const REFERENCE_TAIL: usize = 120;

/// Blocks (0-based) at which the analytic reference curves are evaluated:
/// roughly 256 points across the run plus every block of the final window.
/// Estimator trajectories are always per-block; only the references are
/// decimated, since each point costs a couple of dense inverses.
pub(crate) fn reference_grid(blocks: usize) -> Vec<usize> {
    let stride = (blocks / 256).max(1);
    let tail_start = blocks.saturating_sub(REFERENCE_TAIL);
    let mut grid: Vec<usize> = (0..blocks)
        .filter(|b| b % stride == stride - 1 || *b >= tail_start || *b == 0 || *b == blocks - 1)
        .collect();
    grid.dedup();
    grid
}

/// Table of e^{+j2π·m/M} used to assemble Gram matrices and
/// cross-correlations of the structured regressor without forming it.
pub(crate) fn twiddle_table(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|idx| Complex64::from_polar(1.0, 2.0 * PI * idx as f64 / m as f64))
        .collect()
}

/// XᴴX and Xᴴz of the block regressor X = √M·Δ·F_{M,L}, computed from the
/// diagonal alone: XᴴX is Hermitian Toeplitz with first column
/// t_k = Σ_a |δ_a|²·e^{+j2πak/M}, and (Xᴴz)_l = Σ_a δ_a*·z_a·e^{+j2πal/M}.
pub(crate) fn sce_gram_xhz(
    delta: &DVector<Complex64>,
    z: &DVector<Complex64>,
    l: usize,
    twiddle: &[Complex64],
) -> (DMatrix<Complex64>, DVector<Complex64>) {
    let m = delta.len();
    debug_assert_eq!(z.len(), m);
    debug_assert_eq!(twiddle.len(), m);

    let mut t = vec![Complex64::new(0.0, 0.0); l];
    let mut xh_z = DVector::zeros(l);
    let d: Vec<f64> = (0..m).map(|a| delta[a].norm_sqr()).collect();
    let u: Vec<Complex64> = (0..m).map(|a| delta[a].conj() * z[a]).collect();
    for k in 0..l {
        let mut acc_t = Complex64::new(0.0, 0.0);
        let mut acc_u = Complex64::new(0.0, 0.0);
        let mut idx = 0usize;
        for a in 0..m {
            let w = twiddle[idx];
            acc_t += w * d[a];
            acc_u += w * u[a];
            idx += k;
            if idx >= m {
                idx -= m;
            }
        }
        t[k] = acc_t;
        xh_z[k] = acc_u;
    }

    let gram = DMatrix::from_fn(l, l, |row, col| {
        if row >= col {
            t[row - col]
        } else {
            t[col - row].conj()
        }
    });
    (gram, xh_z)
}

/// Trace of the inverse of a Hermitian positive-definite matrix; NaN when the
/// factorization fails (no data yet).
pub(crate) fn inverse_trace(mat: &DMatrix<Complex64>) -> f64 {
    match Cholesky::new(mat.clone()) {
        Some(chol) => {
            let inv = chol.inverse();
            (0..inv.nrows()).map(|i| inv[(i, i)].re).sum()
        }
        None => f64::NAN,
    }
}

/// tr(R⁻¹·A·R⁻¹) for Hermitian positive-definite R: the variance shape of a
/// weighted least-squares estimate with Gram matrix R and noise-weighted
/// Gram A.
pub(crate) fn sandwich_trace(r: &DMatrix<Complex64>, a: &DMatrix<Complex64>) -> f64 {
    match Cholesky::new(r.clone()) {
        Some(chol) => {
            let inv = chol.inverse();
            let left = &inv * a;
            let dim = inv.nrows();
            let mut acc = 0.0;
            for row in 0..dim {
                for col in 0..dim {
                    acc += (left[(row, col)] * inv[(col, row)]).re;
                }
            }
            acc
        }
        None => f64::NAN,
    }
}

/// Shrinkage state plus its position in the estimator roster.
pub(crate) struct GseSlot {
    pub index: usize,
    pub state: GseState,
}

pub(crate) fn build_gse_slots(spec: &ExperimentSpec, param_len: usize) -> Result<Vec<GseSlot>> {
    let mut slots = Vec::new();
    for (index, est) in spec.estimators.iter().enumerate() {
        let (mode, groups) = match est.resolve()? {
            EstimatorKind::GseEb { groups } => (GseMode::EstimatorBased, groups),
            EstimatorKind::GseAt { groups } => (GseMode::AutoTuned, groups),
            _ => continue,
        };
        let partition = GroupPartition::new(param_len, groups)?;
        slots.push(GseSlot {
            index,
            state: GseState::new(partition, mode, spec.gse.mu, spec.gse.mu_p)?,
        });
    }
    Ok(slots)
}

/// Distinct group counts of the shrinkage estimators, ascending; these get a
/// lower-bound reference curve each.
pub(crate) fn distinct_group_counts(spec: &ExperimentSpec) -> Result<Vec<usize>> {
    let mut counts = std::collections::BTreeSet::new();
    for est in &spec.estimators {
        match est.resolve()? {
            EstimatorKind::GseEb { groups } | EstimatorKind::GseAt { groups } => {
                counts.insert(groups);
            }
            _ => {}
        }
    }
    Ok(counts.into_iter().collect())
}

pub(crate) fn run_sce_trial(spec: &ExperimentSpec, trial: usize) -> Result<SceTrialCurves> {
    let source = spec.channel.resolve()?;
    let mut chan_rng = substream(spec.system.seed, trial as u64, StreamKind::Channel);
    let channel = source.realize(&mut chan_rng)?;
    let ctx = LinkContext::new(&spec.system, &channel)?;
    run_sce_trial_on(spec, trial, &channel, &ctx)
}

/// Core SCE loop for one channel realization. Estimates are scored before
/// absorbing each block (the estimate shown at block i has seen blocks < i);
/// the reference curves at block i describe the estimator after i blocks.
pub(crate) fn run_sce_trial_on(
    spec: &ExperimentSpec,
    trial: usize,
    channel: &ChannelRealization,
    ctx: &LinkContext,
) -> Result<SceTrialCurves> {
    let l = channel.len();
    let m = ctx.cfg().block_chips();
    if l > m {
        return Err(Error::Config(format!(
            "channel of {l} taps cannot be estimated from {m}-chip blocks"
        )));
    }
    let blocks = spec.blocks;
    let sigma2 = ctx.sigma2();
    let twiddle = twiddle_table(m);

    let mut rls = RlsState::new(l, spec.rls.lambda, spec.rls.delta)?;
    let mut gses = build_gse_slots(spec, l)?;
    let group_counts = distinct_group_counts(spec)?;
    let energies: Vec<GroupEnergies> = group_counts
        .iter()
        .map(|&s| {
            let p = GroupPartition::new(l, s)?;
            GroupEnergies::from_vector(channel.taps(), &p)
        })
        .collect::<Result<_>>()?;

    let mut bits_rng = substream(spec.system.seed, trial as u64, StreamKind::Bits);
    let mut noise_rng = substream(spec.system.seed, trial as u64, StreamKind::Noise);

    let grid = reference_grid(blocks);
    let mut mse = vec![vec![0.0; blocks]; spec.estimators.len()];
    let mut crlb = Vec::with_capacity(grid.len());
    let mut rls_var = Vec::with_capacity(grid.len());
    let mut bound_curves = vec![Vec::with_capacity(grid.len()); group_counts.len()];
    let mut next_ref = 0usize;

    // Unweighted and λ²-weighted Gram accumulators behind the reference
    // curves.
    let mut gram_sum: DMatrix<Complex64> = DMatrix::zeros(l, l);
    let mut weighted: DMatrix<Complex64> = DMatrix::zeros(l, l);
    let lambda_sq = Complex64::new(spec.rls.lambda * spec.rls.lambda, 0.0);

    for block in 0..blocks {
        let bits = ctx.random_bits(&mut bits_rng);
        let frame = ctx.transmit_sce(block, &bits, &mut noise_rng)?;
        let delta = frame.delta_diag.as_ref().expect("sce frame carries delta");

        // Score with the prior estimates.
        let prior = rls.estimate().clone();
        for (idx, est) in spec.estimators.iter().enumerate() {
            let value = match est.resolve()? {
                EstimatorKind::Rls => (channel.taps() - &prior).norm_squared(),
                EstimatorKind::GseEb { .. } | EstimatorKind::GseAt { .. } => {
                    let slot = gses
                        .iter()
                        .find(|slot| slot.index == idx)
                        .expect("slot built for every gse estimator");
                    (channel.taps() - slot.state.apply(&prior)?).norm_squared()
                }
                EstimatorKind::IdealMmse => unreachable!("rejected by validation"),
            };
            mse[idx][block] = value;
        }
        for slot in gses.iter_mut() {
            slot.state.step(&prior)?;
        }

        // Absorb the block.
        let (gram, xh_z) = sce_gram_xhz(delta, &frame.z_freq, l, &twiddle);
        rls.update_from_gram(&gram, &xh_z)?;
        gram_sum += &gram;
        weighted *= lambda_sq;
        weighted += &gram;

        // References, on the decimated grid.
        if next_ref < grid.len() && grid[next_ref] == block {
            next_ref += 1;
            crlb.push(sigma2 * inverse_trace(&gram_sum));
            let v = sigma2 * sandwich_trace(rls.corr(), &weighted);
            rls_var.push(v);
            for (sidx, (&s, e)) in group_counts.iter().zip(energies.iter()).enumerate() {
                bound_curves[sidx].push(crate::analysis::mse_lower_bound(v, e, s)?);
            }
        }
    }

    Ok(SceTrialCurves {
        mse,
        crlb,
        rls_var,
        bounds: bound_curves,
    })
}

pub fn run_sce_experiment(spec: &ExperimentSpec) -> Result<RunOutput> {
    if spec.scenario != Scenario::Sce {
        return Err(Error::Config("spec is not an sce scenario".into()));
    }
    spec.validate()?;
    let trials = par_map_trials(spec.trials, |t| run_sce_trial(spec, t))?;

    let group_counts = distinct_group_counts(spec)?;
    let ref_blocks: Vec<usize> = reference_grid(spec.blocks).iter().map(|b| b + 1).collect();
    let mut series = Vec::new();
    for (idx, est) in spec.estimators.iter().enumerate() {
        let curves: Vec<Vec<f64>> = trials.iter().map(|t| t.mse[idx].clone()).collect();
        series.push(Series::dense(est.name(), "mse", mean_over_trials(&curves)));
    }
    let mut references = Vec::new();
    references.push(Series::sampled(
        "analytic",
        "crlb",
        ref_blocks.clone(),
        mean_over_trials(&trials.iter().map(|t| t.crlb.clone()).collect::<Vec<_>>()),
    ));
    references.push(Series::sampled(
        "analytic",
        "rls-variance",
        ref_blocks.clone(),
        mean_over_trials(&trials.iter().map(|t| t.rls_var.clone()).collect::<Vec<_>>()),
    ));
    for (sidx, &s) in group_counts.iter().enumerate() {
        references.push(Series::sampled(
            "analytic",
            format!("bound-s{s}"),
            ref_blocks.clone(),
            mean_over_trials(
                &trials
                    .iter()
                    .map(|t| t.bounds[sidx].clone())
                    .collect::<Vec<_>>(),
            ),
        ));
    }

    Ok(RunOutput::new(
        spec.clone(),
        ResultPayload::Trajectories(TrajectoryResult {
            blocks: spec.blocks,
            series,
            references,
            ber: Vec::new(),
        }),
    ))
}
