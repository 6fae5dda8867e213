use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimators::RlsState;
use crate::experiment::output::{ResultPayload, RunOutput, Series, TrajectoryResult};
use crate::experiment::rng::{substream, StreamKind};
use crate::experiment::sce::{
    build_gse_slots, distinct_group_counts, inverse_trace, sandwich_trace,
};
use crate::experiment::spec::{EstimatorKind, ExperimentSpec, Scenario};
use crate::experiment::{mean_over_trials, par_map_trials};
use crate::numerics::{GroupEnergies, GroupPartition};
use crate::sim::{detect, mmse_min_cost, mmse_weights_ideal, LinkContext};

struct RecvTrialCurves {
    nmse: Vec<Vec<f64>>,
    crlb: Vec<f64>,
    rls_var: Vec<f64>,
    bounds: Vec<Vec<f64>>,
    errors: Vec<u64>,
    data_bits: u64,
}

/// YᴴY assembled straight from the received block: the data matrix columns
/// are orthonormal symbol-DFT columns scaled by z, so the Gram matrix is
/// conj(z_m)·z_{m'} on the residue-class pattern m ≡ m' (mod N) and zero
/// elsewhere.
fn receiver_gram(z: &DVector<Complex64>, n: usize) -> DMatrix<Complex64> {
    let m = z.len();
    let mut gram = DMatrix::zeros(m, m);
    for row in 0..m {
        let zr = z[row].conj();
        for col in ((row % n)..m).step_by(n) {
            gram[(row, col)] = zr * z[col];
        }
    }
    gram
}

/// Yᴴb for the desired user's symbol vector: conj(z_m)·(F_N·b)_{m mod N}.
fn receiver_xh_b(
    z: &DVector<Complex64>,
    f_n: &DMatrix<Complex64>,
    bits: &DVector<f64>,
) -> DVector<Complex64> {
    let n = bits.len();
    let b = DVector::from_fn(n, |i, _| Complex64::new(bits[i], 0.0));
    let fb = f_n * b;
    DVector::from_fn(z.len(), |row, _| z[row].conj() * fb[row % n])
}

/// Nc×Nc residue-class block of an M×M matrix with the mod-N structure.
fn extract_class(
    mat: &DMatrix<Complex64>,
    class: usize,
    n: usize,
    nc: usize,
) -> DMatrix<Complex64> {
    DMatrix::from_fn(nc, nc, |i, j| mat[(class + i * n, class + j * n)])
}

fn run_recv_trial(spec: &ExperimentSpec, trial: usize) -> Result<RecvTrialCurves> {
    let source = spec.channel.resolve()?;
    let mut chan_rng = substream(spec.system.seed, trial as u64, StreamKind::Channel);
    let channel = source.realize(&mut chan_rng)?;
    let ctx = LinkContext::new(&spec.system, &channel)?;

    let n = spec.system.symbols_per_block;
    let nc = spec.system.spreading_gain;
    let m = spec.system.block_chips();
    let blocks = spec.blocks;
    let data_blocks = spec.receiver.as_ref().map(|r| r.data_blocks).unwrap_or(0);

    // Oracle quantities: the ideal filter, its residual cost, and the
    // per-symbol measurement-error variance feeding the reference curves.
    let w_e = mmse_weights_ideal(&ctx, ctx.sigma2())?;
    let w_mmse = w_e.map(|c| c.conj());
    let sigma2_e = mmse_min_cost(&ctx, ctx.sigma2())? / n as f64;

    let mut rls = RlsState::new(m, spec.rls.lambda, spec.rls.delta)?;
    let mut gses = build_gse_slots(spec, m)?;
    let group_counts = distinct_group_counts(spec)?;
    let energies: Vec<GroupEnergies> = group_counts
        .iter()
        .map(|&s| {
            let p = GroupPartition::new(m, s)?;
            GroupEnergies::from_vector(&w_mmse, &p)
        })
        .collect::<Result<_>>()?;

    let mut bits_rng = substream(spec.system.seed, trial as u64, StreamKind::Bits);
    let mut noise_rng = substream(spec.system.seed, trial as u64, StreamKind::Noise);

    let mut nmse = vec![vec![0.0; blocks]; spec.estimators.len()];
    let mut crlb = vec![0.0; blocks];
    let mut rls_var = vec![0.0; blocks];
    let mut bound_curves = vec![vec![0.0; blocks]; group_counts.len()];

    // λ²-weighted and unweighted Gram accumulators, kept per residue class.
    let lambda_sq = Complex64::new(spec.rls.lambda * spec.rls.lambda, 0.0);
    let mut weighted: Vec<DMatrix<Complex64>> = (0..n).map(|_| DMatrix::zeros(nc, nc)).collect();
    let mut gram_sum: Vec<DMatrix<Complex64>> = (0..n).map(|_| DMatrix::zeros(nc, nc)).collect();

    for block in 0..blocks {
        let bits = ctx.random_bits(&mut bits_rng);
        let frame = ctx.transmit_receiver(block, &bits, &mut noise_rng)?;
        let y = frame.y_mat.as_ref().expect("receiver frame carries Y");
        let b1 = bits.row(0).transpose();
        let b1_c = DVector::from_fn(n, |i, _| Complex64::new(b1[i], 0.0));

        // Score with the prior estimates (prediction error on this block).
        let prior = rls.estimate().clone();
        for (idx, est) in spec.estimators.iter().enumerate() {
            let w = match est.resolve()? {
                EstimatorKind::Rls => prior.clone(),
                EstimatorKind::GseEb { .. } | EstimatorKind::GseAt { .. } => {
                    let slot = gses
                        .iter()
                        .find(|slot| slot.index == idx)
                        .expect("slot built for every gse estimator");
                    slot.state.apply(&prior)?
                }
                EstimatorKind::IdealMmse => w_mmse.clone(),
            };
            let soft = y * w;
            nmse[idx][block] = (&b1_c - soft).norm_squared() / b1_c.norm_squared();
        }
        for slot in gses.iter_mut() {
            slot.state.step(&prior)?;
        }

        // Absorb the block.
        let gram = receiver_gram(&frame.z_freq, n);
        let xh_b = receiver_xh_b(&frame.z_freq, ctx.dft_n(), &b1);
        rls.update_from_gram(&gram, &xh_b)?;
        for class in 0..n {
            let block_gram = extract_class(&gram, class, n, nc);
            weighted[class] *= lambda_sq;
            weighted[class] += &block_gram;
            gram_sum[class] += &block_gram;
        }

        // References, class by class.
        let mut inv_tr = 0.0;
        let mut var_tr = 0.0;
        for class in 0..n {
            inv_tr += inverse_trace(&gram_sum[class]);
            let r_class = extract_class(rls.corr(), class, n, nc);
            var_tr += sandwich_trace(&r_class, &weighted[class]);
        }
        crlb[block] = sigma2_e * inv_tr;
        let v = sigma2_e * var_tr;
        rls_var[block] = v;
        for (sidx, (&s, e)) in group_counts.iter().zip(energies.iter()).enumerate() {
            bound_curves[sidx][block] = crate::analysis::mse_lower_bound(v, e, s)?;
        }
    }

    // Post-training uncoded BER with frozen estimators.
    let final_est = rls.estimate().clone();
    let mut final_weights = Vec::with_capacity(spec.estimators.len());
    for (idx, est) in spec.estimators.iter().enumerate() {
        let w = match est.resolve()? {
            EstimatorKind::Rls => final_est.clone(),
            EstimatorKind::GseEb { .. } | EstimatorKind::GseAt { .. } => {
                let slot = gses
                    .iter()
                    .find(|slot| slot.index == idx)
                    .expect("slot built for every gse estimator");
                slot.state.apply(&final_est)?
            }
            EstimatorKind::IdealMmse => w_mmse.clone(),
        };
        final_weights.push(w);
    }
    let mut errors = vec![0u64; spec.estimators.len()];
    for block in 0..data_blocks {
        let bits = ctx.random_bits(&mut bits_rng);
        let frame = ctx.transmit_receiver(blocks + block, &bits, &mut noise_rng)?;
        let y = frame.y_mat.as_ref().expect("receiver frame carries Y");
        for (idx, w) in final_weights.iter().enumerate() {
            let (hard, _) = detect(y, w)?;
            for sym in 0..n {
                if hard[sym] != bits[(0, sym)] {
                    errors[idx] += 1;
                }
            }
        }
    }

    Ok(RecvTrialCurves {
        nmse,
        crlb,
        rls_var,
        bounds: bound_curves,
        errors,
        data_bits: (data_blocks * n) as u64,
    })
}

pub fn run_receiver_experiment(spec: &ExperimentSpec) -> Result<RunOutput> {
    if spec.scenario != Scenario::Receiver {
        return Err(Error::Config("spec is not a receiver scenario".into()));
    }
    spec.validate()?;
    let trials = par_map_trials(spec.trials, |t| run_recv_trial(spec, t))?;

    let group_counts = distinct_group_counts(spec)?;
    let mut series = Vec::new();
    for (idx, est) in spec.estimators.iter().enumerate() {
        let curves: Vec<Vec<f64>> = trials.iter().map(|t| t.nmse[idx].clone()).collect();
        series.push(Series::dense(est.name(), "nmse", mean_over_trials(&curves)));
    }
    let mut references = Vec::new();
    references.push(Series::dense(
        "analytic",
        "crlb",
        mean_over_trials(&trials.iter().map(|t| t.crlb.clone()).collect::<Vec<_>>()),
    ));
    references.push(Series::dense(
        "analytic",
        "rls-variance",
        mean_over_trials(&trials.iter().map(|t| t.rls_var.clone()).collect::<Vec<_>>()),
    ));
    for (sidx, &s) in group_counts.iter().enumerate() {
        references.push(Series::dense(
            "analytic",
            format!("bound-s{s}"),
            mean_over_trials(
                &trials
                    .iter()
                    .map(|t| t.bounds[sidx].clone())
                    .collect::<Vec<_>>(),
            ),
        ));
    }

    let total_bits: u64 = trials.iter().map(|t| t.data_bits).sum();
    let mut ber = Vec::new();
    if total_bits > 0 {
        for (idx, est) in spec.estimators.iter().enumerate() {
            let total_errors: u64 = trials.iter().map(|t| t.errors[idx]).sum();
            ber.push((est.name(), total_errors as f64 / total_bits as f64));
        }
    }

    Ok(RunOutput::new(
        spec.clone(),
        ResultPayload::Trajectories(TrajectoryResult {
            blocks: spec.blocks,
            series,
            references,
            ber,
        }),
    ))
}
