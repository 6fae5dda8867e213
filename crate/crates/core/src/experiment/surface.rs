use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::analysis::delta_mse_surface;
use crate::error::{Error, Result};
use crate::estimators::{gse_optimal_alpha, GseMode, GseState, RlsState};
use crate::experiment::output::{ResultPayload, RunOutput, SurfaceResult};
use crate::experiment::rng::{substream, StreamKind};
use crate::experiment::sce::{sandwich_trace, sce_gram_xhz, twiddle_table};
use crate::experiment::spec::{ExperimentSpec, Scenario};
use crate::numerics::{GroupEnergies, GroupPartition};
use crate::sim::LinkContext;

/// Runs one two-group adaptive trajectory on a single channel realization and
/// emits the analytic MSE-difference surface it should converge into: the
/// surface is drawn with the true per-group channel energies and the
/// variance of the final RLS estimate, so the adaptive endpoint lands near
/// its minimum.
pub fn run_surface(spec: &ExperimentSpec) -> Result<RunOutput> {
    if spec.scenario != Scenario::Surface {
        return Err(Error::Config("spec is not a surface scenario".into()));
    }
    spec.validate()?;
    let params = spec.surface.as_ref().expect("validated above");

    let source = spec.channel.resolve()?;
    let mut chan_rng = substream(spec.system.seed, 0, StreamKind::Channel);
    let channel = source.realize(&mut chan_rng)?;
    let ctx = LinkContext::new(&spec.system, &channel)?;
    let l = channel.len();
    let m = spec.system.block_chips();
    let sigma2 = ctx.sigma2();
    let twiddle = twiddle_table(m);

    let partition = GroupPartition::new(l, 2)?;
    let mode = if params.adaptive == "gse-at" {
        GseMode::AutoTuned
    } else {
        GseMode::EstimatorBased
    };
    let mut gse = GseState::new(partition.clone(), mode, spec.gse.mu, spec.gse.mu_p)?;
    let mut rls = RlsState::new(l, spec.rls.lambda, spec.rls.delta)?;

    let mut bits_rng = substream(spec.system.seed, 0, StreamKind::Bits);
    let mut noise_rng = substream(spec.system.seed, 0, StreamKind::Noise);

    let lambda_sq = Complex64::new(spec.rls.lambda * spec.rls.lambda, 0.0);
    let mut weighted: DMatrix<Complex64> = DMatrix::zeros(l, l);

    for block in 0..spec.blocks {
        let bits = ctx.random_bits(&mut bits_rng);
        let frame = ctx.transmit_sce(block, &bits, &mut noise_rng)?;
        let prior = rls.estimate().clone();
        gse.step(&prior)?;
        let (gram, xh_z) = sce_gram_xhz(
            frame.delta_diag.as_ref().expect("sce frame"),
            &frame.z_freq,
            l,
            &twiddle,
        );
        rls.update_from_gram(&gram, &xh_z)?;
        weighted *= lambda_sq;
        weighted += &gram;
    }

    // Variance of the final RLS estimate and the matching equivalent noise
    // level of the two-group cost.
    let v_final = sigma2 * sandwich_trace(rls.corr(), &weighted);
    let sigma2_tilde = v_final / 2.0;
    let energies = GroupEnergies::from_vector(channel.taps(), &partition)?;

    let surf = delta_mse_surface(&energies, sigma2_tilde, params.grid_step)?;
    let opt_alpha = gse_optimal_alpha(&energies, sigma2_tilde)?;
    let (grid_sf1, grid_sf2, _) = surf.grid_minimum();
    let alpha: &DVector<f64> = gse.alpha();

    Ok(RunOutput::new(
        spec.clone(),
        ResultPayload::Surface(SurfaceResult {
            factors: surf.factors.clone(),
            values: surf.values.clone(),
            converged: [1.0 + alpha[0], 1.0 + alpha[1]],
            optimum: [1.0 + opt_alpha[0], 1.0 + opt_alpha[1]],
            grid_minimum: [grid_sf1, grid_sf2],
            sigma2_tilde,
            group_energies: [energies.values()[0], energies.values()[1]],
        }),
    ))
}
