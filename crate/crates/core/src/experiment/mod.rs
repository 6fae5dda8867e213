//! Seeded Monte Carlo experiment runners over the simulated link, with
//! deterministic aggregation and bit-stable CSV/JSON emission.

mod bounds;
mod output;
mod recv;
mod rng;
mod sce;
mod spec;
mod surface;

pub use bounds::run_bounds;
pub use output::{
    run_id, write_outputs, BoundsResult, BoundsRow, DerivedMeta, OutputFormat, ResultPayload,
    RunOutput, Series, SurfaceResult, TrajectoryResult,
};
pub use recv::run_receiver_experiment;
pub use rng::{substream, StreamKind};
pub use sce::run_sce_experiment;
pub use spec::{
    BoundsParams, ChannelSource, ChannelSpec, EstimatorKind, EstimatorSpec, ExperimentSpec,
    GseParams, ReceiverParams, RlsParams, Scenario, SurfaceParams,
};
pub use surface::run_surface;

use crate::error::Result;

/// Dispatches a validated spec to its scenario runner.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput> {
    match spec.scenario {
        Scenario::Sce => run_sce_experiment(spec),
        Scenario::Receiver => run_receiver_experiment(spec),
        Scenario::Bounds => run_bounds(spec),
        Scenario::Surface => run_surface(spec),
    }
}

/// Maps trials to results, in parallel when the `parallel` feature is on.
/// Output order is the trial order, so aggregation does not depend on the
/// thread schedule.
pub(crate) fn par_map_trials<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Per-block mean over trials, summed in trial order.
pub(crate) fn mean_over_trials(per_trial: &[Vec<f64>]) -> Vec<f64> {
    if per_trial.is_empty() {
        return Vec::new();
    }
    let blocks = per_trial[0].len();
    let mut acc = vec![0.0; blocks];
    for curve in per_trial {
        debug_assert_eq!(curve.len(), blocks);
        for (a, v) in acc.iter_mut().zip(curve.iter()) {
            *a += v;
        }
    }
    let scale = 1.0 / per_trial.len() as f64;
    for a in acc.iter_mut() {
        *a *= scale;
    }
    acc
}
