//! Interactive browser views of the shrinkage estimator: the MSE floors
//! against SNR, the two-group MSE-difference surface, and a live
//! channel-estimation convergence run. Each export returns a JSON payload the
//! page renders onto a canvas.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gse_core::analysis::{delta_mse_surface, mse_lower_bound};
use gse_core::estimators::gse_optimal_alpha;
use gse_core::experiment::{
    run_sce_experiment, ChannelSpec, EstimatorSpec, ExperimentSpec, ResultPayload, Scenario,
};
use gse_core::numerics::GroupEnergies;
use gse_core::sim::SystemConfig;

fn to_json<T: Serialize>(value: &T) -> Result<String, JsError> {
    serde_json::to_string(value).map_err(|e| JsError::new(&e.to_string()))
}

fn err(e: gse_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[derive(Serialize)]
struct BoundsPanel {
    snr_db: Vec<f64>,
    crlb: Vec<f64>,
    bounds: Vec<BoundsCurve>,
}

#[derive(Serialize)]
struct BoundsCurve {
    groups: usize,
    values: Vec<f64>,
}

/// MSE floors over an SNR sweep for a handful of group counts, averaged over
/// a small seeded channel ensemble.
#[wasm_bindgen]
pub fn bounds_panel(
    seed: u64,
    snr_min: f64,
    snr_max: f64,
    points: usize,
    taps: usize,
    decay_rate: f64,
    trials: usize,
) -> Result<String, JsError> {
    if points < 2 || snr_max <= snr_min {
        return Err(JsError::new(
            "need an increasing SNR grid of at least two points",
        ));
    }
    let mut spec = ExperimentSpec::default_for(Scenario::Bounds);
    spec.trials = trials.clamp(1, 200);
    spec.system.seed = seed;
    spec.channel = ChannelSpec {
        profile: "exp_decay".into(),
        taps: taps.clamp(2, 200),
        rate: Some(decay_rate.max(0.0)),
        ..ChannelSpec::default()
    };
    let snr_db: Vec<f64> = (0..points)
        .map(|i| snr_min + (snr_max - snr_min) * i as f64 / (points - 1) as f64)
        .collect();
    let group_counts: Vec<usize> = [1usize, 2, 10, spec.channel.taps]
        .into_iter()
        .filter(|&s| s <= spec.channel.taps)
        .collect();
    spec.bounds = Some(gse_core::experiment::BoundsParams {
        snr_db: snr_db.clone(),
        group_counts: group_counts.clone(),
    });
    spec.validate().map_err(err)?;

    let out = gse_core::experiment::run_bounds(&spec).map_err(err)?;
    let ResultPayload::Bounds(result) = &out.results else {
        return Err(JsError::new("unexpected payload"));
    };
    let mut crlb = Vec::new();
    let mut bounds: Vec<BoundsCurve> = group_counts
        .iter()
        .map(|&groups| BoundsCurve {
            groups,
            values: Vec::new(),
        })
        .collect();
    for row in &result.rows {
        match (row.quantity.as_str(), row.s) {
            ("crlb", None) => crlb.push(row.value),
            ("bound", Some(s)) => {
                if let Some(curve) = bounds.iter_mut().find(|c| c.groups == s) {
                    curve.values.push(row.value);
                }
            }
            _ => {}
        }
    }
    to_json(&BoundsPanel {
        snr_db,
        crlb,
        bounds,
    })
}

#[derive(Serialize)]
struct SurfacePanel {
    factors: Vec<f64>,
    /// Row-major δMSE over (sf1, sf2).
    values: Vec<f64>,
    optimum: [f64; 2],
    minimum_value: f64,
    unbiased_mse: f64,
}

/// Two-group MSE-difference surface for direct parameter exploration:
/// `energy_split` is the first group's share of the unit channel energy and
/// `sigma2` the equivalent per-group noise variance.
#[wasm_bindgen]
pub fn surface_panel(energy_split: f64, sigma2: f64, step: f64) -> Result<String, JsError> {
    let split = energy_split.clamp(0.0, 1.0);
    let energies = GroupEnergies::from_values(vec![split, 1.0 - split]).map_err(err)?;
    let sigma2 = sigma2.max(0.0);
    let surf = delta_mse_surface(&energies, sigma2, step.clamp(1e-3, 0.1)).map_err(err)?;
    let opt = gse_optimal_alpha(&energies, sigma2).map_err(err)?;
    let bound = mse_lower_bound(2.0 * sigma2, &energies, 2).map_err(err)?;
    let flat: Vec<f64> = surf.values.iter().flatten().copied().collect();
    to_json(&SurfacePanel {
        factors: surf.factors.clone(),
        values: flat,
        optimum: [1.0 + opt[0], 1.0 + opt[1]],
        minimum_value: bound - 2.0 * sigma2,
        unbiased_mse: 2.0 * sigma2,
    })
}

#[derive(Serialize)]
struct ConvergencePanel {
    blocks: usize,
    curves: Vec<NamedCurve>,
    references: Vec<NamedCurve>,
}

#[derive(Serialize)]
struct NamedCurve {
    name: String,
    blocks: Option<Vec<usize>>,
    values: Vec<f64>,
}

/// Live channel-estimation run on a small link: RLS against the shrinkage
/// variants, with the variance and floor references.
#[wasm_bindgen]
pub fn sce_panel(
    seed: u64,
    snr_db: f64,
    blocks: usize,
    taps: usize,
    decay_rate: f64,
) -> Result<String, JsError> {
    let taps = taps.clamp(4, 48);
    let mut spec = ExperimentSpec::default_for(Scenario::Sce);
    spec.trials = 1;
    spec.blocks = blocks.clamp(10, 600);
    spec.system = SystemConfig {
        symbols_per_block: 16,
        spreading_gain: 4,
        users: 1,
        cp_len_chips: taps,
        samples_per_chip: 1,
        snr_db: snr_db.clamp(-10.0, 30.0),
        seed,
        ..SystemConfig::default()
    };
    spec.channel = ChannelSpec {
        profile: "exp_decay".into(),
        taps,
        rate: Some(decay_rate.max(0.0)),
        ..ChannelSpec::default()
    };
    spec.estimators = vec![
        EstimatorSpec::rls(),
        EstimatorSpec::gse_eb(1),
        EstimatorSpec::gse_eb(taps),
        EstimatorSpec::gse_at(taps),
    ];
    spec.validate().map_err(err)?;

    let out = run_sce_experiment(&spec).map_err(err)?;
    let ResultPayload::Trajectories(traj) = &out.results else {
        return Err(JsError::new("unexpected payload"));
    };
    let convert = |s: &gse_core::experiment::Series| NamedCurve {
        name: format!("{} {}", s.estimator, s.metric),
        blocks: s.blocks.clone(),
        values: s.values.clone(),
    };
    to_json(&ConvergencePanel {
        blocks: spec.blocks,
        curves: traj.series.iter().map(convert).collect(),
        references: traj.references.iter().map(convert).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_panel_produces_ordered_curves() {
        let text = bounds_panel(3, 0.0, 16.0, 5, 40, 0.1, 10).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let crlb = v["crlb"].as_array().unwrap();
        assert_eq!(crlb.len(), 5);
        let bounds = v["bounds"].as_array().unwrap();
        // The full split dominates the single group at every SNR.
        let single = bounds.iter().find(|b| b["groups"] == 1).unwrap()["values"]
            .as_array()
            .unwrap()
            .clone();
        let full = bounds.iter().find(|b| b["groups"] == 40).unwrap()["values"]
            .as_array()
            .unwrap()
            .clone();
        for i in 0..5 {
            let s = single[i].as_f64().unwrap();
            let f = full[i].as_f64().unwrap();
            let v0 = crlb[i].as_f64().unwrap();
            assert!(f <= s + 1e-12 && s <= v0 + 1e-12);
        }
    }

    #[test]
    fn surface_panel_matches_grid_shape() {
        let text = surface_panel(0.7, 0.3, 0.02).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let k = v["factors"].as_array().unwrap().len();
        assert_eq!(k, 50);
        assert_eq!(v["values"].as_array().unwrap().len(), k * k);
        // Corner value at (1,1) is exactly zero.
        assert_eq!(
            v["values"].as_array().unwrap()[k * k - 1].as_f64().unwrap(),
            0.0
        );
        let opt = v["optimum"].as_array().unwrap();
        for axis in 0..2 {
            let sf = opt[axis].as_f64().unwrap();
            assert!(sf > 0.0 && sf < 1.0);
        }
    }

    #[test]
    fn sce_panel_runs_a_small_link() {
        let text = sce_panel(1, 0.0, 40, 12, 0.15).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["blocks"], 40);
        let curves = v["curves"].as_array().unwrap();
        assert_eq!(curves.len(), 4);
        for curve in curves {
            assert_eq!(curve["values"].as_array().unwrap().len(), 40);
        }
        assert!(!v["references"].as_array().unwrap().is_empty());
    }
}
