//! Emission-side checks of the experiment layer: schema stability, the
//! consistency of the emitted references with their defining estimators, and
//! config handling.

use nalgebra::DMatrix;
use num_complex::Complex64;

use gse_core::estimators::{crlb_variance, sce_regression};
use gse_core::experiment::{
    run, run_id, substream, write_outputs, EstimatorSpec, ExperimentSpec, OutputFormat,
    ResultPayload, Scenario, StreamKind,
};
use gse_core::sim::{LinkContext, SystemConfig};

fn tiny_sce_spec() -> ExperimentSpec {
    let mut spec = ExperimentSpec::default_for(Scenario::Sce);
    spec.trials = 1;
    spec.blocks = 8;
    spec.system = SystemConfig {
        symbols_per_block: 8,
        spreading_gain: 4,
        users: 1,
        cp_len_chips: 16,
        samples_per_chip: 1,
        snr_db: 3.0,
        seed: 5,
        ..SystemConfig::default()
    };
    spec.channel.taps = 6;
    spec.estimators = vec![EstimatorSpec::rls(), EstimatorSpec::gse_eb(3)];
    spec.validate().unwrap();
    spec
}

#[test]
fn emitted_crlb_matches_stacked_regressor_ensemble() {
    let spec = tiny_sce_spec();
    let out = run(&spec).unwrap();
    let ResultPayload::Trajectories(traj) = &out.results else {
        panic!("expected trajectories")
    };
    let crlb = traj.references.iter().find(|s| s.metric == "crlb").unwrap();

    // Replay the trial's frames and stack the dense regressors.
    let source = spec.channel.resolve().unwrap();
    let mut chan_rng = substream(spec.system.seed, 0, StreamKind::Channel);
    let channel = source.realize(&mut chan_rng).unwrap();
    let ctx = LinkContext::new(&spec.system, &channel).unwrap();
    let l = channel.len();
    let m = spec.system.block_chips();
    let f_ml = ctx.dft().partial(l).unwrap();
    let mut bits_rng = substream(spec.system.seed, 0, StreamKind::Bits);
    let mut noise_rng = substream(spec.system.seed, 0, StreamKind::Noise);

    let mut stack = DMatrix::<Complex64>::zeros(0, l);
    for (idx, _) in crlb.values.iter().enumerate() {
        let block = crlb.block_at(idx);
        while stack.nrows() < block * m {
            let bits = ctx.random_bits(&mut bits_rng);
            let frame = ctx.transmit_sce(0, &bits, &mut noise_rng).unwrap();
            let x = sce_regression(frame.delta_diag.as_ref().unwrap(), &f_ml).unwrap();
            stack = DMatrix::from_fn(stack.nrows() + m, l, |r, c| {
                if r < stack.nrows() {
                    stack[(r, c)]
                } else {
                    x[(r - stack.nrows(), c)]
                }
            });
        }
        let want = crlb_variance(&stack, ctx.sigma2()).unwrap();
        let got = crlb.values[idx];
        assert!(
            (got - want).abs() <= 1e-10 * want.max(1.0),
            "block {block}: emitted {got}, ensemble {want}"
        );
    }
}

#[test]
fn csv_schemas_are_stable() {
    let dir = tempfile::tempdir().unwrap();

    let spec = tiny_sce_spec();
    let out = run(&spec).unwrap();
    let paths = write_outputs(dir.path(), OutputFormat::Csv, &out).unwrap();
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    assert!(text.starts_with("block,estimator,metric,value\n"));
    assert!(text.lines().count() > spec.blocks);

    let mut bounds = ExperimentSpec::default_for(Scenario::Bounds);
    bounds.trials = 2;
    bounds.system.seed = 3;
    bounds.channel.taps = 10;
    bounds.bounds = Some(gse_core::experiment::BoundsParams {
        snr_db: vec![0.0, 8.0],
        group_counts: vec![1, 10],
    });
    bounds.validate().unwrap();
    let out = run(&bounds).unwrap();
    let paths = write_outputs(dir.path(), OutputFormat::Csv, &out).unwrap();
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    assert!(text.starts_with("snr_db,quantity,S,value\n"));
    // crlb rows leave the group column empty.
    assert!(text.lines().any(|l| l.contains(",crlb,,")));

    let mut surface = ExperimentSpec::default_for(Scenario::Surface);
    surface.blocks = 12;
    surface.channel.taps = 8;
    surface.system = SystemConfig {
        symbols_per_block: 8,
        spreading_gain: 4,
        users: 1,
        cp_len_chips: 16,
        samples_per_chip: 1,
        seed: 2,
        ..SystemConfig::default()
    };
    surface.validate().unwrap();
    let out = run(&surface).unwrap();
    let paths = write_outputs(dir.path(), OutputFormat::Csv, &out).unwrap();
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    assert!(text.starts_with("sf1,sf2,delta_mse\n"));
    // The corner (1,1) carries exactly zero.
    let last = text.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    assert_eq!(fields[0].parse::<f64>().unwrap(), 1.0);
    assert_eq!(fields[1].parse::<f64>().unwrap(), 1.0);
    assert_eq!(fields[2].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn json_payload_carries_spec_and_run_id() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_sce_spec();
    let out = run(&spec).unwrap();
    assert_eq!(out.run_id, run_id(&spec));
    let paths = write_outputs(dir.path(), OutputFormat::Json, &out).unwrap();
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["run_id"].as_str().unwrap(), out.run_id);
    assert_eq!(value["spec"]["scenario"], "sce");
    assert!(value["results"]["series"].is_array());
    let name = paths[0].file_name().unwrap().to_string_lossy().to_string();
    assert_eq!(name, format!("sce-{}.json", out.run_id));
}

#[test]
fn noiseless_sce_mse_collapses() {
    // With the noise 300 dB down and a negligible initialization bias the
    // RLS learning curve must reach exact identification within the run.
    let mut spec = tiny_sce_spec();
    spec.blocks = 20;
    spec.system.snr_db = 300.0;
    spec.rls.delta = 1e-9;
    spec.estimators = vec![EstimatorSpec::rls()];
    spec.validate().unwrap();
    let out = run(&spec).unwrap();
    let ResultPayload::Trajectories(traj) = &out.results else {
        panic!("expected trajectories")
    };
    let last = *traj.series[0].values.last().unwrap();
    assert!(last <= 1e-10, "final MSE {last}");
}

#[test]
fn bounds_limits() {
    // The floor-to-crlb gap closes as the SNR grows.
    let mut spec = ExperimentSpec::default_for(Scenario::Bounds);
    spec.trials = 5;
    spec.system.seed = 13;
    spec.channel.taps = 20;
    spec.bounds = Some(gse_core::experiment::BoundsParams {
        snr_db: vec![0.0, 30.0],
        group_counts: vec![20],
    });
    spec.validate().unwrap();
    let out = run(&spec).unwrap();
    let ResultPayload::Bounds(result) = &out.results else {
        panic!("expected bounds")
    };
    let value = |quantity: &str, snr: f64| -> f64 {
        result
            .rows
            .iter()
            .find(|r| r.quantity == quantity && r.snr_db == snr)
            .unwrap()
            .value
    };
    let rel_gap_low = 1.0 - value("bound", 0.0) / value("crlb", 0.0);
    let rel_gap_high = 1.0 - value("bound", 30.0) / value("crlb", 30.0);
    assert!(rel_gap_high < rel_gap_low);
    assert!(rel_gap_high < 0.01, "high-SNR relative gap {rel_gap_high}");

    // A zero channel drives every floor to exactly zero.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("null.txt");
    std::fs::write(&path, "0.0 0.0\n".repeat(20)).unwrap();
    let mut spec = ExperimentSpec::default_for(Scenario::Bounds);
    spec.trials = 2;
    spec.channel = gse_core::experiment::ChannelSpec {
        profile: "file".into(),
        path: Some(path.display().to_string()),
        rate: None,
        ..Default::default()
    };
    spec.bounds = Some(gse_core::experiment::BoundsParams {
        snr_db: vec![0.0, 8.0],
        group_counts: vec![1, 4, 20],
    });
    spec.validate().unwrap();
    let out = run(&spec).unwrap();
    let ResultPayload::Bounds(result) = &out.results else {
        panic!("expected bounds")
    };
    for row in result.rows.iter().filter(|r| r.quantity == "bound") {
        assert_eq!(row.value, 0.0, "nonzero floor at snr {}", row.snr_db);
    }
}

#[test]
fn scenario_subcommand_mismatch_is_rejected() {
    let spec = tiny_sce_spec();
    assert!(gse_core::experiment::run_bounds(&spec).is_err());
    assert!(gse_core::experiment::run_receiver_experiment(&spec).is_err());
    assert!(gse_core::experiment::run_surface(&spec).is_err());
}
