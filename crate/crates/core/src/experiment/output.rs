use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiment::spec::ExperimentSpec;

/// One named per-block curve. `blocks` lists the 1-based block numbers the
/// values belong to; when absent the series covers every block 1..=len.
#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub estimator: String,
    pub metric: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<usize>>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn dense(
        estimator: impl Into<String>,
        metric: impl Into<String>,
        values: Vec<f64>,
    ) -> Self {
        Self {
            estimator: estimator.into(),
            metric: metric.into(),
            blocks: None,
            values,
        }
    }

    pub fn sampled(
        estimator: impl Into<String>,
        metric: impl Into<String>,
        blocks: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(blocks.len(), values.len());
        Self {
            estimator: estimator.into(),
            metric: metric.into(),
            blocks: Some(blocks),
            values,
        }
    }

    /// Block number of the i-th stored value (1-based).
    pub fn block_at(&self, idx: usize) -> usize {
        match &self.blocks {
            Some(blocks) => blocks[idx],
            None => idx + 1,
        }
    }
}

/// Mean learning curves of a trajectory scenario plus the analytic reference
/// curves computed on the same channel ensemble.
#[derive(Debug, Clone, Serialize, Default)]
pub struct TrajectoryResult {
    pub blocks: usize,
    pub series: Vec<Series>,
    pub references: Vec<Series>,
    /// Post-training uncoded BER per estimator (receiver scenario).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ber: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsRow {
    pub snr_db: f64,
    pub quantity: String,
    /// Group count; `None` for quantities that do not depend on one.
    pub s: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct BoundsResult {
    pub rows: Vec<BoundsRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceResult {
    /// Shrinkage-factor grid shared by both axes.
    pub factors: Vec<f64>,
    /// Row-major δMSE values, row = first group's factor.
    pub values: Vec<Vec<f64>>,
    /// Adaptive endpoint (1+α̂₁, 1+α̂₂) after the configured blocks.
    pub converged: [f64; 2],
    /// Analytic optimum of the surface.
    pub optimum: [f64; 2],
    /// Smallest sampled grid point.
    pub grid_minimum: [f64; 2],
    /// Equivalent noise variance the surface was drawn with.
    pub sigma2_tilde: f64,
    /// True per-group channel energies behind the surface.
    pub group_energies: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ResultPayload {
    Trajectories(TrajectoryResult),
    Bounds(BoundsResult),
    Surface(SurfaceResult),
}

/// Quantities implied by the configuration, echoed for the record rather
/// than asserted anywhere.
#[derive(Debug, Clone, Serialize)]
pub struct DerivedMeta {
    /// Chips per block, N·Nc.
    pub block_chips: usize,
    /// Uncoded bit rate implied by the block geometry and chip duration.
    pub uncoded_rate_bps: f64,
}

/// Complete emission unit: the resolved spec, a content-derived run id and
/// the scenario payload.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub run_id: String,
    pub spec: ExperimentSpec,
    pub derived: DerivedMeta,
    pub results: ResultPayload,
}

impl RunOutput {
    pub fn new(spec: ExperimentSpec, results: ResultPayload) -> Self {
        let run_id = run_id(&spec);
        let derived = DerivedMeta {
            block_chips: spec.system.block_chips(),
            uncoded_rate_bps: spec.system.uncoded_rate_bps(),
        };
        Self {
            run_id,
            spec,
            derived,
            results,
        }
    }
}

/// Content-addressed run identifier: the hash of the resolved spec, so a
/// rerun of the same experiment lands on the same id.
pub fn run_id(spec: &ExperimentSpec) -> String {
    let canonical = serde_json::to_vec(spec).expect("spec serialization cannot fail");
    let digest = Sha256::digest(&canonical);
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

/// 17 significant digits: round-trip exact for 64-bit floats.
fn fmt(value: f64) -> String {
    format!("{value:.16e}")
}

fn csv_body(out: &RunOutput) -> String {
    let mut text = String::new();
    match &out.results {
        ResultPayload::Trajectories(t) => {
            text.push_str("block,estimator,metric,value\n");
            for series in t.series.iter().chain(t.references.iter()) {
                for (i, v) in series.values.iter().enumerate() {
                    text.push_str(&format!(
                        "{},{},{},{}\n",
                        series.block_at(i),
                        series.estimator,
                        series.metric,
                        fmt(*v)
                    ));
                }
            }
            for (estimator, ber) in &t.ber {
                text.push_str(&format!("{},{},ber,{}\n", t.blocks, estimator, fmt(*ber)));
            }
        }
        ResultPayload::Bounds(b) => {
            text.push_str("snr_db,quantity,S,value\n");
            for row in &b.rows {
                let s = row.s.map(|s| s.to_string()).unwrap_or_default();
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt(row.snr_db),
                    row.quantity,
                    s,
                    fmt(row.value)
                ));
            }
        }
        ResultPayload::Surface(s) => {
            text.push_str("sf1,sf2,delta_mse\n");
            for (i, sf1) in s.factors.iter().enumerate() {
                for (j, sf2) in s.factors.iter().enumerate() {
                    text.push_str(&format!(
                        "{},{},{}\n",
                        fmt(*sf1),
                        fmt(*sf2),
                        fmt(s.values[i][j])
                    ));
                }
            }
        }
    }
    text
}

/// Writes the run into `dir` as `<scenario>-<run_id>.<ext>` and returns the
/// paths written. Identical spec and seed produce byte-identical files.
pub fn write_outputs(dir: &Path, format: OutputFormat, out: &RunOutput) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let stem = format!("{}-{}", out.spec.scenario.name(), out.run_id);
    let mut written = Vec::new();
    match format {
        OutputFormat::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let mut file = std::fs::File::create(&path)?;
            file.write_all(csv_body(out).as_bytes())?;
            written.push(path);
        }
        OutputFormat::Json => {
            let path = dir.join(format!("{stem}.json"));
            let mut file = std::fs::File::create(&path)?;
            let json = serde_json::to_string_pretty(out)
                .map_err(|e| Error::Config(format!("serialization failure: {e}")))?;
            file.write_all(json.as_bytes())?;
            file.write_all(b"\n")?;
            written.push(path);
        }
    }
    Ok(written)
}
