use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ChannelRealization;
use crate::sim::config::DEFAULT_CHIP_DURATION;

/// Power-decay profile of the synthetic multipath generator, a stand-in for
/// measured dense-multipath responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum ChannelProfile {
    /// Tap power decays as exp(-rate·l).
    ExpDecay { rate: f64 },
    /// A few exponentially-decaying clusters with random onsets; cluster c is
    /// attenuated by exp(-inter_rate·c) and decays internally at intra_rate.
    Cluster {
        n_clusters: usize,
        intra_rate: f64,
        inter_rate: f64,
    },
}

impl ChannelProfile {
    fn validate(&self) -> Result<()> {
        match self {
            ChannelProfile::ExpDecay { rate } => {
                if !(*rate >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "decay rate {rate} must be >= 0"
                    )));
                }
            }
            ChannelProfile::Cluster {
                n_clusters,
                intra_rate,
                inter_rate,
            } => {
                if *n_clusters == 0 {
                    return Err(Error::InvalidParameter("need at least one cluster".into()));
                }
                if !(*intra_rate >= 0.0) || !(*inter_rate >= 0.0) {
                    return Err(Error::InvalidParameter(
                        "cluster decay rates must be >= 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Draws a complex multipath realization with the requested power profile,
/// normalized to unit total energy.
pub fn gen_channel<R: Rng>(
    profile: &ChannelProfile,
    l: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if l == 0 {
        return Err(Error::InvalidParameter(
            "channel needs at least one tap".into(),
        ));
    }
    profile.validate()?;

    let mut power = vec![0.0f64; l];
    match profile {
        ChannelProfile::ExpDecay { rate } => {
            for (idx, p) in power.iter_mut().enumerate() {
                *p = if idx == 0 {
                    1.0
                } else {
                    (-rate * idx as f64).exp()
                };
            }
        }
        ChannelProfile::Cluster {
            n_clusters,
            intra_rate,
            inter_rate,
        } => {
            // First cluster starts at the origin; the rest land uniformly.
            let mut starts = vec![0usize];
            for _ in 1..*n_clusters {
                starts.push(rng.gen_range(0..l));
            }
            for (c, &start) in starts.iter().enumerate() {
                let scale = (-(inter_rate * c as f64)).exp();
                for idx in start..l {
                    let off = (idx - start) as f64;
                    power[idx] += scale
                        * if off == 0.0 {
                            1.0
                        } else {
                            (-intra_rate * off).exp()
                        };
                }
            }
        }
    }

    let mut taps = DVector::zeros(l);
    for idx in 0..l {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let gain = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        taps[idx] = gain * power[idx].sqrt();
    }
    let energy: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
    if energy <= 0.0 {
        return Err(Error::InvalidParameter(
            "degenerate draw: channel energy vanished".into(),
        ));
    }
    taps /= Complex64::new(energy.sqrt(), 0.0);
    ChannelRealization::new(taps, DEFAULT_CHIP_DURATION, false)
}

/// Reads a channel from plain text: one tap per line as two whitespace
/// separated floats (real imaginary); `#` starts a comment line.
pub fn load_channel<P: AsRef<Path>>(path: P) -> Result<ChannelRealization> {
    let path_str = path.as_ref().display().to_string();
    let file = std::fs::File::open(&path)?;
    let mut taps = Vec::new();
    for (line_no, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let parse = |tok: Option<&str>, what: &str| -> Result<f64> {
            let tok = tok.ok_or_else(|| Error::ChannelParse {
                path: path_str.clone(),
                line: line_no + 1,
                message: format!("missing {what} part"),
            })?;
            tok.parse::<f64>().map_err(|e| Error::ChannelParse {
                path: path_str.clone(),
                line: line_no + 1,
                message: format!("bad {what} part {tok:?}: {e}"),
            })
        };
        let re = parse(parts.next(), "real")?;
        let im = parse(parts.next(), "imaginary")?;
        if let Some(extra) = parts.next() {
            return Err(Error::ChannelParse {
                path: path_str,
                line: line_no + 1,
                message: format!("unexpected trailing token {extra:?}"),
            });
        }
        taps.push(Complex64::new(re, im));
    }
    if taps.is_empty() {
        return Err(Error::ChannelParse {
            path: path_str,
            line: 0,
            message: "file contains no taps".into(),
        });
    }
    ChannelRealization::new(DVector::from_vec(taps), DEFAULT_CHIP_DURATION, true)
}

/// Writes a channel in the text format read back by [`load_channel`].
pub fn save_channel<P: AsRef<Path>>(path: P, ch: &ChannelRealization) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "# complex channel taps: real imaginary")?;
    for tap in ch.taps().iter() {
        writeln!(file, "{:.16e} {:.16e}", tap.re, tap.im)?;
    }
    Ok(())
}
