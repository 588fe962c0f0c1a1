//! Synthetic cohorts with planted structure.
//!
//! Two recipes, both pure functions of their arguments and seed:
//!
//! * `LoopVsNoise` - group `A` channels are sinusoids. Channel `j` (counted over
//!   the whole atlas) has period `5 + 4 * frac((j + 1) * 0.618034)` samples and
//!   amplitude `0.5 + 1.5 * frac(j * 0.414214)`; each subject draws a fresh
//!   phase per channel (base phase plus a uniform jitter in `[-pi/4, pi/4]`)
//!   and adds Gaussian noise with standard deviation `0.1 * amplitude`. Group
//!   `B` channels are white Gaussian noise whose variance matches the group
//!   `A` channel (`amplitude^2 / 2 + (0.1 * amplitude)^2`).
//! * `ClusterShift` - every channel is unit Gaussian noise. In group `A` the
//!   first half of each network additionally loads a shared per-network factor
//!   with weight 1 (pairwise correlation about 0.5 inside the block); group `B`
//!   plants the same block on the second half of each network.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

use super::{Cohort, NetworkAtlas, TimeSeriesTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticRecipe {
    LoopVsNoise,
    ClusterShift,
}

impl std::str::FromStr for SyntheticRecipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loop_vs_noise" => Ok(Self::LoopVsNoise),
            "cluster_shift" => Ok(Self::ClusterShift),
            other => Err(Error::InvalidArgument(format!("unknown recipe {other:?}"))),
        }
    }
}

pub const GROUP_A: &str = "A";
pub const GROUP_B: &str = "B";

const NOISE_FRACTION: f64 = 0.1;

fn frac(x: f64) -> f64 {
    x - x.floor()
}

fn channel_period(j: usize) -> f64 {
    5.0 + 4.0 * frac((j + 1) as f64 * 0.618034)
}

fn channel_amplitude(j: usize) -> f64 {
    0.5 + 1.5 * frac(j as f64 * 0.414214)
}

/// Synthetic cohort over the compact two-network atlas.
pub fn generate_synthetic_cohort(
    n_per_group: usize,
    timepoints: usize,
    seed: u64,
    recipe: SyntheticRecipe,
) -> Result<Cohort> {
    generate_synthetic_cohort_with_atlas(n_per_group, timepoints, seed, recipe, &NetworkAtlas::synthetic())
}

pub fn generate_synthetic_cohort_with_atlas(
    n_per_group: usize,
    timepoints: usize,
    seed: u64,
    recipe: SyntheticRecipe,
    atlas: &NetworkAtlas,
) -> Result<Cohort> {
    if n_per_group < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_per_group must be at least 2, got {n_per_group}"
        )));
    }
    if timepoints < 30 {
        return Err(Error::InvalidArgument(format!(
            "synthetic series need at least 30 timepoints, got {timepoints}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subjects = Vec::with_capacity(2 * n_per_group);
    for group in [GROUP_A, GROUP_B] {
        for k in 1..=n_per_group {
            let id = format!("{group}_{k:03}");
            let rows = match recipe {
                SyntheticRecipe::LoopVsNoise => loop_vs_noise(&mut rng, atlas, timepoints, group == GROUP_A),
                SyntheticRecipe::ClusterShift => cluster_shift(&mut rng, atlas, timepoints, group == GROUP_A),
            };
            subjects.push(TimeSeriesTable::new(id, atlas.all_channels(), rows)?.with_group(group));
        }
    }
    Cohort::new(subjects, atlas.clone())
}

fn loop_vs_noise(rng: &mut ChaCha8Rng, atlas: &NetworkAtlas, t: usize, looped: bool) -> Vec<Vec<f64>> {
    let n = atlas.all_channels().len();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let amp = channel_amplitude(j);
        let col: Vec<f64> = if looped {
            let omega = 2.0 * PI / channel_period(j);
            let phase = 2.0 * PI * frac(j as f64 * 0.37) + rng.random_range(-PI / 4.0..PI / 4.0);
            (0..t)
                .map(|i| {
                    amp * (omega * i as f64 + phase).sin()
                        + NOISE_FRACTION * amp * std_normal.sample(rng)
                })
                .collect()
        } else {
            let sd = (amp * amp / 2.0 + (NOISE_FRACTION * amp).powi(2)).sqrt();
            (0..t).map(|_| sd * std_normal.sample(rng)).collect()
        };
        cols.push(col);
    }
    transpose(&cols, t)
}

fn cluster_shift(rng: &mut ChaCha8Rng, atlas: &NetworkAtlas, t: usize, first_half: bool) -> Vec<Vec<f64>> {
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut cols = Vec::new();
    for channels in atlas.networks.values() {
        let factor: Vec<f64> = (0..t).map(|_| std_normal.sample(rng)).collect();
        let half = channels.len() / 2;
        for c in 0..channels.len() {
            let in_block = if first_half { c < half } else { c >= half };
            let col = (0..t)
                .map(|i| {
                    let noise = std_normal.sample(rng);
                    if in_block {
                        factor[i] + noise
                    } else {
                        noise
                    }
                })
                .collect();
            cols.push(col);
        }
    }
    transpose(&cols, t)
}

fn transpose(cols: &[Vec<f64>], t: usize) -> Vec<Vec<f64>> {
    (0..t).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}
