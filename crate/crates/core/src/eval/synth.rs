use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, GroupPlan, Labels};
use crate::error::{Error, Result};

/// Planted binary benchmark: standard-normal features, labels from
/// `sign(w · x_informative + noise · ε)` with equal-magnitude random-sign
/// weights normalized to `‖w‖ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub d: usize,
    pub groups: usize,
    pub informative: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 200,
            d: 500,
            groups: 10,
            informative: 10,
            noise: 0.5,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.n < 4 {
            return bad("synthetic n must be at least 4");
        }
        if self.groups == 0 || self.groups > self.d {
            return bad("synthetic group count must lie in 1..=d");
        }
        if self.informative == 0 || self.informative > self.d {
            return bad("synthetic informative count must lie in 1..=d");
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return bad("synthetic noise must be finite and >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedDataset {
    pub dataset: Dataset,
    /// Contiguous blocks of near-equal size.
    pub plan: GroupPlan,
    /// Ground-truth informative features, ascending.
    pub informative: Vec<usize>,
    pub weights: Vec<f64>,
    /// The informative feature with the largest realized class separation.
    pub strongest: usize,
}

/// Draws a planted dataset. Informative features are dealt round-robin over
/// the groups at random positions within each group.
pub fn planted_dataset(config: &SynthConfig) -> Result<PlantedDataset> {
    config.validate()?;
    let SynthConfig {
        n,
        d,
        groups,
        informative,
        noise,
        seed,
    } = *config;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let bounds: Vec<usize> = (0..=groups).map(|g| g * d / groups).collect();
    let blocks: Vec<Vec<usize>> = bounds.windows(2).map(|w| (w[0]..w[1]).collect()).collect();

    let mut pools: Vec<Vec<usize>> = blocks.clone();
    pools.iter_mut().for_each(|p| p.shuffle(&mut rng));
    let mut planted = Vec::with_capacity(informative);
    let mut g = 0;
    while planted.len() < informative {
        if let Some(j) = pools[g % groups].pop() {
            planted.push(j);
        }
        g += 1;
    }

    let scale = 1.0 / (informative as f64).sqrt();
    let weights: Vec<f64> = (0..informative)
        .map(|_| if rng.random::<bool>() { scale } else { -scale })
        .collect();

    let features: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();

    let mut ids: Vec<usize> = (0..n)
        .map(|i| {
            let s: f64 = planted
                .iter()
                .zip(&weights)
                .map(|(&j, w)| w * features[j][i])
                .sum::<f64>()
                + noise * rng.sample::<f64, _>(StandardNormal);
            if s > 0.0 {
                1
            } else {
                2
            }
        })
        .collect();
    // A degenerate draw with a single class gets its first sample flipped.
    if ids.iter().all(|&c| c == ids[0]) {
        ids[0] = 3 - ids[0];
    }

    let signs: Vec<f64> = ids.iter().map(|&c| if c == 1 { 1.0 } else { -1.0 }).collect();
    let separation = |j: usize| {
        let col = &features[j];
        let mean = col.iter().sum::<f64>() / n as f64;
        let rms = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        col.iter().zip(&signs).map(|(v, s)| (v - mean) * s).sum::<f64>().abs() / rms
    };
    let strongest = *planted
        .iter()
        .max_by(|&&a, &&b| separation(a).total_cmp(&separation(b)))
        .expect("at least one informative feature");

    let mut order: Vec<usize> = (0..informative).collect();
    order.sort_by_key(|&k| planted[k]);
    let informative_sorted = order.iter().map(|&k| planted[k]).collect();
    let weights = order.iter().map(|&k| weights[k]).collect();

    Ok(PlantedDataset {
        dataset: Dataset::new(features, Labels::new(ids)?, None)?,
        plan: GroupPlan::natural(blocks)?,
        informative: informative_sorted,
        weights,
        strongest,
    })
}
