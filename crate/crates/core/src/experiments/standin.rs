use rand_distr::{Distribution, StandardNormal};

use super::rng::{trial_rng, STREAM_SYNTHETIC};
use crate::stats::PopulationSample;

// Eight configurations of a time-margin-like metric: close means, one
// population with a clearly larger spread.
const MEANS: [f64; 8] = [20.35, 20.10, 20.22, 20.05, 20.28, 20.15, 20.40, 20.18];
const STDS: [f64; 8] = [0.95, 0.62, 0.55, 0.70, 0.58, 0.66, 0.60, 0.52];
const VALUES_PER_POPULATION: usize = 50;
const STANDIN_SEED: u64 = 0x10_11_4b;

/// Fixed 8 × 50 dataset used in place of unavailable bench measurements.
pub fn stand_in_dataset() -> Vec<PopulationSample> {
    MEANS
        .iter()
        .zip(&STDS)
        .enumerate()
        .map(|(i, (&mu, &sigma))| {
            let mut rng = trial_rng(STANDIN_SEED, 0, i as u64, STREAM_SYNTHETIC);
            let values = (0..VALUES_PER_POPULATION)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    // Round to 0.01 units like a measurement log.
                    ((mu + sigma * z) * 100.0).round() / 100.0
                })
                .collect();
            PopulationSample {
                id: format!("config{}", i + 1),
                values,
            }
        })
        .collect()
}
