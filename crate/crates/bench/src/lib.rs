//! Workloads shared by the benchmarks.

use modanova::fanova::subset_keys;
use modanova::synth::{generate_synthetic, TruthComponent, TruthSpec};
use modanova::{ConfigSpace, Dataset};

/// Full-factorial data with a random component on every subset of up to
/// three modules plus Gaussian noise.
pub fn dense_dataset(space: &ConfigSpace, seed: u64, noise_sd: f64) -> Dataset {
    let names = space.module_names();
    let components = subset_keys(space.n_modules(), 3.min(space.n_modules()))
        .into_iter()
        .map(|k| TruthComponent {
            modules: k.indices().iter().map(|&j| names[j].clone()).collect(),
            values: None,
            scale: Some(1.0 / k.order() as f64),
        })
        .collect();
    generate_synthetic(space, &TruthSpec { components }, noise_sd, seed)
        .expect("built-in spaces fit the synthetic generator")
        .dataset
}
