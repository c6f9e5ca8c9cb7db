//! Full-factorial test data with known variance components.
//!
//! Each truth component is a table over the options of a module subset. The
//! generator re-centers every table so it averages to zero along each of its
//! arguments; the components are then orthogonal under the uniform measure
//! and each one's variance is exactly its `V_U`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Scenario};
use crate::error::{Error, Result};
use crate::fanova::{table_index, SubsetKey};
use crate::space::ConfigSpace;

const TABLE_STREAM: u64 = 1 << 40;
const NOISE_STREAM: u64 = 1 << 41;

/// One component of a truth spec: explicit `values` (mixed-radix order over the
/// listed modules, sorted by module position) or random ones drawn from `±scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthComponent {
    pub modules: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSpec {
    pub components: Vec<TruthComponent>,
}

impl TruthSpec {
    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedTruth(e.to_string()))
    }
}

/// A centered component table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTable {
    pub key: SubsetKey,
    pub values: Vec<f64>,
}

/// Subtracts the mean along every axis of a row-major table.
pub fn center(radices: &[usize], values: &mut [f64]) {
    let len = values.len();
    let mut stride = len;
    for &r in radices {
        stride /= r;
        // blocks of size r*stride; within each, axis entries are stride apart
        for block in (0..len).step_by(r * stride) {
            for offset in 0..stride {
                let start = block + offset;
                let mean = (0..r).map(|i| values[start + i * stride]).sum::<f64>() / r as f64;
                for i in 0..r {
                    values[start + i * stride] -= mean;
                }
            }
        }
    }
}

/// Resolves names, draws random tables, merges repeated subsets and centers.
pub fn resolve_truth(space: &ConfigSpace, spec: &TruthSpec, seed: u64) -> Result<Vec<ComponentTable>> {
    let arities = space.arities();
    let mut merged: BTreeMap<SubsetKey, Vec<f64>> = BTreeMap::new();
    for (c, comp) in spec.components.iter().enumerate() {
        let mut indices = Vec::with_capacity(comp.modules.len());
        for name in &comp.modules {
            indices.push(space.module_index(name).ok_or_else(|| {
                Error::MalformedTruth(format!("unknown module `{name}`"))
            })?);
        }
        let key = SubsetKey::new(indices.iter().copied())
            .map_err(|e| Error::MalformedTruth(e.to_string()))?;
        if indices.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::MalformedTruth(format!(
                "modules {:?} must be listed in space order",
                comp.modules
            )));
        }
        let len: usize = key.indices().iter().map(|&j| arities[j]).product();
        let values = match (&comp.values, comp.scale) {
            (Some(v), None) => {
                if v.len() != len {
                    return Err(Error::MalformedTruth(format!(
                        "component {:?} needs {len} values, got {}",
                        comp.modules,
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::MalformedTruth("non-finite component value".into()));
                }
                v.clone()
            }
            (None, Some(scale)) if scale.is_finite() && scale >= 0.0 => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(TABLE_STREAM + c as u64);
                (0..len).map(|_| rng.random_range(-1.0..=1.0) * scale).collect()
            }
            _ => {
                return Err(Error::MalformedTruth(format!(
                    "component {:?} needs exactly one of `values` or a non-negative `scale`",
                    comp.modules
                )))
            }
        };
        let slot = merged.entry(key).or_insert_with(|| vec![0.0; len]);
        slot.iter_mut().zip(values).for_each(|(s, v)| *s += v);
    }
    Ok(merged
        .into_iter()
        .map(|(key, mut values)| {
            let radices: Vec<usize> = key.indices().iter().map(|&j| arities[j]).collect();
            center(&radices, &mut values);
            ComponentTable { key, values }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEntry {
    pub subset: Vec<String>,
    pub key: SubsetKey,
    pub variance: f64,
    pub fraction: f64,
}

/// Analytic variance components of the noise-free signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub total_variance: f64,
    pub noise_sd: f64,
    pub seed: u64,
    pub components: Vec<TruthEntry>,
}

impl GroundTruth {
    pub fn fraction(&self, key: &SubsetKey) -> f64 {
        self.components
            .iter()
            .find(|e| &e.key == key)
            .map_or(0.0, |e| e.fraction)
    }

    pub fn signal_sd(&self) -> f64 {
        self.total_variance.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub dataset: Dataset,
    pub truth: GroundTruth,
}

/// Full-factorial dataset whose response is the sum of the centered truth
/// components plus Gaussian noise.
pub fn generate_synthetic(
    space: &ConfigSpace,
    spec: &TruthSpec,
    noise_sd: f64,
    seed: u64,
) -> Result<SyntheticData> {
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(Error::MalformedTruth(format!("invalid noise sd {noise_sd}")));
    }
    let card = space.cardinality();
    if card > crate::oracle::ORACLE_LIMIT {
        return Err(Error::SpaceTooLarge(card));
    }
    let tables = resolve_truth(space, spec, seed)?;
    let arities = space.arities();

    let variances: Vec<f64> = tables
        .iter()
        .map(|t| t.values.iter().map(|x| x * x).sum::<f64>() / t.values.len() as f64)
        .collect();
    let total: f64 = variances.iter().sum();
    let components = tables
        .iter()
        .zip(&variances)
        .map(|(t, &v)| TruthEntry {
            subset: t
                .key
                .indices()
                .iter()
                .map(|&j| space.modules()[j].name.clone())
                .collect(),
            key: t.key.clone(),
            variance: v,
            fraction: if total > 0.0 { v / total } else { 0.0 },
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    let normal = Normal::new(0.0, noise_sd).expect("validated sd");
    let mut options = Vec::new();
    let rows = space
        .variants()
        .map(|v| {
            let signal: f64 = tables
                .iter()
                .map(|t| {
                    options.clear();
                    options.extend(t.key.indices().iter().map(|&j| v.0[j]));
                    t.values[table_index(&arities, t.key.indices(), &options)]
                })
                .sum();
            let noise = if noise_sd > 0.0 { normal.sample(&mut rng) } else { 0.0 };
            (v, signal + noise)
        })
        .collect();

    Ok(SyntheticData {
        dataset: Dataset::new(space.clone(), rows, Scenario::Synthetic)?,
        truth: GroundTruth {
            total_variance: total,
            noise_sd,
            seed,
            components,
        },
    })
}
