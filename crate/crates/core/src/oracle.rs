//! Exact decomposition of the empirical function of a full-factorial dataset.
//!
//! Marginals are computed by averaging the dense response table over every
//! completion; no model is fitted. This is the reference the forest path is
//! checked against.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fanova::{
    check_order, decompose_source, subset_keys, EffectDecomposition, FractionMode, MarginalSource,
};
use crate::space::{ConfigSpace, Variant};

/// Largest space the oracle enumerates.
pub const ORACLE_LIMIT: usize = 1_000_000;

/// One response per variant, in lexicographic variant order.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorialTable {
    space: ConfigSpace,
    responses: Vec<f64>,
}

impl FactorialTable {
    pub fn new(space: ConfigSpace, responses: Vec<f64>) -> Result<Self> {
        let card = space.cardinality();
        if card > ORACLE_LIMIT {
            return Err(Error::SpaceTooLarge(card));
        }
        if responses.len() != card {
            return Err(Error::LengthMismatch {
                left: responses.len(),
                right: card,
            });
        }
        Ok(Self { space, responses })
    }

    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn get(&self, v: &Variant) -> f64 {
        self.responses[self.space.rank(v)]
    }
}

/// Dense table of a dataset that covers the whole space exactly once.
pub fn to_factorial(data: &Dataset) -> Result<FactorialTable> {
    let space = data.space();
    let card = space.cardinality();
    if card > ORACLE_LIMIT {
        return Err(Error::SpaceTooLarge(card));
    }
    let mut slots: Vec<Option<f64>> = vec![None; card];
    for (v, y) in data.rows() {
        let r = space.rank(v);
        if slots[r].replace(*y).is_some() {
            return Err(Error::DuplicateVariant(v.clone()));
        }
    }
    let missing: Vec<Variant> = slots
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_none())
        .map(|(r, _)| space.unrank(r))
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteCoverage { missing });
    }
    FactorialTable::new(space.clone(), slots.into_iter().map(Option::unwrap).collect())
}

struct DenseFunction {
    arities: Vec<usize>,
    centered: Vec<f64>,
    mean: f64,
    variance: f64,
    scale: f64,
}

impl DenseFunction {
    fn new(table: &FactorialTable) -> Self {
        let n = table.responses.len() as f64;
        let mean = table.responses.iter().sum::<f64>() / n;
        let centered: Vec<f64> = table.responses.iter().map(|y| y - mean).collect();
        let variance = centered.iter().map(|c| c * c).sum::<f64>() / n;
        let scale = centered.iter().map(|c| c.abs()).fold(mean.abs(), f64::max);
        DenseFunction {
            arities: table.space.arities(),
            centered,
            mean,
            variance,
            scale,
        }
    }
}

impl MarginalSource for DenseFunction {
    fn arities(&self) -> &[usize] {
        &self.arities
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn variance(&self) -> f64 {
        self.variance
    }

    fn scale(&self) -> f64 {
        self.scale
    }

    fn centered_marginal(&self, modules: &[usize]) -> Vec<f64> {
        let len: usize = modules.iter().map(|&j| self.arities[j]).product();
        let mut table = vec![0.0; len];
        let mut digits = vec![0usize; self.arities.len()];
        for &c in &self.centered {
            let idx = modules
                .iter()
                .fold(0, |acc, &j| acc * self.arities[j] + digits[j]);
            table[idx] += c;
            for j in (0..digits.len()).rev() {
                digits[j] += 1;
                if digits[j] < self.arities[j] {
                    break;
                }
                digits[j] = 0;
            }
        }
        let completions = (self.centered.len() / len) as f64;
        table.iter_mut().for_each(|x| *x /= completions);
        table
    }
}

/// Decomposition of the table itself, reported as a single-tree decomposition.
pub fn exact_decompose(table: &FactorialTable, max_order: usize) -> Result<EffectDecomposition> {
    let space = table.space();
    check_order(max_order, space.n_modules())?;
    let keys = subset_keys(space.n_modules(), max_order);
    let effects = decompose_source(&DenseFunction::new(table), &keys);
    if effects.zero_variance {
        log::warn!("factorial table has zero variance; every fraction is 0");
    }
    Ok(EffectDecomposition::from_effects(
        space.clone(),
        max_order,
        keys,
        vec![effects],
        FractionMode::Ratio,
    ))
}
