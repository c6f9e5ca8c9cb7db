//! Functional ANOVA of piecewise-constant functions over a categorical space.
//!
//! For a function `f` on `Θ_1 × … × Θ_n` with the uniform measure, the
//! marginal `a_U(θ_U)` averages `f` over every completion of `θ_U`. Component
//! functions follow bottom-up over the subset lattice,
//!
//! ```text
//! f_U(θ_U) = a_U(θ_U) − Σ_{W ⊊ U} f_W(θ_W)        (f_∅ = mean of f)
//! ```
//!
//! and the variance attributed to `U` is `V_U = E[f_U²]`. Summed over every
//! non-empty subset the `V_U` recover the total variance of `f`.
//!
//! Tree marginals come straight from the leaf partitions: a leaf contributes
//! its value times the fraction of each non-fixed module's options it covers.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::str::FromStr;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{Forest, OptionSet, Tree};
use crate::space::ConfigSpace;

/// A non-empty set of module indices, kept sorted.
///
/// Canonical order is by size, then lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SubsetKey(Vec<usize>);

impl SubsetKey {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        if v.is_empty() {
            return Err(Error::InvalidSubset("empty subset".into()));
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSubset(format!("repeated module in {v:?}")));
        }
        if v[v.len() - 1] >= 64 {
            return Err(Error::InvalidSubset("module index out of range".into()));
        }
        Ok(SubsetKey(v))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0, |m, &j| m | 1 << j)
    }

    pub fn contains(&self, module: usize) -> bool {
        self.0.binary_search(&module).is_ok()
    }

    /// Module names joined with `;`.
    pub fn label(&self, space: &ConfigSpace) -> String {
        self.0
            .iter()
            .map(|&j| space.modules()[j].name.as_str())
            .join(";")
    }
}

impl Ord for SubsetKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for SubsetKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<Vec<usize>> for SubsetKey {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        SubsetKey::new(v)
    }
}

impl From<SubsetKey> for Vec<usize> {
    fn from(k: SubsetKey) -> Self {
        k.0
    }
}

/// Every subset of `n_modules` modules of size `1..=max_order`, canonically ordered.
pub fn subset_keys(n_modules: usize, max_order: usize) -> Vec<SubsetKey> {
    (1..=max_order.min(n_modules))
        .flat_map(|size| (0..n_modules).combinations(size).map(SubsetKey))
        .collect()
}

/// How per-tree variances are turned into one fraction per subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FractionMode {
    /// Mean over trees of `V_U / V`.
    #[default]
    Ratio,
    /// `mean V_U / mean V`.
    Pooled,
}

impl FromStr for FractionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ratio" => Ok(FractionMode::Ratio),
            "pooled" => Ok(FractionMode::Pooled),
            other => Err(format!("unknown fraction mode `{other}`, expected ratio|pooled")),
        }
    }
}

impl std::fmt::Display for FractionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FractionMode::Ratio => "ratio",
            FractionMode::Pooled => "pooled",
        })
    }
}

/// A function whose uniform-measure marginals can be tabulated.
pub trait MarginalSource: Sync {
    fn arities(&self) -> &[usize];

    fn mean(&self) -> f64;

    /// Uniform-measure variance.
    fn variance(&self) -> f64;

    /// Largest magnitude involved; used to recognise numerically constant functions.
    fn scale(&self) -> f64;

    /// Marginal of `f − mean` over `modules` (ascending), as a mixed-radix table
    /// whose first module is the most significant digit.
    fn centered_marginal(&self, modules: &[usize]) -> Vec<f64>;
}

/// Flat index of `options` (one per module in `modules`) in a marginal table.
pub fn table_index(arities: &[usize], modules: &[usize], options: &[usize]) -> usize {
    modules
        .iter()
        .zip(options)
        .fold(0, |acc, (&j, &o)| acc * arities[j] + o)
}

fn table_len(arities: &[usize], modules: &[usize]) -> usize {
    modules.iter().map(|&j| arities[j]).product()
}

/// A tree viewed as a function of the configuration space.
pub struct TreeFunction<'a> {
    arities: &'a [usize],
    /// Centered leaf value, partition, and uniform-measure volume.
    leaves: Vec<(f64, &'a [OptionSet], f64)>,
    mean: f64,
    variance: f64,
    scale: f64,
}

impl<'a> TreeFunction<'a> {
    pub fn new(tree: &'a Tree) -> Self {
        let arities = tree.arities();
        let raw: Vec<(f64, &[OptionSet], f64)> = tree
            .leaves()
            .map(|(v, p)| {
                let vol = p
                    .iter()
                    .zip(arities)
                    .map(|(s, &k)| s.len() as f64 / k as f64)
                    .product::<f64>();
                (v, p, vol)
            })
            .collect();
        let mean: f64 = raw.iter().map(|(v, _, w)| v * w).sum();
        let leaves: Vec<_> = raw.into_iter().map(|(v, p, w)| (v - mean, p, w)).collect();
        let variance = leaves.iter().map(|(c, _, w)| c * c * w).sum();
        let scale = leaves
            .iter()
            .map(|(c, _, _)| c.abs())
            .fold(mean.abs(), f64::max);
        TreeFunction {
            arities,
            leaves,
            mean,
            variance,
            scale,
        }
    }
}

impl MarginalSource for TreeFunction<'_> {
    fn arities(&self) -> &[usize] {
        self.arities
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
        let mut table = vec![0.0; table_len(self.arities, modules)];
        let m = modules.len();
        let mut pos = vec![0usize; m];
        for &(c, partition, _) in &self.leaves {
            if c == 0.0 {
                continue;
            }
            // weight of the completions: covered share of every non-fixed module
            let w: f64 = partition
                .iter()
                .zip(self.arities)
                .enumerate()
                .filter(|(j, _)| !modules.contains(j))
                .map(|(_, (s, &k))| s.len() as f64 / k as f64)
                .product();
            let lists: Vec<Vec<usize>> = modules.iter().map(|&j| partition[j].iter().collect()).collect();
            pos.iter_mut().for_each(|p| *p = 0);
            'combos: loop {
                let idx = lists
                    .iter()
                    .zip(&pos)
                    .zip(modules)
                    .fold(0, |acc, ((l, &p), &j)| acc * self.arities[j] + l[p]);
                table[idx] += c * w;
                let mut i = m;
                loop {
                    if i == 0 {
                        break 'combos;
                    }
                    i -= 1;
                    pos[i] += 1;
                    if pos[i] < lists[i].len() {
                        break;
                    }
                    pos[i] = 0;
                }
            }
        }
        table
    }
}

/// Component tables keyed by subset mask, for one function.
#[derive(Debug, Default, Clone)]
pub struct ComponentMemo {
    owner: Option<usize>,
    tables: HashMap<u64, Vec<f64>>,
}

impl ComponentMemo {
    pub fn new() -> Self {
        Self::default()
    }

    /// Component table of `modules` (ascending), computing every missing
    /// lower-order table first.
    pub fn component<S: MarginalSource + ?Sized>(&mut self, src: &S, modules: &[usize]) -> &[f64] {
        let mask = modules.iter().fold(0u64, |m, &j| m | 1 << j);
        if !self.tables.contains_key(&mask) {
            let table = self.build(src, modules);
            self.tables.insert(mask, table);
        }
        &self.tables[&mask]
    }

    fn build<S: MarginalSource + ?Sized>(&mut self, src: &S, modules: &[usize]) -> Vec<f64> {
        let arities = src.arities();
        let mut table = src.centered_marginal(modules);
        let m = modules.len();
        let radices: Vec<usize> = modules.iter().map(|&j| arities[j]).collect();
        for sub in 1..(1u32 << m) - 1 {
            let positions: Vec<usize> = (0..m).filter(|b| sub >> b & 1 == 1).collect();
            let sub_modules: Vec<usize> = positions.iter().map(|&p| modules[p]).collect();
            let sub_table = self.component(src, &sub_modules).to_vec();
            let mut digits = vec![0usize; m];
            for entry in table.iter_mut() {
                let idx = positions
                    .iter()
                    .fold(0, |acc, &p| acc * radices[p] + digits[p]);
                *entry -= sub_table[idx];
                // odometer over the digits of the parent table
                for p in (0..m).rev() {
                    digits[p] += 1;
                    if digits[p] < radices[p] {
                        break;
                    }
                    digits[p] = 0;
                }
            }
        }
        table
    }
}

fn check_options(arities: &[usize], subset: &SubsetKey, options: &[usize]) -> Result<()> {
    if subset.indices().last().is_some_and(|&j| j >= arities.len()) {
        return Err(Error::InvalidSubset(format!(
            "{:?} references a module outside the space",
            subset.indices()
        )));
    }
    if options.len() != subset.order()
        || subset
            .indices()
            .iter()
            .zip(options)
            .any(|(&j, &o)| o >= arities[j])
    {
        return Err(Error::InvalidSubset(format!(
            "options {options:?} invalid for modules {:?}",
            subset.indices()
        )));
    }
    Ok(())
}

/// Uniform-measure average of the tree over every completion of `options` on `subset`.
pub fn tree_marginal(tree: &Tree, subset: &SubsetKey, options: &[usize]) -> Result<f64> {
    let arities = tree.arities();
    check_options(arities, subset, options)?;
    let mut total = 0.0;
    'leaves: for (value, partition) in tree.leaves() {
        let mut w = value;
        for (j, (s, &k)) in partition.iter().zip(arities).enumerate() {
            match subset.indices().iter().position(|&u| u == j) {
                Some(p) => {
                    if !s.contains(options[p]) {
                        continue 'leaves;
                    }
                }
                None => w *= s.len() as f64 / k as f64,
            }
        }
        total += w;
    }
    Ok(total)
}

/// Component `f_U(θ_U)` of a tree. `memo` caches tables for one tree and is
/// reset when used with another.
pub fn component_value(
    tree: &Tree,
    subset: &SubsetKey,
    options: &[usize],
    memo: &mut ComponentMemo,
) -> Result<f64> {
    check_options(tree.arities(), subset, options)?;
    let id = tree as *const Tree as usize;
    if memo.owner != Some(id) {
        *memo = ComponentMemo {
            owner: Some(id),
            tables: HashMap::new(),
        };
    }
    let f = TreeFunction::new(tree);
    let table = memo.component(&f, subset.indices());
    Ok(table[table_index(tree.arities(), subset.indices(), options)])
}

fn mean_square(table: &[f64]) -> f64 {
    table.iter().map(|x| x * x).sum::<f64>() / table.len() as f64
}

/// `V_U` of a tree.
pub fn subset_variance(tree: &Tree, subset: &SubsetKey) -> Result<f64> {
    if subset.indices().last().is_some_and(|&j| j >= tree.arities().len()) {
        return Err(Error::InvalidSubset(format!("{:?}", subset.indices())));
    }
    let f = TreeFunction::new(tree);
    Ok(mean_square(ComponentMemo::new().component(&f, subset.indices())))
}

/// Uniform-measure variance of a tree.
pub fn total_variance(tree: &Tree) -> f64 {
    TreeFunction::new(tree).variance()
}

/// Variances of one decomposed function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEffects {
    /// Total variance `V`.
    pub total: f64,
    /// `V_U` aligned with the decomposition's keys.
    pub variances: Vec<f64>,
    /// Set when `V` is numerically zero; such trees count with fraction 0.
    pub zero_variance: bool,
}

/// Computes `V_U` for every key. `keys` must be closed under taking non-empty subsets
/// for the memo to be shared efficiently, but any list is correct.
pub fn decompose_source<S: MarginalSource + ?Sized>(src: &S, keys: &[SubsetKey]) -> TreeEffects {
    let mut memo = ComponentMemo::new();
    let variances = keys
        .iter()
        .map(|k| mean_square(memo.component(src, k.indices())))
        .collect();
    let total = src.variance();
    let threshold = 1e-12 * src.scale();
    TreeEffects {
        total,
        variances,
        zero_variance: total <= threshold * threshold,
    }
}

/// Per-subset variance fractions, with the per-tree raw values kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectDecomposition {
    pub space: ConfigSpace,
    pub max_order: usize,
    pub mode: FractionMode,
    pub keys: Vec<SubsetKey>,
    pub per_tree: Vec<TreeEffects>,
    /// Fraction of the total variance per key (0..=1), aligned with `keys`.
    pub fractions: Vec<f64>,
    pub zero_variance_trees: usize,
}

impl EffectDecomposition {
    pub fn from_effects(
        space: ConfigSpace,
        max_order: usize,
        keys: Vec<SubsetKey>,
        per_tree: Vec<TreeEffects>,
        mode: FractionMode,
    ) -> Self {
        let fractions = fractions(&per_tree, keys.len(), mode);
        let zero_variance_trees = per_tree.iter().filter(|t| t.zero_variance).count();
        EffectDecomposition {
            space,
            max_order,
            mode,
            keys,
            per_tree,
            fractions,
            zero_variance_trees,
        }
    }

    /// Same per-tree values aggregated under another mode.
    pub fn with_mode(&self, mode: FractionMode) -> Self {
        EffectDecomposition {
            mode,
            fractions: fractions(&self.per_tree, self.keys.len(), mode),
            ..self.clone()
        }
    }

    pub fn fraction(&self, key: &SubsetKey) -> Option<f64> {
        self.keys.binary_search(key).ok().map(|i| self.fractions[i])
    }

    /// Fraction of the subset given in any order.
    pub fn fraction_of(&self, modules: &[usize]) -> Option<f64> {
        SubsetKey::new(modules.iter().copied())
            .ok()
            .and_then(|k| self.fraction(&k))
    }

    /// Sum of fractions over subsets of one size.
    pub fn order_sum(&self, order: usize) -> f64 {
        self.keys
            .iter()
            .zip(&self.fractions)
            .filter(|(k, _)| k.order() == order)
            .map(|(_, f)| f)
            .sum()
    }

    /// `(key, fraction)` pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&SubsetKey, f64)> {
        self.keys.iter().zip(self.fractions.iter().copied())
    }

    pub fn all_zero_variance(&self) -> bool {
        self.zero_variance_trees == self.per_tree.len()
    }
}

fn fractions(per_tree: &[TreeEffects], n_keys: usize, mode: FractionMode) -> Vec<f64> {
    let n = per_tree.len() as f64;
    (0..n_keys)
        .map(|i| match mode {
            FractionMode::Ratio => {
                per_tree
                    .iter()
                    .filter(|t| !t.zero_variance)
                    .map(|t| t.variances[i] / t.total)
                    .sum::<f64>()
                    / n
            }
            FractionMode::Pooled => {
                let live = per_tree.iter().filter(|t| !t.zero_variance);
                let total: f64 = live.clone().map(|t| t.total).sum();
                if total > 0.0 {
                    live.map(|t| t.variances[i]).sum::<f64>() / total
                } else {
                    0.0
                }
            }
        })
        .collect()
}

pub fn check_order(max_order: usize, n_modules: usize) -> Result<()> {
    if max_order == 0 || max_order > n_modules {
        Err(Error::InvalidOrder {
            max_order,
            n_modules,
        })
    } else {
        Ok(())
    }
}

/// Decomposes every tree of the forest up to `max_order`.
pub fn decompose(forest: &Forest, max_order: usize, mode: FractionMode) -> Result<EffectDecomposition> {
    let space = forest.space();
    check_order(max_order, space.n_modules())?;
    let keys = subset_keys(space.n_modules(), max_order);
    let per_tree: Vec<TreeEffects> = forest
        .trees()
        .par_iter()
        .map(|t| decompose_source(&TreeFunction::new(t), &keys))
        .collect();
    let d = EffectDecomposition::from_effects(space.clone(), max_order, keys, per_tree, mode);
    if d.zero_variance_trees > 0 {
        log::warn!(
            "{} of {} trees have zero variance and contribute fraction 0",
            d.zero_variance_trees,
            d.per_tree.len()
        );
    }
    Ok(d)
}
