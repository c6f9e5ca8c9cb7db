//! Random-forest regression over purely categorical features.
//!
//! Splits send a subset of a module's options left and the rest right, so
//! every leaf covers a product of per-module option subsets (its partition).
//! The partitions of a tree tile the configuration space, which makes
//! uniform-measure marginals of the tree computable in closed form.
//!
//! Randomness: tree `t` draws from a ChaCha8 stream keyed by the forest seed
//! with stream id `t`, so results do not depend on thread scheduling.

use std::cmp::Ordering;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::space::{ConfigSpace, Variant, MAX_OPTIONS};

/// Present-option count up to which split search is exhaustive.
const EXHAUSTIVE_LIMIT: usize = 16;

/// Per-tree random stream.
pub fn tree_stream(seed: u64, tree: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree);
    rng
}

/// A set of option indices of one module.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
#[derive(Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct OptionSet(u64);

impl OptionSet {
    pub fn empty() -> Self {
        OptionSet(0)
    }

    /// `{0, .., k-1}`.
    pub fn full(k: usize) -> Self {
        debug_assert!(k <= MAX_OPTIONS);
        if k == 64 {
            OptionSet(u64::MAX)
        } else {
            OptionSet((1u64 << k) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        OptionSet(1 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersection(self, other: Self) -> Self {
        OptionSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        OptionSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits >> i & 1 == 1)
    }

    /// Lexicographic comparison of the ascending index lists.
    pub fn lex_cmp(self, other: Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl std::fmt::Debug for OptionSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl From<OptionSet> for Vec<usize> {
    fn from(s: OptionSet) -> Self {
        s.iter().collect()
    }
}

impl TryFrom<Vec<usize>> for OptionSet {
    type Error = String;

    fn try_from(v: Vec<usize>) -> std::result::Result<Self, String> {
        let mut s = OptionSet::empty();
        for i in v {
            if i >= MAX_OPTIONS {
                return Err(format!("option index {i} out of range"));
            }
            s.insert(i);
        }
        Ok(s)
    }
}

impl FromIterator<usize> for OptionSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = OptionSet::empty();
        for i in iter {
            s.insert(i);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    /// `None` means `ceil(n / 2)`.
    pub features_per_split: Option<usize>,
    pub min_samples_leaf: usize,
    /// `None` means unlimited.
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for FitParams {
    fn default() -> Self {
        Self {
            n_trees: 64,
            bootstrap: true,
            features_per_split: None,
            min_samples_leaf: 1,
            max_depth: None,
            seed: 0,
        }
    }
}

impl FitParams {
    /// One tree, no bootstrap, every module considered at every split.
    /// On a full-factorial dataset the tree reproduces the data exactly.
    pub fn exact(n_modules: usize) -> Self {
        Self {
            n_trees: 1,
            bootstrap: false,
            features_per_split: Some(n_modules),
            min_samples_leaf: 1,
            max_depth: None,
            seed: 0,
        }
    }

    pub fn features(&self, n_modules: usize) -> usize {
        self.features_per_split.unwrap_or(n_modules.div_ceil(2))
    }

    pub fn validate(&self, n_modules: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.n_trees == 0 {
            return bad("n_trees must be positive".into());
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be positive".into());
        }
        if self.max_depth == Some(0) {
            return bad("max_depth must be positive".into());
        }
        let f = self.features(n_modules);
        if f == 0 || f > n_modules {
            return bad(format!(
                "features_per_split must be in 1..={n_modules}, got {f}"
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        module: usize,
        /// Options routed to `left`; every other option reaching the node goes right.
        left_options: OptionSet,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
        /// Per-module options consistent with the root-to-leaf path.
        partition: Vec<OptionSet>,
    },
}

/// A fitted regression tree; `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    arities: Vec<usize>,
    nodes: Vec<Node>,
}

impl Tree {
    /// Single-leaf tree.
    pub fn constant(arities: Vec<usize>, value: f64) -> Self {
        let partition = arities.iter().map(|&k| OptionSet::full(k)).collect();
        Tree {
            arities,
            nodes: vec![Node::Leaf { value, partition }],
        }
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// `(value, partition)` of every leaf, in node order.
    pub fn leaves(&self) -> impl Iterator<Item = (f64, &[OptionSet])> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value, partition } => Some((*value, partition.as_slice())),
            Node::Split { .. } => None,
        })
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves().count()
    }

    /// Index into [`Tree::nodes`] of the leaf containing `v`.
    pub fn leaf_index(&self, v: &Variant) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split {
                    module,
                    left_options,
                    left,
                    right,
                } => {
                    at = if left_options.contains(v.0[*module]) {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn predict(&self, v: &Variant) -> f64 {
        match &self.nodes[self.leaf_index(v)] {
            Node::Leaf { value, .. } => *value,
            Node::Split { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    /// Structural checks for trees that did not come from [`fit_tree`].
    pub fn validate(&self) -> Result<()> {
        let n = self.arities.len();
        let bad = |m: String| Err(Error::Invariant(m));
        let mut volume: u128 = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Split {
                    module,
                    left_options,
                    left,
                    right,
                } => {
                    if *module >= n || *left >= self.nodes.len() || *right >= self.nodes.len() {
                        return bad(format!("node {i} references out-of-range entries"));
                    }
                    if *left <= i || *right <= i {
                        return bad(format!("node {i} has a backward child reference"));
                    }
                    if left_options.is_empty() || !left_options.is_subset(OptionSet::full(self.arities[*module])) {
                        return bad(format!("node {i} has an invalid left option set"));
                    }
                }
                Node::Leaf { value, partition } => {
                    if partition.len() != n || !value.is_finite() {
                        return bad(format!("leaf {i} is malformed"));
                    }
                    volume += partition.iter().map(|p| p.len() as u128).product::<u128>();
                }
            }
        }
        let card: u128 = self.arities.iter().map(|&k| k as u128).product();
        if volume != card {
            return bad(format!("leaf partitions cover {volume} of {card} variants"));
        }
        Ok(())
    }
}

/// A candidate split found by [`best_split`].
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub module: usize,
    /// Ascending option indices sent left; always contains the smallest present option.
    pub left_options: Vec<usize>,
    /// Summed squared error of the two children.
    pub sse: f64,
    /// Squared error of the unsplit rows.
    pub parent_sse: f64,
}

/// Rows in a compact layout: option indices row-major, plus responses.
struct Rows {
    n_modules: usize,
    options: Vec<u8>,
    y: Vec<f64>,
}

impl Rows {
    fn new(rows: &[(Variant, f64)], n_modules: usize) -> Self {
        let mut options = Vec::with_capacity(rows.len() * n_modules);
        for (v, _) in rows {
            options.extend(v.0.iter().map(|&i| i as u8));
        }
        Rows {
            n_modules,
            options,
            y: rows.iter().map(|(_, y)| *y).collect(),
        }
    }

    fn option(&self, row: usize, module: usize) -> usize {
        self.options[row * self.n_modules + module] as usize
    }

    fn mean(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64
    }

    fn present(&self, idx: &[usize], module: usize) -> OptionSet {
        idx.iter().map(|&i| self.option(i, module)).collect()
    }

    /// Best split among `candidates` by child SSE, regardless of gain.
    ///
    /// Ties (relative tolerance 1e-12) go to the lowest module index, then the
    /// lexicographically smallest left set.
    fn search(&self, idx: &[usize], candidates: &[usize], min_leaf: usize) -> Option<Split> {
        let mean = self.mean(idx);
        let parent_sse: f64 = idx.iter().map(|&i| (self.y[i] - mean).powi(2)).sum();
        let tol = 1e-12 * parent_sse;
        let mut best: Option<(f64, usize, OptionSet)> = None;

        for &module in candidates {
            // per option: count, sum and sum of squares of centered responses
            let mut stats = [(0usize, 0.0f64, 0.0f64); MAX_OPTIONS];
            let mut present = OptionSet::empty();
            for &i in idx {
                let o = self.option(i, module);
                let c = self.y[i] - mean;
                stats[o].0 += 1;
                stats[o].1 += c;
                stats[o].2 += c * c;
                present.insert(o);
            }
            if present.len() < 2 {
                continue;
            }
            let sse_of = |set: OptionSet| {
                let (n, s, q) = set.iter().fold((0usize, 0.0, 0.0), |acc, o| {
                    (acc.0 + stats[o].0, acc.1 + stats[o].1, acc.2 + stats[o].2)
                });
                (n, (q - s * s / n as f64).max(0.0))
            };
            for left in left_sets(present, &stats) {
                let right = present.difference(left);
                let (nl, sl) = sse_of(left);
                let (nr, sr) = sse_of(right);
                if nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let sse = sl + sr;
                let better = match &best {
                    None => true,
                    Some((b_sse, b_module, b_left)) => {
                        if sse < b_sse - tol {
                            true
                        } else if sse <= b_sse + tol {
                            module < *b_module
                                || (module == *b_module && left.lex_cmp(*b_left) == Ordering::Less)
                        } else {
                            false
                        }
                    }
                };
                if better {
                    best = Some((sse, module, left));
                }
            }
        }
        best.map(|(sse, module, left)| Split {
            module,
            left_options: left.iter().collect(),
            sse,
            parent_sse,
        })
    }
}

/// Candidate left sets: each unordered two-way partition of `present`, keyed by
/// the side holding the smallest present option.
fn left_sets(present: OptionSet, stats: &[(usize, f64, f64)]) -> Vec<OptionSet> {
    let opts: Vec<usize> = present.iter().collect();
    let q = opts.len();
    let anchor = opts[0];
    if q <= EXHAUSTIVE_LIMIT {
        let rest = &opts[1..];
        (0u32..(1 << (q - 1)) - 1)
            .map(|mask| {
                let mut s = OptionSet::singleton(anchor);
                for (b, &o) in rest.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        s.insert(o);
                    }
                }
                s
            })
            .collect()
    } else {
        // Ordering categories by mean response contains the SSE-optimal partition.
        let mut by_mean = opts.clone();
        by_mean.sort_by(|&a, &b| {
            let ma = stats[a].1 / stats[a].0 as f64;
            let mb = stats[b].1 / stats[b].0 as f64;
            ma.total_cmp(&mb).then(a.cmp(&b))
        });
        (1..q)
            .map(|cut| {
                let s: OptionSet = by_mean[..cut].iter().copied().collect();
                if s.contains(anchor) {
                    s
                } else {
                    present.difference(s)
                }
            })
            .collect()
    }
}

/// The split of `rows` over `candidate_modules` with the lowest child SSE, or
/// `None` when no split reduces the SSE.
pub fn best_split(rows: &[(Variant, f64)], candidate_modules: &[usize]) -> Option<Split> {
    let n_modules = rows.first()?.0.len();
    let data = Rows::new(rows, n_modules);
    let idx: Vec<usize> = (0..rows.len()).collect();
    let mut candidates = candidate_modules.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    let split = data.search(&idx, &candidates, 1)?;
    if split.parent_sse - split.sse > 1e-12 * split.parent_sse {
        Some(split)
    } else {
        None
    }
}

struct Grower<'a, R: Rng> {
    rows: &'a Rows,
    arities: &'a [usize],
    features: usize,
    min_leaf: usize,
    max_depth: Option<usize>,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: Rng> Grower<'_, R> {
    fn grow(&mut self, idx: Vec<usize>, partition: Vec<OptionSet>, depth: usize) -> usize {
        let at = self.nodes.len();
        let value = self.rows.mean(&idx);
        self.nodes.push(Node::Leaf {
            value,
            partition: partition.clone(),
        });

        let first = self.rows.y[idx[0]];
        let constant = idx.iter().all(|&i| self.rows.y[i] == first);
        if constant
            || idx.len() < 2 * self.min_leaf
            || self.max_depth.is_some_and(|d| depth >= d)
        {
            return at;
        }
        let splittable: Vec<usize> = (0..self.arities.len())
            .filter(|&j| self.rows.present(&idx, j).len() >= 2)
            .collect();
        if splittable.is_empty() {
            return at;
        }
        let amount = self.features.min(splittable.len());
        let mut candidates: Vec<usize> = index::sample(self.rng, splittable.len(), amount)
            .into_iter()
            .map(|i| splittable[i])
            .collect();
        candidates.sort_unstable();

        let Some(split) = self.rows.search(&idx, &candidates, self.min_leaf) else {
            return at;
        };
        let left_set: OptionSet = split.left_options.iter().copied().collect();
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| left_set.contains(self.rows.option(i, split.module)));

        let mut left_part = partition.clone();
        left_part[split.module] = partition[split.module].intersection(left_set);
        let mut right_part = partition;
        right_part[split.module] = right_part[split.module].difference(left_set);

        let left = self.grow(left_idx, left_part, depth + 1);
        let right = self.grow(right_idx, right_part, depth + 1);
        self.nodes[at] = Node::Split {
            module: split.module,
            left_options: left_set,
            left,
            right,
        };
        at
    }
}

fn grow_tree<R: Rng>(
    space: &ConfigSpace,
    rows: &Rows,
    sample: Vec<usize>,
    params: &FitParams,
    rng: &mut R,
) -> Tree {
    let arities = space.arities();
    let partition = arities.iter().map(|&k| OptionSet::full(k)).collect();
    let mut grower = Grower {
        rows,
        arities: &arities,
        features: params.features(space.n_modules()),
        min_leaf: params.min_samples_leaf,
        max_depth: params.max_depth,
        rng,
        nodes: Vec::new(),
    };
    grower.grow(sample, partition, 0);
    let nodes = grower.nodes;
    Tree { arities, nodes }
}

/// Fits one tree on every row of `data` (no resampling).
///
/// A node keeps splitting while its responses differ and some drawn module
/// separates its rows, even when the best split does not lower the SSE; this
/// lets pure interactions (zero marginal gain) be represented exactly.
pub fn fit_tree<R: Rng>(data: &Dataset, params: &FitParams, rng: &mut R) -> Result<Tree> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    params.validate(data.space().n_modules())?;
    let rows = Rows::new(data.rows(), data.space().n_modules());
    let sample = (0..data.len()).collect();
    Ok(grow_tree(data.space(), &rows, sample, params, rng))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    space: ConfigSpace,
    params: FitParams,
    trees: Vec<Tree>,
}

impl Forest {
    pub fn from_trees(space: ConfigSpace, params: FitParams, trees: Vec<Tree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidParams("a forest needs at least one tree".into()));
        }
        let arities = space.arities();
        for t in &trees {
            if t.arities != arities {
                return Err(Error::Invariant("tree arities do not match the space".into()));
            }
            t.validate()?;
        }
        Ok(Forest {
            space,
            params,
            trees,
        })
    }

    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    pub fn params(&self) -> &FitParams {
        &self.params
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn predict(&self, v: &Variant) -> f64 {
        self.trees.iter().map(|t| t.predict(v)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and re-validates a serialized forest.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Forest = serde_json::from_str(text)?;
        Forest::from_trees(raw.space, raw.params, raw.trees)
    }
}

/// Fits `params.n_trees` trees in parallel; output is independent of scheduling.
pub fn fit_forest(data: &Dataset, params: &FitParams) -> Result<Forest> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let space = data.space();
    params.validate(space.n_modules())?;
    let rows = Rows::new(data.rows(), space.n_modules());
    let n = data.len();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_stream(params.seed, t as u64);
            let sample = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow_tree(space, &rows, sample, params, &mut rng)
        })
        .collect();
    Ok(Forest {
        space: space.clone(),
        params: params.clone(),
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Scenario;
    use crate::space::ModuleSpec;

    fn space(arities: &[usize]) -> ConfigSpace {
        ConfigSpace::new(
            arities
                .iter()
                .enumerate()
                .map(|(j, &k)| ModuleSpec::new(format!("m{j}"), (0..k).map(|o| format!("o{o}"))))
                .collect(),
        )
        .unwrap()
    }

    fn rows(pairs: &[(&[usize], f64)]) -> Vec<(Variant, f64)> {
        pairs.iter().map(|(v, y)| (Variant(v.to_vec()), *y)).collect()
    }

    #[test]
    fn option_set_basics() {
        let s: OptionSet = [0, 2].into_iter().collect();
        assert!(s.contains(0) && !s.contains(1) && s.contains(2));
        assert_eq!(s.len(), 2);
        assert_eq!(OptionSet::full(3).difference(s), OptionSet::singleton(1));
        assert_eq!(serde_json::to_string(&s).unwrap(), "[0,2]");
        assert_eq!(OptionSet::full(64).len(), 64);
        assert_eq!(
            OptionSet::singleton(1).lex_cmp([0, 2].into_iter().collect()),
            Ordering::Greater
        );
    }

    #[test]
    fn three_option_split_groups_the_equal_pair() {
        // partitions: {a}|{b,c} sse 50, {a,b}|{c} sse 0, {a,c}|{b} sse 50
        let r = rows(&[(&[0], 0.0), (&[1], 0.0), (&[2], 10.0)]);
        let s = best_split(&r, &[0]).unwrap();
        assert_eq!(s.left_options, vec![0, 1]);
        assert_eq!(s.sse, 0.0);
        assert!((s.parent_sse - 200.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn constant_responses_do_not_split() {
        let r = rows(&[(&[0, 0], 2.0), (&[1, 1], 2.0), (&[2, 0], 2.0)]);
        assert!(best_split(&r, &[0, 1]).is_none());
    }

    #[test]
    fn ties_go_to_the_lower_module() {
        // y depends on m0 and m1 identically
        let r = rows(&[(&[0, 0], 0.0), (&[1, 1], 1.0)]);
        assert_eq!(best_split(&r, &[1, 0]).unwrap().module, 0);
    }

    #[test]
    fn zero_gain_split_is_not_reported() {
        // xor: each single module split leaves the SSE unchanged
        let r = rows(&[(&[0, 0], 0.0), (&[0, 1], 1.0), (&[1, 0], 1.0), (&[1, 1], 0.0)]);
        assert!(best_split(&r, &[0, 1]).is_none());
    }

    #[test]
    fn many_options_use_mean_ordering() {
        let k = 20;
        let s = space(&[k]);
        let r: Vec<_> = s
            .variants()
            .map(|v| {
                let y = if v.0[0] % 3 == 0 { 5.0 } else { -1.0 };
                (v, y)
            })
            .collect();
        let split = best_split(&r, &[0]).unwrap();
        assert_eq!(split.sse, 0.0);
        assert!(split.left_options.contains(&0));
        assert!(split.left_options.iter().all(|o| o % 3 == 0));
    }

    #[test]
    fn single_row_and_constant_trees_are_one_leaf() {
        let s = space(&[2, 3]);
        let one = Dataset::new(s.clone(), rows(&[(&[1, 2], 4.5)]), Scenario::Synthetic).unwrap();
        let t = fit_tree(&one, &FitParams::exact(2), &mut tree_stream(0, 0)).unwrap();
        assert_eq!(t.nodes().len(), 1);
        let (value, partition) = t.leaves().next().unwrap();
        assert_eq!(value, 4.5);
        assert_eq!(partition, &[OptionSet::full(2), OptionSet::full(3)]);

        let constant: Vec<_> = s.variants().map(|v| (v, 3.5)).collect();
        let d = Dataset::new(s.clone(), constant, Scenario::Synthetic).unwrap();
        let t = fit_tree(&d, &FitParams::exact(2), &mut tree_stream(0, 0)).unwrap();
        assert_eq!(t.n_leaves(), 1);
        assert!(s.variants().all(|v| t.predict(&v) == 3.5));
    }

    #[test]
    fn exact_tree_reproduces_additive_factorial_data() {
        let s = space(&[3, 2, 4]);
        let effects = [[0.0, 1.5, -2.0, 0.0], [0.3, -0.7, 0.0, 0.0], [1.0, 2.0, -1.0, 0.25]];
        let data: Vec<_> = s
            .variants()
            .map(|v| {
                let y = v.0.iter().enumerate().map(|(j, &o)| effects[j][o]).sum();
                (v, y)
            })
            .collect();
        let d = Dataset::new(s.clone(), data.clone(), Scenario::Synthetic).unwrap();
        let t = fit_tree(&d, &FitParams::exact(3), &mut tree_stream(0, 0)).unwrap();
        for (v, y) in &data {
            assert!((t.predict(v) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_interaction_is_fit_exactly() {
        let s = space(&[2, 2]);
        let data: Vec<_> = s
            .variants()
            .map(|v| {
                let y = if v.0[0] == v.0[1] { 1.0 } else { -1.0 };
                (v, y)
            })
            .collect();
        let d = Dataset::new(s, data.clone(), Scenario::Synthetic).unwrap();
        let t = fit_tree(&d, &FitParams::exact(2), &mut tree_stream(0, 0)).unwrap();
        for (v, y) in &data {
            assert_eq!(t.predict(v), *y);
        }
    }

    #[test]
    fn forest_is_deterministic_and_serializable() {
        let s = space(&[3, 2, 2, 4]);
        let data: Vec<_> = s
            .variants()
            .enumerate()
            .map(|(i, v)| (v, ((i * 7919) % 101) as f64 / 10.0))
            .collect();
        let d = Dataset::new(s, data, Scenario::Synthetic).unwrap();
        let params = FitParams {
            n_trees: 8,
            seed: 11,
            ..FitParams::default()
        };
        let a = fit_forest(&d, &params).unwrap();
        let b = fit_forest(&d, &params).unwrap();
        assert_eq!(a, b);
        let json = a.to_json().unwrap();
        assert_eq!(Forest::from_json(&json).unwrap(), a);

        let other = fit_forest(&d, &FitParams { seed: 12, ..params }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn forest_prediction_is_tree_mean() {
        let arities = vec![2];
        let forest = Forest::from_trees(
            space(&[2]),
            FitParams::default(),
            vec![Tree::constant(arities.clone(), 1.0), Tree::constant(arities, 3.0)],
        )
        .unwrap();
        assert_eq!(forest.predict(&Variant(vec![1])), 2.0);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let s = space(&[2, 2]);
        let d = Dataset::new(s, rows(&[(&[0, 0], 1.0)]), Scenario::Synthetic).unwrap();
        for p in [
            FitParams { n_trees: 0, ..FitParams::default() },
            FitParams { features_per_split: Some(3), ..FitParams::default() },
            FitParams { min_samples_leaf: 0, ..FitParams::default() },
        ] {
            assert!(matches!(fit_forest(&d, &p), Err(Error::InvalidParams(_))));
        }
    }

    #[test]
    fn corrupted_model_fails_validation() {
        let mut t = Tree::constant(vec![2, 2], 1.0);
        if let Node::Leaf { partition, .. } = &mut t.nodes[0] {
            partition[0] = OptionSet::singleton(0);
        }
        assert!(t.validate().is_err());
    }
}
