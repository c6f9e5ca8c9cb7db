//! Functional-ANOVA analysis of module importance in modular optimizers.
//!
//! The crate turns benchmark run data into per-variant performance datasets,
//! fits random forests over the categorical module space, and decomposes the
//! variance of every tree into individual and interaction effects. An exact
//! decomposition of full-factorial data serves as a reference for the forest
//! path.

pub mod dataset;
pub mod error;
pub mod fanova;
pub mod forest;
pub mod format;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod similarity;
pub mod space;
pub mod synth;

pub use dataset::{Dataset, Scenario};
pub use error::{Error, Result};
pub use fanova::{decompose, EffectDecomposition, FractionMode, SubsetKey};
pub use forest::{fit_forest, fit_tree, FitParams, Forest, Tree};
pub use oracle::{exact_decompose, to_factorial, FactorialTable};
pub use similarity::{cosine_similarity, effect_vector, similarity_matrix, EffectVector};
pub use space::{ConfigSpace, ModuleSpec, Variant};
