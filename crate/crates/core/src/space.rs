//! Categorical configuration spaces of modular optimizers.
//!
//! A [`ConfigSpace`] is an ordered list of modules, each with a finite list of
//! option labels. A [`Variant`] assigns one option index to every module.
//! Variants are enumerated in lexicographic index order, which is also the
//! order used for dense factorial tables.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest option count a module may have; option subsets are stored as `u64` masks.
pub const MAX_OPTIONS: usize = 64;

const MODCMA_JSON: &str = include_str!("../fixtures/modcma.json");
const MODDE_JSON: &str = include_str!("../fixtures/modde.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub name: String,
    pub options: Vec<String>,
}

impl ModuleSpec {
    pub fn new<S: Into<String>, O: Into<String>>(
        name: S,
        options: impl IntoIterator<Item = O>,
    ) -> Self {
        Self {
            name: name.into(),
            options: options.into_iter().map(Into::into).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.options.len()
    }

    pub fn option_index(&self, label: &str) -> Option<usize> {
        self.options.iter().position(|o| o == label)
    }
}

/// One complete assignment of option indices, one per module.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Variant(pub Vec<usize>);

impl Variant {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for Variant {
    fn from(v: Vec<usize>) -> Self {
        Variant(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ModuleSpec>", into = "Vec<ModuleSpec>")]
pub struct ConfigSpace {
    modules: Vec<ModuleSpec>,
}

impl TryFrom<Vec<ModuleSpec>> for ConfigSpace {
    type Error = Error;

    fn try_from(modules: Vec<ModuleSpec>) -> Result<Self> {
        ConfigSpace::new(modules)
    }
}

impl From<ConfigSpace> for Vec<ModuleSpec> {
    fn from(space: ConfigSpace) -> Self {
        space.modules
    }
}

impl ConfigSpace {
    pub fn new(modules: Vec<ModuleSpec>) -> Result<Self> {
        if modules.is_empty() {
            return Err(Error::MalformedSpace("no modules".into()));
        }
        let mut names = HashSet::new();
        for m in &modules {
            if m.name.is_empty() {
                return Err(Error::MalformedSpace("empty module name".into()));
            }
            if !names.insert(m.name.as_str()) {
                return Err(Error::DuplicateModule(m.name.clone()));
            }
            if m.options.is_empty() {
                return Err(Error::EmptyOptions(m.name.clone()));
            }
            if m.options.len() > MAX_OPTIONS {
                return Err(Error::TooManyOptions {
                    module: m.name.clone(),
                    count: m.options.len(),
                    max: MAX_OPTIONS,
                });
            }
            let mut seen = HashSet::new();
            for o in &m.options {
                if !seen.insert(o.as_str()) {
                    return Err(Error::DuplicateOption {
                        module: m.name.clone(),
                        option: o.clone(),
                    });
                }
            }
        }
        Ok(Self { modules })
    }

    /// Parses a JSON list of `{"name": ..., "options": [...]}` entries.
    pub fn parse_json(text: &str) -> Result<Self> {
        let modules: Vec<ModuleSpec> =
            serde_json::from_str(text).map_err(|e| Error::MalformedSpace(e.to_string()))?;
        Self::new(modules)
    }

    /// The six-module modular CMA-ES space (324 variants).
    pub fn modcma() -> Self {
        Self::parse_json(MODCMA_JSON).expect("modcma fixture is valid")
    }

    /// The seven-module modular DE space (576 variants).
    pub fn modde() -> Self {
        Self::parse_json(MODDE_JSON).expect("modde fixture is valid")
    }

    pub fn modules(&self) -> &[ModuleSpec] {
        &self.modules
    }

    pub fn n_modules(&self) -> usize {
        self.modules.len()
    }

    pub fn arity(&self, module: usize) -> usize {
        self.modules[module].arity()
    }

    pub fn arities(&self) -> Vec<usize> {
        self.modules.iter().map(ModuleSpec::arity).collect()
    }

    pub fn module_names(&self) -> Vec<String> {
        self.modules.iter().map(|m| m.name.clone()).collect()
    }

    pub fn module_index(&self, name: &str) -> Option<usize> {
        self.modules.iter().position(|m| m.name == name)
    }

    /// Number of variants; saturates at `usize::MAX`.
    pub fn cardinality(&self) -> usize {
        self.modules
            .iter()
            .fold(1usize, |acc, m| acc.saturating_mul(m.arity()))
    }

    pub fn contains(&self, v: &Variant) -> bool {
        v.len() == self.n_modules()
            && v.0.iter().zip(&self.modules).all(|(&i, m)| i < m.arity())
    }

    pub fn validate(&self, v: &Variant) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::InvalidVariant(format!(
                "{:?} does not belong to a space with arities {:?}",
                v.0,
                self.arities()
            )))
        }
    }

    /// Resolves a module-name to option-label mapping into a variant.
    pub fn encode<'a, I>(&self, labels: I) -> Result<Variant>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut slots: Vec<Option<usize>> = vec![None; self.n_modules()];
        for (name, label) in labels {
            let j = self
                .module_index(name)
                .ok_or_else(|| Error::UnknownModule(name.to_string()))?;
            let module = &self.modules[j];
            let idx = module
                .option_index(label)
                .ok_or_else(|| Error::UnknownOption {
                    module: name.to_string(),
                    option: label.to_string(),
                })?;
            if slots[j].replace(idx).is_some() {
                return Err(Error::DuplicateModule(name.to_string()));
            }
        }
        slots
            .into_iter()
            .zip(&self.modules)
            .map(|(s, m)| s.ok_or_else(|| Error::MissingModule(m.name.clone())))
            .collect::<Result<Vec<_>>>()
            .map(Variant)
    }

    /// Option labels of a variant, in module order.
    pub fn labels(&self, v: &Variant) -> Vec<&str> {
        v.0.iter()
            .zip(&self.modules)
            .map(|(&i, m)| m.options[i].as_str())
            .collect()
    }

    /// All variants in lexicographic index order.
    pub fn variants(&self) -> Variants {
        Variants {
            arities: self.arities(),
            next: Some(vec![0; self.n_modules()]),
        }
    }

    /// Position of `v` in lexicographic order.
    pub fn rank(&self, v: &Variant) -> usize {
        v.0.iter()
            .zip(&self.modules)
            .fold(0, |acc, (&i, m)| acc * m.arity() + i)
    }

    pub fn unrank(&self, mut rank: usize) -> Variant {
        let mut idx = vec![0; self.n_modules()];
        for (slot, m) in idx.iter_mut().zip(&self.modules).rev() {
            *slot = rank % m.arity();
            rank /= m.arity();
        }
        Variant(idx)
    }
}

/// Lexicographic odometer over a space.
#[derive(Debug, Clone)]
pub struct Variants {
    arities: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for Variants {
    type Item = Variant;

    fn next(&mut self) -> Option<Variant> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carry = true;
        for (digit, &k) in succ.iter_mut().zip(&self.arities).rev() {
            *digit += 1;
            if *digit < k {
                carry = false;
                break;
            }
            *digit = 0;
        }
        if !carry {
            self.next = Some(succ);
        }
        Some(Variant(current))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn fixture_cardinalities() {
        let cma = ConfigSpace::modcma();
        assert_eq!(cma.n_modules(), 6);
        assert_eq!(cma.cardinality(), 324);
        let de = ConfigSpace::modde();
        assert_eq!(de.n_modules(), 7);
        assert_eq!(de.cardinality(), 576);
    }

    #[test]
    fn degenerate_single_option_space() {
        let s = ConfigSpace::parse_json(r#"[{"name":"m","options":["a"]}]"#).unwrap();
        assert_eq!(s.cardinality(), 1);
        assert_eq!(s.variants().count(), 1);
    }

    #[test]
    fn parse_rejects_bad_documents() {
        assert!(matches!(
            ConfigSpace::parse_json(r#"{"name":"m"}"#),
            Err(Error::MalformedSpace(_))
        ));
        assert!(matches!(
            ConfigSpace::parse_json(r#"[{"name":"m","options":["a"]},{"name":"m","options":["b"]}]"#),
            Err(Error::DuplicateModule(_))
        ));
        assert!(matches!(
            ConfigSpace::parse_json(r#"[{"name":"m","options":["a","a"]}]"#),
            Err(Error::DuplicateOption { .. })
        ));
        assert!(matches!(
            ConfigSpace::parse_json(r#"[{"name":"m","options":[]}]"#),
            Err(Error::EmptyOptions(_))
        ));
    }

    #[test]
    fn encode_resolves_labels() {
        let cma = ConfigSpace::modcma();
        let mut labels: Vec<(&str, &str)> = cma
            .modules()
            .iter()
            .map(|m| (m.name.as_str(), m.options[0].as_str()))
            .collect();
        assert_eq!(cma.encode(labels.clone()).unwrap(), Variant(vec![0; 6]));
        labels[0].1 = "Sobol";
        let v = cma.encode(labels.clone()).unwrap();
        assert_eq!(v.0[0], 1);
        assert_eq!(cma.labels(&v)[0], "Sobol");

        labels[0].1 = "gauss";
        assert!(matches!(
            cma.encode(labels.clone()),
            Err(Error::UnknownOption { .. })
        ));
        labels[0] = ("sampler", "Sobol");
        assert!(matches!(cma.encode(labels.clone()), Err(Error::UnknownModule(_))));
        assert!(matches!(
            cma.encode(labels[1..].iter().copied()),
            Err(Error::MissingModule(m)) if m == "base_sampler"
        ));
    }

    #[test]
    fn enumeration_orders() {
        let one = space(&[2]);
        let vs: Vec<_> = one.variants().collect();
        assert_eq!(vs, vec![Variant(vec![0]), Variant(vec![1])]);

        let two = space(&[2, 3]);
        let vs: Vec<_> = two.variants().map(|v| v.0).collect();
        assert_eq!(
            vs,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
        assert_eq!(ConfigSpace::modcma().variants().count(), 324);
    }

    #[test]
    fn rank_matches_enumeration() {
        let s = space(&[3, 2, 4]);
        for (i, v) in s.variants().enumerate() {
            assert_eq!(s.rank(&v), i);
            assert_eq!(s.unrank(i), v);
        }
    }

    #[test]
    fn serde_roundtrip_validates() {
        let cma = ConfigSpace::modcma();
        let text = serde_json::to_string(&cma).unwrap();
        let back: ConfigSpace = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cma);
        assert!(serde_json::from_str::<ConfigSpace>(r#"[{"name":"m","options":[]}]"#).is_err());
    }
}
