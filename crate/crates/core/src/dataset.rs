use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig12;
use crate::space::{ConfigSpace, Variant};

/// Which analysis a dataset was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "problem_id")]
pub enum Scenario {
    Suite,
    Problem(u32),
    Synthetic,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scenario::Suite => f.write_str("suite"),
            Scenario::Problem(p) => write!(f, "problem-{p}"),
            Scenario::Synthetic => f.write_str("synthetic"),
        }
    }
}

/// Variant/response rows for one analysis scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    space: ConfigSpace,
    rows: Vec<(Variant, f64)>,
    scenario: Scenario,
    dimension: Option<u32>,
    budget: Option<u64>,
}

impl Dataset {
    /// Builds a dataset, rejecting foreign and duplicate variants.
    pub fn new(space: ConfigSpace, rows: Vec<(Variant, f64)>, scenario: Scenario) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        for (v, y) in &rows {
            space.validate(v)?;
            if !y.is_finite() {
                return Err(Error::InvalidVariant(format!(
                    "non-finite response {y} for {:?}",
                    v.0
                )));
            }
            if !seen.insert(v) {
                return Err(Error::DuplicateVariant(v.clone()));
            }
        }
        Ok(Self {
            space,
            rows,
            scenario,
            dimension: None,
            budget: None,
        })
    }

    pub fn with_metadata(mut self, dimension: Option<u32>, budget: Option<u64>) -> Self {
        self.dimension = dimension;
        self.budget = budget;
        self
    }

    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    pub fn rows(&self) -> &[(Variant, f64)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn dimension(&self) -> Option<u32> {
        self.dimension
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn responses(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|(_, y)| *y)
    }

    /// Same variants with every response passed through `f`.
    pub fn map_responses(&self, f: impl Fn(f64) -> f64) -> Dataset {
        Dataset {
            rows: self.rows.iter().map(|(v, y)| (v.clone(), f(*y))).collect(),
            ..self.clone()
        }
    }

    /// Sorts rows into lexicographic variant order.
    pub fn sorted(mut self) -> Self {
        self.rows.sort_by(|a, b| a.0.cmp(&b.0));
        self
    }

    /// `variant_id,<module columns>,response`, variant ids being lexicographic ranks.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["variant_id".to_string()];
        header.extend(self.space.module_names());
        header.push("response".into());
        w.write_record(&header)?;
        for (v, y) in &self.rows {
            let mut rec = vec![self.space.rank(v).to_string()];
            rec.extend(self.space.labels(v).into_iter().map(str::to_string));
            rec.push(sig12(*y));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Reads the format written by [`Dataset::to_csv`]; `variant_id` is optional.
    pub fn from_csv(space: &ConfigSpace, text: &str, scenario: Scenario) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        let module_cols = module_columns(space, &header)?;
        let response_col = column(&header, "response")?;
        for name in header.iter() {
            if name != "variant_id" && name != "response" && space.module_index(name).is_none() {
                return Err(Error::Schema(format!("unexpected column `{name}`")));
            }
        }
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let record = i as u64 + 1;
            let v = encode_record(space, &rec, &module_cols, record)?;
            let y = parse_f64(&rec, response_col, record)?;
            rows.push((v, y));
        }
        Dataset::new(space.clone(), rows, scenario)
    }
}

pub(crate) fn column(header: &csv::StringRecord, name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
}

/// Column index of every module, in module order.
pub(crate) fn module_columns(space: &ConfigSpace, header: &csv::StringRecord) -> Result<Vec<usize>> {
    space
        .modules()
        .iter()
        .map(|m| column(header, &m.name))
        .collect()
}

pub(crate) fn encode_record(
    space: &ConfigSpace,
    rec: &csv::StringRecord,
    module_cols: &[usize],
    record: u64,
) -> Result<Variant> {
    let labels = space
        .modules()
        .iter()
        .zip(module_cols)
        .map(|(m, &c)| (m.name.as_str(), rec.get(c).unwrap_or("")));
    space.encode(labels).map_err(|e| Error::Record {
        record,
        message: e.to_string(),
    })
}

pub(crate) fn parse_f64(rec: &csv::StringRecord, col: usize, record: u64) -> Result<f64> {
    let raw = rec.get(col).unwrap_or("").trim();
    raw.parse::<f64>().map_err(|_| Error::Record {
        record,
        message: format!("cannot parse `{raw}` as a number"),
    })
}

pub(crate) fn parse_int<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    col: usize,
    record: u64,
) -> Result<T> {
    let raw = rec.get(col).unwrap_or("").trim();
    raw.parse::<T>().map_err(|_| Error::Record {
        record,
        message: format!("cannot parse `{raw}` as an integer"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ModuleSpec;

    fn small() -> ConfigSpace {
        ConfigSpace::new(vec![
            ModuleSpec::new("a", ["x", "y"]),
            ModuleSpec::new("b", ["p", "q", "r"]),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_duplicates_and_foreign_variants() {
        let s = small();
        let dup = vec![(Variant(vec![0, 1]), 1.0), (Variant(vec![0, 1]), 2.0)];
        assert!(matches!(
            Dataset::new(s.clone(), dup, Scenario::Synthetic),
            Err(Error::DuplicateVariant(_))
        ));
        let foreign = vec![(Variant(vec![0, 3]), 1.0)];
        assert!(Dataset::new(s, foreign, Scenario::Synthetic).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let s = small();
        let rows = s
            .variants()
            .enumerate()
            .map(|(i, v)| (v, i as f64 * 0.25 - 1.0))
            .collect();
        let d = Dataset::new(s.clone(), rows, Scenario::Synthetic).unwrap();
        let text = d.to_csv().unwrap();
        assert!(text.starts_with("variant_id,a,b,response\n0,x,p,-1\n"));
        let back = Dataset::from_csv(&s, &text, Scenario::Synthetic).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn csv_schema_errors() {
        let s = small();
        assert!(matches!(
            Dataset::from_csv(&s, "a,response\nx,1\n", Scenario::Synthetic),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            Dataset::from_csv(&s, "a,b,response\nx,z,1\n", Scenario::Synthetic),
            Err(Error::Record { .. })
        ));
    }
}
