//! Summary tables over a decomposition, and their CSV forms.
//!
//! All values here are percentages of the total variance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fanova::{EffectDecomposition, SubsetKey};
use crate::format::sig12;

fn require_order(d: &EffectDecomposition, order: usize) -> Result<()> {
    let n = d.space.n_modules();
    if d.max_order < order.min(n) {
        Err(Error::InvalidOrder {
            max_order: d.max_order,
            n_modules: n,
        })
    } else {
        Ok(())
    }
}

/// Cumulative percentage explained per interaction order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulativeSummary {
    pub individual: f64,
    pub pairwise: f64,
    pub triple: f64,
    pub total: f64,
}

impl CumulativeSummary {
    pub fn from_order_sums(individual: f64, pairwise: f64, triple: f64) -> Self {
        let (individual, pairwise, triple) = (100.0 * individual, 100.0 * pairwise, 100.0 * triple);
        CumulativeSummary {
            individual,
            pairwise,
            triple,
            total: individual + pairwise + triple,
        }
    }
}

pub fn cumulative_summary(d: &EffectDecomposition) -> Result<CumulativeSummary> {
    require_order(d, 3)?;
    Ok(CumulativeSummary::from_order_sums(
        d.order_sum(1),
        d.order_sum(2),
        d.order_sum(3),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub modules: [usize; 2],
    pub pairwise: f64,
    pub individual: [f64; 2],
    /// `V_1 + V_2 + V_12`.
    pub pair_total: f64,
}

fn percent_of(d: &EffectDecomposition, modules: &[usize]) -> f64 {
    100.0 * d.fraction_of(modules).unwrap_or(0.0)
}

/// One row per module pair, descending by the pair interaction term.
pub fn pair_table(d: &EffectDecomposition) -> Result<Vec<PairRow>> {
    require_order(d, 2)?;
    let mut rows: Vec<PairRow> = d
        .keys
        .iter()
        .filter(|k| k.order() == 2)
        .map(|k| {
            let [a, b] = [k.indices()[0], k.indices()[1]];
            let pairwise = percent_of(d, &[a, b]);
            let individual = [percent_of(d, &[a]), percent_of(d, &[b])];
            PairRow {
                modules: [a, b],
                pairwise,
                individual,
                pair_total: pairwise + individual[0] + individual[1],
            }
        })
        .collect();
    rows.sort_by(|x, y| y.pairwise.total_cmp(&x.pairwise));
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletRow {
    pub modules: [usize; 3],
    /// The isolated three-way interaction term.
    pub triplet: f64,
    /// Every individual, pairwise and three-way term within the triplet.
    pub triplet_total: f64,
}

/// The `k` triplets explaining the most variance in total (all of them if fewer).
pub fn triplet_table(d: &EffectDecomposition, k: usize) -> Result<Vec<TripletRow>> {
    require_order(d, 3)?;
    let mut rows: Vec<TripletRow> = d
        .keys
        .iter()
        .filter(|key| key.order() == 3)
        .map(|key| {
            let m = [key.indices()[0], key.indices()[1], key.indices()[2]];
            let triplet = percent_of(d, &m);
            let lower: f64 = [
                &[m[0]][..],
                &[m[1]],
                &[m[2]],
                &[m[0], m[1]],
                &[m[0], m[2]],
                &[m[1], m[2]],
            ]
            .iter()
            .map(|s| percent_of(d, s))
            .sum();
            TripletRow {
                modules: m,
                triplet,
                triplet_total: lower + triplet,
            }
        })
        .collect();
    rows.sort_by(|x, y| y.triplet_total.total_cmp(&x.triplet_total));
    rows.truncate(k);
    Ok(rows)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `subset,order,fraction_percent`, canonical subset order.
pub fn effects_csv(d: &EffectDecomposition) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["subset", "order", "fraction_percent"])?;
    for (k, f) in d.iter() {
        w.write_record([k.label(&d.space), k.order().to_string(), sig12(100.0 * f)])?;
    }
    finish(w)
}

/// Identifies the analysis a summary row belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryLabel {
    pub algorithm: String,
    pub dimension: Option<u32>,
    pub budget: Option<String>,
}

pub fn summary_csv(rows: &[(SummaryLabel, CumulativeSummary)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "algorithm",
        "dimension",
        "budget",
        "individual",
        "pairwise",
        "triple",
        "total",
    ])?;
    for (label, s) in rows {
        w.write_record([
            label.algorithm.clone(),
            label.dimension.map(|d| d.to_string()).unwrap_or_default(),
            label.budget.clone().unwrap_or_default(),
            format!("{:.2}", s.individual),
            format!("{:.2}", s.pairwise),
            format!("{:.2}", s.triple),
            format!("{:.2}", s.total),
        ])?;
    }
    finish(w)
}

pub fn pairs_csv(d: &EffectDecomposition, rows: &[PairRow]) -> Result<String> {
    let name = |j: usize| d.space.modules()[j].name.clone();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "module1",
        "module2",
        "pairwise",
        "individual1",
        "individual2",
        "pair_total",
    ])?;
    for r in rows {
        w.write_record([
            name(r.modules[0]),
            name(r.modules[1]),
            format!("{:.2}", r.pairwise),
            format!("{:.2}", r.individual[0]),
            format!("{:.2}", r.individual[1]),
            format!("{:.2}", r.pair_total),
        ])?;
    }
    finish(w)
}

pub fn triplets_csv(d: &EffectDecomposition, rows: &[TripletRow]) -> Result<String> {
    let name = |j: usize| d.space.modules()[j].name.clone();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "module1", "module2", "module3", "triplet", "triplet_total"])?;
    for (i, r) in rows.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            name(r.modules[0]),
            name(r.modules[1]),
            name(r.modules[2]),
            format!("{:.2}", r.triplet),
            format!("{:.2}", r.triplet_total),
        ])?;
    }
    finish(w)
}

/// A row of an effects CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectRow {
    pub subset: String,
    pub order: usize,
    pub fraction_percent: f64,
}

pub fn parse_effects_csv(text: &str) -> Result<Vec<EffectRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["subset", "order", "fraction_percent"] {
        return Err(Error::MalformedEffects(format!(
            "expected header subset,order,fraction_percent, got {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::MalformedEffects(format!("row {}: invalid {what}", i + 1));
        let subset = rec.get(0).unwrap_or("").to_string();
        let order: usize = rec.get(1).unwrap_or("").parse().map_err(|_| bad("order"))?;
        if order == 0 || subset.split(';').count() != order {
            return Err(bad("subset/order pair"));
        }
        let fraction_percent: f64 = rec.get(2).unwrap_or("").parse().map_err(|_| bad("fraction"))?;
        rows.push(EffectRow {
            subset,
            order,
            fraction_percent,
        });
    }
    Ok(rows)
}

/// Human-readable module list of a key.
pub fn subset_names(d: &EffectDecomposition, key: &SubsetKey) -> Vec<String> {
    key.indices()
        .iter()
        .map(|&j| d.space.modules()[j].name.clone())
        .collect()
}
