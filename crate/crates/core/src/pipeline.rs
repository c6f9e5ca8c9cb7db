//! From raw benchmark runs to analysis datasets.
//!
//! Per (variant, problem, instance, dimension, budget) the median target
//! precision over runs is clamped at [`PRECISION_FLOOR`] and moved to log10
//! space. Suite-level datasets average those values over every problem
//! instance; problem-level datasets take the median over the instances of
//! one problem.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{column, encode_record, module_columns, parse_f64, parse_int, Dataset, Scenario};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::space::{ConfigSpace, Variant};

/// Precisions below this are treated as solved.
pub const PRECISION_FLOOR: f64 = 1e-8;

const RUN_COLUMNS: [&str; 7] = [
    "variant_id",
    "dimension",
    "budget",
    "problem_id",
    "instance_id",
    "run_id",
    "precision",
];
const TRAJECTORY_COLUMNS: [&str; 7] = [
    "variant_id",
    "dimension",
    "problem_id",
    "instance_id",
    "run_id",
    "evals",
    "best_f",
];
const CELL_COLUMNS: [&str; 6] = [
    "variant_id",
    "dimension",
    "budget",
    "problem_id",
    "instance_id",
    "log_precision",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub variant: Variant,
    pub problem_id: u32,
    pub instance_id: u32,
    pub run_id: u32,
    pub dimension: u32,
    pub budget: u64,
    pub precision: f64,
}

impl RunRecord {
    pub fn cell_key(&self) -> CellKey {
        CellKey {
            variant: self.variant.clone(),
            problem_id: self.problem_id,
            instance_id: self.instance_id,
            dimension: self.dimension,
            budget: self.budget,
        }
    }
}

/// Grouping key shared by the runs that make up one [`PrecisionCell`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub variant: Variant,
    pub problem_id: u32,
    pub instance_id: u32,
    pub dimension: u32,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionCell {
    pub variant: Variant,
    pub problem_id: u32,
    pub instance_id: u32,
    pub dimension: u32,
    pub budget: u64,
    pub log_precision: f64,
}

/// A budget either in absolute evaluations or as a multiple of the dimension (`500d`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Budget {
    Evaluations(u64),
    PerDimension(u64),
}

impl Budget {
    pub fn resolve(self, dimension: u32) -> u64 {
        match self {
            Budget::Evaluations(b) => b,
            Budget::PerDimension(m) => m * u64::from(dimension),
        }
    }
}

impl FromStr for Budget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (digits, per_dim) = match s.strip_suffix('d') {
            Some(d) => (d, true),
            None => (s, false),
        };
        let n: u64 = digits
            .parse()
            .map_err(|_| format!("invalid budget `{s}`, expected e.g. `2500` or `500d`"))?;
        if n == 0 {
            return Err("budget must be positive".into());
        }
        Ok(if per_dim {
            Budget::PerDimension(n)
        } else {
            Budget::Evaluations(n)
        })
    }
}

impl std::fmt::Display for Budget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Budget::Evaluations(b) => write!(f, "{b}"),
            Budget::PerDimension(m) => write!(f, "{m}d"),
        }
    }
}

fn check_columns(space: &ConfigSpace, header: &csv::StringRecord, fixed: &[&str]) -> Result<()> {
    let mut expected: BTreeSet<&str> = fixed.iter().copied().collect();
    for m in space.modules() {
        if !expected.insert(m.name.as_str()) {
            return Err(Error::Schema(format!(
                "module name `{}` collides with a reserved column",
                m.name
            )));
        }
    }
    let mut present = BTreeSet::new();
    for h in header.iter() {
        if !expected.contains(h) {
            return Err(Error::Schema(format!("unexpected column `{h}`")));
        }
        if !present.insert(h) {
            return Err(Error::Schema(format!("duplicate column `{h}`")));
        }
    }
    if let Some(missing) = expected.iter().find(|c| !present.contains(*c)) {
        return Err(Error::Schema(format!("missing column `{missing}`")));
    }
    Ok(())
}

fn positive<T: PartialOrd + Default + std::fmt::Display>(v: T, what: &str, record: u64) -> Result<T> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(Error::Record {
            record,
            message: format!("{what} must be positive, got {v}"),
        })
    }
}

fn bbob_problem(p: u32, record: u64) -> Result<u32> {
    if (1..=24).contains(&p) {
        Ok(p)
    } else {
        Err(Error::Record {
            record,
            message: format!("problem_id {p} outside 1..=24"),
        })
    }
}

/// Parses the long-format run CSV.
pub fn ingest_runs(space: &ConfigSpace, text: &str) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.is_empty() && text.trim().is_empty() {
        return Ok(Vec::new());
    }
    check_columns(space, &header, &RUN_COLUMNS)?;
    let modules = module_columns(space, &header)?;
    let [dim, budget, problem, instance, run, precision] =
        ["dimension", "budget", "problem_id", "instance_id", "run_id", "precision"]
            .map(|c| column(&header, c).expect("checked above"));

    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let record = i as u64 + 1;
        let p = parse_f64(&rec, precision, record)?;
        if p.is_nan() || p < 0.0 {
            return Err(Error::NegativePrecision { record, value: p });
        }
        out.push(RunRecord {
            variant: encode_record(space, &rec, &modules, record)?,
            dimension: positive(parse_int(&rec, dim, record)?, "dimension", record)?,
            budget: positive(parse_int(&rec, budget, record)?, "budget", record)?,
            problem_id: bbob_problem(parse_int(&rec, problem, record)?, record)?,
            instance_id: parse_int(&rec, instance, record)?,
            run_id: parse_int(&rec, run, record)?,
            precision: p,
        });
    }
    Ok(out)
}

/// Target precision after `budget` evaluations of a best-so-far trajectory.
///
/// The trajectory is a step function: the value at `budget` is the entry with
/// the largest evaluation count not exceeding it.
pub fn extract_at_budget(trajectory: &[(u64, f64)], budget: u64, optimum: f64) -> Result<f64> {
    let first = trajectory.first().ok_or(Error::EmptyTrajectory)?.0;
    let n = trajectory.partition_point(|&(evals, _)| evals <= budget);
    if n == 0 {
        return Err(Error::BudgetBeforeFirstRecord { budget, first });
    }
    Ok(trajectory[n - 1].1 - optimum)
}

/// Turns per-run trajectories into run records, one per requested budget.
pub fn ingest_trajectories(
    space: &ConfigSpace,
    trajectories: &str,
    optima: &str,
    budgets: &[Budget],
) -> Result<Vec<RunRecord>> {
    let mut optimum_of: HashMap<(u32, u32), f64> = HashMap::new();
    {
        let mut r = csv::Reader::from_reader(optima.as_bytes());
        let header = r.headers()?.clone();
        let cols = ["problem_id", "instance_id", "optimum"]
            .map(|c| column(&header, c))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        if header.len() != 3 {
            return Err(Error::Schema("optima file must have exactly problem_id,instance_id,optimum".into()));
        }
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let record = i as u64 + 1;
            let key = (parse_int(&rec, cols[0], record)?, parse_int(&rec, cols[1], record)?);
            optimum_of.insert(key, parse_f64(&rec, cols[2], record)?);
        }
    }

    type RunKey = (Variant, u32, u32, u32, u32);
    let mut runs: BTreeMap<RunKey, Vec<(u64, f64)>> = BTreeMap::new();
    let mut r = csv::Reader::from_reader(trajectories.as_bytes());
    let header = r.headers()?.clone();
    check_columns(space, &header, &TRAJECTORY_COLUMNS)?;
    let modules = module_columns(space, &header)?;
    let [dim, problem, instance, run, evals, best] =
        ["dimension", "problem_id", "instance_id", "run_id", "evals", "best_f"]
            .map(|c| column(&header, c).expect("checked above"));
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let record = i as u64 + 1;
        let key = (
            encode_record(space, &rec, &modules, record)?,
            positive(parse_int(&rec, dim, record)?, "dimension", record)?,
            bbob_problem(parse_int(&rec, problem, record)?, record)?,
            parse_int(&rec, instance, record)?,
            parse_int(&rec, run, record)?,
        );
        let point = (
            positive(parse_int(&rec, evals, record)?, "evals", record)?,
            parse_f64(&rec, best, record)?,
        );
        runs.entry(key).or_default().push(point);
    }

    let mut out = Vec::with_capacity(runs.len() * budgets.len());
    for ((variant, dimension, problem_id, instance_id, run_id), mut traj) in runs {
        traj.sort_by_key(|&(e, _)| e);
        if traj.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Schema(format!(
                "repeated evaluation count in trajectory of problem {problem_id} instance {instance_id} run {run_id}"
            )));
        }
        let optimum = *optimum_of.get(&(problem_id, instance_id)).ok_or_else(|| {
            Error::Schema(format!("no optimum for problem {problem_id} instance {instance_id}"))
        })?;
        for b in budgets {
            let budget = b.resolve(dimension);
            let precision = extract_at_budget(&traj, budget, optimum)?;
            if precision.is_nan() || precision < 0.0 {
                return Err(Error::NegativePrecision {
                    record: 0,
                    value: precision,
                });
            }
            out.push(RunRecord {
                variant: variant.clone(),
                problem_id,
                instance_id,
                run_id,
                dimension,
                budget,
                precision,
            });
        }
    }
    Ok(out)
}

/// Median; even counts take the midpoint of the two central order statistics.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// log10 of the run-median precision, clamped below at [`PRECISION_FLOOR`].
pub fn solution_precision(records: &[RunRecord]) -> Result<PrecisionCell> {
    let first = records.first().ok_or(Error::EmptyGroup)?;
    let key = first.cell_key();
    if records.iter().any(|r| r.cell_key() != key) {
        return Err(Error::Invariant(
            "run group mixes variants, problems, instances, dimensions or budgets".into(),
        ));
    }
    let precisions: Vec<f64> = records.iter().map(|r| r.precision).collect();
    let med = median(&precisions).expect("non-empty");
    Ok(PrecisionCell {
        variant: key.variant,
        problem_id: key.problem_id,
        instance_id: key.instance_id,
        dimension: key.dimension,
        budget: key.budget,
        log_precision: med.max(PRECISION_FLOOR).log10(),
    })
}

/// Groups runs by cell key and reduces each group; output sorted by key.
pub fn precision_cells(records: &[RunRecord]) -> Result<Vec<PrecisionCell>> {
    let mut groups: BTreeMap<CellKey, Vec<RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.cell_key()).or_default().push(r.clone());
    }
    groups.values().map(|g| solution_precision(g)).collect()
}

fn missing_error(missing: Vec<String>) -> Error {
    Error::MissingCells {
        count: missing.len(),
        preview: missing.iter().take(5).cloned().collect::<Vec<_>>().join("; "),
    }
}

type Slice<'a, K> = (BTreeMap<&'a Variant, BTreeMap<K, f64>>, BTreeSet<K>);

/// Collects the slice at (dimension, budget) as variant -> (instance key -> value).
fn slice<K: Ord + Copy>(
    cells: &[PrecisionCell],
    dimension: u32,
    budget: u64,
    include: impl Fn(&PrecisionCell) -> bool,
    key: impl Fn(&PrecisionCell) -> K,
) -> Result<Slice<'_, K>> {
    let mut by_variant: BTreeMap<&Variant, BTreeMap<K, f64>> = BTreeMap::new();
    let mut instances = BTreeSet::new();
    for c in cells
        .iter()
        .filter(|c| c.dimension == dimension && c.budget == budget && include(c))
    {
        let k = key(c);
        instances.insert(k);
        if by_variant
            .entry(&c.variant)
            .or_default()
            .insert(k, c.log_precision)
            .is_some()
        {
            return Err(Error::Schema(format!(
                "duplicate cell for variant {:?} problem {} instance {}",
                c.variant.0, c.problem_id, c.instance_id
            )));
        }
    }
    if by_variant.is_empty() {
        return Err(Error::EmptySlice);
    }
    Ok((by_variant, instances))
}

fn aggregate<K: Ord + Copy + std::fmt::Debug>(
    space: &ConfigSpace,
    by_variant: BTreeMap<&Variant, BTreeMap<K, f64>>,
    instances: &BTreeSet<K>,
    reduce: impl Fn(&[f64]) -> f64,
) -> Result<Vec<(Variant, f64)>> {
    let mut missing = Vec::new();
    let mut rows = Vec::with_capacity(by_variant.len());
    for (variant, values) in by_variant {
        for k in instances {
            if !values.contains_key(k) {
                missing.push(format!("variant {:?} at {:?}", space.labels(variant), k));
            }
        }
        let v: Vec<f64> = values.into_values().collect();
        rows.push((variant.clone(), reduce(&v)));
    }
    if missing.is_empty() {
        Ok(rows)
    } else {
        Err(missing_error(missing))
    }
}

/// One row per variant: mean solution precision over every (problem, instance)
/// present at this dimension and budget.
pub fn aggregate_suite_level(
    space: &ConfigSpace,
    cells: &[PrecisionCell],
    dimension: u32,
    budget: u64,
) -> Result<Dataset> {
    let (by_variant, instances) = slice(cells, dimension, budget, |_| true, |c| {
        (c.problem_id, c.instance_id)
    })?;
    let rows = aggregate(space, by_variant, &instances, |v| mean(v).expect("non-empty"))?;
    Ok(Dataset::new(space.clone(), rows, Scenario::Suite)?
        .with_metadata(Some(dimension), Some(budget)))
}

/// One row per variant: median solution precision over the instances of one problem.
pub fn aggregate_problem_level(
    space: &ConfigSpace,
    cells: &[PrecisionCell],
    problem_id: u32,
    dimension: u32,
    budget: u64,
) -> Result<Dataset> {
    let (by_variant, instances) = slice(
        cells,
        dimension,
        budget,
        |c| c.problem_id == problem_id,
        |c| c.instance_id,
    )?;
    let rows = aggregate(space, by_variant, &instances, |v| median(v).expect("non-empty"))?;
    Ok(Dataset::new(space.clone(), rows, Scenario::Problem(problem_id))?
        .with_metadata(Some(dimension), Some(budget)))
}

/// Distinct problem ids present at (dimension, budget), ascending.
pub fn problems_in(cells: &[PrecisionCell], dimension: u32, budget: u64) -> Vec<u32> {
    cells
        .iter()
        .filter(|c| c.dimension == dimension && c.budget == budget)
        .map(|c| c.problem_id)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

pub fn cells_to_csv(space: &ConfigSpace, cells: &[PrecisionCell]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["variant_id".to_string()];
    header.extend(space.module_names());
    header.extend(CELL_COLUMNS[1..].iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for c in cells {
        let mut rec = vec![space.rank(&c.variant).to_string()];
        rec.extend(space.labels(&c.variant).into_iter().map(str::to_string));
        rec.push(c.dimension.to_string());
        rec.push(c.budget.to_string());
        rec.push(c.problem_id.to_string());
        rec.push(c.instance_id.to_string());
        rec.push(sig12(c.log_precision));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn cells_from_csv(space: &ConfigSpace, text: &str) -> Result<Vec<PrecisionCell>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    check_columns(space, &header, &CELL_COLUMNS)?;
    let modules = module_columns(space, &header)?;
    let [dim, budget, problem, instance, logp] =
        ["dimension", "budget", "problem_id", "instance_id", "log_precision"]
            .map(|c| column(&header, c).expect("checked above"));
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let record = i as u64 + 1;
        out.push(PrecisionCell {
            variant: encode_record(space, &rec, &modules, record)?,
            dimension: parse_int(&rec, dim, record)?,
            budget: parse_int(&rec, budget, record)?,
            problem_id: parse_int(&rec, problem, record)?,
            instance_id: parse_int(&rec, instance, record)?,
            log_precision: parse_f64(&rec, logp, record)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ModuleSpec;

    fn toy_space() -> ConfigSpace {
        ConfigSpace::new(vec![
            ModuleSpec::new("a", ["x", "y"]),
            ModuleSpec::new("b", ["p", "q"]),
        ])
        .unwrap()
    }

    fn run(p: f64) -> RunRecord {
        RunRecord {
            variant: Variant(vec![0, 0]),
            problem_id: 1,
            instance_id: 1,
            run_id: 0,
            dimension: 5,
            budget: 500,
            precision: p,
        }
    }

    fn cell(v: &[usize], problem: u32, instance: u32, y: f64) -> PrecisionCell {
        PrecisionCell {
            variant: Variant(v.to_vec()),
            problem_id: problem,
            instance_id: instance,
            dimension: 5,
            budget: 500,
            log_precision: y,
        }
    }

    #[test]
    fn extract_steps() {
        let t = [(1, 5.0), (100, 1.5)];
        assert_eq!(extract_at_budget(&t, 100, 1.0).unwrap(), 0.5);
        assert_eq!(extract_at_budget(&t, 50, 1.0).unwrap(), 4.0);
        assert!(matches!(
            extract_at_budget(&[(10, 3.0)], 5, 0.0),
            Err(Error::BudgetBeforeFirstRecord { budget: 5, first: 10 })
        ));
        assert!(matches!(
            extract_at_budget(&[], 5, 0.0),
            Err(Error::EmptyTrajectory)
        ));
    }

    #[test]
    fn solution_precision_values() {
        let c = solution_precision(&[run(1e-3), run(1e-3), run(1e-3)]).unwrap();
        assert!((c.log_precision + 3.0).abs() < 1e-12);

        let even: Vec<_> = [1e-2, 1e-4, 1e-6, 1e-8].into_iter().map(run).collect();
        let c = solution_precision(&even).unwrap();
        // hand-computed: (1e-4 + 1e-6) / 2 = 5.05e-5
        assert!((c.log_precision - 5.05e-5f64.log10()).abs() < 1e-12);
        assert!((c.log_precision + 4.2967).abs() < 1e-4);

        let zeros = solution_precision(&[run(0.0), run(0.0), run(0.0)]).unwrap();
        assert_eq!(zeros.log_precision, -8.0);

        assert!(matches!(solution_precision(&[]), Err(Error::EmptyGroup)));
        let mut mixed = vec![run(1.0), run(1.0)];
        mixed[1].instance_id = 2;
        assert!(solution_precision(&mixed).is_err());
    }

    #[test]
    fn ingest_parses_and_validates() {
        let s = toy_space();
        let mut text = String::from("variant_id,a,b,dimension,budget,problem_id,instance_id,run_id,precision\n");
        for r in 0..10 {
            text.push_str(&format!("0,x,p,5,500,3,1,{r},0.{r}1\n"));
        }
        let runs = ingest_runs(&s, &text).unwrap();
        assert_eq!(runs.len(), 10);
        assert_eq!(runs[3].precision, 0.31);
        assert_eq!(runs[0].problem_id, 3);

        let header_only = "variant_id,a,b,dimension,budget,problem_id,instance_id,run_id,precision\n";
        assert!(ingest_runs(&s, header_only).unwrap().is_empty());
        assert!(ingest_runs(&s, "").unwrap().is_empty());

        let neg = format!("{header_only}0,x,p,5,500,3,1,0,-1\n");
        assert!(matches!(
            ingest_runs(&s, &neg),
            Err(Error::NegativePrecision { record: 1, .. })
        ));
        let bad_label = format!("{header_only}0,x,zz,5,500,3,1,0,1\n");
        assert!(matches!(ingest_runs(&s, &bad_label), Err(Error::Record { .. })));
        assert!(matches!(
            ingest_runs(&s, "variant_id,a,dimension\n"),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn trajectories_become_runs() {
        let s = toy_space();
        let traj = "variant_id,a,b,dimension,problem_id,instance_id,run_id,evals,best_f\n\
                    0,x,p,2,1,1,0,1,10.0\n\
                    0,x,p,2,1,1,0,150,4.0\n\
                    0,x,p,2,1,1,0,900,2.5\n";
        let optima = "problem_id,instance_id,optimum\n1,1,2.0\n";
        let budgets = [Budget::PerDimension(100), Budget::PerDimension(500)];
        let runs = ingest_trajectories(&s, traj, optima, &budgets).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].budget, 200);
        assert_eq!(runs[0].precision, 2.0);
        assert_eq!(runs[1].budget, 1000);
        assert_eq!(runs[1].precision, 0.5);
    }

    #[test]
    fn budget_parsing() {
        assert_eq!("500d".parse::<Budget>().unwrap(), Budget::PerDimension(500));
        assert_eq!("2500".parse::<Budget>().unwrap(), Budget::Evaluations(2500));
        assert_eq!(Budget::PerDimension(500).resolve(5), 2500);
        assert!("0".parse::<Budget>().is_err());
        assert!("x".parse::<Budget>().is_err());
    }

    #[test]
    fn suite_level_means() {
        let s = toy_space();
        let cells = vec![cell(&[0, 0], 1, 1, -1.0), cell(&[0, 0], 2, 1, -3.0)];
        let d = aggregate_suite_level(&s, &cells, 5, 500).unwrap();
        assert_eq!(d.rows(), &[(Variant(vec![0, 0]), -2.0)]);
        assert_eq!(d.scenario(), Scenario::Suite);

        let constant: Vec<_> = (1..=24)
            .flat_map(|p| (1..=5).map(move |i| cell(&[1, 0], p, i, -2.0)))
            .collect();
        let d = aggregate_suite_level(&s, &constant, 5, 500).unwrap();
        assert_eq!(d.rows()[0].1, -2.0);

        let mut incomplete = cells.clone();
        incomplete.push(cell(&[1, 1], 1, 1, 0.0));
        assert!(matches!(
            aggregate_suite_level(&s, &incomplete, 5, 500),
            Err(Error::MissingCells { count: 1, .. })
        ));
        assert!(matches!(
            aggregate_suite_level(&s, &cells, 30, 500),
            Err(Error::EmptySlice)
        ));
    }

    #[test]
    fn problem_level_medians() {
        let s = toy_space();
        let cells: Vec<_> = [-1.0, -2.0, -3.0, -4.0, -5.0]
            .iter()
            .enumerate()
            .map(|(i, &y)| cell(&[0, 1], 7, i as u32 + 1, y))
            .chain(std::iter::once(cell(&[0, 1], 8, 1, 100.0)))
            .collect();
        let d = aggregate_problem_level(&s, &cells, 7, 5, 500).unwrap();
        assert_eq!(d.rows(), &[(Variant(vec![0, 1]), -3.0)]);
        assert_eq!(d.scenario(), Scenario::Problem(7));
        assert_eq!(problems_in(&cells, 5, 500), vec![7, 8]);
    }

    #[test]
    fn cells_csv_roundtrip() {
        let s = toy_space();
        let cells = vec![cell(&[0, 1], 7, 1, -3.25), cell(&[1, 1], 7, 2, 0.5)];
        let text = cells_to_csv(&s, &cells).unwrap();
        assert_eq!(cells_from_csv(&s, &text).unwrap(), cells);
    }
}
