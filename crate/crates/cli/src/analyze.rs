use std::path::Path;

use modanova::pipeline::{aggregate_problem_level, aggregate_suite_level, problems_in, Budget, PrecisionCell};
use modanova::report::{
    cumulative_summary, effects_csv, pair_table, pairs_csv, subset_names, summary_csv, triplet_table,
    triplets_csv, CumulativeSummary, SummaryLabel,
};
use modanova::similarity::{effect_vector, similarity_matrix};
use modanova::{
    decompose, exact_decompose, fit_forest, to_factorial, ConfigSpace, Dataset, EffectDecomposition,
    FitParams, Forest, FractionMode, Scenario,
};
use serde::Serialize;

use crate::inputs::{load_data, load_space, Loaded};
use crate::output::{Inputs, Manifest, Outputs};
use crate::{AnalyzeArgs, CliError, CliResult, Engine, ScenarioArg};

#[derive(Debug, Clone, Serialize)]
struct Resolved {
    algorithm: String,
    scenario: String,
    dimension: Option<u32>,
    budget: Option<u64>,
    budget_label: Option<String>,
    engine: Engine,
    max_order: usize,
    fraction_mode: FractionMode,
    fit_params: Option<FitParams>,
    rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    problems: Option<Vec<u32>>,
}

#[derive(Serialize)]
struct EffectEntry {
    subset: Vec<String>,
    order: usize,
    fraction: f64,
}

#[derive(Serialize)]
struct TreeEntry<'a> {
    total: f64,
    variances: &'a [f64],
    zero_variance: bool,
}

#[derive(Serialize)]
struct EffectsDocument<'a> {
    algorithm: &'a str,
    scenario: &'a str,
    dimension: Option<u32>,
    budget: Option<u64>,
    engine: Engine,
    fraction_mode: FractionMode,
    max_order: usize,
    zero_variance_trees: usize,
    effects: Vec<EffectEntry>,
    per_tree: Vec<TreeEntry<'a>>,
}

fn fit_params(a: &AnalyzeArgs, n_modules: usize) -> FitParams {
    if a.exact {
        FitParams {
            seed: a.seed,
            ..FitParams::exact(n_modules)
        }
    } else {
        FitParams {
            n_trees: a.trees,
            bootstrap: a.bootstrap,
            features_per_split: a.features_per_split,
            min_samples_leaf: a.min_leaf,
            max_depth: a.max_depth,
            seed: a.seed,
        }
    }
}

/// The unique value of `values`, or a usage error naming `flag`.
fn infer_unique<T: Ord + Copy + std::fmt::Display>(
    values: impl Iterator<Item = T>,
    flag: &str,
) -> CliResult<T> {
    let set: std::collections::BTreeSet<T> = values.collect();
    match set.len() {
        0 => Err(CliError::Data(modanova::Error::EmptySlice.to_string())),
        1 => Ok(*set.iter().next().expect("one element")),
        _ => Err(CliError::Usage(format!(
            "{flag} is required; the data contains {}",
            set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

/// Resolves `--dim` and `--budget` against the cells.
fn resolve_slice(a: &AnalyzeArgs, cells: &[PrecisionCell]) -> CliResult<(u32, u64, String)> {
    let dim = match a.dim {
        Some(d) => d,
        None => infer_unique(cells.iter().map(|c| c.dimension), "--dim")?,
    };
    let (budget, label) = match &a.budget {
        Some(b) => {
            let parsed: Budget = b.parse().map_err(CliError::Usage)?;
            (parsed.resolve(dim), b.clone())
        }
        None => {
            let b = infer_unique(
                cells.iter().filter(|c| c.dimension == dim).map(|c| c.budget),
                "--budget",
            )?;
            (b, b.to_string())
        }
    };
    Ok((dim, budget, label))
}

struct Analysis {
    decomposition: EffectDecomposition,
    forest: Option<Forest>,
}

fn analyze_dataset(
    a: &AnalyzeArgs,
    data: Option<&Dataset>,
    loaded_model: Option<&Forest>,
    params: &FitParams,
    max_order: usize,
) -> CliResult<Analysis> {
    let mode: FractionMode = a.fraction_mode.into();
    match a.engine {
        Engine::Exact => {
            let data = data.ok_or_else(|| CliError::Usage("--engine exact needs --data".into()))?;
            let table = to_factorial(data)?;
            let d = exact_decompose(&table, max_order)?.with_mode(mode);
            Ok(Analysis {
                decomposition: d,
                forest: None,
            })
        }
        Engine::Forest => {
            let forest = match loaded_model {
                Some(f) => f.clone(),
                None => {
                    let data = data.ok_or_else(|| CliError::Usage("--data is required".into()))?;
                    fit_forest(data, params)?
                }
            };
            let d = decompose(&forest, max_order, mode)?;
            Ok(Analysis {
                decomposition: d,
                forest: Some(forest),
            })
        }
    }
}

/// Writes the report files of one analysis into `dir`; returns their names
/// and the cumulative summary when the order allows one.
fn write_reports(
    out: &mut Outputs,
    dir: &Path,
    a: &AnalyzeArgs,
    resolved: &Resolved,
    d: &EffectDecomposition,
) -> CliResult<(Vec<String>, Option<CumulativeSummary>)> {
    let mut names = Vec::new();
    let mut put = |out: &mut Outputs, name: &str, text: &str| -> CliResult<()> {
        out.write(&dir.join(name), text)?;
        names.push(name.to_string());
        Ok(())
    };

    put(out, "effects.csv", &effects_csv(d)?)?;
    let doc = EffectsDocument {
        algorithm: &resolved.algorithm,
        scenario: &resolved.scenario,
        dimension: resolved.dimension,
        budget: resolved.budget,
        engine: resolved.engine,
        fraction_mode: d.mode,
        max_order: d.max_order,
        zero_variance_trees: d.zero_variance_trees,
        effects: d
            .iter()
            .map(|(k, f)| EffectEntry {
                subset: subset_names(d, k),
                order: k.order(),
                fraction: f,
            })
            .collect(),
        per_tree: d
            .per_tree
            .iter()
            .map(|t| TreeEntry {
                total: t.total,
                variances: &t.variances,
                zero_variance: t.zero_variance,
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Internal(e.to_string()))?;
    json.push('\n');
    put(out, "effects.json", &json)?;

    let n = d.space.n_modules();
    let mut summary = None;
    if d.max_order >= 3.min(n) {
        let s = cumulative_summary(d)?;
        let label = SummaryLabel {
            algorithm: resolved.algorithm.clone(),
            dimension: resolved.dimension,
            budget: resolved.budget_label.clone(),
        };
        put(out, "summary.csv", &summary_csv(&[(label, s)])?)?;
        summary = Some(s);
    } else {
        log::warn!("max order {} < 3: summary.csv not written", d.max_order);
    }
    if n >= 2 && d.max_order >= 2 {
        put(out, "pairs.csv", &pairs_csv(d, &pair_table(d)?)?)?;
    }
    if n >= 3 && d.max_order >= 3 {
        put(out, "triplets.csv", &triplets_csv(d, &triplet_table(d, a.top_triplets)?)?)?;
    }
    Ok((names, summary))
}

pub fn run(a: &AnalyzeArgs) -> CliResult<()> {
    let mut inputs = Inputs::default();
    let space_in = load_space(&a.space, &mut inputs)?;
    let space = space_in.space;
    let n = space.n_modules();
    let max_order = a.max_order.unwrap_or(3.min(n));
    modanova::fanova::check_order(max_order, n)?;
    let params = fit_params(a, n);
    params.validate(n)?;
    if a.engine == Engine::Exact && (a.load_model.is_some() || a.save_model.is_some()) {
        return Err(CliError::Usage("--save-model/--load-model need --engine forest".into()));
    }
    if a.scenario == ScenarioArg::AllProblems && (a.load_model.is_some() || a.save_model.is_some()) {
        return Err(CliError::Usage("--save-model/--load-model cannot be used with all-problems".into()));
    }
    if a.scenario == ScenarioArg::Problem && a.problem.is_none() {
        return Err(CliError::Usage("--scenario problem needs --problem".into()));
    }
    if a.scenario != ScenarioArg::Problem && a.problem.is_some() {
        return Err(CliError::Usage("--problem needs --scenario problem".into()));
    }

    let loaded_model = match &a.load_model {
        Some(p) => {
            let text = inputs.read(p)?;
            let f = Forest::from_json(&text)?;
            if f.space() != &space {
                return Err(CliError::Data(format!(
                    "model {} was fitted on a different config space",
                    p.display()
                )));
            }
            Some(f)
        }
        None => None,
    };
    let loaded = if a.data.is_empty() {
        None
    } else {
        Some(load_data(&space, &a.data, &mut inputs)?)
    };

    let algorithm = a.algorithm.clone().unwrap_or(space_in.name);
    let mut resolved = Resolved {
        algorithm,
        scenario: Scenario::Synthetic.to_string(),
        dimension: None,
        budget: None,
        budget_label: None,
        engine: a.engine,
        max_order,
        fraction_mode: a.fraction_mode.into(),
        fit_params: (a.engine == Engine::Forest && loaded_model.is_none()).then(|| params.clone()),
        rows: 0,
        problems: None,
    };
    if let Some(f) = &loaded_model {
        resolved.fit_params = Some(f.params().clone());
    }

    let mut out = Outputs::new();
    out.create_dir(&a.out)?;

    let dataset = match loaded {
        None => None,
        Some(Loaded::Dataset(d)) => {
            if a.scenario != ScenarioArg::Suite || a.dim.is_some() || a.budget.is_some() {
                return Err(CliError::Usage(
                    "--scenario, --problem, --dim and --budget apply to run or cell inputs only".into(),
                ));
            }
            Some(d)
        }
        Some(Loaded::Cells(cells)) => {
            let (dim, budget, label) = resolve_slice(a, &cells)?;
            resolved.dimension = Some(dim);
            resolved.budget = Some(budget);
            resolved.budget_label = Some(label);
            match a.scenario {
                ScenarioArg::Suite => Some(aggregate_suite_level(&space, &cells, dim, budget)?),
                ScenarioArg::Problem => {
                    let p = a.problem.expect("checked above");
                    Some(aggregate_problem_level(&space, &cells, p, dim, budget)?)
                }
                ScenarioArg::AllProblems => {
                    return run_all_problems(a, &space, &cells, resolved, &params, &inputs, out);
                }
            }
        }
    };
    if let Some(d) = &dataset {
        resolved.scenario = d.scenario().to_string();
        resolved.rows = d.len();
    } else if a.scenario == ScenarioArg::AllProblems {
        return Err(CliError::Usage("all-problems needs run or cell data".into()));
    }

    let analysis = analyze_dataset(a, dataset.as_ref(), loaded_model.as_ref(), &params, max_order)?;
    let (mut names, _) = write_reports(&mut out, &a.out, a, &resolved, &analysis.decomposition)?;
    if let (Some(path), Some(forest)) = (&a.save_model, &analysis.forest) {
        out.write(path, &forest.to_json()?)?;
        names.push(path.display().to_string());
    }
    let mut manifest = Manifest::new("analyze", a, &resolved, &inputs.digests);
    names.push("run-manifest.json".into());
    manifest.outputs = names;
    out.write_json(&a.out.join("run-manifest.json"), &manifest)?;
    out.commit();
    Ok(())
}

fn run_all_problems(
    a: &AnalyzeArgs,
    space: &ConfigSpace,
    cells: &[PrecisionCell],
    mut resolved: Resolved,
    params: &FitParams,
    inputs: &Inputs,
    mut out: Outputs,
) -> CliResult<()> {
    let (dim, budget) = (resolved.dimension.expect("set"), resolved.budget.expect("set"));
    let problems = problems_in(cells, dim, budget);
    if problems.is_empty() {
        return Err(modanova::Error::EmptySlice.into());
    }
    let n = space.n_modules();
    let mut names = Vec::new();
    let mut vectors = Vec::new();
    let mut table = csv_writer();
    table
        .write_record(["problem_id", "individual", "pairwise", "triple", "total", "top_triplet", "top_triplet_total"])
        .map_err(csv_error)?;

    for &p in &problems {
        let data = aggregate_problem_level(space, cells, p, dim, budget)?;
        let analysis = analyze_dataset(a, Some(&data), None, params, resolved.max_order)?;
        let d = &analysis.decomposition;
        let sub = format!("problem_{p:02}");
        let dir = a.out.join(&sub);
        let per = Resolved {
            scenario: data.scenario().to_string(),
            rows: data.len(),
            problems: None,
            ..resolved.clone()
        };
        let (files, summary) = write_reports(&mut out, &dir, a, &per, d)?;
        let mut manifest = Manifest::new("analyze", a, &per, &inputs.digests);
        manifest.outputs = files.iter().cloned().chain(["run-manifest.json".to_string()]).collect();
        out.write_json(&dir.join("run-manifest.json"), &manifest)?;
        names.extend(manifest.outputs.iter().map(|f| format!("{sub}/{f}")));

        if resolved.max_order >= 3.min(n) {
            vectors.push(effect_vector(d, p)?);
        }
        if let Some(s) = summary {
            let top = if n >= 3 { triplet_table(d, 1)? } else { Vec::new() };
            let (top_name, top_total) = match top.first() {
                Some(t) => (
                    t.modules.iter().map(|&j| space.modules()[j].name.clone()).collect::<Vec<_>>().join(";"),
                    format!("{:.2}", t.triplet_total),
                ),
                None => (String::new(), String::new()),
            };
            table
                .write_record([
                    p.to_string(),
                    format!("{:.2}", s.individual),
                    format!("{:.2}", s.pairwise),
                    format!("{:.2}", s.triple),
                    format!("{:.2}", s.total),
                    top_name,
                    top_total,
                ])
                .map_err(csv_error)?;
        }
    }
    out.write(&a.out.join("problems.csv"), &finish(table)?)?;
    names.push("problems.csv".into());
    if !vectors.is_empty() {
        let m = similarity_matrix(&vectors)?;
        out.write(&a.out.join("similarity.csv"), &m.to_csv()?)?;
        names.push("similarity.csv".into());
    }

    resolved.scenario = "all-problems".into();
    resolved.rows = cells.len();
    resolved.problems = Some(problems);
    let mut manifest = Manifest::new("analyze", a, &resolved, &inputs.digests);
    names.push("run-manifest.json".into());
    manifest.outputs = names;
    out.write_json(&a.out.join("run-manifest.json"), &manifest)?;
    out.commit();
    Ok(())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Internal(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}
