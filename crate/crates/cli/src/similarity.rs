use std::path::Path;

use modanova::report::parse_effects_csv;
use modanova::similarity::{effect_vector_from_rows, similarity_matrix};
use serde::Serialize;

use crate::output::{Inputs, Manifest, Outputs};
use crate::{CliError, CliResult, SimilarityArgs};

#[derive(Serialize)]
struct Resolved<'a> {
    problems: &'a [u32],
    degenerate: &'a [u32],
}

/// Problem ids with a `problem_XX` directory under `dir`, ascending.
fn discover(dir: &Path) -> CliResult<Vec<u32>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Data(format!("cannot list {}: {e}", dir.display())))?;
    let mut ids: Vec<u32> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .filter_map(|e| e.file_name().to_str()?.strip_prefix("problem_")?.parse().ok())
        .collect();
    ids.sort_unstable();
    Ok(ids)
}

pub fn run(a: &SimilarityArgs) -> CliResult<()> {
    let problems = if a.problems.is_empty() {
        discover(&a.effects_dir)?
    } else {
        a.problems.clone()
    };
    if problems.is_empty() {
        return Err(CliError::Data(format!(
            "no problem_XX directories in {}",
            a.effects_dir.display()
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    if let Some(p) = problems.iter().find(|p| !seen.insert(**p)) {
        return Err(CliError::Usage(format!("problem {p} listed twice")));
    }

    let mut inputs = Inputs::default();
    let mut vectors = Vec::with_capacity(problems.len());
    for &p in &problems {
        let path = a.effects_dir.join(format!("problem_{p:02}")).join("effects.csv");
        if !path.is_file() {
            return Err(CliError::Data(format!("missing effects file {}", path.display())));
        }
        let rows = parse_effects_csv(&inputs.read(&path)?)?;
        vectors.push(effect_vector_from_rows(&rows, p)?);
    }
    let matrix = similarity_matrix(&vectors)?;

    let out_dir = a.out.as_deref().unwrap_or(&a.effects_dir);
    let mut out = Outputs::new();
    out.write(&out_dir.join("similarity.csv"), &matrix.to_csv()?)?;
    let resolved = Resolved {
        problems: &problems,
        degenerate: &matrix.degenerate,
    };
    let mut manifest = Manifest::new("similarity", a, resolved, &inputs.digests);
    manifest.outputs = vec!["similarity.csv".into(), "similarity-manifest.json".into()];
    out.write_json(&out_dir.join("similarity-manifest.json"), &manifest)?;
    out.commit();
    Ok(())
}
