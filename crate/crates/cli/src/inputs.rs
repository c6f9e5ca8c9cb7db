use std::path::{Path, PathBuf};

use modanova::pipeline::{cells_from_csv, ingest_runs, precision_cells, PrecisionCell};
use modanova::{ConfigSpace, Dataset, Scenario};

use crate::output::Inputs;
use crate::{CliError, CliResult};

/// A config space and the label it was requested by.
pub struct LoadedSpace {
    pub space: ConfigSpace,
    pub name: String,
}

/// Reads `--space`: a JSON file, or a built-in fixture name.
pub fn load_space(arg: &str, inputs: &mut Inputs) -> CliResult<LoadedSpace> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = inputs.read(path)?;
        let space = ConfigSpace::parse_json(&text)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| arg.to_string());
        return Ok(LoadedSpace { space, name });
    }
    let space = match arg.to_ascii_lowercase().as_str() {
        "modcma" => ConfigSpace::modcma(),
        "modde" => ConfigSpace::modde(),
        _ => {
            return Err(CliError::Usage(format!(
                "--space `{arg}` is neither a file nor one of modcma, modde"
            )))
        }
    };
    Ok(LoadedSpace {
        space,
        name: arg.to_ascii_lowercase(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Runs,
    Cells,
    Dataset,
}

pub fn detect_kind(path: &Path, text: &str) -> CliResult<InputKind> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let has = |c: &str| header.iter().any(|h| h == c);
    if has("precision") {
        Ok(InputKind::Runs)
    } else if has("log_precision") {
        Ok(InputKind::Cells)
    } else if has("response") {
        Ok(InputKind::Dataset)
    } else if has("best_f") {
        Err(CliError::Usage(format!(
            "{} is a trajectory file; convert it with `modanova ingest` first",
            path.display()
        )))
    } else {
        Err(CliError::Data(format!(
            "{}: header matches no known input (expected a precision, log_precision or response column)",
            path.display()
        )))
    }
}

pub enum Loaded {
    Cells(Vec<PrecisionCell>),
    Dataset(Dataset),
}

pub fn load_data(space: &ConfigSpace, paths: &[PathBuf], inputs: &mut Inputs) -> CliResult<Loaded> {
    let mut cells = Vec::new();
    let mut dataset = None;
    for path in paths {
        let text = inputs.read(path)?;
        match detect_kind(path, &text)? {
            InputKind::Runs => {
                let records = ingest_runs(space, &text).map_err(|e| with_path(path, e))?;
                cells.extend(precision_cells(&records).map_err(|e| with_path(path, e))?);
            }
            InputKind::Cells => cells.extend(cells_from_csv(space, &text).map_err(|e| with_path(path, e))?),
            InputKind::Dataset => {
                if paths.len() > 1 {
                    return Err(CliError::Usage(
                        "a dataset CSV must be the only --data input".into(),
                    ));
                }
                let d = Dataset::from_csv(space, &text, Scenario::Synthetic)
                    .map_err(|e| with_path(path, e))?;
                dataset = Some(d);
            }
        }
    }
    Ok(match dataset {
        Some(d) => Loaded::Dataset(d),
        None => Loaded::Cells(cells),
    })
}

fn with_path(path: &Path, e: modanova::Error) -> CliError {
    match CliError::from(e) {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    }
}
