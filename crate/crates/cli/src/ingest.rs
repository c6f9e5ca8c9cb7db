use modanova::pipeline::{cells_to_csv, ingest_runs, ingest_trajectories, precision_cells, Budget};

use crate::inputs::load_space;
use crate::output::{Inputs, Outputs};
use crate::{CliError, CliResult, IngestArgs};

pub fn run(a: &IngestArgs) -> CliResult<()> {
    let mut inputs = Inputs::default();
    let space = load_space(&a.space, &mut inputs)?.space;
    let mut records = Vec::new();
    if let Some(traj) = &a.trajectories {
        let optima = a.optima.as_ref().expect("clap requires --optima");
        let budgets = a
            .budgets
            .iter()
            .map(|b| b.parse::<Budget>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(CliError::Usage)?;
        if budgets.is_empty() {
            return Err(CliError::Usage("--budgets must list at least one budget".into()));
        }
        let t = inputs.read(traj)?;
        let o = inputs.read(optima)?;
        records = ingest_trajectories(&space, &t, &o, &budgets)?;
    } else {
        for path in &a.runs {
            let text = inputs.read(path)?;
            records.extend(ingest_runs(&space, &text)?);
        }
    }
    let cells = precision_cells(&records)?;
    let mut out = Outputs::new();
    out.write(&a.out, &cells_to_csv(&space, &cells)?)?;
    out.commit();
    log::info!("{} runs -> {} cells", records.len(), cells.len());
    Ok(())
}
