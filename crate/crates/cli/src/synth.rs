use modanova::synth::{generate_synthetic, TruthSpec};
use serde::Serialize;

use crate::inputs::load_space;
use crate::output::{Inputs, Manifest, Outputs};
use crate::{CliError, CliResult, SynthArgs};

#[derive(Serialize)]
struct Resolved {
    noise_sd: f64,
    rows: usize,
}

pub fn run(a: &SynthArgs) -> CliResult<()> {
    let mut inputs = Inputs::default();
    let space = load_space(&a.space, &mut inputs)?.space;
    let spec = TruthSpec::parse_json(&inputs.read(&a.truth)?)?;

    let noise_sd = match a.noise_relative {
        Some(r) if !(r.is_finite() && r >= 0.0) => {
            return Err(CliError::Usage(format!("--noise-relative must be non-negative, got {r}")))
        }
        Some(r) => r * generate_synthetic(&space, &spec, 0.0, a.seed)?.truth.signal_sd(),
        None => a.noise,
    };
    let syn = generate_synthetic(&space, &spec, noise_sd, a.seed)?;

    let mut out = Outputs::new();
    out.create_dir(&a.out)?;
    out.write(&a.out.join("dataset.csv"), &syn.dataset.to_csv()?)?;
    out.write_json(&a.out.join("ground_truth.json"), &syn.truth)?;
    let resolved = Resolved {
        noise_sd,
        rows: syn.dataset.len(),
    };
    let mut manifest = Manifest::new("synth", a, resolved, &inputs.digests);
    manifest.outputs = ["dataset.csv", "ground_truth.json", "run-manifest.json"]
        .map(String::from)
        .to_vec();
    out.write_json(&a.out.join("run-manifest.json"), &manifest)?;
    out.commit();
    Ok(())
}
