// Divergence counts over multiples of the step bound. Pass a realization
// count to scale up (the full table uses 1000).

use sml_volterra::experiments::{run_stability_table, ExperimentKind, ScenarioConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    run_with(50)
}

fn run_with(realizations: usize) -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ScenarioConfig::new(ExperimentKind::StabilityTable);
    cfg.realizations = realizations;
    cfg.iterations = 2000;
    let table = run_stability_table(&cfg)?;
    print!("{}", table.to_csv_string());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    match std::env::args().nth(1) {
        Some(n) => run_with(n.parse()?),
        None => run_example(),
    }
}
