// SML-LMS against full Volterra, power-filter and simplified Volterra LMS
// on the smooth stand-in plant, through the experiment runner.

use sml_volterra::experiments::{
    db, run_identification, ExperimentKind, FilterSpec, PlantSpec, ScenarioConfig,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ScenarioConfig::new(ExperimentKind::Identification);
    cfg.memory = 6;
    cfg.plant = PlantSpec::Smooth;
    cfg.realizations = 16;
    cfg.iterations = 4000;
    cfg.filters = vec![
        FilterSpec::SmlLms,
        FilterSpec::VolterraLms,
        FilterSpec::PfLms,
        FilterSpec::SvLms { diagonals: 2 },
    ];
    let run = run_identification(&cfg)?;
    for (setup, curve) in run.setups.iter().zip(&run.curves) {
        println!(
            "{:<16} mu {:.5}  steady-state EMSE {:7.2} dB  MSE {:7.2} dB",
            curve.filter,
            setup.mu,
            db(curve.steady_state_emse()),
            db(curve.steady_state_mse())
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
