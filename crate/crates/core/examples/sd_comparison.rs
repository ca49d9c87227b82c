// Exact steepest descent next to the ensemble-averaged SML-LMS curve at a
// step well below the bound.

use sml_volterra::experiments::{
    db, run_sd_comparison, ExperimentKind, ScenarioConfig, StepSpec,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ScenarioConfig::new(ExperimentKind::SdComparison);
    cfg.memory = 5;
    cfg.step = StepSpec::Relative(0.1);
    cfg.realizations = 200;
    cfg.iterations = 6000;
    let cmp = run_sd_comparison(&cfg)?;
    for n in (0..cfg.iterations).step_by(1000) {
        println!(
            "n = {n:5}: SD {:7.2} dB, LMS {:7.2} dB",
            db(cmp.sd_mse[n]),
            db(cmp.noise_var + cmp.adaptive[0].mean_emse[n])
        );
    }
    println!(
        "max gap {:.2} dB (raw e² average: {:.2} dB)",
        cmp.max_gap_db(0),
        cmp.max_raw_gap_db(0)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
