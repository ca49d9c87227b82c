// Steady-state MSE over the Gaussian-ρ family of second-order plants.

use sml_volterra::experiments::{
    db, rho_summary_csv_string, run_rho_sweep, ExperimentKind, ScenarioConfig,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ScenarioConfig::new(ExperimentKind::RhoSweep);
    cfg.rho_grid = vec![0.0, 0.3, 0.6, 0.9];
    cfg.realizations = 16;
    cfg.iterations = 8000;
    let points = run_rho_sweep(&cfg)?;
    for p in &points {
        println!(
            "rho {:.1}: floor {:7.2} dB, rank-one bound {:7.2} dB, σ2/σ1 = {:.3}",
            p.rho,
            db(p.steady_state_conditional_mse()),
            db(p.mse_lower_bound),
            p.sigma_ratio
        );
    }
    print!("{}", rho_summary_csv_string(&points));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
