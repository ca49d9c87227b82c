// Exact MSE surface and steepest descent on a random decomposable plant.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sml_volterra::adaptive::step_bound;
use sml_volterra::estimation::{
    default_init, gaussian_correlations, mse, normal_residual, steepest_descent_until,
    CONVERGENCE_RESIDUAL,
};
use sml_volterra::experiments::db;
use sml_volterra::experiments::plants::random_decomposable_plant;
use sml_volterra::Plant;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (order, memory, noise_var) = (2, 6, 1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let plant = random_decomposable_plant(order, memory, &mut rng)?;
    let mu = step_bound(&plant, 20_000, 7)?;
    let c = gaussian_correlations(&Plant::RankOne(plant), noise_var)?;

    let init = default_init(order, memory)?;
    println!("initial MSE {:.2} dB", db(mse(&init, &c)?));
    let trace = steepest_descent_until(&c, mu, 50_000, &init, CONVERGENCE_RESIDUAL)?;
    let w = trace.final_kernel(order);
    println!(
        "mu = {mu:.4}: {} iterations, final MSE {:.3} dB (noise floor {:.1} dB), residual {:.1e}",
        trace.len() - 1,
        db(trace.final_mse()),
        db(noise_var),
        normal_residual(&w, &c)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
