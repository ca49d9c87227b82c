// Online identification with stabilized SML-LMS and SML-TRUE-LMS.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sml_volterra::adaptive::{max_threshold, step_bound, SmlFilter};
use sml_volterra::estimation::default_init;
use sml_volterra::experiments::db;
use sml_volterra::experiments::plants::random_decomposable_plant;
use sml_volterra::volterra::sml_output;
use sml_volterra::DelayLine;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (order, memory, iterations) = (2, 5, 20_000);
    let noise_std = 1e-3f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let plant = random_decomposable_plant(order, memory, &mut rng)?;
    let mu = 0.5 * step_bound(&plant, 20_000, 3)?;
    let max = max_threshold(order, 1.0)?;

    let init = default_init(order, memory)?;
    let mut lms = SmlFilter::new(init.clone(), mu)?.with_max_threshold(max)?;
    let mut true_lms = SmlFilter::new(init, mu)?
        .with_max_threshold(max)?
        .with_window(4)?;
    let mut line = DelayLine::new(memory)?;
    let (mut sq_lms, mut sq_true) = (0.0, 0.0);
    for i in 0..iterations {
        let u: f64 = StandardNormal.sample(&mut rng);
        line.push(u);
        let v: f64 = StandardNormal.sample(&mut rng);
        let d = sml_output(line.regressor(), &plant)? + noise_std * v;
        let e1 = lms.step(u, d).error;
        let e2 = true_lms.step(u, d).error;
        if i >= iterations - 2000 {
            sq_lms += e1 * e1 / 2000.0;
            sq_true += e2 * e2 / 2000.0;
        }
    }
    println!("mu = {mu:.5}, MAX = {max}");
    println!("steady-state MSE: LMS {:.2} dB, TRUE-LMS(4) {:.2} dB", db(sq_lms), db(sq_true));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
