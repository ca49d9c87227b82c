// Bifurcation sweep of unstabilized LMS on `d = 100 u²`, `u ≡ 1`.

use sml_volterra::experiments::{classify, Regime};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for mu in [0.002, 0.005, 0.009, 0.012, 0.016, 0.019, 0.03] {
        let cell = classify(mu, 10_000, 500)?;
        let detail = match cell.regime {
            Regime::Converged => format!("w1·w2 = {:.9}", cell.final_product),
            Regime::Bounded => {
                let lo = cell.samples.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = cell.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                format!("w1 in [{lo:.3}, {hi:.3}], {} sign changes", cell.sign_changes())
            }
            _ => String::new(),
        };
        println!("mu {mu:.3}: {:?} {detail}", cell.regime);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
