// Closed-form operation counts next to instrumented counts of one step.

use sml_volterra::adaptive::{operation_counts, Recursion, SmlFilter};
use sml_volterra::estimation::default_init;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!(" K  M  L | formula adds/mults | measured adds/mults");
    for (k, m, l) in [(1, 10, 1), (2, 10, 1), (3, 10, 1), (2, 10, 4), (3, 20, 8)] {
        let rec = if l == 1 { Recursion::Lms } else { Recursion::TrueLms { window: l } };
        let f = operation_counts(k, m, rec)?;
        let mut filter = SmlFilter::new(default_init(k, m)?, 1e-3)?.with_window(l)?;
        for i in 0..l {
            filter.step(0.1 * i as f64, 0.0);
        }
        let c = filter.count_step_ops(0.7, 0.3);
        println!(
            "{k:2} {m:2} {l:2} | {:7} {:7}      | {:7} {:7}",
            f.adds, f.mults, c.adds, c.mults
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
