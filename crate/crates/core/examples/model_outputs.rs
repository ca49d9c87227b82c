// Output of a decomposable kernel three ways: product of FIR outputs,
// contraction of the materialized tensor, and through a delay line.

use sml_volterra::tensor::materialize;
use sml_volterra::volterra::{
    diagonal_output, fir_outputs, partial_products, sml_output, volterra_output, DiagonalKernel,
};
use sml_volterra::{DelayLine, RankOneKernel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let kernel = RankOneKernel::new(vec![
        vec![1.0, 0.5, -0.25],
        vec![0.3, 0.0, 1.0],
        vec![-1.0, 2.0, 0.5],
    ])?;
    let mut line = DelayLine::new(3)?;
    for x in [0.9, -0.4, 1.5] {
        line.push(x);
    }
    let u = line.regressor();
    println!("regressor (newest first) = {u:?}");
    println!("FIR outputs y_s = {:?}", fir_outputs(u, &kernel)?);
    println!("leave-one-out products = {:?}", partial_products(u, &kernel)?);

    let fast = sml_output(u, &kernel)?;
    let dense = volterra_output(u, &materialize(&kernel)?)?;
    println!("product form {fast:.12}, dense contraction {dense:.12}");

    // Power filter: the main diagonal of a second-order kernel.
    let pf = DiagonalKernel::new(3, 1, vec![1.0, -0.5, 0.25])?;
    println!("power filter output = {:.6}", diagonal_output(u, &pf)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
