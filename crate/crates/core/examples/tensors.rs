// Kronecker products, rank-one kernels and the kernel CSV format.

use sml_volterra::tensor::{kron, materialize, tensor_inner, tensor_norm, tensor_power};
use sml_volterra::{DenseKernel, RankOneKernel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let a = vec![1.0, 2.0];
    let b = vec![0.5, -1.0, 3.0];
    println!("a ⊗ b = {:?}", kron(&a, &b)?);
    println!("u^⊗3 for u = [1, -1] = {:?}", tensor_power(&[1.0, -1.0], 3)?);

    // The norm of a decomposable tensor is the product of its factor norms.
    let k = RankOneKernel::new(vec![a.clone(), vec![3.0, 4.0]])?;
    let dense = materialize(&k)?;
    println!(
        "‖a ⊗ w‖ = {:.6}, ‖a‖‖w‖ = {:.6}",
        tensor_norm(&dense),
        k.factor_norm_product()
    );
    println!("<H, H> = {:.6}", tensor_inner(&dense, &dense)?);

    let text = dense.to_csv_string();
    print!("kernel CSV:\n{text}");
    let back = DenseKernel::from_csv_str(&text)?;
    assert_eq!(back, dense);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
