use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::{PlantSpec, ScenarioConfig};
use super::seeds::{stream_rng, Stream};
use crate::error::{Error, Result};
use crate::estimation::Plant;
use crate::tensor::{DenseKernel, RankOneKernel};

/// Rescale to unit output power under white unit Gaussian input.
pub fn unit_power(plant: Plant) -> Result<Plant> {
    let p = plant.output_power()?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::invalid(format!("cannot normalize a plant of power {p}")));
    }
    Ok(plant.scaled(1.0 / p.sqrt()))
}

/// i.i.d. standard normal factors, rescaled to unit output power.
pub fn random_decomposable_plant<R: Rng>(order: usize, memory: usize, rng: &mut R) -> Result<RankOneKernel> {
    let factors = (0..order)
        .map(|_| (0..memory).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    match unit_power(Plant::RankOne(RankOneKernel::new(factors)?))? {
        Plant::RankOne(k) => Ok(k),
        Plant::Dense(_) => unreachable!(),
    }
}

/// Second-order bell
/// `α exp(−[x_i² + x_j² + 2ρ x_i x_j] / (2 width² (1 − ρ²)))`
/// with `x_i = i − (M−1)/2` when `centered`, else `x_i = i`; `α` gives unit
/// output power.
pub fn gaussian_rho_plant(memory: usize, rho: f64, width: f64, centered: bool) -> Result<DenseKernel> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid(format!("rho {rho} must lie in [0, 1)")));
    }
    if memory == 0 || !(width > 0.0) {
        return Err(Error::invalid("gaussian-rho plant needs M >= 1 and width > 0"));
    }
    let origin = if centered { (memory as f64 - 1.0) / 2.0 } else { 0.0 };
    let denom = 2.0 * width * width * (1.0 - rho * rho);
    let mut h = Vec::with_capacity(memory * memory);
    for i in 0..memory {
        for j in 0..memory {
            let (x, y) = (i as f64 - origin, j as f64 - origin);
            h.push((-(x * x + y * y + 2.0 * rho * x * y) / denom).exp());
        }
    }
    normalized_dense(DenseKernel::new(2, memory, h)?)
}

/// Smooth second-order stand-in kernel: a decaying envelope along the
/// diagonal times a band profile across it, unit output power.
pub fn smooth_plant(memory: usize) -> Result<DenseKernel> {
    let m = memory as f64;
    let (decay, band) = (m / 3.0, m / 4.0);
    let mut h = Vec::with_capacity(memory * memory);
    for i in 0..memory {
        for j in 0..memory {
            let (x, y) = (i as f64, j as f64);
            h.push((-(x + y) / decay).exp() * (-(x - y).powi(2) / (2.0 * band * band)).exp());
        }
    }
    normalized_dense(DenseKernel::new(2, memory, h)?)
}

fn normalized_dense(h: DenseKernel) -> Result<DenseKernel> {
    match unit_power(Plant::Dense(h))? {
        Plant::Dense(k) => Ok(k),
        Plant::RankOne(_) => unreachable!(),
    }
}

fn as_matrix(h: &DenseKernel) -> Result<DMatrix<f64>> {
    if h.order() != 2 {
        return Err(Error::invalid(format!(
            "matrix view needs a second-order kernel, got order {}",
            h.order()
        )));
    }
    let m = h.memory();
    Ok(DMatrix::from_row_slice(m, m, h.coefficients()))
}

/// Singular values of a second-order kernel reshaped to `M × M`, descending.
pub fn singular_values(h: &DenseKernel) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = as_matrix(h)?.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// `Σ_{r≥2} σ_r²`, the Frobenius error of the best rank-one approximation.
pub fn rank_one_residual_energy(h: &DenseKernel) -> Result<f64> {
    Ok(singular_values(h)?.iter().skip(1).map(|s| s * s).sum())
}

/// Lower bound on `min_W E[(u^{⊗2} (h − W))²]` over rank-one `W` for iid
/// unit-variance Gaussian input. That EMSE is `(tr D)² + 2‖sym D‖²`, and
/// `sym(a bᵀ)` has at most one positive and one negative eigenvalue, so at
/// best it removes the largest and the most negative eigenvalue of `sym h`.
pub fn rank_one_emse_lower_bound(h: &DenseKernel) -> Result<f64> {
    let m = as_matrix(h)?;
    let sym = (&m + m.transpose()) * 0.5;
    let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let lo = usize::from(eig[0] < 0.0);
    let hi = eig.len() - usize::from(eig[eig.len() - 1] > 0.0);
    Ok(2.0 * eig[lo..hi.max(lo)].iter().map(|x| x * x).sum::<f64>())
}

/// Leading singular pair of a second-order kernel as balanced factors
/// `(√σ₁ a, √σ₁ b)`.
pub fn best_rank_one(h: &DenseKernel) -> Result<RankOneKernel> {
    let svd = as_matrix(h)?.svd(true, true);
    let (i, s1) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::invalid("empty kernel"))?;
    let u = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    let r = s1.sqrt();
    let a = u.column(i).iter().map(|x| x * r).collect();
    let b = vt.row(i).iter().map(|x| x * r).collect();
    RankOneKernel::new(vec![a, b])
}

/// Plant for `spec` under the shape and seed of `cfg`.
pub fn build_plant(cfg: &ScenarioConfig, spec: &PlantSpec) -> Result<Plant> {
    let plant = match spec {
        PlantSpec::RandomDecomposable => {
            let mut rng = stream_rng(cfg.seed, Stream::Plant, 0);
            Plant::RankOne(random_decomposable_plant(cfg.order, cfg.memory, &mut rng)?)
        }
        PlantSpec::GaussianRho { rho, width } => {
            Plant::Dense(gaussian_rho_plant(cfg.memory, *rho, *width, cfg.plant_centered)?)
        }
        PlantSpec::Smooth => Plant::Dense(smooth_plant(cfg.memory)?),
        PlantSpec::File(path) => Plant::Dense(DenseKernel::read_csv(path)?),
    };
    if plant.order() != cfg.order || plant.memory() != cfg.memory {
        return Err(Error::invalid(format!(
            "plant has K={}, M={} but the scenario has K={}, M={}",
            plant.order(),
            plant.memory(),
            cfg.order,
            cfg.memory
        )));
    }
    Ok(plant)
}
