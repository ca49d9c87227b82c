use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ops::OpCount;
use crate::error::{Error, Result};
use crate::tensor::{dot, RankOneKernel};
use crate::volterra::{leave_one_out, DelayLine};

/// Minimum Monte Carlo sample count accepted by [`step_bound`].
pub const MIN_BOUND_SAMPLES: usize = 10_000;

/// Monte Carlo estimate of `E[‖y_i‖² ‖u_i‖²]` at the given factors, with
/// `y_i` the row of partial products and `u_i` a white unit Gaussian delay line.
pub fn gradient_power_estimate(factors: &RankOneKernel, samples: usize, seed: u64) -> f64 {
    let m = factors.memory();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut line = DelayLine::new(m).expect("memory >= 1");
    for _ in 0..m {
        line.push(StandardNormal.sample(&mut rng));
    }
    let mut sum = 0.0;
    for _ in 0..samples {
        line.push(StandardNormal.sample(&mut rng));
        let u = line.regressor();
        let z: Vec<f64> = factors.factors().iter().map(|w| dot(u, w)).collect();
        let y2: f64 = leave_one_out(&z).iter().map(|y| y * y).sum();
        sum += y2 * dot(u, u);
    }
    sum / samples as f64
}

/// Step bound `μ_0 = 2 / (3^K · E[‖y_i‖² ‖u_i‖²])` with the expectation taken
/// by Monte Carlo at the plant factors.
pub fn step_bound(plant: &RankOneKernel, samples: usize, seed: u64) -> Result<f64> {
    if samples < MIN_BOUND_SAMPLES {
        return Err(Error::invalid(format!(
            "step bound needs at least {MIN_BOUND_SAMPLES} samples, got {samples}"
        )));
    }
    let t = gradient_power_estimate(plant, samples, seed);
    step_bound_from_power(plant.order(), t)
}

/// `2 / (3^K · t)`.
pub fn step_bound_from_power(order: usize, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::UndefinedBound(format!(
            "gradient power {t} (zero plant?)"
        )));
    }
    Ok(2.0 / (3f64.powi(order as i32) * t))
}

/// `MAX = (K + 1) · sqrt(output power)`.
pub fn max_threshold(order: usize, output_power: f64) -> Result<f64> {
    if !(output_power >= 0.0) {
        return Err(Error::invalid(format!("output power {output_power} must be >= 0")));
    }
    Ok((order as f64 + 1.0) * output_power.sqrt())
}

/// MAX for a TRUE-LMS window of length `window`: half of [`max_threshold`]
/// once `L >= 4`.
pub fn true_lms_max_threshold(order: usize, output_power: f64, window: usize) -> Result<f64> {
    let max = max_threshold(order, output_power)?;
    Ok(if window >= 4 { 0.5 * max } else { max })
}

/// Which recursion an operation count refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recursion {
    Lms,
    TrueLms { window: usize },
}

/// Per-step closed-form operation counts of the efficient implementations.
///
/// TRUE-LMS: adds `2LKM − LK + L`, mults `3LKM + LK² + KM − 2LK + L`.
/// LMS: adds `2KM − K + 1`, mults `KM + K² + M − K + 2`.
pub fn operation_counts(order: usize, memory: usize, recursion: Recursion) -> Result<OpCount> {
    if order == 0 || memory == 0 {
        return Err(Error::invalid("operation counts need K >= 1 and M >= 1"));
    }
    let (k, m) = (order as i64, memory as i64);
    let (adds, mults) = match recursion {
        Recursion::Lms => (2 * k * m - k + 1, k * m + k * k + m - k + 2),
        Recursion::TrueLms { window } => {
            if window == 0 {
                return Err(Error::invalid("TRUE-LMS window must be >= 1"));
            }
            let l = window as i64;
            (
                2 * l * k * m - l * k + l,
                3 * l * k * m + l * k * k + k * m - 2 * l * k + l,
            )
        }
    };
    Ok(OpCount {
        adds: adds as u64,
        mults: mults as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_threshold_values() {
        assert_eq!(max_threshold(2, 1.0).unwrap(), 3.0);
        assert_eq!(max_threshold(3, 4.0).unwrap(), 8.0);
        assert_eq!(true_lms_max_threshold(2, 1.0, 4).unwrap(), 1.5);
        assert_eq!(true_lms_max_threshold(2, 1.0, 2).unwrap(), 3.0);
        assert!(max_threshold(2, -1.0).is_err());
    }

    #[test]
    fn operation_count_values() {
        assert_eq!(
            operation_counts(2, 10, Recursion::Lms).unwrap(),
            OpCount { adds: 39, mults: 34 }
        );
        // 3·4·2·10 + 4·4 + 20 − 16 + 4
        assert_eq!(
            operation_counts(2, 10, Recursion::TrueLms { window: 4 }).unwrap(),
            OpCount { adds: 156, mults: 264 }
        );
        assert_eq!(
            operation_counts(1, 1, Recursion::Lms).unwrap(),
            OpCount { adds: 2, mults: 4 }
        );
        assert!(operation_counts(0, 1, Recursion::Lms).is_err());
        assert!(operation_counts(1, 1, Recursion::TrueLms { window: 0 }).is_err());
    }

    #[test]
    fn linear_bound_k1() {
        // y = 1 and E[u²] = 1 for a single tap.
        let w = RankOneKernel::new(vec![vec![0.7]]).unwrap();
        let mu0 = step_bound(&w, 1_000_000, 7).unwrap();
        assert!((mu0 - 2.0 / 3.0).abs() < 0.01 * 2.0 / 3.0, "{mu0}");
    }

    #[test]
    fn zero_plant_has_no_bound() {
        let w = RankOneKernel::zeros(2, 3).unwrap();
        assert!(matches!(step_bound(&w, 20_000, 1), Err(Error::UndefinedBound(_))));
        assert!(step_bound(&w, 10, 1).is_err());
    }
}
