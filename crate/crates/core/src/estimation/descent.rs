use std::fmt::Write as _;
use std::path::Path;

use super::{CorrelationSet, Result};
use crate::error::Error;
use crate::tensor::{dot, materialize, RankOneKernel};

/// Residual norm below which an iterate is declared a critical point.
pub const CONVERGENCE_RESIDUAL: f64 = 1e-8;

/// Any factor entry beyond this magnitude counts as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e10;

/// Iterates of the steepest-descent recursion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SteepestDescentTrace {
    /// Stacked `[w_1; ...; w_K]` per iterate, starting with the initial point.
    pub iterates: Vec<Vec<f64>>,
    pub mse: Vec<f64>,
    /// Normal-equation residual per iterate.
    pub residual: Vec<f64>,
    /// First iterate whose residual fell below [`CONVERGENCE_RESIDUAL`].
    pub converged_at: Option<usize>,
}

impl SteepestDescentTrace {
    pub fn len(&self) -> usize {
        self.mse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mse.is_empty()
    }

    pub fn final_mse(&self) -> f64 {
        *self.mse.last().expect("trace holds the initial point")
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual.last().expect("trace holds the initial point")
    }

    pub fn final_kernel(&self, order: usize) -> RankOneKernel {
        RankOneKernel::from_stacked(self.iterates.last().expect("nonempty"), order)
            .expect("iterates keep their shape")
    }

    /// CSV with columns `iteration,mse,residual`.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("iteration,mse,residual\n");
        for (i, (m, r)) in self.mse.iter().zip(&self.residual).enumerate() {
            let _ = writeln!(s, "{i},{m},{r}");
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// `w_s = [2^{-s}, 0, ..., 0]` for `s < K-1` (0-based) and `w_{K-1} = 0`.
pub fn default_init(order: usize, memory: usize) -> Result<RankOneKernel> {
    let mut factors = vec![vec![0.0; memory]; order];
    for (s, f) in factors.iter_mut().enumerate().take(order.saturating_sub(1)) {
        if let Some(first) = f.first_mut() {
            *first = 0.5f64.powi(s as i32);
        }
    }
    RankOneKernel::new(factors)
}

/// Run exactly `iters` steps of
/// `w_{s,i} = w_{s,i-1} + μ W^(s)ᵀ [R_{d u^K} - R_{u^K} vec(W_{i-1})]`,
/// every block updated from the same previous iterate.
///
/// The returned trace holds `iters + 1` entries. A non-finite or exploding
/// iterate yields [`Error::Diverged`] carrying the finite prefix.
pub fn steepest_descent(
    c: &CorrelationSet,
    mu: f64,
    iters: usize,
    init: &RankOneKernel,
) -> Result<SteepestDescentTrace> {
    run(c, mu, iters, init, None)
}

/// As [`steepest_descent`], stopping after the first iterate whose residual
/// is below `tolerance`.
pub fn steepest_descent_until(
    c: &CorrelationSet,
    mu: f64,
    max_iters: usize,
    init: &RankOneKernel,
    tolerance: f64,
) -> Result<SteepestDescentTrace> {
    run(c, mu, max_iters, init, Some(tolerance))
}

fn run(
    c: &CorrelationSet,
    mu: f64,
    iters: usize,
    init: &RankOneKernel,
    stop_below: Option<f64>,
) -> Result<SteepestDescentTrace> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("step size {mu} must be positive")));
    }
    if iters == 0 {
        return Err(Error::invalid("steepest descent needs at least one iteration"));
    }
    c.check(init)?;
    let order = init.order();
    let mut w = init.clone();
    let mut trace = SteepestDescentTrace::default();

    for i in 0..=iters {
        let x = materialize(&w)?.into_coefficients();
        let rx = c.r_uk.matvec(&x);
        let mse = c.r_d - 2.0 * dot(&c.r_ukd, &x) + dot(&x, &rx);
        let g: Vec<f64> = rx.iter().zip(&c.r_ukd).map(|(a, p)| a - p).collect();
        let blocks: Vec<Vec<f64>> = (0..order).map(|s| w.contract_except(&g, s)).collect();
        let residual = blocks.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();

        trace.iterates.push(w.stacked());
        trace.mse.push(mse);
        trace.residual.push(residual);
        if trace.converged_at.is_none() && residual < CONVERGENCE_RESIDUAL {
            trace.converged_at = Some(i);
        }
        if i == iters || stop_below.is_some_and(|tol| residual < tol) {
            break;
        }

        for (f, b) in w.factors_mut().iter_mut().zip(&blocks) {
            for (wi, gi) in f.iter_mut().zip(b) {
                *wi -= mu * gi;
            }
        }
        if w.factors().iter().flatten().any(|x| !x.is_finite() || x.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::Diverged {
                iteration: i + 1,
                trace: Some(Box::new(trace)),
            });
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{gaussian_correlations, Plant};

    #[test]
    fn default_init_k3() {
        let w = default_init(3, 10).unwrap();
        let mut w1 = vec![0.0; 10];
        w1[0] = 1.0;
        let mut w2 = vec![0.0; 10];
        w2[0] = 0.5;
        assert_eq!(w.factors(), &[w1, w2, vec![0.0; 10]]);
        assert_eq!(default_init(1, 2).unwrap().factors(), &[vec![0.0, 0.0]]);
    }

    #[test]
    fn trace_length_and_arguments() {
        let plant = RankOneKernel::new(vec![vec![1.0, 0.5], vec![0.3, -0.2]]).unwrap();
        let c = gaussian_correlations(&Plant::RankOne(plant), 0.0).unwrap();
        let init = default_init(2, 2).unwrap();
        let t = steepest_descent(&c, 0.01, 7, &init).unwrap();
        assert_eq!(t.len(), 8);
        assert_eq!(t.iterates.len(), 8);
        assert!(steepest_descent(&c, 0.0, 7, &init).is_err());
        assert!(steepest_descent(&c, 0.1, 0, &init).is_err());
    }

    #[test]
    fn csv_header() {
        let t = SteepestDescentTrace {
            iterates: vec![vec![0.0]],
            mse: vec![1.5],
            residual: vec![0.25],
            converged_at: None,
        };
        assert_eq!(t.to_csv_string(), "iteration,mse,residual\n0,1.5,0.25\n");
    }
}
