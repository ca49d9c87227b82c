//! Exact second-order statistics for the i.i.d. Gaussian delay line, the MSE
//! surface of the decomposable model, its block gradient and the
//! steepest-descent solver.
//!
//! Conventions are real-valued. The gradient block returned by
//! [`block_gradient`] is `[R vec(W) - R_{u^K d}] · W^(s)`; the total derivative
//! of [`mse`] with respect to `w_s` is twice that vector. The descent step
//! uses the block as is, so the factor 2 is absorbed by the step size.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::tensor::{
    dense_len, dot, materialize, unflatten_index, DenseKernel, RankOneKernel,
};
use crate::volterra::{sml_output, volterra_output};

mod descent;
pub mod moments;

pub use descent::{
    default_init, steepest_descent, steepest_descent_until, SteepestDescentTrace,
    CONVERGENCE_RESIDUAL, DIVERGENCE_LIMIT,
};

use moments::{gaussian_linear_form_moment, lag_product_moment};

/// Largest `M^K` for which `R_{u^K}` is built.
pub const CORRELATION_CAP: usize = 4096;

/// The system being identified.
#[derive(Debug, Clone, PartialEq)]
pub enum Plant {
    RankOne(RankOneKernel),
    Dense(DenseKernel),
}

impl Plant {
    pub fn order(&self) -> usize {
        match self {
            Plant::RankOne(k) => k.order(),
            Plant::Dense(k) => k.order(),
        }
    }

    pub fn memory(&self) -> usize {
        match self {
            Plant::RankOne(k) => k.memory(),
            Plant::Dense(k) => k.memory(),
        }
    }

    /// Noise-free plant output for regressor `u`.
    pub fn output(&self, u: &[f64]) -> Result<f64> {
        match self {
            Plant::RankOne(k) => sml_output(u, k),
            Plant::Dense(k) => volterra_output(u, k),
        }
    }

    pub fn to_dense(&self) -> Result<DenseKernel> {
        match self {
            Plant::RankOne(k) => materialize(k),
            Plant::Dense(k) => Ok(k.clone()),
        }
    }

    /// `E[y_o²]` under unit-variance white Gaussian input.
    pub fn output_power(&self) -> Result<f64> {
        match self {
            Plant::RankOne(k) => Ok(rank_one_cross_moment(k, k)),
            Plant::Dense(k) => {
                let r = input_correlation(k.memory(), k.order())?;
                Ok(r.quadratic(k.coefficients()))
            }
        }
    }

    /// Scale the plant output by `c`. Rank-one plants spread `|c|` evenly
    /// over the factors and put the sign on the first one.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Plant::RankOne(k) => {
                let mut out = k.scaled(c.abs().powf(1.0 / k.order() as f64));
                if c < 0.0 {
                    out.factors_mut()[0].iter_mut().for_each(|x| *x = -*x);
                }
                Plant::RankOne(out)
            }
            Plant::Dense(k) => Plant::Dense(k.scaled(c)),
        }
    }
}

/// `E[(u^{⊗K} vec A)(u^{⊗K} vec B)]` for rank-one `A`, `B` of equal shape,
/// via Isserlis' theorem on the `2K` jointly Gaussian FIR outputs.
pub fn rank_one_cross_moment(a: &RankOneKernel, b: &RankOneKernel) -> f64 {
    let vecs: Vec<&[f64]> = a
        .factors()
        .iter()
        .chain(b.factors())
        .map(Vec::as_slice)
        .collect();
    gaussian_linear_form_moment(&vecs)
}

/// `R_{u^K}` in compressed-row form. Most entries vanish: `(a, b)` is nonzero
/// only when every lag appears an even number of times across both indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCorrelation {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseCorrelation {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.cols[lo..hi].binary_search(&(col as u32)) {
            Ok(p) => self.vals[lo + p],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| {
                let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
                self.cols[lo..hi]
                    .iter()
                    .zip(&self.vals[lo..hi])
                    .map(|(&c, v)| v * x[c as usize])
                    .sum()
            })
            .collect()
    }

    /// `xᵀ R x`.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for r in 0..self.dim {
            if x[r] == 0.0 {
                continue;
            }
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let row: f64 = self.cols[lo..hi]
                .iter()
                .zip(&self.vals[lo..hi])
                .map(|(&c, v)| v * x[c as usize])
                .sum();
            total += x[r] * row;
        }
        total
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim * self.dim];
        for r in 0..self.dim {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[r * self.dim + self.cols[p] as usize] = self.vals[p];
            }
        }
        out
    }
}

/// `E[(u^{⊗K})ᵀ u^{⊗K}]` for an i.i.d. `N(0, 1)` delay line of length `memory`.
pub fn input_correlation(memory: usize, order: usize) -> Result<SparseCorrelation> {
    if memory == 0 || order == 0 {
        return Err(Error::invalid("correlations need memory >= 1 and order >= 1"));
    }
    let dim = dense_len(memory, order, CORRELATION_CAP, "correlation matrix")?;
    let indices: Vec<Vec<usize>> = (0..dim).map(|f| unflatten_index(f, order, memory)).collect();

    // Bucket multi-indices by the set of lags they use an odd number of times;
    // only same-bucket pairs have a nonzero moment.
    let odd_lags = |idx: &[usize]| {
        let mut s = idx.to_vec();
        s.sort_unstable();
        let mut odd = Vec::new();
        let mut n = 0;
        while n < s.len() {
            let mut run = 1;
            while n + run < s.len() && s[n + run] == s[n] {
                run += 1;
            }
            if run % 2 == 1 {
                odd.push(s[n]);
            }
            n += run;
        }
        odd
    };
    let keys: Vec<Vec<usize>> = indices.iter().map(|i| odd_lags(i)).collect();
    let mut buckets: HashMap<&[usize], Vec<u32>> = HashMap::new();
    for (f, key) in keys.iter().enumerate() {
        buckets.entry(key.as_slice()).or_default().push(f as u32);
    }

    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut lags = Vec::with_capacity(2 * order);
    row_ptr.push(0);
    for a in 0..dim {
        for &b in &buckets[keys[a].as_slice()] {
            lags.clear();
            lags.extend_from_slice(&indices[a]);
            lags.extend_from_slice(&indices[b as usize]);
            let v = lag_product_moment(&lags);
            if v != 0.0 {
                cols.push(b);
                vals.push(v);
            }
        }
        row_ptr.push(cols.len());
    }
    Ok(SparseCorrelation {
        dim,
        row_ptr,
        cols,
        vals,
    })
}

/// Second-order statistics defining the MSE surface.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSet {
    order: usize,
    memory: usize,
    r_uk: SparseCorrelation,
    r_ukd: Vec<f64>,
    r_d: f64,
}

impl CorrelationSet {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    /// `R_{u^K}`.
    pub fn r_uk(&self) -> &SparseCorrelation {
        &self.r_uk
    }

    /// `R_{u^K d}` (row form; its transpose is `R_{d u^K}`).
    pub fn r_ukd(&self) -> &[f64] {
        &self.r_ukd
    }

    /// `R_d = E[d²]`.
    pub fn r_d(&self) -> f64 {
        self.r_d
    }

    fn check(&self, w: &RankOneKernel) -> Result<()> {
        if w.order() != self.order || w.memory() != self.memory {
            return Err(Error::invalid(format!(
                "kernel (K={}, M={}) does not match correlations (K={}, M={})",
                w.order(),
                w.memory(),
                self.order,
                self.memory
            )));
        }
        Ok(())
    }

    /// `R vec(W) - R_{u^K d}` together with `vec(W)`.
    fn residual_vector(&self, w: &RankOneKernel) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(w)?;
        let x = materialize(w)?.into_coefficients();
        let mut g = self.r_uk.matvec(&x);
        for (gi, p) in g.iter_mut().zip(&self.r_ukd) {
            *gi -= p;
        }
        Ok((g, x))
    }
}

/// Exact correlations for `d(i) = u_i^{⊗K} vec(H) + v(i)` with white unit
/// Gaussian input and independent noise of variance `noise_var`.
pub fn gaussian_correlations(plant: &Plant, noise_var: f64) -> Result<CorrelationSet> {
    if !(noise_var >= 0.0) {
        return Err(Error::invalid(format!("noise variance {noise_var} must be >= 0")));
    }
    let (order, memory) = (plant.order(), plant.memory());
    let r_uk = input_correlation(memory, order)?;
    let h = plant.to_dense()?.into_coefficients();
    let r_ukd = r_uk.matvec(&h);
    let r_d = dot(&h, &r_ukd) + noise_var;
    Ok(CorrelationSet {
        order,
        memory,
        r_uk,
        r_ukd,
        r_d,
    })
}

/// `R_d - 2 R_{u^K d} vec(W) + vec(W)ᵀ R_{u^K} vec(W)`.
pub fn mse(w: &RankOneKernel, c: &CorrelationSet) -> Result<f64> {
    c.check(w)?;
    let x = materialize(w)?.into_coefficients();
    Ok(c.r_d - 2.0 * dot(&c.r_ukd, &x) + c.r_uk.quadratic(&x))
}

/// Block `s` (0-based) of the gradient: `[-R_{u^K d} + vec(W)ᵀ R_{u^K}] W^(s)`.
pub fn block_gradient(w: &RankOneKernel, c: &CorrelationSet, s: usize) -> Result<Vec<f64>> {
    if s >= w.order() {
        return Err(Error::invalid(format!(
            "factor index {s} out of range for order {}",
            w.order()
        )));
    }
    let (g, _) = c.residual_vector(w)?;
    Ok(w.contract_except(&g, s))
}

/// All `K` gradient blocks.
pub fn gradient_blocks(w: &RankOneKernel, c: &CorrelationSet) -> Result<Vec<Vec<f64>>> {
    let (g, _) = c.residual_vector(w)?;
    Ok((0..w.order()).map(|s| w.contract_except(&g, s)).collect())
}

/// ℓ2 norm of the stacked gradient blocks; zero exactly at critical points.
pub fn normal_residual(w: &RankOneKernel, c: &CorrelationSet) -> Result<f64> {
    let blocks = gradient_blocks(w, c)?;
    Ok(blocks.iter().flatten().map(|x| x * x).sum::<f64>().sqrt())
}

/// `E[(y_iᵀ y_i) ⊗ (u_iᵀ u_i)]` at factors `w`, where `y_i` is the row of
/// partial products. Row-major, `KM × KM`, indexed `(s, m)` → `s·M + m`.
pub fn curvature_matrix(w: &RankOneKernel) -> Vec<f64> {
    let (k, m) = (w.order(), w.memory());
    let n = k * m;
    let unit = |j: usize| {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        e
    };
    let units: Vec<Vec<f64>> = (0..m).map(unit).collect();
    let mut out = vec![0.0; n * n];
    for s in 0..k {
        for t in s..k {
            for a in 0..m {
                for b in 0..m {
                    let mut vecs: Vec<&[f64]> = Vec::with_capacity(2 * k);
                    vecs.extend((0..k).filter(|&r| r != s).map(|r| w.factor(r)));
                    vecs.extend((0..k).filter(|&r| r != t).map(|r| w.factor(r)));
                    vecs.push(&units[a]);
                    vecs.push(&units[b]);
                    let v = gaussian_linear_form_moment(&vecs);
                    out[(s * m + a) * n + t * m + b] = v;
                    out[(t * m + b) * n + s * m + a] = v;
                }
            }
        }
    }
    out
}

/// `tr E[(y_iᵀ y_i) ⊗ (u_iᵀ u_i)] = E[‖y_i‖² ‖u_i‖²]`, exact.
pub fn curvature_trace(w: &RankOneKernel) -> f64 {
    let (k, m) = (w.order(), w.memory());
    let mut total = 0.0;
    for s in 0..k {
        let others: Vec<&[f64]> = (0..k).filter(|&r| r != s).map(|r| w.factor(r)).collect();
        for a in 0..m {
            let mut e = vec![0.0; m];
            e[a] = 1.0;
            let mut vecs = others.clone();
            vecs.extend(others.iter().copied());
            vecs.push(&e);
            vecs.push(&e);
            total += gaussian_linear_form_moment(&vecs);
        }
    }
    total
}

/// Largest eigenvalue of [`curvature_matrix`].
pub fn max_curvature_eigenvalue(w: &RankOneKernel) -> f64 {
    let n = w.order() * w.memory();
    let m = DMatrix::from_row_slice(n, n, &curvature_matrix(w));
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plant_k2() -> RankOneKernel {
        RankOneKernel::new(vec![vec![0.8, -0.3, 0.4], vec![0.2, 0.9, -0.5]]).unwrap()
    }

    #[test]
    fn white_input_k1_is_identity() {
        let r = input_correlation(4, 1).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(r.get(a, b), if a == b { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn fourth_moment_scalar() {
        let r = input_correlation(1, 2).unwrap();
        assert_eq!(r.to_dense(), vec![3.0]);
    }

    #[test]
    fn sparse_matches_entrywise_definition() {
        let (m, k) = (3, 2);
        let r = input_correlation(m, k).unwrap();
        let dense = r.to_dense();
        for a in 0..9 {
            for b in 0..9 {
                let mut lags = unflatten_index(a, k, m);
                lags.extend(unflatten_index(b, k, m));
                assert_eq!(dense[a * 9 + b], lag_product_moment(&lags));
            }
        }
    }

    #[test]
    fn mse_at_plant_is_noise_and_at_zero_is_rd() {
        let plant = plant_k2();
        let c = gaussian_correlations(&Plant::RankOne(plant.clone()), 1e-3).unwrap();
        assert!((mse(&plant, &c).unwrap() - 1e-3).abs() < 1e-12);
        let zero = RankOneKernel::zeros(2, 3).unwrap();
        assert_eq!(mse(&zero, &c).unwrap(), c.r_d());
        let c0 = gaussian_correlations(&Plant::RankOne(plant.clone()), 0.0).unwrap();
        assert!(mse(&plant, &c0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn linear_gradient_reduction() {
        let plant = RankOneKernel::new(vec![vec![0.5, -1.0, 0.25]]).unwrap();
        let c = gaussian_correlations(&Plant::RankOne(plant.clone()), 0.1).unwrap();
        let w = RankOneKernel::new(vec![vec![0.1, 0.2, 0.3]]).unwrap();
        let g = block_gradient(&w, &c, 0).unwrap();
        // R_u = I, so the gradient is w - w_o.
        for (gi, (wi, pi)) in g.iter().zip(w.factor(0).iter().zip(plant.factor(0))) {
            assert!((gi - (wi - pi)).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_index_checked() {
        let plant = plant_k2();
        let c = gaussian_correlations(&Plant::RankOne(plant.clone()), 0.0).unwrap();
        assert!(matches!(block_gradient(&plant, &c, 2), Err(Error::InvalidArgument(_))));
        let wrong = RankOneKernel::zeros(2, 4).unwrap();
        assert!(mse(&wrong, &c).is_err());
    }

    #[test]
    fn residual_zero_at_plant() {
        let plant = plant_k2();
        let c = gaussian_correlations(&Plant::RankOne(plant.clone()), 1e-3).unwrap();
        assert!(normal_residual(&plant, &c).unwrap() <= 1e-10);
    }

    #[test]
    fn output_power_routes_agree() {
        let plant = plant_k2();
        let dense = Plant::Dense(materialize(&plant).unwrap());
        let a = Plant::RankOne(plant).output_power().unwrap();
        let b = dense.output_power().unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn curvature_trace_matches_matrix_trace() {
        let w = plant_k2();
        let n = 6;
        let c = curvature_matrix(&w);
        let tr: f64 = (0..n).map(|i| c[i * n + i]).sum();
        assert!((tr - curvature_trace(&w)).abs() < 1e-12);
        // K = 1: y = 1, so the matrix is R_u = I.
        let lin = RankOneKernel::new(vec![vec![3.0, 1.0]]).unwrap();
        assert_eq!(curvature_matrix(&lin), vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn negative_noise_rejected() {
        let plant = Plant::RankOne(plant_k2());
        assert!(gaussian_correlations(&plant, -1.0).is_err());
    }
}
