//! Kronecker/tensor-product primitives and kernel representations.
//!
//! Order-`K` kernels over memory `M` are flattened row-major: the multi-index
//! `(i_1, ..., i_K)` (0-based) lives at `Σ_k i_k · M^(K-k)`. This matches the
//! Kronecker product convention, so `tensor_power(u, K)` and a dense kernel's
//! coefficients line up index for index.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Largest coefficient count a [`DenseKernel`] may hold.
pub const DENSE_CAP: usize = 10_000_000;

/// Kronecker product of two vectors: `out[p * b.len() + q] = a[p] * b[q]`.
pub fn kron(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("kron of an empty vector"));
    }
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    Ok(out)
}

/// `u ⊗ u ⊗ ... ⊗ u` (`k` copies), left-associated.
pub fn tensor_power(u: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::invalid("tensor power of order 0"));
    }
    if u.is_empty() {
        return Err(Error::invalid("tensor power of an empty vector"));
    }
    dense_len(u.len(), k, DENSE_CAP, "tensor power")?;
    let mut acc = u.to_vec();
    for _ in 1..k {
        acc = kron(&acc, u)?;
    }
    Ok(acc)
}

/// `m^k`, or a size error when it exceeds `cap`.
pub(crate) fn dense_len(m: usize, k: usize, cap: usize, what: &'static str) -> Result<usize> {
    let required = (m as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(Error::Size {
            what,
            required,
            cap: cap as u128,
        });
    }
    Ok(required as usize)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A decomposable kernel `w_1 ⊗ ... ⊗ w_K`, kept as its `K` factor vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneKernel {
    factors: Vec<Vec<f64>>,
}

impl RankOneKernel {
    pub fn new(factors: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = factors.first() else {
            return Err(Error::invalid("rank-one kernel needs at least one factor"));
        };
        let m = first.len();
        if m == 0 {
            return Err(Error::invalid("rank-one kernel factors must be nonempty"));
        }
        if factors.iter().any(|f| f.len() != m) {
            return Err(Error::invalid("rank-one kernel factors differ in length"));
        }
        Ok(Self { factors })
    }

    pub fn zeros(order: usize, memory: usize) -> Result<Self> {
        Self::new(vec![vec![0.0; memory]; order])
    }

    /// Rebuild from the `K·M` stacked vector `[w_1; w_2; ...; w_K]`.
    pub fn from_stacked(stacked: &[f64], order: usize) -> Result<Self> {
        if order == 0 || stacked.len() % order != 0 {
            return Err(Error::invalid(format!(
                "stacked length {} is not a multiple of order {order}",
                stacked.len()
            )));
        }
        let m = stacked.len() / order;
        Self::new(stacked.chunks(m).map(<[f64]>::to_vec).collect())
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn memory(&self) -> usize {
        self.factors[0].len()
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    pub fn factor(&self, s: usize) -> &[f64] {
        &self.factors[s]
    }

    pub(crate) fn factors_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.factors
    }

    pub fn into_factors(self) -> Vec<Vec<f64>> {
        self.factors
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.factors.concat()
    }

    /// Scale every factor by `c`; the kernel scales by `c^K`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            factors: self
                .factors
                .iter()
                .map(|f| f.iter().map(|x| x * c).collect())
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.factors.iter().flatten().all(|x| x.is_finite())
    }

    /// `Π_s ‖w_s‖`.
    pub fn factor_norm_product(&self) -> f64 {
        self.factors.iter().map(|f| dot(f, f).sqrt()).product()
    }

    /// `⟨vec(W), g⟩` for a dense vector `g` of length `M^K`, without
    /// materializing `W`.
    pub fn contract_full(&self, g: &[f64]) -> f64 {
        // Contract the trailing axis first: each pass shrinks g by a factor M.
        let m = self.memory();
        let mut cur = g.to_vec();
        for w in self.factors.iter().rev() {
            cur = cur.chunks(m).map(|c| dot(c, w)).collect();
        }
        cur[0]
    }

    /// `g · W^(s)`: contract `g` (length `M^K`) against every factor except
    /// the `s`-th (0-based), leaving an `M`-vector indexed by axis `s`.
    pub fn contract_except(&self, g: &[f64], s: usize) -> Vec<f64> {
        let m = self.memory();
        let k = self.order();
        // Trailing axes k-1 .. s+1.
        let mut cur = g.to_vec();
        for t in (s + 1..k).rev() {
            cur = cur.chunks(m).map(|c| dot(c, &self.factors[t])).collect();
        }
        // Now cur is indexed (i_1, ..., i_s+1) with axis s innermost; fold the
        // leading axes 0 .. s-1.
        let mut out = vec![0.0; m];
        let lead = cur.len() / m;
        for (block, chunk) in cur.chunks(m).enumerate() {
            let mut weight = 1.0;
            let mut rem = block;
            for t in (0..s).rev() {
                weight *= self.factors[t][rem % m];
                rem /= m;
            }
            debug_assert!(block < lead);
            for (o, x) in out.iter_mut().zip(chunk) {
                *o += weight * x;
            }
        }
        out
    }
}

/// A full order-`K` Volterra kernel with `M^K` row-major coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseKernel {
    order: usize,
    memory: usize,
    coefficients: Vec<f64>,
}

impl DenseKernel {
    pub fn new(order: usize, memory: usize, coefficients: Vec<f64>) -> Result<Self> {
        if order == 0 || memory == 0 {
            return Err(Error::invalid("dense kernel needs order >= 1 and memory >= 1"));
        }
        let len = dense_len(memory, order, DENSE_CAP, "dense kernel")?;
        if coefficients.len() != len {
            return Err(Error::invalid(format!(
                "dense kernel of order {order}, memory {memory} needs {len} coefficients, got {}",
                coefficients.len()
            )));
        }
        Ok(Self {
            order,
            memory,
            coefficients,
        })
    }

    pub fn zeros(order: usize, memory: usize) -> Result<Self> {
        if order == 0 || memory == 0 {
            return Err(Error::invalid("dense kernel needs order >= 1 and memory >= 1"));
        }
        let len = dense_len(memory, order, DENSE_CAP, "dense kernel")?;
        Self::new(order, memory, vec![0.0; len])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.coefficients[flatten_index(index, self.memory)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            order: self.order,
            memory: self.memory,
            coefficients: self.coefficients.iter().map(|x| x * c).collect(),
        }
    }

    /// Parse the kernel CSV format: a literal `order,memory` header, one
    /// `K,M` line, then `M^K` coefficients one per line in canonical order.
    /// Blank lines are ignored.
    pub fn from_csv_str(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        match lines.next() {
            Some(h) if h.replace(' ', "") == "order,memory" => {}
            other => return Err(format!("expected header `order,memory`, found {other:?}")),
        }
        let dims = lines.next().ok_or("missing `K,M` line")?;
        let mut parts = dims.split(',').map(str::trim);
        let (Some(k), Some(m), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("malformed dimension line {dims:?}"));
        };
        let order: usize = k.parse().map_err(|e| format!("order {k:?}: {e}"))?;
        let memory: usize = m.parse().map_err(|e| format!("memory {m:?}: {e}"))?;
        let coefficients = lines
            .enumerate()
            .map(|(n, l)| {
                l.parse::<f64>()
                    .map_err(|e| format!("coefficient {n} {l:?}: {e}"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(order, memory, coefficients).map_err(|e| e.to_string())
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::with_capacity(24 * self.coefficients.len() + 32);
        s.push_str("order,memory\n");
        let _ = writeln!(s, "{},{}", self.order, self.memory);
        for c in &self.coefficients {
            let _ = writeln!(s, "{c}");
        }
        s
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::from_csv_str(&text).map_err(|msg| Error::KernelFile {
            path: path.to_path_buf(),
            msg,
        })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// Canonical position of a 0-based multi-index.
pub fn flatten_index(index: &[usize], memory: usize) -> usize {
    index.iter().fold(0, |acc, &i| acc * memory + i)
}

/// Inverse of [`flatten_index`] for an order-`order` kernel.
pub fn unflatten_index(mut flat: usize, order: usize, memory: usize) -> Vec<usize> {
    let mut idx = vec![0; order];
    for slot in idx.iter_mut().rev() {
        *slot = flat % memory;
        flat /= memory;
    }
    idx
}

/// Dense coefficients of `w_1 ⊗ ... ⊗ w_K`.
pub fn materialize(kernel: &RankOneKernel) -> Result<DenseKernel> {
    dense_len(kernel.memory(), kernel.order(), DENSE_CAP, "materialize")?;
    let mut acc = kernel.factors[0].clone();
    for w in &kernel.factors[1..] {
        acc = kron(&acc, w)?;
    }
    DenseKernel::new(kernel.order(), kernel.memory(), acc)
}

fn check_same_shape(a: &DenseKernel, b: &DenseKernel) -> Result<()> {
    if a.order != b.order || a.memory != b.memory {
        return Err(Error::invalid(format!(
            "kernel shapes differ: (K={}, M={}) vs (K={}, M={})",
            a.order, a.memory, b.order, b.memory
        )));
    }
    Ok(())
}

/// ℓ2-induced inner product: sum of coefficient products over all multi-indices.
pub fn tensor_inner(a: &DenseKernel, b: &DenseKernel) -> Result<f64> {
    check_same_shape(a, b)?;
    Ok(dot(&a.coefficients, &b.coefficients))
}

pub fn tensor_norm(a: &DenseKernel) -> f64 {
    dot(&a.coefficients, &a.coefficients).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_small_cases() {
        assert_eq!(kron(&[1.0], &[7.5]).unwrap(), vec![7.5]);
        assert_eq!(kron(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), vec![3.0, 4.0, 6.0, 8.0]);
        assert!(matches!(kron(&[], &[1.0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(kron(&[1.0], &[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tensor_power_small_cases() {
        assert_eq!(tensor_power(&[2.0], 3).unwrap(), vec![8.0]);
        assert_eq!(tensor_power(&[1.0, 2.0], 2).unwrap(), vec![1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(tensor_power(&[1.0], 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn materialize_small_cases() {
        let k1 = RankOneKernel::new(vec![vec![1.0, -2.0, 3.0]]).unwrap();
        assert_eq!(materialize(&k1).unwrap().coefficients(), &[1.0, -2.0, 3.0]);

        let k2 = RankOneKernel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(materialize(&k2).unwrap().coefficients(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn materialize_refuses_oversized() {
        let k = RankOneKernel::zeros(8, 8).unwrap();
        assert!(matches!(materialize(&k), Err(Error::Size { .. })));
    }

    #[test]
    fn rank_one_validation() {
        assert!(RankOneKernel::new(vec![]).is_err());
        assert!(RankOneKernel::new(vec![vec![]]).is_err());
        assert!(RankOneKernel::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        let k = RankOneKernel::from_stacked(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3).unwrap();
        assert_eq!(k.factor(1), &[3.0, 4.0]);
        assert_eq!(k.stacked(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn dense_kernel_length_checked() {
        assert!(DenseKernel::new(2, 3, vec![0.0; 8]).is_err());
        assert!(DenseKernel::new(0, 3, vec![]).is_err());
        assert!(DenseKernel::new(2, 3, vec![0.0; 9]).is_ok());
    }

    #[test]
    fn norm_and_inner_small_cases() {
        let ones = DenseKernel::new(2, 2, vec![1.0; 4]).unwrap();
        assert_eq!(tensor_norm(&ones), 2.0);
        let zero = DenseKernel::zeros(2, 2).unwrap();
        assert_eq!(tensor_inner(&ones, &zero).unwrap(), 0.0);
        assert_eq!(tensor_norm(&zero), 0.0);
        let other = DenseKernel::zeros(2, 3).unwrap();
        assert!(matches!(tensor_inner(&ones, &other), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn inner_matches_double_loop() {
        let a: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
        let b: Vec<f64> = (0..9).map(|i| (i as f64 * 1.3).cos()).collect();
        let mut expected = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                expected += a[i * 3 + j] * b[i * 3 + j];
            }
        }
        let da = DenseKernel::new(2, 3, a).unwrap();
        let db = DenseKernel::new(2, 3, b).unwrap();
        assert!((tensor_inner(&da, &db).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn contract_helpers_match_materialized() {
        let k = RankOneKernel::new(vec![
            vec![0.3, -1.2, 0.5],
            vec![1.1, 0.4, -0.7],
            vec![-0.2, 0.9, 1.5],
        ])
        .unwrap();
        let g: Vec<f64> = (0..27).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
        let dense = materialize(&k).unwrap();
        let full = dot(dense.coefficients(), &g);
        assert!((k.contract_full(&g) - full).abs() < 1e-12);

        for s in 0..3 {
            let got = k.contract_except(&g, s);
            for (m, &x) in got.iter().enumerate() {
                let mut want = 0.0;
                for flat in 0..27 {
                    let idx = unflatten_index(flat, 3, 3);
                    if idx[s] != m {
                        continue;
                    }
                    let w: f64 = (0..3).filter(|&t| t != s).map(|t| k.factor(t)[idx[t]]).product();
                    want += g[flat] * w;
                }
                assert!((x - want).abs() < 1e-12, "s={s} m={m}");
            }
        }
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let k = DenseKernel::new(2, 2, vec![0.1, -2.5, 3.0e-17, 4.0]).unwrap();
        let text = k.to_csv_string();
        assert!(text.starts_with("order,memory\n2,2\n"));
        assert_eq!(DenseKernel::from_csv_str(&text).unwrap(), k);
        assert!(DenseKernel::from_csv_str("order,memory\n2,2\n1\n2\n3\n").is_err());
        assert!(DenseKernel::from_csv_str("k,m\n1,1\n1\n").is_err());
        assert!(DenseKernel::from_csv_str("order,memory\n1,1\nabc\n").is_err());
    }
}
