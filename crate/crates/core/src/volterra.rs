//! Forward evaluation of the nonlinear models over a delay-line regressor.
//!
//! * [`sml_output`]: the decomposable model, a product of `K` FIR outputs, `O(KM)`.
//! * [`volterra_output`]: a full homogeneous order-`K` kernel, `O(M^K)`.
//! * [`diagonal_output`]: second-order kernels truncated to `D` diagonals
//!   (`D = 1` is the Power Filter).

use crate::error::{Error, Result};
use crate::tensor::{dot, DenseKernel, RankOneKernel};

/// The last `M` input samples, newest first: `[u(i), u(i-1), ..., u(i-M+1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLine {
    buffer: Vec<f64>,
}

impl DelayLine {
    /// A zero-filled delay line of length `memory`.
    pub fn new(memory: usize) -> Result<Self> {
        if memory == 0 {
            return Err(Error::invalid("delay line memory must be >= 1"));
        }
        Ok(Self {
            buffer: vec![0.0; memory],
        })
    }

    pub fn memory(&self) -> usize {
        self.buffer.len()
    }

    /// Shift in `sample` as the newest entry, dropping the oldest.
    pub fn push(&mut self, sample: f64) {
        self.buffer.rotate_right(1);
        self.buffer[0] = sample;
    }

    pub fn regressor(&self) -> &[f64] {
        &self.buffer
    }

    pub fn reset(&mut self) {
        self.buffer.fill(0.0);
    }
}

fn check_memory(u: &[f64], memory: usize) -> Result<()> {
    if u.len() != memory {
        return Err(Error::invalid(format!(
            "regressor length {} does not match kernel memory {memory}",
            u.len()
        )));
    }
    Ok(())
}

/// `Π_s (u · w_s)`.
pub fn sml_output(u: &[f64], kernel: &RankOneKernel) -> Result<f64> {
    check_memory(u, kernel.memory())?;
    Ok(kernel.factors().iter().map(|w| dot(u, w)).product())
}

/// FIR outputs `u · w_s` for every factor.
pub fn fir_outputs(u: &[f64], kernel: &RankOneKernel) -> Result<Vec<f64>> {
    check_memory(u, kernel.memory())?;
    Ok(kernel.factors().iter().map(|w| dot(u, w)).collect())
}

/// Products of all FIR outputs but one: entry `s` omits `u · w_s`
/// (an empty product is 1).
pub fn partial_products(u: &[f64], kernel: &RankOneKernel) -> Result<Vec<f64>> {
    Ok(leave_one_out(&fir_outputs(u, kernel)?))
}

pub(crate) fn leave_one_out(z: &[f64]) -> Vec<f64> {
    (0..z.len())
        .map(|s| {
            z.iter()
                .enumerate()
                .filter(|&(t, _)| t != s)
                .map(|(_, x)| x)
                .product()
        })
        .collect()
}

/// `Σ H(i_1..i_K) u(i-i_1)...u(i-i_K)`, evaluated without forming `u^{⊗K}`.
pub fn volterra_output(u: &[f64], kernel: &DenseKernel) -> Result<f64> {
    check_memory(u, kernel.memory())?;
    // Horner-style contraction from the trailing axis.
    let m = kernel.memory();
    let mut cur: Vec<f64> = kernel.coefficients().chunks(m).map(|c| dot(c, u)).collect();
    for _ in 1..kernel.order() {
        cur = cur.chunks(m).map(|c| dot(c, u)).collect();
    }
    Ok(cur[0])
}

/// Second-order kernel restricted to its first `D` diagonals,
/// `H(i_1, i_1 + d)` for `0 <= d < D`.
///
/// Stored zero-padded as `D` rows of length `M`; row `d` entry `i_1` is
/// `H(i_1, i_1 + d)`, and entries with `i_1 + d >= M` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalKernel {
    memory: usize,
    diagonals: usize,
    entries: Vec<f64>,
}

impl DiagonalKernel {
    pub fn new(memory: usize, diagonals: usize, entries: Vec<f64>) -> Result<Self> {
        if memory == 0 || diagonals == 0 {
            return Err(Error::invalid("diagonal kernel needs memory >= 1 and D >= 1"));
        }
        if diagonals > memory {
            return Err(Error::invalid(format!(
                "diagonal count {diagonals} exceeds memory {memory}"
            )));
        }
        if entries.len() != memory * diagonals {
            return Err(Error::invalid(format!(
                "diagonal kernel needs {} entries, got {}",
                memory * diagonals,
                entries.len()
            )));
        }
        for d in 0..diagonals {
            for i in memory - d..memory {
                if entries[d * memory + i] != 0.0 {
                    return Err(Error::invalid(format!(
                        "padding entry H({i}, {}) must be zero",
                        i + d
                    )));
                }
            }
        }
        Ok(Self {
            memory,
            diagonals,
            entries,
        })
    }

    /// Fold the upper triangle (`j >= i`) of a dense second-order kernel onto
    /// its first `D` diagonals. Entries below the diagonal are ignored.
    pub fn from_upper_triangle(kernel: &DenseKernel, diagonals: usize) -> Result<Self> {
        if kernel.order() != 2 {
            return Err(Error::invalid("diagonal kernels are second order"));
        }
        let m = kernel.memory();
        let mut entries = vec![0.0; m * diagonals.min(m).max(1)];
        for d in 0..diagonals.min(m) {
            for i in 0..m - d {
                entries[d * m + i] = kernel.get(&[i, i + d]);
            }
        }
        Self::new(m, diagonals, entries)
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn diagonals(&self) -> usize {
        self.diagonals
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `H(i_1, i_1 + d)`.
    pub fn get(&self, i1: usize, d: usize) -> f64 {
        self.entries[d * self.memory + i1]
    }

    /// Embed as a dense second-order kernel (zero outside the stored band).
    pub fn to_dense(&self) -> DenseKernel {
        let m = self.memory;
        let mut c = vec![0.0; m * m];
        for d in 0..self.diagonals {
            for i in 0..m - d {
                c[i * m + i + d] = self.get(i, d);
            }
        }
        DenseKernel::new(2, m, c).expect("m*m coefficients")
    }
}

/// `Σ_d Σ_{i_1} H(i_1, i_1 + d) u(i - i_1) u(i - i_1 - d)`.
pub fn diagonal_output(u: &[f64], kernel: &DiagonalKernel) -> Result<f64> {
    check_memory(u, kernel.memory)?;
    let m = kernel.memory;
    let mut y = 0.0;
    for d in 0..kernel.diagonals {
        let row = &kernel.entries[d * m..(d + 1) * m];
        for i in 0..m - d {
            y += row[i] * u[i] * u[i + d];
        }
    }
    Ok(y)
}

/// The regressor the diagonal kernel is linear in, laid out like its entries.
pub fn diagonal_regressor(u: &[f64], diagonals: usize) -> Vec<f64> {
    let m = u.len();
    let mut out = vec![0.0; m * diagonals];
    for d in 0..diagonals.min(m) {
        for i in 0..m - d {
            out[d * m + i] = u[i] * u[i + d];
        }
    }
    out
}
