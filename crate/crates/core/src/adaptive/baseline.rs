use super::sml::StepOutput;
use crate::error::{Error, Result};
use crate::estimation::DIVERGENCE_LIMIT;
use crate::tensor::{dense_len, dot, tensor_power, DenseKernel, DENSE_CAP};
use crate::volterra::{diagonal_regressor, DelayLine, DiagonalKernel};

/// Linear-in-the-parameters Volterra-family models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineVariant {
    /// Full homogeneous kernel of the given order, `M^K` coefficients.
    Volterra { order: usize },
    /// Main diagonal only, `M` coefficients.
    PowerFilter,
    /// First `D` diagonals of a second-order kernel, `D·M` (zero-padded).
    SimplifiedVolterra { diagonals: usize },
}

impl BaselineVariant {
    pub fn order(&self) -> usize {
        match *self {
            BaselineVariant::Volterra { order } => order,
            _ => 2,
        }
    }

    fn diagonals(&self) -> Option<usize> {
        match *self {
            BaselineVariant::Volterra { .. } => None,
            BaselineVariant::PowerFilter => Some(1),
            BaselineVariant::SimplifiedVolterra { diagonals } => Some(diagonals),
        }
    }

    pub fn coefficient_len(&self, memory: usize) -> Result<usize> {
        match self.diagonals() {
            None => dense_len(memory, self.order(), DENSE_CAP, "Volterra LMS"),
            Some(d) => Ok(d * memory),
        }
    }

    /// Regressor the model is linear in.
    pub fn regressor(&self, u: &[f64]) -> Vec<f64> {
        match self.diagonals() {
            None => tensor_power(u, self.order()).expect("validated at construction"),
            Some(d) => diagonal_regressor(u, d),
        }
    }

    /// `E[‖regressor‖²]` for a white unit Gaussian delay line.
    pub fn regressor_power(&self, memory: usize) -> f64 {
        let m = memory as f64;
        match self.diagonals() {
            // E[(Σ u_j²)^K] = M (M+2) ... (M+2K-2)
            None => (0..self.order()).map(|j| m + 2.0 * j as f64).product(),
            // E[u⁴] = 3 on the main diagonal, 1 off it.
            Some(d) => 3.0 * m + (1..d.min(memory)).map(|k| (memory - k) as f64).sum::<f64>(),
        }
    }
}

/// LMS over a linear-in-the-parameters regressor map.
#[derive(Debug, Clone)]
pub struct LinearInParamsFilter {
    variant: BaselineVariant,
    coefficients: Vec<f64>,
    mu: f64,
    line: DelayLine,
    diverged: bool,
}

impl LinearInParamsFilter {
    /// Zero-initialized filter.
    pub fn new(variant: BaselineVariant, memory: usize, mu: f64) -> Result<Self> {
        let len = variant.coefficient_len(memory)?;
        Self::with_coefficients(variant, memory, mu, vec![0.0; len])
    }

    pub fn with_coefficients(
        variant: BaselineVariant,
        memory: usize,
        mu: f64,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::invalid(format!("step size {mu} must be positive")));
        }
        match variant {
            BaselineVariant::Volterra { order: 0 } => {
                return Err(Error::invalid("Volterra order must be >= 1"))
            }
            BaselineVariant::SimplifiedVolterra { diagonals }
                if diagonals == 0 || diagonals > memory =>
            {
                return Err(Error::invalid(format!(
                    "diagonal count {diagonals} must be in 1..={memory}"
                )))
            }
            _ => {}
        }
        let len = variant.coefficient_len(memory)?;
        if coefficients.len() != len {
            return Err(Error::invalid(format!(
                "{variant:?} with memory {memory} needs {len} coefficients, got {}",
                coefficients.len()
            )));
        }
        Ok(Self {
            variant,
            coefficients,
            mu,
            line: DelayLine::new(memory)?,
            diverged: false,
        })
    }

    pub fn variant(&self) -> BaselineVariant {
        self.variant
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn memory(&self) -> usize {
        self.line.memory()
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged
    }

    /// The coefficients as a dense kernel (diagonal layouts are embedded in
    /// the upper triangle).
    pub fn dense_kernel(&self) -> Result<DenseKernel> {
        let m = self.memory();
        match self.variant.diagonals() {
            None => DenseKernel::new(self.variant.order(), m, self.coefficients.clone()),
            Some(d) => Ok(DiagonalKernel::new(m, d, self.coefficients.clone())?.to_dense()),
        }
    }

    /// Shift an input sample into the delay line without adapting.
    pub fn prime(&mut self, u_new: f64) {
        self.line.push(u_new);
    }

    /// `coeffs += μ e(i) φ(u_i)`.
    pub fn step(&mut self, u_new: f64, d_new: f64) -> StepOutput {
        self.line.push(u_new);
        let phi = self.variant.regressor(self.line.regressor());
        let y = dot(&phi, &self.coefficients);
        let e = d_new - y;
        if !self.diverged {
            let me = self.mu * e;
            for (c, p) in self.coefficients.iter_mut().zip(&phi) {
                *c += me * p;
            }
            if !y.is_finite()
                || self
                    .coefficients
                    .iter()
                    .any(|c| !c.is_finite() || c.abs() > DIVERGENCE_LIMIT)
            {
                self.diverged = true;
            }
        }
        StepOutput { output: y, error: e }
    }
}
