use super::ops::{dot, leave_one_out_into, Counted, OpCount, Real};
use crate::error::{Error, Result};
use crate::estimation::DIVERGENCE_LIMIT;
use crate::tensor::RankOneKernel;
use crate::volterra::DelayLine;

/// Output and error of one adaptation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub output: f64,
    pub error: f64,
}

/// Output of one TRUE-LMS step; `errors[j]` belongs to sample `i - j`,
/// recomputed against the pre-update factors.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowOutput {
    pub output: f64,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Scratch<S> {
    z: Vec<S>,
    partial: Vec<S>,
    errors: Vec<S>,
    acc: Vec<S>,
    shared: Vec<S>,
}

impl<S: Real> Scratch<S> {
    fn new(order: usize, memory: usize, window: usize) -> Self {
        let zero = S::lift(0.0);
        Self {
            z: vec![zero; order],
            partial: vec![zero; order * window],
            errors: vec![zero; window],
            acc: vec![zero; memory],
            shared: vec![zero; memory],
        }
    }
}

/// Stabilized LMS step on the decomposable model.
fn lms_kernel<S: Real>(w: &mut [Vec<S>], u: &[S], d: S, mu: S, max: f64, sc: &mut Scratch<S>) -> (S, S) {
    let k = w.len();
    for (z, ws) in sc.z.iter_mut().zip(w.iter()) {
        *z = dot(u, ws);
    }
    let y_s = &mut sc.partial[..k];
    leave_one_out_into(&sc.z, y_s);
    let y = if k == 1 { sc.z[0] } else { y_s[k - 1] * sc.z[k - 1] };
    let e = d - y;
    let me = mu * e;

    let mut shared_ready = false;
    for s in 0..k {
        // With K = 1 the partial product is the constant 1 and both branches agree.
        if k == 1 || y_s[s].value().abs() > max {
            if !shared_ready {
                for (v, &x) in sc.shared.iter_mut().zip(u) {
                    *v = me * x;
                }
                shared_ready = true;
            }
            for (wi, &v) in w[s].iter_mut().zip(&sc.shared) {
                *wi = *wi + v;
            }
        } else {
            let c = me * y_s[s];
            for (wi, &x) in w[s].iter_mut().zip(u) {
                *wi = *wi + c * x;
            }
        }
    }
    (y, e)
}

/// Stabilized TRUE-LMS step over the `len` newest samples.
///
/// `samples` holds the input history newest first, so the regressor of
/// sample `i - l` is `samples[l..l + M]`; `desired[l]` is `d(i - l)`.
fn true_lms_kernel<S: Real>(
    w: &mut [Vec<S>],
    samples: &[S],
    desired: &[S],
    len: usize,
    mu_eff: S,
    max: f64,
    sc: &mut Scratch<S>,
) -> S {
    let k = w.len();
    let m = w[0].len();
    let mut newest = S::lift(0.0);
    for l in 0..len {
        let u = &samples[l..l + m];
        for (z, ws) in sc.z.iter_mut().zip(w.iter()) {
            *z = dot(u, ws);
        }
        let part = &mut sc.partial[l * k..(l + 1) * k];
        leave_one_out_into(&sc.z, part);
        let y = if k == 1 { sc.z[0] } else { part[k - 1] * sc.z[k - 1] };
        if l == 0 {
            newest = y;
        }
        sc.errors[l] = desired[l] - y;
    }

    let mut shared_ready = false;
    for s in 0..k {
        let plain = k == 1 || sc.partial[s].value().abs() > max;
        if plain {
            if !shared_ready {
                // U_iᵀ e_i
                for l in 0..len {
                    let u = &samples[l..l + m];
                    let e = sc.errors[l];
                    for (v, &x) in sc.shared.iter_mut().zip(u) {
                        *v = if l == 0 { e * x } else { *v + e * x };
                    }
                }
                shared_ready = true;
            }
            for (wi, &g) in w[s].iter_mut().zip(&sc.shared) {
                *wi = *wi + mu_eff * g;
            }
        } else {
            // (y_{s,i} ∘ U_i)ᵀ e_i: T row first, then the error weight.
            for l in 0..len {
                let u = &samples[l..l + m];
                let ys = sc.partial[l * k + s];
                let e = sc.errors[l];
                for (a, &x) in sc.acc.iter_mut().zip(u) {
                    let t = ys * x;
                    *a = if l == 0 { e * t } else { *a + e * t };
                }
            }
            for (wi, &g) in w[s].iter_mut().zip(&sc.acc) {
                *wi = *wi + mu_eff * g;
            }
        }
    }
    newest
}

/// Adaptive filter on the decomposable model: SML-LMS for `L = 1`,
/// SML-TRUE-LMS otherwise, both with the MAX stabilization rule.
#[derive(Debug, Clone)]
pub struct SmlFilter {
    factors: Vec<Vec<f64>>,
    mu: f64,
    max_threshold: f64,
    window: usize,
    /// Input history of length `M + L - 1`, newest first.
    line: DelayLine,
    /// `d(i), d(i-1), ...` (length `L`).
    desired: Vec<f64>,
    elapsed: usize,
    diverged: bool,
    scratch: Scratch<f64>,
}

impl SmlFilter {
    /// An LMS filter (`L = 1`) with no stabilization (`MAX = ∞`).
    pub fn new(init: RankOneKernel, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::invalid(format!("step size {mu} must be positive")));
        }
        let (k, m) = (init.order(), init.memory());
        Ok(Self {
            factors: init.into_factors(),
            mu,
            max_threshold: f64::INFINITY,
            window: 1,
            line: DelayLine::new(m)?,
            desired: vec![0.0],
            elapsed: 0,
            diverged: false,
            scratch: Scratch::new(k, m, 1),
        })
    }

    pub fn with_max_threshold(mut self, max: f64) -> Result<Self> {
        if !(max >= 0.0) {
            return Err(Error::invalid(format!("MAX threshold {max} must be >= 0")));
        }
        self.max_threshold = max;
        Ok(self)
    }

    /// Use a rectangular data window of `window` samples (TRUE-LMS).
    /// Resets the input history.
    pub fn with_window(mut self, window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::invalid("window length must be >= 1"));
        }
        let (k, m) = (self.order(), self.memory());
        self.window = window;
        self.line = DelayLine::new(m + window - 1)?;
        self.desired = vec![0.0; window];
        self.elapsed = 0;
        self.scratch = Scratch::new(k, m, window);
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn memory(&self) -> usize {
        self.factors[0].len()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn max_threshold(&self) -> f64 {
        self.max_threshold
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    pub fn kernel(&self) -> RankOneKernel {
        RankOneKernel::new(self.factors.clone()).expect("filter factors keep their shape")
    }

    /// Regressor `u_i` of the newest sample.
    pub fn regressor(&self) -> &[f64] {
        &self.line.regressor()[..self.memory()]
    }

    /// Samples in the current data window, `min(elapsed, L)`.
    pub fn history_len(&self) -> usize {
        self.elapsed.min(self.window)
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged
    }

    /// Shift an input sample into the delay line without adapting. The data
    /// window only counts samples passed to a step.
    pub fn prime(&mut self, u_new: f64) {
        self.line.push(u_new);
    }

    fn push(&mut self, u_new: f64, d_new: f64) {
        self.line.push(u_new);
        self.desired.rotate_right(1);
        self.desired[0] = d_new;
        self.elapsed += 1;
    }

    fn check_divergence(&mut self, output: f64) {
        if !output.is_finite()
            || self
                .factors
                .iter()
                .flatten()
                .any(|x| !x.is_finite() || x.abs() > DIVERGENCE_LIMIT)
        {
            self.diverged = true;
        }
    }

    /// One SML-LMS step. Requires `L = 1`.
    pub fn lms_step(&mut self, u_new: f64, d_new: f64) -> Result<StepOutput> {
        if self.window != 1 {
            return Err(Error::invalid(format!(
                "LMS step needs window 1, filter has {}",
                self.window
            )));
        }
        Ok(self.lms_step_unchecked(u_new, d_new))
    }

    fn lms_step_unchecked(&mut self, u_new: f64, d_new: f64) -> StepOutput {
        self.push(u_new, d_new);
        if self.diverged {
            let u = self.line.regressor();
            let y = self.factors.iter().map(|w| crate::tensor::dot(u, w)).product::<f64>();
            return StepOutput {
                output: y,
                error: d_new - y,
            };
        }
        let (y, e) = lms_kernel(
            &mut self.factors,
            self.line.regressor(),
            d_new,
            self.mu,
            self.max_threshold,
            &mut self.scratch,
        );
        self.check_divergence(y);
        StepOutput { output: y, error: e }
    }

    /// One SML-TRUE-LMS step over the last `min(elapsed, L)` samples, with
    /// step `μ / window_len`.
    pub fn true_lms_step(&mut self, u_new: f64, d_new: f64) -> WindowOutput {
        self.push(u_new, d_new);
        let len = self.history_len();
        if self.diverged {
            return WindowOutput {
                output: f64::NAN,
                errors: vec![f64::NAN; len],
            };
        }
        let y = true_lms_kernel(
            &mut self.factors,
            self.line.regressor(),
            &self.desired,
            len,
            self.mu / len as f64,
            self.max_threshold,
            &mut self.scratch,
        );
        self.check_divergence(y);
        WindowOutput {
            output: y,
            errors: self.scratch.errors[..len].to_vec(),
        }
    }

    /// LMS for `L = 1`, TRUE-LMS otherwise; the error reported is `e(i)`.
    pub fn step(&mut self, u_new: f64, d_new: f64) -> StepOutput {
        if self.window == 1 {
            self.lms_step_unchecked(u_new, d_new)
        } else {
            self.push(u_new, d_new);
            let len = self.history_len();
            if self.diverged {
                return StepOutput {
                    output: f64::NAN,
                    error: f64::NAN,
                };
            }
            let y = true_lms_kernel(
                &mut self.factors,
                self.line.regressor(),
                &self.desired,
                len,
                self.mu / len as f64,
                self.max_threshold,
                &mut self.scratch,
            );
            self.check_divergence(y);
            StepOutput {
                output: y,
                error: self.scratch.errors[0],
            }
        }
    }

    /// Floating-point operations the next [`step`](Self::step) on
    /// `(u_new, d_new)` performs. The filter itself is left untouched.
    pub fn count_step_ops(&self, u_new: f64, d_new: f64) -> OpCount {
        let mut probe = self.clone();
        probe.push(u_new, d_new);
        let len = probe.history_len();
        let (k, m) = (self.order(), self.memory());
        let lift = |v: &[f64]| v.iter().map(|&x| Counted(x)).collect::<Vec<_>>();
        let mut w: Vec<Vec<Counted>> = probe.factors.iter().map(|f| lift(f)).collect();
        let samples = lift(probe.line.regressor());
        let desired = lift(&probe.desired);
        let mut sc = Scratch::new(k, m, self.window);
        let mu = self.mu;
        let max = self.max_threshold;
        let ((), ops) = Counted::measure(|| {
            if self.window == 1 {
                lms_kernel(&mut w, &samples[..m], desired[0], Counted(mu), max, &mut sc);
            } else {
                true_lms_kernel(&mut w, &samples, &desired, len, Counted(mu / len as f64), max, &mut sc);
            }
        });
        ops
    }
}
