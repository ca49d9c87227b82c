//! Scalar abstraction for the update kernels, plus an instrumented scalar
//! that tallies floating-point additions and multiplications.

use std::cell::Cell;
use std::ops::{Add, Mul, Sub};

pub trait Real: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    /// Conversion into the kernel's arithmetic. Not counted as an operation.
    fn lift(x: f64) -> Self;
    fn value(self) -> f64;
}

impl Real for f64 {
    #[inline]
    fn lift(x: f64) -> Self {
        x
    }

    #[inline]
    fn value(self) -> f64 {
        self
    }
}

/// Additions/subtractions and multiplications performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    pub adds: u64,
    pub mults: u64,
}

thread_local! {
    static ADDS: Cell<u64> = const { Cell::new(0) };
    static MULTS: Cell<u64> = const { Cell::new(0) };
}

/// An `f64` that counts every `+`, `-` and `*` it takes part in, per thread.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Counted(pub f64);

impl Counted {
    pub fn reset() {
        ADDS.with(|c| c.set(0));
        MULTS.with(|c| c.set(0));
    }

    pub fn snapshot() -> OpCount {
        OpCount {
            adds: ADDS.with(Cell::get),
            mults: MULTS.with(Cell::get),
        }
    }

    /// Run `f` with fresh counters and return what it performed.
    pub fn measure<T>(f: impl FnOnce() -> T) -> (T, OpCount) {
        Self::reset();
        let out = f();
        (out, Self::snapshot())
    }
}

impl Add for Counted {
    type Output = Counted;
    fn add(self, rhs: Self) -> Self {
        ADDS.with(|c| c.set(c.get() + 1));
        Counted(self.0 + rhs.0)
    }
}

impl Sub for Counted {
    type Output = Counted;
    fn sub(self, rhs: Self) -> Self {
        ADDS.with(|c| c.set(c.get() + 1));
        Counted(self.0 - rhs.0)
    }
}

impl Mul for Counted {
    type Output = Counted;
    fn mul(self, rhs: Self) -> Self {
        MULTS.with(|c| c.set(c.get() + 1));
        Counted(self.0 * rhs.0)
    }
}

impl Real for Counted {
    fn lift(x: f64) -> Self {
        Counted(x)
    }

    fn value(self) -> f64 {
        self.0
    }
}

/// `Σ a_m b_m` with `len - 1` additions.
#[inline]
pub(crate) fn dot<S: Real>(a: &[S], b: &[S]) -> S {
    let mut acc = a[0] * b[0];
    for (&x, &y) in a[1..].iter().zip(&b[1..]) {
        acc = acc + x * y;
    }
    acc
}

/// Entry `s` is the product of every `z_t` except `z_s`; `K - 2` multiplies
/// per entry for `K >= 2`, and the constant 1 for `K = 1`.
#[inline]
pub(crate) fn leave_one_out_into<S: Real>(z: &[S], out: &mut [S]) {
    let k = z.len();
    if k == 1 {
        out[0] = S::lift(1.0);
        return;
    }
    for s in 0..k {
        let mut it = (0..k).filter(|&t| t != s);
        let mut p = z[it.next().expect("k >= 2")];
        for t in it {
            p = p * z[t];
        }
        out[s] = p;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_each_operation() {
        let (v, ops) = Counted::measure(|| {
            let a = Counted(2.0);
            let b = Counted(3.0);
            (a * b + a - b) * a
        });
        assert_eq!(v.0, 10.0);
        assert_eq!(ops, OpCount { adds: 2, mults: 2 });
    }

    #[test]
    fn dot_counts() {
        let a: Vec<Counted> = [1.0, 2.0, 3.0].map(Counted).to_vec();
        let (v, ops) = Counted::measure(|| dot(&a, &a));
        assert_eq!(v.0, 14.0);
        assert_eq!(ops, OpCount { adds: 2, mults: 3 });
    }

    #[test]
    fn leave_one_out_counts() {
        let z: Vec<Counted> = [2.0, 3.0, 5.0, 7.0].map(Counted).to_vec();
        let mut out = vec![Counted(0.0); 4];
        let (_, ops) = Counted::measure(|| leave_one_out_into(&z, &mut out));
        assert_eq!(out.iter().map(|c| c.0).collect::<Vec<_>>(), vec![105.0, 70.0, 42.0, 30.0]);
        assert_eq!(ops.mults, 4 * 2);
    }
}
