//! Scalar second-order model `d(i) = 100 u(i)²` with `u ≡ 1`, adapted by
//! unstabilized SML-LMS from the default initialization `(1, 0)`.

use std::fmt::Write as _;
use std::path::Path;

use super::config::ScenarioConfig;
use crate::adaptive::SmlFilter;
use crate::error::{Error, Result};
use crate::estimation::default_init;

pub const CHAOS_GAIN: f64 = 100.0;
/// Tolerance for the fixed-point certificate.
pub const FIXED_POINT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `μ = 0`: nothing moves.
    Frozen,
    Converged,
    /// Bounded but not settled: periodic or chaotic.
    Bounded,
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosCell {
    pub mu: f64,
    pub regime: Regime,
    /// Recorded `w_1` values after the transient (empty when diverged).
    pub samples: Vec<f64>,
    /// `w_1 w_2` at the last recorded iterate.
    pub final_product: f64,
    /// `e` of the last recorded step.
    pub final_error: f64,
}

impl ChaosCell {
    pub fn sign_changes(&self) -> usize {
        self.samples.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
    }
}

/// `(w_1, w_2, e)` per step.
pub type TrajectoryPoint = (f64, f64, f64);

/// Iterate `steps` steps at step size `mu`. Stops early on divergence; the
/// returned flag tells whether it did.
pub fn chaos_trajectory(mu: f64, steps: usize) -> Result<(Vec<TrajectoryPoint>, bool)> {
    let init = default_init(2, 1)?;
    if mu == 0.0 {
        let w = init.factors();
        let p = (w[0][0], w[1][0], CHAOS_GAIN - w[0][0] * w[1][0]);
        return Ok((vec![p; steps], false));
    }
    let mut f = SmlFilter::new(init, mu)?;
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let e = f.step(1.0, CHAOS_GAIN).error;
        if f.is_diverged() {
            return Ok((out, true));
        }
        out.push((f.factors()[0][0], f.factors()[1][0], e));
    }
    Ok((out, false))
}

pub fn classify(mu: f64, transient: usize, record: usize) -> Result<ChaosCell> {
    let (traj, diverged) = chaos_trajectory(mu, transient + record)?;
    if diverged {
        return Ok(ChaosCell {
            mu,
            regime: Regime::Diverged,
            samples: Vec::new(),
            final_product: f64::NAN,
            final_error: f64::NAN,
        });
    }
    let tail = &traj[transient..];
    let samples: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let &(w1, w2, e) = tail.last().expect("record >= 1");
    let settled = samples.iter().all(|s| (s - w1).abs() < FIXED_POINT_TOL);
    let regime = if mu == 0.0 {
        Regime::Frozen
    } else if settled && e.abs() < FIXED_POINT_TOL {
        Regime::Converged
    } else {
        Regime::Bounded
    };
    Ok(ChaosCell {
        mu,
        regime,
        samples,
        final_product: w1 * w2,
        final_error: e,
    })
}

#[derive(Debug, Clone)]
pub struct ChaosSweep {
    pub cells: Vec<ChaosCell>,
    /// Full trajectories for the configured dump step sizes.
    pub dumps: Vec<(f64, Vec<TrajectoryPoint>)>,
}

impl ChaosSweep {
    pub fn cell(&self, mu: f64) -> Option<&ChaosCell> {
        self.cells.iter().find(|c| (c.mu - mu).abs() < 1e-12)
    }

    /// `mu,sample_index,w1`; a diverged cell contributes one `NaN` row.
    pub fn bifurcation_csv_string(&self) -> String {
        let mut s = String::from("mu,sample_index,w1\n");
        for c in &self.cells {
            if c.regime == Regime::Diverged {
                let _ = writeln!(s, "{},0,NaN", c.mu);
            }
            for (i, w) in c.samples.iter().enumerate() {
                let _ = writeln!(s, "{},{},{}", c.mu, i, w);
            }
        }
        s
    }

    pub fn write_bifurcation_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.bifurcation_csv_string())?;
        Ok(())
    }
}

/// `iteration,w1,w2,e`.
pub fn trajectory_csv_string(traj: &[TrajectoryPoint]) -> String {
    let mut s = String::from("iteration,w1,w2,e\n");
    for (i, (w1, w2, e)) in traj.iter().enumerate() {
        let _ = writeln!(s, "{},{},{},{}", i + 1, w1, w2, e);
    }
    s
}

/// Classify every step size of `mu_grid`. `K = 2`, `M = 1`, no stabilization.
pub fn run_chaos_sweep(cfg: &ScenarioConfig) -> Result<ChaosSweep> {
    cfg.validate()?;
    if cfg.order != 2 || cfg.memory != 1 || cfg.stabilize {
        return Err(Error::invalid(
            "the chaos sweep needs order = 2, memory = 1, stabilize = false",
        ));
    }
    let cells = cfg
        .mu_grid
        .iter()
        .map(|&mu| classify(mu, cfg.transient, cfg.record))
        .collect::<Result<_>>()?;
    let dumps = cfg
        .dump_mu
        .iter()
        .map(|&mu| Ok((mu, chaos_trajectory(mu, cfg.transient + cfg.record)?.0)))
        .collect::<Result<_>>()?;
    Ok(ChaosSweep { cells, dumps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_steps_by_hand() {
        // e = 100 at (1, 0): w2 += μ·100·1.
        let (t, _) = chaos_trajectory(0.01, 2).unwrap();
        assert_eq!(t[0], (1.0, 1.0, 100.0));
        // e = 99 at (1, 1): both move by 0.99.
        assert!((t[1].0 - 1.99).abs() < 1e-12 && (t[1].1 - 1.99).abs() < 1e-12);
        assert_eq!(t[1].2, 99.0);
    }

    #[test]
    fn regimes() {
        assert_eq!(classify(0.0, 10, 5).unwrap().regime, Regime::Frozen);
        let c = classify(0.005, 10_000, 100).unwrap();
        assert_eq!(c.regime, Regime::Converged);
        assert!((c.final_product - 100.0).abs() < 1e-6);
        let b = classify(0.016, 10_000, 1000).unwrap();
        assert_eq!(b.regime, Regime::Bounded);
        assert!(b.sign_changes() > 0);
        assert_eq!(classify(0.03, 10_000, 1000).unwrap().regime, Regime::Diverged);
    }
}
