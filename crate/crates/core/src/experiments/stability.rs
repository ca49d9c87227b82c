use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::config::{ScenarioConfig, StepSpec};
use super::ensemble::{filter_setups, Scenario};
use super::plants::build_plant;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCell {
    pub filter: String,
    pub mu_multiplier: f64,
    pub mu: f64,
    pub divergences: usize,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityTable {
    pub cells: Vec<StabilityCell>,
}

impl StabilityTable {
    pub fn divergences(&self, filter: &str, mu_multiplier: f64) -> Option<usize> {
        self.cells
            .iter()
            .find(|c| c.filter == filter && c.mu_multiplier == mu_multiplier)
            .map(|c| c.divergences)
    }

    /// `filter,mu_multiplier,divergences,realizations`.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("filter,mu_multiplier,divergences,realizations\n");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                c.filter, c.mu_multiplier, c.divergences, c.realizations
            );
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// Count diverged realizations for every (filter, step multiplier) cell.
/// Each `mu_grid` entry multiplies the filter's bound; all cells share the
/// same input and noise realizations.
pub fn run_stability_table(cfg: &ScenarioConfig) -> Result<StabilityTable> {
    cfg.validate()?;
    if cfg.mu_grid.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::invalid("stability multipliers must be positive"));
    }
    let plant = build_plant(cfg, &cfg.plant)?;
    let unit = ScenarioConfig {
        step: StepSpec::Relative(1.0),
        ..cfg.clone()
    };
    let base = filter_setups(&unit, &plant)?;
    let mut cells = Vec::new();
    for &mult in &cfg.mu_grid {
        let setups = base
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.mu = match cfg.step {
                    StepSpec::Absolute(mu) => mult * mu,
                    StepSpec::Relative(_) => mult * s.bound,
                };
                s
            })
            .collect::<Vec<_>>();
        let scenario = Scenario::new(cfg, plant.clone(), setups, false)?;
        let counts = (0..cfg.realizations)
            .into_par_iter()
            .map(|r| scenario.run(r as u64, |_, _, _, _| {}))
            .try_fold(
                || vec![0usize; base.len()],
                |mut acc, flags| {
                    for (a, f) in acc.iter_mut().zip(flags?) {
                        *a += f as usize;
                    }
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(
                || vec![0usize; base.len()],
                |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
            )?;
        for (s, d) in scenario.setups.iter().zip(counts) {
            cells.push(StabilityCell {
                filter: s.name(),
                mu_multiplier: mult,
                mu: s.mu,
                divergences: d,
                realizations: cfg.realizations,
            });
        }
    }
    Ok(StabilityTable { cells })
}
