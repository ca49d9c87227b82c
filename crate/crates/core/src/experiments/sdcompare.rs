use super::config::{FilterSpec, ScenarioConfig};
use super::ensemble::{db, filter_setups, EnsembleCurve, Scenario};
use super::plants::build_plant;
use crate::error::{Error, Result};
use crate::estimation::{default_init, gaussian_correlations, steepest_descent, Plant};

#[derive(Debug, Clone)]
pub struct SdComparison {
    pub mu: f64,
    pub noise_var: f64,
    /// Exact MSE of the steepest-descent iterates `W_0, W_1, ...`.
    pub sd_mse: Vec<f64>,
    /// Ensemble curves of the roster on the same step size.
    pub adaptive: Vec<EnsembleCurve>,
}

impl SdComparison {
    /// Largest per-iteration `|dB(sd) − dB(σ_v² + mean EMSE)|` for roster
    /// entry `j`. Both sides are the MSE `E[e² | W]` of an iterate, so the
    /// ensemble side carries no noise from the error samples themselves.
    pub fn max_gap_db(&self, j: usize) -> f64 {
        let conditional = self.adaptive[j].mean_emse.iter().map(|x| x + self.noise_var);
        max_gap(&self.sd_mse, conditional)
    }

    /// Same gap against the raw ensemble mean of `e²`. Heavy tailed at small
    /// step sizes; kept for reporting.
    pub fn max_raw_gap_db(&self, j: usize) -> f64 {
        max_gap(&self.sd_mse, self.adaptive[j].mean_mse.iter().copied())
    }

    /// The steepest-descent trajectory as a curve named `steepest-descent`,
    /// followed by the adaptive ones.
    pub fn curves(&self) -> Vec<EnsembleCurve> {
        let sd = EnsembleCurve {
            filter: "steepest-descent".into(),
            mean_emse: self.sd_mse.iter().map(|m| m - self.noise_var).collect(),
            mean_mse: self.sd_mse.clone(),
            averaged: 1,
            diverged: 0,
        };
        std::iter::once(sd).chain(self.adaptive.iter().cloned()).collect()
    }
}

fn max_gap(sd: &[f64], other: impl Iterator<Item = f64>) -> f64 {
    sd.iter()
        .zip(other)
        .map(|(a, b)| (db(*a) - db(b)).abs())
        .fold(0.0, f64::max)
}

/// Exact steepest descent against the ensemble of the roster's adaptive
/// filters, all on the step size of the first SML roster entry and the
/// default initialization.
pub fn run_sd_comparison(cfg: &ScenarioConfig) -> Result<SdComparison> {
    cfg.validate()?;
    let plant = build_plant(cfg, &cfg.plant)?;
    if !matches!(plant, Plant::RankOne(_)) {
        return Err(Error::invalid("steepest-descent comparison needs a decomposable plant"));
    }
    let mut setups = filter_setups(cfg, &plant)?;
    let lead = setups
        .iter()
        .find(|s| matches!(s.spec, FilterSpec::SmlLms | FilterSpec::SmlTrueLms { .. }))
        .ok_or_else(|| Error::invalid("roster needs an SML filter"))?
        .mu;
    for s in &mut setups {
        s.mu = lead;
    }
    let c = gaussian_correlations(&plant, cfg.noise_var)?;
    let trace = steepest_descent(
        &c,
        lead,
        cfg.iterations.saturating_sub(1).max(1),
        &default_init(cfg.order, cfg.memory)?,
    )?;
    let mut sd_mse = trace.mse;
    sd_mse.truncate(cfg.iterations);
    let scenario = Scenario::new(cfg, plant, setups, true)?;
    let adaptive = scenario.ensemble(cfg.realizations)?;
    Ok(SdComparison {
        mu: lead,
        noise_var: cfg.noise_var,
        sd_mse,
        adaptive,
    })
}
