use std::fmt::Write as _;
use std::path::Path;

use super::config::ScenarioConfig;
use super::ensemble::{db, filter_setups, identify_with, EnsembleCurve};
use super::plants::{gaussian_rho_plant, rank_one_emse_lower_bound, singular_values};
use crate::error::{Error, Result};
use crate::estimation::Plant;

#[derive(Debug, Clone)]
pub struct RhoPoint {
    pub rho: f64,
    /// `Σ_{r≥2} σ_r²` of the normalized kernel.
    pub residual_energy: f64,
    /// `σ_v²` plus [`rank_one_emse_lower_bound`]: no rank-one filter does
    /// better than this.
    pub mse_lower_bound: f64,
    pub sigma_ratio: f64,
    pub noise_var: f64,
    /// One curve per roster filter, named `<filter>@rho=<ρ>`.
    pub curves: Vec<EnsembleCurve>,
}

impl RhoPoint {
    /// Steady-state mean of `e²` for the first roster filter.
    pub fn steady_state_mse(&self) -> f64 {
        self.curves[0].steady_state_mse()
    }

    /// Steady-state `σ_v² + mean EMSE` for the first roster filter.
    pub fn steady_state_conditional_mse(&self) -> f64 {
        self.noise_var + self.curves[0].steady_state_emse()
    }
}

/// One identification run per `ρ` on the Gaussian-ρ plant family. Every
/// filter keeps the step size it gets on the decomposable `ρ = 0` member, so
/// the floors differ only through the plant.
pub fn run_rho_sweep(cfg: &ScenarioConfig) -> Result<Vec<RhoPoint>> {
    cfg.validate()?;
    if cfg.order != 2 {
        return Err(Error::invalid("the rho sweep is second order"));
    }
    let base = gaussian_rho_plant(cfg.memory, 0.0, cfg.width, cfg.plant_centered)?;
    let shared = filter_setups(cfg, &Plant::Dense(base))?;
    cfg.rho_grid
        .iter()
        .map(|&rho| {
            let h = gaussian_rho_plant(cfg.memory, rho, cfg.width, cfg.plant_centered)?;
            let s = singular_values(&h)?;
            let residual_energy = s.iter().skip(1).map(|x| x * x).sum();
            let mse_lower_bound = cfg.noise_var + rank_one_emse_lower_bound(&h)?;
            let sigma_ratio = s.get(1).copied().unwrap_or(0.0) / s[0];
            let mut setups = filter_setups(cfg, &Plant::Dense(h.clone()))?;
            for (s, b) in setups.iter_mut().zip(&shared) {
                s.mu = b.mu;
            }
            let mut run = identify_with(cfg, Plant::Dense(h), setups)?;
            for c in &mut run.curves {
                c.filter = format!("{}@rho={rho}", c.filter);
            }
            Ok(RhoPoint {
                rho,
                residual_energy,
                mse_lower_bound,
                sigma_ratio,
                noise_var: cfg.noise_var,
                curves: run.curves,
            })
        })
        .collect()
}

/// `rho,steady_state_mse_db,steady_state_conditional_mse_db,residual_energy,mse_lower_bound,sigma2_over_sigma1`.
pub fn rho_summary_csv_string(points: &[RhoPoint]) -> String {
    let mut s = String::from("rho,steady_state_mse_db,steady_state_conditional_mse_db,residual_energy,mse_lower_bound,sigma2_over_sigma1\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            p.rho,
            db(p.steady_state_mse()),
            db(p.steady_state_conditional_mse()),
            p.residual_energy,
            p.mse_lower_bound,
            p.sigma_ratio
        );
    }
    s
}

pub fn write_rho_summary_csv(path: impl AsRef<Path>, points: &[RhoPoint]) -> Result<()> {
    std::fs::write(path, rho_summary_csv_string(points))?;
    Ok(())
}
