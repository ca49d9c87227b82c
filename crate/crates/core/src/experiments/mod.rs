//! Seeded ensemble simulations.
//!
//! Realization `r` draws its input and noise from its own counter-based
//! streams of the master seed, so any realization replays alone. Work is
//! split into fixed-size chunks that run in parallel and are folded in
//! index order, which makes every CSV byte-identical for any thread count.

mod chaos;
pub mod config;
mod ensemble;
pub mod plants;
mod rho;
mod sdcompare;
pub mod seeds;
mod stability;

use std::path::{Path, PathBuf};

pub use chaos::{
    chaos_trajectory, classify, run_chaos_sweep, trajectory_csv_string, ChaosCell, ChaosSweep,
    Regime, TrajectoryPoint, CHAOS_GAIN, FIXED_POINT_TOL,
};
pub use config::{EmseMode, ExperimentKind, FilterSpec, PlantSpec, ScenarioConfig, StepSpec};
pub use ensemble::{
    baseline_step_bound, bound_factors, curves_csv_string, db, filter_setups,
    realization_trace, run_identification, sml_step_bound, steady_state, trace_csv_string,
    write_curves_csv, write_trace_csv, EmseEvaluator, EnsembleCurve, FilterSetup,
    IdentificationRun, TraceRow,
};
pub use rho::{rho_summary_csv_string, run_rho_sweep, write_rho_summary_csv, RhoPoint};
pub use sdcompare::{run_sd_comparison, SdComparison};
pub use stability::{run_stability_table, StabilityCell, StabilityTable};

use crate::error::Result;

/// Run the experiment `cfg.kind` and write its CSVs under `out`. Returns the
/// files written and any warnings.
pub fn run_to_dir(cfg: &ScenarioConfig, out: &Path) -> Result<(Vec<PathBuf>, Vec<String>)> {
    std::fs::create_dir_all(out)?;
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    let mut write = |name: &str, body: String| -> Result<()> {
        let p = out.join(name);
        std::fs::write(&p, body)?;
        files.push(p);
        Ok(())
    };
    match cfg.kind {
        ExperimentKind::Identification => {
            let run = run_identification(cfg)?;
            write("curves.csv", curves_csv_string(&run.curves))?;
            if let Some(r) = cfg.trace_realization {
                for j in 0..cfg.filters.len() {
                    let rows = realization_trace(cfg, &run.plant, j, r as u64)?;
                    write(
                        &format!("trace_{}_r{r}.csv", sanitize(&run.setups[j].name())),
                        trace_csv_string(&rows),
                    )?;
                }
            }
            warnings = run.warnings;
        }
        ExperimentKind::StabilityTable => {
            write("stability.csv", run_stability_table(cfg)?.to_csv_string())?;
        }
        ExperimentKind::SdComparison => {
            let cmp = run_sd_comparison(cfg)?;
            write("curves.csv", curves_csv_string(&cmp.curves()))?;
        }
        ExperimentKind::RhoSweep => {
            let points = run_rho_sweep(cfg)?;
            let curves: Vec<EnsembleCurve> =
                points.iter().flat_map(|p| p.curves.iter().cloned()).collect();
            write("curves.csv", curves_csv_string(&curves))?;
            write("rho_summary.csv", rho_summary_csv_string(&points))?;
        }
        ExperimentKind::ChaosSweep => {
            let sweep = run_chaos_sweep(cfg)?;
            write("bifurcation.csv", sweep.bifurcation_csv_string())?;
            for (mu, traj) in &sweep.dumps {
                write(&format!("trajectory_mu_{mu}.csv"), trajectory_csv_string(traj))?;
            }
        }
    }
    Ok((files, warnings))
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}
