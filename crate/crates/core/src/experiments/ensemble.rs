use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::config::{EmseMode, FilterSpec, ScenarioConfig, StepSpec};
use super::plants::best_rank_one;
use super::seeds::{stream_rng, Stream};
use crate::adaptive::{
    max_threshold, step_bound, true_lms_max_threshold, BaselineVariant, LinearInParamsFilter,
    SmlFilter, StepOutput,
};
use crate::error::{Error, Result};
use crate::estimation::{default_init, input_correlation, Plant, SparseCorrelation, CORRELATION_CAP};
use crate::tensor::{dot, materialize, RankOneKernel};
use crate::volterra::DelayLine;

/// Realizations per work unit. Fixed so the reduction order never depends on
/// the thread count.
const CHUNK: usize = 32;
/// Work units in flight between sequential folds.
const WAVE: usize = 16;

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Mean of the final 10% of `v` (at least one entry).
pub fn steady_state(v: &[f64]) -> f64 {
    let n = (v.len() / 10).max(1).min(v.len());
    v[v.len() - n..].iter().sum::<f64>() / n as f64
}

/// Per-iteration ensemble means over the realizations that never diverged.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleCurve {
    pub filter: String,
    pub mean_emse: Vec<f64>,
    /// Mean of `e(i)²`.
    pub mean_mse: Vec<f64>,
    pub averaged: usize,
    pub diverged: usize,
}

impl EnsembleCurve {
    pub fn len(&self) -> usize {
        self.mean_mse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean_mse.is_empty()
    }

    pub fn realizations(&self) -> usize {
        self.averaged + self.diverged
    }

    pub fn steady_state_mse(&self) -> f64 {
        steady_state(&self.mean_mse)
    }

    pub fn steady_state_emse(&self) -> f64 {
        steady_state(&self.mean_emse)
    }
}

/// One roster entry with its resolved step size and MAX threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSetup {
    pub spec: FilterSpec,
    pub mu: f64,
    /// The bound `mu` was derived from (`mu0` for SML filters,
    /// `2 / (3 E‖φ‖²)` for the baselines).
    pub bound: f64,
    pub max_threshold: f64,
}

impl FilterSetup {
    pub fn name(&self) -> String {
        self.spec.name()
    }
}

/// Factors `mu0` is evaluated at: the plant itself, or the leading singular
/// pair of a second-order dense plant.
pub fn bound_factors(plant: &Plant) -> Result<RankOneKernel> {
    match plant {
        Plant::RankOne(k) => Ok(k.clone()),
        Plant::Dense(h) if h.order() == 2 => best_rank_one(h),
        Plant::Dense(h) => Err(Error::UndefinedBound(format!(
            "no rank-one reference for a dense order-{} plant; set an absolute mu",
            h.order()
        ))),
    }
}

/// `mu0` of the scenario plant.
pub fn sml_step_bound(cfg: &ScenarioConfig, plant: &Plant) -> Result<f64> {
    let seed = stream_rng(cfg.seed, Stream::Bound, 0).random();
    step_bound(&bound_factors(plant)?, cfg.bound_samples, seed)
}

/// `2 / (3 E‖φ‖²)` for a linear-in-the-parameters baseline.
pub fn baseline_step_bound(variant: BaselineVariant, memory: usize) -> f64 {
    2.0 / (3.0 * variant.regressor_power(memory))
}

fn variant_of(spec: FilterSpec, order: usize) -> Option<BaselineVariant> {
    match spec {
        FilterSpec::VolterraLms => Some(BaselineVariant::Volterra { order }),
        FilterSpec::PfLms => Some(BaselineVariant::PowerFilter),
        FilterSpec::SvLms { diagonals } => Some(BaselineVariant::SimplifiedVolterra { diagonals }),
        _ => None,
    }
}

/// Resolve step sizes and thresholds for the roster, scaling every bound by
/// `factor` when the step is relative.
pub fn filter_setups(cfg: &ScenarioConfig, plant: &Plant) -> Result<Vec<FilterSetup>> {
    let relative = matches!(cfg.step, StepSpec::Relative(_));
    let mu0 = if relative && cfg.filters.iter().any(FilterSpec::is_sml) {
        sml_step_bound(cfg, plant)?
    } else {
        f64::NAN
    };
    let power = plant.output_power()?;
    cfg.filters
        .iter()
        .map(|&spec| {
            let bound = match variant_of(spec, cfg.order) {
                None => mu0,
                Some(v) => {
                    if v.order() != cfg.order {
                        return Err(Error::invalid(format!(
                            "{} is second order, scenario has K={}",
                            spec.name(),
                            cfg.order
                        )));
                    }
                    baseline_step_bound(v, cfg.memory)
                }
            };
            let mu = match cfg.step {
                StepSpec::Absolute(mu) => mu,
                StepSpec::Relative(f) => f * bound,
            };
            let max_threshold = match (cfg.stabilize, spec) {
                (false, _) => f64::INFINITY,
                (true, FilterSpec::SmlLms) => max_threshold(cfg.order, power)?,
                (true, FilterSpec::SmlTrueLms { window }) if cfg.halve_true_lms_max => {
                    true_lms_max_threshold(cfg.order, power, window)?
                }
                (true, FilterSpec::SmlTrueLms { .. }) => max_threshold(cfg.order, power)?,
                (true, _) => f64::INFINITY,
            };
            Ok(FilterSetup {
                spec,
                mu,
                bound,
                max_threshold,
            })
        })
        .collect()
}

/// Excess MSE `E[((W_o − W) u^{⊗K})²]` of a filter kernel against the plant.
#[derive(Debug, Clone)]
pub enum EmseEvaluator {
    /// Isserlis closed form for rank-one filters against a rank-one plant.
    RankOne { plant: RankOneKernel, power: f64 },
    /// `(h − x)ᵀ R (h − x)` with the sparse input correlation.
    Quadratic { r: SparseCorrelation, plant: Vec<f64> },
    /// Mean squared output difference over fixed i.i.d. probe regressors.
    Probe {
        memory: usize,
        regressors: Vec<f64>,
        targets: Vec<f64>,
    },
}

impl EmseEvaluator {
    pub fn rank_one(plant: &RankOneKernel) -> Self {
        let g = gram(plant.factors(), plant.factors());
        EmseEvaluator::RankOne {
            plant: plant.clone(),
            power: hafnian_doubled(&g, plant.order()),
        }
    }

    pub fn quadratic(plant: &Plant) -> Result<Self> {
        Ok(EmseEvaluator::Quadratic {
            r: input_correlation(plant.memory(), plant.order())?,
            plant: plant.to_dense()?.into_coefficients(),
        })
    }

    pub fn probe<R: Rng>(plant: &Plant, probes: usize, rng: &mut R) -> Result<Self> {
        let m = plant.memory();
        let regressors: Vec<f64> = (0..probes * m).map(|_| StandardNormal.sample(rng)).collect();
        let targets = regressors
            .chunks(m)
            .map(|u| plant.output(u))
            .collect::<Result<_>>()?;
        Ok(EmseEvaluator::Probe {
            memory: m,
            regressors,
            targets,
        })
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, EmseEvaluator::Probe { .. })
    }

    /// EMSE of a decomposable filter kernel.
    pub fn of_factors(&self, w: &[Vec<f64>]) -> f64 {
        match self {
            EmseEvaluator::RankOne { plant, power } => {
                let (cross, own) = rank_one_moments(plant.factors(), w);
                (power - 2.0 * cross + own).max(0.0)
            }
            EmseEvaluator::Quadratic { .. } => {
                let x = materialize(&RankOneKernel::new(w.to_vec()).expect("filter shape"))
                    .expect("under the correlation cap")
                    .into_coefficients();
                self.of_dense(&x)
            }
            EmseEvaluator::Probe {
                memory,
                regressors,
                targets,
            } => {
                let n = targets.len();
                regressors
                    .chunks(*memory)
                    .zip(targets)
                    .map(|(u, t)| {
                        let y: f64 = w.iter().map(|f| dot(u, f)).product();
                        (t - y).powi(2)
                    })
                    .sum::<f64>()
                    / n as f64
            }
        }
    }

    /// EMSE of a dense coefficient vector (row-major, `M^K` entries).
    pub fn of_dense(&self, x: &[f64]) -> f64 {
        match self {
            EmseEvaluator::RankOne { plant, .. } => {
                let h = materialize(plant).expect("rank-one evaluator built from a small plant");
                let r = input_correlation(plant.memory(), plant.order()).expect("small plant");
                let d: Vec<f64> = h.coefficients().iter().zip(x).map(|(a, b)| a - b).collect();
                r.quadratic(&d).max(0.0)
            }
            EmseEvaluator::Quadratic { r, plant } => {
                let d: Vec<f64> = plant.iter().zip(x).map(|(a, b)| a - b).collect();
                r.quadratic(&d).max(0.0)
            }
            EmseEvaluator::Probe {
                memory,
                regressors,
                targets,
            } => {
                let k = order_of(x.len(), *memory);
                let n = targets.len();
                regressors
                    .chunks(*memory)
                    .zip(targets)
                    .map(|(u, t)| {
                        let y = horner(x, u, k);
                        (t - y).powi(2)
                    })
                    .sum::<f64>()
                    / n as f64
            }
        }
    }
}

fn order_of(len: usize, m: usize) -> usize {
    let mut k = 0;
    let mut n = 1;
    while n < len {
        n *= m;
        k += 1;
    }
    k.max(1)
}

fn horner(x: &[f64], u: &[f64], order: usize) -> f64 {
    let m = u.len();
    let mut cur: Vec<f64> = x.chunks(m).map(|c| dot(c, u)).collect();
    for _ in 1..order {
        cur = cur.chunks(m).map(|c| dot(c, u)).collect();
    }
    cur[0]
}

/// `(E[h(u) f(u)], E[f(u)²])` for rank-one `h`, `f`, on the stack when
/// `2K <= 8`.
fn rank_one_moments(a: &[Vec<f64>], b: &[Vec<f64>]) -> (f64, f64) {
    const N: usize = 8;
    let k = a.len();
    let n = 2 * k;
    if n > N {
        let cross = hafnian_flat(&gram_joint(a, b), n);
        return (cross, hafnian_doubled(&gram(b, b), k));
    }
    let mut joint = [0.0; N * N];
    let mut doubled = [0.0; N * N];
    for i in 0..n {
        let vi = if i < k { &a[i] } else { &b[i - k] };
        for j in i..n {
            let vj = if j < k { &a[j] } else { &b[j - k] };
            let v = dot(vi, vj);
            joint[i * n + j] = v;
            joint[j * n + i] = v;
        }
    }
    for i in 0..n {
        for j in 0..n {
            doubled[i * n + j] = joint[(k + i % k) * n + k + j % k];
        }
    }
    (hafnian_flat(&joint[..n * n], n), hafnian_flat(&doubled[..n * n], n))
}

fn gram(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    let k = a.len();
    let mut g = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            g[i * k + j] = dot(&a[i], &b[j]);
        }
    }
    g
}

/// Gram matrix of the `2K` vectors `[a..., b...]`, flat `2K × 2K`.
fn gram_joint(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    let vecs: Vec<&[f64]> = a.iter().chain(b).map(Vec::as_slice).collect();
    let n = vecs.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = dot(vecs[i], vecs[j]);
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    g
}

/// Hafnian of `[[G, G], [G, G]]` for a `K × K` Gram `G`, i.e. `E[(Π u·w_s)²]`.
fn hafnian_doubled(g: &[f64], k: usize) -> f64 {
    let n = 2 * k;
    let mut big = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            big[i * n + j] = g[(i % k) * k + j % k];
        }
    }
    hafnian_flat(&big, n)
}

fn hafnian_flat(g: &[f64], n: usize) -> f64 {
    fn rec(g: &[f64], n: usize, used: u64) -> f64 {
        let first = (!used).trailing_zeros() as usize;
        if first >= n {
            return 1.0;
        }
        let used = used | 1 << first;
        let mut total = 0.0;
        for j in first + 1..n {
            if used & (1 << j) == 0 {
                let v = g[first * n + j];
                if v != 0.0 {
                    total += v * rec(g, n, used | 1 << j);
                }
            }
        }
        total
    }
    assert!(n <= 64);
    if n % 2 == 1 {
        return 0.0;
    }
    rec(g, n, 0)
}

/// A filter of any roster kind.
#[derive(Debug, Clone)]
pub(crate) enum LiveFilter {
    Sml(SmlFilter),
    Linear(LinearInParamsFilter),
}

impl LiveFilter {
    pub(crate) fn new(setup: &FilterSetup, order: usize, memory: usize) -> Result<Self> {
        match variant_of(setup.spec, order) {
            None => {
                let window = match setup.spec {
                    FilterSpec::SmlTrueLms { window } => window,
                    _ => 1,
                };
                let f = SmlFilter::new(default_init(order, memory)?, setup.mu)?
                    .with_max_threshold(setup.max_threshold)?
                    .with_window(window)?;
                Ok(LiveFilter::Sml(f))
            }
            Some(v) => Ok(LiveFilter::Linear(LinearInParamsFilter::new(v, memory, setup.mu)?)),
        }
    }

    pub(crate) fn prime(&mut self, u: f64) {
        match self {
            LiveFilter::Sml(f) => f.prime(u),
            LiveFilter::Linear(f) => f.prime(u),
        }
    }

    pub(crate) fn step(&mut self, u: f64, d: f64) -> StepOutput {
        match self {
            LiveFilter::Sml(f) => f.step(u, d),
            LiveFilter::Linear(f) => f.step(u, d),
        }
    }

    pub(crate) fn is_diverged(&self) -> bool {
        match self {
            LiveFilter::Sml(f) => f.is_diverged(),
            LiveFilter::Linear(f) => f.is_diverged(),
        }
    }

    fn emse(&self, ev: &EmseEvaluator) -> f64 {
        match self {
            LiveFilter::Sml(f) => ev.of_factors(f.factors()),
            LiveFilter::Linear(f) => {
                let k = f.dense_kernel().expect("baseline layout");
                ev.of_dense(k.coefficients())
            }
        }
    }
}

/// Everything one realization needs, shared read-only across threads.
pub(crate) struct Scenario {
    pub(crate) plant: Plant,
    pub(crate) setups: Vec<FilterSetup>,
    pub(crate) evaluators: Vec<Option<EmseEvaluator>>,
    pub(crate) noise_std: f64,
    pub(crate) iterations: usize,
    pub(crate) seed: u64,
    pub(crate) warnings: Vec<String>,
}

impl Scenario {
    /// `with_emse = false` skips the EMSE bookkeeping (stability counts).
    pub(crate) fn new(
        cfg: &ScenarioConfig,
        plant: Plant,
        setups: Vec<FilterSetup>,
        with_emse: bool,
    ) -> Result<Self> {
        let mut warnings = Vec::new();
        let mut evaluators = Vec::with_capacity(setups.len());
        let mut quadratic: Option<Option<EmseEvaluator>> = None;
        let mut probe: Option<EmseEvaluator> = None;
        let fits = (plant.memory() as f64).powi(plant.order() as i32) <= CORRELATION_CAP as f64;
        for s in &setups {
            if !with_emse {
                evaluators.push(None);
                continue;
            }
            let exact = cfg.emse == EmseMode::Exact;
            let ev = match (&plant, s.spec.is_sml()) {
                (Plant::RankOne(p), true) if exact => Some(EmseEvaluator::rank_one(p)),
                _ if exact && fits => quadratic
                    .get_or_insert_with(|| EmseEvaluator::quadratic(&plant).ok())
                    .clone(),
                _ => None,
            };
            let ev = match ev {
                Some(ev) => ev,
                None => {
                    if exact {
                        warnings.push(format!(
                            "{}: M^K = {}^{} exceeds the correlation cap {}; EMSE is a {}-probe estimate",
                            s.name(),
                            plant.memory(),
                            plant.order(),
                            CORRELATION_CAP,
                            cfg.probes
                        ));
                    }
                    if probe.is_none() {
                        let mut rng = stream_rng(cfg.seed, Stream::Probe, 0);
                        probe = Some(EmseEvaluator::probe(&plant, cfg.probes, &mut rng)?);
                    }
                    probe.clone().expect("just built")
                }
            };
            evaluators.push(Some(ev));
        }
        Ok(Self {
            plant,
            setups,
            evaluators,
            noise_std: cfg.noise_var.sqrt(),
            iterations: cfg.iterations,
            seed: cfg.seed,
            warnings,
        })
    }

    fn fresh_filters(&self) -> Result<Vec<LiveFilter>> {
        self.setups
            .iter()
            .map(|s| LiveFilter::new(s, self.plant.order(), self.plant.memory()))
            .collect()
    }

    /// Drive every filter over realization `r`'s data, calling `record` with
    /// `(filter, iteration, output, emse)` while the filter is healthy.
    /// Returns the final divergence flags.
    pub(crate) fn run<F>(&self, r: u64, mut record: F) -> Result<Vec<bool>>
    where
        F: FnMut(usize, usize, &StepOutput, f64),
    {
        let m = self.plant.memory();
        let mut urng = stream_rng(self.seed, Stream::Input, r);
        let mut vrng = stream_rng(self.seed, Stream::Noise, r);
        let mut filters = self.fresh_filters()?;
        let mut line = DelayLine::new(m)?;
        for _ in 1..m {
            let u: f64 = StandardNormal.sample(&mut urng);
            line.push(u);
            filters.iter_mut().for_each(|f| f.prime(u));
        }
        for i in 0..self.iterations {
            let u: f64 = StandardNormal.sample(&mut urng);
            let v: f64 = StandardNormal.sample(&mut vrng);
            line.push(u);
            let d = self.plant.output(line.regressor())? + self.noise_std * v;
            let mut live = false;
            for (j, f) in filters.iter_mut().enumerate() {
                if f.is_diverged() {
                    continue;
                }
                live = true;
                let emse = match &self.evaluators[j] {
                    Some(ev) => f.emse(ev),
                    None => f64::NAN,
                };
                let out = f.step(u, d);
                if !f.is_diverged() {
                    record(j, i, &out, emse);
                }
            }
            if !live {
                break;
            }
        }
        Ok(filters.iter().map(LiveFilter::is_diverged).collect())
    }

    /// Ensemble over realizations `0..realizations`.
    pub(crate) fn ensemble(&self, realizations: usize) -> Result<Vec<EnsembleCurve>> {
        let nf = self.setups.len();
        let n = self.iterations;
        let mut total = Accum::new(nf, n);
        let chunks = realizations.div_ceil(CHUNK);
        for wave in (0..chunks).step_by(WAVE) {
            let parts: Vec<Accum> = (wave..(wave + WAVE).min(chunks))
                .into_par_iter()
                .map(|c| {
                    let mut acc = Accum::new(nf, n);
                    let mut emse = vec![vec![0.0; n]; nf];
                    let mut mse = vec![vec![0.0; n]; nf];
                    for r in c * CHUNK..((c + 1) * CHUNK).min(realizations) {
                        let flags = self.run(r as u64, |j, i, out, e| {
                            emse[j][i] = e;
                            mse[j][i] = out.error * out.error;
                        })?;
                        for (j, diverged) in flags.into_iter().enumerate() {
                            if diverged {
                                acc.diverged[j] += 1;
                            } else {
                                acc.averaged[j] += 1;
                                add_into(&mut acc.emse[j], &emse[j]);
                                add_into(&mut acc.mse[j], &mse[j]);
                            }
                        }
                    }
                    Ok(acc)
                })
                .collect::<Result<_>>()?;
            for p in &parts {
                total.merge(p);
            }
        }
        Ok(self
            .setups
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let a = total.averaged[j] as f64;
                EnsembleCurve {
                    filter: s.name(),
                    mean_emse: total.emse[j].iter().map(|x| x / a).collect(),
                    mean_mse: total.mse[j].iter().map(|x| x / a).collect(),
                    averaged: total.averaged[j],
                    diverged: total.diverged[j],
                }
            })
            .collect())
    }
}

fn add_into(acc: &mut [f64], x: &[f64]) {
    acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
}

struct Accum {
    emse: Vec<Vec<f64>>,
    mse: Vec<Vec<f64>>,
    averaged: Vec<usize>,
    diverged: Vec<usize>,
}

impl Accum {
    fn new(filters: usize, iterations: usize) -> Self {
        Self {
            emse: vec![vec![0.0; iterations]; filters],
            mse: vec![vec![0.0; iterations]; filters],
            averaged: vec![0; filters],
            diverged: vec![0; filters],
        }
    }

    fn merge(&mut self, other: &Accum) {
        for j in 0..self.emse.len() {
            add_into(&mut self.emse[j], &other.emse[j]);
            add_into(&mut self.mse[j], &other.mse[j]);
            self.averaged[j] += other.averaged[j];
            self.diverged[j] += other.diverged[j];
        }
    }
}

#[derive(Debug, Clone)]
pub struct IdentificationRun {
    pub plant: Plant,
    pub setups: Vec<FilterSetup>,
    pub curves: Vec<EnsembleCurve>,
    pub warnings: Vec<String>,
}

/// Ensemble identification of the configured plant by every roster filter.
pub fn run_identification(cfg: &ScenarioConfig) -> Result<IdentificationRun> {
    cfg.validate()?;
    let plant = super::plants::build_plant(cfg, &cfg.plant)?;
    identify(cfg, plant)
}

pub(crate) fn identify(cfg: &ScenarioConfig, plant: Plant) -> Result<IdentificationRun> {
    let setups = filter_setups(cfg, &plant)?;
    identify_with(cfg, plant, setups)
}

pub(crate) fn identify_with(
    cfg: &ScenarioConfig,
    plant: Plant,
    setups: Vec<FilterSetup>,
) -> Result<IdentificationRun> {
    let scenario = Scenario::new(cfg, plant, setups, true)?;
    let curves = scenario.ensemble(cfg.realizations)?;
    Ok(IdentificationRun {
        curves,
        plant: scenario.plant,
        setups: scenario.setups,
        warnings: scenario.warnings,
    })
}

/// One row of a per-realization trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub output: f64,
    pub error: f64,
    /// `e(i)²`.
    pub mse_proxy: f64,
    pub emse: f64,
    pub diverged: bool,
}

/// Replay realization `r` for roster entry `filter` on the same data the
/// ensemble uses.
pub fn realization_trace(
    cfg: &ScenarioConfig,
    plant: &Plant,
    filter: usize,
    r: u64,
) -> Result<Vec<TraceRow>> {
    let setups = filter_setups(cfg, plant)?;
    let setup = setups
        .get(filter)
        .ok_or_else(|| Error::invalid(format!("roster has no filter #{filter}")))?
        .clone();
    let scenario = Scenario::new(cfg, plant.clone(), vec![setup], true)?;
    let mut rows: Vec<TraceRow> = Vec::with_capacity(cfg.iterations);
    scenario.run(r, |_, i, out, emse| {
        rows.push(TraceRow {
            iteration: i,
            output: out.output,
            error: out.error,
            mse_proxy: out.error * out.error,
            emse,
            diverged: false,
        });
    })?;
    // Rows stop at the divergence step; mark the remainder.
    if rows.len() < cfg.iterations {
        for i in rows.len()..cfg.iterations {
            rows.push(TraceRow {
                iteration: i,
                output: f64::NAN,
                error: f64::NAN,
                mse_proxy: f64::NAN,
                emse: f64::NAN,
                diverged: true,
            });
        }
    }
    Ok(rows)
}

pub fn trace_csv_string(rows: &[TraceRow]) -> String {
    let mut s = String::from("iteration,y,e,mse_proxy,emse,diverged_flag\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.iteration, r.output, r.error, r.mse_proxy, r.emse, r.diverged as u8
        );
    }
    s
}

pub fn write_trace_csv(path: impl AsRef<Path>, rows: &[TraceRow]) -> Result<()> {
    std::fs::write(path, trace_csv_string(rows))?;
    Ok(())
}

/// `iteration,filter,mean_emse_db,mean_mse_db`, iterations 1-based.
pub fn curves_csv_string(curves: &[EnsembleCurve]) -> String {
    let mut s = String::from("iteration,filter,mean_emse_db,mean_mse_db\n");
    for c in curves {
        for i in 0..c.len() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                i + 1,
                c.filter,
                db(c.mean_emse[i]),
                db(c.mean_mse[i])
            );
        }
    }
    s
}

pub fn write_curves_csv(path: impl AsRef<Path>, curves: &[EnsembleCurve]) -> Result<()> {
    std::fs::write(path, curves_csv_string(curves))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::rank_one_cross_moment;
    use crate::experiments::config::ExperimentKind;

    #[test]
    fn steady_state_is_tail_mean() {
        let v: Vec<f64> = (0..20).map(f64::from).collect();
        assert_eq!(steady_state(&v), 18.5);
        assert_eq!(steady_state(&[4.0]), 4.0);
    }

    #[test]
    fn flat_hafnian_matches_library() {
        let a = RankOneKernel::new(vec![vec![1.0, 0.5, -0.2], vec![0.3, -1.0, 0.7]]).unwrap();
        let b = RankOneKernel::new(vec![vec![-0.4, 0.1, 0.9], vec![1.2, 0.2, 0.0]]).unwrap();
        let g = gram_joint(a.factors(), b.factors());
        let ours = hafnian_flat(&g, 4);
        assert!((ours - rank_one_cross_moment(&a, &b)).abs() < 1e-14);
        let own = hafnian_doubled(&gram(b.factors(), b.factors()), 2);
        assert!((own - rank_one_cross_moment(&b, &b)).abs() < 1e-14);
    }

    #[test]
    fn emse_routes_agree() {
        let p = RankOneKernel::new(vec![vec![0.6, -0.3, 0.2], vec![0.5, 0.5, -0.1]]).unwrap();
        let w = vec![vec![0.1, 0.2, 0.3], vec![-0.2, 0.4, 0.0]];
        let plant = Plant::RankOne(p.clone());
        let a = EmseEvaluator::rank_one(&p).of_factors(&w);
        let b = EmseEvaluator::quadratic(&plant).unwrap().of_factors(&w);
        let x = materialize(&RankOneKernel::new(w.clone()).unwrap()).unwrap();
        let c = EmseEvaluator::rank_one(&p).of_dense(x.coefficients());
        assert!((a - b).abs() < 1e-12 * a.max(1.0), "{a} {b}");
        assert!((a - c).abs() < 1e-12 * a.max(1.0), "{a} {c}");
        assert!(EmseEvaluator::rank_one(&p).of_factors(p.factors()) < 1e-14);
    }

    #[test]
    fn zero_plant_zero_emse() {
        let mut cfg = ScenarioConfig::new(ExperimentKind::Identification);
        cfg.memory = 3;
        cfg.iterations = 50;
        cfg.realizations = 3;
        cfg.noise_var = 0.0;
        cfg.step = StepSpec::Absolute(0.05);
        cfg.filters = vec![FilterSpec::VolterraLms, FilterSpec::PfLms];
        let run = identify(&cfg, Plant::RankOne(RankOneKernel::zeros(2, 3).unwrap())).unwrap();
        for c in &run.curves {
            assert!(c.mean_emse.iter().all(|&e| e == 0.0));
            assert_eq!(c.averaged, 3);
        }
    }
}
