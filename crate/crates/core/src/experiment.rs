//! Seeded sweeps over power, RIS size or user count.
//!
//! Every (sweep value, baseline, trial) cell is an independent job. Trial `t`
//! uses the seed `trial_seed(run_seed, t)` for both its training and its
//! held-out channels; the two come from different RNG streams, and all
//! baselines of a trial see the same held-out channels.

use rayon::prelude::*;

use crate::channel::{draw_sample, ScenarioConfig};
use crate::config::{Baseline, ExperimentSpec, Mode};
use crate::error::{Error, Result};
use crate::inner_solver::{optimize_inner_from, InnerConfig};
use crate::cascade::Cascade;
use crate::outer::{OuterConfig, OuterTrace};
use crate::outer_reflective::run_algorithm1;
use crate::outer_transmissive::run_algorithm2;
use crate::scattering::{PhaseConfig, ReflectiveScattering, Surface, TransmissiveScattering};
use crate::seeding::{stream_rng, trial_seed, Purpose};

/// Outcome of one trial of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub mean_sum_rate: f64,
    pub mean_mse: f64,
    /// Outer iterations executed (0 for fixed baselines).
    pub iterations: usize,
    pub state: Surface,
    pub trace: Option<OuterTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub value: f64,
    pub baseline: Baseline,
    pub trial: usize,
    pub seed: u64,
    pub outcome: std::result::Result<TrialOutcome, String>,
}

/// Aggregate over the trials of one (sweep value, baseline) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub value: f64,
    pub baseline: Baseline,
    /// Trials that completed.
    pub trials: usize,
    pub mean_sum_rate: f64,
    /// Sample standard deviation (0 for a single trial).
    pub std_sum_rate: f64,
    pub mean_mse: f64,
    pub iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub spec: ExperimentSpec,
    /// In (sweep value, baseline, trial) order.
    pub records: Vec<TrialRecord>,
    /// In (sweep value, baseline) order.
    pub cells: Vec<CellSummary>,
}

impl ResultTable {
    pub fn failures(&self) -> impl Iterator<Item = (&TrialRecord, &str)> {
        self.records
            .iter()
            .filter_map(|r| r.outcome.as_ref().err().map(|e| (r, e.as_str())))
    }

    pub fn cell(&self, value: f64, baseline: Baseline) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.value == value && c.baseline == baseline)
    }
}

/// The seeded coupling state of the `fixed_mc` baseline for `m` elements:
/// `σ_αα` with modulus `magnitude` and uniform phases, `σ_αβ = 1`, then
/// symmetrized and projected onto the lossless set.
pub fn fixed_coupling_state(m: usize, magnitude: f64, run_seed: u64) -> Result<ReflectiveScattering> {
    use rand::Rng;
    let mut rng = stream_rng(run_seed, Purpose::FixedCoupling, m as u64);
    let aa: Vec<_> = (0..m)
        .map(|_| crate::C64::from_polar(magnitude, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let ab = vec![crate::C64::new(1.0, 0.0); m];
    ReflectiveScattering::feasible(&aa, &ab)
}

/// Mean sum rate and MSE of `surface` over `count` held-out channels, each
/// with its own inner solve from seeded random loads.
pub fn evaluate_heldout(
    scenario: &ScenarioConfig,
    surface: &Surface,
    inner: &InnerConfig,
    count: usize,
) -> Result<(f64, f64)> {
    let m = scenario.elements;
    let results: Vec<Result<(f64, f64)>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let sample = draw_sample(scenario, Purpose::Eval, i)?;
            let init = PhaseConfig::random(m, &mut stream_rng(scenario.seed, Purpose::EvalPhase, i));
            let cascade = Cascade::new(&sample, surface)?;
            let out = optimize_inner_from(&cascade, inner, scenario.power, scenario.noise_var, &init)?;
            Ok((out.solution.sum_rate, out.solution.mse))
        })
        .collect();
    let mut rate = 0.0;
    let mut mse = 0.0;
    for r in results {
        let (a, b) = r?;
        rate += a;
        mse += b;
    }
    Ok((rate / count as f64, mse / count as f64))
}

fn run_trial(
    spec: &ExperimentSpec,
    value: f64,
    baseline: Baseline,
    seed: u64,
) -> Result<TrialOutcome> {
    let scenario = ScenarioConfig {
        seed,
        ..spec.scenario_at(value)?
    };
    let m = scenario.elements;
    let outer = OuterConfig { seed, ..spec.outer };
    let (state, trace) = match (spec.mode, baseline) {
        (Mode::Reflective, Baseline::Proposed) => {
            let (rs, trace) = run_algorithm1(&scenario, &outer, &spec.inner)?;
            (Surface::Reflective(rs), Some(trace))
        }
        (Mode::Transmissive, Baseline::Proposed) => {
            let (ts, trace) = run_algorithm2(&scenario, &outer, &spec.inner)?;
            (Surface::Transmissive(ts), Some(trace))
        }
        (Mode::Reflective, Baseline::FixedMc) => (
            Surface::Reflective(fixed_coupling_state(m, spec.fixed_coupling, spec.seed)?),
            None,
        ),
        (Mode::Transmissive, Baseline::FixedMc) => {
            return Err(Error::Config("fixed_mc only applies to reflective mode".into()))
        }
        (Mode::Reflective, Baseline::Conventional) => {
            (Surface::Reflective(ReflectiveScattering::conventional(m)?), None)
        }
        (Mode::Transmissive, Baseline::Conventional) => {
            (Surface::Transmissive(TransmissiveScattering::identity(m)), None)
        }
    };
    let (mean_sum_rate, mean_mse) = evaluate_heldout(&scenario, &state, &spec.inner, spec.eval_samples)?;
    Ok(TrialOutcome {
        mean_sum_rate,
        mean_mse,
        iterations: trace.as_ref().map_or(0, OuterTrace::len),
        state,
        trace,
    })
}

fn summarize(value: f64, baseline: Baseline, records: &[&TrialRecord]) -> CellSummary {
    let ok: Vec<&TrialOutcome> = records.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let n = ok.len();
    let (mean_sum_rate, std_sum_rate, mean_mse, iters) = if n == 0 {
        (f64::NAN, f64::NAN, f64::NAN, 0)
    } else {
        let mean = ok.iter().map(|o| o.mean_sum_rate).sum::<f64>() / n as f64;
        let std = if n > 1 {
            (ok.iter().map(|o| (o.mean_sum_rate - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mse = ok.iter().map(|o| o.mean_mse).sum::<f64>() / n as f64;
        (mean, std, mse, ok.iter().map(|o| o.iterations).max().unwrap_or(0))
    };
    CellSummary {
        value,
        baseline,
        trials: n,
        mean_sum_rate,
        std_sum_rate,
        mean_mse,
        iters,
    }
}

/// Runs every cell of the sweep. Solver failures are recorded per trial and
/// do not stop the run.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let baselines = spec.baselines();
    let jobs: Vec<(f64, Baseline, usize)> = spec
        .values
        .iter()
        .flat_map(|&v| {
            baselines
                .iter()
                .flat_map(move |&b| (0..spec.trials).map(move |t| (v, b, t)))
        })
        .collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(value, baseline, trial)| {
            let seed = trial_seed(spec.seed, trial as u64);
            TrialRecord {
                value,
                baseline,
                trial,
                seed,
                outcome: run_trial(spec, value, baseline, seed).map_err(|e| e.to_string()),
            }
        })
        .collect();
    let mut cells = Vec::new();
    for &v in &spec.values {
        for &b in &baselines {
            let group: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.value == v && r.baseline == b)
                .collect();
            cells.push(summarize(v, b, &group));
        }
    }
    Ok(ResultTable {
        spec: spec.clone(),
        records,
        cells,
    })
}
