//! Shared Monte-Carlo outer loop for both surface types.
//!
//! Each outer iteration solves the inner problem on every training sample
//! (warm-started from that sample's previous loads), averages the per-sample
//! gradients in index order, and hands the mean to a surface-specific update
//! that also projects back onto the feasible set.

use rayon::prelude::*;

use crate::cascade::Cascade;
use crate::channel::{draw_sample, ChannelSample, ScenarioConfig};
use crate::error::{Error, Result};
use crate::inner_solver::{optimize_inner_from, InnerConfig, InnerOutcome};
use crate::scattering::{PhaseConfig, Surface};
use crate::seeding::{stream_rng, Purpose};

/// Consecutive failed steps tolerated before the solver aborts.
pub const MAX_CONSECUTIVE_FAILURES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterConfig {
    /// Channel samples per iteration `Q`.
    pub samples: usize,
    /// Outer iterations `I_max`.
    pub iterations: usize,
    /// Step size `μ`.
    pub step: f64,
    /// Seed of the training channel and load streams.
    pub seed: u64,
    /// Draw fresh samples every iteration instead of reusing one set.
    pub redraw: bool,
    /// Halve `μ` whenever the mean objective increases.
    pub halve_on_increase: bool,
    /// Divide the gradient by its largest entry modulus, so `μ` is the
    /// largest per-entry move.
    pub normalize: bool,
}

impl Default for OuterConfig {
    fn default() -> Self {
        OuterConfig {
            samples: 10,
            iterations: 50,
            step: 0.3,
            seed: 1,
            redraw: true,
            halve_on_increase: false,
            normalize: true,
        }
    }
}

impl OuterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::Config("outer samples (Q) must be at least 1".into()));
        }
        if self.iterations < 1 {
            return Err(Error::Config("outer iterations (I_max) must be at least 1".into()));
        }
        if !(self.step >= 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!(
                "outer step (mu) must be finite and non-negative, got {}",
                self.step
            )));
        }
        Ok(())
    }
}

/// Statistics of the state evaluated at one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// 1-based iteration index.
    pub iteration: usize,
    pub mean_mse: f64,
    pub mean_sum_rate: f64,
    /// Step size used for the update that follows this evaluation.
    pub step: f64,
    /// Largest constraint violation of the scattering state.
    pub violation: f64,
    /// Largest `||υ_m| - 1|` over all samples.
    pub phase_violation: f64,
    /// Largest `|‖F‖_F² - P|` over all samples.
    pub power_violation: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OuterTrace {
    pub rows: Vec<TraceRow>,
    /// Steps rejected because of singular or rank-deficient states.
    pub failed_steps: usize,
}

impl OuterTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn first(&self) -> Option<&TraceRow> {
        self.rows.first()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub const CSV_HEADER: &'static str =
        "iteration,mean_mse,mean_sum_rate,step,violation,phase_violation,power_violation";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.iteration,
                r.mean_mse,
                r.mean_sum_rate,
                r.step,
                r.violation,
                r.phase_violation,
                r.power_violation
            ));
        }
        out
    }
}

/// Mean of per-sample gradients.
pub trait Direction: Sized {
    fn mean(items: &[Self]) -> Self;
    /// Largest entry modulus.
    fn max_abs(&self) -> f64;
}

pub(crate) type GradientFn<'a, G> =
    dyn Fn(&Cascade, &ChannelSample, &InnerOutcome) -> Result<G> + Sync + 'a;
pub(crate) type UpdateFn<'a, G> = dyn Fn(&Surface, &G, f64) -> Result<Surface> + 'a;

fn is_step_failure(err: &Error) -> bool {
    matches!(
        err,
        Error::SingularConfiguration(_) | Error::Singular { .. } | Error::AmbiguousProjection(_)
    )
}

/// Training channel for sample `index`.
pub fn training_sample(scenario: &ScenarioConfig, seed: u64, index: u64) -> Result<ChannelSample> {
    let cfg = ScenarioConfig {
        seed,
        ..scenario.clone()
    };
    draw_sample(&cfg, Purpose::Train, index)
}

fn initial_phase(seed: u64, index: u64, m: usize) -> PhaseConfig {
    PhaseConfig::random(m, &mut stream_rng(seed, Purpose::TrainPhase, index))
}

struct Evaluation<G> {
    row: TraceRow,
    gradient: G,
    phases: Vec<PhaseConfig>,
}

#[allow(clippy::too_many_arguments)]
fn evaluate_state<G: Direction + Send>(
    scenario: &ScenarioConfig,
    inner: &InnerConfig,
    surface: &Surface,
    samples: &[ChannelSample],
    phases: &[PhaseConfig],
    gradient: &GradientFn<'_, G>,
    iteration: usize,
    step: f64,
) -> Result<Evaluation<G>> {
    let results: Vec<Result<(InnerOutcome, G)>> = samples
        .par_iter()
        .zip(phases.par_iter())
        .map(|(sample, init)| {
            let cascade = Cascade::new(sample, surface)?;
            let outcome = optimize_inner_from(&cascade, inner, scenario.power, scenario.noise_var, init)?;
            let g = gradient(&cascade, sample, &outcome)?;
            Ok((outcome, g))
        })
        .collect();
    let mut outcomes = Vec::with_capacity(results.len());
    let mut grads = Vec::with_capacity(results.len());
    for r in results {
        let (o, g) = r?;
        outcomes.push(o);
        grads.push(g);
    }
    let q = outcomes.len() as f64;
    let row = TraceRow {
        iteration,
        mean_mse: outcomes.iter().map(|o| o.solution.mse).sum::<f64>() / q,
        mean_sum_rate: outcomes.iter().map(|o| o.solution.sum_rate).sum::<f64>() / q,
        step,
        violation: surface.violations().max(),
        phase_violation: outcomes
            .iter()
            .flat_map(|o| o.phase.upsilon.iter())
            .map(|u| (u.norm() - 1.0).abs())
            .fold(0.0, f64::max),
        power_violation: outcomes
            .iter()
            .map(|o| (o.solution.f.frobenius_norm_sqr() - scenario.power).abs())
            .fold(0.0, f64::max),
    };
    Ok(Evaluation {
        row,
        gradient: G::mean(&grads),
        phases: outcomes.into_iter().map(|o| o.phase).collect(),
    })
}

/// Runs the outer loop from `init`. Returns the final surface and the trace.
pub(crate) fn run_outer<G: Direction + Send>(
    scenario: &ScenarioConfig,
    outer: &OuterConfig,
    inner: &InnerConfig,
    init: Surface,
    gradient: &GradientFn<'_, G>,
    update: &UpdateFn<'_, G>,
) -> Result<(Surface, OuterTrace)> {
    scenario.validate()?;
    outer.validate()?;
    inner.validate()?;
    let q = outer.samples;
    let m = scenario.elements;

    let batch = |iteration: usize| -> Result<(Vec<ChannelSample>, Vec<PhaseConfig>)> {
        let offset = if outer.redraw { (iteration * q) as u64 } else { 0 };
        let samples = (0..q as u64)
            .map(|i| training_sample(scenario, outer.seed, offset + i))
            .collect::<Result<Vec<_>>>()?;
        let phases = (0..q as u64)
            .map(|i| initial_phase(outer.seed, offset + i, m))
            .collect();
        Ok((samples, phases))
    };

    let (mut samples, mut phases) = batch(0)?;
    let mut surface = init;
    let mut step = outer.step;
    let mut trace = OuterTrace::default();
    // last successfully evaluated state and its mean gradient
    let mut previous: Option<(Surface, G, f64)> = None;
    let mut failures = 0usize;
    let mut iteration = 0usize;

    while iteration < outer.iterations {
        if outer.redraw && iteration > 0 {
            let fresh = batch(iteration)?;
            samples = fresh.0;
            phases = fresh.1;
        }
        let eval = match evaluate_state(
            scenario,
            inner,
            &surface,
            &samples,
            &phases,
            gradient,
            iteration + 1,
            step,
        ) {
            Ok(e) => e,
            Err(e) if is_step_failure(&e) => {
                let Some((prev, g, _)) = &previous else {
                    return Err(Error::SolverAbort(format!("initial state is infeasible: {e}")));
                };
                failures += 1;
                trace.failed_steps += 1;
                if failures >= MAX_CONSECUTIVE_FAILURES {
                    return Err(Error::SolverAbort(format!(
                        "{failures} consecutive singular states at iteration {}: {e}",
                        iteration + 1
                    )));
                }
                step *= 0.5;
                surface = retry_update(prev, g, &mut step, update, &mut failures, &mut trace)?;
                continue;
            }
            Err(e) => return Err(e),
        };
        failures = 0;
        let mut row = eval.row;
        if outer.halve_on_increase {
            if let Some((_, _, prev_mse)) = &previous {
                if row.mean_mse > *prev_mse {
                    step *= 0.5;
                }
            }
        }
        row.step = step;
        trace.rows.push(row);
        phases = eval.phases;
        let scale = if outer.normalize { eval.gradient.max_abs() } else { 1.0 };
        let next = if scale > 0.0 {
            let scaled = |s: &Surface, g: &G, mu: f64| update(s, g, mu / scale);
            retry_update(&surface, &eval.gradient, &mut step, &scaled, &mut failures, &mut trace)?
        } else {
            surface.clone()
        };
        previous = Some((surface, eval.gradient, row.mean_mse));
        surface = next;
        iteration += 1;
    }
    Ok((surface, trace))
}

/// Applies `update`, halving the step on projection failures.
fn retry_update<G>(
    surface: &Surface,
    gradient: &G,
    step: &mut f64,
    update: &UpdateFn<'_, G>,
    failures: &mut usize,
    trace: &mut OuterTrace,
) -> Result<Surface> {
    loop {
        match update(surface, gradient, *step) {
            Ok(s) => return Ok(s),
            Err(e) if is_step_failure(&e) => {
                *failures += 1;
                trace.failed_steps += 1;
                if *failures >= MAX_CONSECUTIVE_FAILURES {
                    return Err(Error::SolverAbort(format!(
                        "{failures} consecutive failed updates: {e}"
                    )));
                }
                *step *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
}
