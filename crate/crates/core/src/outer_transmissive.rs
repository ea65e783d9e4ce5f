//! Offline optimization of the transmissive radiation patterns `S1`, `S2`.
//!
//! Per sample, with `E = ρ H_ru^H S2 Υ S1 H_br F - I`:
//!
//! ```text
//! ∇S1 = 2 (ρ H_ru^H S2 Υ)^T E* (H_br F)^T
//! ∇S2 = 2 (ρ H_ru^H)^T E* (Υ S1 H_br F)^T
//! ```
//!
//! under `df = Re Σ_ij G_ij δS_ij`. Each update steps along `-conj(G)` and
//! replaces the result by its nearest unitary matrix (`Ũ Ṽ^H` from the SVD).

use crate::cascade::Cascade;
use crate::channel::{ChannelSample, ScenarioConfig};
use crate::error::{Error, Result};
use crate::inner_solver::{residual, InnerConfig, InnerOutcome};
use crate::numerics::{CMatrix, C64};
use crate::outer::{run_outer, Direction, OuterConfig, OuterTrace};
use crate::scattering::{project_unitary, PhaseConfig, Surface, TransmissiveScattering};

pub type TransOuterConfig = OuterConfig;

/// Mean gradient with respect to both pattern matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternGradient {
    pub s1: CMatrix,
    pub s2: CMatrix,
}

impl Direction for PatternGradient {
    fn max_abs(&self) -> f64 {
        self.s1.max_abs().max(self.s2.max_abs())
    }

    fn mean(items: &[Self]) -> Self {
        let (r, c) = items.first().map_or((0, 0), |g| g.s1.shape());
        let mut s1 = CMatrix::zeros(r, c);
        let mut s2 = CMatrix::zeros(r, c);
        for g in items {
            s1 = s1.add(&g.s1);
            s2 = s2.add(&g.s2);
        }
        let inv = C64::new(1.0 / items.len().max(1) as f64, 0.0);
        PatternGradient {
            s1: s1.scale(inv),
            s2: s2.scale(inv),
        }
    }
}

fn gradients(
    ts: &TransmissiveScattering,
    sample: &ChannelSample,
    phase: &PhaseConfig,
    f: &CMatrix,
    rho: f64,
) -> Result<PatternGradient> {
    let m = ts.elements();
    if sample.elements() != m || phase.len() != m {
        return Err(Error::InvalidDimension(format!(
            "pattern size {m}, channel size {}, phase size {}",
            sample.elements(),
            phase.len()
        )));
    }
    let two_rho = C64::new(2.0 * rho, 0.0);
    let ru_t = sample.h_ru.conj(); // (H_ru^H)^T
    let left_t = ts.s2.transpose().matmul(&ru_t).mul_diag_left(&phase.upsilon); // (H_ru^H S2 Υ)^T
    let bf = sample.h_br.matmul(f);
    let loaded = ts.s1.matmul(&bf).mul_diag_left(&phase.upsilon); // Υ S1 H_br F
    let heff_f = sample.h_ru.adjoint().matmul(&ts.s2).matmul(&loaded);
    let mut e = heff_f.scale(C64::new(rho, 0.0));
    for k in 0..e.rows() {
        e[(k, k)] -= 1.0;
    }
    let e_conj = e.conj();
    Ok(PatternGradient {
        s1: left_t.matmul(&e_conj).matmul(&bf.transpose()).scale(two_rho),
        s2: ru_t.matmul(&e_conj).matmul(&loaded.transpose()).scale(two_rho),
    })
}

pub(crate) fn pattern_gradient_at(
    cascade: &Cascade,
    sample: &ChannelSample,
    outcome: &InnerOutcome,
) -> Result<PatternGradient> {
    let Surface::Transmissive(ts) = cascade.surface() else {
        return Err(Error::InvalidDimension("pattern gradients need a transmissive surface".into()));
    };
    let (f, rho) = (&outcome.solution.f, outcome.solution.rho);
    let point = &outcome.point;
    let e_conj = residual(&point.heff, f, rho).conj();
    let two_rho = C64::new(2.0 * rho, 0.0);
    let ru_t = sample.h_ru.conj();
    let left_t = ts.s2.transpose().matmul(&ru_t).mul_diag_left(&point.phase.upsilon);
    let bf_t = sample.h_br.matmul(f).transpose();
    let loaded_t = cascade.loaded_right(point).matmul(f).transpose();
    Ok(PatternGradient {
        s1: left_t.matmul(&e_conj).matmul(&bf_t).scale(two_rho),
        s2: ru_t.matmul(&e_conj).matmul(&loaded_t).scale(two_rho),
    })
}

/// Per-sample gradient with respect to `S1` at fixed `(Υ, F, ρ)`.
pub fn grad_s1_sample(
    sample: &ChannelSample,
    ts: &TransmissiveScattering,
    phase: &PhaseConfig,
    f: &CMatrix,
    rho: f64,
) -> Result<CMatrix> {
    Ok(gradients(ts, sample, phase, f, rho)?.s1)
}

/// Per-sample gradient with respect to `S2` at fixed `(Υ, F, ρ)`.
pub fn grad_s2_sample(
    sample: &ChannelSample,
    ts: &TransmissiveScattering,
    phase: &PhaseConfig,
    f: &CMatrix,
    rho: f64,
) -> Result<CMatrix> {
    Ok(gradients(ts, sample, phase, f, rho)?.s2)
}

/// Conjugate-direction step followed by unitary projection of both patterns.
pub fn update_patterns(
    ts: &TransmissiveScattering,
    g: &PatternGradient,
    step: f64,
) -> Result<TransmissiveScattering> {
    let mu = C64::new(step, 0.0);
    let s1 = project_unitary(&ts.s1.sub(&g.s1.conj().scale(mu)))?;
    let s2 = project_unitary(&ts.s2.sub(&g.s2.conj().scale(mu)))?;
    TransmissiveScattering::new(s1, s2)
}

/// Offline radiation-pattern optimization from a given starting state (projected first).
pub fn run_algorithm2_from(
    scenario: &ScenarioConfig,
    outer: &TransOuterConfig,
    inner: &InnerConfig,
    init: &TransmissiveScattering,
) -> Result<(TransmissiveScattering, OuterTrace)> {
    let start = TransmissiveScattering::new(project_unitary(&init.s1)?, project_unitary(&init.s2)?)?;
    let update = |s: &Surface, g: &PatternGradient, step: f64| -> Result<Surface> {
        match s {
            Surface::Transmissive(ts) => Ok(Surface::Transmissive(update_patterns(ts, g, step)?)),
            Surface::Reflective(_) => unreachable!("transmissive loop holds a transmissive surface"),
        }
    };
    let (surface, trace) = run_outer(
        scenario,
        outer,
        inner,
        Surface::Transmissive(start),
        &pattern_gradient_at,
        &update,
    )?;
    match surface {
        Surface::Transmissive(ts) => Ok((ts, trace)),
        Surface::Reflective(_) => unreachable!("transmissive loop holds a transmissive surface"),
    }
}

/// Offline radiation-pattern optimization from `S1 = S2 = I`.
pub fn run_algorithm2(
    scenario: &ScenarioConfig,
    outer: &TransOuterConfig,
    inner: &InnerConfig,
) -> Result<(TransmissiveScattering, OuterTrace)> {
    run_algorithm2_from(scenario, outer, inner, &TransmissiveScattering::identity(scenario.elements))
}
