//! Offline optimization of the reflective spectra `(σ_αα, σ_αβ)`.
//!
//! Per sample, with `A = (Υ^-1 - S_αα)^-1`, `E = ρ Heff F - I` and the
//! frame `U = V`:
//!
//! ```text
//! ∇σ_αα = diag(2 L^T E* R^T),   L = ρ H_ru^H S_βα A U,   R = U^H A S_αβ H_br F
//! ∇σ_αβ = diag(2 L1^T E* R1^T) + diag(2 L^T E* R2^T),
//!         L1 = ρ H_ru^H U*,  R1 = U^T A S_αβ H_br F,  R2 = U^H H_br F
//! ```
//!
//! with the convention `df = Re Σ_i G_i δσ_i`. The update moves along the
//! conjugate direction, `σ ← σ - μ conj(G)`, then symmetrizes and projects
//! each pair onto `|σ_αα|² + |σ_αβ|² = 1`.

use crate::cascade::{row_dots, Cascade};
use crate::channel::{ChannelSample, ScenarioConfig};
use crate::error::{Error, Result};
use crate::inner_solver::{residual, InnerConfig, InnerOutcome};
use crate::numerics::{CMatrix, C64};
use crate::outer::{run_outer, Direction, OuterConfig, OuterTrace};
use crate::scattering::{symmetrize, project_lossless, PhaseConfig, ReflectiveScattering, Surface};

/// Mean gradient with respect to both spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraGradient {
    pub sigma_aa: Vec<C64>,
    pub sigma_ab: Vec<C64>,
}

impl Direction for SpectraGradient {
    fn max_abs(&self) -> f64 {
        self.sigma_aa.iter().chain(&self.sigma_ab).map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn mean(items: &[Self]) -> Self {
        let m = items.first().map_or(0, |g| g.sigma_aa.len());
        let mut aa = vec![C64::new(0.0, 0.0); m];
        let mut ab = vec![C64::new(0.0, 0.0); m];
        for g in items {
            for i in 0..m {
                aa[i] += g.sigma_aa[i];
                ab[i] += g.sigma_ab[i];
            }
        }
        let inv = 1.0 / items.len().max(1) as f64;
        SpectraGradient {
            sigma_aa: aa.into_iter().map(|z| z * inv).collect(),
            sigma_ab: ab.into_iter().map(|z| z * inv).collect(),
        }
    }
}

fn two(x: Vec<C64>) -> Vec<C64> {
    x.into_iter().map(|z| z * 2.0).collect()
}

/// Both spectral gradients from an evaluated cascade point.
pub(crate) fn spectra_gradient_at(
    cascade: &Cascade,
    sample: &ChannelSample,
    outcome: &InnerOutcome,
) -> Result<SpectraGradient> {
    let rs = cascade
        .reflective()
        .ok_or_else(|| Error::InvalidDimension("spectral gradients need a reflective surface".into()))?;
    let (point, f, rho) = (&outcome.point, &outcome.solution.f, outcome.solution.rho);
    let u = rs.frame();
    let u_h = u.adjoint();
    let e_conj = residual(&point.heff, f, rho).conj();

    // L^T = U^T A^T (ρ left)^T
    let lt = u.transpose().matmul(&cascade.port_left_t(point, rho));
    let arf = cascade.port_right(point, f);
    let r = u_h.matmul(&arf);
    let lt_e = lt.matmul(&e_conj);
    let g_aa = two(row_dots(&lt_e, &r));

    let l1t = u_h.matmul(&sample.h_ru.conj()).scale(C64::new(rho, 0.0));
    let r1 = u.transpose().matmul(&arf);
    let r2 = u_h.matmul(&sample.h_br.matmul(f));
    let g_ab = row_dots(&l1t.matmul(&e_conj), &r1)
        .into_iter()
        .zip(row_dots(&lt_e, &r2))
        .map(|(a, b)| (a + b) * 2.0)
        .collect();
    Ok(SpectraGradient {
        sigma_aa: g_aa,
        sigma_ab: g_ab,
    })
}

fn sample_gradient(
    sample: &ChannelSample,
    rs: &ReflectiveScattering,
    phase: &PhaseConfig,
    f: &CMatrix,
    rho: f64,
) -> Result<SpectraGradient> {
    let surface = Surface::Reflective(rs.clone());
    let cascade = Cascade::new(sample, &surface)?;
    let point = cascade.evaluate(phase)?;
    let solution = crate::inner_solver::PrecoderSolution {
        f: f.clone(),
        rho,
        mse: 0.0,
        per_user_mmse: Vec::new(),
        sum_rate: 0.0,
    };
    let outcome = InnerOutcome {
        phase: phase.clone(),
        solution,
        history: Vec::new(),
        point,
    };
    spectra_gradient_at(&cascade, sample, &outcome)
}

/// Per-sample gradient with respect to `σ_αα` at fixed `(Υ, F, ρ)`.
pub fn grad_sigma_aa_sample(
    sample: &ChannelSample,
    rs: &ReflectiveScattering,
    phase: &PhaseConfig,
    f: &CMatrix,
    rho: f64,
) -> Result<Vec<C64>> {
    Ok(sample_gradient(sample, rs, phase, f, rho)?.sigma_aa)
}

/// Per-sample gradient with respect to `σ_αβ` at fixed `(Υ, F, ρ)`.
pub fn grad_sigma_ab_sample(
    sample: &ChannelSample,
    rs: &ReflectiveScattering,
    phase: &PhaseConfig,
    f: &CMatrix,
    rho: f64,
) -> Result<Vec<C64>> {
    Ok(sample_gradient(sample, rs, phase, f, rho)?.sigma_ab)
}

/// Conjugate-direction step followed by symmetrization and lossless
/// projection.
pub fn update_spectra(rs: &ReflectiveScattering, g: &SpectraGradient, step: f64) -> Result<ReflectiveScattering> {
    let moved = |s: &[C64], g: &[C64]| -> Vec<C64> {
        s.iter().zip(g).map(|(&s, &g)| s - g.conj() * step).collect()
    };
    let aa = symmetrize(&moved(rs.sigma_aa(), &g.sigma_aa))?;
    let ab = symmetrize(&moved(rs.sigma_ab(), &g.sigma_ab))?;
    let (aa, ab) = project_lossless(&aa, &ab);
    ReflectiveScattering::from_spectra(aa, ab)
}

/// Offline coupling optimization from a given starting state.
pub fn run_algorithm1_from(
    scenario: &ScenarioConfig,
    outer: &OuterConfig,
    inner: &InnerConfig,
    init: &ReflectiveScattering,
) -> Result<(ReflectiveScattering, OuterTrace)> {
    let start = ReflectiveScattering::feasible(init.sigma_aa(), init.sigma_ab())?;
    let update = |s: &Surface, g: &SpectraGradient, step: f64| -> Result<Surface> {
        match s {
            Surface::Reflective(rs) => Ok(Surface::Reflective(update_spectra(rs, g, step)?)),
            Surface::Transmissive(_) => unreachable!("reflective loop holds a reflective surface"),
        }
    };
    let (surface, trace) = run_outer(
        scenario,
        outer,
        inner,
        Surface::Reflective(start),
        &spectra_gradient_at,
        &update,
    )?;
    match surface {
        Surface::Reflective(rs) => Ok((rs, trace)),
        Surface::Transmissive(_) => unreachable!("reflective loop holds a reflective surface"),
    }
}

/// Offline coupling optimization from the coupling-free state `σ_αα = 0`, `σ_αβ = 1`.
pub fn run_algorithm1(
    scenario: &ScenarioConfig,
    outer: &OuterConfig,
    inner: &InnerConfig,
) -> Result<(ReflectiveScattering, OuterTrace)> {
    let init = ReflectiveScattering::conventional(scenario.elements)?;
    run_algorithm1_from(scenario, outer, inner, &init)
}
