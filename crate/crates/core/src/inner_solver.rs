//! Joint precoder / load optimization for one channel realization.
//!
//! Throughout, `heff` is the `K × N` end-to-end channel (`H_ru^H Φ H_br`) and
//! the per-sample objective is
//!
//! ```text
//! f(F, ρ, Υ) = ‖ρ heff F - I_K‖_F² + K ρ² σ²,   ‖F‖_F² = P
//! ```
//!
//! For fixed `Υ` the minimizer over `(F, ρ)` is the regularized inverse
//! `G = heff^H (heff heff^H + (Kσ²/P) I)^-1`, `ρ = ‖G‖_F / √P`, `F = G / ρ`.
//! Loads are then improved by projected gradient steps with backtracking,
//! re-solving `(F, ρ)` at every trial point.

use rand::Rng;

use crate::cascade::{row_dots, Cascade, CascadePoint};
use crate::channel::ChannelSample;
use crate::error::{Error, Result};
use crate::numerics::{invert, CMatrix, Lu, C64};
use crate::scattering::{PhaseConfig, Surface};

/// Smallest trial step before a line search gives up.
const MIN_STEP: f64 = 1e-12;
/// Upper bound on the adaptive phase step (largest per-entry move).
const MAX_STEP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSolution {
    /// `N × K`, `‖F‖_F² = P`.
    pub f: CMatrix,
    pub rho: f64,
    pub mse: f64,
    pub per_user_mmse: Vec<f64>,
    /// bits/s/Hz.
    pub sum_rate: f64,
}

impl PrecoderSolution {
    /// Optimal `(F, ρ)` for `heff` together with its metrics.
    pub fn for_channel(heff: &CMatrix, power: f64, noise_var: f64) -> Result<Self> {
        let (f, rho) = optimal_precoder(heff, power, noise_var, heff.rows())?;
        let per_user_mmse = per_user_mmse(heff, &f, rho, noise_var);
        let mse = per_user_mmse.iter().sum();
        let sum_rate = sum_rate(&per_user_mmse)?;
        Ok(PrecoderSolution {
            f,
            rho,
            mse,
            per_user_mmse,
            sum_rate,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerConfig {
    pub max_iters: usize,
    /// Relative MSE change below which the solver stops.
    pub tol: f64,
    /// Initial largest per-entry displacement of a load step.
    pub phase_step: f64,
    pub backtrack: f64,
}

impl Default for InnerConfig {
    fn default() -> Self {
        InnerConfig {
            max_iters: 200,
            tol: 1e-6,
            phase_step: 0.1,
            backtrack: 0.5,
        }
    }
}

impl InnerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::Config("inner max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("inner tol must be positive, got {}", self.tol)));
        }
        if !(self.phase_step > 0.0 && self.phase_step.is_finite()) {
            return Err(Error::Config(format!(
                "inner phase_step must be positive, got {}",
                self.phase_step
            )));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config(format!(
                "inner backtrack must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        Ok(())
    }
}

/// Result of [`optimize_inner`].
#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub phase: PhaseConfig,
    pub solution: PrecoderSolution,
    /// Objective after initialization and after every accepted step.
    pub history: Vec<f64>,
    pub point: CascadePoint,
}

impl InnerOutcome {
    pub fn iterations(&self) -> usize {
        self.history.len() - 1
    }
}

/// Closed-form MMSE precoder for a `K × N` channel. Returns `(F, ρ)`.
pub fn optimal_precoder(heff: &CMatrix, power: f64, noise_var: f64, users: usize) -> Result<(CMatrix, f64)> {
    if heff.rows() != users {
        return Err(Error::DimensionMismatch {
            op: "optimal_precoder",
            expected: (users, heff.cols()),
            got: heff.shape(),
        });
    }
    if !(power > 0.0) || noise_var < 0.0 {
        return Err(Error::Domain(format!(
            "need P > 0 and σ² ≥ 0, got P = {power}, σ² = {noise_var}"
        )));
    }
    let h_h = heff.adjoint();
    let gram = heff.matmul(&h_h);
    // full row rank check on the unregularized Gram matrix
    Lu::factor(&gram)?;
    let lambda = users as f64 * noise_var / power;
    let mut reg = gram;
    for k in 0..users {
        reg[(k, k)] += lambda;
    }
    let g = h_h.matmul(&invert(&reg)?);
    let norm = g.frobenius_norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Singular {
            pivot: norm,
            threshold: 0.0,
        });
    }
    let rho = norm / power.sqrt();
    Ok((g.scale(C64::new(1.0 / rho, 0.0)), rho))
}

pub(crate) fn residual(heff: &CMatrix, f: &CMatrix, rho: f64) -> CMatrix {
    let mut e = heff.matmul(f).scale(C64::new(rho, 0.0));
    for k in 0..e.rows().min(e.cols()) {
        e[(k, k)] -= 1.0;
    }
    e
}

/// `‖ρ heff F - I_K‖_F² + K ρ² σ²`.
pub fn total_mse(heff: &CMatrix, f: &CMatrix, rho: f64, noise_var: f64, users: usize) -> f64 {
    residual(heff, f, rho).frobenius_norm_sqr() + users as f64 * rho * rho * noise_var
}

/// Row-wise split of [`total_mse`]: `‖ρ (heff F)_k - e_k‖² + ρ² σ²`.
pub fn per_user_mmse(heff: &CMatrix, f: &CMatrix, rho: f64, noise_var: f64) -> Vec<f64> {
    let e = residual(heff, f, rho);
    (0..e.rows())
        .map(|k| e.row(k).iter().map(|z| z.norm_sqr()).sum::<f64>() + rho * rho * noise_var)
        .collect()
}

/// `Σ_k max(0, log2(1 / MMSE_k))`.
pub fn sum_rate(per_user_mmse: &[f64]) -> Result<f64> {
    per_user_mmse.iter().try_fold(0.0, |acc, &v| {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("MMSE must be positive, got {v}")));
        }
        Ok(acc + (-v.log2()).max(0.0))
    })
}

/// Load gradient at an evaluated cascade point. `g_m` is defined by
/// `df = 2 Re Σ_m conj(g_m) δ_m` for a load perturbation `δ`.
pub fn phase_gradient_at(cascade: &Cascade, point: &CascadePoint, f: &CMatrix, rho: f64) -> Vec<C64> {
    let e = residual(&point.heff, f, rho);
    let (lt, r) = cascade.sensitivity(point, f, rho);
    // (R E^H L)_mm = Σ_l (R E^H)[m, l] L^T[m, l]
    let diag = row_dots(&r.matmul(&e.adjoint()), &lt);
    let reflective = matches!(cascade.surface(), Surface::Reflective(_));
    diag.iter()
        .zip(&point.phase.upsilon)
        .map(|(&d, &u)| {
            let w = if reflective { d / (u * u) } else { d };
            w.conj()
        })
        .collect()
}

/// Load gradient of the objective for a given precoder.
pub fn phase_gradient(
    sample: &ChannelSample,
    surface: &Surface,
    phase: &PhaseConfig,
    f: &CMatrix,
    rho: f64,
) -> Result<Vec<C64>> {
    let cascade = Cascade::new(sample, surface)?;
    let point = cascade.evaluate(phase)?;
    Ok(phase_gradient_at(&cascade, &point, f, rho))
}

/// Component of `g` tangent to the unit circle at each load.
pub fn tangential(g: &[C64], phase: &PhaseConfig) -> Vec<C64> {
    g.iter()
        .zip(&phase.upsilon)
        .map(|(&gm, &u)| gm - u * (gm * u.conj()).re)
        .collect()
}

/// Evaluates a fixed load configuration with its optimal precoder.
pub fn evaluate(
    sample: &ChannelSample,
    surface: &Surface,
    phase: &PhaseConfig,
    power: f64,
    noise_var: f64,
) -> Result<PrecoderSolution> {
    let point = Cascade::new(sample, surface)?.evaluate(phase)?;
    PrecoderSolution::for_channel(&point.heff, power, noise_var)
}

/// Random initial loads drawn from `rng`, then [`optimize_inner_from`].
pub fn optimize_inner(
    sample: &ChannelSample,
    surface: &Surface,
    cfg: &InnerConfig,
    power: f64,
    noise_var: f64,
    rng: &mut impl Rng,
) -> Result<InnerOutcome> {
    let init = PhaseConfig::random(surface.elements(), rng);
    let cascade = Cascade::new(sample, surface)?;
    optimize_inner_from(&cascade, cfg, power, noise_var, &init)
}

fn try_point(
    cascade: &Cascade,
    phase: &PhaseConfig,
    power: f64,
    noise_var: f64,
) -> Result<Option<(CascadePoint, PrecoderSolution)>> {
    let point = match cascade.evaluate(phase) {
        Ok(p) => p,
        Err(Error::SingularConfiguration(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    match PrecoderSolution::for_channel(&point.heff, power, noise_var) {
        Ok(sol) => Ok(Some((point, sol))),
        Err(Error::Singular { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Alternates the closed-form precoder with backtracking projected-gradient
/// load steps, starting from `init`.
pub fn optimize_inner_from(
    cascade: &Cascade,
    cfg: &InnerConfig,
    power: f64,
    noise_var: f64,
    init: &PhaseConfig,
) -> Result<InnerOutcome> {
    cfg.validate()?;
    let phase = PhaseConfig::normalized(&init.upsilon);
    let point = cascade.evaluate(&phase)?;
    let mut sol = PrecoderSolution::for_channel(&point.heff, power, noise_var)?;
    let mut point = point;
    let mut history = vec![sol.mse];
    let mut step = cfg.phase_step;

    for _ in 0..cfg.max_iters {
        let g = phase_gradient_at(cascade, &point, &sol.f, sol.rho);
        let gmax = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(gmax > 0.0 && gmax.is_finite()) {
            break;
        }
        let mut accepted = None;
        while step >= MIN_STEP {
            let scale = step / gmax;
            let moved: Vec<C64> = point
                .phase
                .upsilon
                .iter()
                .zip(&g)
                .map(|(&u, &gm)| u - gm * scale)
                .collect();
            let cand = PhaseConfig::normalized(&moved);
            if let Some((p, s)) = try_point(cascade, &cand, power, noise_var)? {
                if s.mse <= sol.mse {
                    accepted = Some((p, s));
                    break;
                }
            }
            step *= cfg.backtrack;
        }
        let Some((p, s)) = accepted else { break };
        let rel = (sol.mse - s.mse) / sol.mse.max(f64::MIN_POSITIVE);
        point = p;
        sol = s;
        history.push(sol.mse);
        step = (step / cfg.backtrack).min(MAX_STEP.max(cfg.phase_step));
        if rel < cfg.tol {
            break;
        }
    }
    Ok(InnerOutcome {
        phase: point.phase.clone(),
        solution: sol,
        history,
        point,
    })
}
