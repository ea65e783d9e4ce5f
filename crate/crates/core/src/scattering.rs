//! Scattering-parameter descriptions of reflective and transmissive RISs.
//!
//! A reflective surface is described by its multi-port matrix `S_αα` and its
//! radiation pattern `S_αβ`, both restricted to `U diag(σ) V^H` with the fixed
//! frame `U = V = D ⊗ D` (two-dimensional DFT). Reciprocity is structural:
//! `S_βα` is always `S_αβ^T`. Terminating the ports with the load `Υ` yields
//! the effective (generally non-diagonal) phase-shift matrix
//!
//! ```text
//! Φ = S_βα (Υ^-1 - S_αα)^-1 S_αβ
//! ```
//!
//! A transmissive surface chains a receive pattern `S1`, the loads and a
//! transmit pattern `S2`: `Φ_T = S2 Υ S1`, with both patterns unitary.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{exact_sqrt, svd_economy, two_dft, CMatrix, Lu, C64, SINGULAR_RTOL};

/// Feasibility tolerance used by constraint checks and invariants.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Minimum relative singular value accepted by [`project_unitary`].
pub const UNITARY_PROJECTION_RTOL: f64 = 1e-12;

/// Tunable port loads, the diagonal of `Υ`. Entries have unit modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    pub upsilon: Vec<C64>,
}

impl PhaseConfig {
    pub fn ones(m: usize) -> Self {
        PhaseConfig {
            upsilon: vec![C64::new(1.0, 0.0); m],
        }
    }

    pub fn from_angles(theta: &[f64]) -> Self {
        PhaseConfig {
            upsilon: theta.iter().map(|&t| C64::from_polar(1.0, t)).collect(),
        }
    }

    /// Uniform random phases in `[0, 2π)`.
    pub fn random(m: usize, rng: &mut impl Rng) -> Self {
        let theta: Vec<f64> = (0..m)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        Self::from_angles(&theta)
    }

    /// Projects arbitrary complex loads onto the unit circle. Zero entries
    /// map to `1`.
    pub fn normalized(values: &[C64]) -> Self {
        PhaseConfig {
            upsilon: values
                .iter()
                .map(|&z| {
                    let r = z.norm();
                    if r > 0.0 && r.is_finite() {
                        z / r
                    } else {
                        C64::new(1.0, 0.0)
                    }
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.upsilon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upsilon.is_empty()
    }

    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_diag(&self.upsilon)
    }
}

/// Reflective RIS: spectra of `S_αα` and `S_αβ` in the fixed 2-DFT frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectiveScattering {
    sigma_aa: Vec<C64>,
    sigma_ab: Vec<C64>,
    frame: CMatrix,
    s_aa: CMatrix,
    s_ab: CMatrix,
}

impl ReflectiveScattering {
    /// Builds the state from raw spectra. Only dimensions are checked; use
    /// [`check_constraints`] or [`ReflectiveScattering::feasible`] for the
    /// physical constraints.
    pub fn from_spectra(sigma_aa: Vec<C64>, sigma_ab: Vec<C64>) -> Result<Self> {
        if sigma_aa.len() != sigma_ab.len() {
            return Err(Error::InvalidDimension(format!(
                "spectra lengths differ: {} vs {}",
                sigma_aa.len(),
                sigma_ab.len()
            )));
        }
        let frame = two_dft(sigma_aa.len())?;
        let frame_h = frame.adjoint();
        let s_aa = frame.mul_diag_right(&sigma_aa).matmul(&frame_h);
        let s_ab = frame.mul_diag_right(&sigma_ab).matmul(&frame_h);
        Ok(ReflectiveScattering {
            sigma_aa,
            sigma_ab,
            frame,
            s_aa,
            s_ab,
        })
    }

    /// Symmetrizes and lossless-projects the given spectra first.
    pub fn feasible(sigma_aa: &[C64], sigma_ab: &[C64]) -> Result<Self> {
        let aa = symmetrize(sigma_aa)?;
        let ab = symmetrize(sigma_ab)?;
        let (aa, ab) = project_lossless(&aa, &ab);
        Self::from_spectra(aa, ab)
    }

    /// The coupling-free model: `S_αα = 0`, `S_αβ = S_βα = I`, so `Φ = Υ`.
    pub fn conventional(m: usize) -> Result<Self> {
        Self::from_spectra(vec![C64::new(0.0, 0.0); m], vec![C64::new(1.0, 0.0); m])
    }

    pub fn elements(&self) -> usize {
        self.sigma_aa.len()
    }

    pub fn sigma_aa(&self) -> &[C64] {
        &self.sigma_aa
    }

    pub fn sigma_ab(&self) -> &[C64] {
        &self.sigma_ab
    }

    /// `U = V = D ⊗ D`.
    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    pub fn s_aa(&self) -> &CMatrix {
        &self.s_aa
    }

    pub fn s_ab(&self) -> &CMatrix {
        &self.s_ab
    }

    pub fn s_ba(&self) -> CMatrix {
        self.s_ab.transpose()
    }

    pub fn conj(&self) -> Self {
        Self::from_spectra(
            self.sigma_aa.iter().map(|z| z.conj()).collect(),
            self.sigma_ab.iter().map(|z| z.conj()).collect(),
        )
        .expect("dimensions already validated")
    }
}

/// Transmissive RIS: receive pattern `S1 = S_βα^(1)` and transmit pattern
/// `S2 = S_αβ^(2)`, both `M × M` unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissiveScattering {
    pub s1: CMatrix,
    pub s2: CMatrix,
}

impl TransmissiveScattering {
    pub fn new(s1: CMatrix, s2: CMatrix) -> Result<Self> {
        if !s1.is_square() || s1.shape() != s2.shape() {
            return Err(Error::InvalidDimension(format!(
                "radiation patterns must be equal square matrices, got {:?} and {:?}",
                s1.shape(),
                s2.shape()
            )));
        }
        Ok(TransmissiveScattering { s1, s2 })
    }

    pub fn identity(m: usize) -> Self {
        TransmissiveScattering {
            s1: CMatrix::identity(m),
            s2: CMatrix::identity(m),
        }
    }

    pub fn elements(&self) -> usize {
        self.s1.rows()
    }
}

/// Either kind of surface.
#[derive(Debug, Clone, PartialEq)]
pub enum Surface {
    Reflective(ReflectiveScattering),
    Transmissive(TransmissiveScattering),
}

impl Surface {
    pub fn elements(&self) -> usize {
        match self {
            Surface::Reflective(rs) => rs.elements(),
            Surface::Transmissive(ts) => ts.elements(),
        }
    }

    pub fn effective(&self, ph: &PhaseConfig) -> Result<CMatrix> {
        match self {
            Surface::Reflective(rs) => effective_reflective(rs, ph),
            Surface::Transmissive(ts) => Ok(effective_transmissive(ts, ph)),
        }
    }

    pub fn violations(&self) -> ConstraintReport {
        match self {
            Surface::Reflective(rs) => rs.violations(),
            Surface::Transmissive(ts) => ts.violations(),
        }
    }
}

fn singular_config(err: Error) -> Error {
    match err {
        Error::Singular { pivot, threshold } => Error::SingularConfiguration(format!(
            "Υ^-1 - S_αα is singular (pivot {pivot:e}, threshold {threshold:e})"
        )),
        other => other,
    }
}

/// `Υ^-1 - S_αα`.
pub(crate) fn port_matrix(rs: &ReflectiveScattering, ph: &PhaseConfig) -> Result<CMatrix> {
    if ph.len() != rs.elements() {
        return Err(Error::InvalidDimension(format!(
            "phase config has {} entries, surface has {}",
            ph.len(),
            rs.elements()
        )));
    }
    let mut x = rs.s_aa.scale(C64::new(-1.0, 0.0));
    for (i, u) in ph.upsilon.iter().enumerate() {
        x[(i, i)] += u.inv();
    }
    Ok(x)
}

/// LU of `Υ^-1 - S_αα`. Singularity is judged against the scale of the
/// operands (unit loads, `|σ_αα| ≤ 1`), not of the difference.
pub(crate) fn factor_port_matrix(rs: &ReflectiveScattering, ph: &PhaseConfig) -> Result<Lu> {
    let x = port_matrix(rs, ph)?;
    let scale = rs.s_aa.max_abs().max(1.0);
    Lu::factor_with_threshold(&x, SINGULAR_RTOL * scale * 100.0).map_err(singular_config)
}

/// `Φ = S_βα (Υ^-1 - S_αα)^-1 S_αβ`.
pub fn effective_reflective(rs: &ReflectiveScattering, ph: &PhaseConfig) -> Result<CMatrix> {
    let a = factor_port_matrix(rs, ph)?.solve(&CMatrix::identity(rs.elements()));
    Ok(rs.s_ba().matmul(&a).matmul(&rs.s_ab))
}

/// Order-`order` truncation of the multiple-reflection series
/// `Σ_l (Υ S_αα)^l Υ`, which approximates `(Υ^-1 - S_αα)^-1`.
pub fn neumann_partial(rs: &ReflectiveScattering, ph: &PhaseConfig, order: usize) -> CMatrix {
    let loop_gain = rs.s_aa.mul_diag_left(&ph.upsilon);
    let mut term = ph.matrix();
    let mut sum = term.clone();
    for _ in 0..order {
        term = loop_gain.matmul(&term);
        sum = sum.add(&term);
    }
    sum
}

/// `Φ_T = S2 Υ S1`.
pub fn effective_transmissive(ts: &TransmissiveScattering, ph: &PhaseConfig) -> CMatrix {
    ts.s2.mul_diag_right(&ph.upsilon).matmul(&ts.s1)
}

/// End-to-end `K × N` channel `H_ru^H Φ H_br`.
pub fn end_to_end(h_ru: &CMatrix, phi: &CMatrix, h_br: &CMatrix) -> Result<CMatrix> {
    let m = phi.rows();
    if !phi.is_square() {
        return Err(Error::DimensionMismatch {
            op: "end_to_end (phi)",
            expected: (m, m),
            got: phi.shape(),
        });
    }
    if h_ru.rows() != m {
        return Err(Error::DimensionMismatch {
            op: "end_to_end (h_ru)",
            expected: (m, h_ru.cols()),
            got: h_ru.shape(),
        });
    }
    if h_br.rows() != m {
        return Err(Error::DimensionMismatch {
            op: "end_to_end (h_br)",
            expected: (m, h_br.cols()),
            got: h_br.shape(),
        });
    }
    Ok(h_ru.adjoint().matmul(phi).matmul(h_br))
}

/// Index paired with `i` under the 2-D reversal `(p, q) → (-p mod m, -q mod m)`.
///
/// `(D ⊗ D)^2` is exactly this permutation, so `U diag(σ) V^H` is symmetric
/// iff `σ` is invariant under the pairing.
pub fn reversal_partner(i: usize, m: usize) -> usize {
    let (p, q) = (i / m, i % m);
    ((m - p) % m) * m + (m - q) % m
}

/// Averages a spectrum over the orbits of the reversal pairing.
pub fn symmetrize(sigma: &[C64]) -> Result<Vec<C64>> {
    let m = exact_sqrt(sigma.len()).ok_or_else(|| {
        Error::InvalidDimension(format!(
            "spectrum length {} is not a perfect square",
            sigma.len()
        ))
    })?;
    Ok((0..sigma.len())
        .map(|i| {
            let j = reversal_partner(i, m);
            if i == j {
                sigma[i]
            } else {
                (sigma[i] + sigma[j]) * 0.5
            }
        })
        .collect())
}

/// Closest lossless pair: each `(σ̃_αα,i, σ̃_αβ,i)` is scaled onto
/// `|σ_αα,i|² + |σ_αβ,i|² = 1`. A pair that is exactly zero maps to `(0, 1)`.
pub fn project_lossless(sigma_aa: &[C64], sigma_ab: &[C64]) -> (Vec<C64>, Vec<C64>) {
    assert_eq!(sigma_aa.len(), sigma_ab.len(), "spectra lengths differ");
    sigma_aa
        .iter()
        .zip(sigma_ab)
        .map(|(&a, &b)| {
            let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if norm > 0.0 && norm.is_finite() {
                (a / norm, b / norm)
            } else {
                (C64::new(0.0, 0.0), C64::new(1.0, 0.0))
            }
        })
        .unzip()
}

/// Frobenius-nearest unitary matrix, `Ũ Ṽ^H` from the SVD of `a`.
pub fn project_unitary(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::InvalidDimension(format!(
            "unitary projection needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let svd = svd_economy(a);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let smin = svd.s.last().copied().unwrap_or(0.0);
    if smax == 0.0 || smin <= UNITARY_PROJECTION_RTOL * smax {
        return Err(Error::AmbiguousProjection(smin));
    }
    Ok(svd.u.matmul(&svd.v.adjoint()))
}

/// Maximum violation of each constraint family. Families that do not apply
/// to the checked object are reported as zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConstraintReport {
    /// `max_m ||υ_m| - 1|`.
    pub unit_modulus: f64,
    /// `max_i ||σ_αα,i|² + |σ_αβ,i|² - 1|`.
    pub losslessness: f64,
    /// Largest pairing mismatch of the spectra, equivalently of `S - S^T`.
    pub symmetry: f64,
    /// Largest entry of `S S^H - I` (patterns or frame).
    pub unitarity: f64,
}

impl ConstraintReport {
    pub fn max(&self) -> f64 {
        self.unit_modulus
            .max(self.losslessness)
            .max(self.symmetry)
            .max(self.unitarity)
    }
}

pub trait Constrained {
    fn violations(&self) -> ConstraintReport;
}

fn unitarity_residual(a: &CMatrix) -> f64 {
    a.matmul(&a.adjoint())
        .max_abs_diff(&CMatrix::identity(a.rows()))
}

fn pairing_mismatch(sigma: &[C64], m: usize) -> f64 {
    (0..sigma.len())
        .map(|i| (sigma[i] - sigma[reversal_partner(i, m)]).norm())
        .fold(0.0, f64::max)
}

impl Constrained for ReflectiveScattering {
    fn violations(&self) -> ConstraintReport {
        let m = exact_sqrt(self.elements()).expect("validated on construction");
        let losslessness = self
            .sigma_aa
            .iter()
            .zip(&self.sigma_ab)
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max);
        ConstraintReport {
            unit_modulus: 0.0,
            losslessness,
            symmetry: pairing_mismatch(&self.sigma_aa, m).max(pairing_mismatch(&self.sigma_ab, m)),
            unitarity: unitarity_residual(&self.frame),
        }
    }
}

impl Constrained for TransmissiveScattering {
    fn violations(&self) -> ConstraintReport {
        ConstraintReport {
            unitarity: unitarity_residual(&self.s1).max(unitarity_residual(&self.s2)),
            ..ConstraintReport::default()
        }
    }
}

impl Constrained for PhaseConfig {
    fn violations(&self) -> ConstraintReport {
        ConstraintReport {
            unit_modulus: self
                .upsilon
                .iter()
                .map(|z| (z.norm() - 1.0).abs())
                .fold(0.0, f64::max),
            ..ConstraintReport::default()
        }
    }
}

pub fn check_constraints(x: &impl Constrained) -> ConstraintReport {
    x.violations()
}
