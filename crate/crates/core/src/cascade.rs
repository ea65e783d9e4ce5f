//! Per-sample evaluation of the end-to-end channel for varying loads.
//!
//! For a fixed channel sample and scattering state the factors that do not
//! depend on `Υ` are formed once:
//!
//! ```text
//! reflective:   Heff = (H_ru^H S_βα) (Υ^-1 - S_αα)^-1 (S_αβ H_br)
//! transmissive: Heff = (H_ru^H S2) Υ (S1 H_br)
//! ```
//!
//! so each load update costs one `M × M` LU factorization (reflective) or a
//! scaled product (transmissive) instead of forming `Φ` explicitly.

use crate::channel::ChannelSample;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, Lu, C64};
use crate::scattering::{factor_port_matrix, PhaseConfig, ReflectiveScattering, Surface};

/// `Υ`-independent factors of one (sample, surface) pair.
#[derive(Debug, Clone)]
pub struct Cascade<'a> {
    surface: &'a Surface,
    /// `H_ru^H S_βα` or `H_ru^H S2` (`K × M`).
    left: CMatrix,
    /// `S_αβ H_br` or `S1 H_br` (`M × N`).
    right: CMatrix,
}

/// Cascade evaluated at a particular `Υ`.
#[derive(Debug, Clone)]
pub struct CascadePoint {
    pub phase: PhaseConfig,
    /// `K × N` end-to-end channel.
    pub heff: CMatrix,
    lu: Option<Lu>,
    /// `A · right` (reflective) or `Υ · right` (transmissive).
    inner_right: CMatrix,
}

impl<'a> Cascade<'a> {
    pub fn new(sample: &ChannelSample, surface: &'a Surface) -> Result<Self> {
        let m = surface.elements();
        if sample.elements() != m {
            return Err(Error::InvalidDimension(format!(
                "channel has {} RIS elements, surface has {m}",
                sample.elements()
            )));
        }
        let h_ru_h = sample.h_ru.adjoint();
        let (left, right) = match surface {
            Surface::Reflective(rs) => (
                h_ru_h.matmul(&rs.s_ba()),
                rs.s_ab().matmul(&sample.h_br),
            ),
            Surface::Transmissive(ts) => (h_ru_h.matmul(&ts.s2), ts.s1.matmul(&sample.h_br)),
        };
        Ok(Cascade {
            surface,
            left,
            right,
        })
    }

    pub fn surface(&self) -> &Surface {
        self.surface
    }

    pub fn users(&self) -> usize {
        self.left.rows()
    }

    pub fn evaluate(&self, phase: &PhaseConfig) -> Result<CascadePoint> {
        match self.surface {
            Surface::Reflective(rs) => {
                let lu = factor_port_matrix(rs, phase)?;
                let inner_right = lu.solve(&self.right);
                let heff = self.left.matmul(&inner_right);
                Ok(CascadePoint {
                    phase: phase.clone(),
                    heff,
                    lu: Some(lu),
                    inner_right,
                })
            }
            Surface::Transmissive(ts) => {
                if phase.len() != ts.elements() {
                    return Err(Error::InvalidDimension(format!(
                        "phase config has {} entries, surface has {}",
                        phase.len(),
                        ts.elements()
                    )));
                }
                let inner_right = self.right.mul_diag_left(&phase.upsilon);
                let heff = self.left.matmul(&inner_right);
                Ok(CascadePoint {
                    phase: phase.clone(),
                    heff,
                    lu: None,
                    inner_right,
                })
            }
        }
    }

    /// Factors of the load sensitivity at `point` for precoder `(f, rho)`:
    /// `(L^T, R)` with `dHeff·ρF = L dΥ' R`, where `dΥ' = dΥ` (transmissive)
    /// or `Υ^-1 dΥ Υ^-1` (reflective). `L^T` is `M × K`, `R` is `M × K`.
    pub(crate) fn sensitivity(&self, point: &CascadePoint, f: &CMatrix, rho: f64) -> (CMatrix, CMatrix) {
        let scale = C64::new(rho, 0.0);
        match &point.lu {
            Some(lu) => {
                // L = ρ left A,  R = A right F
                let lt = lu.solve_transposed(&self.left.transpose()).scale(scale);
                let r = point.inner_right.matmul(f);
                (lt, r)
            }
            None => (self.left.transpose().scale(scale), self.right.matmul(f)),
        }
    }

    /// `A right F` for reflective surfaces (`M × K`), where `A` is the port
    /// inverse. Panics for transmissive points.
    pub(crate) fn port_right(&self, point: &CascadePoint, f: &CMatrix) -> CMatrix {
        assert!(point.lu.is_some(), "port_right needs a reflective point");
        point.inner_right.matmul(f)
    }

    /// `A^T left^T ρ` for reflective surfaces (`M × K`).
    pub(crate) fn port_left_t(&self, point: &CascadePoint, rho: f64) -> CMatrix {
        let lu = point.lu.as_ref().expect("port_left_t needs a reflective point");
        lu.solve_transposed(&self.left.transpose()).scale(C64::new(rho, 0.0))
    }

    /// `Υ right` for transmissive points.
    pub(crate) fn loaded_right<'p>(&self, point: &'p CascadePoint) -> &'p CMatrix {
        &point.inner_right
    }

    pub(crate) fn reflective(&self) -> Option<&ReflectiveScattering> {
        match self.surface {
            Surface::Reflective(rs) => Some(rs),
            Surface::Transmissive(_) => None,
        }
    }
}

/// `Σ_l X[i, l] Y[i, l]` for every row `i`.
pub(crate) fn row_dots(x: &CMatrix, y: &CMatrix) -> Vec<C64> {
    assert_eq!(x.shape(), y.shape());
    (0..x.rows())
        .map(|i| x.row(i).iter().zip(y.row(i)).map(|(a, b)| a * b).sum())
        .collect()
}
