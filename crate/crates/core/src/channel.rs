//! Channel realizations for the BS → RIS → user links.
//!
//! Two generators are provided:
//!
//! * **parametric**: a sum of `Q` plane-wave paths with `CN(0,1)` gains and
//!   uniformly drawn angles, scaled by the distance path loss;
//! * **geometric**: one or more base stations on a circle around the RIS and
//!   users in an annulus, one path per link, angles and path loss taken from
//!   the positions.
//!
//! Arrays use half-wavelength spacing. The BS is a ULA with entries
//! `exp(iπ n sin φ)`; the RIS is a square UPA whose element `(p, q)` (row-major
//! flattened) is `exp(iπ (p sin φ cos ψ + q sin φ sin ψ))`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{exact_sqrt, rank, CMatrix, C64};
use crate::seeding::{stream_rng, Purpose};

/// Redraws allowed before a rank-deficient BS–RIS channel is reported.
pub const MAX_REDRAWS: usize = 100;
const RANK_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    Parametric,
    Geometric,
}

impl ChannelModel {
    pub fn name(self) -> &'static str {
        match self {
            ChannelModel::Parametric => "parametric",
            ChannelModel::Geometric => "geometric",
        }
    }
}

impl std::str::FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parametric" => Ok(ChannelModel::Parametric),
            "geometric" => Ok(ChannelModel::Geometric),
            other => Err(Error::Config(format!(
                "channel must be parametric or geometric, got {other:?}"
            ))),
        }
    }
}

/// Physical scenario: array sizes, powers, geometry and propagation constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// BS antennas `N`.
    pub antennas: usize,
    /// RIS elements `M` (perfect square).
    pub elements: usize,
    /// Single-antenna users `K`.
    pub users: usize,
    /// Total transmit power in watts.
    pub power: f64,
    /// Receiver noise variance in watts.
    pub noise_var: f64,
    pub paths_br: usize,
    pub paths_ru: usize,
    /// BS–RIS distance in meters (circle radius in geometric mode).
    pub d_ris: f64,
    /// RIS–user distance range in meters.
    pub d_user_range: (f64, f64),
    /// Path loss at the reference distance, linear.
    pub c0: f64,
    /// Reference distance in meters.
    pub d0: f64,
    /// BS–RIS and RIS–user path-loss exponent.
    pub eta: f64,
    /// BS–user exponent. The direct link is blocked, so generators ignore it.
    pub eta_bu: f64,
    /// Number of base stations in geometric mode.
    pub num_bs: usize,
    pub model: ChannelModel,
    /// Polar angle (from the RIS axis) at which BSs and users are seen in
    /// geometric mode. `π/2` (everything at the RIS height) aliases opposite
    /// azimuths at half-wavelength spacing, so the default is `π/3`.
    pub elevation: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            antennas: 32,
            elements: 64,
            users: 5,
            power: dbm_to_watts(50.0),
            noise_var: dbm_to_watts(-100.0),
            paths_br: 8,
            paths_ru: 2,
            d_ris: 500.0,
            d_user_range: (10.0, 50.0),
            c0: db_to_linear(-30.0),
            d0: 1.0,
            eta: 2.5,
            eta_bu: 3.7,
            num_bs: 4,
            model: ChannelModel::Parametric,
            elevation: PI / 3.0,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    /// Checks the system-model invariants (`K < N`, `M > K`, `M = m²`,
    /// positive physical quantities).
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.users == 0 {
            return fail("users must be at least 1".into());
        }
        if self.users >= self.antennas {
            return fail(format!(
                "users ({}) must be fewer than antennas ({})",
                self.users, self.antennas
            ));
        }
        if self.elements <= self.users {
            return fail(format!(
                "elements ({}) must exceed users ({})",
                self.elements, self.users
            ));
        }
        if exact_sqrt(self.elements).is_none() {
            return fail(format!(
                "elements ({}) must be a perfect square (square planar RIS)",
                self.elements
            ));
        }
        for (name, v) in [
            ("power", self.power),
            ("noise_var", self.noise_var),
            ("d_ris", self.d_ris),
            ("c0", self.c0),
            ("d0", self.d0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be strictly positive, got {v}"));
            }
        }
        let (lo, hi) = self.d_user_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return fail(format!("user distance range [{lo}, {hi}] is invalid"));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return fail(format!("eta must be non-negative, got {}", self.eta));
        }
        match self.model {
            ChannelModel::Parametric => {
                if self.paths_br == 0 || self.paths_ru == 0 {
                    return fail("path counts must be at least 1".into());
                }
            }
            ChannelModel::Geometric => {
                if self.num_bs == 0 {
                    return fail("num_bs must be at least 1".into());
                }
                if !self.antennas.is_multiple_of(self.num_bs) {
                    return fail(format!(
                        "antennas ({}) must be divisible by num_bs ({})",
                        self.antennas, self.num_bs
                    ));
                }
                if self.users > self.num_bs {
                    return fail(format!(
                        "geometric mode gives a rank-{} BS-RIS channel; users ({}) cannot exceed it",
                        self.num_bs, self.users
                    ));
                }
            }
        }
        Ok(())
    }
}

/// One channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    /// BS → RIS, `M × N`.
    pub h_br: CMatrix,
    /// RIS → users, `M × K`; column `k` is user `k`'s channel.
    pub h_ru: CMatrix,
}

impl ChannelSample {
    pub fn new(h_br: CMatrix, h_ru: CMatrix) -> Result<Self> {
        if h_br.rows() != h_ru.rows() {
            return Err(Error::DimensionMismatch {
                op: "channel sample",
                expected: (h_br.rows(), h_ru.cols()),
                got: h_ru.shape(),
            });
        }
        if !h_br.is_finite() || !h_ru.is_finite() {
            return Err(Error::Domain("channel entries must be finite".into()));
        }
        Ok(ChannelSample { h_br, h_ru })
    }

    pub fn elements(&self) -> usize {
        self.h_br.rows()
    }

    pub fn antennas(&self) -> usize {
        self.h_br.cols()
    }

    pub fn users(&self) -> usize {
        self.h_ru.cols()
    }

    pub fn conj(&self) -> Self {
        ChannelSample {
            h_br: self.h_br.conj(),
            h_ru: self.h_ru.conj(),
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Distance path-loss gain `C0 (d/d0)^(-η)`.
pub fn path_loss(d: f64, c0: f64, d0: f64, eta: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {d}")));
    }
    Ok(c0 * (d / d0).powf(-eta))
}

pub fn steering_bs(phi: f64, n: usize) -> Vec<C64> {
    let s = phi.sin();
    (0..n)
        .map(|i| C64::from_polar(1.0, PI * i as f64 * s))
        .collect()
}

pub fn steering_ris(phi: f64, psi: f64, elements: usize) -> Result<Vec<C64>> {
    let m = exact_sqrt(elements).ok_or_else(|| {
        Error::InvalidDimension(format!("RIS size {elements} is not a perfect square"))
    })?;
    let (u, v) = (phi.sin() * psi.cos(), phi.sin() * psi.sin());
    let mut out = Vec::with_capacity(elements);
    for p in 0..m {
        for q in 0..m {
            out.push(C64::from_polar(1.0, PI * (p as f64 * u + q as f64 * v)));
        }
    }
    Ok(out)
}

fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn add_outer(target: &mut CMatrix, col: &[C64], row: &[C64], col_offset: usize, gain: C64) {
    for (i, &a) in col.iter().enumerate() {
        let ga = gain * a;
        for (j, &b) in row.iter().enumerate() {
            target[(i, col_offset + j)] += ga * b;
        }
    }
}

fn has_rank(h_br: &CMatrix, k: usize) -> bool {
    rank(h_br, RANK_RTOL) >= k
}

fn draw_parametric(cfg: &ScenarioConfig, rng: &mut impl Rng) -> Result<ChannelSample> {
    let (m, n, k) = (cfg.elements, cfg.antennas, cfg.users);
    let gain_br = path_loss(cfg.d_ris, cfg.c0, cfg.d0, cfg.eta)?.sqrt();
    let mut h_br = CMatrix::zeros(m, n);
    for _ in 0..cfg.paths_br {
        let c = complex_gaussian(rng);
        let elev: f64 = rng.random_range(0.0..PI);
        let azim: f64 = rng.random_range(0.0..2.0 * PI);
        let depart: f64 = rng.random_range(0.0..PI);
        let a_ris = steering_ris(elev, azim, m)?;
        let a_bs = steering_bs(depart, n);
        add_outer(&mut h_br, &a_ris, &a_bs, 0, c * gain_br);
    }
    let (lo, hi) = cfg.d_user_range;
    let mut h_ru = CMatrix::zeros(m, k);
    for user in 0..k {
        let d = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let gain = path_loss(d, cfg.c0, cfg.d0, cfg.eta)?.sqrt();
        for _ in 0..cfg.paths_ru {
            let c = complex_gaussian(rng);
            let elev: f64 = rng.random_range(0.0..PI);
            let azim: f64 = rng.random_range(0.0..2.0 * PI);
            let a_ris = steering_ris(elev, azim, m)?;
            for (i, a) in a_ris.iter().enumerate() {
                h_ru[(i, user)] += c * gain * a;
            }
        }
    }
    ChannelSample::new(h_br, h_ru)
}

/// Parametric multipath realization. Redraws (up to [`MAX_REDRAWS`] times)
/// until `rank(H_br) ≥ K`.
pub fn gen_parametric(cfg: &ScenarioConfig, rng: &mut impl Rng) -> Result<ChannelSample> {
    for _ in 0..MAX_REDRAWS {
        let sample = draw_parametric(cfg, rng)?;
        if has_rank(&sample.h_br, cfg.users) {
            return Ok(sample);
        }
    }
    Err(Error::GenerationFailure(format!(
        "BS-RIS channel rank stayed below {} after {MAX_REDRAWS} draws",
        cfg.users
    )))
}

/// Positions used by the geometric model, RIS at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricLayout {
    /// Angular position of each BS on the circle of radius `d_ris`.
    pub bs_angles: Vec<f64>,
    /// `(distance, azimuth)` of each user as seen from the RIS.
    pub users: Vec<(f64, f64)>,
}

pub fn geometric_layout(cfg: &ScenarioConfig, rng: &mut impl Rng) -> GeometricLayout {
    let bs_angles = (0..cfg.num_bs)
        .map(|b| 2.0 * PI * b as f64 / cfg.num_bs as f64)
        .collect();
    let (lo, hi) = cfg.d_user_range;
    let users = (0..cfg.users)
        .map(|_| {
            // uniform over the annulus area
            let r2: f64 = if hi > lo {
                rng.random_range(lo * lo..hi * hi)
            } else {
                lo * lo
            };
            let az: f64 = rng.random_range(0.0..2.0 * PI);
            (r2.sqrt(), az)
        })
        .collect();
    GeometricLayout { bs_angles, users }
}

fn draw_geometric(cfg: &ScenarioConfig, rng: &mut impl Rng) -> Result<ChannelSample> {
    let (m, n, k) = (cfg.elements, cfg.antennas, cfg.users);
    let per_bs = n / cfg.num_bs;
    let layout = geometric_layout(cfg, rng);
    let gain_br = path_loss(cfg.d_ris, cfg.c0, cfg.d0, cfg.eta)?.sqrt();
    let mut h_br = CMatrix::zeros(m, n);
    for (b, &theta) in layout.bs_angles.iter().enumerate() {
        // ULA axis along x: the departure angle toward the RIS (at the
        // origin) has sine equal to the x-component of the unit direction.
        let depart = (-theta.cos()).clamp(-1.0, 1.0).asin();
        let a_ris = steering_ris(cfg.elevation, theta, m)?;
        let a_bs = steering_bs(depart, per_bs);
        let c = complex_gaussian(rng);
        add_outer(&mut h_br, &a_ris, &a_bs, b * per_bs, c * gain_br);
    }
    let mut h_ru = CMatrix::zeros(m, k);
    for (user, &(d, az)) in layout.users.iter().enumerate() {
        let gain = path_loss(d, cfg.c0, cfg.d0, cfg.eta)?.sqrt();
        let c = complex_gaussian(rng);
        let a_ris = steering_ris(cfg.elevation, az, m)?;
        for (i, a) in a_ris.iter().enumerate() {
            h_ru[(i, user)] = c * gain * a;
        }
    }
    ChannelSample::new(h_br, h_ru)
}

/// Geometric multi-BS realization.
pub fn gen_geometric(cfg: &ScenarioConfig, rng: &mut impl Rng) -> Result<ChannelSample> {
    if cfg.num_bs == 0 || !cfg.antennas.is_multiple_of(cfg.num_bs) {
        return Err(Error::Config(format!(
            "antennas ({}) must be divisible by num_bs ({})",
            cfg.antennas, cfg.num_bs
        )));
    }
    for _ in 0..MAX_REDRAWS {
        let sample = draw_geometric(cfg, rng)?;
        if has_rank(&sample.h_br, cfg.users) {
            return Ok(sample);
        }
    }
    Err(Error::GenerationFailure(format!(
        "geometric BS-RIS channel rank stayed below {} after {MAX_REDRAWS} draws",
        cfg.users
    )))
}

pub fn generate(cfg: &ScenarioConfig, rng: &mut impl Rng) -> Result<ChannelSample> {
    match cfg.model {
        ChannelModel::Parametric => gen_parametric(cfg, rng),
        ChannelModel::Geometric => gen_geometric(cfg, rng),
    }
}

/// Sample `index` of the given purpose, independent of every other index.
pub fn draw_sample(cfg: &ScenarioConfig, purpose: Purpose, index: u64) -> Result<ChannelSample> {
    let mut rng = stream_rng(cfg.seed, purpose, index);
    generate(cfg, &mut rng)
}

/// Samples `offset..offset + count` of the given purpose.
pub fn draw_samples(
    cfg: &ScenarioConfig,
    purpose: Purpose,
    offset: u64,
    count: usize,
) -> Result<Vec<ChannelSample>> {
    (0..count as u64)
        .map(|i| draw_sample(cfg, purpose, offset + i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::stream_rng;

    fn desk() -> ScenarioConfig {
        ScenarioConfig {
            antennas: 8,
            elements: 16,
            users: 2,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn path_loss_values() {
        assert!((path_loss(1.0, 1e-3, 1.0, 2.5).unwrap() - 1e-3).abs() < 1e-18);
        let l = path_loss(100.0, 1e-3, 1.0, 2.5).unwrap();
        assert!((l - 1e-8).abs() < 1e-20);
        assert!(path_loss(10.0, 1e-3, 1.0, 2.5).unwrap() > path_loss(50.0, 1e-3, 1.0, 2.5).unwrap());
        assert!(matches!(path_loss(0.0, 1e-3, 1.0, 2.5), Err(Error::Domain(_))));
        assert!(matches!(path_loss(-3.0, 1e-3, 1.0, 2.5), Err(Error::Domain(_))));
    }

    #[test]
    fn table_defaults() {
        let cfg = ScenarioConfig::default();
        assert!((cfg.c0 - 1e-3).abs() < 1e-15);
        assert!((cfg.noise_var - 1e-13).abs() < 1e-25);
        assert!((cfg.power - 100.0).abs() < 1e-9);
        assert_eq!((cfg.paths_br, cfg.paths_ru), (8, 2));
    }

    #[test]
    fn steering_vectors() {
        assert!(steering_bs(0.0, 5).iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
        let v = steering_bs(PI / 2.0, 2);
        assert!((v[1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        let r = steering_ris(PI / 2.0, 0.0, 4).unwrap();
        let expected = [1.0, 1.0, -1.0, -1.0];
        for (z, e) in r.iter().zip(expected) {
            assert!((z - C64::new(e, 0.0)).norm() < 1e-12);
        }
        assert!(steering_ris(0.0, 1.3, 9).unwrap().iter().all(|z| (z - 1.0).norm() < 1e-15));
        assert!(matches!(steering_ris(0.1, 0.2, 15), Err(Error::InvalidDimension(_))));
        for z in steering_ris(0.7, 2.1, 16).unwrap().into_iter().chain(steering_bs(1.1, 7)) {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parametric_rank_and_determinism() {
        let cfg = desk();
        let a = gen_parametric(&cfg, &mut stream_rng(9, Purpose::Misc, 0)).unwrap();
        let b = gen_parametric(&cfg, &mut stream_rng(9, Purpose::Misc, 0)).unwrap();
        assert_eq!(a, b);
        let r = rank(&a.h_br, 1e-10);
        assert!(r >= cfg.users && r <= cfg.paths_br);
        assert_eq!(a.h_br.shape(), (16, 8));
        assert_eq!(a.h_ru.shape(), (16, 2));
    }

    #[test]
    fn parametric_mean_energy() {
        // E‖H_br‖² = L·Q·M·N: CN(0,1) gains, unit-modulus steering entries
        let cfg = ScenarioConfig {
            antennas: 4,
            elements: 9,
            users: 1,
            ..ScenarioConfig::default()
        };
        let l = path_loss(cfg.d_ris, cfg.c0, cfg.d0, cfg.eta).unwrap();
        let draws = 10_000;
        let mut rng = stream_rng(21, Purpose::Misc, 0);
        let mean: f64 = (0..draws)
            .map(|_| draw_parametric(&cfg, &mut rng).unwrap().h_br.frobenius_norm_sqr())
            .sum::<f64>()
            / draws as f64;
        let expected = l * (cfg.paths_br * cfg.elements * cfg.antennas) as f64;
        assert!((mean / expected - 1.0).abs() < 0.05, "mean {mean} expected {expected}");
    }

    #[test]
    fn geometric_layout_and_gains() {
        let cfg = ScenarioConfig {
            model: ChannelModel::Geometric,
            num_bs: 4,
            ..desk()
        };
        let layout = geometric_layout(&cfg, &mut stream_rng(3, Purpose::Misc, 0));
        let deg: Vec<f64> = layout.bs_angles.iter().map(|a| a.to_degrees()).collect();
        for (d, e) in deg.iter().zip([0.0, 90.0, 180.0, 270.0]) {
            assert!((d - e).abs() < 1e-9);
        }
        let (hi, lo) = (
            path_loss(10.0, cfg.c0, cfg.d0, cfg.eta).unwrap(),
            path_loss(50.0, cfg.c0, cfg.d0, cfg.eta).unwrap(),
        );
        for &(d, _) in &layout.users {
            let g = path_loss(d, cfg.c0, cfg.d0, cfg.eta).unwrap();
            assert!(g >= lo && g <= hi);
        }
        let sample = gen_geometric(&cfg, &mut stream_rng(3, Purpose::Misc, 1)).unwrap();
        assert_eq!(sample.h_br.shape(), (16, 8));
        assert_eq!(rank(&sample.h_br, 1e-10), 4);
    }

    #[test]
    fn geometric_single_bs() {
        let cfg = ScenarioConfig {
            model: ChannelModel::Geometric,
            num_bs: 1,
            users: 1,
            ..desk()
        };
        cfg.validate().unwrap();
        let s = gen_geometric(&cfg, &mut stream_rng(1, Purpose::Misc, 0)).unwrap();
        assert_eq!(rank(&s.h_br, 1e-10), 1);
    }

    #[test]
    fn geometric_rejects_uneven_split() {
        let cfg = ScenarioConfig {
            model: ChannelModel::Geometric,
            num_bs: 3,
            ..desk()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(matches!(
            gen_geometric(&cfg, &mut stream_rng(1, Purpose::Misc, 0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn validation_rules() {
        assert!(desk().validate().is_ok());
        let bad = ScenarioConfig { elements: 15, ..desk() };
        let msg = bad.validate().unwrap_err().to_string();
        assert!(msg.contains("perfect square"), "{msg}");
        assert!(ScenarioConfig { users: 8, ..desk() }.validate().is_err());
        assert!(ScenarioConfig { noise_var: 0.0, ..desk() }.validate().is_err());
    }

    #[test]
    fn rank_deficiency_exhausts_redraws() {
        let cfg = ScenarioConfig {
            paths_br: 1,
            users: 2,
            ..desk()
        };
        let err = gen_parametric(&cfg, &mut stream_rng(1, Purpose::Misc, 0)).unwrap_err();
        assert!(matches!(err, Error::GenerationFailure(_)));
    }

    #[test]
    fn indexed_samples_do_not_depend_on_batch() {
        let cfg = desk();
        let batch = draw_samples(&cfg, Purpose::Train, 0, 3).unwrap();
        assert_eq!(batch[2], draw_sample(&cfg, Purpose::Train, 2).unwrap());
        assert_ne!(batch[0], draw_sample(&cfg, Purpose::Eval, 0).unwrap());
    }
}
