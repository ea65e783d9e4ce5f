//! Experiment specification and its flat `key = value` file format.
//!
//! Blank lines and `#` comments are ignored; every other line is
//! `key = value`. Unknown or repeated keys are rejected. Omitted physical
//! parameters take the default scenario values. The recognized keys are listed
//! in [`KEYS`]; `README.md` documents each one.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::{db_to_linear, dbm_to_watts, ChannelModel, ScenarioConfig};
use crate::error::{Error, Result};
use crate::inner_solver::InnerConfig;
use crate::outer::OuterConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Reflective,
    Transmissive,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Reflective => "reflective",
            Mode::Transmissive => "transmissive",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reflective" => Ok(Mode::Reflective),
            "transmissive" => Ok(Mode::Transmissive),
            other => Err(Error::Config(format!(
                "mode must be reflective or transmissive, got {other:?}"
            ))),
        }
    }
}

/// Scattering model evaluated in a result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Baseline {
    /// Scattering parameters optimized offline.
    Proposed,
    /// A fixed, seeded, non-optimized coupling matrix.
    FixedMc,
    /// No coupling, `Φ = Υ`.
    Conventional,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Proposed => "proposed",
            Baseline::FixedMc => "fixed_mc",
            Baseline::Conventional => "conventional",
        }
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Baseline::Proposed),
            "fixed_mc" => Ok(Baseline::FixedMc),
            "conventional" => Ok(Baseline::Conventional),
            other => Err(Error::Config(format!(
                "baseline must be proposed, fixed_mc or conventional, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKind {
    /// Transmit power in dBm.
    Power,
    /// RIS element count `M`.
    Elements,
    /// User count `K`.
    Users,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Power => "power",
            SweepKind::Elements => "elements",
            SweepKind::Users => "users",
        }
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(SweepKind::Power),
            "elements" => Ok(SweepKind::Elements),
            "users" => Ok(SweepKind::Users),
            other => Err(Error::Config(format!(
                "sweep must be power, elements or users, got {other:?}"
            ))),
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub channel: ChannelModel,
    /// `None` selects the defaults for the mode.
    pub baselines: Option<Vec<Baseline>>,
    pub sweep: SweepKind,
    pub values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,

    pub antennas: usize,
    pub elements: usize,
    pub users: usize,
    pub power_dbm: f64,
    pub noise_dbm: f64,
    pub paths_br: usize,
    pub paths_ru: usize,
    pub d_ris: f64,
    pub d_user_min: f64,
    pub d_user_max: f64,
    pub c0_db: f64,
    pub d0: f64,
    pub eta: f64,
    pub eta_bu: f64,
    pub num_bs: usize,
    pub elevation_deg: f64,

    pub outer: OuterConfig,
    pub inner: InnerConfig,
    /// Held-out channels per cell.
    pub eval_samples: usize,
    /// `|σ_αα|` of the fixed-coupling baseline before symmetrization.
    pub fixed_coupling: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            mode: Mode::Reflective,
            channel: ChannelModel::Parametric,
            baselines: None,
            sweep: SweepKind::Power,
            values: vec![50.0],
            trials: 1,
            seed: 1,
            out: PathBuf::from("results"),
            antennas: 32,
            elements: 64,
            users: 5,
            power_dbm: 50.0,
            noise_dbm: -100.0,
            paths_br: 8,
            paths_ru: 2,
            d_ris: 500.0,
            d_user_min: 10.0,
            d_user_max: 50.0,
            c0_db: -30.0,
            d0: 1.0,
            eta: 2.5,
            eta_bu: 3.7,
            num_bs: 4,
            elevation_deg: 60.0,
            outer: OuterConfig::default(),
            inner: InnerConfig::default(),
            eval_samples: 10,
            fixed_coupling: 0.3,
        }
    }
}

/// Every key accepted by [`parse_config`], in manifest order.
pub const KEYS: &[&str] = &[
    "mode",
    "channel",
    "baselines",
    "sweep",
    "values",
    "trials",
    "seed",
    "out",
    "antennas",
    "elements",
    "users",
    "power_dbm",
    "noise_dbm",
    "paths_br",
    "paths_ru",
    "d_ris",
    "d_user_min",
    "d_user_max",
    "c0_db",
    "d0",
    "eta",
    "eta_bu",
    "num_bs",
    "elevation_deg",
    "samples",
    "iterations",
    "step",
    "redraw",
    "halve_on_increase",
    "normalize_step",
    "inner_max_iters",
    "inner_tol",
    "inner_phase_step",
    "inner_backtrack",
    "eval_samples",
    "fixed_coupling",
];

fn parse_list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

fn parse_bool(value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, got {other:?}")),
    }
}

fn scalar<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("{value:?}: {e}"))
}

impl ExperimentSpec {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let res: std::result::Result<(), String> = (|| {
            match key {
                "mode" => self.mode = value.parse().map_err(|e: Error| e.to_string())?,
                "channel" => self.channel = value.parse().map_err(|e: Error| e.to_string())?,
                "baselines" => {
                    let list: Vec<Baseline> = parse_list(value)?;
                    self.baselines = Some(list);
                }
                "sweep" => self.sweep = value.parse().map_err(|e: Error| e.to_string())?,
                "values" => self.values = parse_list(value)?,
                "trials" => self.trials = scalar(value)?,
                "seed" => self.seed = scalar(value)?,
                "out" => self.out = PathBuf::from(value),
                "antennas" => self.antennas = scalar(value)?,
                "elements" => self.elements = scalar(value)?,
                "users" => self.users = scalar(value)?,
                "power_dbm" => self.power_dbm = scalar(value)?,
                "noise_dbm" => self.noise_dbm = scalar(value)?,
                "paths_br" => self.paths_br = scalar(value)?,
                "paths_ru" => self.paths_ru = scalar(value)?,
                "d_ris" => self.d_ris = scalar(value)?,
                "d_user_min" => self.d_user_min = scalar(value)?,
                "d_user_max" => self.d_user_max = scalar(value)?,
                "c0_db" => self.c0_db = scalar(value)?,
                "d0" => self.d0 = scalar(value)?,
                "eta" => self.eta = scalar(value)?,
                "eta_bu" => self.eta_bu = scalar(value)?,
                "num_bs" => self.num_bs = scalar(value)?,
                "elevation_deg" => self.elevation_deg = scalar(value)?,
                "samples" => self.outer.samples = scalar(value)?,
                "iterations" => self.outer.iterations = scalar(value)?,
                "step" => self.outer.step = scalar(value)?,
                "redraw" => self.outer.redraw = parse_bool(value)?,
                "halve_on_increase" => self.outer.halve_on_increase = parse_bool(value)?,
                "normalize_step" => self.outer.normalize = parse_bool(value)?,
                "inner_max_iters" => self.inner.max_iters = scalar(value)?,
                "inner_tol" => self.inner.tol = scalar(value)?,
                "inner_phase_step" => self.inner.phase_step = scalar(value)?,
                "inner_backtrack" => self.inner.backtrack = scalar(value)?,
                "eval_samples" => self.eval_samples = scalar(value)?,
                "fixed_coupling" => self.fixed_coupling = scalar(value)?,
                other => return Err(format!("unknown key {other:?}")),
            }
            Ok(())
        })();
        res.map_err(|msg| {
            if msg.starts_with("unknown key") {
                Error::Config(msg)
            } else {
                Error::Config(format!("{key}: {msg}"))
            }
        })
    }

    /// Baselines in effect: the configured list, or every applicable one.
    pub fn baselines(&self) -> Vec<Baseline> {
        match &self.baselines {
            Some(list) => list.clone(),
            None => match self.mode {
                Mode::Reflective => vec![Baseline::Proposed, Baseline::FixedMc, Baseline::Conventional],
                Mode::Transmissive => vec![Baseline::Proposed, Baseline::Conventional],
            },
        }
    }

    /// Scenario at the base point, before any sweep override.
    pub fn base_scenario(&self) -> ScenarioConfig {
        ScenarioConfig {
            antennas: self.antennas,
            elements: self.elements,
            users: self.users,
            power: dbm_to_watts(self.power_dbm),
            noise_var: dbm_to_watts(self.noise_dbm),
            paths_br: self.paths_br,
            paths_ru: self.paths_ru,
            d_ris: self.d_ris,
            d_user_range: (self.d_user_min, self.d_user_max),
            c0: db_to_linear(self.c0_db),
            d0: self.d0,
            eta: self.eta,
            eta_bu: self.eta_bu,
            num_bs: self.num_bs,
            model: self.channel,
            elevation: self.elevation_deg.to_radians(),
            seed: self.seed,
        }
    }

    /// Scenario with the sweep variable set to `value`.
    pub fn scenario_at(&self, value: f64) -> Result<ScenarioConfig> {
        let mut s = self.base_scenario();
        match self.sweep {
            SweepKind::Power => s.power = dbm_to_watts(value),
            SweepKind::Elements => s.elements = as_count("elements", value)?,
            SweepKind::Users => s.users = as_count("users", value)?,
        }
        Ok(s)
    }

    /// Checks every field and every sweep point.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("values: the sweep list is empty".into()));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials: must be at least 1".into()));
        }
        if self.eval_samples < 1 {
            return Err(Error::Config("eval_samples: must be at least 1".into()));
        }
        let baselines = self.baselines();
        if baselines.is_empty() {
            return Err(Error::Config("baselines: the list is empty".into()));
        }
        for (i, b) in baselines.iter().enumerate() {
            if baselines[..i].contains(b) {
                return Err(Error::Config(format!("baselines: {} listed twice", b.name())));
            }
        }
        if self.mode == Mode::Transmissive && baselines.contains(&Baseline::FixedMc) {
            return Err(Error::Config(
                "baselines: fixed_mc models mutual coupling and only applies to reflective mode".into(),
            ));
        }
        if !(self.fixed_coupling > 0.0 && self.fixed_coupling < 1.0) {
            return Err(Error::Config(format!(
                "fixed_coupling: must lie in (0, 1), got {}",
                self.fixed_coupling
            )));
        }
        if !self.power_dbm.is_finite() || !self.noise_dbm.is_finite() || !self.c0_db.is_finite() {
            return Err(Error::Config("power_dbm, noise_dbm and c0_db must be finite".into()));
        }
        self.outer.validate()?;
        self.inner.validate()?;
        for &v in &self.values {
            if !v.is_finite() {
                return Err(Error::Config(format!("values: {v} is not finite")));
            }
            self.scenario_at(v)?
                .validate()
                .map_err(|e| Error::Config(format!("at {} = {v}: {e}", self.sweep.name())))?;
        }
        Ok(())
    }

    /// The spec as `key = value` lines that [`parse_config`] reads back to
    /// an identical spec.
    pub fn to_config_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let mut lines: Vec<(&str, String)> = vec![
            ("mode", self.mode.name().into()),
            ("channel", self.channel.name().into()),
        ];
        if let Some(b) = &self.baselines {
            lines.push(("baselines", b.iter().map(|b| b.name()).collect::<Vec<_>>().join(",")));
        }
        lines.extend([
            ("sweep", self.sweep.name().into()),
            ("values", list(&self.values)),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("out", self.out.display().to_string()),
            ("antennas", self.antennas.to_string()),
            ("elements", self.elements.to_string()),
            ("users", self.users.to_string()),
            ("power_dbm", format!("{:?}", self.power_dbm)),
            ("noise_dbm", format!("{:?}", self.noise_dbm)),
            ("paths_br", self.paths_br.to_string()),
            ("paths_ru", self.paths_ru.to_string()),
            ("d_ris", format!("{:?}", self.d_ris)),
            ("d_user_min", format!("{:?}", self.d_user_min)),
            ("d_user_max", format!("{:?}", self.d_user_max)),
            ("c0_db", format!("{:?}", self.c0_db)),
            ("d0", format!("{:?}", self.d0)),
            ("eta", format!("{:?}", self.eta)),
            ("eta_bu", format!("{:?}", self.eta_bu)),
            ("num_bs", self.num_bs.to_string()),
            ("elevation_deg", format!("{:?}", self.elevation_deg)),
            ("samples", self.outer.samples.to_string()),
            ("iterations", self.outer.iterations.to_string()),
            ("step", format!("{:?}", self.outer.step)),
            ("redraw", self.outer.redraw.to_string()),
            ("halve_on_increase", self.outer.halve_on_increase.to_string()),
            ("normalize_step", self.outer.normalize.to_string()),
            ("inner_max_iters", self.inner.max_iters.to_string()),
            ("inner_tol", format!("{:?}", self.inner.tol)),
            ("inner_phase_step", format!("{:?}", self.inner.phase_step)),
            ("inner_backtrack", format!("{:?}", self.inner.backtrack)),
            ("eval_samples", self.eval_samples.to_string()),
            ("fixed_coupling", format!("{:?}", self.fixed_coupling)),
        ]);
        lines
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

fn as_count(name: &str, value: f64) -> Result<usize> {
    if value >= 1.0 && value.fract() == 0.0 && value < 1e9 {
        Ok(value as usize)
    } else {
        Err(Error::Config(format!("{name}: sweep value {value} is not a positive integer")))
    }
}

/// Parses config text. Errors name the line and the field.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::default();
    let mut seen: Vec<String> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {line_no}: expected `key = value`, got {line:?}")));
        };
        let (key, value) = (key.trim(), value.trim());
        if seen.iter().any(|k| k == key) {
            return Err(Error::Config(format!("line {line_no}: {key} is set twice")));
        }
        spec.set(key, value)
            .map_err(|e| Error::Config(format!("line {line_no}: {}", strip_prefix(&e))))?;
        seen.push(key.to_string());
    }
    spec.validate()?;
    Ok(spec)
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(msg) => msg.clone(),
        other => other.to_string(),
    }
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}
