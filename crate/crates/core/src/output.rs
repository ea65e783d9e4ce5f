//! Result files: CSV table, run manifest, scattering states and traces.
//!
//! Floating-point values are written with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::ResultTable;
use crate::numerics::{exact_sqrt, CMatrix, C64};
use crate::scattering::{ReflectiveScattering, Surface, TransmissiveScattering};

pub const CSV_HEADER: &str =
    "sweep_name,sweep_value,baseline,mode,channel_model,trials,mean_sum_rate,std_sum_rate,mean_mse,iters";

const STATE_MAGIC: &str = "RIS-SCATTER";
const STATE_VERSION: &str = "v1";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// The results table as CSV text.
pub fn results_csv(table: &ResultTable) -> String {
    let spec = &table.spec;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in &table.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            spec.sweep.name(),
            num(c.value),
            c.baseline.name(),
            spec.mode.name(),
            spec.channel.name(),
            c.trials,
            num(c.mean_sum_rate),
            num(c.std_sum_rate),
            num(c.mean_mse),
            c.iters
        );
    }
    out
}

pub const TRIALS_HEADER: &str = "sweep_value,baseline,trial,seed,sum_rate,mse,iters,status";

/// One row per trial, in (sweep value, baseline, trial) order.
pub fn trials_csv(table: &ResultTable) -> String {
    let mut out = String::from(TRIALS_HEADER);
    out.push('\n');
    for r in &table.records {
        let (rate, mse, iters, status) = match &r.outcome {
            Ok(o) => (o.mean_sum_rate, o.mean_mse, o.iterations, "ok"),
            Err(_) => (f64::NAN, f64::NAN, 0, "failed"),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(r.value),
            r.baseline.name(),
            r.trial,
            r.seed,
            num(rate),
            num(mse),
            iters,
            status
        );
    }
    out
}

/// Manifest text: the resolved config followed by `#` lines with the
/// software version, per-cell seeds and failures. It loads as a config.
pub fn manifest_text(table: &ResultTable) -> String {
    let spec = &table.spec;
    let mut out = String::new();
    let _ = writeln!(out, "# ris-sim run manifest");
    let _ = writeln!(out, "# version {}", env!("CARGO_PKG_VERSION"));
    out.push_str(&spec.to_config_text());
    let _ = writeln!(out, "# fixed_mc coupling magnitude {:?}, seed {}", spec.fixed_coupling, spec.seed);
    for r in &table.records {
        let status = match &r.outcome {
            Ok(_) => "ok".to_string(),
            Err(e) => format!("failed: {e}"),
        };
        let _ = writeln!(
            out,
            "# cell {}={:?} baseline={} trial={} seed={} {}",
            spec.sweep.name(),
            r.value,
            r.baseline.name(),
            r.trial,
            r.seed,
            status
        );
    }
    out
}

fn write_row(out: &mut String, values: &[C64]) {
    let row: Vec<String> = values.iter().map(|z| format!("{},{}", num(z.re), num(z.im))).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// Serializes a scattering state: a header line
/// `RIS-SCATTER v1 <mode> <M>`, then comma-separated `re,im` pairs. A
/// reflective state has two rows (`σ_αα`, `σ_αβ`); a transmissive state has
/// the `M` rows of `S1` followed by the `M` rows of `S2`.
pub fn state_text(surface: &Surface) -> String {
    let mut out = String::new();
    match surface {
        Surface::Reflective(rs) => {
            let _ = writeln!(out, "{STATE_MAGIC} {STATE_VERSION} reflective {}", rs.elements());
            write_row(&mut out, rs.sigma_aa());
            write_row(&mut out, rs.sigma_ab());
        }
        Surface::Transmissive(ts) => {
            let _ = writeln!(out, "{STATE_MAGIC} {STATE_VERSION} transmissive {}", ts.elements());
            for s in [&ts.s1, &ts.s2] {
                for i in 0..s.rows() {
                    write_row(&mut out, s.row(i));
                }
            }
        }
    }
    out
}

fn parse_row(line: &str, m: usize, line_no: usize) -> Result<Vec<C64>> {
    let bad = |msg: String| Error::Config(format!("state line {line_no}: {msg}"));
    let nums = line
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}"))))
        .collect::<Result<Vec<f64>>>()?;
    if nums.len() != 2 * m {
        return Err(bad(format!("expected {} numbers, got {}", 2 * m, nums.len())));
    }
    Ok(nums.chunks(2).map(|p| C64::new(p[0], p[1])).collect())
}

/// Parses [`state_text`] output.
pub fn parse_state(text: &str) -> Result<Surface> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let parts: Vec<&str> = header.split_whitespace().collect();
    let [magic, version, mode, m] = parts[..] else {
        return Err(Error::Config(format!("state header is malformed: {header:?}")));
    };
    if magic != STATE_MAGIC || version != STATE_VERSION {
        return Err(Error::Config(format!("unsupported state header {header:?}")));
    }
    let m: usize = m
        .parse()
        .map_err(|e| Error::Config(format!("state header element count {m:?}: {e}")))?;
    let rows = lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_row(l, m, i + 2))
        .collect::<Result<Vec<_>>>()?;
    match mode {
        "reflective" => {
            let [aa, ab] = <[Vec<C64>; 2]>::try_from(rows).map_err(|r| {
                Error::Config(format!("reflective state needs 2 rows, got {}", r.len()))
            })?;
            Ok(Surface::Reflective(ReflectiveScattering::from_spectra(aa, ab)?))
        }
        "transmissive" => {
            if rows.len() != 2 * m {
                return Err(Error::Config(format!(
                    "transmissive state needs {} rows, got {}",
                    2 * m,
                    rows.len()
                )));
            }
            let block = |r: &[Vec<C64>]| CMatrix::new(m, m, r.concat());
            let s1 = block(&rows[..m])?;
            let s2 = block(&rows[m..])?;
            Ok(Surface::Transmissive(TransmissiveScattering::new(s1, s2)?))
        }
        other => Err(Error::Config(format!("unknown state mode {other:?}"))),
    }
}

pub fn write_state(path: &Path, surface: &Surface) -> Result<()> {
    fs::write(path, state_text(surface)).map_err(|e| Error::io(path, e))
}

pub fn read_state(path: &Path) -> Result<Surface> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let surface = parse_state(&text)?;
    if let Surface::Reflective(rs) = &surface {
        exact_sqrt(rs.elements())
            .ok_or_else(|| Error::Config("state element count is not a perfect square".into()))?;
    }
    Ok(surface)
}

fn value_tag(v: f64) -> String {
    format!("{v}").replace('-', "m").replace('.', "p")
}

/// Paths written by [`emit_results`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedFiles {
    pub results: PathBuf,
    pub manifest: PathBuf,
    pub states: Vec<PathBuf>,
    pub traces: Vec<PathBuf>,
}

/// Writes `results.csv`, `trials.csv`, `manifest.txt`, `states/*.ris` and `traces/*.csv`
/// under `dir`.
pub fn emit_results(table: &ResultTable, dir: &Path) -> Result<EmittedFiles> {
    let states_dir = dir.join("states");
    let traces_dir = dir.join("traces");
    for d in [dir, &states_dir, &traces_dir] {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let results = dir.join("results.csv");
    fs::write(&results, results_csv(table)).map_err(|e| Error::io(&results, e))?;
    let trials = dir.join("trials.csv");
    fs::write(&trials, trials_csv(table)).map_err(|e| Error::io(&trials, e))?;
    let manifest = dir.join("manifest.txt");
    fs::write(&manifest, manifest_text(table)).map_err(|e| Error::io(&manifest, e))?;

    let mut states = Vec::new();
    let mut traces = Vec::new();
    let sweep = table.spec.sweep.name();
    for r in &table.records {
        let Ok(outcome) = &r.outcome else { continue };
        let stem = format!("{sweep}_{}_{}_t{}", value_tag(r.value), r.baseline.name(), r.trial);
        let path = states_dir.join(format!("{stem}.ris"));
        write_state(&path, &outcome.state)?;
        states.push(path);
        if let Some(trace) = &outcome.trace {
            let path = traces_dir.join(format!("{stem}.csv"));
            fs::write(&path, trace.to_csv()).map_err(|e| Error::io(&path, e))?;
            traces.push(path);
        }
    }
    Ok(EmittedFiles {
        results,
        manifest,
        states,
        traces,
    })
}
