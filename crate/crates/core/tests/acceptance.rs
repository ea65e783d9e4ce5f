//! Acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! The process exits successfully even when a criterion fails so that the
//! report is always produced; set `ACCEPTANCE_STRICT=1` to exit non-zero on
//! any failure.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ris_core::cascade::Cascade;
use ris_core::channel::{draw_sample, ChannelSample, ScenarioConfig};
use ris_core::config::{parse_config, Baseline, ExperimentSpec};
use ris_core::experiment::{run_experiment, ResultTable};
use ris_core::inner_solver::{optimize_inner_from, phase_gradient, total_mse, InnerConfig, PrecoderSolution};
use ris_core::outer::OuterConfig;
use ris_core::outer_reflective::{grad_sigma_aa_sample, grad_sigma_ab_sample, run_algorithm1};
use ris_core::outer_transmissive::{grad_s1_sample, grad_s2_sample, run_algorithm2};
use ris_core::output::{emit_results, results_csv};
use ris_core::scattering::{
    effective_reflective, neumann_partial, project_lossless, project_unitary, symmetrize, PhaseConfig,
    ReflectiveScattering, Surface, TransmissiveScattering,
};
use ris_core::seeding::{stream_rng, Purpose};
use ris_core::{load_config, CMatrix, C64};

struct Report {
    failed: Vec<String>,
    total: usize,
}

impl Report {
    fn record(&mut self, id: &str, pass: bool, elapsed: Duration, detail: String) {
        self.total += 1;
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("[{verdict}] {id}: {detail} ({:.1} s)", elapsed.as_secs_f64());
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

fn rng(index: u64) -> ChaCha8Rng {
    stream_rng(20_240_601, Purpose::Misc, index)
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    // Box-Muller, unit variance per complex entry
    let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.random_range(0.0..TAU);
    C64::from_polar((-u.ln()).sqrt(), v)
}

fn gaussian_matrix(r: usize, c: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| gaussian(rng))
}

/// Haar unitary: Gram-Schmidt on a Gaussian matrix (R has a positive diagonal).
fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = gaussian_matrix(n, n, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = a.column(j);
        for q in &cols {
            let proj: C64 = q.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.iter().map(|z| z / norm).collect());
    }
    CMatrix::from_columns(&cols)
}

fn cosine(a: &[C64], b: &[C64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| (x * y.conj()).re).sum();
    let n = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    dot / (n(a) * n(b))
}

/// Central differences along the real and imaginary axes of entry `i`.
fn partials(h: f64, n: usize, mut f: impl FnMut(usize, C64) -> f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut d = |dir: C64| (f(i, dir * h) - f(i, -dir * h)) / (2.0 * h);
            (d(C64::new(1.0, 0.0)), d(C64::new(0.0, 1.0)))
        })
        .collect()
}

fn criterion_projection_oracle(report: &mut Report) {
    let start = Instant::now();
    let mut rng = rng(1);
    let mut worst_feas: f64 = 0.0;
    let mut worst_arg: f64 = 0.0;
    let mut worst_obj: f64 = 0.0;
    let mut worst_local: f64 = 0.0;
    let objective = |a: C64, b: C64, x: C64, y: C64| (x - a).norm_sqr() + (y - b).norm_sqr();
    for pair in 0..1000 {
        let scale: f64 = rng.random_range(0.05..3.0);
        let a = gaussian(&mut rng) * scale;
        let b = gaussian(&mut rng) * scale;
        let (x, y) = project_lossless(&[a], &[b]);
        let (x, y) = (x[0], y[0]);
        worst_feas = worst_feas.max((x.norm_sqr() + y.norm_sqr() - 1.0).abs());
        let found = objective(a, b, x, y);

        // Feasible points with the phases of (a, b) dominate any other phases,
        // so the minimizer lies on the circle (cos t e^{i arg a}, sin t e^{i arg b}).
        let (pa, pb) = (C64::from_polar(1.0, a.arg()), C64::from_polar(1.0, b.arg()));
        let on_circle = |t: f64| objective(a, b, pa * t.cos(), pb * t.sin());
        let t_found = y.norm().atan2(x.norm());

        // a small random perturbation on the 3-sphere never improves the objective
        for _ in 0..8 {
            let (dx, dy) = (gaussian(&mut rng) * 1e-3, gaussian(&mut rng) * 1e-3);
            let (px, py) = (x + dx, y + dy);
            let n = (px.norm_sqr() + py.norm_sqr()).sqrt();
            worst_local = worst_local.max(found - objective(a, b, px / n, py / n));
        }

        if pair < 100 {
            let grid = 1_000_000;
            let (mut best_t, mut best) = (0.0, f64::INFINITY);
            for g in 0..grid {
                let t = -FRAC_PI_2 + TAU * g as f64 / grid as f64;
                let v = on_circle(t);
                if v < best {
                    best = v;
                    best_t = t;
                }
            }
            worst_arg = worst_arg.max((best_t - t_found).abs());
            worst_obj = worst_obj.max(found - best);
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_feas < 1e-12
        && worst_arg <= 1e-4
        && worst_obj <= 1e-8
        && worst_local <= 0.0
        && elapsed < Duration::from_secs(30);
    report.record(
        "1 projection oracle",
        pass,
        elapsed,
        format!(
            "feasibility {worst_feas:.1e}, argument gap {worst_arg:.1e}, objective gap {worst_obj:.1e}, \
             local improvement {worst_local:.1e}"
        ),
    );
}

fn criterion_nearest_unitary(report: &mut Report) {
    let start = Instant::now();
    let mut rng = rng(2);
    let mut violations = 0usize;
    let mut worst_unitarity: f64 = 0.0;
    let mut tightest: f64 = f64::INFINITY;
    for _ in 0..200 {
        let a = gaussian_matrix(3, 3, &mut rng);
        let p = project_unitary(&a).expect("generic matrix has full rank");
        worst_unitarity = worst_unitarity.max(p.adjoint().matmul(&p).max_abs_diff(&CMatrix::identity(3)));
        let d = a.sub(&p).frobenius_norm();
        for _ in 0..10_000 {
            let w = haar_unitary(3, &mut rng);
            let dw = a.sub(&w).frobenius_norm();
            tightest = tightest.min(dw - d);
            if dw < d {
                violations += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && worst_unitarity < 1e-10 && elapsed < Duration::from_secs(60);
    report.record(
        "2 nearest-unitary oracle",
        pass,
        elapsed,
        format!("{violations} closer unitaries, unitarity {worst_unitarity:.1e}, smallest margin {tightest:.2e}"),
    );
}

struct GradInstance {
    sample: ChannelSample,
    rs: ReflectiveScattering,
    ts: TransmissiveScattering,
    phase: PhaseConfig,
    noise: f64,
    users: usize,
}

fn grad_instance(i: u64) -> GradInstance {
    let m = if i.is_multiple_of(2) { 9 } else { 16 };
    let scenario = ScenarioConfig {
        antennas: 8,
        elements: m,
        users: 2,
        seed: 100 + i,
        ..ScenarioConfig::default()
    };
    let sample = draw_sample(&scenario, Purpose::Misc, i).unwrap();
    let mut rng = rng(300 + i);
    let aa: Vec<C64> = (0..m)
        .map(|_| C64::from_polar(rng.random_range(0.0..0.8), rng.random_range(0.0..TAU)))
        .collect();
    let ab: Vec<C64> = (0..m).map(|_| C64::from_polar(1.0, rng.random_range(0.0..TAU))).collect();
    let rs = ReflectiveScattering::feasible(&aa, &ab).unwrap();
    let ts = TransmissiveScattering::new(haar_unitary(m, &mut rng), haar_unitary(m, &mut rng)).unwrap();
    GradInstance {
        sample,
        rs,
        ts,
        phase: PhaseConfig::random(m, &mut rng),
        noise: scenario.noise_var,
        users: scenario.users,
    }
}

fn heff_of(inst: &GradInstance, surface: &Surface, phase: &PhaseConfig) -> CMatrix {
    let phi = surface.effective(phase).unwrap();
    inst.sample.h_ru.adjoint().matmul(&phi).matmul(&inst.sample.h_br)
}

fn precoder(inst: &GradInstance, surface: &Surface, power: f64) -> (CMatrix, f64) {
    let sol = PrecoderSolution::for_channel(&heff_of(inst, surface, &inst.phase), power, inst.noise).unwrap();
    (sol.f, sol.rho)
}

fn criterion_gradients(report: &mut Report) {
    let start = Instant::now();
    let h = 1e-6;
    let power = ris_core::channel::dbm_to_watts(30.0);
    let mut worst = [f64::INFINITY; 5];
    for i in 0..50 {
        let inst = grad_instance(i);
        let m = inst.rs.elements();
        let mse = |heff: &CMatrix, f: &CMatrix, rho: f64| total_mse(heff, f, rho, inst.noise, inst.users);

        // reflective spectra, df = Re Σ G δ
        let refl = Surface::Reflective(inst.rs.clone());
        let (f, rho) = precoder(&inst, &refl, power);
        for (k, analytic) in [
            grad_sigma_aa_sample(&inst.sample, &inst.rs, &inst.phase, &f, rho).unwrap(),
            grad_sigma_ab_sample(&inst.sample, &inst.rs, &inst.phase, &f, rho).unwrap(),
        ]
        .into_iter()
        .enumerate()
        {
            let fd = partials(h, m, |idx, d| {
                let mut aa = inst.rs.sigma_aa().to_vec();
                let mut ab = inst.rs.sigma_ab().to_vec();
                if k == 0 { aa[idx] += d } else { ab[idx] += d }
                let s = Surface::Reflective(ReflectiveScattering::from_spectra(aa, ab).unwrap());
                mse(&heff_of(&inst, &s, &inst.phase), &f, rho)
            });
            let fd: Vec<C64> = fd.into_iter().map(|(re, im)| C64::new(re, -im)).collect();
            worst[k] = worst[k].min(cosine(&analytic, &fd));
        }

        // transmissive patterns, df = Re Σ G δ
        let trans = Surface::Transmissive(inst.ts.clone());
        let (f, rho) = precoder(&inst, &trans, power);
        for (k, analytic) in [
            grad_s1_sample(&inst.sample, &inst.ts, &inst.phase, &f, rho).unwrap(),
            grad_s2_sample(&inst.sample, &inst.ts, &inst.phase, &f, rho).unwrap(),
        ]
        .into_iter()
        .enumerate()
        {
            let fd = partials(h, m * m, |idx, d| {
                let (mut s1, mut s2) = (inst.ts.s1.clone(), inst.ts.s2.clone());
                let target = if k == 0 { &mut s1 } else { &mut s2 };
                target[(idx / m, idx % m)] += d;
                let s = Surface::Transmissive(TransmissiveScattering::new(s1, s2).unwrap());
                mse(&heff_of(&inst, &s, &inst.phase), &f, rho)
            });
            let fd: Vec<C64> = fd.into_iter().map(|(re, im)| C64::new(re, -im)).collect();
            worst[2 + k] = worst[2 + k].min(cosine(analytic.as_slice(), &fd));
        }

        // loads, df = 2 Re Σ conj(g) δ, unconstrained perturbation
        let (f, rho) = precoder(&inst, &refl, power);
        let analytic = phase_gradient(&inst.sample, &refl, &inst.phase, &f, rho).unwrap();
        let fd = partials(h, m, |idx, d| {
            let mut upsilon = inst.phase.upsilon.clone();
            upsilon[idx] += d;
            mse(&heff_of(&inst, &refl, &PhaseConfig { upsilon }), &f, rho)
        });
        let fd: Vec<C64> = fd.into_iter().map(|(re, im)| C64::new(re, im) * 0.5).collect();
        worst[4] = worst[4].min(cosine(&analytic, &fd));
    }
    let elapsed = start.elapsed();
    let pass = worst.iter().all(|&c| c >= 0.999) && elapsed < Duration::from_secs(120);
    report.record(
        "3 gradient validation",
        pass,
        elapsed,
        format!(
            "min cosine σ_αα {:.6}, σ_αβ {:.6}, S1 {:.6}, S2 {:.6}, loads {:.6}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    );
}

/// Spectral radius estimate `‖A^k‖^{1/k}` for large `k`.
fn spectral_radius(a: &CMatrix) -> f64 {
    let mut p = a.clone();
    let mut log_norm = 0.0;
    let k = 400;
    for _ in 1..k {
        let n = p.frobenius_norm();
        log_norm += n.ln();
        p = a.matmul(&p.scale(C64::new(1.0 / n, 0.0)));
    }
    ((log_norm + p.frobenius_norm().ln()) / k as f64).exp()
}

fn criterion_neumann(report: &mut Report) {
    let start = Instant::now();
    let m = 16;
    let mut rng = rng(4);
    let mut ratios = Vec::new();
    while ratios.len() < 10 {
        let raw: Vec<C64> = (0..m)
            .map(|_| C64::from_polar(0.6, rng.random_range(0.0..TAU)))
            .collect();
        let aa = symmetrize(&raw).unwrap();
        let phase = PhaseConfig::random(m, &mut rng);
        let probe = ReflectiveScattering::from_spectra(aa.clone(), vec![C64::new(1.0, 0.0); m]).unwrap();
        let r = spectral_radius(&probe.s_aa().mul_diag_left(&phase.upsilon));
        let scale = 0.5 / r;
        let aa: Vec<C64> = aa.iter().map(|z| z * scale).collect();
        if aa.iter().any(|z| z.norm() >= 1.0) {
            continue;
        }
        let ab: Vec<C64> = aa.iter().map(|z| C64::new((1.0 - z.norm_sqr()).sqrt(), 0.0)).collect();
        let rs = ReflectiveScattering::from_spectra(aa, ab).unwrap();
        let direct = effective_reflective(&rs, &phase).unwrap();
        let err = |order: usize| {
            let partial = rs.s_ba().matmul(&neumann_partial(&rs, &phase, order)).matmul(rs.s_ab());
            partial.sub(&direct).frobenius_norm()
        };
        ratios.push((err(20) / err(5)).powf(1.0 / 15.0));
    }
    let conv = ReflectiveScattering::conventional(m).unwrap();
    let phase = PhaseConfig::random(m, &mut rng);
    let conv_err = effective_reflective(&conv, &phase).unwrap().max_abs_diff(&phase.matrix());
    let elapsed = start.elapsed();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let pass = lo >= 0.45 && hi <= 0.55 && conv_err <= 1e-12;
    report.record(
        "4 Neumann consistency",
        pass,
        elapsed,
        format!("ratio over L=5..20 in [{lo:.4}, {hi:.4}], conventional reduction error {conv_err:.1e}"),
    );
}

fn desk_scenario(seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        antennas: 8,
        elements: 16,
        users: 2,
        seed,
        ..ScenarioConfig::default()
    }
}

fn desk_outer(seed: u64) -> OuterConfig {
    OuterConfig {
        samples: 4,
        iterations: 50,
        seed,
        ..OuterConfig::default()
    }
}

fn criterion_constraints(report: &mut Report) {
    let start = Instant::now();
    let inner = InnerConfig::default();
    let scenario = desk_scenario(11);
    let (rs, t1) = run_algorithm1(&scenario, &desk_outer(11), &inner).unwrap();
    let (ts, t2) = run_algorithm2(&scenario, &desk_outer(11), &inner).unwrap();
    let finals = [Surface::Reflective(rs).violations().max(), Surface::Transmissive(ts).violations().max()];
    let rows = t1.rows.iter().chain(&t2.rows);
    let (mut state, mut phase, mut power) = (0.0f64, 0.0f64, 0.0f64);
    for r in rows {
        state = state.max(r.violation);
        phase = phase.max(r.phase_violation);
        power = power.max(r.power_violation);
    }
    state = state.max(finals[0]).max(finals[1]);
    let elapsed = start.elapsed();
    let pass = t1.len() == 50 && t2.len() == 50 && state < 1e-9 && phase < 1e-12 && power < 1e-9;
    report.record(
        "5 constraint suite",
        pass,
        elapsed,
        format!(
            "{} + {} iterations; state residual {state:.1e}, unit modulus {phase:.1e}, power {power:.1e}",
            t1.len(),
            t2.len()
        ),
    );
}

fn desk_spec(extra: &str) -> ExperimentSpec {
    parse_config(&format!(
        "antennas = 8\nelements = 16\nusers = 2\nsamples = 4\niterations = 50\n\
         trials = 10\nseed = 1\n{extra}"
    ))
    .unwrap()
}

fn trial_rate(table: &ResultTable, value: f64, baseline: Baseline, trial: usize) -> f64 {
    table
        .records
        .iter()
        .find(|r| r.value == value && r.baseline == baseline && r.trial == trial)
        .and_then(|r| r.outcome.as_ref().ok())
        .map_or(f64::NAN, |o| o.mean_sum_rate)
}

/// Seeds on which `sum rate(P)` is non-decreasing over the sweep, for every
/// baseline in the table.
fn monotone_seeds(table: &ResultTable, baselines: &[Baseline]) -> usize {
    let values = &table.spec.values;
    (0..table.spec.trials)
        .filter(|&t| {
            baselines.iter().all(|&b| {
                values
                    .windows(2)
                    .all(|w| trial_rate(table, w[0], b, t) <= trial_rate(table, w[1], b, t))
            })
        })
        .count()
}

fn criterion_trends(report: &mut Report) {
    let start = Instant::now();
    let refl = run_experiment(&desk_spec("values = 30,40,50")).unwrap();
    let trans = run_experiment(&desk_spec("mode = transmissive\nvalues = 30,40,50")).unwrap();
    let elapsed = start.elapsed();
    use Baseline::*;
    let ordered_r = (0..10)
        .filter(|&t| {
            let (p, f, c) = (
                trial_rate(&refl, 50.0, Proposed, t),
                trial_rate(&refl, 50.0, FixedMc, t),
                trial_rate(&refl, 50.0, Conventional, t),
            );
            p >= f && f >= c
        })
        .count();
    let ordered_t = (0..10)
        .filter(|&t| trial_rate(&trans, 50.0, Proposed, t) >= trial_rate(&trans, 50.0, Conventional, t))
        .count();
    let mono_r = monotone_seeds(&refl, &[Proposed, FixedMc, Conventional]);
    let mono_t = monotone_seeds(&trans, &[Proposed, Conventional]);
    let mean = |t: &ResultTable, b| t.cell(50.0, b).map_or(f64::NAN, |c| c.mean_sum_rate);
    let in_time = elapsed < Duration::from_secs(15 * 60);
    report.record(
        "6a trends, reflective",
        ordered_r >= 8 && mono_r >= 9 && in_time,
        elapsed,
        format!(
            "proposed >= fixed_mc >= conventional at 50 dBm on {ordered_r}/10 seeds \
             (means {:.3}, {:.3}, {:.3}); monotone in P on {mono_r}/10",
            mean(&refl, Proposed),
            mean(&refl, FixedMc),
            mean(&refl, Conventional)
        ),
    );
    report.record(
        "6b trends, transmissive",
        ordered_t >= 8 && mono_t >= 9 && in_time,
        elapsed,
        format!(
            "proposed >= conventional at 50 dBm on {ordered_t}/10 seeds (means {:.3}, {:.3}); \
             monotone in P on {mono_t}/10",
            mean(&trans, Proposed),
            mean(&trans, Conventional)
        ),
    );
}

fn criterion_elements(report: &mut Report) {
    let start = Instant::now();
    let table = run_experiment(&desk_spec("sweep = elements\nvalues = 16,36\nbaselines = proposed")).unwrap();
    let wins = (0..10)
        .filter(|&t| trial_rate(&table, 36.0, Baseline::Proposed, t) > trial_rate(&table, 16.0, Baseline::Proposed, t))
        .count();
    report.record(
        "7 element-count trend",
        wins >= 8,
        start.elapsed(),
        format!("M = 36 beats M = 16 on {wins}/10 seeds"),
    );
}

fn criterion_scalar(report: &mut Report) {
    let start = Instant::now();
    let mut rng = rng(8);
    let mut worst: f64 = 0.0;
    let one = |z: C64| CMatrix::new(1, 1, vec![z]).unwrap();
    for case in 0..20 {
        let sample = ChannelSample::new(one(gaussian(&mut rng) * 1e-4), one(gaussian(&mut rng) * 1e-3)).unwrap();
        let surface = match case % 3 {
            0 => Surface::Reflective(ReflectiveScattering::conventional(1).unwrap()),
            1 => {
                let a = C64::from_polar(rng.random_range(0.0..0.9), rng.random_range(0.0..TAU));
                let b = C64::from_polar(1.0, rng.random_range(0.0..TAU));
                Surface::Reflective(ReflectiveScattering::feasible(&[a], &[b]).unwrap())
            }
            _ => Surface::Transmissive(
                TransmissiveScattering::new(one(C64::from_polar(1.0, 0.3)), one(C64::from_polar(1.0, -1.1))).unwrap(),
            ),
        };
        let (power, noise) = (rng.random_range(0.1..10.0), 1e-12);
        let cascade = Cascade::new(&sample, &surface).unwrap();
        let init = PhaseConfig::random(1, &mut rng);
        let out = optimize_inner_from(&cascade, &InnerConfig::default(), power, noise, &init).unwrap();
        let h = out.point.heff[(0, 0)];
        let expected = (1.0 + power * h.norm_sqr() / noise).log2();
        worst = worst.max((out.solution.sum_rate - expected).abs());
    }
    report.record(
        "8 scalar pipeline oracle",
        worst <= 1e-6,
        start.elapsed(),
        format!("largest |rate - log2(1 + P|h|²/σ²)| {worst:.1e} over 20 chains"),
    );
}

fn criterion_determinism(report: &mut Report) {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let spec = parse_config(&format!(
        "antennas = 4\nelements = 9\nusers = 2\nsamples = 2\niterations = 3\nvalues = 40,50\n\
         trials = 2\nout = {}",
        first.display()
    ))
    .unwrap();
    let files = emit_results(&run_experiment(&spec).unwrap(), &first).unwrap();
    let mut replay = load_config(&files.manifest).unwrap();
    replay.out = second.clone();
    let again = emit_results(&run_experiment(&replay).unwrap(), &second).unwrap();
    let a = std::fs::read(&files.results).unwrap();
    let b = std::fs::read(&again.results).unwrap();
    let in_memory = results_csv(&run_experiment(&replay).unwrap()).into_bytes();
    report.record(
        "9 determinism",
        a == b && a == in_memory,
        start.elapsed(),
        format!("manifest re-run CSV identical: {} ({} bytes)", a == b && a == in_memory, a.len()),
    );
}

fn time_iteration(m: usize, transmissive: bool) -> f64 {
    let scenario = ScenarioConfig {
        antennas: 8,
        elements: m,
        users: 2,
        ..ScenarioConfig::default()
    };
    let inner = InnerConfig {
        max_iters: 3,
        tol: 1e-300,
        ..InnerConfig::default()
    };
    // fixed samples: channel generation is not part of the optimization cost
    let outer = OuterConfig {
        samples: 1,
        iterations: 4,
        redraw: false,
        ..OuterConfig::default()
    };
    (0..5)
        .map(|_| {
            let t = Instant::now();
            if transmissive {
                run_algorithm2(&scenario, &outer, &inner).unwrap();
            } else {
                run_algorithm1(&scenario, &outer, &inner).unwrap();
            }
            t.elapsed().as_secs_f64() / outer.iterations as f64
        })
        .fold(f64::INFINITY, f64::min)
}

/// Least-squares slope of `log t` against `log M`.
fn fit_exponent(ms: &[usize], ts: &[f64]) -> f64 {
    let xs: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_scaling(report: &mut Report) {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let ms = [16, 64, 144];
    let (refl, trans): (Vec<f64>, Vec<f64>) = pool.install(|| {
        (
            ms.iter().map(|&m| time_iteration(m, false)).collect(),
            ms.iter().map(|&m| time_iteration(m, true)).collect(),
        )
    });
    let (er, et) = (fit_exponent(&ms, &refl), fit_exponent(&ms, &trans));
    let ok = |e: f64| (2.3..=3.5).contains(&e);
    report.record(
        "10 complexity scaling",
        ok(er) && ok(et),
        start.elapsed(),
        format!(
            "exponent reflective {er:.2} (times {:.2e}, {:.2e}, {:.2e} s), transmissive {et:.2} \
             (times {:.2e}, {:.2e}, {:.2e} s)",
            refl[0], refl[1], refl[2], trans[0], trans[1], trans[2]
        ),
    );
}

fn main() {
    let mut report = Report {
        failed: Vec::new(),
        total: 0,
    };
    criterion_projection_oracle(&mut report);
    criterion_nearest_unitary(&mut report);
    criterion_gradients(&mut report);
    criterion_neumann(&mut report);
    criterion_constraints(&mut report);
    criterion_trends(&mut report);
    criterion_elements(&mut report);
    criterion_scalar(&mut report);
    criterion_determinism(&mut report);
    criterion_scaling(&mut report);
    let passed = report.total - report.failed.len();
    println!("acceptance: {passed}/{} criteria passed", report.total);
    if !report.failed.is_empty() {
        println!("failed: {}", report.failed.join(", "));
        if std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
