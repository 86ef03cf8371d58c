//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances are fixed here.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_complex::Complex64;

use vortex_tunneling::cli::{calibrate, run_single, run_sweep, simulate, RunConfig};
use vortex_tunneling::device::{crossover_area, friction_action, DeviceParams, FrictionInputs, LogFactor};
use vortex_tunneling::dynamics::{integrate_modes, Drive, ModeGrid, ModeState, Schedule, WRONSKIAN_FLAG};
use vortex_tunneling::observables::{total_transport, REFERENCE_UV_COEFF};
use vortex_tunneling::pulse::{EffectiveField, MassProfile, PulseShape, PulseSpec, Table};

const RATE_RANGE: (f64, f64) = (0.9, 1.1);
const FIT_RESIDUAL_MAX: f64 = 0.1;
const N_FINAL_MAX: f64 = 1e-10;
const PEAK_TO_FINAL_MIN: f64 = 1e3;
const E0_RANGE: (f64, f64) = (8.5, 9.5);
const FRICTION_TARGET: (f64, f64) = (170.0, 2.0);
const CROSSOVER_NM2: (f64, f64) = (1.4e5, 0.05);
const CALIBRATION_ABS_MAX: f64 = 1e-12;
const UV_FACTOR_MAX: f64 = 2.0;
const UV_SHRINK: (f64, f64) = (4.0, 0.3);
const FREE_REL_MAX: f64 = 1e-9;
const QUENCH_REL_MAX: f64 = 1e-6;
const NULL_N_MAX: f64 = 1e-12;
const NULL_Q_MAX: f64 = 1e-12;
const ORDER_MIN: f64 = 5.8;
const GAUGE_REL_MAX: f64 = 1e-6;

struct Outcome {
    id: &'static str,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn outcome(id: &'static str, name: &'static str, passed: bool, detail: String) -> Outcome {
    Outcome { id, name, passed, detail }
}

fn failed(id: &'static str, name: &'static str, e: impl std::fmt::Display) -> Outcome {
    outcome(id, name, false, format!("error: {e}"))
}

/// Drifts of every run, for criterion 6(c).
#[derive(Default)]
struct DriftLog(Vec<(String, f64)>);

impl DriftLog {
    fn add(&mut self, label: impl Into<String>, drift: f64) {
        self.0.push((label.into(), drift));
    }

    fn worst(&self) -> Option<&(String, f64)> {
        self.0.iter().max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

fn small_config(n_x: usize) -> RunConfig {
    let mut c = RunConfig::default();
    c.grid.n_x = n_x;
    c
}

fn mass_law_and_adiabaticity(drifts: &mut DriftLog) -> (Outcome, Outcome, Option<f64>) {
    const N1: &str = "exponential mass law";
    const N2: &str = "adiabatic return at M0 = 5";
    let config = RunConfig::default();
    let sweeps = match run_sweep(&config, REFERENCE_UV_COEFF, None) {
        Ok(s) => s,
        Err(e) => return (failed("1", N1, &e), failed("2", N2, &e), None),
    };
    let sweep = &sweeps[0];
    for r in &sweep.runs {
        drifts.add(format!("sweep M0={}", r.m0), r.wronskian_drift);
    }
    let c1 = match &sweep.result.fit {
        Some(fit) => outcome(
            "1",
            N1,
            (RATE_RANGE.0..=RATE_RANGE.1).contains(&fit.rate) && fit.residual <= FIT_RESIDUAL_MAX,
            format!(
                "rate {:.4} in [{}, {}], ln residual {:.3e} <= {FIT_RESIDUAL_MAX}",
                fit.rate, RATE_RANGE.0, RATE_RANGE.1, fit.residual
            ),
        ),
        None => outcome("1", N1, false, format!("no fit: {:?}", sweep.fit_error)),
    };

    let Some(run) = sweep.runs.iter().find(|r| r.m0 == 5.0) else {
        return (c1, outcome("2", N2, false, "M0 = 5 missing from sweep".into()), None);
    };
    // One excitation episode: peak inside the pulse core, quiet outside it.
    let t0 = config.pulse.t0;
    let quiet_tail = run
        .records
        .iter()
        .filter(|r| r.t.abs() >= 3.0 * t0)
        .map(|r| r.n_total.abs())
        .fold(0.0, f64::max);
    let ratio = run.n_peak / run.n_final.abs();
    let passed = run.n_final.abs() <= N_FINAL_MAX
        && ratio >= PEAK_TO_FINAL_MIN
        && run.n_peak_time.abs() <= 2.0 * t0
        && quiet_tail <= run.n_peak / PEAK_TO_FINAL_MIN;
    let c2 = outcome(
        "2",
        N2,
        passed,
        format!(
            "N(t_f) = {:.3e} <= {N_FINAL_MAX:e}, peak {:.3e} at t = {:.1}, peak/final = {:.2e}, max N for |t| >= 3 t0 = {:.2e}",
            run.n_final, run.n_peak, run.n_peak_time, ratio, quiet_tail
        ),
    );
    (c1, c2, Some(run.transport_integral))
}

fn field_anchor() -> Outcome {
    let spec = PulseSpec::reference(5.0);
    let e0 = EffectiveField::new(&spec, &DeviceParams::default()).value(0.0).abs();
    outcome(
        "3",
        "effective-field anchor",
        (E0_RANGE.0..=E0_RANGE.1).contains(&e0),
        format!("|E~(0)| = {e0:.4} in [{}, {}]", E0_RANGE.0, E0_RANGE.1),
    )
}

fn device_anchors() -> Outcome {
    const NAME: &str = "device anchors";
    let dev = DeviceParams::default();
    let s_f = match friction_action(&FrictionInputs::reference()) {
        Ok(v) => v,
        Err(e) => return failed("4", NAME, e),
    };
    let s_cr = match crossover_area(dev.lambda0, dev.l_y, dev.l_x, LogFactor::Unity) {
        Ok(v) => v * 1e6,
        Err(e) => return failed("4", NAME, e),
    };
    let ok_f = (s_f - FRICTION_TARGET.0).abs() <= FRICTION_TARGET.1;
    let ok_cr = ((s_cr - CROSSOVER_NM2.0) / CROSSOVER_NM2.0).abs() <= CROSSOVER_NM2.1;
    outcome(
        "4",
        NAME,
        ok_f && ok_cr,
        format!("S_f = {s_f:.2} (170 +- 2), S_cr = {s_cr:.4e} nm^2 (1.4e5 +- 5%)"),
    )
}

fn calibration(drifts: &mut DriftLog) -> Outcome {
    const NAME: &str = "UV calibration";
    let cal32 = match calibrate(&small_config(32), 0) {
        Ok(c) => c,
        Err(e) => return failed("5", NAME, e),
    };
    drifts.add("calibration N_x=32", cal32.run.wronskian_drift);
    let cal64 = match calibrate(&small_config(64), 0) {
        Ok(c) => c,
        Err(e) => return failed("5", NAME, e),
    };
    drifts.add("calibration N_x=64", cal64.run.wronskian_drift);
    let l_y = DeviceParams::default().l_y;
    let residual = match total_transport(&cal32.run.records, l_y, cal32.mass, cal32.coeff) {
        Ok(q) => q,
        Err(e) => return failed("5", NAME, e),
    };
    let factor = (cal32.coeff / REFERENCE_UV_COEFF).max(REFERENCE_UV_COEFF / cal32.coeff);
    let shrink = cal32.coeff / cal64.coeff;
    let passed = residual.abs() <= CALIBRATION_ABS_MAX
        && cal32.coeff > 0.0
        && factor <= UV_FACTOR_MAX
        && (shrink - UV_SHRINK.0).abs() <= UV_SHRINK.1 * UV_SHRINK.0;
    outcome(
        "5",
        NAME,
        passed,
        format!(
            "Q(10) after calibration = {residual:.2e}, coeff {:.5} (ref {REFERENCE_UV_COEFF}, factor {factor:.3}), N_x 32->64 shrink {shrink:.3} (4 +- 30%)",
            cal32.coeff
        ),
    )
}

fn quiet_spec(t0: f64, half: f64, m0: f64) -> PulseSpec {
    PulseSpec {
        amplitude: 0.0,
        t0,
        t_i: -half,
        t_f: half,
        shape: PulseShape::GaussianDerivative,
        m0,
        m_prime: None,
        mass: MassProfile::Constant,
        offset_quanta: 0,
    }
}

/// Relative deviation of every sampled mode from f = (2ωV)^{-1/2} e^{-iω(t−t_i)}.
fn free_mode(drifts: &mut DriftLog) -> vortex_tunneling::Result<f64> {
    let dev = DeviceParams::default();
    let spec = quiet_spec(80.0, 400.0, 5.0);
    let grid = ModeGrid::new(8, dev.l_x, dev.l_y, 0)?;
    let drive = Drive::new(&spec, &dev);
    let schedule = Schedule::new(spec.t_i, spec.t_f, 2.5e-4, 4000)?;
    let v = grid.volume();
    let mut worst: f64 = 0.0;
    let summary = integrate_modes(grid.k_x(), &grid, &drive, &schedule, |view| {
        for i in 0..view.len() {
            let s = view.state(i);
            let w = (s.k_x * s.k_x + 25.0).sqrt();
            let amp = (2.0 * w * v).sqrt().recip();
            let want = Complex64::from_polar(amp, -w * (view.t - spec.t_i));
            worst = worst.max((s.f - want).norm() / amp);
        }
    })?;
    drifts.add("free mode", summary.max_wronskian_drift);
    Ok(worst)
}

/// Largest relative error of the per-species occupation n_k/2 after a mass
/// step M1 → M2 against |β|² = (ω₁ − ω₂)²/(4ω₁ω₂). n_k counts the vortex and
/// the antivortex of mode k, so it is 2|β|².
fn quench(drifts: &mut DriftLog) -> vortex_tunneling::Result<f64> {
    let (m1, m2, dt) = (5.0, 3.0, 1e-5);
    let dev = DeviceParams::default();
    let mut spec = quiet_spec(0.1, 0.5, m1);
    spec.mass = MassProfile::Tabulated(Table::new(vec![-0.5, 0.0, dt, 0.5], vec![m1, m1, m2, m2])?);
    let grid = ModeGrid::new(8, dev.l_x, dev.l_y, 0)?;
    let drive = Drive::new(&spec, &dev);
    let schedule = Schedule::new(spec.t_i, spec.t_f, dt, 100_000)?;
    let v = grid.volume();
    let mut finals = Vec::new();
    let summary = integrate_modes(grid.k_x(), &grid, &drive, &schedule, |view| {
        if view.step == schedule.steps {
            finals = (0..view.len()).map(|i| (view.state(i), view.omega_sq(i).sqrt())).collect();
        }
    })?;
    drifts.add("quench", summary.max_wronskian_drift);
    let mut worst: f64 = 0.0;
    for (s, w2) in finals {
        let w1 = (s.k_x * s.k_x + m1 * m1).sqrt();
        let want = (w1 - w2).powi(2) / (4.0 * w1 * w2);
        let n = v / w2 * (s.f_dot.norm_sqr() + w2 * w2 * s.f.norm_sqr()) - 1.0;
        worst = worst.max((0.5 * n / want - 1.0).abs());
    }
    Ok(worst)
}

/// Max |q_bare| and |N| with the drive switched off at defaults, N_x = 8.
fn null_drive(drifts: &mut DriftLog) -> vortex_tunneling::Result<(f64, f64)> {
    let mut config = small_config(8);
    config.pulse.amplitude = 0.0;
    let pass = simulate(&config, 5.0, 0, config.integrator.dt, config.integrator.sample_stride)?;
    drifts.add("null drive", pass.summary.max_wronskian_drift);
    let q = pass.records.iter().map(|r| r.q_bare.abs()).fold(0.0, f64::max);
    let n = pass.records.iter().map(|r| r.n_total.abs()).fold(0.0, f64::max);
    Ok((q, n))
}

/// Convergence order of one RK6 mode step against the exact solution
/// f = g^{-1/2} e^{-iφ}, φ̇ = g = w0 + ε cos νt, with
/// ω² = g² − (¾ ġ²/g² − ½ g̈/g).
fn integrator_order() -> vortex_tunneling::Result<f64> {
    let (w0, eps, nu, t_end) = (3.0, 1.0, 2.0, 10.0);
    let g = |t: f64| w0 + eps * (nu * t).cos();
    let g1 = |t: f64| -eps * nu * (nu * t).sin();
    let g2 = |t: f64| -eps * nu * nu * (nu * t).cos();
    let phase = |t: f64| w0 * t + eps / nu * (nu * t).sin();
    let exact = |t: f64| {
        let a = g(t).powf(-0.5);
        let f = Complex64::from_polar(a, -phase(t));
        let f_dot = f * Complex64::new(-0.5 * g1(t) / g(t), -g(t));
        (f, f_dot)
    };
    let omega_sq = |t: f64| {
        let (gv, d1, d2) = (g(t), g1(t), g2(t));
        gv * gv - (0.75 * d1 * d1 / (gv * gv) - 0.5 * d2 / gv)
    };
    let error = |dt: f64| -> vortex_tunneling::Result<f64> {
        let (f, f_dot) = exact(0.0);
        let mut s = ModeState { f, f_dot, t: 0.0, k_x: 0.0, k_y: 0.0 };
        let steps = (t_end / dt).round() as usize;
        for _ in 0..steps {
            s = s.rk6_step(dt, omega_sq)?;
        }
        let (f_end, _) = exact(s.t);
        Ok((s.f - f_end).norm())
    };
    let errs = [error(0.05)?, error(0.025)?, error(0.0125)?];
    let order = (errs[0] / errs[1]).log2().min((errs[1] / errs[2]).log2());
    Ok(order)
}

fn oracles(drifts: &mut DriftLog) -> Outcome {
    const NAME: &str = "oracle equivalence";
    let free = match free_mode(drifts) {
        Ok(v) => v,
        Err(e) => return failed("6", NAME, e),
    };
    let quench = match quench(drifts) {
        Ok(v) => v,
        Err(e) => return failed("6", NAME, e),
    };
    let (q_null, n_null) = match null_drive(drifts) {
        Ok(v) => v,
        Err(e) => return failed("6", NAME, e),
    };
    let order = match integrator_order() {
        Ok(v) => v,
        Err(e) => return failed("6", NAME, e),
    };
    let (worst_label, worst_drift) = drifts.worst().cloned().unwrap_or_default();
    let checks = [
        free <= FREE_REL_MAX,
        quench <= QUENCH_REL_MAX,
        worst_drift <= WRONSKIAN_FLAG,
        q_null <= NULL_Q_MAX && n_null <= NULL_N_MAX,
        order >= ORDER_MIN,
    ];
    outcome(
        "6",
        NAME,
        checks.iter().all(|&c| c),
        format!(
            "(a) free {free:.2e} (b) quench n_k/2 {quench:.2e} (c) max drift {worst_drift:.2e} over {} runs [{worst_label}] (d) null q {q_null:.1e} N {n_null:.1e} (e) order {order:.3}",
            drifts.0.len()
        ),
    )
}

fn gauge(base: Option<f64>, drifts: &mut DriftLog) -> Outcome {
    const NAME: &str = "one-quantum gauge shift";
    let Some(base) = base else {
        return outcome("7", NAME, false, "no reference run".into());
    };
    let mut config = RunConfig::default();
    config.pulse.offset_quanta = 1;
    let shifted = match run_single(&config, 5.0, 0, 0.0) {
        Ok(r) => r,
        Err(e) => return failed("7", NAME, e),
    };
    drifts.add("gauge shift", shifted.wronskian_drift);
    let rel = ((shifted.transport_integral - base) / base).abs();
    outcome(
        "7",
        NAME,
        rel <= GAUGE_REL_MAX,
        format!(
            "Q_raw {base:.12e} -> {:.12e}, relative change {rel:.2e}",
            shifted.transport_integral
        ),
    )
}

const DETERMINISM_CONFIG: &str = "\
[pulse]
t0 = 20.0
t_i = -100.0
t_f = 100.0

[grid]
n_x = 8

[sweep]
m0 = [3.0, 4.0, 5.0]
";

type Outputs = Vec<(String, Vec<u8>)>;

fn read_outputs(dir: &Path) -> std::io::Result<Outputs> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        files.push((path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path)?));
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    const NAME: &str = "thread-count determinism";
    let run = || -> Result<Vec<Outputs>, String> {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let cfg = tmp.path().join("run.toml");
        fs::write(&cfg, DETERMINISM_CONFIG).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for threads in ["1", "3"] {
            let out = tmp.path().join(format!("out{threads}"));
            let status = Command::new(env!("CARGO_BIN_EXE_vortex"))
                .args(["sweep", "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .args(["--threads", threads])
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(String::from_utf8_lossy(&status.stderr).into_owned());
            }
            outputs.push(read_outputs(&out).map_err(|e| e.to_string())?);
        }
        Ok(outputs)
    };
    match run() {
        Ok(outputs) => {
            let n = outputs[0].len();
            outcome(
                "8",
                NAME,
                n > 0 && outputs[0] == outputs[1],
                format!("{n} CSV files compared byte for byte, --threads 1 vs 3"),
            )
        }
        Err(e) => failed("8", NAME, e),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut drifts = DriftLog::default();
    let (c1, c2, base) = mass_law_and_adiabaticity(&mut drifts);
    let c3 = field_anchor();
    let c4 = device_anchors();
    let c5 = calibration(&mut drifts);
    let c7 = gauge(base, &mut drifts);
    let c8 = determinism();
    let c6 = oracles(&mut drifts);

    let all = [c1, c2, c3, c4, c5, c6, c7, c8];
    for o in &all {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("{status} [{}] {}: {}", o.id, o.name, o.detail);
    }
    let failures = all.iter().filter(|o| !o.passed).count();
    println!(
        "acceptance: {}/{} passed in {:.0} s",
        all.len() - failures,
        all.len(),
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
