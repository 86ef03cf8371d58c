//! Run orchestration: single runs with the step-halving convergence loop,
//! M₀ sweeps, and UV calibration.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::{RunConfig, UvCoeff};
use super::fit::fit_exponential;
use crate::dynamics::{integrate_modes, Drive, IntegrationSummary, ModeGrid, Schedule, WRONSKIAN_FLAG};
use crate::error::{Error, Result};
use crate::observables::{
    calibrate_uv_coefficient, integrate_current, SweepEntry, SweepResult, TimeSeriesRecord,
    TimeSeriesRecorder,
};

/// Changes of Q below this are treated as converged whatever |Q| is.
const ABS_CONVERGENCE_FLOOR: f64 = 1e-12;

/// One integration at a fixed step.
#[derive(Debug, Clone)]
pub struct Pass {
    pub records: Vec<TimeSeriesRecord>,
    pub summary: IntegrationSummary,
    /// L_y ∫ q_Λ dt.
    pub transport_integral: f64,
}

/// Converged result for one (M₀, k_y).
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub m0: f64,
    pub m_y: i64,
    pub records: Vec<TimeSeriesRecord>,
    /// L_y ∫ q_Λ dt + uv_coeff·M₀².
    pub q: f64,
    pub transport_integral: f64,
    pub uv_coeff: f64,
    pub n_final: f64,
    pub n_peak: f64,
    pub n_peak_time: f64,
    pub wronskian_drift: f64,
    pub dt_used: f64,
    pub halvings: u32,
    /// Relative change of Q over the last halving.
    pub rel_change: f64,
}

impl SingleRun {
    pub fn flagged(&self) -> bool {
        self.wronskian_drift > WRONSKIAN_FLAG
    }
}

/// Grid for one k_y, centred on the quantum nearest Ẽ(t_i).
pub fn grid_for(config: &RunConfig, drive: &Drive, m_y: i64) -> Result<ModeGrid> {
    let l_x = config.device.l_x;
    let center = (drive.field.value(config.pulse.t_i) * l_x / (2.0 * PI)).round() as i64;
    ModeGrid::centered(config.grid.n_x, l_x, config.device.l_y, m_y, center)
}

/// Integrates every mode once at step `dt`, sampling every `stride` steps.
pub fn simulate(config: &RunConfig, m0: f64, m_y: i64, dt: f64, stride: usize) -> Result<Pass> {
    let spec = config.pulse.with_m0(m0);
    spec.validate()?;
    let drive = Drive::new(&spec, &config.device);
    let grid = grid_for(config, &drive, m_y)?;
    let schedule = Schedule::new(spec.t_i, spec.t_f, dt, stride)?;
    let mut recorder =
        TimeSeriesRecorder::with_capacity(&grid, config.output.emit_per_mode, schedule.sample_count());
    let summary = integrate_modes(grid.k_x(), &grid, &drive, &schedule, |v| recorder.observe(v))?;
    let records = recorder.finish();
    let transport_integral = config.device.l_y * integrate_current(&records)?;
    Ok(Pass {
        records,
        summary,
        transport_integral,
    })
}

/// Runs (M₀, k_y), halving dt until Q changes by less than the configured
/// tolerance and the Wronskian drift is within [`WRONSKIAN_FLAG`].
///
/// The sample stride doubles with each halving, so every pass samples the
/// same times.
pub fn run_single(config: &RunConfig, m0: f64, m_y: i64, uv_coeff: f64) -> Result<SingleRun> {
    let uv_term = uv_coeff * m0 * m0;
    let tol = config.integrator.convergence_tol;
    let mut dt = config.integrator.dt;
    let mut stride = config.integrator.sample_stride;
    let mut prev = simulate(config, m0, m_y, dt, stride)?;
    let mut last_change = f64::INFINITY;
    for halving in 1..=config.integrator.max_halvings {
        dt /= 2.0;
        stride *= 2;
        let cur = simulate(config, m0, m_y, dt, stride)?;
        let q = cur.transport_integral + uv_term;
        let change = (cur.transport_integral - prev.transport_integral).abs();
        let rel_change = if q != 0.0 { change / q.abs() } else { change };
        last_change = rel_change;
        let converged = change <= tol * q.abs() || change <= ABS_CONVERGENCE_FLOOR;
        if converged && cur.summary.max_wronskian_drift <= WRONSKIAN_FLAG {
            return Ok(finish(m0, m_y, uv_coeff, cur, halving, rel_change));
        }
        prev = cur;
    }
    Err(Error::Convergence {
        halvings: config.integrator.max_halvings,
        dt,
        rel_change: last_change,
        drift: prev.summary.max_wronskian_drift,
    })
}

fn finish(m0: f64, m_y: i64, uv_coeff: f64, pass: Pass, halvings: u32, rel_change: f64) -> SingleRun {
    let n_final = pass.records.last().map_or(0.0, |r| r.n_total);
    let (n_peak_time, n_peak) = pass
        .records
        .iter()
        .map(|r| (r.t, r.n_total))
        .fold((f64::NAN, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    SingleRun {
        m0,
        m_y,
        q: pass.transport_integral + uv_coeff * m0 * m0,
        transport_integral: pass.transport_integral,
        uv_coeff,
        n_final,
        n_peak,
        n_peak_time,
        wronskian_drift: pass.summary.max_wronskian_drift,
        dt_used: pass.summary.dt,
        halvings,
        rel_change,
        records: pass.records,
    }
}

/// Result of a UV calibration run.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub mass: f64,
    pub coeff: f64,
    /// The run at the calibration mass, without UV term.
    pub run: SingleRun,
}

/// Calibrates the M₀² correction at `config.calibration_mass`.
pub fn calibrate(config: &RunConfig, m_y: i64) -> Result<Calibration> {
    let mass = config.calibration_mass;
    let mut run = None;
    let coeff = calibrate_uv_coefficient(mass, |m| {
        let r = run_single(config, m, m_y, 0.0)?;
        let q = r.q;
        run = Some(r);
        Ok(q)
    })?;
    Ok(Calibration {
        mass,
        coeff,
        run: run.expect("calibration closure ran"),
    })
}

/// Fixed coefficient, or a calibration run for the first k_y.
pub fn resolve_uv_coeff(config: &RunConfig) -> Result<(f64, Option<Calibration>)> {
    match config.uv_coeff {
        UvCoeff::Fixed(c) => Ok((c, None)),
        UvCoeff::Calibrate => {
            let cal = calibrate(config, config.grid.m_y[0])?;
            Ok((cal.coeff, Some(cal)))
        }
    }
}

/// All runs of a sweep for one k_y, plus the fitted summary.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub result: SweepResult,
    pub runs: Vec<SingleRun>,
    /// Why the fit is missing, if it is.
    pub fit_error: Option<String>,
}

/// A sweep that stopped early; `completed` holds the runs that finished.
#[derive(Debug)]
pub struct SweepFailure {
    pub completed: Vec<SingleRun>,
    pub error: Error,
}

impl std::fmt::Display for SweepFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "sweep aborted after {} runs: {}", self.completed.len(), self.error)
    }
}

impl std::error::Error for SweepFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Builds the summary for runs sorted by M₀.
pub fn summarize(m_y: i64, runs: &[SingleRun]) -> (SweepResult, Option<String>) {
    let entries: Vec<SweepEntry> = runs
        .iter()
        .map(|r| SweepEntry {
            m0: r.m0,
            q: r.q,
            n_final: r.n_final,
            wronskian_max_drift: r.wronskian_drift,
            dt_used: r.dt_used,
        })
        .collect();
    let (fit, fit_error) = if entries.len() >= 3 {
        let points: Vec<_> = entries.iter().map(|e| (e.m0, e.q)).collect();
        match fit_exponential(&points) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    (SweepResult { m_y, entries, fit }, fit_error)
}

/// Runs every M₀ of the sweep for every k_y.
///
/// Sweep points are dispatched to a pool of `threads` workers (all cores
/// when `None`); each run is sequential, so results do not depend on the
/// worker count.
pub fn run_sweep(
    config: &RunConfig,
    uv_coeff: f64,
    threads: Option<usize>,
) -> std::result::Result<Vec<SweepRun>, SweepFailure> {
    let fail = |completed, error| SweepFailure { completed, error };
    if let Err(e) = config.validate() {
        return Err(fail(Vec::new(), e));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| fail(Vec::new(), Error::config("threads", e.to_string())))?;

    let mut out = Vec::with_capacity(config.grid.m_y.len());
    let mut completed = Vec::new();
    for &m_y in &config.grid.m_y {
        let results: Vec<Result<SingleRun>> = pool.install(|| {
            config
                .sweep
                .par_iter()
                .map(|&m0| run_single(config, m0, m_y, uv_coeff))
                .collect()
        });
        let mut runs = Vec::with_capacity(results.len());
        let mut first_error = None;
        for r in results {
            match r {
                Ok(run) => runs.push(run),
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        if let Some(e) = first_error {
            completed.extend(runs);
            return Err(fail(completed, e));
        }
        let (result, fit_error) = summarize(m_y, &runs);
        completed.extend(runs.iter().cloned());
        out.push(SweepRun {
            result,
            runs,
            fit_error,
        });
    }
    Ok(out)
}
