//! Quick invariant suite run by `vortex check`: the configured pulse on an
//! 8-mode grid.

use super::config::RunConfig;
use super::run::simulate;
use crate::dynamics::WRONSKIAN_FLAG;
use crate::error::Result;
use crate::pulse::{check_quantization, QUANTIZATION_TOL};

pub const CHECK_N_X: usize = 8;

#[derive(Debug, Clone)]
pub struct CheckItem {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.items.push(CheckItem { name, passed, detail });
    }
}

/// Validates `config` and runs the invariant checks at N_x = 8 and the
/// configured dt.
pub fn run_checks(config: &RunConfig) -> Result<CheckReport> {
    config.validate()?;
    let mut cfg = config.clone();
    cfg.grid.n_x = CHECK_N_X;
    cfg.output.emit_per_mode = false;
    let m0 = cfg.pulse.m0;
    let m_y = cfg.grid.m_y[0];
    let (dt, stride) = (cfg.integrator.dt, cfg.integrator.sample_stride);
    let mut report = CheckReport::default();

    let quanta = check_quantization(&cfg.pulse, &cfg.device, QUANTIZATION_TOL)?;
    report.push("quantization", true, format!("pulse winds {quanta} quanta"));

    let driven = simulate(&cfg, m0, m_y, dt, stride)?;
    let drift = driven.summary.max_wronskian_drift;
    report.push(
        "wronskian",
        drift <= WRONSKIAN_FLAG,
        format!("max drift {drift:e} (limit {WRONSKIAN_FLAG:e})"),
    );

    let n_final = driven.records.last().map_or(0.0, |r| r.n_total);
    let n_peak = driven.records.iter().map(|r| r.n_total).fold(f64::NEG_INFINITY, f64::max);
    report.push(
        "adiabatic return",
        n_final.abs() <= 1e-3 * n_peak.abs() || n_final.abs() <= 1e-12,
        format!("N peak {n_peak:e}, final {n_final:e}"),
    );

    let mut flipped = cfg.clone();
    flipped.pulse.amplitude = -cfg.pulse.amplitude;
    flipped.pulse.offset_quanta = -cfg.pulse.offset_quanta;
    let mirror = simulate(&flipped, m0, -m_y, dt, stride)?;
    let (a, b) = (driven.transport_integral, mirror.transport_integral);
    let rel = (a + b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    report.push(
        "sign covariance",
        rel <= 1e-9 || (a + b).abs() <= 1e-14,
        format!("Q_raw {a:e} vs {b:e} under C -> -C"),
    );

    let mut null = cfg.clone();
    null.pulse.amplitude = 0.0;
    null.pulse.offset_quanta = 0;
    let still = simulate(&null, m0, m_y, dt, stride)?;
    let q_max = still.records.iter().map(|r| r.q_bare.abs()).fold(0.0, f64::max);
    let n_max = still.records.iter().map(|r| r.n_total.abs()).fold(0.0, f64::max);
    report.push(
        "null drive",
        q_max <= 1e-10 && n_max <= 1e-12,
        format!("max |q_bare| {q_max:e}, max |N| {n_max:e}"),
    );

    Ok(report)
}
