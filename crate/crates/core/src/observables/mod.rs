//! Physical outputs built from mode functions: the regularized vortex
//! current, total transport, mode energies and occupation numbers.
//!
//! Sums over k_x run in grid order (m = 0, +1, −1, +2, …) with compensated
//! accumulation, so the small difference of large ±k_x terms is reproducible
//! bit for bit.

mod sum;

use std::f64::consts::PI;

pub use sum::{compensated_sum, CompensatedSum};

use crate::dynamics::{ModeGrid, ModeState, SampleView};
use crate::error::{Error, Result};

/// UV correction coefficient for Λ = 30π and the reference pulse.
pub const REFERENCE_UV_COEFF: f64 = 0.0215;

/// Default calibration mass, heavy enough that tunneling is negligible.
pub const DEFAULT_CALIBRATION_MASS: f64 = 10.0;

/// Per-mode data at one sampled time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSample {
    pub k_x: f64,
    pub abs_f_sq: f64,
    pub n_k: f64,
}

/// Observables at one sampled time for one k_y.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesRecord {
    pub t: f64,
    pub e_tilde: f64,
    /// 2 Σ (k_x − Ẽ)|f|² over the finite grid.
    pub q_bare: f64,
    /// q_bare plus the Pauli-Villars counterterm.
    pub q_reg: f64,
    pub n_total: f64,
    pub per_mode: Option<Vec<ModeSample>>,
}

/// Transport totals for one M₀ of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub m0: f64,
    pub q: f64,
    pub n_final: f64,
    pub wronskian_max_drift: f64,
    pub dt_used: f64,
}

/// Least-squares fit of ln|Q| = ln|A| − rate·M₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    /// A, carrying the common sign of the fitted Q values.
    pub amplitude: f64,
    pub rate: f64,
    /// Largest |residual| of the fit on the ln scale.
    pub residual: f64,
    /// Coefficient of determination on the ln scale.
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub m_y: i64,
    /// Sorted by M₀ ascending.
    pub entries: Vec<SweepEntry>,
    /// Present only with at least three entries of one sign.
    pub fit: Option<ExpFit>,
}

impl SweepResult {
    /// S₀ analogue: fitted rate × L_x.
    pub fn action_estimate(&self, l_x: f64) -> Option<f64> {
        self.fit.map(|f| f.rate * l_x)
    }
}

fn match_grid(states: &[ModeState], grid: &ModeGrid) -> Result<Vec<ModeState>> {
    let tol = 1e-9 * (1.0 + grid.cutoff());
    let mut ordered = Vec::with_capacity(grid.len());
    for &k in grid.k_x() {
        if let Some(s) = states.iter().find(|s| (s.k_x - k).abs() <= tol) {
            ordered.push(*s);
        }
    }
    if ordered.len() != grid.len() || states.len() != grid.len() {
        return Err(Error::IncompleteGrid {
            expected: grid.len(),
            found: ordered.len(),
        });
    }
    Ok(ordered)
}

fn bare_current_terms(k_x: &[f64], abs_f_sq: impl Fn(usize) -> f64, e_tilde: f64) -> f64 {
    let sum: CompensatedSum = k_x
        .iter()
        .enumerate()
        .map(|(i, &k)| (k - e_tilde) * abs_f_sq(i))
        .collect();
    2.0 * sum.value()
}

/// q = 2 Σ_{k_x} (k_x − Ẽ)|f_k|² (c₁ = 1) over the full grid.
pub fn bare_current_density(states: &[ModeState], e_tilde: f64, grid: &ModeGrid) -> Result<f64> {
    let ordered = match_grid(states, grid)?;
    Ok(bare_current_terms(grid.k_x(), |i| ordered[i].abs_f_sq(), e_tilde))
}

/// Analytic Pauli-Villars contribution q′ = Ẽ/(π L_y).
///
/// `e_tilde` is measured from the centre of the k_x window, which is where
/// the regulator's momentum integral is symmetric.
pub fn pv_counterterm(e_tilde: f64, l_y: f64) -> f64 {
    e_tilde / (PI * l_y)
}

/// q_Λ = q_bare + q′.
pub fn regularized_current(q_bare: f64, q_prime: f64) -> f64 {
    q_bare + q_prime
}

/// 𝓔_k = |ḟ|² + ω²|f|² (energy over ħ).
pub fn mode_energy(state: &ModeState, omega_sq: f64) -> f64 {
    state.f_dot.norm_sqr() + omega_sq * state.f.norm_sqr()
}

/// n_k = (V/ω) 𝓔_k − 1. Round-off can leave it slightly negative.
///
/// In terms of Bogoliubov coefficients n_k = 2|β_k|²: it counts both the
/// vortex and the antivortex quantum of mode k.
pub fn occupation(state: &ModeState, omega: f64, volume: f64) -> f64 {
    volume / omega * mode_energy(state, omega * omega) - 1.0
}

/// N = Σ_{k_x} n_k with ω² = k_y² + (k_x − Ẽ)² + M².
pub fn total_occupation(states: &[ModeState], grid: &ModeGrid, e_tilde: f64, mass: f64) -> Result<f64> {
    let ordered = match_grid(states, grid)?;
    let v = grid.volume();
    Ok(compensated_sum(ordered.iter().map(|s| {
        let u = s.k_x - e_tilde;
        let w = (s.k_y * s.k_y + u * u + mass * mass).sqrt();
        occupation(s, w, v)
    })))
}

/// Q = L_y ∫ q_Λ dt + uv_coeff·M₀², trapezoidal over the samples.
pub fn total_transport(series: &[TimeSeriesRecord], l_y: f64, m0: f64, uv_coeff: f64) -> Result<f64> {
    Ok(l_y * integrate_current(series)? + uv_coeff * m0 * m0)
}

/// Trapezoidal ∫ q_Λ dt over the series.
pub fn integrate_current(series: &[TimeSeriesRecord]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::Domain("time series needs at least two samples".into()));
    }
    let spacing = series[1].t - series[0].t;
    let mut acc = CompensatedSum::new();
    for w in series.windows(2) {
        let h = w[1].t - w[0].t;
        if !(h > 0.0) || h > 2.0 * spacing * (1.0 + 1e-12) {
            return Err(Error::SeriesGap {
                gap: h,
                at: w[0].t,
                spacing,
            });
        }
        acc.add(0.5 * h * (w[0].q_reg + w[1].q_reg));
    }
    Ok(acc.value())
}

/// Coefficient c with Q_raw(M_cal) + c·M_cal² = 0.
///
/// `raw_transport` runs the pipeline at the given mass with no UV term and
/// returns its Q.
pub fn calibrate_uv_coefficient<F>(m_cal: f64, raw_transport: F) -> Result<f64>
where
    F: FnOnce(f64) -> Result<f64>,
{
    if !(m_cal > 0.0) {
        return Err(Error::Domain(format!("calibration mass must be > 0, got {m_cal}")));
    }
    let q_raw = raw_transport(m_cal)?;
    Ok(-q_raw / (m_cal * m_cal))
}

/// Turns integrator samples into [`TimeSeriesRecord`]s.
#[derive(Debug, Clone)]
pub struct TimeSeriesRecorder {
    k_center: f64,
    l_y: f64,
    per_mode: bool,
    records: Vec<TimeSeriesRecord>,
}

impl TimeSeriesRecorder {
    pub fn new(grid: &ModeGrid, per_mode: bool) -> Self {
        Self {
            k_center: grid.k_center(),
            l_y: grid.l_y(),
            per_mode,
            records: Vec::new(),
        }
    }

    pub fn with_capacity(grid: &ModeGrid, per_mode: bool, capacity: usize) -> Self {
        let mut r = Self::new(grid, per_mode);
        r.records.reserve_exact(capacity);
        r
    }

    pub fn observe(&mut self, view: &SampleView<'_>) {
        let e = view.e_tilde;
        let q_bare = bare_current_terms(view.k_x, |i| view.abs_f_sq(i), e);
        let q_reg = regularized_current(q_bare, pv_counterterm(e - self.k_center, self.l_y));
        let mut modes = self.per_mode.then(|| Vec::with_capacity(view.len()));
        let mut n_total = CompensatedSum::new();
        for i in 0..view.len() {
            let w2 = view.omega_sq(i);
            let energy = view.abs_f_dot_sq(i) + w2 * view.abs_f_sq(i);
            let n_k = view.volume / w2.sqrt() * energy - 1.0;
            n_total.add(n_k);
            if let Some(m) = modes.as_mut() {
                m.push(ModeSample {
                    k_x: view.k_x[i],
                    abs_f_sq: view.abs_f_sq(i),
                    n_k,
                });
            }
        }
        self.records.push(TimeSeriesRecord {
            t: view.t,
            e_tilde: e,
            q_bare,
            q_reg,
            n_total: n_total.value(),
            per_mode: modes,
        });
    }

    pub fn records(&self) -> &[TimeSeriesRecord] {
        &self.records
    }

    pub fn finish(self) -> Vec<TimeSeriesRecord> {
        self.records
    }
}
