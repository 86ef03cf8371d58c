//! Time-dependent drive: the biasing vector-potential pulse A′/A_c, the
//! driving force it produces, the effective field Ẽ(t) that shifts k_x, and
//! the vortex mass profile M(t).
//!
//! The simulator works in the frame where the driving potential has been
//! absorbed into the electric field, so the force only appears through Ẽ.
//! The ∂E/∂t contribution to the effective current is neglected for every
//! shape, including tabulated ones.

use std::f64::consts::PI;
use std::path::Path;

use crate::device::DeviceParams;
use crate::error::{Error, Result};

/// Default tolerance of [`check_quantization`], in units of 2πħ/L_x.
pub const QUANTIZATION_TOL: f64 = 1e-6;

/// Minimum half-window in units of t₀.
pub const WINDOW_WIDTHS: f64 = 5.0;

/// Piecewise-linear table of (t, value) samples with strictly increasing t.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    t: Vec<f64>,
    v: Vec<f64>,
}

impl Table {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.len() != v.len() {
            return Err(Error::Domain(format!(
                "table has {} times but {} values",
                t.len(),
                v.len()
            )));
        }
        if t.len() < 2 {
            return Err(Error::Domain("table needs at least two samples".into()));
        }
        if t.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::Domain("table contains non-finite entries".into()));
        }
        if let Some(w) = t.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Domain(format!(
                "table times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { t, v })
    }

    /// Parses two-column `t value` text. Columns may be separated by
    /// whitespace or a comma; `#` starts a comment.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut t = Vec::new();
        let mut v = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(format!("line {}: expected 2 columns, got {}", lineno + 1, cols.len()));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| format!("line {}: `{s}`: {e}", lineno + 1))
            };
            t.push(parse(cols[0])?);
            v.push(parse(cols[1])?);
        }
        Table::new(t, v).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Table::parse(&text).map_err(|reason| Error::Parse {
            path: path.to_owned(),
            reason,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn first(&self) -> (f64, f64) {
        (self.t[0], self.v[0])
    }

    pub fn last(&self) -> (f64, f64) {
        let n = self.t.len() - 1;
        (self.t[n], self.v[n])
    }

    /// Returns the shifted copy t → t + dt.
    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            t: self.t.iter().map(|t| t + dt).collect(),
            v: self.v.clone(),
        }
    }

    fn segment(&self, t: f64) -> usize {
        // index i with t[i] <= t < t[i+1], clamped to the last segment
        match self.t.partition_point(|&x| x <= t) {
            0 => 0,
            p => (p - 1).min(self.t.len() - 2),
        }
    }

    /// Linear interpolation, holding the end values outside the table.
    pub fn hold(&self, t: f64) -> f64 {
        let (t0, v0) = self.first();
        let (t1, v1) = self.last();
        if t <= t0 {
            return v0;
        }
        if t >= t1 {
            return v1;
        }
        let i = self.segment(t);
        let s = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.v[i] + s * (self.v[i + 1] - self.v[i])
    }

    /// Linear interpolation, zero outside the table.
    pub fn pulse(&self, t: f64) -> f64 {
        if t < self.t[0] || t > self.last().0 {
            0.0
        } else {
            self.hold(t)
        }
    }
}

/// Shape of the A′/A_c pulse.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// C (t/t₀) exp(−(t/t₀)²)
    GaussianDerivative,
    /// A′/A_c sampled directly; zero outside the samples.
    Tabulated(Table),
}

/// Vortex pair-production frequency as a function of time.
#[derive(Debug, Clone, PartialEq)]
pub enum MassProfile {
    Constant,
    /// Samples of M(t); must start at M₀.
    Tabulated(Table),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    /// C, amplitude of A′/A_c.
    pub amplitude: f64,
    /// Pulse width t₀.
    pub t0: f64,
    pub t_i: f64,
    pub t_f: f64,
    pub shape: PulseShape,
    /// M₀ in units of c₁/µm.
    pub m0: f64,
    /// Pauli-Villars regulator mass. Only ever used analytically.
    pub m_prime: Option<f64>,
    pub mass: MassProfile,
    /// Constant offset of Ẽ in units of 2π/L_x.
    pub offset_quanta: i64,
}

impl PulseSpec {
    /// C = 0.005, t₀ = 80, window ±400, constant mass.
    pub fn reference(m0: f64) -> Self {
        Self {
            amplitude: 0.005,
            t0: 80.0,
            t_i: -400.0,
            t_f: 400.0,
            shape: PulseShape::GaussianDerivative,
            m0,
            m_prime: None,
            mass: MassProfile::Constant,
            offset_quanta: 0,
        }
    }

    pub fn with_m0(&self, m0: f64) -> Self {
        Self { m0, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("pulse.amplitude", self.amplitude),
            ("pulse.t0", self.t0),
            ("pulse.t_i", self.t_i),
            ("pulse.t_f", self.t_f),
            ("pulse.m0", self.m0),
        ] {
            if !v.is_finite() {
                return Err(Error::config(key, "must be finite"));
            }
        }
        if self.t0 <= 0.0 {
            return Err(Error::config("pulse.t0", format!("must be > 0, got {}", self.t0)));
        }
        if !(self.t_i < 0.0 && 0.0 < self.t_f) {
            return Err(Error::config(
                "pulse.t_i",
                format!("window must satisfy t_i < 0 < t_f, got [{}, {}]", self.t_i, self.t_f),
            ));
        }
        let min_half = WINDOW_WIDTHS * self.t0;
        if -self.t_i < min_half {
            return Err(Error::config(
                "pulse.t_i",
                format!("|t_i| = {} is below 5*t0 = {min_half}", -self.t_i),
            ));
        }
        if self.t_f < min_half {
            return Err(Error::config(
                "pulse.t_f",
                format!("t_f = {} is below 5*t0 = {min_half}", self.t_f),
            ));
        }
        if self.m0 <= 0.0 {
            return Err(Error::config("pulse.m0", format!("must be > 0, got {}", self.m0)));
        }
        if let Some(mp) = self.m_prime {
            if !(mp.is_finite() && mp > 0.0) {
                return Err(Error::config("pulse.m_prime", format!("must be > 0, got {mp}")));
            }
        }
        if let MassProfile::Tabulated(table) = &self.mass {
            let at_start = table.hold(self.t_i);
            if (at_start - self.m0).abs() > 1e-12 * self.m0 {
                return Err(Error::InconsistentMass {
                    at_start,
                    m0: self.m0,
                });
            }
            if table.values().iter().any(|&m| m <= 0.0) {
                return Err(Error::config("pulse.mass_file", "M(t) must stay positive"));
            }
        }
        Ok(())
    }
}

/// A′/A_c at time t.
pub fn vector_potential_ratio(t: f64, spec: &PulseSpec) -> f64 {
    match &spec.shape {
        PulseShape::GaussianDerivative => {
            let s = t / spec.t0;
            spec.amplitude * s * (-s * s).exp()
        }
        PulseShape::Tabulated(table) => table.pulse(t),
    }
}

/// F = −(ħ c d / 8 α λ̄² ξ) · A′/A_c in simulation units.
///
/// The sign follows the London relation; C → −C reverses the transport.
pub fn driving_force_from_potential(a_ratio: f64, device: &DeviceParams) -> f64 {
    -device.drive_prefactor() * a_ratio
}

/// M(t).
pub fn mass_profile(t: f64, spec: &PulseSpec) -> f64 {
    match &spec.mass {
        MassProfile::Constant => spec.m0,
        MassProfile::Tabulated(table) => table.hold(t),
    }
}

#[derive(Debug, Clone)]
enum FieldShape {
    Gaussian { scale: f64, t0: f64, start: f64 },
    Tabulated { table: Table, cumulative: Vec<f64> },
}

/// Ẽ(t) = prefactor · ∫_{t_i}^t A′/A_c dt′, plus an optional quantized
/// offset. Zero at t_i apart from the offset.
#[derive(Debug, Clone)]
pub struct EffectiveField {
    prefactor: f64,
    t_i: f64,
    t_f: f64,
    offset: f64,
    shape: FieldShape,
}

impl EffectiveField {
    pub fn new(spec: &PulseSpec, device: &DeviceParams) -> Self {
        let prefactor = device.drive_prefactor();
        let shape = match &spec.shape {
            PulseShape::GaussianDerivative => {
                let s = spec.t_i / spec.t0;
                FieldShape::Gaussian {
                    scale: 0.5 * spec.amplitude * spec.t0,
                    t0: spec.t0,
                    start: (-s * s).exp(),
                }
            }
            PulseShape::Tabulated(table) => {
                let t = table.times();
                let v = table.values();
                let mut cumulative = Vec::with_capacity(t.len());
                let mut acc = 0.0;
                cumulative.push(0.0);
                for i in 1..t.len() {
                    acc += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
                    cumulative.push(acc);
                }
                FieldShape::Tabulated {
                    table: table.clone(),
                    cumulative,
                }
            }
        };
        let mut field = Self {
            prefactor,
            t_i: spec.t_i,
            t_f: spec.t_f,
            offset: 0.0,
            shape,
        };
        field.offset = spec.offset_quanta as f64 * 2.0 * PI / device.l_x - field.raw(spec.t_i);
        field
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_i, self.t_f)
    }

    /// ∫ A′/A_c from −∞ (or the first tabulated sample) to t.
    fn integral(&self, t: f64) -> f64 {
        match &self.shape {
            FieldShape::Gaussian { scale, t0, .. } => {
                let s = t / t0;
                -scale * (-s * s).exp()
            }
            FieldShape::Tabulated { table, cumulative } => {
                let times = table.times();
                let (t_first, _) = table.first();
                let (t_last, _) = table.last();
                if t <= t_first {
                    return 0.0;
                }
                if t >= t_last {
                    return cumulative[cumulative.len() - 1];
                }
                let i = table.segment(t);
                let h = t - times[i];
                let v0 = table.values()[i];
                let v_t = table.hold(t);
                cumulative[i] + 0.5 * (v0 + v_t) * h
            }
        }
    }

    fn raw(&self, t: f64) -> f64 {
        match &self.shape {
            // written as a difference so the t_i value is exactly zero
            FieldShape::Gaussian { scale, t0, start } => {
                let s = t / t0;
                self.prefactor * scale * (start - (-s * s).exp())
            }
            FieldShape::Tabulated { .. } => self.prefactor * self.integral(t),
        }
    }

    /// Ẽ(t) without the window check. Hot path of the integrator.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.raw(t) + self.offset
    }

    /// Ẽ(t) for t inside the integration window.
    pub fn at(&self, t: f64) -> Result<f64> {
        let slack = 1e-9 * (self.t_f - self.t_i);
        if !(t >= self.t_i - slack && t <= self.t_f + slack) {
            return Err(Error::Domain(format!(
                "t = {t} outside the window [{}, {}]",
                self.t_i, self.t_f
            )));
        }
        Ok(self.value(t))
    }

    /// The constant added to the pulse integral (2π n/L_x, up to the
    /// negligible tail before t_i).
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// dẼ/dt = prefactor · A′/A_c.
    pub fn rate(&self, t: f64) -> f64 {
        match &self.shape {
            FieldShape::Gaussian { scale, t0, .. } => {
                let s = t / t0;
                self.prefactor * 2.0 * scale / t0 * s * (-s * s).exp()
            }
            FieldShape::Tabulated { table, .. } => self.prefactor * table.pulse(t),
        }
    }

    /// Upper bound on |Ẽ(t)| over the window.
    pub fn max_abs(&self) -> f64 {
        let mut candidates = vec![self.t_i, self.t_f];
        match &self.shape {
            FieldShape::Gaussian { .. } => candidates.push(0.0),
            FieldShape::Tabulated { table, .. } => {
                let t = table.times();
                let v = table.values();
                candidates.extend_from_slice(t);
                for i in 0..t.len() - 1 {
                    if v[i] * v[i + 1] < 0.0 {
                        candidates.push(t[i] + (t[i + 1] - t[i]) * v[i] / (v[i] - v[i + 1]));
                    }
                }
            }
        }
        candidates
            .into_iter()
            .filter(|&t| t >= self.t_i && t <= self.t_f)
            .map(|t| self.value(t).abs())
            .fold(0.0, f64::max)
    }
}

/// Ẽ(t) for the given pulse and device.
pub fn effective_field(t: f64, spec: &PulseSpec, device: &DeviceParams) -> Result<f64> {
    EffectiveField::new(spec, device).at(t)
}

/// Checks ∫F dt = 2πħ n′/L_x over the window and returns n′.
pub fn check_quantization(spec: &PulseSpec, device: &DeviceParams, tol: f64) -> Result<i64> {
    let field = EffectiveField::new(spec, device);
    // F = −dẼ/dt, so ∫F dt = Ẽ(t_i) − Ẽ(t_f)
    let integral = field.value(spec.t_i) - field.value(spec.t_f);
    let quanta = integral * device.l_x / (2.0 * PI);
    let nearest = quanta.round();
    let residual = (quanta - nearest).abs();
    if residual >= tol {
        return Err(Error::QuantizationViolation {
            quanta,
            residual,
            tol,
        });
    }
    Ok(nearest as i64)
}
