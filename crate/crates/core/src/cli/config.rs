//! Run configuration: a TOML file with `[device]`, `[pulse]`, `[grid]`,
//! `[integrator]`, `[sweep]`, `[transport]` and `[output]` sections. Every
//! key is optional and defaults to the reference setup; unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::pulse::{MassProfile, PulseShape, PulseSpec, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub n_x: usize,
    pub m_y: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Initial step; the convergence loop halves it.
    pub dt: f64,
    pub sample_stride: usize,
    /// Relative change of Q accepted between successive halvings.
    pub convergence_tol: f64,
    pub max_halvings: u32,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 2.5e-4,
            sample_stride: 100,
            convergence_tol: 1e-6,
            max_halvings: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UvCoeff {
    Fixed(f64),
    /// Derive the coefficient by a run at the calibration mass.
    Calibrate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub emit_per_mode: bool,
    pub emit_plot_scripts: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub device: DeviceParams,
    /// Pulse; `pulse.m0` is the mass used by single runs.
    pub pulse: PulseSpec,
    pub grid: GridConfig,
    pub integrator: IntegratorConfig,
    /// M₀ values of a sweep, ascending.
    pub sweep: Vec<f64>,
    pub uv_coeff: UvCoeff,
    pub calibration_mass: f64,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            device: DeviceParams::default(),
            pulse: PulseSpec::reference(5.0),
            grid: GridConfig {
                n_x: 32,
                m_y: vec![0],
            },
            integrator: IntegratorConfig::default(),
            sweep: vec![3.0, 4.0, 5.0, 6.0, 7.0],
            uv_coeff: UvCoeff::Fixed(crate::observables::REFERENCE_UV_COEFF),
            calibration_mass: crate::observables::DEFAULT_CALIBRATION_MASS,
            output: OutputConfig {
                directory: PathBuf::from("out"),
                emit_per_mode: false,
                emit_plot_scripts: false,
            },
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.pulse.validate()?;
        let g = &self.grid;
        if g.n_x < 4 || !g.n_x.is_multiple_of(2) {
            return Err(Error::config("grid.n_x", format!("must be even and >= 4, got {}", g.n_x)));
        }
        if g.m_y.is_empty() {
            return Err(Error::config("grid.m_y", "needs at least one value"));
        }
        if has_duplicates(&g.m_y) {
            return Err(Error::config("grid.m_y", "duplicate values"));
        }
        let i = &self.integrator;
        if !(i.convergence_tol > 0.0) {
            return Err(Error::config("integrator.convergence_tol", "must be > 0"));
        }
        crate::dynamics::Schedule::new(self.pulse.t_i, self.pulse.t_f, i.dt, i.sample_stride)?;
        if self.sweep.is_empty() {
            return Err(Error::config("sweep.m0", "needs at least one value"));
        }
        if let Some(m) = self.sweep.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::config("sweep.m0", format!("masses must be > 0, got {m}")));
        }
        if self.sweep.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("sweep.m0", "duplicate masses"));
        }
        if let UvCoeff::Fixed(c) = self.uv_coeff {
            if !c.is_finite() {
                return Err(Error::config("transport.uv_coeff", "must be finite"));
            }
        }
        if !(self.calibration_mass > 0.0 && self.calibration_mass.is_finite()) {
            return Err(Error::config("transport.calibration_mass", "must be > 0"));
        }
        Ok(())
    }
}

fn has_duplicates(v: &[i64]) -> bool {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.windows(2).any(|w| w[0] == w[1])
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    device: RawDevice,
    #[serde(default)]
    pulse: RawPulse,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    integrator: RawIntegrator,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    transport: RawTransport,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    l_x: Option<f64>,
    l_y: Option<f64>,
    d: Option<f64>,
    xi: Option<f64>,
    lambda0: Option<f64>,
    suppression_factor: Option<f64>,
    c_over_c1: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    amplitude: Option<f64>,
    t0: Option<f64>,
    t_i: Option<f64>,
    t_f: Option<f64>,
    shape: Option<String>,
    shape_file: Option<PathBuf>,
    mass_file: Option<PathBuf>,
    m0: Option<f64>,
    m_prime: Option<f64>,
    offset_quanta: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n_x: Option<i64>,
    m_y: Option<Vec<i64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    dt: Option<f64>,
    sample_stride: Option<i64>,
    convergence_tol: Option<f64>,
    max_halvings: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    m0: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawUv {
    Value(f64),
    Word(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransport {
    uv_coeff: Option<RawUv>,
    calibration_mass: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    emit_per_mode: Option<bool>,
    emit_plot_scripts: Option<bool>,
}

fn non_negative(key: &str, v: i64) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::config(key, format!("must be >= 0, got {v}")))
}

/// Parses configuration text. Relative data-file paths resolve against
/// `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
        path: base_dir.to_owned(),
        reason: e.to_string(),
    })?;
    let defaults = RunConfig::default();

    let dd = defaults.device;
    let d = raw.device;
    let device = DeviceParams::new(
        d.l_x.unwrap_or(dd.l_x),
        d.l_y.unwrap_or(dd.l_y),
        d.d.unwrap_or(dd.d),
        d.xi.unwrap_or(dd.xi),
        d.lambda0.unwrap_or(dd.lambda0),
        d.suppression_factor.unwrap_or(dd.suppression_factor),
        d.c_over_c1.unwrap_or(dd.c_over_c1),
    )?;

    let p = raw.pulse;
    let dp = &defaults.pulse;
    let resolve = |f: PathBuf| if f.is_absolute() { f } else { base_dir.join(f) };
    let shape = match (p.shape.as_deref(), p.shape_file) {
        (None | Some("gaussian_derivative"), None) => PulseShape::GaussianDerivative,
        (None | Some("tabulated"), Some(file)) => PulseShape::Tabulated(Table::load(&resolve(file))?),
        (Some("tabulated"), None) => {
            return Err(Error::config("pulse.shape_file", "required when shape = \"tabulated\""))
        }
        (Some("gaussian_derivative"), Some(_)) => {
            return Err(Error::config("pulse.shape_file", "only valid with shape = \"tabulated\""))
        }
        (Some(other), _) => {
            return Err(Error::config(
                "pulse.shape",
                format!("unknown shape `{other}` (expected gaussian_derivative or tabulated)"),
            ))
        }
    };
    let mass = match p.mass_file {
        Some(file) => MassProfile::Tabulated(Table::load(&resolve(file))?),
        None => MassProfile::Constant,
    };
    let pulse = PulseSpec {
        amplitude: p.amplitude.unwrap_or(dp.amplitude),
        t0: p.t0.unwrap_or(dp.t0),
        t_i: p.t_i.unwrap_or(dp.t_i),
        t_f: p.t_f.unwrap_or(dp.t_f),
        shape,
        m0: p.m0.unwrap_or(dp.m0),
        m_prime: p.m_prime.or(dp.m_prime),
        mass,
        offset_quanta: p.offset_quanta.unwrap_or(dp.offset_quanta),
    };

    let grid = GridConfig {
        n_x: match raw.grid.n_x {
            Some(n) => non_negative("grid.n_x", n)?,
            None => defaults.grid.n_x,
        },
        m_y: raw.grid.m_y.unwrap_or(defaults.grid.m_y),
    };

    let di = defaults.integrator;
    let i = raw.integrator;
    let integrator = IntegratorConfig {
        dt: i.dt.unwrap_or(di.dt),
        sample_stride: match i.sample_stride {
            Some(s) => non_negative("integrator.sample_stride", s)?,
            None => di.sample_stride,
        },
        convergence_tol: i.convergence_tol.unwrap_or(di.convergence_tol),
        max_halvings: i.max_halvings.unwrap_or(di.max_halvings),
    };

    let mut sweep = raw.sweep.m0.unwrap_or(defaults.sweep);
    sweep.sort_by(f64::total_cmp);

    let uv_coeff = match raw.transport.uv_coeff {
        None => defaults.uv_coeff,
        Some(RawUv::Value(v)) => UvCoeff::Fixed(v),
        Some(RawUv::Word(w)) if w == "calibrate" => UvCoeff::Calibrate,
        Some(RawUv::Word(w)) => {
            return Err(Error::config(
                "transport.uv_coeff",
                format!("expected a number or \"calibrate\", got `{w}`"),
            ))
        }
    };

    let o = raw.output;
    let config = RunConfig {
        device,
        pulse,
        grid,
        integrator,
        sweep,
        uv_coeff,
        calibration_mass: raw.transport.calibration_mass.unwrap_or(defaults.calibration_mass),
        output: OutputConfig {
            directory: o.directory.unwrap_or(defaults.output.directory),
            emit_per_mode: o.emit_per_mode.unwrap_or(defaults.output.emit_per_mode),
            emit_plot_scripts: o.emit_plot_scripts.unwrap_or(defaults.output.emit_plot_scripts),
        },
    };
    config.validate()?;
    Ok(config)
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base).map_err(|e| match e {
        Error::Parse { reason, .. } => Error::Parse {
            path: path.to_owned(),
            reason,
        },
        other => other,
    })
}
