//! Mode-function dynamics: f̈ + ω²(t) f = 0 for every k_x of a grid, with
//! ω² = k_y² + (k_x − Ẽ(t))² + M(t)² in units ħ = c₁ = 1.
//!
//! All modes of a grid advance in lockstep so Ẽ(t) and M(t) are evaluated
//! once per stage. Modes do not couple; the lockstep layout only shares
//! those evaluations.

mod grid;
mod mode;
pub mod rk6;

use num_complex::Complex64;

pub use grid::{build_mode_grid, ModeGrid};
pub use mode::{vacuum_init, ModeState, INIT_FIELD_TOL, MAX_OMEGA_DT};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::pulse::{mass_profile, EffectiveField, MassProfile, PulseSpec};
use rk6::Rk6;

/// Wronskian drift above which a run is flagged.
pub const WRONSKIAN_FLAG: f64 = 1e-10;

/// Wronskian drift above which integration fails outright.
pub const WRONSKIAN_FAIL: f64 = 1e-6;

/// Time-dependent coefficients of the mode equation.
#[derive(Debug, Clone)]
pub struct Drive {
    pub spec: PulseSpec,
    pub field: EffectiveField,
}

impl Drive {
    pub fn new(spec: &PulseSpec, device: &DeviceParams) -> Self {
        Self {
            spec: spec.clone(),
            field: EffectiveField::new(spec, device),
        }
    }

    #[inline]
    pub fn mass(&self, t: f64) -> f64 {
        mass_profile(t, &self.spec)
    }

    fn max_mass(&self) -> f64 {
        match &self.spec.mass {
            MassProfile::Constant => self.spec.m0,
            MassProfile::Tabulated(table) => table.values().iter().copied().fold(0.0, f64::max),
        }
    }

    /// ω²_k(t) = k_y² + (k_x − Ẽ(t))² + M(t)².
    #[inline]
    pub fn omega_sq(&self, k_x: f64, k_y: f64, t: f64) -> f64 {
        let u = k_x - self.field.value(t);
        let m = self.mass(t);
        k_y * k_y + u * u + m * m
    }
}

/// ω²_k(t) for the pulse and device.
pub fn omega_squared(k_x: f64, k_y: f64, t: f64, spec: &PulseSpec, device: &DeviceParams) -> Result<f64> {
    let field = EffectiveField::new(spec, device);
    let e = field.at(t)?;
    let m = mass_profile(t, spec);
    Ok(k_y * k_y + (k_x - e) * (k_x - e) + m * m)
}

/// Fixed-step schedule over the pulse window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t_i: f64,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
}

impl Schedule {
    /// Requires the window to be an integer number of steps.
    pub fn new(t_i: f64, t_f: f64, dt: f64, stride: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config("integrator.dt", format!("must be > 0, got {dt}")));
        }
        if stride == 0 {
            return Err(Error::config("integrator.sample_stride", "must be >= 1"));
        }
        let span = t_f - t_i;
        let steps = (span / dt).round();
        if steps < 1.0 || (steps * dt - span).abs() > 1e-9 * span {
            return Err(Error::config(
                "integrator.dt",
                format!("window length {span} is not a whole number of steps of {dt}"),
            ));
        }
        Ok(Self {
            t_i,
            dt,
            steps: steps as usize,
            stride,
        })
    }

    pub fn time(&self, step: usize) -> f64 {
        self.t_i + step as f64 * self.dt
    }

    pub fn is_sample(&self, step: usize) -> bool {
        step.is_multiple_of(self.stride) || step == self.steps
    }

    /// Number of sampled time points including both endpoints.
    pub fn sample_count(&self) -> usize {
        self.steps / self.stride + 1 + usize::from(!self.steps.is_multiple_of(self.stride))
    }
}

/// State of every mode at one sampled time. Modes follow the grid order.
pub struct SampleView<'a> {
    pub step: usize,
    pub t: f64,
    pub e_tilde: f64,
    pub mass: f64,
    pub k_y: f64,
    pub volume: f64,
    pub k_x: &'a [f64],
    pub f_re: &'a [f64],
    pub f_im: &'a [f64],
    pub g_re: &'a [f64],
    pub g_im: &'a [f64],
}

impl SampleView<'_> {
    pub fn len(&self) -> usize {
        self.k_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_x.is_empty()
    }

    pub fn state(&self, i: usize) -> ModeState {
        ModeState {
            f: Complex64::new(self.f_re[i], self.f_im[i]),
            f_dot: Complex64::new(self.g_re[i], self.g_im[i]),
            t: self.t,
            k_x: self.k_x[i],
            k_y: self.k_y,
        }
    }

    pub fn states(&self) -> Vec<ModeState> {
        (0..self.len()).map(|i| self.state(i)).collect()
    }

    pub fn abs_f_sq(&self, i: usize) -> f64 {
        self.f_re[i] * self.f_re[i] + self.f_im[i] * self.f_im[i]
    }

    pub fn abs_f_dot_sq(&self, i: usize) -> f64 {
        self.g_re[i] * self.g_re[i] + self.g_im[i] * self.g_im[i]
    }

    pub fn omega_sq(&self, i: usize) -> f64 {
        let u = self.k_x[i] - self.e_tilde;
        self.k_y * self.k_y + u * u + self.mass * self.mass
    }

    /// max over modes of |W − i/V|·V.
    pub fn max_wronskian_drift(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                // W = 2i Im(f conj ḟ)
                let im = self.f_im[i] * self.g_re[i] - self.f_re[i] * self.g_im[i];
                (2.0 * im * self.volume - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Outcome of one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSummary {
    pub dt: f64,
    pub steps: usize,
    pub samples: usize,
    /// Largest Wronskian drift over all modes and samples.
    pub max_wronskian_drift: f64,
}

impl IntegrationSummary {
    pub fn flagged(&self) -> bool {
        self.max_wronskian_drift > WRONSKIAN_FLAG
    }
}

/// Integrates the vacuum modes `k_x` (sharing the grid's k_y and volume)
/// from t_i to t_f, calling `observe` at every sampled time.
pub fn integrate_modes<O>(
    k_x: &[f64],
    grid: &ModeGrid,
    drive: &Drive,
    schedule: &Schedule,
    mut observe: O,
) -> Result<IntegrationSummary>
where
    O: FnMut(&SampleView<'_>),
{
    let n = k_x.len();
    let k_y = grid.k_y();
    let volume = grid.volume();
    let field = &drive.field;
    let t_i = schedule.t_i;

    let e_start = field.value(t_i);
    let omega_bound = {
        let k_max = k_x.iter().fold(0.0_f64, |a, k| a.max(k.abs()));
        let u = k_max + field.max_abs();
        let m = drive.max_mass();
        (k_y * k_y + u * u + m * m).sqrt()
    };
    if omega_bound * schedule.dt > MAX_OMEGA_DT {
        return Err(Error::StepSize {
            omega_dt: omega_bound * schedule.dt,
            limit: MAX_OMEGA_DT,
        });
    }

    // [f_re | f_im | g_re | g_im]
    let mut y = vec![0.0; 4 * n];
    for (i, &k) in k_x.iter().enumerate() {
        let s = vacuum_init(k, k_y, grid, drive.spec.m0, t_i, e_start)?;
        let [a, b, c, d] = s.to_real();
        y[i] = a;
        y[n + i] = b;
        y[2 * n + i] = c;
        y[3 * n + i] = d;
    }

    let mut max_drift = 0.0_f64;
    let mut samples = 0;
    let mut emit = |step: usize, t: f64, y: &[f64]| {
        let (f_re, rest) = y.split_at(n);
        let (f_im, rest) = rest.split_at(n);
        let (g_re, g_im) = rest.split_at(n);
        let view = SampleView {
            step,
            t,
            e_tilde: field.value(t),
            mass: drive.mass(t),
            k_y,
            volume,
            k_x,
            f_re,
            f_im,
            g_re,
            g_im,
        };
        max_drift = max_drift.max(view.max_wronskian_drift());
        samples += 1;
        observe(&view);
    };

    emit(0, t_i, &y);
    let mut rk = Rk6::new(4 * n);
    let k_y_sq = k_y * k_y;
    for step in 0..schedule.steps {
        let t = schedule.time(step);
        rk.step(t, schedule.dt, &mut y, |t, y, out| {
            let e = field.value(t);
            let m = drive.mass(t);
            let base = k_y_sq + m * m;
            let (f_re, rest) = y.split_at(n);
            let (f_im, rest) = rest.split_at(n);
            let (g_re, g_im) = rest.split_at(n);
            let (df_re, rest) = out.split_at_mut(n);
            let (df_im, rest) = rest.split_at_mut(n);
            let (dg_re, dg_im) = rest.split_at_mut(n);
            df_re.copy_from_slice(g_re);
            df_im.copy_from_slice(g_im);
            for i in 0..n {
                let u = k_x[i] - e;
                let w2 = base + u * u;
                dg_re[i] = -w2 * f_re[i];
                dg_im[i] = -w2 * f_im[i];
            }
        });
        let next = step + 1;
        if schedule.is_sample(next) {
            emit(next, schedule.time(next), &y);
        }
    }

    if max_drift > WRONSKIAN_FAIL {
        return Err(Error::IntegrationFailure {
            drift: max_drift,
            limit: WRONSKIAN_FAIL,
        });
    }
    Ok(IntegrationSummary {
        dt: schedule.dt,
        steps: schedule.steps,
        samples,
        max_wronskian_drift: max_drift,
    })
}

/// Sampled trajectory of a single mode.
#[derive(Debug, Clone)]
pub struct ModeTrajectory {
    pub samples: Vec<ModeState>,
    pub summary: IntegrationSummary,
}

/// Integrates one mode of the grid from its vacuum state.
pub fn integrate_mode(
    k_x: f64,
    grid: &ModeGrid,
    spec: &PulseSpec,
    device: &DeviceParams,
    dt: f64,
    sample_stride: usize,
) -> Result<ModeTrajectory> {
    let drive = Drive::new(spec, device);
    let schedule = Schedule::new(spec.t_i, spec.t_f, dt, sample_stride)?;
    let mut samples = Vec::with_capacity(schedule.sample_count());
    let summary = integrate_modes(&[k_x], grid, &drive, &schedule, |v| samples.push(v.state(0)))?;
    Ok(ModeTrajectory { samples, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{MassProfile, PulseShape, Table};

    fn quiet(t0: f64, half: f64, m0: f64) -> PulseSpec {
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

    #[test]
    fn omega_squared_examples() {
        let dev = DeviceParams::default();
        let spec = PulseSpec::reference(5.0);
        assert_eq!(omega_squared(0.0, 0.0, -400.0, &spec, &dev).unwrap(), 25.0);
        let field = EffectiveField::new(&spec, &dev);
        let e0 = field.value(0.0);
        let at_min = omega_squared(e0, 0.0, 0.0, &spec, &dev).unwrap();
        assert!((at_min - 25.0).abs() < 1e-12);
        let w2 = omega_squared(2.0 * std::f64::consts::PI, 0.0, 0.0, &spec, &dev).unwrap();
        assert!((w2 - 262.67).abs() < 0.01, "{w2}");
        assert!(omega_squared(0.0, 0.0, 401.0, &spec, &dev).is_err());
    }

    #[test]
    fn schedule_sampling() {
        let s = Schedule::new(-1.0, 1.0, 0.01, 30).unwrap();
        assert_eq!(s.steps, 200);
        assert_eq!(s.sample_count(), 200 / 30 + 2);
        let s = Schedule::new(-1.0, 1.0, 0.01, 20).unwrap();
        assert_eq!(s.sample_count(), 11);
        assert!(Schedule::new(-1.0, 1.0, 0.3, 1).is_err());
        assert!(Schedule::new(-1.0, 1.0, 0.01, 0).is_err());
    }

    #[test]
    fn free_mode_matches_analytic() {
        let dev = DeviceParams::default();
        let spec = quiet(1.0, 5.0, 3.0);
        let grid = ModeGrid::new(8, 1.0, 10.0, 0).unwrap();
        let k = grid.k_x()[3];
        let traj = integrate_mode(k, &grid, &spec, &dev, 1e-3, 500).unwrap();
        let w = (k * k + 9.0_f64).sqrt();
        let amp = (2.0 * w * 10.0_f64).sqrt().recip();
        for s in &traj.samples {
            let want = Complex64::from_polar(amp, -w * (s.t - spec.t_i));
            assert!((s.f - want).norm() <= 1e-9 * amp);
        }
        assert_eq!(traj.samples.len(), 21);
        assert!(!traj.summary.flagged());
    }

    #[test]
    fn mirror_symmetry_without_drive() {
        let dev = DeviceParams::default();
        let spec = quiet(1.0, 5.0, 2.0);
        let grid = ModeGrid::new(8, 1.0, 10.0, 1).unwrap();
        let drive = Drive::new(&spec, &dev);
        for t in [-5.0, 0.0, 3.3] {
            for m in 1..4 {
                let k = 2.0 * std::f64::consts::PI * m as f64;
                assert_eq!(drive.omega_sq(k, grid.k_y(), t), drive.omega_sq(-k, grid.k_y(), t));
            }
        }
        let schedule = Schedule::new(spec.t_i, spec.t_f, 2e-3, 250).unwrap();
        let mut rows = Vec::new();
        integrate_modes(grid.k_x(), &grid, &drive, &schedule, |v| {
            rows.push((1..v.len()).step_by(2).map(|i| (v.abs_f_sq(i), v.abs_f_sq(i + 1))).collect::<Vec<_>>())
        })
        .unwrap();
        for row in rows {
            for (a, b) in row {
                assert!((a - b).abs() <= 1e-15 * a);
            }
        }
    }

    #[test]
    fn step_guard_rejects_coarse_dt() {
        let dev = DeviceParams::default();
        let spec = PulseSpec::reference(5.0);
        let grid = ModeGrid::new(32, 1.0, 10.0, 0).unwrap();
        let err = integrate_mode(0.0, &grid, &spec, &dev, 0.01, 10);
        assert!(err.is_ok(), "single low mode is fine at dt = 0.01");
        let drive = Drive::new(&spec, &dev);
        let schedule = Schedule::new(-400.0, 400.0, 0.01, 10).unwrap();
        assert!(matches!(
            integrate_modes(grid.k_x(), &grid, &drive, &schedule, |_| {}),
            Err(Error::StepSize { .. })
        ));
    }

    #[test]
    fn tabulated_constant_mass_is_bitwise_identical() {
        let dev = DeviceParams::default();
        let spec = quiet(0.5, 2.5, 4.0);
        let flat = PulseSpec {
            mass: MassProfile::Tabulated(Table::new(vec![-2.5, 2.5], vec![4.0, 4.0]).unwrap()),
            ..spec.clone()
        };
        let grid = ModeGrid::new(4, 1.0, 10.0, 0).unwrap();
        let a = integrate_mode(grid.k_x()[1], &grid, &spec, &dev, 1e-3, 100).unwrap();
        let b = integrate_mode(grid.k_x()[1], &grid, &flat, &dev, 1e-3, 100).unwrap();
        assert_eq!(a.samples, b.samples);
    }
}
