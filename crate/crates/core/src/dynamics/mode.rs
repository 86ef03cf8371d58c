use num_complex::Complex64;

use super::grid::ModeGrid;
use super::rk6::Rk6;
use crate::error::{Error, Result};

/// Largest allowed ω·dt for a single step.
pub const MAX_OMEGA_DT: f64 = 0.5;

/// Tolerance on Ẽ(t_i) relative to the grid centre for vacuum initialization.
pub const INIT_FIELD_TOL: f64 = 1e-9;

/// Mode function f and its time derivative for one wavevector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub f: Complex64,
    pub f_dot: Complex64,
    pub t: f64,
    pub k_x: f64,
    pub k_y: f64,
}

impl ModeState {
    /// W = f·conj(ḟ) − conj(f)·ḟ, equal to i/V for vacuum modes.
    pub fn wronskian(&self) -> Complex64 {
        self.f * self.f_dot.conj() - self.f.conj() * self.f_dot
    }

    /// |W − i/V| · V.
    pub fn wronskian_drift(&self, volume: f64) -> f64 {
        (self.wronskian() - Complex64::new(0.0, 1.0 / volume)).norm() * volume
    }

    pub fn abs_f_sq(&self) -> f64 {
        self.f.norm_sqr()
    }

    pub(crate) fn to_real(self) -> [f64; 4] {
        [self.f.re, self.f.im, self.f_dot.re, self.f_dot.im]
    }

    /// One sixth-order step of f̈ = −ω²(t) f.
    pub fn rk6_step<W>(&self, dt: f64, omega_sq: W) -> Result<ModeState>
    where
        W: Fn(f64) -> f64,
    {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config("integrator.dt", format!("must be > 0, got {dt}")));
        }
        let w_max = omega_sq(self.t).max(omega_sq(self.t + dt)).max(0.0).sqrt();
        if w_max * dt > MAX_OMEGA_DT {
            return Err(Error::StepSize {
                omega_dt: w_max * dt,
                limit: MAX_OMEGA_DT,
            });
        }
        let mut y = self.to_real();
        Rk6::new(4).step(self.t, dt, &mut y, |t, y, out| {
            let w2 = omega_sq(t);
            out[0] = y[2];
            out[1] = y[3];
            out[2] = -w2 * y[0];
            out[3] = -w2 * y[1];
        });
        Ok(ModeState {
            f: Complex64::new(y[0], y[1]),
            f_dot: Complex64::new(y[2], y[3]),
            t: self.t + dt,
            ..*self
        })
    }
}

/// Vacuum mode at t_i: f = (2ω⁽⁰⁾V)^{-1/2}, ḟ = −iω⁽⁰⁾f.
///
/// `e_tilde_ti` is Ẽ(t_i); it must coincide with the grid centre, and the
/// initial frequency is built from the kinetic momentum k_x − Ẽ(t_i).
pub fn vacuum_init(
    k_x: f64,
    k_y: f64,
    grid: &ModeGrid,
    m0: f64,
    t_i: f64,
    e_tilde_ti: f64,
) -> Result<ModeState> {
    let mismatch = e_tilde_ti - grid.k_center();
    if mismatch.abs() > INIT_FIELD_TOL * (1.0 + grid.k_center().abs()) {
        return Err(Error::Initialization(format!(
            "effective field at t_i is {e_tilde_ti}, expected {}",
            grid.k_center()
        )));
    }
    if !(m0 > 0.0) {
        return Err(Error::Initialization(format!("M0 must be > 0, got {m0}")));
    }
    let u = k_x - e_tilde_ti;
    let omega0 = (u * u + k_y * k_y + m0 * m0).sqrt();
    let amp = (2.0 * omega0 * grid.volume()).sqrt().recip();
    let f = Complex64::new(amp, 0.0);
    Ok(ModeState {
        f,
        f_dot: Complex64::new(0.0, -omega0) * f,
        t: t_i,
        k_x,
        k_y,
    })
}
