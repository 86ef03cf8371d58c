use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Periodic k_x grid for one k_y.
///
/// Slots hold m = 0, +1, −1, +2, −2, …, ±(N_x/2 − 1) in that order; every
/// reduction over modes follows it. The grid may be centred on a nonzero
/// integer `m_center`, in which case k_x = 2π(m_center + m)/L_x and the
/// cutoff Λ is measured from the centre.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    n_x: usize,
    l_x: f64,
    l_y: f64,
    m_y: i64,
    m_center: i64,
    slots: Vec<i64>,
    k_x: Vec<f64>,
    k_y: f64,
}

impl ModeGrid {
    pub fn new(n_x: usize, l_x: f64, l_y: f64, m_y: i64) -> Result<Self> {
        Self::centered(n_x, l_x, l_y, m_y, 0)
    }

    pub fn centered(n_x: usize, l_x: f64, l_y: f64, m_y: i64, m_center: i64) -> Result<Self> {
        if n_x < 4 || !n_x.is_multiple_of(2) {
            return Err(Error::config("grid.n_x", format!("must be even and >= 4, got {n_x}")));
        }
        if !(l_x > 0.0 && l_y > 0.0) {
            return Err(Error::config("grid", "periodicity lengths must be positive"));
        }
        let half = (n_x / 2 - 1) as i64;
        let mut slots = Vec::with_capacity(n_x - 1);
        slots.push(0);
        for m in 1..=half {
            slots.push(m);
            slots.push(-m);
        }
        let k_x = slots
            .iter()
            .map(|&m| 2.0 * PI * (m_center + m) as f64 / l_x)
            .collect();
        Ok(Self {
            n_x,
            l_x,
            l_y,
            m_y,
            m_center,
            slots,
            k_x,
            k_y: 2.0 * PI * m_y as f64 / l_y,
        })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn l_x(&self) -> f64 {
        self.l_x
    }

    pub fn l_y(&self) -> f64 {
        self.l_y
    }

    pub fn m_y(&self) -> i64 {
        self.m_y
    }

    pub fn k_y(&self) -> f64 {
        self.k_y
    }

    pub fn m_center(&self) -> i64 {
        self.m_center
    }

    /// k_x of the grid centre.
    pub fn k_center(&self) -> f64 {
        2.0 * PI * self.m_center as f64 / self.l_x
    }

    /// Offsets m relative to the centre, in reduction order.
    pub fn slots(&self) -> &[i64] {
        &self.slots
    }

    pub fn k_x(&self) -> &[f64] {
        &self.k_x
    }

    /// Λ = 2π(N_x/2 − 1)/L_x.
    pub fn cutoff(&self) -> f64 {
        2.0 * PI * (self.n_x / 2 - 1) as f64 / self.l_x
    }

    pub fn volume(&self) -> f64 {
        self.l_x * self.l_y
    }
}

/// Builds the uncentred grid for (N_x, L_x, L_y, m_y).
pub fn build_mode_grid(n_x: usize, l_x: f64, l_y: f64, m_y: i64) -> Result<ModeGrid> {
    ModeGrid::new(n_x, l_x, l_y, m_y)
}
