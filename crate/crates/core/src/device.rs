//! Circuit and material relations for a thin superconducting ring.
//!
//! Units: Gaussian electromagnetism with lengths in microns. Inductances are
//! lengths, fluxes are counted in flux quanta Φ₀, and currents come out in
//! units of c·Φ₀/µm (the factor c of the Gaussian formulas is absorbed into
//! the current unit). Inside the simulator ħ = c₁ = 1, so frequencies and
//! masses are inverse microns and one time unit is 1 µm / c₁.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Fine-structure constant, fixed at 1/137.
pub const ALPHA_EM: f64 = 1.0 / 137.0;

/// Speed of light in µm/ps.
pub const SPEED_OF_LIGHT_UM_PER_PS: f64 = 299.792_458;

/// Film geometry and material lengths (all in µm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Film width along the transport direction.
    pub l_x: f64,
    /// Ring circumference.
    pub l_y: f64,
    /// Film thickness.
    pub d: f64,
    /// Coherence length ξ.
    pub xi: f64,
    /// Unperturbed penetration depth λ.
    pub lambda0: f64,
    /// Reduction factor of the superfluid density; λ̄² = factor · λ².
    pub suppression_factor: f64,
    /// c / c₁.
    pub c_over_c1: f64,
    lambda_bar: f64,
}

impl DeviceParams {
    pub fn new(
        l_x: f64,
        l_y: f64,
        d: f64,
        xi: f64,
        lambda0: f64,
        suppression_factor: f64,
        c_over_c1: f64,
    ) -> Result<Self> {
        let named = [
            ("device.l_x", l_x),
            ("device.l_y", l_y),
            ("device.d", d),
            ("device.xi", xi),
            ("device.lambda0", lambda0),
            ("device.suppression_factor", suppression_factor),
            ("device.c_over_c1", c_over_c1),
        ];
        for (key, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("must be finite and > 0, got {v}")));
            }
        }
        if l_x > l_y {
            return Err(Error::config(
                "device.l_x",
                format!("film width {l_x} exceeds ring circumference {l_y}"),
            ));
        }
        Ok(Self {
            l_x,
            l_y,
            d,
            xi,
            lambda0,
            suppression_factor,
            c_over_c1,
            lambda_bar: lambda0 * suppression_factor.sqrt(),
        })
    }

    /// Suppressed penetration depth λ̄ = √factor · λ.
    pub fn lambda_bar(&self) -> f64 {
        self.lambda_bar
    }

    pub fn lambda_bar_sq(&self) -> f64 {
        self.suppression_factor * self.lambda0 * self.lambda0
    }

    /// Film area V = L_x·L_y.
    pub fn volume(&self) -> f64 {
        self.l_x * self.l_y
    }

    pub fn alpha_em(&self) -> f64 {
        ALPHA_EM
    }

    /// c·d / (8 α λ̄² ξ) with c = c/c₁ in simulation units.
    ///
    /// Converts A′/A_c into a driving force (with a minus sign) and its time
    /// integral into the effective field Ẽ.
    pub fn drive_prefactor(&self) -> f64 {
        self.c_over_c1 * self.d / (8.0 * ALPHA_EM * self.lambda_bar_sq() * self.xi)
    }

    /// Length of one simulation time unit, 1 µm / c₁, in picoseconds.
    ///
    /// Reporting only; the dynamics never use it.
    pub fn time_unit_ps(&self) -> f64 {
        self.c_over_c1 / SPEED_OF_LIGHT_UM_PER_PS
    }
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self::new(1.0, 10.0, 0.004, 0.02, 0.15, 25.0, 7.5).expect("default device is valid")
    }
}

/// Inductances of the double-arm device (length units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Kinetic inductance ℓ of a single ring.
    pub ell: f64,
    pub ell1: f64,
    pub ell2: f64,
    /// Geometric inductance 𝓛₀ of a single ring.
    pub l0: f64,
    /// 𝓛₁ = 𝓛₁₁ − 𝓛₁₂.
    pub l1: f64,
    /// 𝓛₂ = 𝓛₁₂.
    pub l2: f64,
}

impl CircuitParams {
    pub fn new(ell: f64, ell1: f64, ell2: f64, l0: f64, l1: f64, l2: f64) -> Result<Self> {
        for (name, v) in [
            ("ell", ell),
            ("ell1", ell1),
            ("ell2", ell2),
            ("l0", l0),
            ("l1", l1),
            ("l2", l2),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("inductance {name} must be >= 0, got {v}")));
            }
        }
        Ok(Self {
            ell,
            ell1,
            ell2,
            l0,
            l1,
            l2,
        })
    }

    /// Builds the effective inductances from self and mutual inductances.
    pub fn from_self_mutual(
        ell1: f64,
        ell2: f64,
        l11: f64,
        l12: f64,
        l0: f64,
        ell: f64,
    ) -> Result<Self> {
        Self::new(ell, ell1, ell2, l0, l11 - l12, l12)
    }

    /// 𝓛_tot = ℓ₁ + 𝓛₂.
    pub fn l_tot(&self) -> f64 {
        self.ell1 + self.l2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionInputs {
    /// Fermi momentum, µm⁻¹.
    pub k_f: f64,
    /// 2ω₀ / (k_F v_F).
    pub omega0_ratio: f64,
    /// Film width, µm.
    pub l_x: f64,
    /// Film thickness, µm.
    pub d: f64,
}

impl FrictionInputs {
    /// k_F = 1 Å⁻¹, 2ω₀ = 10⁻⁸ k_F v_F, L_x = 1 µm, d = 4 nm.
    pub fn reference() -> Self {
        Self {
            k_f: 1.0e4,
            omega0_ratio: 1.0e-8,
            l_x: 1.0,
            d: 0.004,
        }
    }
}

/// Which logarithm enters the crossover area.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFactor {
    /// ln(L_y / L_x).
    Exact,
    /// Logarithm taken to be of order unity, i.e. replaced by 1.
    Unity,
}

/// Energy difference between the two flux minima and the force it exerts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBias {
    /// Δ𝓔 in units of Φ₀²/µm.
    pub delta_e: f64,
    /// F = Δ𝓔 / L_x.
    pub force: f64,
}

impl EnergyBias {
    /// True when |Δ𝓔| ≤ 2M, i.e. no real vortex pairs can nucleate.
    ///
    /// `pair_mass` must be expressed in the same energy unit as `delta_e`.
    pub fn below_nucleation(&self, pair_mass: f64) -> bool {
        self.delta_e.abs() <= 2.0 * pair_mass
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// ℓ = 4π λ̄² L_y / S.
pub fn kinetic_inductance(lambda_bar: f64, l_y: f64, area: f64) -> Result<f64> {
    require_positive("lambda_bar", lambda_bar)?;
    require_positive("l_y", l_y)?;
    require_positive("cross-sectional area", area)?;
    Ok(4.0 * PI * lambda_bar * lambda_bar * l_y / area)
}

/// 𝓛₀ ≈ 2 L_y ln(L_y / L_x), Gaussian length units.
pub fn geometric_inductance_estimate(l_y: f64, l_x: f64) -> Result<f64> {
    require_positive("l_x", l_x)?;
    if l_y <= l_x {
        return Err(Error::Domain(format!("need l_y > l_x, got {l_y} <= {l_x}")));
    }
    Ok(2.0 * l_y * (l_y / l_x).ln())
}

/// London supercurrent I = −(Φ_ext − nΦ₀)/(ℓ + 𝓛₀), flux in units of Φ₀.
pub fn supercurrent(phi_ext: f64, n: i64, ell: f64, l0: f64) -> Result<f64> {
    let total = ell + l0;
    if total == 0.0 || !total.is_finite() {
        return Err(Error::SingularCircuit(format!("ell + L0 = {total}")));
    }
    Ok(-(phi_ext - n as f64) / total)
}

/// Thick/thin ring crossover area S_cr = 2π λ̄² / ln(L_y/L_x).
pub fn crossover_area(lambda_bar: f64, l_y: f64, l_x: f64, log: LogFactor) -> Result<f64> {
    require_positive("lambda_bar", lambda_bar)?;
    require_positive("l_x", l_x)?;
    if l_y <= l_x {
        return Err(Error::Domain(format!(
            "crossover area needs l_y > l_x, got {l_y} <= {l_x}"
        )));
    }
    let log_factor = match log {
        LogFactor::Exact => (l_y / l_x).ln(),
        LogFactor::Unity => 1.0,
    };
    Ok(2.0 * PI * lambda_bar * lambda_bar / log_factor)
}

/// Currents (I₁, I₂) in the two arms for total current I.
pub fn arm_currents(current: f64, phi_ext: f64, n: i64, circuit: &CircuitParams) -> Result<(f64, f64)> {
    let l_tot = circuit.l_tot();
    if l_tot == 0.0 {
        return Err(Error::SingularCircuit("L_tot = ell1 + L2 = 0".into()));
    }
    let flux = phi_ext - n as f64;
    let i1 = (circuit.l2 * current - flux) / l_tot;
    // I₂ = I − I₁ is the same formula rearranged and keeps I₁ + I₂ = I exact.
    let i2 = current - i1;
    Ok((i1, i2))
}

/// Δ𝓔 = Φ₀ ΔΦ_ext / 𝓛_tot and F = Δ𝓔 / L_x.
pub fn energy_bias(delta_phi_ext: f64, l_tot: f64, l_x: f64) -> Result<EnergyBias> {
    require_positive("L_tot", l_tot)?;
    require_positive("l_x", l_x)?;
    let delta_e = delta_phi_ext / l_tot;
    Ok(EnergyBias {
        delta_e,
        force: delta_e / l_x,
    })
}

/// Euclidean action from core-fermion friction, π ω₀ τ_el n_e L_x² d.
///
/// With τ_el = 2d/v_F and ω₀ = (ratio/2) k_F v_F the Fermi velocity cancels,
/// leaving ratio · k_F⁴ d² L_x² / (3π).
pub fn friction_action(inputs: &FrictionInputs) -> Result<f64> {
    require_positive("k_f", inputs.k_f)?;
    require_positive("omega0_ratio", inputs.omega0_ratio)?;
    require_positive("l_x", inputs.l_x)?;
    require_positive("d", inputs.d)?;
    let n_e = inputs.k_f.powi(3) / (3.0 * PI * PI);
    // ω₀ τ_el = (ratio/2) k_F v_F · 2d / v_F
    let omega_tau = inputs.omega0_ratio * inputs.k_f * inputs.d;
    Ok(PI * omega_tau * n_e * inputs.l_x * inputs.l_x * inputs.d)
}

/// Stable-branch solution u = |ψ|²/|ψ₀|² of u²(1 − u) = j_norm².
///
/// Bisection on [2/3, 1], where the cubic is monotonically decreasing.
pub fn order_parameter_suppression(j_norm: f64) -> Result<f64> {
    if !(j_norm.is_finite() && j_norm >= 0.0) {
        return Err(Error::Domain(format!("j_norm must be >= 0, got {j_norm}")));
    }
    const U_CRIT: f64 = 2.0 / 3.0;
    const G_MAX: f64 = 4.0 / 27.0;
    let target = j_norm * j_norm;
    if target > G_MAX * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::AboveDepairing { j_norm_sq: target });
    }
    if target >= G_MAX {
        return Ok(U_CRIT);
    }
    if target == 0.0 {
        return Ok(1.0);
    }
    let g = |u: f64| u * u * (1.0 - u) - target;
    let (mut lo, mut hi) = (U_CRIT, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
