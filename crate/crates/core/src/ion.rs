//! Trapped-ion realization: Lamb-Dicke parameter and the effective
//! oscillator rates produced by sideband driving.
//!
//! Everything here is in SI units and angular rates (rad/s). Use
//! [`hz_to_angular`] for inputs quoted as ordinary frequencies.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VdpError};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_07e-27;
/// Default reading of "η²(2n+1) ≪ 1".
pub const DEFAULT_LAMB_DICKE_TOLERANCE: f64 = 0.05;
/// Budget reported when η is too small for the bound to matter.
pub const LAMB_DICKE_CAP: usize = 1_000_000;

pub fn hz_to_angular(f: f64) -> f64 {
    2.0 * PI * f
}

pub fn angular_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonParams {
    /// Laser wavelength, m.
    pub wavelength: f64,
    /// Motional mode frequency ω₀, rad/s.
    pub trap_frequency: f64,
    /// Angle between the beam and the mode axis, rad.
    pub beam_angle: f64,
    pub mass_number: f64,
    /// Carrier strength of the blue sideband (gain), rad/s.
    pub omega1: f64,
    /// Carrier strength of the double red sideband (two-phonon loss), rad/s.
    pub omega2: f64,
    /// Carrier strength of the mode-coupling drive, rad/s.
    pub omega_c: f64,
    /// Detuning of the coupling drive from the blue sideband, rad/s.
    pub delta_c: f64,
}

impl IonParams {
    /// ¹⁷¹Yb⁺ at 435.5 nm, ω₀ = 2π×2.5 MHz, θ = 45°, Ω₁ = 2π×20 kHz and
    /// Ω₂ = Ω_c = Δ_c = 2π×1 MHz.
    pub fn ytterbium_171() -> Self {
        Self {
            wavelength: 435.5e-9,
            trap_frequency: hz_to_angular(2.5e6),
            beam_angle: PI / 4.0,
            mass_number: 171.0,
            omega1: hz_to_angular(20e3),
            omega2: hz_to_angular(1e6),
            omega_c: hz_to_angular(1e6),
            delta_c: hz_to_angular(1e6),
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass_number * ATOMIC_MASS_UNIT
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("trap_frequency", self.trap_frequency),
            ("mass_number", self.mass_number),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("omega_c", self.omega_c),
            ("delta_c", self.delta_c),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(VdpError::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        if !(0.0..=PI / 2.0).contains(&self.beam_angle) {
            return Err(VdpError::InvalidParameter(format!(
                "beam_angle must lie in [0, pi/2], got {}",
                self.beam_angle
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRates {
    pub eta: f64,
    /// κ₁ = ηΩ₁/2, rad/s.
    pub kappa1: f64,
    /// κ₂ = η²Ω₂/2, rad/s.
    pub kappa2: f64,
    /// V = η²Ω_c²/(2Δ_c), rad/s.
    pub v: f64,
    pub n_max_lamb_dicke: usize,
}

impl EffectiveRates {
    /// `(κ₂/κ₁, V/κ₁)`: the dimensionless inputs of the oscillator model.
    pub fn in_units_of_kappa1(&self) -> (f64, f64) {
        (self.kappa2 / self.kappa1, self.v / self.kappa1)
    }
}

/// η = (2π/λ)·√(ħ/(2mω₀))·cos θ.
pub fn lamb_dicke(p: &IonParams) -> Result<f64> {
    p.validate()?;
    // cos(π/2) is 6e-17 in floating point; the beam is then orthogonal
    let cos = if p.beam_angle == PI / 2.0 { 0.0 } else { p.beam_angle.cos() };
    Ok(2.0 * PI / p.wavelength * (HBAR / (2.0 * p.mass() * p.trap_frequency)).sqrt() * cos)
}

pub fn effective_rates(p: &IonParams) -> Result<EffectiveRates> {
    let eta = lamb_dicke(p)?;
    Ok(EffectiveRates {
        eta,
        kappa1: eta * p.omega1 / 2.0,
        kappa2: eta * eta * p.omega2 / 2.0,
        v: eta * eta * p.omega_c * p.omega_c / (2.0 * p.delta_c),
        n_max_lamb_dicke: lamb_dicke_budget(eta, DEFAULT_LAMB_DICKE_TOLERANCE)?,
    })
}

/// Largest `n` with `η²(2n+1) ≤ tolerance`, capped at [`LAMB_DICKE_CAP`].
pub fn lamb_dicke_budget(eta: f64, tolerance: f64) -> Result<usize> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(VdpError::InvalidParameter(format!("tolerance must lie in (0, 1), got {tolerance}")));
    }
    if !eta.is_finite() || eta < 0.0 {
        return Err(VdpError::InvalidParameter(format!("eta must be non-negative, got {eta}")));
    }
    let eta2 = eta * eta;
    if eta2 * (2.0 * LAMB_DICKE_CAP as f64 + 1.0) <= tolerance {
        return Ok(LAMB_DICKE_CAP);
    }
    let bound = (tolerance / eta2 - 1.0) / 2.0;
    Ok(if bound < 0.0 { 0 } else { bound.floor() as usize })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ytterbium_numbers() {
        let p = IonParams::ytterbium_171();
        let r = effective_rates(&p).unwrap();
        assert_relative_eq!(r.eta, 0.035, max_relative = 0.005);
        assert_relative_eq!(angular_to_hz(2.0 * r.kappa1), 700.0, max_relative = 0.01);
        // η² Ω₂ with η = 0.0350774 gives 1230 Hz; quoted as 1225 after rounding η to 0.035
        assert_relative_eq!(angular_to_hz(2.0 * r.kappa2), 1225.0, max_relative = 0.01);
        assert_relative_eq!(angular_to_hz(r.v), 612.5, max_relative = 0.01);
        assert!((19..=21).contains(&r.n_max_lamb_dicke));
    }

    #[test]
    fn orthogonal_beam_has_no_coupling() {
        let p = IonParams { beam_angle: PI / 2.0, ..IonParams::ytterbium_171() };
        assert_eq!(lamb_dicke(&p).unwrap(), 0.0);
        assert_eq!(lamb_dicke_budget(0.0, 0.05).unwrap(), LAMB_DICKE_CAP);
    }

    #[test]
    fn eta_scales_as_inverse_root_trap_frequency() {
        let p = IonParams::ytterbium_171();
        let q = IonParams { trap_frequency: 2.0 * p.trap_frequency, ..p };
        assert_relative_eq!(lamb_dicke(&p).unwrap() / lamb_dicke(&q).unwrap(), 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let p = IonParams { wavelength: -1.0, ..IonParams::ytterbium_171() };
        assert!(lamb_dicke(&p).is_err());
        let p = IonParams { beam_angle: 2.0, ..IonParams::ytterbium_171() };
        assert!(lamb_dicke(&p).is_err());
        assert!(lamb_dicke_budget(0.03, 0.0).is_err());
        assert!(lamb_dicke_budget(0.03, 1.5).is_err());
    }

    proptest::proptest! {
        #[test]
        fn budget_is_the_largest_admissible_level(eta in 1e-3f64..0.5, tol in 0.01f64..0.9) {
            let n = lamb_dicke_budget(eta, tol).unwrap();
            let eta2 = eta * eta;
            if n > 0 || eta2 <= tol {
                proptest::prop_assert!(eta2 * (2.0 * n as f64 + 1.0) <= tol * (1.0 + 1e-12));
            }
            proptest::prop_assert!(eta2 * (2.0 * n as f64 + 3.0) > tol);
        }

        #[test]
        fn halving_tolerance_halves_budget(eta in 1e-3f64..0.05) {
            let full = lamb_dicke_budget(eta, 0.05).unwrap() as f64;
            let half = lamb_dicke_budget(eta, 0.025).unwrap() as f64;
            proptest::prop_assert!((half - full / 2.0).abs() <= 1.0);
        }

        #[test]
        fn unit_rescaling_leaves_eta_unchanged(scale in 0.1f64..10.0) {
            // rates in different time units: η depends on ω₀ and m only through ħ/(mω₀)
            let p = IonParams::ytterbium_171();
            let r = effective_rates(&p).unwrap();
            let q = IonParams { omega1: p.omega1 * scale, omega2: p.omega2 * scale, omega_c: p.omega_c * scale, delta_c: p.delta_c * scale, ..p };
            let s = effective_rates(&q).unwrap();
            proptest::prop_assert!(((s.kappa1 / r.kappa1) / scale - 1.0).abs() < 1e-12);
            proptest::prop_assert!(((s.kappa2 / s.kappa1) / (r.kappa2 / r.kappa1) - 1.0).abs() < 1e-12);
            proptest::prop_assert!(((s.v / s.kappa1) / (r.v / r.kappa1) - 1.0).abs() < 1e-12);
        }
    }
}
