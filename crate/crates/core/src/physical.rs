//! Physical constants, photon/Watt conversion, spatial mode counting and
//! amplifier power accounting.
//!
//! Power consumption is expressed in photons per mode per second: `n` is the
//! per-mode photon flux (photons per use times slot rate). Multiplying by `M`
//! and the photon energy `h f_c` gives Watts.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};
use crate::link::Receiver;

pub const PLANCK: f64 = 6.626e-34;
pub const LIGHT_SPEED: f64 = 2.998e8;
pub const TELECOM_WAVELENGTH: f64 = 1550e-9;

/// Snapshot constants; configurable so results do not drift with CODATA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Planck constant in J s.
    pub planck: f64,
    /// Speed of light in m/s.
    pub light_speed: f64,
    /// Carrier wavelength in m.
    pub wavelength: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            planck: PLANCK,
            light_speed: LIGHT_SPEED,
            wavelength: TELECOM_WAVELENGTH,
        }
    }
}

impl PhysicalConstants {
    pub fn new(planck: f64, light_speed: f64, wavelength: f64) -> Result<Self> {
        let c = PhysicalConstants {
            planck,
            light_speed,
            wavelength,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        positive("planck", self.planck)?;
        positive("light_speed", self.light_speed)?;
        positive("wavelength", self.wavelength)?;
        Ok(())
    }

    pub fn with_wavelength(self, wavelength: f64) -> Result<Self> {
        Self::new(self.planck, self.light_speed, wavelength)
    }

    /// `f_c = c / lambda` in Hz.
    pub fn carrier_frequency(&self) -> f64 {
        self.light_speed / self.wavelength
    }

    /// `E = h f_c` in J.
    pub fn photon_energy(&self) -> f64 {
        self.planck * self.carrier_frequency()
    }
}

/// Step-index fiber geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberGeometry {
    /// Core radius in m.
    pub core_radius: f64,
    pub n_core: f64,
    pub n_clad: f64,
}

impl FiberGeometry {
    pub fn new(core_radius: f64, n_core: f64, n_clad: f64) -> Result<Self> {
        let g = FiberGeometry {
            core_radius,
            n_core,
            n_clad,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        positive("core_radius", self.core_radius)?;
        positive("n_clad", self.n_clad)?;
        positive("n_core", self.n_core)?;
        if self.n_core <= self.n_clad {
            return Err(Error::domain("n_core", self.n_core, "must exceed n_clad"));
        }
        Ok(())
    }

    pub fn numerical_aperture(&self) -> f64 {
        // (n_core - n_clad)(n_core + n_clad) avoids squaring two close numbers
        ((self.n_core - self.n_clad) * (self.n_core + self.n_clad)).sqrt()
    }

    /// `V = 2 pi (r / lambda) NA`.
    pub fn v_number(&self, wavelength: f64) -> f64 {
        2.0 * PI * self.core_radius / wavelength * self.numerical_aperture()
    }
}

/// Photons per second carried by `power_watts` at the carrier frequency.
pub fn photon_flux_from_watts(power_watts: f64, constants: &PhysicalConstants) -> Result<f64> {
    non_negative("power (W)", power_watts)?;
    Ok(power_watts / constants.photon_energy())
}

/// Approximate number of guided spatial modes, `N ~ V^2 / 2` (not rounded).
pub fn mode_count(geometry: &FiberGeometry, wavelength: f64) -> Result<f64> {
    geometry.validate()?;
    positive("wavelength", wavelength)?;
    let v = geometry.v_number(wavelength);
    Ok(0.5 * v * v)
}

/// Orthogonal channels per second, `M = N B`.
pub fn total_channels(spatial_modes: f64, slot_rate: f64) -> Result<f64> {
    non_negative("spatial modes", spatial_modes)?;
    if spatial_modes < 1.0 {
        return Err(Error::domain("spatial modes", spatial_modes, "must be at least 1"));
    }
    positive("slot rate", slot_rate)?;
    Ok(spatial_modes * slot_rate)
}

/// Mean photons per mode `P / M` for a launch power in Watts, with
/// `M = N(geometry, lambda) B`.
pub fn photons_per_mode(
    power_watts: f64,
    geometry: &FiberGeometry,
    slot_rate: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let flux = photon_flux_from_watts(power_watts, constants)?;
    let modes = total_channels(mode_count(geometry, constants.wavelength)?, slot_rate)?;
    Ok(flux / modes)
}

/// Number of active amplifiers: `K` (passive) or `K + 1` (active), i.e.
/// `K + 1/2 -+ 1/2`.
pub fn amplifier_count(segment_count: u32, receiver: Receiver) -> f64 {
    let k = f64::from(segment_count);
    match receiver {
        Receiver::Passive => k,
        Receiver::Active => k + 1.0,
    }
}

/// Sender plus amplifier photons, `n + (K + 1/2 +- 1/2)((G - 1) tau_L n + G - 1)`.
pub fn power_consumption(
    n: f64,
    segment_count: u32,
    gain: f64,
    tau_l: f64,
    receiver: Receiver,
) -> Result<f64> {
    non_negative("n", n)?;
    if segment_count == 0 {
        return Err(Error::domain("segment count", 0.0, "must be at least 1"));
    }
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::domain("gain", gain, "must be finite and >= 1"));
    }
    non_negative("tau_L", tau_l)?;
    let excess = gain - 1.0;
    let per_amplifier = excess * tau_l * n + excess;
    Ok(n + amplifier_count(segment_count, receiver) * per_amplifier)
}

/// `P M h f_c` in Watts.
pub fn consumption_watts(
    photons_per_mode: f64,
    modes: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    non_negative("consumption", photons_per_mode)?;
    non_negative("modes", modes)?;
    Ok(photons_per_mode * modes * constants.photon_energy())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn photon_energy_at_1550() {
        let c = PhysicalConstants::default();
        let e = c.photon_energy();
        assert!((e - 6.626e-34 * 2.998e8 / 1550e-9).abs() < 1e-33);
        assert!((e - 1.28e-19).abs() < 0.01e-19);
    }

    #[test]
    fn flux_examples() {
        let c = PhysicalConstants::default();
        let flux = photon_flux_from_watts(1e-3, &c).unwrap();
        assert!(flux > 7.7e15 && flux < 7.9e15);
        assert_eq!(flux.log10().round(), 16.0);
        assert_eq!(photon_flux_from_watts(0.0, &c).unwrap(), 0.0);
        let one = photon_flux_from_watts(c.photon_energy(), &c).unwrap();
        assert!((one - 1.0).abs() < 1e-15);
        assert!(photon_flux_from_watts(-1.0, &c).is_err());
    }

    #[test]
    fn mode_count_for_v_equal_two() {
        let wavelength = 1e-6;
        let na = 0.1f64;
        let n_clad = 1.45f64;
        let n_core = (n_clad * n_clad + na * na).sqrt();
        let r = 2.0 * wavelength / (2.0 * PI * na);
        let geometry = FiberGeometry::new(r, n_core, n_clad).unwrap();
        assert!((mode_count(&geometry, wavelength).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mode_count_scales_inverse_square() {
        let geometry = FiberGeometry::new(25e-6, 1.46, 1.45).unwrap();
        let a = mode_count(&geometry, 1550e-9).unwrap();
        let b = mode_count(&geometry, 775e-9).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
        assert!(a > 149.0 && a < 150.0);
    }

    #[test]
    fn geometry_validation() {
        assert!(FiberGeometry::new(25e-6, 1.45, 1.46).is_err());
        assert!(FiberGeometry::new(25e-6, 1.45, 1.45).is_err());
        assert!(FiberGeometry::new(0.0, 1.46, 1.45).is_err());
    }

    #[test]
    fn channels() {
        assert_eq!(total_channels(1e3, 1e10).unwrap(), 1e13);
        assert_eq!(total_channels(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(total_channels(1e3, 1e12).unwrap(), 1e15);
        assert!(total_channels(1e3, 0.0).is_err());
    }

    #[test]
    fn consumption_unit_gain_is_sender_only() {
        for receiver in [Receiver::Passive, Receiver::Active] {
            assert_eq!(power_consumption(3.5, 5, 1.0, 0.6, receiver).unwrap(), 3.5);
        }
        assert_eq!(power_consumption(0.0, 5, 1.0, 0.6, Receiver::Passive).unwrap(), 0.0);
        assert!(power_consumption(1.0, 5, 0.9, 0.6, Receiver::Passive).is_err());
    }

    #[test]
    fn consumption_counts_amplifiers() {
        let tau_l = (-0.5f64).exp();
        let g = 1.0 / tau_l;
        let passive = power_consumption(1.0, 5, g, tau_l, Receiver::Passive).unwrap();
        let active = power_consumption(1.0, 5, g, tau_l, Receiver::Active).unwrap();
        let per_amp = (g - 1.0) * tau_l + g - 1.0;
        assert!((passive - (1.0 + 5.0 * per_amp)).abs() < 1e-14);
        assert!((active - (1.0 + 6.0 * per_amp)).abs() < 1e-14);
    }

    #[test]
    fn watts_examples() {
        let c = PhysicalConstants::default();
        assert_eq!(consumption_watts(0.0, 1e9, &c).unwrap(), 0.0);
        let w = consumption_watts(1.0, 1.0, &c).unwrap();
        assert!((w - 1.28e-19).abs() < 0.01e-19);
        let doubled = consumption_watts(2.5, 2e6, &c).unwrap();
        let single = consumption_watts(2.5, 1e6, &c).unwrap();
        assert!((doubled / single - 2.0).abs() < 1e-15);
    }
}
