//! Sphere RCS across the Rayleigh, resonance and optical regions.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::{Error, Result};

/// Upper ka of the Rayleigh region.
pub const RAYLEIGH_LIMIT: f64 = 0.5;
/// Lower ka of the optical region.
pub const OPTICAL_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScatteringRegion {
    Rayleigh,
    Resonance,
    Optical,
}

fn check(size: f64, wavelength: f64) -> Result<f64> {
    if !(size > 0.0) || !(wavelength > 0.0) || !size.is_finite() || !wavelength.is_finite() {
        return Err(Error::invalid("size and wavelength must be positive"));
    }
    Ok(TAU * size / wavelength)
}

pub fn scattering_region(characteristic_size: f64, wavelength: f64) -> Result<ScatteringRegion> {
    let ka = check(characteristic_size, wavelength)?;
    Ok(region_of(ka))
}

fn region_of(ka: f64) -> ScatteringRegion {
    if ka < RAYLEIGH_LIMIT {
        ScatteringRegion::Rayleigh
    } else if ka < OPTICAL_LIMIT {
        ScatteringRegion::Resonance
    } else {
        ScatteringRegion::Optical
    }
}

fn rayleigh_norm(ka: f64) -> f64 {
    9.0 * ka.powi(4)
}

fn resonance_surrogate(ka: f64) -> f64 {
    1.0 + 2.65 * (-0.55 * (ka - 1.0)).exp() * (PI * (ka - 1.0) / 1.3).cos()
}

/// σ/πa² as a function of ka.
///
/// Inside the resonance band the fitted oscillation is pulled onto the
/// Rayleigh value below ka = 1 and onto the optical value above ka = 9 by
/// quadratic blending terms, so the curve is continuous and the first peak
/// is untouched.
pub fn normalized_rcs(ka: f64) -> f64 {
    match region_of(ka) {
        ScatteringRegion::Rayleigh => rayleigh_norm(ka),
        ScatteringRegion::Optical => 1.0,
        ScatteringRegion::Resonance => {
            let mut s = resonance_surrogate(ka);
            if ka < 1.0 {
                let w = ((1.0 - ka) / (1.0 - RAYLEIGH_LIMIT)).powi(2);
                s += w * (rayleigh_norm(RAYLEIGH_LIMIT) - resonance_surrogate(RAYLEIGH_LIMIT));
            }
            if ka > OPTICAL_LIMIT - 1.0 {
                let w = (ka - (OPTICAL_LIMIT - 1.0)).powi(2);
                s += w * (1.0 - resonance_surrogate(OPTICAL_LIMIT));
            }
            s
        }
    }
}

/// Monostatic RCS of a conducting sphere, m².
pub fn sphere_rcs(radius: f64, wavelength: f64) -> Result<f64> {
    let ka = check(radius, wavelength)?;
    Ok(PI * radius * radius * normalized_rcs(ka))
}

/// Log-spaced (ka, σ/πa²) samples.
pub fn ka_sweep(ka_min: f64, ka_max: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    if !(ka_min > 0.0) || !(ka_max > ka_min) || points < 2 {
        return Err(Error::invalid("ka sweep needs 0 < ka_min < ka_max and >= 2 points"));
    }
    let (l0, l1) = (ka_min.ln(), ka_max.ln());
    Ok((0..points)
        .map(|i| {
            let ka = (l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp();
            (ka, normalized_rcs(ka))
        })
        .collect())
}
