//! Closed-form range from one absorptive and one clear channel.
//!
//! With equal object emission factors at the two channels the air terms cancel
//! in the ratio of path-corrected radiances, leaving
//!
//! ```text
//! d = -10 / (alpha_1 - alpha_2) * log10((L_1 - B_1(T_air)) / (L_2 - B_2(T_air)))
//! ```

use crate::atmosphere::AtmosphereState;
use crate::error::{Error, Result};
use crate::spectral::{blackbody, brightness_temperature, channel_transmittance, RadianceSpectrum, SpectralGrid};

/// Where the air temperature comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AirTemperature {
    /// Use the atmosphere's own `t_air`.
    Atmosphere,
    /// A value from another sensor, K.
    Known(f64),
    /// Brightness temperature of an opaque channel of the same spectrum.
    Saturated(usize),
}

/// Whether path emission enters the inversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AirEmission {
    Included,
    /// Treat the measurement as attenuated object radiance only. Kept for
    /// comparison; the estimate may come out negative.
    Neglected,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BispectralConfig {
    /// Absorptive channel index.
    pub band1: usize,
    /// Clear channel index.
    pub band2: usize,
    pub t_air: AirTemperature,
    pub air_emission: AirEmission,
}

impl BispectralConfig {
    pub fn new(band1: usize, band2: usize) -> Self {
        Self {
            band1,
            band2,
            t_air: AirTemperature::Atmosphere,
            air_emission: AirEmission::Included,
        }
    }

    /// Channels nearest to the two wavelengths (lower index on ties).
    pub fn from_wavelengths(grid: &SpectralGrid, lambda1_um: f64, lambda2_um: f64) -> Result<Self> {
        for (name, l) in [("lambda1", lambda1_um), ("lambda2", lambda2_um)] {
            if !grid.contains(l) {
                return Err(Error::field(name, format!("{l} um outside the grid")));
            }
        }
        Ok(Self::new(grid.nearest_channel(lambda1_um), grid.nearest_channel(lambda2_um)))
    }

    pub fn validate(&self, atmo: &AtmosphereState) -> Result<()> {
        let k = atmo.grid().len();
        for (name, b) in [("band1", self.band1), ("band2", self.band2)] {
            if b >= k {
                return Err(Error::field(name, format!("channel {b} of {k}")));
            }
        }
        if self.band1 == self.band2 {
            return Err(Error::field("band2", "must differ from band1"));
        }
        let alpha = atmo.attenuation().values();
        if alpha[self.band1] == alpha[self.band2] {
            return Err(Error::field("band2", "attenuation equal to band1"));
        }
        match self.t_air {
            AirTemperature::Known(t) if !(t.is_finite() && t > 0.0) => {
                Err(Error::field("t_air", format!("{t} K")))
            }
            AirTemperature::Saturated(c) if c >= k => {
                Err(Error::field("t_air", format!("saturated channel {c} of {k}")))
            }
            _ => Ok(()),
        }
    }
}

/// Brightness temperature of an opaque channel; with `tau ~ 0` the channel
/// sees only air.
pub fn estimate_air_temperature(spectrum: &RadianceSpectrum, saturated_channel: usize) -> Result<f64> {
    let k = spectrum.values().len();
    let Some(&l) = spectrum.values().get(saturated_channel) else {
        return Err(Error::field("saturated_channel", format!("channel {saturated_channel} of {k}")));
    };
    if l <= 0.0 {
        return Err(Error::Domain(format!("radiance {l} at channel {saturated_channel} must be > 0")));
    }
    brightness_temperature(spectrum.grid().wavelengths()[saturated_channel], l)
}

fn air_temperature(spectrum: &RadianceSpectrum, atmo: &AtmosphereState, cfg: &BispectralConfig) -> Result<f64> {
    match cfg.t_air {
        AirTemperature::Atmosphere => Ok(atmo.t_air()),
        AirTemperature::Known(t) => Ok(t),
        AirTemperature::Saturated(c) => estimate_air_temperature(spectrum, c),
    }
}

/// Path-radiance offsets subtracted from each channel.
fn offsets(spectrum: &RadianceSpectrum, atmo: &AtmosphereState, cfg: &BispectralConfig) -> Result<[f64; 2]> {
    Ok(match cfg.air_emission {
        AirEmission::Neglected => [0.0, 0.0],
        AirEmission::Included => {
            let t_air = air_temperature(spectrum, atmo, cfg)?;
            let wl = atmo.grid().wavelengths();
            [blackbody(wl[cfg.band1], t_air), blackbody(wl[cfg.band2], t_air)]
        }
    })
}

/// Signed range estimate, m. Negative values are returned as-is.
pub fn bispectral_range(spectrum: &RadianceSpectrum, atmo: &AtmosphereState, cfg: &BispectralConfig) -> Result<f64> {
    atmo.grid().ensure_same(spectrum.grid(), "bispectral_range")?;
    cfg.validate(atmo)?;
    let off = offsets(spectrum, atmo, cfg)?;
    let l = spectrum.values();
    let num = l[cfg.band1] - off[0];
    let den = l[cfg.band2] - off[1];
    if den == 0.0 || num == 0.0 {
        return Err(Error::UndefinedEstimate(format!(
            "path-corrected radiance is zero ({num}, {den})"
        )));
    }
    let ratio = num / den;
    if !(ratio > 0.0) {
        return Err(Error::UndefinedEstimate(format!("radiance ratio {ratio} is not positive")));
    }
    let alpha = atmo.attenuation().values();
    Ok(-10.0 / (alpha[cfg.band1] - alpha[cfg.band2]) * ratio.log10())
}

/// Object radiance at the two channels once range is known.
pub fn bispectral_object_radiance(
    spectrum: &RadianceSpectrum,
    atmo: &AtmosphereState,
    d_hat: f64,
    cfg: &BispectralConfig,
) -> Result<[f64; 2]> {
    if !d_hat.is_finite() {
        return Err(Error::Domain(format!("range estimate {d_hat} is not finite")));
    }
    atmo.grid().ensure_same(spectrum.grid(), "bispectral_object_radiance")?;
    cfg.validate(atmo)?;
    let off = offsets(spectrum, atmo, cfg)?;
    let alpha = atmo.attenuation().values();
    let l = spectrum.values();
    let recover = |i: usize, band: usize| (l[band] - off[i]) / channel_transmittance(alpha[band], d_hat) + off[i];
    Ok([recover(0, cfg.band1), recover(1, cfg.band2)])
}
