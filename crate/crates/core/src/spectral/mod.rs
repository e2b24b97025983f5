//! Spectral vocabulary shared by every other module: wavelength grids,
//! typed spectra, black-body radiometry, Beer-Lambert transmittance and the
//! instrument spectral response.
//!
//! All radiances are in microflicks (uW sr^-1 cm^-2 um^-1) and all
//! wavelengths in micrometres.

pub mod csv;
mod isrf;
mod planck;

use std::sync::Arc;

use crate::error::{Error, Result};

pub use isrf::{isrf_convolve, InstrumentResponse};
pub use planck::{
    blackbody, blackbody_dt, brightness_temperature, constants, planck_radiance,
};

/// Ordered set of channel centre wavelengths (um), strictly increasing.
///
/// Clones share the underlying storage. Two grids are equal only when their
/// wavelength arrays are bit-for-bit identical; nothing is ever resampled
/// implicitly.
#[derive(Clone, Debug)]
pub struct SpectralGrid {
    wavelengths: Arc<[f64]>,
}

impl SpectralGrid {
    pub fn new(wavelengths: Vec<f64>) -> Result<Self> {
        if wavelengths.is_empty() {
            return Err(Error::Domain("spectral grid needs at least one channel".into()));
        }
        for (i, &w) in wavelengths.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Domain(format!(
                    "wavelength {w} at channel {i} is not a positive finite value"
                )));
            }
            if i > 0 && w <= wavelengths[i - 1] {
                return Err(Error::Domain(format!(
                    "wavelengths not strictly increasing at channel {i}"
                )));
            }
        }
        Ok(Self {
            wavelengths: wavelengths.into(),
        })
    }

    /// `count` channels uniformly spaced from `start_um` to `end_um` inclusive.
    pub fn uniform(start_um: f64, end_um: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Domain("channel count must be >= 1".into()));
        }
        if count == 1 {
            return Self::new(vec![start_um]);
        }
        let step = (end_um - start_um) / (count - 1) as f64;
        let w = (0..count)
            .map(|i| {
                if i == count - 1 {
                    end_um
                } else {
                    start_um + step * i as f64
                }
            })
            .collect();
        Self::new(w)
    }

    /// 256 channels across 8.0-13.2 um, the layout of a typical LWIR pushbroom imager.
    pub fn lwir_default() -> Self {
        Self::uniform(8.0, 13.2, 256).expect("static grid is valid")
    }

    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn first(&self) -> f64 {
        self.wavelengths[0]
    }

    pub fn last(&self) -> f64 {
        self.wavelengths[self.len() - 1]
    }

    /// Index of the channel closest to `lambda_um`; exact midpoints resolve
    /// to the lower index.
    pub fn nearest_channel(&self, lambda_um: f64) -> usize {
        let w = &self.wavelengths;
        let upper = w.partition_point(|&x| x < lambda_um);
        if upper == 0 {
            return 0;
        }
        if upper == w.len() {
            return w.len() - 1;
        }
        let lo = upper - 1;
        if lambda_um - w[lo] <= w[upper] - lambda_um {
            lo
        } else {
            upper
        }
    }

    pub fn contains(&self, lambda_um: f64) -> bool {
        lambda_um >= self.first() && lambda_um <= self.last()
    }

    pub(crate) fn ensure_same(&self, other: &SpectralGrid, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: grids differ ({} vs {} channels)",
                self.len(),
                other.len()
            )))
        }
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.wavelengths, &other.wavelengths)
            || (self.wavelengths.len() == other.wavelengths.len()
                && self
                    .wavelengths
                    .iter()
                    .zip(other.wavelengths.iter())
                    .all(|(a, b)| a.to_bits() == b.to_bits()))
    }
}

fn check_len(grid: &SpectralGrid, values: &[f64], what: &str) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{what}: {} values for a {}-channel grid",
            values.len(),
            grid.len()
        )));
    }
    Ok(())
}

/// Radiance per channel, microflicks.
#[derive(Clone, Debug, PartialEq)]
pub struct RadianceSpectrum {
    grid: SpectralGrid,
    values: Vec<f64>,
}

impl RadianceSpectrum {
    pub fn new(grid: SpectralGrid, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, &values, "radiance")?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("radiance at channel {i} is not finite")));
        }
        Ok(Self { grid, values })
    }

    /// Black-body radiance at temperature `t_k` on every channel.
    pub fn blackbody(grid: SpectralGrid, t_k: f64) -> Result<Self> {
        let values = grid
            .wavelengths()
            .iter()
            .map(|&w| planck_radiance(w, t_k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Dimensionless emissivity per channel, each value in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct EmissivitySpectrum {
    grid: SpectralGrid,
    values: Vec<f64>,
}

impl EmissivitySpectrum {
    pub fn new(grid: SpectralGrid, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, &values, "emissivity")?;
        if let Some(i) = values
            .iter()
            .position(|v| !(v.is_finite() && (0.0..=1.0).contains(v)))
        {
            return Err(Error::Domain(format!(
                "emissivity {} at channel {i} outside [0, 1]",
                values[i]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: SpectralGrid, value: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![value; n])
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Atmospheric attenuation coefficient per channel, dB/m.
#[derive(Clone, Debug, PartialEq)]
pub struct AttenuationSpectrum {
    grid: SpectralGrid,
    values: Vec<f64>,
}

impl AttenuationSpectrum {
    pub fn new(grid: SpectralGrid, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, &values, "attenuation")?;
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(format!(
                "attenuation {} at channel {i} must be finite and >= 0",
                values[i]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Beer-Lambert transmittance for a single channel, `10^(-alpha d / 10)`.
#[inline]
pub fn channel_transmittance(alpha_db_per_m: f64, d_m: f64) -> f64 {
    10f64.powf(-alpha_db_per_m * d_m / 10.0)
}

/// Per-channel transmittance over a homogeneous path of length `d_m`.
pub fn transmittance(alpha: &AttenuationSpectrum, d_m: f64) -> Result<Vec<f64>> {
    if !(d_m.is_finite() && d_m >= 0.0) {
        return Err(Error::Domain(format!("range {d_m} m must be finite and >= 0")));
    }
    Ok(alpha
        .values()
        .iter()
        .map(|&a| channel_transmittance(a, d_m))
        .collect())
}
