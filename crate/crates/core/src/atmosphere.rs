//! Atmospheric state: air temperature, attenuation spectrum, and synthetic
//! stand-ins for line-by-line absorption and downwelling sky radiance.

use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::csv::{read_spectrum_csv, write_spectrum_csv};
use crate::spectral::{
    isrf_convolve, AttenuationSpectrum, InstrumentResponse, RadianceSpectrum, SpectralGrid,
};

pub const T_AIR_MIN: f64 = 150.0;
pub const T_AIR_MAX: f64 = 400.0;

/// Everything about the air column the forward model needs.
#[derive(Clone, Debug)]
pub struct AtmosphereState {
    t_air: f64,
    attenuation: AttenuationSpectrum,
    provenance: String,
}

impl AtmosphereState {
    pub fn new(
        t_air: f64,
        attenuation: AttenuationSpectrum,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if !(t_air.is_finite() && (T_AIR_MIN..=T_AIR_MAX).contains(&t_air)) {
            return Err(Error::field(
                "t_air",
                format!("{t_air} K outside [{T_AIR_MIN}, {T_AIR_MAX}]"),
            ));
        }
        Ok(Self {
            t_air,
            attenuation,
            provenance: provenance.into(),
        })
    }

    pub fn t_air(&self) -> f64 {
        self.t_air
    }

    pub fn attenuation(&self) -> &AttenuationSpectrum {
        &self.attenuation
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.attenuation.grid()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Same attenuation, different air temperature.
    pub fn with_t_air(&self, t_air: f64) -> Result<Self> {
        Self::new(t_air, self.attenuation.clone(), self.provenance.clone())
    }
}

/// A single Lorentzian absorption line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorptionLine {
    pub center_um: f64,
    /// Attenuation added at line centre, dB/m.
    pub peak_db_per_m: f64,
    /// Half width at half maximum, um.
    pub half_width_um: f64,
}

impl AbsorptionLine {
    #[inline]
    pub fn profile(&self, lambda_um: f64) -> f64 {
        let w2 = self.half_width_um * self.half_width_um;
        let dx = lambda_um - self.center_um;
        self.peak_db_per_m * w2 / (dx * dx + w2)
    }
}

/// Continuum plus a sum of Lorentzian lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SyntheticLineModel {
    pub lines: Vec<AbsorptionLine>,
    /// Baseline attenuation, dB/m.
    pub continuum: f64,
}

impl SyntheticLineModel {
    pub fn validate(&self, grid: &SpectralGrid) -> Result<()> {
        if !(self.continuum.is_finite() && self.continuum >= 0.0) {
            return Err(Error::field("continuum", "must be finite and >= 0"));
        }
        for (i, l) in self.lines.iter().enumerate() {
            if !(l.peak_db_per_m.is_finite() && l.peak_db_per_m >= 0.0) {
                return Err(Error::field(format!("line[{i}].peak"), "must be >= 0"));
            }
            if !(l.half_width_um.is_finite() && l.half_width_um > 0.0) {
                return Err(Error::field(format!("line[{i}].half_width"), "must be > 0"));
            }
            if !grid.contains(l.center_um) {
                return Err(Error::field(
                    format!("line[{i}].center"),
                    format!(
                        "{} um outside grid span [{}, {}]",
                        l.center_um,
                        grid.first(),
                        grid.last()
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, lambda_um: f64) -> f64 {
        self.continuum + self.lines.iter().map(|l| l.profile(lambda_um)).sum::<f64>()
    }
}

/// Sample a synthetic line model directly at the channel centres.
pub fn synthesize_attenuation(
    model: &SyntheticLineModel,
    grid: &SpectralGrid,
) -> Result<AttenuationSpectrum> {
    model.validate(grid)?;
    let values = grid.wavelengths().iter().map(|&l| model.evaluate(l)).collect();
    AttenuationSpectrum::new(grid.clone(), values)
}

/// Evaluate the line model on a dense grid and integrate it against the
/// instrument response, giving the band-averaged attenuation each channel sees.
pub fn synthesize_attenuation_with_isrf(
    model: &SyntheticLineModel,
    grid: &SpectralGrid,
    response: &InstrumentResponse,
) -> Result<AttenuationSpectrum> {
    model.validate(grid)?;
    let fwhm = response.fwhm_um();
    let narrowest = model
        .lines
        .iter()
        .map(|l| l.half_width_um)
        .fold(f64::INFINITY, f64::min);
    let step = (fwhm / 10.0).min(narrowest / 4.0);
    let lo = grid.first() - 4.0 * fwhm;
    let hi = grid.last() + 4.0 * fwhm;
    let n = ((hi - lo) / step).ceil() as usize + 1;
    let dense = SpectralGrid::uniform(lo, hi, n)?;
    let values: Vec<f64> = dense.wavelengths().iter().map(|&l| model.evaluate(l)).collect();
    let conv = isrf_convolve(&dense, &values, response, grid)?;
    AttenuationSpectrum::new(grid.clone(), conv)
}

/// Read an attenuation table and interpolate it linearly onto `grid`.
pub fn load_attenuation(path: &Path, grid: &SpectralGrid) -> Result<AttenuationSpectrum> {
    let table = read_spectrum_csv(path)?;
    for (i, w) in table.wavelengths.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: table.lines[i + 1],
                reason: "wavelengths must be strictly increasing".into(),
            });
        }
    }
    if let Some(i) = table.values.iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeAttenuation {
            path: path.to_path_buf(),
            row: table.lines[i],
            value: table.values[i],
        });
    }
    let (start, end) = (table.wavelengths[0], *table.wavelengths.last().unwrap());
    for needed in [grid.first(), grid.last()] {
        if needed < start || needed > end {
            return Err(Error::CoverageGap {
                path: path.to_path_buf(),
                start,
                end,
                needed,
            });
        }
    }
    let values = grid
        .wavelengths()
        .iter()
        .map(|&l| interpolate(&table.wavelengths, &table.values, l))
        .collect();
    AttenuationSpectrum::new(grid.clone(), values)
}

pub fn write_attenuation(path: &Path, alpha: &AttenuationSpectrum) -> Result<()> {
    write_spectrum_csv(path, alpha.grid().wavelengths(), alpha.values())
}

/// Piecewise-linear interpolation; `x` must lie within `xs`.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let hi = xs.partition_point(|&v| v < x);
    if hi == 0 {
        return ys[0];
    }
    if hi == xs.len() {
        return ys[xs.len() - 1];
    }
    if xs[hi] == x {
        return ys[hi];
    }
    let lo = hi - 1;
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + t * (ys[hi] - ys[lo])
}

/// Gaussian radiance feature carried by sky radiance near the ozone band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OzoneFeature {
    pub center_um: f64,
    /// Peak added radiance, microflicks.
    pub amplitude: f64,
    /// Gaussian standard deviation, um.
    pub width_um: f64,
}

impl Default for OzoneFeature {
    fn default() -> Self {
        Self {
            center_um: 9.6,
            amplitude: 8.0,
            width_um: 0.05,
        }
    }
}

impl OzoneFeature {
    pub fn profile(&self, lambda_um: f64) -> f64 {
        let z = (lambda_um - self.center_um) / self.width_um;
        self.amplitude * (-0.5 * z * z).exp()
    }
}

/// Sky radiance: smooth base plus an ozone emission feature.
#[derive(Clone, Debug)]
pub struct DownwellingModel {
    pub base: RadianceSpectrum,
    pub ozone: OzoneFeature,
}

impl DownwellingModel {
    /// Grey-body sky base at `t_sky` with the given effective emissivity.
    pub fn grey_sky(
        grid: &SpectralGrid,
        t_sky: f64,
        emissivity: f64,
        ozone: OzoneFeature,
    ) -> Result<Self> {
        let bb = RadianceSpectrum::blackbody(grid.clone(), t_sky)?;
        let values = bb.values().iter().map(|v| v * emissivity).collect();
        Ok(Self {
            base: RadianceSpectrum::new(grid.clone(), values)?,
            ozone,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.base.values().iter().any(|&v| v < 0.0) {
            return Err(Error::field("downwelling.base", "must be non-negative"));
        }
        let o = &self.ozone;
        if !(o.amplitude.is_finite() && o.amplitude >= 0.0) {
            return Err(Error::field("ozone.amplitude", "must be >= 0"));
        }
        if !(o.width_um.is_finite() && o.width_um > 0.0) {
            return Err(Error::field("ozone.width", "must be > 0"));
        }
        Ok(())
    }
}

/// Sky radiance on `grid`. The base must already live on `grid`.
pub fn synthesize_downwelling(
    model: &DownwellingModel,
    grid: &SpectralGrid,
) -> Result<RadianceSpectrum> {
    model.validate()?;
    model.base.grid().ensure_same(grid, "downwelling base")?;
    let values = grid
        .wavelengths()
        .iter()
        .zip(model.base.values())
        .map(|(&l, &b)| b + model.ozone.profile(l))
        .collect();
    RadianceSpectrum::new(grid.clone(), values)
}
