use super::{check_len, SpectralGrid};
use crate::error::{Error, Result};

/// Gaussian instrument spectral response.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstrumentResponse {
    fwhm_nm: f64,
}

impl InstrumentResponse {
    pub fn gaussian(fwhm_nm: f64) -> Result<Self> {
        if !(fwhm_nm.is_finite() && fwhm_nm > 0.0) {
            return Err(Error::Domain(format!("ISRF FWHM {fwhm_nm} nm must be > 0")));
        }
        Ok(Self { fwhm_nm })
    }

    pub fn fwhm_nm(&self) -> f64 {
        self.fwhm_nm
    }

    pub fn fwhm_um(&self) -> f64 {
        self.fwhm_nm * 1e-3
    }

    pub fn sigma_um(&self) -> f64 {
        self.fwhm_um() / (8.0 * std::f64::consts::LN_2).sqrt()
    }
}

impl Default for InstrumentResponse {
    fn default() -> Self {
        Self { fwhm_nm: 40.0 }
    }
}

/// Kernel support, in multiples of the FWHM on either side of a channel centre.
const TRUNCATION_FWHM: f64 = 4.0;
const MIN_MARGIN_FWHM: f64 = 3.0;
const MAX_SPACING_PER_FWHM: f64 = 1.0 / 8.0;

/// Integrate a densely sampled spectrum against the instrument response
/// centred on every `target` channel.
///
/// Uses trapezoidal quadrature on the dense grid. The kernel is cut at
/// +-4 FWHM and its discrete weights are renormalized to sum to one per
/// output channel, so constants map to constants exactly.
pub fn isrf_convolve(
    fine_grid: &SpectralGrid,
    fine_values: &[f64],
    response: &InstrumentResponse,
    target: &SpectralGrid,
) -> Result<Vec<f64>> {
    check_len(fine_grid, fine_values, "dense spectrum")?;
    let fwhm = response.fwhm_um();
    let margin = MIN_MARGIN_FWHM * fwhm;
    let lo_margin = target.first() - fine_grid.first();
    let hi_margin = fine_grid.last() - target.last();
    // relative slack absorbs representation error in grid construction
    let slack = 1e-9 * margin;
    if lo_margin + slack < margin {
        return Err(Error::Precondition(format!(
            "dense grid starts {lo_margin:.6} um below the first channel; needs {margin:.6} um (3 FWHM)"
        )));
    }
    if hi_margin + slack < margin {
        return Err(Error::Precondition(format!(
            "dense grid ends {hi_margin:.6} um above the last channel; needs {margin:.6} um (3 FWHM)"
        )));
    }
    let w = fine_grid.wavelengths();
    let max_step = MAX_SPACING_PER_FWHM * fwhm;
    if let Some(i) = (1..w.len()).find(|&i| w[i] - w[i - 1] > max_step * (1.0 + 1e-9)) {
        return Err(Error::Precondition(format!(
            "dense spacing {:.6} um at sample {i} exceeds FWHM/8 = {max_step:.6} um",
            w[i] - w[i - 1]
        )));
    }

    let n = w.len();
    let quad: Vec<f64> = (0..n)
        .map(|j| {
            let left = if j > 0 { w[j] - w[j - 1] } else { 0.0 };
            let right = if j + 1 < n { w[j + 1] - w[j] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect();

    let sigma = response.sigma_um();
    let half = TRUNCATION_FWHM * fwhm;
    let out = target
        .wavelengths()
        .iter()
        .map(|&centre| {
            let start = w.partition_point(|&x| x < centre - half);
            let end = w.partition_point(|&x| x <= centre + half);
            let (mut acc, mut norm) = (0.0, 0.0);
            for j in start..end {
                let z = (w[j] - centre) / sigma;
                let g = (-0.5 * z * z).exp() * quad[j];
                acc += g * fine_values[j];
                norm += g;
            }
            acc / norm
        })
        .collect();
    Ok(out)
}
