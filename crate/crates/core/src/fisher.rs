//! Fisher information about range carried by each spectral channel under
//! additive white Gaussian noise, and the attenuation level that maximizes it.

use std::f64::consts::LN_10;

use crate::atmosphere::AtmosphereState;
use crate::error::{Error, Result};
use crate::forward::ScenePixel;
use crate::spectral::{blackbody, channel_transmittance, SpectralGrid};

/// Per-channel and total range information for one scene point.
#[derive(Clone, Debug)]
pub struct FisherProfile {
    pub grid: SpectralGrid,
    /// `I_k(d)`, 1/m^2.
    pub per_channel: Vec<f64>,
    /// `I_k / I`; `None` when the total information is zero.
    pub normalized: Option<Vec<f64>>,
    pub total: f64,
    /// Cramer-Rao bound on the range standard deviation, m; `None` when degenerate.
    pub crlb_std: Option<f64>,
}

impl FisherProfile {
    pub fn is_degenerate(&self) -> bool {
        self.normalized.is_none()
    }
}

/// `d mu_k / d d`: how fast each channel's expected radiance moves with range.
pub fn range_sensitivity(pixel: &ScenePixel, atmo: &AtmosphereState) -> Result<Vec<f64>> {
    atmo.grid()
        .ensure_same(pixel.emissivity().grid(), "range_sensitivity")?;
    let (d, t, t_air) = (pixel.range(), pixel.temperature(), atmo.t_air());
    Ok(atmo
        .grid()
        .wavelengths()
        .iter()
        .zip(atmo.attenuation().values())
        .zip(pixel.emissivity().values())
        .map(|((&l, &a), &e)| {
            let contrast = e * blackbody(l, t) - blackbody(l, t_air);
            -(LN_10 / 10.0) * a * channel_transmittance(a, d) * contrast
        })
        .collect())
}

pub fn fisher_profile(
    pixel: &ScenePixel,
    atmo: &AtmosphereState,
    sigma: f64,
) -> Result<FisherProfile> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::field("sigma", format!("{sigma} must be > 0")));
    }
    let var = sigma * sigma;
    let per_channel: Vec<f64> = range_sensitivity(pixel, atmo)?
        .into_iter()
        .map(|s| s * s / var)
        .collect();
    let total: f64 = per_channel.iter().sum();
    let (normalized, crlb_std) = if total > 0.0 {
        (
            Some(per_channel.iter().map(|i| i / total).collect()),
            Some(total.sqrt().recip()),
        )
    } else {
        (None, None)
    };
    Ok(FisherProfile {
        grid: atmo.grid().clone(),
        per_channel,
        normalized,
        total,
        crlb_std,
    })
}

/// Attenuation (dB/m) that maximizes single-channel range information at
/// range `d`: `10 / (ln 10 d)`, i.e. about 4.34 dB of total path loss.
pub fn optimal_attenuation(d: f64) -> Result<f64> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::Domain(format!("range {d} m must be > 0")));
    }
    Ok(10.0 / (LN_10 * d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::observe;
    use crate::spectral::{AttenuationSpectrum, EmissivitySpectrum};

    fn atmo(alpha: Vec<f64>) -> AtmosphereState {
        let grid = SpectralGrid::uniform(8.0, 12.0, alpha.len()).unwrap();
        AtmosphereState::new(289.7, AttenuationSpectrum::new(grid, alpha).unwrap(), "t").unwrap()
    }

    fn pixel(a: &AtmosphereState, d: f64, t: f64, eps: f64) -> ScenePixel {
        ScenePixel::new(d, t, EmissivitySpectrum::constant(a.grid().clone(), eps).unwrap())
            .unwrap()
    }

    #[test]
    fn zero_alpha_or_zero_contrast_gives_zero() {
        let a = atmo(vec![0.0, 0.05, 0.2]);
        let s = range_sensitivity(&pixel(&a, 50.0, 280.0, 0.95), &a).unwrap();
        assert_eq!(s[0], 0.0);
        assert!(s[1] != 0.0 && s[2] != 0.0);
        let s = range_sensitivity(&pixel(&a, 50.0, 289.7, 1.0), &a).unwrap();
        assert!(s.iter().all(|&v| v == 0.0));
        let p = fisher_profile(&pixel(&a, 50.0, 289.7, 1.0), &a, 1.0).unwrap();
        assert!(p.is_degenerate());
        assert_eq!(p.total, 0.0);
        assert!(p.crlb_std.is_none());
    }

    #[test]
    fn sensitivity_matches_central_difference() {
        let a = atmo(vec![0.001, 0.01, 0.03, 0.08, 0.2]);
        for &(d, t, e) in &[(30.0, 280.0, 0.9), (120.0, 295.0, 0.97), (5.0, 260.0, 0.6)] {
            let an = range_sensitivity(&pixel(&a, d, t, e), &a).unwrap();
            let h = 1e-3;
            let up = observe(&pixel(&a, d + h, t, e), &a).unwrap();
            let dn = observe(&pixel(&a, d - h, t, e), &a).unwrap();
            for k in 0..an.len() {
                let fd = (up.values()[k] - dn.values()[k]) / (2.0 * h);
                assert!((fd - an[k]).abs() <= 1e-6 * an[k].abs(), "{k}: {fd} vs {}", an[k]);
            }
        }
    }

    #[test]
    fn sigma_scaling() {
        let a = atmo(vec![0.001, 0.01, 0.03, 0.08, 0.2]);
        let px = pixel(&a, 60.0, 282.0, 0.93);
        let p1 = fisher_profile(&px, &a, 1.0).unwrap();
        let p2 = fisher_profile(&px, &a, 2.0).unwrap();
        assert!((p1.total / 4.0 - p2.total).abs() < 1e-15 * p1.total);
        let (n1, n2) = (p1.normalized.unwrap(), p2.normalized.unwrap());
        for (x, y) in n1.iter().zip(&n2) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!((n1.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((p1.crlb_std.unwrap() - p1.total.powf(-0.5)).abs() < 1e-15);
        assert!(fisher_profile(&px, &a, 0.0).is_err());
    }

    #[test]
    fn optimal_attenuation_values() {
        assert!((optimal_attenuation(100.0).unwrap() - 0.043_429_448_190_325_18).abs() < 1e-15);
        assert!(optimal_attenuation(0.0).is_err());
        assert!(optimal_attenuation(-5.0).is_err());
    }
}
