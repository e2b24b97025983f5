use crate::error::{Error, Result};

/// CODATA 2018 exact SI values.
pub mod constants {
    /// Planck constant, J s.
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Speed of light in vacuum, m/s.
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Boltzmann constant, J/K.
    pub const BOLTZMANN: f64 = 1.380_649e-23;
    /// W m^-2 sr^-1 m^-1 to uW cm^-2 sr^-1 um^-1 (microflicks).
    pub const MICROFLICK_PER_SI: f64 = 1.0e-4;

    /// `2e-4 h c^2`: the first radiation constant for radiance, already in
    /// microflicks when the wavelength is expressed in metres.
    pub(crate) const FIRST_RADIATION: f64 =
        2.0 * MICROFLICK_PER_SI * PLANCK * SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    /// `h c / k_B`, m K.
    pub(crate) const SECOND_RADIATION: f64 = PLANCK * SPEED_OF_LIGHT / BOLTZMANN;
}

use constants::{FIRST_RADIATION, SECOND_RADIATION};

const UM: f64 = 1e-6;

/// Black-body spectral radiance in microflicks at `lambda_um` and `t_k`.
///
/// Unchecked; callers in hot loops are expected to hold validated inputs.
#[inline]
pub fn blackbody(lambda_um: f64, t_k: f64) -> f64 {
    let l = lambda_um * UM;
    FIRST_RADIATION / l.powi(5) / (SECOND_RADIATION / (l * t_k)).exp_m1()
}

/// Temperature derivative of [`blackbody`], microflicks per kelvin.
#[inline]
pub fn blackbody_dt(lambda_um: f64, t_k: f64) -> f64 {
    let l = lambda_um * UM;
    let x = SECOND_RADIATION / (l * t_k);
    let em1 = x.exp_m1();
    let b = FIRST_RADIATION / l.powi(5) / em1;
    // x e^x / (e^x - 1), written to stay accurate for small x
    b * x * (1.0 + 1.0 / em1) / t_k
}

/// Planck radiance with domain checks.
pub fn planck_radiance(lambda_um: f64, t_k: f64) -> Result<f64> {
    if !(lambda_um.is_finite() && lambda_um > 0.0) {
        return Err(Error::Domain(format!("wavelength {lambda_um} um must be > 0")));
    }
    if !(t_k.is_finite() && t_k > 0.0) {
        return Err(Error::Domain(format!("temperature {t_k} K must be > 0")));
    }
    Ok(blackbody(lambda_um, t_k))
}

/// Inverse Planck function: the temperature whose black-body radiance at
/// `lambda_um` equals `radiance` microflicks.
pub fn brightness_temperature(lambda_um: f64, radiance: f64) -> Result<f64> {
    if !(lambda_um.is_finite() && lambda_um > 0.0) {
        return Err(Error::Domain(format!("wavelength {lambda_um} um must be > 0")));
    }
    if !(radiance.is_finite() && radiance > 0.0) {
        return Err(Error::Domain(format!(
            "radiance {radiance} must be positive for brightness temperature"
        )));
    }
    let l = lambda_um * UM;
    let arg = FIRST_RADIATION / (l.powi(5) * radiance);
    Ok(SECOND_RADIATION / (l * arg.ln_1p()))
}
