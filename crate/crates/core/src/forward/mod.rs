//! Forward radiative model: object emission attenuated along the path, air
//! path emission, optional diffuse reflection of environmental sources, and
//! additive white Gaussian sensor noise.

mod cube;
pub mod hsrc;

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::atmosphere::AtmosphereState;
use crate::error::{Error, Result};
use crate::spectral::{blackbody, channel_transmittance, EmissivitySpectrum, RadianceSpectrum};

pub use cube::{HyperCube, SceneTruth};

pub const T_OBJECT_MIN: f64 = 150.0;
pub const T_OBJECT_MAX: f64 = 400.0;

/// Range, temperature and emissivity of one scene point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenePixel {
    d: f64,
    t: f64,
    emissivity: EmissivitySpectrum,
}

impl ScenePixel {
    pub fn new(d: f64, t: f64, emissivity: EmissivitySpectrum) -> Result<Self> {
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::field("d", format!("range {d} m must be >= 0")));
        }
        if !(t.is_finite() && (T_OBJECT_MIN..=T_OBJECT_MAX).contains(&t)) {
            return Err(Error::field(
                "T",
                format!("{t} K outside [{T_OBJECT_MIN}, {T_OBJECT_MAX}]"),
            ));
        }
        Ok(Self { d, t, emissivity })
    }

    pub fn range(&self) -> f64 {
        self.d
    }

    pub fn temperature(&self) -> f64 {
        self.t
    }

    pub fn emissivity(&self) -> &EmissivitySpectrum {
        &self.emissivity
    }
}

/// A diffuse emitter seen by the object, e.g. the sky.
#[derive(Clone, Debug)]
pub struct EnvironmentalSource {
    radiance: RadianceSpectrum,
    solid_angle: f64,
}

impl EnvironmentalSource {
    pub fn new(radiance: RadianceSpectrum, solid_angle_sr: f64) -> Result<Self> {
        if !(solid_angle_sr > 0.0 && solid_angle_sr <= 2.0 * PI) {
            return Err(Error::field(
                "solid_angle",
                format!("{solid_angle_sr} sr outside (0, 2pi]"),
            ));
        }
        Ok(Self {
            radiance,
            solid_angle: solid_angle_sr,
        })
    }

    pub fn radiance(&self) -> &RadianceSpectrum {
        &self.radiance
    }

    pub fn solid_angle(&self) -> f64 {
        self.solid_angle
    }
}

/// Additive white Gaussian noise, microflicks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::field("sigma", format!("{sigma} must be >= 0")));
        }
        Ok(Self { sigma, seed })
    }

    pub fn noiseless() -> Self {
        Self { sigma: 0.0, seed: 0 }
    }
}

/// Single-channel model: `tau (eps B(T) - B(T_air)) + B(T_air)`.
#[inline]
pub fn channel_radiance(tau: f64, object_emission: f64, air_radiance: f64) -> f64 {
    tau * (object_emission - air_radiance) + air_radiance
}

/// Observed radiance with object emission and air path emission only.
pub fn observe(pixel: &ScenePixel, atmo: &AtmosphereState) -> Result<RadianceSpectrum> {
    atmo.grid().ensure_same(pixel.emissivity.grid(), "observe")?;
    let values = observe_values(pixel, atmo);
    RadianceSpectrum::new(atmo.grid().clone(), values)
}

fn observe_values(pixel: &ScenePixel, atmo: &AtmosphereState) -> Vec<f64> {
    let t_air = atmo.t_air();
    atmo.grid()
        .wavelengths()
        .iter()
        .zip(atmo.attenuation().values())
        .zip(pixel.emissivity.values())
        .map(|((&l, &a), &e)| {
            let tau = channel_transmittance(a, pixel.d);
            channel_radiance(tau, e * blackbody(l, pixel.t), blackbody(l, t_air))
        })
        .collect()
}

/// [`observe`] plus the diffusely reflected radiance of `sources`.
pub fn observe_with_reflection(
    pixel: &ScenePixel,
    atmo: &AtmosphereState,
    sources: &[EnvironmentalSource],
) -> Result<RadianceSpectrum> {
    let grid = atmo.grid();
    grid.ensure_same(pixel.emissivity.grid(), "observe_with_reflection")?;
    check_sources(sources, atmo)?;
    let mut values = observe_values(pixel, atmo);
    add_reflection(&mut values, pixel, atmo, sources);
    RadianceSpectrum::new(grid.clone(), values)
}

fn check_sources(sources: &[EnvironmentalSource], atmo: &AtmosphereState) -> Result<()> {
    let mut share = 0.0;
    for (i, s) in sources.iter().enumerate() {
        atmo.grid()
            .ensure_same(s.radiance.grid(), &format!("environmental source {i}"))?;
        share += s.solid_angle / PI;
    }
    if share > 2.0 + 1e-12 {
        return Err(Error::field(
            "sources",
            format!("total solid angle share {share} exceeds 2"),
        ));
    }
    Ok(())
}

fn add_reflection(
    values: &mut [f64],
    pixel: &ScenePixel,
    atmo: &AtmosphereState,
    sources: &[EnvironmentalSource],
) {
    if sources.is_empty() {
        return;
    }
    let alpha = atmo.attenuation().values();
    let eps = pixel.emissivity.values();
    for (k, v) in values.iter_mut().enumerate() {
        let incident: f64 = sources
            .iter()
            .map(|s| s.solid_angle / PI * s.radiance.values()[k])
            .sum();
        *v += channel_transmittance(alpha[k], pixel.d) * (1.0 - eps[k]) * incident;
    }
}

/// Add noise to `values` from the stream `(noise.seed, stream)`.
///
/// Each stream is an independent ChaCha sequence, so generating pixels in any
/// order, on any number of threads, yields the same numbers.
pub fn add_noise_stream(values: &mut [f64], noise: &NoiseModel, stream: u64) {
    if noise.sigma == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    rng.set_stream(stream);
    for v in values.iter_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v += noise.sigma * z;
    }
}

/// Noisy copy of a single spectrum (stream 0).
pub fn add_noise(spectrum: &RadianceSpectrum, noise: &NoiseModel) -> Result<RadianceSpectrum> {
    let mut values = spectrum.values().to_vec();
    add_noise_stream(&mut values, noise, 0);
    RadianceSpectrum::new(spectrum.grid().clone(), values)
}

/// Noisy copy of a cube; pixel `i` (row-major) draws from stream `i`.
pub fn add_noise_cube(cube: &HyperCube, noise: &NoiseModel) -> HyperCube {
    let mut out = cube.clone();
    let k = cube.channels();
    out.data_mut()
        .par_chunks_mut(k)
        .enumerate()
        .for_each(|(i, px)| add_noise_stream(px, noise, i as u64));
    out
}

/// Render a full cube from per-pixel truth.
///
/// `reflections`, when given, holds one source list per pixel (row-major);
/// an empty list means the pixel sees no environmental sources.
pub fn simulate_cube(
    truth: &SceneTruth,
    atmo: &AtmosphereState,
    noise: &NoiseModel,
    reflections: Option<&[Vec<EnvironmentalSource>]>,
) -> Result<HyperCube> {
    let n = truth.height() * truth.width();
    if let Some(r) = reflections {
        if r.len() != n {
            return Err(Error::Precondition(format!(
                "{} reflection entries for {n} pixels",
                r.len()
            )));
        }
        for s in r {
            check_sources(s, atmo)?;
        }
    }
    for (i, p) in truth.pixels().iter().enumerate() {
        atmo.grid()
            .ensure_same(p.emissivity.grid(), &format!("truth pixel {i}"))?;
    }
    let k = atmo.grid().len();
    let mut cube = HyperCube::zeros(
        truth.height(),
        truth.width(),
        atmo.grid().clone(),
        atmo.t_air(),
        atmo.provenance(),
    )?;
    cube.data_mut()
        .par_chunks_mut(k)
        .enumerate()
        .for_each(|(i, out)| {
            let pixel = &truth.pixels()[i];
            let mut v = observe_values(pixel, atmo);
            if let Some(r) = reflections {
                add_reflection(&mut v, pixel, atmo, &r[i]);
            }
            add_noise_stream(&mut v, noise, i as u64);
            out.copy_from_slice(&v);
        });
    Ok(cube)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atmosphere::AtmosphereState;
    use crate::spectral::{AttenuationSpectrum, SpectralGrid};

    fn atmo() -> AtmosphereState {
        let grid = SpectralGrid::uniform(8.0, 13.0, 6).unwrap();
        let a = AttenuationSpectrum::new(grid, vec![0.0, 0.01, 0.05, 0.3, 0.002, 1.0]).unwrap();
        AtmosphereState::new(289.7, a, "test").unwrap()
    }

    fn pixel(d: f64, t: f64, eps: &[f64]) -> ScenePixel {
        let grid = SpectralGrid::uniform(8.0, 13.0, 6).unwrap();
        ScenePixel::new(d, t, EmissivitySpectrum::new(grid, eps.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn blackbody_at_air_temperature_is_invisible() {
        let a = atmo();
        for d in [0.0, 5.0, 300.0] {
            let l = observe(&pixel(d, 289.7, &[1.0; 6]), &a).unwrap();
            for (k, &w) in a.grid().wavelengths().iter().enumerate() {
                assert!((l.values()[k] - blackbody(w, 289.7)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_range_is_object_emission() {
        let a = atmo();
        let eps = [0.9, 0.8, 0.95, 0.7, 0.99, 0.5];
        let l = observe(&pixel(0.0, 280.0, &eps), &a).unwrap();
        for (k, &w) in a.grid().wavelengths().iter().enumerate() {
            assert_eq!(l.values()[k], eps[k] * blackbody(w, 280.0));
        }
    }

    #[test]
    fn long_range_saturates_to_air() {
        let a = atmo();
        let l = observe(&pixel(1e6, 260.0, &[0.9; 6]), &a).unwrap();
        for (k, &w) in a.grid().wavelengths().iter().enumerate().skip(1) {
            assert!((l.values()[k] - blackbody(w, 289.7)).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let other = SpectralGrid::uniform(8.0, 13.0, 5).unwrap();
        let p = ScenePixel::new(1.0, 280.0, EmissivitySpectrum::constant(other, 0.9).unwrap())
            .unwrap();
        assert!(matches!(observe(&p, &atmo()), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn reflection_reduces_to_observe() {
        let a = atmo();
        let sky = RadianceSpectrum::blackbody(a.grid().clone(), 250.0).unwrap();
        let src = EnvironmentalSource::new(sky, PI).unwrap();
        let black = pixel(40.0, 280.0, &[1.0; 6]);
        assert_eq!(
            observe_with_reflection(&black, &a, std::slice::from_ref(&src)).unwrap(),
            observe(&black, &a).unwrap()
        );
        let grey = pixel(40.0, 280.0, &[0.5; 6]);
        assert_eq!(
            observe_with_reflection(&grey, &a, &[]).unwrap(),
            observe(&grey, &a).unwrap()
        );
    }

    #[test]
    fn perfect_mirror_at_zero_range_returns_source() {
        let a = atmo();
        let sky = RadianceSpectrum::blackbody(a.grid().clone(), 250.0).unwrap();
        let src = EnvironmentalSource::new(sky.clone(), PI).unwrap();
        let mirror = pixel(0.0, 280.0, &[0.0; 6]);
        let l = observe_with_reflection(&mirror, &a, &[src]).unwrap();
        assert_eq!(l.values(), sky.values());
    }

    #[test]
    fn solid_angle_limits() {
        let a = atmo();
        let sky = RadianceSpectrum::blackbody(a.grid().clone(), 250.0).unwrap();
        assert!(EnvironmentalSource::new(sky.clone(), 0.0).is_err());
        assert!(EnvironmentalSource::new(sky.clone(), 7.0).is_err());
        let full = EnvironmentalSource::new(sky.clone(), 2.0 * PI).unwrap();
        let half = EnvironmentalSource::new(sky, PI).unwrap();
        let p = pixel(1.0, 280.0, &[0.5; 6]);
        assert!(observe_with_reflection(&p, &a, std::slice::from_ref(&full)).is_ok());
        assert!(observe_with_reflection(&p, &a, &[half.clone(), half.clone()]).is_ok());
        assert!(observe_with_reflection(&p, &a, &[full, half]).is_err());
    }

    #[test]
    fn noise_identity_and_determinism() {
        let a = atmo();
        let l = observe(&pixel(10.0, 280.0, &[0.9; 6]), &a).unwrap();
        assert_eq!(add_noise(&l, &NoiseModel::noiseless()).unwrap(), l);
        let n = NoiseModel::new(1.0, 7).unwrap();
        assert_eq!(add_noise(&l, &n).unwrap(), add_noise(&l, &n).unwrap());
        assert_ne!(add_noise(&l, &n).unwrap(), l);
        assert!(NoiseModel::new(-1.0, 0).is_err());
    }

    #[test]
    fn noise_statistics() {
        let mut v = vec![0.0; 1_000_000];
        add_noise_stream(&mut v, &NoiseModel::new(1.0, 2024).unwrap(), 0);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 5e-3, "mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 5e-3, "std {}", var.sqrt());
    }
}
