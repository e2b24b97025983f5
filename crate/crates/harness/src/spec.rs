//! Typed view of an experiment config.

use std::path::PathBuf;

use lwir_core::atmosphere::{
    load_attenuation, synthesize_attenuation, synthesize_attenuation_with_isrf, AbsorptionLine,
    AtmosphereState, OzoneFeature, SyntheticLineModel,
};
use lwir_core::estimators::{BispectralConfig, HyperspectralConfig, OzoneMaskConfig};
use lwir_core::forward::NoiseModel;
use lwir_core::spectral::{EmissivitySpectrum, InstrumentResponse, SpectralGrid};
use lwir_core::{Error, Result};

use crate::config::{parse_list, Config};

const KNOWN_KEYS: &[&str] = &[
    "grid",
    "t_air",
    "isrf_fwhm_nm",
    "continuum",
    "line",
    "atmosphere",
    "scene",
    "height",
    "width",
    "range_m",
    "range_start_m",
    "range_end_m",
    "ranges_m",
    "temperature",
    "delta_t",
    "emissivity",
    "emissivity_feature",
    "panel_emissivity",
    "panel",
    "sky_temperature",
    "sky_emissivity",
    "sky_solid_angle_sr",
    "ozone",
    "sigma",
    "seed",
    "estimator",
    "rho",
    "iterations",
    "band1_um",
    "band2_um",
    "t_air_channel",
    "mask",
    "mask_threshold",
    "clusters",
    "trials",
    "delta_t_list",
    "mc_range_m",
    "mc_sigma",
    "mc_estimators",
    "fisher_ranges",
    "fisher_sigma",
];

/// Keys that describe the atmosphere, copied when one preset lends its
/// atmosphere to another experiment.
pub const ATMOSPHERE_KEYS: &[&str] = &["grid", "t_air", "isrf_fwhm_nm", "continuum", "line", "atmosphere"];

#[derive(Clone, Debug)]
pub enum AtmosphereSource {
    Lines {
        model: SyntheticLineModel,
        /// `None` samples the lines directly on the channel centres.
        isrf: Option<InstrumentResponse>,
    },
    /// Spectrum CSV interpolated onto the grid.
    File(PathBuf),
}

#[derive(Clone, Debug)]
pub struct AtmosphereSpec {
    pub grid: SpectralGrid,
    pub t_air: f64,
    pub source: AtmosphereSource,
}

impl AtmosphereSpec {
    pub fn build(&self) -> Result<AtmosphereState> {
        self.build_on(&self.grid, self.t_air)
    }

    /// Same atmosphere on another grid (e.g. the one stored in a cube).
    pub fn build_on(&self, grid: &SpectralGrid, t_air: f64) -> Result<AtmosphereState> {
        let (alpha, provenance) = match &self.source {
            AtmosphereSource::Lines { model, isrf } => {
                let alpha = match isrf {
                    Some(r) => synthesize_attenuation_with_isrf(model, grid, r)?,
                    None => synthesize_attenuation(model, grid)?,
                };
                (alpha, format!("synthetic, {} lines", model.lines.len()))
            }
            AtmosphereSource::File(p) => (load_attenuation(p, grid)?, p.display().to_string()),
        };
        AtmosphereState::new(t_air, alpha, provenance)
    }
}

/// Constant emissivity plus Gaussian features `(amplitude, center_um, sigma_um)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmissivityModel {
    pub base: f64,
    pub features: Vec<(f64, f64, f64)>,
}

impl EmissivityModel {
    pub fn constant(base: f64) -> Self {
        Self {
            base,
            features: Vec::new(),
        }
    }

    pub fn spectrum(&self, grid: &SpectralGrid) -> Result<EmissivitySpectrum> {
        let values = grid
            .wavelengths()
            .iter()
            .map(|&l| {
                self.base
                    + self
                        .features
                        .iter()
                        .map(|&(a, c, s)| a * (-0.5 * ((l - c) / s).powi(2)).exp())
                        .sum::<f64>()
            })
            .collect();
        EmissivitySpectrum::new(grid.clone(), values)
    }
}

#[derive(Clone, Debug)]
pub struct PanelLayout {
    /// `(row, col, height, width)` rectangles.
    pub panels: Vec<[usize; 4]>,
    pub panel_emissivity: f64,
    pub sky_temperature: f64,
    pub sky_emissivity: f64,
    pub sky_solid_angle_sr: f64,
    pub ozone: OzoneFeature,
}

#[derive(Clone, Debug)]
pub enum SceneKind {
    Uniform,
    /// Range linear in column index.
    Ramp { start_m: f64, end_m: f64 },
    /// One range per pixel, row-major.
    List(Vec<f64>),
    Panel(PanelLayout),
}

#[derive(Clone, Debug)]
pub struct SceneSpec {
    pub kind: SceneKind,
    pub height: usize,
    pub width: usize,
    pub range_m: f64,
    pub temperature: f64,
    pub emissivity: EmissivityModel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorKind {
    Hyperspectral,
    Bispectral,
    BispectralNoAir,
}

impl EstimatorKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hyperspectral" => Ok(Self::Hyperspectral),
            "bispectral" => Ok(Self::Bispectral),
            "bispectral-no-air" => Ok(Self::BispectralNoAir),
            _ => Err(Error::field(
                "estimator",
                format!("`{s}`; expected hyperspectral, bispectral or bispectral-no-air"),
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Hyperspectral => "hyperspectral",
            Self::Bispectral => "bispectral",
            Self::BispectralNoAir => "bispectral-no-air",
        }
    }
}

#[derive(Clone, Debug)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    pub hyper: HyperspectralConfig,
    pub band1_um: f64,
    pub band2_um: f64,
    /// Opaque channel for air temperature; `None` uses the assumed `t_air`.
    pub t_air_channel: Option<usize>,
    pub mask: Option<OzoneMaskConfig>,
    pub clusters: Option<usize>,
}

impl EstimatorSpec {
    pub fn bispectral(&self, grid: &SpectralGrid, kind: EstimatorKind) -> Result<BispectralConfig> {
        use lwir_core::estimators::{AirEmission, AirTemperature};
        let mut cfg = BispectralConfig::from_wavelengths(grid, self.band1_um, self.band2_um)?;
        if let Some(c) = self.t_air_channel {
            cfg.t_air = AirTemperature::Saturated(c);
        }
        if kind == EstimatorKind::BispectralNoAir {
            cfg.air_emission = AirEmission::Neglected;
        }
        Ok(cfg)
    }
}

#[derive(Clone, Debug)]
pub struct MonteCarloSpec {
    pub trials: usize,
    pub delta_t: Vec<f64>,
    pub range_m: f64,
    pub sigma: f64,
    pub estimators: Vec<EstimatorKind>,
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub config: Config,
    pub atmosphere: AtmosphereSpec,
    pub scene: SceneSpec,
    pub noise: NoiseModel,
    pub estimator: EstimatorSpec,
    pub montecarlo: MonteCarloSpec,
    pub fisher_ranges: Vec<f64>,
    pub fisher_sigma: f64,
}

fn grid_from(cfg: &Config) -> Result<SpectralGrid> {
    match cfg.list::<f64>("grid")? {
        None => Ok(SpectralGrid::lwir_default()),
        Some(v) if v.len() == 3 && v[2].fract() == 0.0 && v[2] >= 2.0 => {
            SpectralGrid::uniform(v[0], v[1], v[2] as usize)
                .map_err(|e| Error::field("grid", e.to_string()))
        }
        Some(_) => Err(Error::field("grid", "expected `start_um end_um count`")),
    }
}

fn triple(key: &str, v: &str) -> Result<[f64; 3]> {
    let xs: Vec<f64> = parse_list(key, v)?;
    <[f64; 3]>::try_from(xs).map_err(|_| Error::field(key, format!("`{v}` needs three numbers")))
}

fn atmosphere_from(cfg: &Config) -> Result<AtmosphereSpec> {
    let grid = grid_from(cfg)?;
    let t_air = cfg.parsed_or("t_air", 289.7)?;
    let source = if let Some(path) = cfg.get("atmosphere") {
        AtmosphereSource::File(PathBuf::from(path))
    } else {
        let lines = cfg
            .get_all("line")
            .into_iter()
            .map(|v| {
                let [c, p, w] = triple("line", v)?;
                Ok(AbsorptionLine {
                    center_um: c,
                    peak_db_per_m: p,
                    half_width_um: w,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let model = SyntheticLineModel {
            lines,
            continuum: cfg.parsed_or("continuum", 0.0)?,
        };
        let fwhm: f64 = cfg.parsed_or("isrf_fwhm_nm", 40.0)?;
        let isrf = if fwhm > 0.0 {
            Some(InstrumentResponse::gaussian(fwhm).map_err(|e| Error::field("isrf_fwhm_nm", e.to_string()))?)
        } else {
            None
        };
        AtmosphereSource::Lines { model, isrf }
    };
    Ok(AtmosphereSpec { grid, t_air, source })
}

fn scene_from(cfg: &Config, t_air: f64) -> Result<SceneSpec> {
    let height: usize = cfg.parsed_or("height", 1)?;
    let width: usize = cfg.parsed_or("width", 1)?;
    if height == 0 || width == 0 {
        return Err(Error::field("height", "scene must be at least 1x1"));
    }
    let temperature = match (cfg.parsed::<f64>("temperature")?, cfg.parsed::<f64>("delta_t")?) {
        (Some(_), Some(_)) => return Err(Error::field("delta_t", "give temperature or delta_t, not both")),
        (Some(t), None) => t,
        (None, Some(dt)) => t_air + dt,
        (None, None) => t_air,
    };
    let emissivity = EmissivityModel {
        base: cfg.parsed_or("emissivity", 0.95)?,
        features: cfg
            .get_all("emissivity_feature")
            .into_iter()
            .map(|v| triple("emissivity_feature", v).map(|[a, c, s]| (a, c, s)))
            .collect::<Result<_>>()?,
    };
    let range_m = cfg.parsed_or("range_m", 100.0)?;
    let kind = match cfg.get("scene").unwrap_or("uniform") {
        "uniform" => SceneKind::Uniform,
        "ramp" => SceneKind::Ramp {
            start_m: cfg.required("range_start_m")?,
            end_m: cfg.required("range_end_m")?,
        },
        "list" => {
            let r: Vec<f64> = cfg.list("ranges_m")?.ok_or_else(|| Error::field("ranges_m", "missing"))?;
            if r.len() != height * width {
                return Err(Error::field(
                    "ranges_m",
                    format!("{} ranges for a {height}x{width} scene", r.len()),
                ));
            }
            SceneKind::List(r)
        }
        "panel" => {
            let panels = cfg
                .get_all("panel")
                .into_iter()
                .map(|v| {
                    let xs: Vec<usize> = parse_list("panel", v)?;
                    let p = <[usize; 4]>::try_from(xs)
                        .map_err(|_| Error::field("panel", format!("`{v}` needs row col height width")))?;
                    if p[0] + p[2] > height || p[1] + p[3] > width {
                        return Err(Error::field("panel", format!("`{v}` leaves the {height}x{width} scene")));
                    }
                    Ok(p)
                })
                .collect::<Result<Vec<_>>>()?;
            let ozone = match cfg.get("ozone") {
                Some(v) => {
                    let [c, a, w] = triple("ozone", v)?;
                    OzoneFeature {
                        center_um: c,
                        amplitude: a,
                        width_um: w,
                    }
                }
                None => OzoneFeature::default(),
            };
            SceneKind::Panel(PanelLayout {
                panels,
                panel_emissivity: cfg.parsed_or("panel_emissivity", 0.3)?,
                sky_temperature: cfg.parsed_or("sky_temperature", 255.0)?,
                sky_emissivity: cfg.parsed_or("sky_emissivity", 0.8)?,
                sky_solid_angle_sr: cfg.parsed_or("sky_solid_angle_sr", std::f64::consts::PI)?,
                ozone,
            })
        }
        other => {
            return Err(Error::field(
                "scene",
                format!("`{other}`; expected uniform, ramp, list or panel"),
            ))
        }
    };
    Ok(SceneSpec {
        kind,
        height,
        width,
        range_m,
        temperature,
        emissivity,
    })
}

fn estimator_from(cfg: &Config) -> Result<EstimatorSpec> {
    let defaults = HyperspectralConfig::default();
    let hyper = HyperspectralConfig {
        rho: cfg.parsed_or("rho", defaults.rho)?,
        iterations: cfg.parsed_or("iterations", defaults.iterations)?,
        ..defaults
    };
    hyper.validate()?;
    let mask = if cfg.flag("mask")? {
        let m = OzoneMaskConfig {
            threshold: cfg.parsed_or("mask_threshold", 4.0)?,
            ..Default::default()
        };
        if !(m.threshold > 0.0) {
            return Err(Error::field("mask_threshold", "must be > 0"));
        }
        Some(m)
    } else {
        None
    };
    let clusters = cfg.parsed::<usize>("clusters")?;
    if clusters == Some(0) {
        return Err(Error::field("clusters", "must be >= 1"));
    }
    Ok(EstimatorSpec {
        kind: EstimatorKind::parse(cfg.get("estimator").unwrap_or("hyperspectral"))?,
        hyper,
        band1_um: cfg.parsed_or("band1_um", 8.42)?,
        band2_um: cfg.parsed_or("band2_um", 8.38)?,
        t_air_channel: cfg.parsed("t_air_channel")?,
        mask,
        clusters,
    })
}

fn montecarlo_from(cfg: &Config) -> Result<MonteCarloSpec> {
    let trials = cfg.parsed_or("trials", 100usize)?;
    if trials < 2 {
        return Err(Error::field("trials", "need at least 2"));
    }
    let sigma = cfg.parsed_or("mc_sigma", 1.0)?;
    if !(sigma >= 0.0 && f64::is_finite(sigma)) {
        return Err(Error::field("mc_sigma", "must be >= 0"));
    }
    let estimators = match cfg.list::<String>("mc_estimators")? {
        Some(v) => v.iter().map(|s| EstimatorKind::parse(s)).collect::<Result<_>>()?,
        None => vec![EstimatorKind::Bispectral, EstimatorKind::Hyperspectral],
    };
    Ok(MonteCarloSpec {
        trials,
        delta_t: cfg.list("delta_t_list")?.unwrap_or_else(|| vec![-8.0, -5.0, -2.0]),
        range_m: cfg.parsed_or("mc_range_m", 100.0)?,
        sigma,
        estimators,
    })
}

impl ExperimentSpec {
    pub fn from_config(config: Config) -> Result<Self> {
        config.check_known(KNOWN_KEYS)?;
        let atmosphere = atmosphere_from(&config)?;
        let scene = scene_from(&config, atmosphere.t_air)?;
        let sigma = config.parsed_or("sigma", 0.0)?;
        let seed = config.parsed_or("seed", 0u64)?;
        let noise = NoiseModel::new(sigma, seed).map_err(|e| Error::field("sigma", e.to_string()))?;
        let fisher_sigma = config.parsed_or("fisher_sigma", 1.0)?;
        if !(fisher_sigma > 0.0 && f64::is_finite(fisher_sigma)) {
            return Err(Error::field("fisher_sigma", "must be > 0"));
        }
        Ok(Self {
            atmosphere,
            scene,
            noise,
            estimator: estimator_from(&config)?,
            montecarlo: montecarlo_from(&config)?,
            fisher_ranges: config.list("fisher_ranges")?.unwrap_or_else(|| vec![30.0, 70.0, 200.0]),
            fisher_sigma,
            config,
        })
    }

    pub fn seed(&self) -> u64 {
        self.noise.seed
    }
}
