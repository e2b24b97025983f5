//! Per-pixel truth for the scene kinds an experiment can describe.

use lwir_core::atmosphere::{synthesize_downwelling, AtmosphereState, DownwellingModel};
use lwir_core::forward::{EnvironmentalSource, ScenePixel, SceneTruth};
use lwir_core::spectral::{EmissivitySpectrum, RadianceSpectrum};
use lwir_core::Result;

use crate::spec::{EmissivityModel, SceneKind, SceneSpec};

#[derive(Clone, Debug)]
pub struct Scene {
    pub truth: SceneTruth,
    /// Named materials; `region_of[i]` indexes this list.
    pub regions: Vec<(String, EmissivitySpectrum)>,
    pub region_of: Vec<usize>,
    /// Per-pixel reflected sources, present only when some pixel has any.
    pub reflections: Option<Vec<Vec<EnvironmentalSource>>>,
    /// Sky radiance used for reflections, if any.
    pub sky: Option<RadianceSpectrum>,
}

pub fn build_scene(spec: &SceneSpec, atmo: &AtmosphereState) -> Result<Scene> {
    let grid = atmo.grid();
    let (h, w) = (spec.height, spec.width);
    let n = h * w;
    let base = spec.emissivity.spectrum(grid)?;
    let pixel = |d: f64, e: &EmissivitySpectrum| ScenePixel::new(d, spec.temperature, e.clone());

    let (pixels, regions, region_of, reflections, sky) = match &spec.kind {
        SceneKind::Uniform => {
            let px = pixel(spec.range_m, &base)?;
            (vec![px; n], vec![("object".to_string(), base)], vec![0; n], None, None)
        }
        SceneKind::Ramp { start_m, end_m } => {
            let pixels = (0..n)
                .map(|i| {
                    let c = i % w;
                    let t = if w > 1 { c as f64 / (w - 1) as f64 } else { 0.0 };
                    pixel(start_m + t * (end_m - start_m), &base)
                })
                .collect::<Result<Vec<_>>>()?;
            (pixels, vec![("object".to_string(), base)], vec![0; n], None, None)
        }
        SceneKind::List(ranges) => {
            let pixels = ranges.iter().map(|&d| pixel(d, &base)).collect::<Result<Vec<_>>>()?;
            (pixels, vec![("object".to_string(), base)], vec![0; n], None, None)
        }
        SceneKind::Panel(layout) => {
            let panel_eps = EmissivityModel::constant(layout.panel_emissivity).spectrum(grid)?;
            let model = DownwellingModel::grey_sky(grid, layout.sky_temperature, layout.sky_emissivity, layout.ozone)?;
            let sky = synthesize_downwelling(&model, grid)?;
            let source = EnvironmentalSource::new(sky.clone(), layout.sky_solid_angle_sr)?;
            let inside = |i: usize| {
                let (r, c) = (i / w, i % w);
                layout
                    .panels
                    .iter()
                    .any(|p| r >= p[0] && r < p[0] + p[2] && c >= p[1] && c < p[1] + p[3])
            };
            let region_of: Vec<usize> = (0..n).map(|i| usize::from(inside(i))).collect();
            let pixels = region_of
                .iter()
                .map(|&g| pixel(spec.range_m, if g == 1 { &panel_eps } else { &base }))
                .collect::<Result<Vec<_>>>()?;
            let reflections = region_of
                .iter()
                .map(|&g| if g == 1 { vec![source.clone()] } else { Vec::new() })
                .collect();
            (
                pixels,
                vec![("vegetation".to_string(), base), ("panel".to_string(), panel_eps)],
                region_of,
                Some(reflections),
                Some(sky),
            )
        }
    };
    Ok(Scene {
        truth: SceneTruth::new(h, w, pixels)?,
        regions,
        region_of,
        reflections,
        sky,
    })
}
