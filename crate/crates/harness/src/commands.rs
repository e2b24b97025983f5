//! The subcommands, as library calls that write their artifacts into a
//! directory and return a short summary for the caller to print.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use lwir_core::atmosphere::{write_attenuation, AtmosphereState};
use lwir_core::estimators::{
    bispectral_range, estimate_cube, kmeans, ozone_mask, OzoneMaskConfig,
};
use lwir_core::fisher::{fisher_profile, optimal_attenuation};
use lwir_core::forward::{hsrc, simulate_cube, HyperCube, ScenePixel};
use lwir_core::spectral::csv::write_spectrum_csv;
use lwir_core::{Error, ErrorClass, Result};

use crate::montecarlo::{run_montecarlo, write_report, MonteCarloReport};
use crate::output::{
    read_profiles_csv, write_diagnostics, write_grid_csv, write_labels_csv, write_pbm,
    write_pgm16, write_profiles_csv, PixelRecord,
};
use crate::scene::build_scene;
use crate::spec::{EstimatorKind, ExperimentSpec};

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Atmosphere for the experiment, optionally at another air temperature.
pub fn atmosphere(spec: &ExperimentSpec, t_air: Option<f64>) -> Result<AtmosphereState> {
    let atmo = spec.atmosphere.build()?;
    match t_air {
        Some(t) => atmo.with_t_air(t),
        None => Ok(atmo),
    }
}

#[derive(Clone, Debug)]
pub struct SimulateSummary {
    pub cube: PathBuf,
    pub pixels: usize,
    pub seed: u64,
}

pub fn cmd_simulate(spec: &ExperimentSpec, out: &Path, t_air: Option<f64>) -> Result<SimulateSummary> {
    let atmo = atmosphere(spec, t_air)?;
    let scene = build_scene(&spec.scene, &atmo)?;
    let cube = simulate_cube(&scene.truth, &atmo, &spec.noise, scene.reflections.as_deref())?;
    ensure_dir(out)?;

    let cube_path = out.join("cube.hsrc");
    hsrc::write(&cube_path, &cube)?;

    let w = scene.truth.width();
    let mut truth = String::from("row,col,d,T\n");
    for (i, p) in scene.truth.pixels().iter().enumerate() {
        let _ = writeln!(truth, "{},{},{},{}", i / w, i % w, p.range(), p.temperature());
    }
    write_text(&out.join("truth.csv"), truth)?;
    let wl = atmo.grid().wavelengths();
    for (name, eps) in &scene.regions {
        write_spectrum_csv(&out.join(format!("emissivity_{name}.csv")), wl, eps.values())?;
    }
    write_attenuation(&out.join("attenuation.csv"), atmo.attenuation())?;
    if let Some(sky) = &scene.sky {
        write_spectrum_csv(&out.join("downwelling.csv"), wl, sky.values())?;
    }
    Ok(SimulateSummary {
        cube: cube_path,
        pixels: cube.pixel_count(),
        seed: spec.seed(),
    })
}

#[derive(Clone, Debug, Default)]
pub struct EstimateSummary {
    pub pixels: usize,
    pub unconverged: usize,
    pub undefined: usize,
    pub flagged: usize,
}

fn mask_config(spec: &ExperimentSpec) -> OzoneMaskConfig {
    spec.estimator.mask.unwrap_or_default()
}

pub fn cmd_estimate(
    spec: &ExperimentSpec,
    cube_path: &Path,
    out: &Path,
    t_air: Option<f64>,
) -> Result<EstimateSummary> {
    let cube = hsrc::read(cube_path)?;
    let atmo = spec
        .atmosphere
        .build_on(cube.grid(), t_air.unwrap_or(cube.t_air()))?;
    let (h, w) = (cube.height(), cube.width());
    let mask = match &spec.estimator.mask {
        Some(cfg) => Some(ozone_mask(&cube, cfg)?),
        None => None,
    };
    let reliable = |i: usize| mask.as_ref().is_none_or(|m| m.reliable[i]);
    ensure_dir(out)?;

    let mut summary = EstimateSummary {
        pixels: cube.pixel_count(),
        ..Default::default()
    };
    let records: Vec<PixelRecord> = match spec.estimator.kind {
        EstimatorKind::Hyperspectral => {
            let mut results = estimate_cube(&cube, &atmo, &spec.estimator.hyper)?;
            for (i, r) in results.iter_mut().enumerate() {
                r.reliable = reliable(i);
            }
            let profiles: Vec<Vec<f64>> = results.iter().map(|r| r.eps_hat.values().to_vec()).collect();
            write_profiles_csv(&out.join("emissivity_estimates.csv"), w, atmo.grid().wavelengths(), &profiles)?;
            let temps: Vec<f64> = results.iter().map(|r| r.t_hat).collect();
            write_grid_csv(&out.join("temperature.csv"), w, &temps)?;
            if let Some(k) = spec.estimator.clusters {
                let c = kmeans(&profiles, k, spec.seed())?;
                write_labels_csv(&out.join("labels.csv"), w, &c.labels)?;
            }
            results
                .iter()
                .map(|r| PixelRecord {
                    d_hat: r.d_hat,
                    t_hat: Some(r.t_hat),
                    loss: Some(r.final_loss),
                    converged: r.converged,
                    reliable: r.reliable,
                })
                .collect()
        }
        kind => {
            let cfg = spec.estimator.bispectral(atmo.grid(), kind)?;
            cfg.validate(&atmo)?;
            let d: Vec<Option<f64>> = (0..cube.pixel_count())
                .into_par_iter()
                .map(|i| match bispectral_range(&cube.spectrum_at(i)?, &atmo, &cfg) {
                    Ok(d) => Ok(Some(d)),
                    Err(e) if e.class() == ErrorClass::Numeric => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<_>>()?;
            d.iter()
                .enumerate()
                .map(|(i, d)| PixelRecord {
                    d_hat: d.unwrap_or(f64::NAN),
                    t_hat: None,
                    loss: None,
                    converged: d.is_some(),
                    reliable: reliable(i),
                })
                .collect()
        }
    };
    summary.unconverged = records.iter().filter(|r| !r.converged).count();
    summary.undefined = records.iter().filter(|r| !r.d_hat.is_finite()).count();

    let depth: Vec<f64> = records.iter().map(|r| r.d_hat).collect();
    write_grid_csv(&out.join("depth.csv"), w, &depth)?;
    write_pgm16(&out.join("depth.pgm"), h, w, &depth)?;
    write_diagnostics(&out.join("diagnostics.csv"), w, &records)?;
    if let Some(m) = &mask {
        let flags: Vec<bool> = m.reliable.iter().map(|r| !r).collect();
        write_pbm(&out.join("mask.pbm"), h, w, &flags)?;
        summary.flagged = m.flagged();
    }
    Ok(summary)
}

#[derive(Clone, Debug)]
pub struct MaskSummary {
    pub pixels: usize,
    pub flagged: usize,
    pub channel_a: usize,
    pub channel_b: usize,
}

pub fn cmd_mask(spec: &ExperimentSpec, cube_path: &Path, out: &Path) -> Result<MaskSummary> {
    let cube = hsrc::read(cube_path)?;
    mask_cube(&cube, &mask_config(spec), out)
}

fn mask_cube(cube: &HyperCube, cfg: &OzoneMaskConfig, out: &Path) -> Result<MaskSummary> {
    let m = ozone_mask(cube, cfg)?;
    ensure_dir(out)?;
    let flags: Vec<bool> = m.reliable.iter().map(|r| !r).collect();
    write_pbm(&out.join("mask.pbm"), m.height, m.width, &flags)?;
    write_grid_csv(&out.join("ozone_difference.csv"), m.width, &m.difference)?;
    Ok(MaskSummary {
        pixels: m.reliable.len(),
        flagged: m.flagged(),
        channel_a: m.channel_a,
        channel_b: m.channel_b,
    })
}

#[derive(Clone, Debug)]
pub struct ClusterSummary {
    pub pixels: usize,
    pub k: usize,
    pub sizes: Vec<usize>,
    pub iterations: usize,
}

/// Cluster the emissivity estimates written by [`cmd_estimate`].
pub fn cmd_cluster(spec: &ExperimentSpec, estimates: &Path, out: &Path) -> Result<ClusterSummary> {
    let (width, wavelengths, profiles) = read_profiles_csv(estimates)?;
    let k = spec.estimator.clusters.unwrap_or(2);
    let c = kmeans(&profiles, k, spec.seed())?;
    ensure_dir(out)?;
    write_labels_csv(&out.join("labels.csv"), width, &c.labels)?;
    let mut s = String::from("cluster");
    for w in &wavelengths {
        let _ = write!(s, ",{w}");
    }
    s.push('\n');
    for (j, centre) in c.centroids.iter().enumerate() {
        let _ = write!(s, "{j}");
        for v in centre {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    write_text(&out.join("centroids.csv"), s)?;
    let mut sizes = vec![0; k];
    for &l in &c.labels {
        sizes[l] += 1;
    }
    Ok(ClusterSummary {
        pixels: profiles.len(),
        k,
        sizes,
        iterations: c.iterations,
    })
}

pub fn cmd_montecarlo(spec: &ExperimentSpec, out: &Path, t_air: Option<f64>) -> Result<MonteCarloReport> {
    let atmo = atmosphere(spec, t_air)?;
    let report = run_montecarlo(spec, &atmo)?;
    ensure_dir(out)?;
    write_report(out, &report)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FisherRow {
    pub range_m: f64,
    pub alpha_star: f64,
    pub total: f64,
    pub crlb_m: Option<f64>,
    pub degenerate: bool,
}

pub const FISHER_SUMMARY_HEADER: &str =
    "range_m,alpha_star_db_per_m,alpha_star_times_d_db,total_information,crlb_m,degenerate";

/// Information profiles for the scene's object at each of the spec's ranges.
pub fn cmd_fisher(spec: &ExperimentSpec, out: &Path, t_air: Option<f64>) -> Result<Vec<FisherRow>> {
    let atmo = atmosphere(spec, t_air)?;
    let eps = spec.scene.emissivity.spectrum(atmo.grid())?;
    if spec.fisher_ranges.is_empty() {
        return Err(Error::field("fisher_ranges", "no ranges given"));
    }
    ensure_dir(out)?;
    let wl = atmo.grid().wavelengths();
    let mut rows = Vec::new();
    let mut summary = String::from(FISHER_SUMMARY_HEADER);
    summary.push('\n');
    for &d in &spec.fisher_ranges {
        let pixel = ScenePixel::new(d, spec.scene.temperature, eps.clone())
            .map_err(|e| Error::field("fisher_ranges", e.to_string()))?;
        let p = fisher_profile(&pixel, &atmo, spec.fisher_sigma)?;
        let alpha_star = optimal_attenuation(d)?;
        let mut s = String::from("wavelength_um,I_k,I_k_normalized\n");
        for (k, w) in wl.iter().enumerate() {
            let norm = p.normalized.as_ref().map_or(0.0, |n| n[k]);
            let _ = writeln!(s, "{w},{},{norm}", p.per_channel[k]);
        }
        write_text(&out.join(format!("fisher_d{d}.csv")), s)?;
        let crlb = p.crlb_std.map(|c| c.to_string()).unwrap_or_else(|| "inf".into());
        let _ = writeln!(
            summary,
            "{d},{alpha_star},{},{},{crlb},{}",
            alpha_star * d,
            p.total,
            p.is_degenerate()
        );
        rows.push(FisherRow {
            range_m: d,
            alpha_star,
            total: p.total,
            crlb_m: p.crlb_std,
            degenerate: p.is_degenerate(),
        });
    }
    write_text(&out.join("fisher_summary.csv"), summary)?;
    Ok(rows)
}
