//! Repeated noisy estimates at a fixed truth pixel, one block per temperature
//! contrast, summarized as RMSE, bias and spread of the range estimate.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use lwir_core::atmosphere::AtmosphereState;
use lwir_core::estimators::{bispectral_range, hyperspectral_estimate, BispectralConfig};
use lwir_core::forward::{add_noise_stream, observe, NoiseModel, ScenePixel};
use lwir_core::{Error, ErrorClass, Result};

use crate::spec::{EstimatorKind, ExperimentSpec};

/// Noise stream for trial `trial` of contrast block `block`.
pub fn trial_stream(block: usize, trial: usize) -> u64 {
    ((block as u64) << 32) | trial as u64
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialEstimate {
    pub delta_t: f64,
    pub trial: usize,
    pub estimator: EstimatorKind,
    /// `None` when the estimator declared the estimate undefined.
    pub d_hat: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub estimator: EstimatorKind,
    pub delta_t: f64,
    pub rmse: f64,
    pub bias: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    /// Trials with a defined estimate; the statistics use only these.
    pub n: usize,
    pub undefined: usize,
}

#[derive(Clone, Debug)]
pub struct MonteCarloReport {
    pub truth_range_m: f64,
    pub sigma: f64,
    pub seed: u64,
    pub trials: usize,
    pub rows: Vec<SummaryRow>,
    pub estimates: Vec<TrialEstimate>,
}

impl MonteCarloReport {
    pub fn row(&self, estimator: EstimatorKind, delta_t: f64) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.delta_t == delta_t)
    }
}

/// `(rmse, bias, sample std)` of `estimates` about `truth`.
pub fn error_stats(estimates: &[f64], truth: f64) -> (f64, f64, f64) {
    let n = estimates.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let mean = estimates.iter().sum::<f64>() / nf;
    let rmse = (estimates.iter().map(|d| (d - truth).powi(2)).sum::<f64>() / nf).sqrt();
    let std = if n > 1 {
        (estimates.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt()
    } else {
        f64::NAN
    };
    (rmse, mean - truth, std)
}

fn estimate_once(
    kind: EstimatorKind,
    spectrum: &lwir_core::spectral::RadianceSpectrum,
    atmo: &AtmosphereState,
    spec: &ExperimentSpec,
    bands: &[(EstimatorKind, BispectralConfig)],
) -> Result<Option<f64>> {
    let outcome = match kind {
        EstimatorKind::Hyperspectral => {
            hyperspectral_estimate(spectrum, atmo, &spec.estimator.hyper).map(|r| r.d_hat)
        }
        _ => {
            let cfg = &bands.iter().find(|(k, _)| *k == kind).expect("config per kind").1;
            bispectral_range(spectrum, atmo, cfg)
        }
    };
    match outcome {
        Ok(d) => Ok(Some(d)),
        Err(e) if e.class() == ErrorClass::Numeric => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn run_montecarlo(spec: &ExperimentSpec, atmo: &AtmosphereState) -> Result<MonteCarloReport> {
    let mc = &spec.montecarlo;
    if mc.trials < 2 {
        return Err(Error::field("trials", "need at least 2"));
    }
    let noise = NoiseModel::new(mc.sigma, spec.seed())?;
    let eps = spec.scene.emissivity.spectrum(atmo.grid())?;
    let bands = mc
        .estimators
        .iter()
        .filter(|k| **k != EstimatorKind::Hyperspectral)
        .map(|&k| {
            let cfg = spec.estimator.bispectral(atmo.grid(), k)?;
            cfg.validate(atmo)?;
            Ok((k, cfg))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut estimates = Vec::new();
    let mut rows = Vec::new();
    for (block, &dt) in mc.delta_t.iter().enumerate() {
        let pixel = ScenePixel::new(mc.range_m, atmo.t_air() + dt, eps.clone())?;
        let clean = observe(&pixel, atmo)?;
        let per_trial: Vec<Vec<Option<f64>>> = (0..mc.trials)
            .into_par_iter()
            .map(|trial| {
                let mut values = clean.values().to_vec();
                add_noise_stream(&mut values, &noise, trial_stream(block, trial));
                let noisy = lwir_core::spectral::RadianceSpectrum::new(atmo.grid().clone(), values)?;
                mc.estimators
                    .iter()
                    .map(|&k| estimate_once(k, &noisy, atmo, spec, &bands))
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (j, &kind) in mc.estimators.iter().enumerate() {
            let column: Vec<Option<f64>> = per_trial.iter().map(|t| t[j]).collect();
            let defined: Vec<f64> = column.iter().flatten().copied().collect();
            let (rmse, bias, std) = error_stats(&defined, mc.range_m);
            rows.push(SummaryRow {
                estimator: kind,
                delta_t: dt,
                rmse,
                bias,
                std,
                n: defined.len(),
                undefined: column.len() - defined.len(),
            });
            estimates.extend(column.into_iter().enumerate().map(|(trial, d_hat)| TrialEstimate {
                delta_t: dt,
                trial,
                estimator: kind,
                d_hat,
            }));
        }
    }
    Ok(MonteCarloReport {
        truth_range_m: mc.range_m,
        sigma: mc.sigma,
        seed: spec.seed(),
        trials: mc.trials,
        rows,
        estimates,
    })
}

pub const SUMMARY_HEADER: &str = "estimator,delta_t,rmse_m,bias_m,std_m,n,undefined,trials,seed,sigma,range_m";
pub const TRIALS_HEADER: &str = "estimator,delta_t,trial,d_hat";

pub fn write_report(dir: &Path, report: &MonteCarloReport) -> Result<()> {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.estimator.name(),
            r.delta_t,
            r.rmse,
            r.bias,
            r.std,
            r.n,
            r.undefined,
            report.trials,
            report.seed,
            report.sigma,
            report.truth_range_m
        );
    }
    let path = dir.join("montecarlo_summary.csv");
    fs::write(&path, s).map_err(|e| Error::io(&path, e))?;

    let mut s = String::from(TRIALS_HEADER);
    s.push('\n');
    for t in &report.estimates {
        let d = t.d_hat.map(|d| d.to_string()).unwrap_or_else(|| "nan".into());
        let _ = writeln!(s, "{},{},{},{}", t.estimator.name(), t.delta_t, t.trial, d);
    }
    let path = dir.join("montecarlo_trials.csv");
    fs::write(&path, s).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_identity() {
        let xs = [99.0, 101.5, 100.2, 98.7, 103.0];
        let (rmse, bias, std) = error_stats(&xs, 100.0);
        let n = xs.len() as f64;
        assert!((rmse * rmse - (bias * bias + std * std * (n - 1.0) / n)).abs() < 1e-12);
        assert!((bias - 0.48).abs() < 1e-12);
    }

    #[test]
    fn streams_do_not_collide() {
        assert_ne!(trial_stream(0, 1), trial_stream(1, 0));
        assert_eq!(trial_stream(2, 7), (2u64 << 32) + 7);
    }
}
