//! Joint per-pixel estimation of range, temperature and emissivity from a
//! full LWIR spectrum, with a first-difference smoothness penalty on the
//! emissivity.
//!
//! The loss is
//!
//! ```text
//! L(d, T, eps) = sum_k (yhat_k(d, T, eps_k) - y_k)^2 + rho sum_k (eps_{k+1} - eps_k)^2
//! yhat_k       = tau_k(d) (eps_k B_k(T) - B_k(T_air)) + B_k(T_air)
//! ```
//!
//! For fixed `(d, T)` the model is affine in `eps`, so the emissivity block is a
//! box-constrained tridiagonal least-squares problem with an exact solution.
//! The estimator eliminates it at every iterate and runs a projected,
//! damped Newton descent on the remaining two coordinates, normalized as
//! `d / 100 m` and `T / 300 K`.

use std::f64::consts::LN_10;

use rayon::prelude::*;

use super::tridiag::solve_box;
use crate::atmosphere::AtmosphereState;
use crate::error::{Error, Result};
use crate::forward::HyperCube;
use crate::spectral::{
    blackbody, blackbody_dt, channel_transmittance, EmissivitySpectrum, RadianceSpectrum,
};

/// Central-difference step for the reduced Hessian, in normalized units.
const HESSIAN_STEP: f64 = 1e-6;
/// Damping ceiling; past this the step search has nowhere left to go.
const MAX_DAMPING: f64 = 1e12;
/// A stalled search whose undamped Newton step is shorter than this (normalized
/// units, about 1 um and 3 uK) sits at a stationary point to working precision.
const STEP_TOL: f64 = 1e-8;

/// Trust radius on one outer step in normalized units (10 m, 30 K). The
/// reduced loss is not convex in T far from the data, and an unbounded
/// Newton jump can land in the wrong basin.
const MAX_STEP: f64 = 0.1;

/// Range scale for the normalized descent coordinates, m.
pub const RANGE_SCALE: f64 = 100.0;
/// Temperature scale for the normalized descent coordinates, K.
pub const TEMPERATURE_SCALE: f64 = 300.0;

#[derive(Clone, Debug, PartialEq)]
pub struct HyperspectralConfig {
    pub rho: f64,
    /// Outer iteration budget.
    pub iterations: usize,
    pub init_t: f64,
    pub init_eps: f64,
    pub init_d: f64,
    pub d_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Stop when the scaled projected gradient norm drops below this.
    pub grad_tol: f64,
    /// Initial Levenberg damping of the 2x2 Newton system.
    pub damping: f64,
    /// Damping multiplier after a rejected step (> 1).
    pub damping_up: f64,
    /// Damping multiplier after an accepted step (< 1).
    pub damping_down: f64,
}

impl Default for HyperspectralConfig {
    fn default() -> Self {
        Self {
            rho: 1e7,
            iterations: 20_000,
            init_t: 300.0,
            init_eps: 0.9,
            init_d: 150.0,
            d_max: 2000.0,
            t_min: 200.0,
            t_max: 400.0,
            grad_tol: 1e-10,
            damping: 1e-3,
            damping_up: 4.0,
            damping_down: 0.3,
        }
    }
}

impl HyperspectralConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, why: &str| Err(Error::field(f, why));
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return bad("rho", "must be >= 0");
        }
        if self.iterations == 0 {
            return bad("iterations", "must be >= 1");
        }
        if !(self.d_max.is_finite() && self.d_max > 0.0) {
            return bad("d_max", "must be > 0");
        }
        if !(self.t_min > 0.0 && self.t_min < self.t_max) {
            return bad("t_min", "need 0 < t_min < t_max");
        }
        if !(0.0..=self.d_max).contains(&self.init_d) {
            return bad("init_d", "outside [0, d_max]");
        }
        if !(self.t_min..=self.t_max).contains(&self.init_t) {
            return bad("init_t", "outside [t_min, t_max]");
        }
        if !(0.0..=1.0).contains(&self.init_eps) {
            return bad("init_eps", "outside [0, 1]");
        }
        if !(self.damping.is_finite() && self.damping > 0.0) {
            return bad("damping", "must be > 0");
        }
        if !(self.damping_up.is_finite() && self.damping_up > 1.0) {
            return bad("damping_up", "must be > 1");
        }
        if !(self.damping_down > 0.0 && self.damping_down < 1.0) {
            return bad("damping_down", "must be in (0, 1)");
        }
        if !(self.grad_tol >= 0.0) {
            return bad("grad_tol", "must be >= 0");
        }
        Ok(())
    }
}

/// A point in parameter space.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperParams {
    pub d: f64,
    pub t: f64,
    pub eps: Vec<f64>,
}

/// Partial derivatives of the loss with respect to `(d, T, eps_1..eps_K)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LossGradient {
    pub d: f64,
    pub t: f64,
    pub eps: Vec<f64>,
}

/// Per-pixel output of an estimator.
#[derive(Clone, Debug)]
pub struct EstimationResult {
    pub d_hat: f64,
    pub t_hat: f64,
    pub eps_hat: EmissivitySpectrum,
    pub final_loss: f64,
    pub converged: bool,
    /// False when the loss is flat in range at the solution, i.e. the data
    /// carry no usable range information.
    pub identifiable: bool,
    /// Downwelling-mask outcome; true unless a mask says otherwise.
    pub reliable: bool,
    pub iterations: usize,
}

/// Measurement-independent pieces of the model plus the measurement itself.
pub(crate) struct Problem<'a> {
    lambda: &'a [f64],
    alpha: &'a [f64],
    air: Vec<f64>,
    y: &'a [f64],
    rho: f64,
}

impl<'a> Problem<'a> {
    pub(crate) fn new(
        measurement: &'a RadianceSpectrum,
        atmo: &'a AtmosphereState,
        rho: f64,
    ) -> Result<Self> {
        atmo.grid()
            .ensure_same(measurement.grid(), "hyperspectral measurement")?;
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::field("rho", "must be >= 0"));
        }
        let lambda = atmo.grid().wavelengths();
        let t_air = atmo.t_air();
        Ok(Self {
            lambda,
            alpha: atmo.attenuation().values(),
            air: lambda.iter().map(|&l| blackbody(l, t_air)).collect(),
            y: measurement.values(),
            rho,
        })
    }

    fn channels(&self) -> usize {
        self.y.len()
    }

    pub(crate) fn loss(&self, d: f64, t: f64, eps: &[f64]) -> f64 {
        let mut fit = 0.0;
        for k in 0..self.channels() {
            let tau = channel_transmittance(self.alpha[k], d);
            let yhat = tau * (eps[k] * blackbody(self.lambda[k], t) - self.air[k]) + self.air[k];
            let r = yhat - self.y[k];
            fit += r * r;
        }
        fit + self.rho * roughness(eps)
    }

    pub(crate) fn gradient(&self, d: f64, t: f64, eps: &[f64]) -> LossGradient {
        let n = self.channels();
        let mut g = LossGradient {
            d: 0.0,
            t: 0.0,
            eps: vec![0.0; n],
        };
        for k in 0..n {
            let l = self.lambda[k];
            let tau = channel_transmittance(self.alpha[k], d);
            let b = blackbody(l, t);
            let contrast = eps[k] * b - self.air[k];
            let r2 = 2.0 * (tau * contrast + self.air[k] - self.y[k]);
            g.d += r2 * (-(LN_10 / 10.0) * self.alpha[k] * tau * contrast);
            g.t += r2 * tau * eps[k] * blackbody_dt(l, t);
            g.eps[k] = r2 * tau * b;
        }
        for k in 0..n.saturating_sub(1) {
            let diff = 2.0 * self.rho * (eps[k + 1] - eps[k]);
            g.eps[k] -= diff;
            g.eps[k + 1] += diff;
        }
        g
    }

    /// Optimal emissivity for fixed `(d, T)`, written into `eps` (warm start).
    pub(crate) fn solve_emissivity(&self, d: f64, t: f64, eps: &mut [f64]) {
        let n = self.channels();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for k in 0..n {
            let tau = channel_transmittance(self.alpha[k], d);
            a[k] = tau * blackbody(self.lambda[k], t);
            b[k] = self.y[k] - (1.0 - tau) * self.air[k];
        }
        let scale = a.iter().map(|v| v * v).fold(0.0, f64::max).max(1.0);
        solve_box(&a, &b, self.rho, 0.0, 1.0, 1e-13 * scale, eps);
    }

    /// Loss and its `(d, T)` gradient with the emissivity profiled out.
    pub(crate) fn reduced(&self, d: f64, t: f64, eps: &mut [f64]) -> (f64, f64, f64) {
        self.solve_emissivity(d, t, eps);
        let g = self.gradient(d, t, eps);
        (self.loss(d, t, eps), g.d, g.t)
    }

    /// [`Problem::reduced`] in normalized coordinates `x = (d / 100, T / 300)`.
    fn reduced_scaled(&self, x: [f64; 2], eps: &mut [f64]) -> (f64, [f64; 2]) {
        let (f, gd, gt) = self.reduced(x[0] * RANGE_SCALE, x[1] * TEMPERATURE_SCALE, eps);
        (f, [gd * RANGE_SCALE, gt * TEMPERATURE_SCALE])
    }

    /// Symmetrized central difference of the analytic reduced gradient.
    fn reduced_hessian(&self, x: [f64; 2], eps: &[f64]) -> [[f64; 2]; 2] {
        let h = HESSIAN_STEP;
        let grad_at = |du: f64, dv: f64| {
            let mut e = eps.to_vec();
            self.reduced_scaled([x[0] + du, x[1] + dv], &mut e).1
        };
        let (up, un) = (grad_at(h, 0.0), grad_at(-h, 0.0));
        let (vp, vn) = (grad_at(0.0, h), grad_at(0.0, -h));
        let huv = ((up[1] - un[1]) + (vp[0] - vn[0])) / (4.0 * h);
        [
            [(up[0] - un[0]) / (2.0 * h), huv],
            [huv, (vp[1] - vn[1]) / (2.0 * h)],
        ]
    }
}

/// Damped Newton step restricted to the free coordinates; falls back to a
/// diagonally scaled gradient step when the damped matrix is indefinite.
fn newton_step(h: &[[f64; 2]; 2], g: &[f64; 2], free: [bool; 2], lam: f64) -> [f64; 2] {
    let m = |i: usize| {
        let d = h[i][i];
        d + lam * d.abs().max(1e-12)
    };
    let diag_step = |i: usize| if free[i] { g[i] / m(i).abs().max(1e-300) } else { 0.0 };
    if free[0] && free[1] {
        let (a, c, b) = (m(0), m(1), h[0][1]);
        let det = a * c - b * b;
        if a > 0.0 && det > 0.0 {
            return [(c * g[0] - b * g[1]) / det, (a * g[1] - b * g[0]) / det];
        }
    }
    [diag_step(0), diag_step(1)]
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn roughness(eps: &[f64]) -> f64 {
    eps.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
}

fn check_params(params: &HyperParams, measurement: &RadianceSpectrum) -> Result<()> {
    if params.eps.len() != measurement.values().len() {
        return Err(Error::GridMismatch(format!(
            "{} emissivity values for {} channels",
            params.eps.len(),
            measurement.values().len()
        )));
    }
    Ok(())
}

/// Data misfit plus `rho` times the squared first differences of emissivity.
pub fn hyperspectral_loss(
    params: &HyperParams,
    measurement: &RadianceSpectrum,
    atmo: &AtmosphereState,
    rho: f64,
) -> Result<f64> {
    check_params(params, measurement)?;
    let p = Problem::new(measurement, atmo, rho)?;
    Ok(p.loss(params.d, params.t, &params.eps))
}

/// Analytic gradient of [`hyperspectral_loss`].
pub fn hyperspectral_gradient(
    params: &HyperParams,
    measurement: &RadianceSpectrum,
    atmo: &AtmosphereState,
    rho: f64,
) -> Result<LossGradient> {
    check_params(params, measurement)?;
    let p = Problem::new(measurement, atmo, rho)?;
    Ok(p.gradient(params.d, params.t, &params.eps))
}

/// Minimize [`hyperspectral_loss`] over `d in [0, d_max]`, `T in [t_min, t_max]`
/// and `eps in [0, 1]`, starting from the configured constants.
///
/// Every outer iteration solves the emissivity block exactly, builds the 2x2
/// Hessian of the reduced loss from its analytic gradient, and takes a
/// projected, damped Newton step that must lower the loss.
pub fn hyperspectral_estimate(
    measurement: &RadianceSpectrum,
    atmo: &AtmosphereState,
    cfg: &HyperspectralConfig,
) -> Result<EstimationResult> {
    cfg.validate()?;
    if let Some(k) = measurement.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("measurement channel {k} is not finite")));
    }
    let p = Problem::new(measurement, atmo, cfg.rho)?;
    let lo = [0.0, cfg.t_min / TEMPERATURE_SCALE];
    let hi = [cfg.d_max / RANGE_SCALE, cfg.t_max / TEMPERATURE_SCALE];
    let mut x = [cfg.init_d / RANGE_SCALE, cfg.init_t / TEMPERATURE_SCALE];
    let mut eps = vec![cfg.init_eps; p.channels()];
    let (mut f, mut g) = p.reduced_scaled(x, &mut eps);
    if !f.is_finite() {
        return Err(Error::NonFiniteLoss { iteration: 0 });
    }

    let mut lam = cfg.damping;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.iterations {
        let free = [0, 1].map(|i| !((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)));
        let pg = norm([0, 1].map(|i| if free[i] { g[i] } else { 0.0 }));
        if pg < cfg.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let h = p.reduced_hessian(x, &eps);
        let mut accepted = false;
        while lam <= MAX_DAMPING {
            let mut s = newton_step(&h, &g, free, lam);
            let len = norm(s);
            if len > MAX_STEP {
                s = s.map(|v| v * MAX_STEP / len);
            }
            let trial = [0, 1].map(|i| (x[i] - s[i]).clamp(lo[i], hi[i]));
            if trial != x {
                let mut e = eps.clone();
                let (nf, ng) = p.reduced_scaled(trial, &mut e);
                if !nf.is_finite() {
                    return Err(Error::NonFiniteLoss { iteration: iterations });
                }
                if nf < f {
                    (x, eps, f, g) = (trial, e, nf, ng);
                    lam = (lam * cfg.damping_down).max(1e-15);
                    accepted = true;
                    break;
                }
            }
            lam *= cfg.damping_up;
        }
        if !accepted {
            converged = norm(newton_step(&h, &g, free, 0.0)) < STEP_TOL;
            break;
        }
    }

    let h = p.reduced_hessian(x, &eps);
    let schur = if h[1][1] > 0.0 {
        h[0][0] - h[0][1] * h[0][1] / h[1][1]
    } else {
        h[0][0]
    };
    // Under unit noise the reduced loss must at least localize d within the box.
    let identifiable = schur >= 2.0 * (RANGE_SCALE / cfg.d_max).powi(2);
    // report bounds exactly rather than through a scale round trip
    let unscale = |i: usize, scale: f64, lo_v: f64, hi_v: f64| {
        if x[i] <= lo[i] {
            lo_v
        } else if x[i] >= hi[i] {
            hi_v
        } else {
            (x[i] * scale).clamp(lo_v, hi_v)
        }
    };
    Ok(EstimationResult {
        d_hat: unscale(0, RANGE_SCALE, 0.0, cfg.d_max),
        t_hat: unscale(1, TEMPERATURE_SCALE, cfg.t_min, cfg.t_max),
        eps_hat: EmissivitySpectrum::new(measurement.grid().clone(), eps)?,
        final_loss: f.max(0.0),
        converged,
        identifiable,
        reliable: true,
        iterations,
    })
}

/// Run [`hyperspectral_estimate`] on every pixel of a cube, in pixel order.
/// Work is spread over the current rayon pool; output does not depend on it.
pub fn estimate_cube(
    cube: &HyperCube,
    atmo: &AtmosphereState,
    cfg: &HyperspectralConfig,
) -> Result<Vec<EstimationResult>> {
    atmo.grid().ensure_same(cube.grid(), "estimate_cube")?;
    cfg.validate()?;
    (0..cube.pixel_count())
        .into_par_iter()
        .map(|i| hyperspectral_estimate(&cube.spectrum_at(i)?, atmo, cfg))
        .collect()
}
