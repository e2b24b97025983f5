//! Flags pixels contaminated by reflected sky radiance using the narrow ozone
//! feature near 9.6 um, which only a long (sky) path can imprint.

use crate::error::{Error, Result};
use crate::forward::HyperCube;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OzoneMaskConfig {
    pub lambda_a_um: f64,
    pub lambda_b_um: f64,
    /// Largest tolerated probe difference, microflicks. May be infinite.
    pub threshold: f64,
}

impl Default for OzoneMaskConfig {
    fn default() -> Self {
        Self {
            lambda_a_um: 9.50,
            lambda_b_um: 9.58,
            threshold: 4.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OzoneMask {
    pub height: usize,
    pub width: usize,
    pub channel_a: usize,
    pub channel_b: usize,
    /// `|L_a - L_b|` per pixel, row-major.
    pub difference: Vec<f64>,
    /// True where the difference is within the threshold.
    pub reliable: Vec<bool>,
}

impl OzoneMask {
    pub fn flagged(&self) -> usize {
        self.reliable.iter().filter(|r| !**r).count()
    }
}

pub fn ozone_mask(cube: &HyperCube, cfg: &OzoneMaskConfig) -> Result<OzoneMask> {
    if !(cfg.threshold > 0.0) {
        return Err(Error::field("threshold", format!("{} must be > 0", cfg.threshold)));
    }
    let grid = cube.grid();
    for l in [cfg.lambda_a_um, cfg.lambda_b_um] {
        if !grid.contains(l) {
            return Err(Error::Precondition(format!(
                "probe {l} um outside grid [{}, {}] um",
                grid.first(),
                grid.last()
            )));
        }
    }
    let (a, b) = (grid.nearest_channel(cfg.lambda_a_um), grid.nearest_channel(cfg.lambda_b_um));
    let difference: Vec<f64> = (0..cube.pixel_count())
        .map(|i| {
            let px = cube.pixel_at(i);
            (px[a] - px[b]).abs()
        })
        .collect();
    let reliable = difference.iter().map(|&d| d <= cfg.threshold).collect();
    Ok(OzoneMask {
        height: cube.height(),
        width: cube.width(),
        channel_a: a,
        channel_b: b,
        difference,
        reliable,
    })
}
