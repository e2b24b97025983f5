use super::ScenePixel;
use crate::error::{Error, Result};
use crate::spectral::{RadianceSpectrum, SpectralGrid};

/// H x W x K radiance cube in microflicks.
///
/// Stored pixel-interleaved in memory (`pixel(r, c)` is a contiguous slice);
/// the on-disk layout is band-sequential, see [`super::hsrc`].
#[derive(Clone, Debug, PartialEq)]
pub struct HyperCube {
    height: usize,
    width: usize,
    grid: SpectralGrid,
    data: Vec<f64>,
    t_air: f64,
    provenance: String,
}

impl HyperCube {
    pub fn new(
        height: usize,
        width: usize,
        grid: SpectralGrid,
        data: Vec<f64>,
        t_air: f64,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Precondition("cube needs at least one pixel".into()));
        }
        let expect = height * width * grid.len();
        if data.len() != expect {
            return Err(Error::Precondition(format!(
                "cube data has {} values, expected {expect}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("cube value {i} is not finite")));
        }
        Ok(Self {
            height,
            width,
            grid,
            data,
            t_air,
            provenance: provenance.into(),
        })
    }

    pub(crate) fn zeros(
        height: usize,
        width: usize,
        grid: SpectralGrid,
        t_air: f64,
        provenance: &str,
    ) -> Result<Self> {
        let n = height * width * grid.len();
        Self::new(height, width, grid, vec![0.0; n], t_air, provenance)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.grid.len()
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn t_air(&self) -> f64 {
        self.t_air
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> &[f64] {
        self.pixel_at(row * self.width + col)
    }

    /// Pixel by row-major index.
    pub fn pixel_at(&self, index: usize) -> &[f64] {
        let k = self.channels();
        &self.data[index * k..(index + 1) * k]
    }

    pub fn spectrum_at(&self, index: usize) -> Result<RadianceSpectrum> {
        RadianceSpectrum::new(self.grid.clone(), self.pixel_at(index).to_vec())
    }

    /// One band as a row-major H x W image.
    pub fn band(&self, k: usize) -> Vec<f64> {
        (0..self.pixel_count())
            .map(|i| self.data[i * self.channels() + k])
            .collect()
    }
}

/// Per-pixel ground truth, row-major.
#[derive(Clone, Debug)]
pub struct SceneTruth {
    height: usize,
    width: usize,
    pixels: Vec<ScenePixel>,
}

impl SceneTruth {
    pub fn new(height: usize, width: usize, pixels: Vec<ScenePixel>) -> Result<Self> {
        if height == 0 || width == 0 || pixels.len() != height * width {
            return Err(Error::Precondition(format!(
                "{} truth pixels for a {height}x{width} scene",
                pixels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[ScenePixel] {
        &self.pixels
    }
}
