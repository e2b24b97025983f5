//! Range estimators: closed-form bispectral, regularized hyperspectral,
//! plus the downwelling mask and emissivity clustering used around them.

pub mod bispectral;
pub mod hyperspectral;
pub mod kmeans;
pub mod ozone;
mod tridiag;

pub use bispectral::{
    bispectral_object_radiance, bispectral_range, estimate_air_temperature, AirEmission,
    AirTemperature, BispectralConfig,
};
pub use hyperspectral::{
    estimate_cube, hyperspectral_estimate, hyperspectral_gradient, hyperspectral_loss,
    EstimationResult, HyperParams, HyperspectralConfig, LossGradient,
};
pub use kmeans::{cluster_emissivities, kmeans, Clustering};
pub use ozone::{ozone_mask, OzoneMask, OzoneMaskConfig};
