//! Experiment plumbing around `lwir_core`: config files and presets, scene
//! construction, the subcommands, Monte Carlo studies and result writers.

pub mod commands;
pub mod config;
pub mod montecarlo;
pub mod output;
pub mod presets;
pub mod scene;
pub mod spec;

use std::path::Path;

use lwir_core::{Error, Result};

pub use config::Config;
pub use spec::{EstimatorKind, ExperimentSpec};

/// Point `config` at another atmosphere: either a preset name, whose
/// atmosphere keys replace ours, or an attenuation CSV.
pub fn apply_atmosphere(config: &mut Config, source: &str) -> Result<()> {
    for key in spec::ATMOSPHERE_KEYS {
        if *key != "grid" && *key != "t_air" {
            config.remove(key);
        }
    }
    if presets::text(source).is_some() {
        let preset = presets::load(source)?;
        for key in spec::ATMOSPHERE_KEYS {
            let values = preset.get_all(key);
            if values.is_empty() {
                continue;
            }
            config.remove(key);
            for v in values {
                config.push(key, v);
            }
        }
        return Ok(());
    }
    let path = Path::new(source);
    if !path.is_file() {
        return Err(Error::field(
            "atmo",
            format!("`{source}` is neither a preset nor a readable file"),
        ));
    }
    config.set("atmosphere", source);
    Ok(())
}
