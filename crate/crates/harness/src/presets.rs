//! Scene presets. The canonical copies live in `presets/` at the repository
//! root; they are compiled in so the binary works from any directory.

use std::path::Path;

use lwir_core::{Error, Result};

use crate::config::Config;

pub const NAMES: &[&str] = &["fig1-like", "panel-scene", "ramp-scene"];

pub fn text(name: &str) -> Option<&'static str> {
    match name {
        "fig1-like" => Some(include_str!("../../../presets/fig1-like.cfg")),
        "panel-scene" => Some(include_str!("../../../presets/panel-scene.cfg")),
        "ramp-scene" => Some(include_str!("../../../presets/ramp-scene.cfg")),
        _ => None,
    }
}

pub fn load(name: &str) -> Result<Config> {
    let text = text(name).ok_or_else(|| {
        Error::field("preset", format!("`{name}`; known presets: {}", NAMES.join(", ")))
    })?;
    Config::parse(Path::new(&format!("preset:{name}")), text)
}
