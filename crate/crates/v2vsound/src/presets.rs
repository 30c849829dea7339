//! Built-in scenarios, addressable by name wherever a scenario path is
//! accepted.

use std::path::Path;

use crate::config::{load_scenario, load_scenario_file, Scenario};
use crate::error::{Error, Result};

pub const PRESETS: &[(&str, &str)] = &[
    ("fig5-waveguide", include_str!("../presets/fig5-waveguide.toml")),
    ("los-100m", include_str!("../presets/los-100m.toml")),
    ("head-on", include_str!("../presets/head-on.toml")),
    ("synthetic-drive", include_str!("../presets/synthetic-drive.toml")),
];

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn load_preset(name: &str) -> Result<Scenario> {
    let text = preset_text(name).ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
    load_scenario(text, name, None)
}

/// Load `arg` as a file when it names one, else as a preset.
pub fn resolve_scenario(arg: &str) -> Result<Scenario> {
    let path = Path::new(arg);
    if path.is_file() {
        return load_scenario_file(path);
    }
    match preset_text(arg) {
        Some(text) => load_scenario(text, arg, None),
        None => Err(Error::UnknownScenario(arg.to_string())),
    }
}
