//! Figure presets shipped with the binary.

use crate::config::{ConfigError, ScenarioConfig};

pub const PRESETS: [(&str, &str); 6] = [
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig7b", include_str!("../presets/fig7b.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parsed preset; `None` for an unknown name.
pub fn load_preset(name: &str) -> Option<Result<ScenarioConfig, ConfigError>> {
    preset_source(name).map(str::parse)
}
