//! Built-in scenarios, embedded from `scenarios/*.toml`.

use super::config::ScenarioConfig;
use crate::error::{Error, Result};

const BUILTINS: [(&str, &str); 7] = [
    ("fig1a-zero-mean-2class", include_str!("../../scenarios/fig1a-zero-mean-2class.toml")),
    ("fig1b-nonzero-mean-2class", include_str!("../../scenarios/fig1b-nonzero-mean-2class.toml")),
    ("fig1c-4class", include_str!("../../scenarios/fig1c-4class.toml")),
    ("fig5-designed-2class-zero", include_str!("../../scenarios/fig5-designed-2class-zero.toml")),
    ("fig6-designed-2class-nonzero", include_str!("../../scenarios/fig6-designed-2class-nonzero.toml")),
    ("fig7-designed-3class", include_str!("../../scenarios/fig7-designed-3class.toml")),
    ("scalar-sanity", include_str!("../../scenarios/scalar-sanity.toml")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

/// Raw TOML of a built-in scenario.
pub fn builtin_source_text(name: &str) -> Result<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or_else(|| Error::UnknownScenario(name.to_owned()))
}

pub fn builtin(name: &str) -> Result<ScenarioConfig> {
    ScenarioConfig::from_toml_str(builtin_source_text(name)?)
}

/// Every built-in, parsed.
pub fn list_scenarios() -> Result<Vec<ScenarioConfig>> {
    builtin_names().map(builtin).collect()
}
