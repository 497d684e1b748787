//! Bundled ten-building scenario.

use super::config::{parse_scenario, Scenario};

/// Text of the bundled scenario file.
pub const REFERENCE_SCENARIO: &str = include_str!("../../presets/ten_buildings.cfg");

/// Ten buildings on a ring, capacity 700, `a = 1`, `k = 4`, `α = 0.05`.
pub fn reference_scenario() -> Scenario<f64> {
    parse_scenario(REFERENCE_SCENARIO).expect("bundled scenario is valid")
}
