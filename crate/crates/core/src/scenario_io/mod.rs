//! Scenario files, the bundled scenario, run records and their CSV and SVG
//! renderings.

mod config;
mod preset;
mod record;
pub mod svg;
pub mod tables;

pub use config::{
    edge_list_fragment, parse_scenario, serialize_scenario, GraphSpec, Scenario,
    SAMPLED_DEMAND_RANGE,
};
pub use preset::{reference_scenario, REFERENCE_SCENARIO};
pub use record::SimulationRecord;
pub use svg::{render_svg, write_svgs, ChartKind};
pub use tables::{format_sig, write_csv, CSV_FILES};
