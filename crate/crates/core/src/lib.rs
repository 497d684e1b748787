//! Discrete-time simulator of a self-balancing microgrid.
//!
//! Buildings talk only to their neighbors in a communication graph. Each slot
//! they learn (or track) the network-wide average demand, price the implied
//! total with a congestion price that adds a sigmoid surcharge above grid
//! capacity, and step their own demand toward the point where willingness to
//! pay equals expenditure.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, with `*F32` variants for single precision.
//!
//! ```
//! use microgrid::{protocol, reference_scenario};
//!
//! let record = protocol::run(&reference_scenario()).unwrap();
//! assert!(record.reached_equilibrium());
//! assert!((record.final_total() - 700.0).abs() < 7.0);
//! ```

// `!(x > 0)` style guards are used on purpose so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod cli;
pub mod consensus;
pub mod error;
pub mod matrix;
pub mod pricing;
pub mod protocol;
pub mod scalar;
pub mod scenario_io;
pub mod topology;

pub use error::{Error, Result};
pub use pricing::SigmoidKind;
pub use protocol::Mode;
pub use scalar::Scalar;
pub use scenario_io::{parse_scenario, reference_scenario, GraphSpec};
pub use topology::{Graph, TopologyKind};

pub type Matrix = matrix::Matrix<f64>;
pub type EigenResult = consensus::EigenResult<f64>;
pub type WeightMatrix = consensus::WeightMatrix<f64>;
pub type PricingParams = pricing::PricingParams<f64>;
pub type BuildingState = agent::BuildingState<f64>;
pub type AgentParams = agent::AgentParams<f64>;
pub type ProtocolConfig = protocol::ProtocolConfig<f64>;
pub type SlotOutcome = protocol::SlotOutcome<f64>;
pub type Scenario = scenario_io::Scenario<f64>;
pub type SimulationRecord = scenario_io::SimulationRecord<f64>;

pub type WeightMatrixF32 = consensus::WeightMatrix<f32>;
pub type PricingParamsF32 = pricing::PricingParams<f32>;
pub type ScenarioF32 = scenario_io::Scenario<f32>;
pub type SimulationRecordF32 = scenario_io::SimulationRecord<f32>;
