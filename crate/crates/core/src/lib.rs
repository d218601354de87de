//! Discrete-event SDN simulator with link-layer delay estimation,
//! contract-based resilience management and delay-aware routing.

pub mod contracts;
pub mod harness;
pub mod llde;
pub mod model;
pub mod resilience;
pub mod routing;
pub mod sim;

pub use contracts::{Contract, ContractId, ContractKind, ContractPair, ContractStore, FaultCause, FaultReport, PairId};
pub use llde::{CostMatrix, DelayMode, EstimatorConfig};
pub use model::*;
pub use resilience::{MechanismVariant, RestorationRecord};
pub use routing::{find_path, RouteResult, RoutingError};
