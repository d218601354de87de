//! Network graph, physical link parameters, flows and time.

mod control;
mod flow;
mod path;
mod time;
mod topology;

pub use control::{ControlChannel, ControlLatency};
pub use flow::{Flow, FlowError, FlowId};
pub use path::{Path, PathError};
pub use time::{parse_bits, transmission_delay, Bandwidth, Time, UnitError, ZeroBandwidth};
pub use topology::{
    build_topology, Host, HostId, HostSpec, Link, LinkId, LinkSpec, LinkState, SwitchId, Topology, TopologyError,
    TopologySpec,
};
