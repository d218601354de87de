//! Delay-aware path finding over the controller's view of the network.
//!
//! Dijkstra on the directed cost graph, restricted to links that are Up and
//! have a cost entry. Labels are compared by total cost, then hop count,
//! then the switch-id sequence from the source, so the result is unique for
//! any input.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llde::CostMatrix;
use crate::model::{Path, SwitchId, Time, Topology};
use crate::resilience::MechanismVariant;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteResult {
    pub path: Path,
    /// Estimated end-to-end delay of `path` under the costs it was computed from.
    pub ed: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoutingError {
    #[error("no path from {src} to {dst}")]
    NoPath { src: SwitchId, dst: SwitchId },
    #[error("unknown switch {0}")]
    UnknownSwitch(SwitchId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Label {
    cost: Time,
    switches: Vec<SwitchId>,
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .cmp(&other.cost)
            .then(self.switches.len().cmp(&other.switches.len()))
            .then_with(|| self.switches.cmp(&other.switches))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost simple path from `src` to `dst`.
pub fn find_path(
    topology: &Topology,
    costs: &CostMatrix,
    src: SwitchId,
    dst: SwitchId,
) -> Result<RouteResult, RoutingError> {
    for s in [src, dst] {
        if !topology.contains_switch(s) {
            return Err(RoutingError::UnknownSwitch(s));
        }
    }
    let n = topology.switch_count();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();

    let start = Label {
        cost: Time::ZERO,
        switches: vec![src],
    };
    best[src.index()] = Some(start.clone());
    heap.push(Reverse(start));

    while let Some(Reverse(label)) = heap.pop() {
        let at = *label.switches.last().expect("labels are non-empty");
        if settled[at.index()] || best[at.index()].as_ref() != Some(&label) {
            continue;
        }
        settled[at.index()] = true;
        if at == dst {
            return Ok(RouteResult {
                path: Path::new(label.switches).expect("dijkstra labels are simple paths"),
                ed: label.cost,
            });
        }
        for &(next, link) in topology.neighbors(at) {
            if settled[next.index()] || !topology.link(link).is_up() {
                continue;
            }
            let Some(c) = costs.cost(at, next) else { continue };
            let mut switches = label.switches.clone();
            switches.push(next);
            let candidate = Label {
                cost: label.cost.saturating_add(c),
                switches,
            };
            let improves = best[next.index()].as_ref().is_none_or(|cur| candidate < *cur);
            if improves {
                best[next.index()] = Some(candidate.clone());
                heap.push(Reverse(candidate));
            }
        }
    }
    Err(RoutingError::NoPath { src, dst })
}

/// Situations in which the controller may run the path finder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RouteTrigger {
    FlowArrival,
    EstimationCycle,
    Fault,
}

/// Whether `variant` runs the path finder on `trigger`.
pub fn invokes_on(variant: &MechanismVariant, trigger: RouteTrigger) -> bool {
    match trigger {
        RouteTrigger::FlowArrival => true,
        RouteTrigger::EstimationCycle => variant.proactive,
        RouteTrigger::Fault => variant.reactive,
    }
}

/// Filters a stream of kernel triggers down to the ones that invoke the path
/// finder for `variant`, preserving order.
pub fn route_triggers(variant: &MechanismVariant, events: &[(Time, RouteTrigger)]) -> Vec<(Time, RouteTrigger)> {
    events
        .iter()
        .copied()
        .filter(|(_, t)| invokes_on(variant, *t))
        .collect()
}
