use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::time::Time;
use super::topology::SwitchId;

/// One-way latencies of the control channel between the controller and a switch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlLatency {
    /// Controller to switch.
    pub down: Time,
    /// Switch to controller.
    pub up: Time,
}

impl ControlLatency {
    pub const fn symmetric(one_way: Time) -> Self {
        ControlLatency {
            down: one_way,
            up: one_way,
        }
    }

    pub fn rtt(&self) -> Time {
        self.down + self.up
    }
}

impl Default for ControlLatency {
    fn default() -> Self {
        ControlLatency::symmetric(Time::from_micros(250))
    }
}

/// Controller-to-switch latencies for every switch, with per-switch overrides.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlChannel {
    pub default: ControlLatency,
    pub per_switch: BTreeMap<SwitchId, ControlLatency>,
    /// Each control message is additionally delayed by a uniform draw from `[0, jitter)`.
    pub jitter: Time,
}

impl ControlChannel {
    pub fn uniform(latency: ControlLatency) -> Self {
        ControlChannel {
            default: latency,
            ..Default::default()
        }
    }

    pub fn latency(&self, s: SwitchId) -> ControlLatency {
        self.per_switch.get(&s).copied().unwrap_or(self.default)
    }

    /// Largest one-way latency in either direction over all configured switches.
    pub fn max_one_way(&self) -> Time {
        self.per_switch
            .values()
            .chain(std::iter::once(&self.default))
            .map(|l| l.down.max(l.up))
            .max()
            .unwrap_or(Time::ZERO)
    }
}
