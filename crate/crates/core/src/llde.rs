//! Link-layer delay estimation.
//!
//! The controller stamps each LLDP Packet-Out with its send time. When the
//! neighbouring switch hands the frame back in a Packet-In, the elapsed time
//! covers controller→s1, the link s1→s2 and s2→controller. Subtracting the
//! Echo round-trip times of both switches leaves the link delay in each
//! direction; the sum over both directions is halved to give the one-way
//! link delay. Link cost adds the sender's transmission delay, and a path's
//! estimated delay is the sum of its link costs.

use std::collections::BTreeMap;

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{transmission_delay, ControlChannel, Path, SwitchId, Time, Topology};

/// Default probe size used for the transmission-delay term: 1500 bytes.
pub const DEFAULT_PROBE_BITS: u64 = 12_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DirectedLink {
    pub from: SwitchId,
    pub to: SwitchId,
}

/// Timestamps gathered by one round of LLDP discovery over a link plus the
/// Echo RTTs of its two endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeObservation {
    pub link: DirectedLink,
    /// Packet-Out towards s1 leaves the controller.
    pub lldp_send_time: Time,
    /// Packet-In from s2 reaches the controller.
    pub lldp_return_time: Time,
    /// Packet-Out towards s2 leaves the controller.
    pub reverse_lldp_send_time: Time,
    /// Packet-In from s1 reaches the controller.
    pub reverse_lldp_return_time: Time,
    pub rtt_s1: Time,
    pub rtt_s2: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LldeError {
    #[error("probe returned before it was sent on {0:?}")]
    ReturnBeforeSend(DirectedLink),
    #[error("no cost entry for {from}->{to}")]
    MissingCost { from: SwitchId, to: SwitchId },
}

impl ProbeObservation {
    pub fn new(
        link: DirectedLink,
        (lldp_send_time, lldp_return_time): (Time, Time),
        (reverse_lldp_send_time, reverse_lldp_return_time): (Time, Time),
        rtt_s1: Time,
        rtt_s2: Time,
    ) -> Result<Self, LldeError> {
        if lldp_return_time < lldp_send_time || reverse_lldp_return_time < reverse_lldp_send_time {
            return Err(LldeError::ReturnBeforeSend(link));
        }
        Ok(ProbeObservation {
            link,
            lldp_send_time,
            lldp_return_time,
            reverse_lldp_send_time,
            reverse_lldp_return_time,
            rtt_s1,
            rtt_s2,
        })
    }

    /// Forward and reverse residuals summed, in nanoseconds. May be negative
    /// when the Echo RTTs over-explain the probe times.
    pub fn raw_residual(&self) -> i128 {
        let fwd = self.lldp_return_time.as_nanos() as i128 - self.lldp_send_time.as_nanos() as i128;
        let rev = self.reverse_lldp_return_time.as_nanos() as i128 - self.reverse_lldp_send_time.as_nanos() as i128;
        fwd + rev - self.rtt_s1.as_nanos() as i128 - self.rtt_s2.as_nanos() as i128
    }
}

/// Whether the residual is halved (one-way delay) or returned as summed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DelayMode {
    #[default]
    OneWay,
    /// The undivided two-direction residual.
    Raw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkDelayEstimate {
    pub delay: Time,
    /// The raw residual was negative and has been clamped to zero.
    pub clamped: bool,
}

/// One-way link delay from a probe observation; negative residuals clamp to zero.
pub fn estimate_link_delay(obs: &ProbeObservation) -> LinkDelayEstimate {
    estimate_link_delay_with(obs, DelayMode::OneWay)
}

pub fn estimate_link_delay_with(obs: &ProbeObservation, mode: DelayMode) -> LinkDelayEstimate {
    let raw = obs.raw_residual();
    if raw < 0 {
        warn!(
            "negative link delay residual {raw}ns on {}->{}; clamping to 0",
            obs.link.from, obs.link.to
        );
        return LinkDelayEstimate {
            delay: Time::ZERO,
            clamped: true,
        };
    }
    let raw = raw as u128;
    let delay = match mode {
        // halves round up
        DelayMode::OneWay => raw.div_ceil(2),
        DelayMode::Raw => raw,
    };
    LinkDelayEstimate {
        delay: Time::from_nanos(u64::try_from(delay).unwrap_or(u64::MAX)),
        clamped: false,
    }
}

/// Cost of traversing a directed link: sender transmission delay plus link delay.
pub fn link_cost(td_sender: Time, link_delay: Time) -> Time {
    td_sender.saturating_add(link_delay)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostEntry {
    pub link_delay: Time,
    pub transmission_delay: Time,
    pub cost: Time,
    pub last_updated: Time,
}

/// Per-directed-link costs held by the controller. An entry exists only for
/// links whose probes came back in the latest cycle (and that the controller
/// has not since learned are down).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CostMatrix {
    entries: BTreeMap<(SwitchId, SwitchId), CostEntry>,
}

impl CostMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores an entry with `cost = td + ld`.
    pub fn insert(&mut self, from: SwitchId, to: SwitchId, link_delay: Time, transmission_delay: Time, now: Time) {
        self.entries.insert(
            (from, to),
            CostEntry {
                link_delay,
                transmission_delay,
                cost: link_cost(transmission_delay, link_delay),
                last_updated: now,
            },
        );
    }

    pub fn get(&self, from: SwitchId, to: SwitchId) -> Option<&CostEntry> {
        self.entries.get(&(from, to))
    }

    pub fn cost(&self, from: SwitchId, to: SwitchId) -> Option<Time> {
        self.get(from, to).map(|e| e.cost)
    }

    /// Drops both directions of the link between `a` and `b`.
    pub fn remove_link(&mut self, a: SwitchId, b: SwitchId) {
        self.entries.remove(&(a, b));
        self.entries.remove(&(b, a));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DirectedLink, &CostEntry)> {
        self.entries
            .iter()
            .map(|(&(from, to), e)| (DirectedLink { from, to }, e))
    }
}

/// Estimated end-to-end delay of `path`: the sum of its directed link costs.
pub fn estimate_path_delay(path: &Path, costs: &CostMatrix) -> Result<Time, LldeError> {
    path.directed_links().try_fold(Time::ZERO, |acc, (from, to)| {
        costs
            .cost(from, to)
            .map(|c| acc.saturating_add(c))
            .ok_or(LldeError::MissingCost { from, to })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Probe size for the transmission-delay term, in bits.
    pub probe_length: u64,
    pub mode: DelayMode,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            probe_length: DEFAULT_PROBE_BITS,
            mode: DelayMode::OneWay,
        }
    }
}

/// One cost-matrix entry as produced by an estimation cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: u64,
    pub link: DirectedLink,
    pub link_delay: Time,
    pub transmission_delay: Time,
    pub cost: Time,
    pub clamped: bool,
}

#[derive(Clone, Debug, Default)]
pub struct CycleOutcome {
    pub costs: CostMatrix,
    pub records: Vec<CycleRecord>,
    pub observations: Vec<ProbeObservation>,
}

/// Probes every Up link from the controller at `now` and builds a fresh
/// cost matrix.
///
/// LLDP frames cross the data link with its propagation delay only; the
/// transmission-delay term is computed separately from `config.probe_length`
/// and the sender's egress capacity. Down links lose their probes and get no
/// entry. Control-channel jitter, when configured, is drawn from `rng`.
pub fn run_estimation_cycle<R: Rng>(
    topology: &Topology,
    control: &ControlChannel,
    config: &EstimatorConfig,
    now: Time,
    cycle: u64,
    rng: &mut R,
) -> CycleOutcome {
    let mut out = CycleOutcome::default();
    let mut jitter = || {
        if control.jitter == Time::ZERO {
            Time::ZERO
        } else {
            Time::from_nanos(rng.gen_range(0..control.jitter.as_nanos()))
        }
    };
    for link in topology.links().iter().filter(|l| l.is_up()) {
        let (s1, s2) = (link.a, link.b);
        let (c1, c2) = (control.latency(s1), control.latency(s2));
        let prop = link.propagation_delay;

        let fwd_return = now + c1.down + jitter() + prop + c2.up + jitter();
        let rev_return = now + c2.down + jitter() + prop + c1.up + jitter();
        let rtt_s1 = c1.rtt() + jitter() + jitter();
        let rtt_s2 = c2.rtt() + jitter() + jitter();

        let td = transmission_delay(config.probe_length, link.capacity).expect("validated capacity");
        for (from, to, fwd, rev, rtt_from, rtt_to) in [
            (s1, s2, fwd_return, rev_return, rtt_s1, rtt_s2),
            (s2, s1, rev_return, fwd_return, rtt_s2, rtt_s1),
        ] {
            let obs = ProbeObservation::new(DirectedLink { from, to }, (now, fwd), (now, rev), rtt_from, rtt_to)
                .expect("probe returns are after sends");
            let est = estimate_link_delay_with(&obs, config.mode);
            out.costs.insert(from, to, est.delay, td, now);
            out.records.push(CycleRecord {
                cycle,
                link: obs.link,
                link_delay: est.delay,
                transmission_delay: td,
                cost: link_cost(td, est.delay),
                clamped: est.clamped,
            });
            out.observations.push(obs);
        }
    }
    out
}
