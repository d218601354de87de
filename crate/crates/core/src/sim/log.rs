//! Structured records a run leaves behind.

use serde::{Deserialize, Serialize};

use crate::contracts::{ActivationChange, AssumptionTag, ContractChangeEvent, FaultReport, PairId};
use crate::llde::{CostEntry, CycleRecord};
use crate::model::{FlowId, LinkId, Path, SwitchId, Time};
use crate::resilience::{EventNotification, MechanismVariant, RestorationRecord, Strategy, Warning};

/// Index into [`RunLog::paths`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DropReason {
    /// The link went down while the packet was queued or on the wire.
    LinkDown,
    /// The next hop of the packet's path was already down.
    NoRoute,
    /// The egress buffer was full.
    QueueOverflow,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub flow: FlowId,
    /// Packet index within its flow.
    pub index: u64,
    pub bits: u64,
    pub sent_at: Time,
    /// `None` for dropped packets.
    pub delivered_at: Option<Time>,
    pub drop: Option<DropReason>,
    /// Switch path the packet was given at ingress; `None` if it had none.
    pub path: Option<PathId>,
    /// Time spent waiting for busy egress links.
    pub queue_wait: Time,
    /// Kernel step (processed-event count) at which the packet left the system.
    pub step: u64,
}

impl PacketRecord {
    pub fn actual_delay(&self) -> Option<Time> {
        self.delivered_at.map(|d| d.saturating_sub(self.sent_at))
    }
}

/// Requirement in force for a contract pair from `step` on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractHistoryEntry {
    pub pair: PairId,
    pub at: Time,
    pub step: u64,
    pub active_ped: Time,
    pub strong_ped: Time,
}

/// A path chosen by the path finder, with the cost components it was priced from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutedPath {
    pub at: Time,
    pub path: Vec<SwitchId>,
    pub ed: Time,
    pub hops: Vec<CostEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Handling {
    /// Evaluated on delivery (reactive).
    Immediate,
    /// Queued for the next estimation cycle (proactive only).
    Deferred,
    /// The variant runs no monitors.
    Ignored,
    /// The link was already back up on delivery.
    Stale,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum LogEntry {
    LinkState {
        at: Time,
        link: LinkId,
        up: bool,
    },
    ContractChanged(ContractChangeEvent),
    Notification {
        notification: EventNotification,
        handling: Handling,
    },
    Fault(FaultReport),
    Decision {
        at: Time,
        pair: PairId,
        strategy: Strategy,
        path: Option<Vec<SwitchId>>,
        ed: Option<Time>,
    },
    Restoration(RestorationRecord),
    Warning(Warning),
    Activation(ActivationChange),
    RouteInstalled {
        at: Time,
        effective_at: Time,
        src: SwitchId,
        dst: SwitchId,
        path: PathId,
    },
    AssumptionViolated {
        at: Time,
        tag: AssumptionTag,
    },
}

/// Per-check (estimation cycle) contract satisfaction counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckCounts {
    pub total: u64,
    pub satisfied: u64,
}

/// Counters maintained while the run executes; recomputable from the log.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnlineCounts {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub delivered_bits: u64,
    /// Packets of flows covered by a contract.
    pub covered: u64,
    pub satisfied: u64,
    pub strong_satisfied: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunLog {
    pub variant: MechanismVariant,
    pub seed: u64,
    pub emulation_time: Time,
    pub paths: Vec<Path>,
    /// Contract pair of each flow, by flow index.
    pub flow_pairs: Vec<Option<PairId>>,
    pub packets: Vec<PacketRecord>,
    pub contract_history: Vec<ContractHistoryEntry>,
    pub entries: Vec<LogEntry>,
    pub cycles: Vec<CycleRecord>,
    pub routed: Vec<RoutedPath>,
    pub checks: CheckCounts,
    pub online: OnlineCounts,
}

impl RunLog {
    pub fn path(&self, id: PathId) -> &Path {
        &self.paths[id.0 as usize]
    }

    pub fn restorations(&self) -> impl Iterator<Item = &RestorationRecord> {
        self.entries.iter().filter_map(|e| match e {
            LogEntry::Restoration(r) => Some(r),
            _ => None,
        })
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Warning> {
        self.entries.iter().filter_map(|e| match e {
            LogEntry::Warning(w) => Some(w),
            _ => None,
        })
    }

    pub fn faults(&self) -> impl Iterator<Item = &FaultReport> {
        self.entries.iter().filter_map(|e| match e {
            LogEntry::Fault(f) => Some(f),
            _ => None,
        })
    }
}
