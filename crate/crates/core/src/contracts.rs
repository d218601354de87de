//! Strong/weak delay contracts and their observers.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{SwitchId, Time};

/// Identifies a single contract. Pair `p` owns ids `2p` (strong) and `2p + 1` (weak).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContractId(pub u32);

impl ContractId {
    pub fn pair(self) -> PairId {
        PairId(self.0 / 2)
    }

    pub fn kind(self) -> ContractKind {
        if self.0.is_multiple_of(2) {
            ContractKind::Strong
        } else {
            ContractKind::Weak
        }
    }

    pub fn of(pair: PairId, kind: ContractKind) -> Self {
        ContractId(pair.0 * 2 + kind as u32)
    }
}

impl fmt::Display for ContractId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "c{}{}",
            self.pair().0,
            if self.kind() == ContractKind::Strong { "s" } else { "w" }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PairId(pub u32);

impl PairId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ContractKind {
    Strong = 0,
    Weak = 1,
}

/// Conditions a contract is stated under. Recorded for audit only; they do
/// not gate observer evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssumptionTag {
    /// A stable path exists between the endpoints.
    StablePath,
    /// No E1/E2 event occurs between two estimation cycles.
    NoEventsBetweenCycles,
}

pub const DEFAULT_ASSUMPTIONS: [AssumptionTag; 2] = [AssumptionTag::StablePath, AssumptionTag::NoEventsBetweenCycles];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contract {
    pub id: ContractId,
    pub src: SwitchId,
    pub dst: SwitchId,
    pub kind: ContractKind,
    /// End-to-end delay requirement.
    pub ped: Time,
    pub assumptions: Vec<AssumptionTag>,
    pub active: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractPair {
    pub strong: Contract,
    pub weak: Contract,
}

impl ContractPair {
    pub fn id(&self) -> PairId {
        self.strong.id.pair()
    }

    pub fn endpoints(&self) -> (SwitchId, SwitchId) {
        (self.strong.src, self.strong.dst)
    }

    pub fn active(&self) -> &Contract {
        if self.strong.active {
            &self.strong
        } else {
            &self.weak
        }
    }

    pub fn active_kind(&self) -> ContractKind {
        self.active().kind
    }

    pub fn get(&self, kind: ContractKind) -> &Contract {
        match kind {
            ContractKind::Strong => &self.strong,
            ContractKind::Weak => &self.weak,
        }
    }

    fn get_mut(&mut self, kind: ContractKind) -> &mut Contract {
        match kind {
            ContractKind::Strong => &mut self.strong,
            ContractKind::Weak => &mut self.weak,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("delay requirement must be positive")]
    NonPositivePed,
    #[error("weak requirement {weak} is tighter than strong requirement {strong}")]
    WeakBelowStrong { strong: Time, weak: Time },
    #[error("unknown contract {0}")]
    Unknown(ContractId),
    #[error("contract pair for {src}->{dst} already exists")]
    DuplicatePair { src: SwitchId, dst: SwitchId },
}

/// Builds a linked strong/weak pair with the strong contract active.
pub fn create_contract_pair(
    pair: PairId,
    src: SwitchId,
    dst: SwitchId,
    strong_ped: Time,
    weak_ped: Time,
) -> Result<ContractPair, ContractError> {
    if strong_ped == Time::ZERO {
        return Err(ContractError::NonPositivePed);
    }
    if weak_ped < strong_ped {
        return Err(ContractError::WeakBelowStrong {
            strong: strong_ped,
            weak: weak_ped,
        });
    }
    let make = |kind, ped, active| Contract {
        id: ContractId::of(pair, kind),
        src,
        dst,
        kind,
        ped,
        assumptions: DEFAULT_ASSUMPTIONS.to_vec(),
        active,
    };
    Ok(ContractPair {
        strong: make(ContractKind::Strong, strong_ped, true),
        weak: make(ContractKind::Weak, weak_ped, false),
    })
}

/// How a fault came to be noticed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultCause {
    EstimationCycle,
    LinkFailureEvent,
    ContractChangeEvent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultReport {
    pub contract: ContractId,
    /// `Time::INFINITE` when the current path is broken in the controller's view.
    pub observed_ed: Time,
    pub ped: Time,
    pub detected_at: Time,
    pub cause: FaultCause,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Fault(FaultReport),
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

/// Checks an estimated delay against a contract's guarantee `ed <= ped`.
pub fn observe(contract: &Contract, ed: Time, now: Time, cause: FaultCause) -> Verdict {
    if ed <= contract.ped {
        Verdict::Ok
    } else {
        Verdict::Fault(FaultReport {
            contract: contract.id,
            observed_ed: ed,
            ped: contract.ped,
            detected_at: now,
            cause,
        })
    }
}

/// A run-time change of a delay requirement (an E2 source).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractChangeEvent {
    pub contract: ContractId,
    pub old_ped: Time,
    pub new_ped: Time,
    /// The other contract of the pair, if it had to be moved to keep `weak >= strong`.
    pub adjusted: Option<(ContractId, Time, Time)>,
    pub at: Time,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationChange {
    pub pair: PairId,
    pub to: ContractKind,
    pub at: Time,
}

/// All contract pairs of a run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractStore {
    pairs: Vec<ContractPair>,
}

impl ContractStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_pair(
        &mut self,
        src: SwitchId,
        dst: SwitchId,
        strong: Time,
        weak: Time,
    ) -> Result<PairId, ContractError> {
        if self.pair_for(src, dst).is_some() {
            return Err(ContractError::DuplicatePair { src, dst });
        }
        let id = PairId(self.pairs.len() as u32);
        self.pairs.push(create_contract_pair(id, src, dst, strong, weak)?);
        Ok(id)
    }

    pub fn pairs(&self) -> &[ContractPair] {
        &self.pairs
    }

    pub fn pair(&self, id: PairId) -> &ContractPair {
        &self.pairs[id.index()]
    }

    pub fn pair_for(&self, src: SwitchId, dst: SwitchId) -> Option<PairId> {
        self.pairs.iter().find(|p| p.endpoints() == (src, dst)).map(|p| p.id())
    }

    pub fn contract(&self, id: ContractId) -> Option<&Contract> {
        self.pairs.get(id.pair().index()).map(|p| p.get(id.kind()))
    }

    /// Replaces a contract's requirement. If the pair would end up with
    /// `weak < strong`, the other contract is scaled by the same ratio.
    /// Returns `None` when the requirement is unchanged.
    pub fn modify_contract(
        &mut self,
        id: ContractId,
        new_ped: Time,
        now: Time,
    ) -> Result<Option<ContractChangeEvent>, ContractError> {
        if new_ped == Time::ZERO {
            return Err(ContractError::NonPositivePed);
        }
        let pair = self
            .pairs
            .get_mut(id.pair().index())
            .ok_or(ContractError::Unknown(id))?;
        let old_ped = pair.get(id.kind()).ped;
        if old_ped == new_ped {
            return Ok(None);
        }
        let other_kind = match id.kind() {
            ContractKind::Strong => ContractKind::Weak,
            ContractKind::Weak => ContractKind::Strong,
        };
        let other_old = pair.get(other_kind).ped;
        let violated = match id.kind() {
            ContractKind::Strong => new_ped > other_old,
            ContractKind::Weak => new_ped < other_old,
        };
        let adjusted = if violated {
            let mut scaled = other_old.mul_div_round(new_ped.as_nanos(), old_ped.as_nanos());
            // rounding must not reintroduce the violation
            scaled = match id.kind() {
                ContractKind::Strong => scaled.max(new_ped),
                ContractKind::Weak => scaled.min(new_ped).max(Time::from_nanos(1)),
            };
            pair.get_mut(other_kind).ped = scaled;
            Some((ContractId::of(id.pair(), other_kind), other_old, scaled))
        } else {
            None
        };
        pair.get_mut(id.kind()).ped = new_ped;
        Ok(Some(ContractChangeEvent {
            contract: id,
            old_ped,
            new_ped,
            adjusted,
            at: now,
        }))
    }

    /// Makes `to` the active contract of the pair. No-op if it already is.
    pub fn switch_active(&mut self, pair: PairId, to: ContractKind, now: Time) -> Option<ActivationChange> {
        let p = &mut self.pairs[pair.index()];
        if p.active_kind() == to {
            return None;
        }
        p.strong.active = to == ContractKind::Strong;
        p.weak.active = to == ContractKind::Weak;
        Some(ActivationChange { pair, to, at: now })
    }
}
