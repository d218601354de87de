use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::time::Time;
use super::topology::HostId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowId(pub u32);

impl FlowId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A constant-rate stream of equal-size packets between two hosts.
///
/// Packet `i` leaves the source at `start_time + i * inter_packet_gap` plus a
/// uniform jitter in `[0, send_jitter)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub id: FlowId,
    pub src_host: HostId,
    pub dst_host: HostId,
    /// Bits per packet.
    pub packet_length: u64,
    /// Bits the flow sends in total (it also stops at the end of the run).
    pub total_volume: u64,
    pub start_time: Time,
    pub inter_packet_gap: Time,
    pub send_jitter: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("flow {0:?}: packet length must be positive")]
    EmptyPacket(FlowId),
    #[error("flow {0:?}: total volume is smaller than one packet")]
    VolumeBelowPacket(FlowId),
    #[error("flow {0:?}: source and destination host are the same")]
    Loop(FlowId),
    #[error("flow {0:?}: inter-packet gap must be positive")]
    ZeroGap(FlowId),
    #[error("flow {0:?}: send jitter must be smaller than the inter-packet gap")]
    JitterTooLarge(FlowId),
}

impl Flow {
    pub fn validate(&self) -> Result<(), FlowError> {
        if self.packet_length == 0 {
            return Err(FlowError::EmptyPacket(self.id));
        }
        if self.total_volume < self.packet_length {
            return Err(FlowError::VolumeBelowPacket(self.id));
        }
        if self.src_host == self.dst_host {
            return Err(FlowError::Loop(self.id));
        }
        if self.inter_packet_gap == Time::ZERO {
            return Err(FlowError::ZeroGap(self.id));
        }
        if self.send_jitter > self.inter_packet_gap {
            return Err(FlowError::JitterTooLarge(self.id));
        }
        Ok(())
    }

    /// Number of packets needed to carry `total_volume`.
    pub fn packet_count(&self) -> u64 {
        self.total_volume.div_ceil(self.packet_length)
    }
}
