//! Labeled signals and their wire format.
//!
//! Wire layout, little-endian, stable within a major release:
//!
//! ```text
//! offset 0   u8   label tag: 0 uplink part, 1 uplink aggregate, 2 downlink chain
//! offset 1   u64  multicast group as colex subset rank (0 for aggregates)
//! offset 9   u32  sender node id, 1-based (0 for downlink signals)
//! offset 13  u64  payload length in bits
//! offset 21  ...  payload, byte-packed MSB-first, final byte zero-padded
//! ```
//!
//! Group subsets are serialized by rank; decoding therefore needs the node
//! count and the group size, which are fixed per execution.

use crate::bits::Bits;
use crate::combinatorics::{subset_unrank, NodeSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignalLabel {
    /// One node's XOR part for one multicast group.
    UplinkPart { group: NodeSet, sender: u32 },
    /// A node's full uplink: its parts concatenated in group-rank order.
    UplinkAggregate { sender: u32 },
    /// The chain-coded broadcast blocks for one multicast group.
    DownlinkChain { group: NodeSet },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signal {
    pub label: SignalLabel,
    pub payload: Bits,
}

const HEADER_BYTES: usize = 21;

impl Signal {
    pub fn bit_len(&self) -> u64 {
        self.payload.len() as u64
    }

    pub fn to_wire(&self) -> Vec<u8> {
        let (tag, rank, sender) = match &self.label {
            SignalLabel::UplinkPart { group, sender } => (0u8, group.rank(), *sender),
            SignalLabel::UplinkAggregate { sender } => (1, 0, *sender),
            SignalLabel::DownlinkChain { group } => (2, group.rank(), 0),
        };
        let mut out = Vec::with_capacity(HEADER_BYTES + self.payload.len().div_ceil(8));
        out.push(tag);
        out.extend_from_slice(&rank.to_le_bytes());
        out.extend_from_slice(&sender.to_le_bytes());
        out.extend_from_slice(&(self.payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.payload.to_bytes());
        out
    }

    /// Parses one signal from the front of `bytes`; returns it along with
    /// the number of bytes consumed.
    pub fn from_wire(bytes: &[u8], node_count: u32, group_size: u32) -> Result<(Signal, usize)> {
        if bytes.len() < HEADER_BYTES {
            return Err(Error::MalformedSignal(format!(
                "{} bytes is shorter than the {HEADER_BYTES}-byte header",
                bytes.len()
            )));
        }
        let tag = bytes[0];
        let rank = u64::from_le_bytes(bytes[1..9].try_into().expect("8 bytes"));
        let sender = u32::from_le_bytes(bytes[9..13].try_into().expect("4 bytes"));
        let bit_len = u64::from_le_bytes(bytes[13..21].try_into().expect("8 bytes")) as usize;
        let payload_bytes = bit_len.div_ceil(8);
        let total = HEADER_BYTES + payload_bytes;
        if bytes.len() < total {
            return Err(Error::MalformedSignal(format!(
                "payload of {bit_len} bits needs {payload_bytes} bytes, only {} present",
                bytes.len() - HEADER_BYTES
            )));
        }
        let payload = Bits::from_bytes(&bytes[HEADER_BYTES..total], bit_len);
        let label = match tag {
            0 => SignalLabel::UplinkPart {
                group: subset_unrank(node_count, group_size, rank)?,
                sender,
            },
            1 => SignalLabel::UplinkAggregate { sender },
            2 => SignalLabel::DownlinkChain {
                group: subset_unrank(node_count, group_size, rank)?,
            },
            other => {
                return Err(Error::MalformedSignal(format!("unknown label tag {other}")));
            }
        };
        Ok((Signal { label, payload }, total))
    }
}
