//! Crate-wide error type.

use crate::combinatorics::NodeSet;
use crate::scheme::IvId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("subset size {size} out of range for {node_count} nodes")]
    SubsetSizeOutOfRange { size: u32, node_count: u32 },

    #[error("node {node} out of range [1..{node_count}]")]
    NodeOutOfRange { node: u32, node_count: u32 },

    #[error("node set members must be strictly increasing")]
    UnsortedNodeSet,

    #[error("subset rank {rank} out of range for {count} subsets")]
    RankOutOfRange { rank: u64, count: u64 },

    #[error("invalid job: {0}")]
    InvalidJob(String),

    #[error(
        "{batch_count} batches (choose({node_count},{param})) must divide the file count \
         {file_count}; smallest feasible file count is {suggested}"
    )]
    FileCountNotDivisible {
        node_count: u32,
        param: u32,
        batch_count: u64,
        file_count: u32,
        suggested: u64,
    },

    #[error(
        "scheme parameter {param} must divide the IV width {iv_bits}; smallest feasible IV \
         width is {suggested}"
    )]
    IvBitsNotDivisible {
        param: u32,
        iv_bits: u32,
        suggested: u32,
    },

    #[error("file store does not match the job: {0}")]
    DimensionMismatch(String),

    #[error("node {sender} cannot form the part for group {group}: IV {iv} (for member {origin}) was not computed")]
    UplinkSourceMissing {
        group: NodeSet,
        sender: u32,
        origin: u32,
        iv: IvId,
    },

    #[error("missing uplink part for group {group} from node {sender}")]
    MissingUplinkPart { group: NodeSet, sender: u32 },

    #[error("missing downlink signal for group {group}")]
    MissingDownlink { group: NodeSet },

    #[error("malformed signal: {0}")]
    MalformedSignal(String),

    #[error("node {node} is missing IV {iv} required for decoding")]
    MissingIv { node: u32, iv: IvId },

    #[error("unrecoverable sub-block for batch {batch}, requested by node {owner}")]
    UnrecoverableSubBlock { batch: NodeSet, owner: u32 },

    #[error("invalid mixture weights: {0}")]
    InvalidMixture(String),

    #[error("mixture infeasible: {reason}; smallest feasible file count is {suggested}")]
    MixtureInfeasible { reason: String, suggested: u64 },

    #[error("point (r={r}, c={c}) lies outside the regime 1 <= c <= r <= {node_count}")]
    OutOfRegime {
        r: String,
        c: String,
        node_count: u32,
    },

    #[error("infeasible quadruple: {0}")]
    InfeasiblePoint(String),

    #[error("IV {iv} is computed nowhere; every IV must be computed at least once")]
    IvComputedNowhere { iv: IvId },

    #[error("{0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
