//! Shuffle phase: uplink XOR coding, chain coding at the access point, and
//! node-side decoding.
//!
//! For every group `S` of `param + 1` nodes, each member `k` XORs together
//! the sub-blocks destined for the other members — piece `k` of the IVs that
//! node `l` is missing from batch `S \ {l}`, for every `l` in `S \ {k}` —
//! and uploads the result as its part for `S`. Inside a group the access
//! point emits the XOR of each pair of consecutive parts in ascending node
//! order: `i+1` parts become `i` chain blocks, and it only ever buffers the
//! single previous part. A member recovers every other part by telescoping
//! the chain from its own part, then peels each wanted sub-block out of a
//! recovered part by XORing away the sub-blocks it computed locally.

use crate::bits::Bits;
use crate::combinatorics::enumerate_subsets;
use crate::error::{Error, Result};
use crate::scheme::{reduce_output, IvId, IvTable, SchemeInstance};
use crate::signal::{Signal, SignalLabel};
use std::collections::BTreeMap;

/// How the access point turns uplink parts into the broadcast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelayMode {
    /// Pairwise XOR of consecutive parts per group (`i` blocks per group).
    Chain,
    /// Verbatim forwarding of every part (download equals upload).
    Forward,
}

/// Everything the access point broadcasts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DownlinkBroadcast {
    pub mode: RelayMode,
    pub signals: Vec<Signal>,
}

impl DownlinkBroadcast {
    pub fn total_bits(&self) -> u64 {
        self.signals.iter().map(Signal::bit_len).sum()
    }
}

/// Chain-coded broadcast plus the observed peak of the per-group part
/// buffer (at most one by construction; asserted by the simulator).
#[derive(Debug, Clone)]
pub struct ChainOutcome {
    pub broadcast: DownlinkBroadcast,
    pub buffer_peak: usize,
}

/// Sub-block of the IVs node `target` needs from `batch`, owned by `owner`:
/// the concatenation over the batch files of bit slice `position(owner)` of
/// each IV. `Err` carries the first missing IV.
fn subblock(
    scheme: &SchemeInstance,
    table: &IvTable,
    batch: usize,
    target: u32,
    owner: u32,
) -> std::result::Result<Bits, IvId> {
    let piece = scheme
        .batch_set(batch)
        .position(owner)
        .expect("sub-block owner must belong to the batch set");
    let width = scheme.subblock_bits();
    let mut out = Bits::zeros(0);
    for file in scheme.files_in_batch(batch) {
        let id = IvId { target, file };
        let iv = table.get(&id).ok_or(id)?;
        out.push_bits(&iv.slice(piece * width, width));
    }
    Ok(out)
}

/// Computes each node's uplink parts, in colexicographic group order.
///
/// With `param == K` there are no groups and every list is empty.
pub fn encode_uplink(scheme: &SchemeInstance, tables: &[IvTable]) -> Result<Vec<Vec<Signal>>> {
    let k = scheme.job().node_count;
    let mut parts: Vec<Vec<Signal>> = vec![Vec::new(); k as usize];
    if scheme.param() == k {
        return Ok(parts);
    }
    let groups = enumerate_subsets(k, scheme.param() + 1)?;
    for group in &groups {
        for &sender in group.members() {
            let mut payload = Bits::zeros(scheme.part_bits());
            for &source in group.members() {
                if source == sender {
                    continue;
                }
                let batch = group.without(source).rank() as usize;
                let piece = subblock(scheme, &tables[sender as usize - 1], batch, source, sender)
                    .map_err(|iv| Error::UplinkSourceMissing {
                    group: group.clone(),
                    sender,
                    origin: source,
                    iv,
                })?;
                payload.xor_with(&piece);
            }
            parts[sender as usize - 1].push(Signal {
                label: SignalLabel::UplinkPart {
                    group: group.clone(),
                    sender,
                },
                payload,
            });
        }
    }
    Ok(parts)
}

/// One aggregate signal per node: its parts concatenated in group order.
pub fn aggregate_uplink(parts: &[Vec<Signal>]) -> Vec<Signal> {
    parts
        .iter()
        .enumerate()
        .map(|(ix, node_parts)| Signal {
            label: SignalLabel::UplinkAggregate {
                sender: ix as u32 + 1,
            },
            payload: Bits::concat(node_parts.iter().map(|s| &s.payload)),
        })
        .collect()
}

/// Streams the parts through the access point in (group, ascending sender)
/// order, emitting the pairwise XOR chain per group.
pub fn chain_encode(scheme: &SchemeInstance, parts: &[Vec<Signal>]) -> Result<ChainOutcome> {
    let k = scheme.job().node_count;
    let mut signals = Vec::new();
    let mut buffer_peak = 0usize;
    if scheme.param() < k {
        let groups = enumerate_subsets(k, scheme.param() + 1)?;
        let mut next_part = vec![0usize; k as usize];
        for group in groups {
            let mut buffered: Option<Bits> = None;
            let mut blocks = Bits::zeros(0);
            for &member in group.members() {
                let slot = &mut next_part[member as usize - 1];
                let part = parts[member as usize - 1].get(*slot).ok_or_else(|| {
                    Error::MissingUplinkPart {
                        group: group.clone(),
                        sender: member,
                    }
                })?;
                match &part.label {
                    SignalLabel::UplinkPart { group: g, sender }
                        if *g == group && *sender == member => {}
                    _ => {
                        return Err(Error::MissingUplinkPart {
                            group: group.clone(),
                            sender: member,
                        })
                    }
                }
                *slot += 1;
                match buffered.take() {
                    None => buffered = Some(part.payload.clone()),
                    Some(previous) => {
                        blocks.push_bits(&previous.xored(&part.payload));
                        buffered = Some(part.payload.clone());
                    }
                }
                buffer_peak = buffer_peak.max(1);
            }
            // The buffered last part is dropped: the AP is memoryless across
            // groups.
            signals.push(Signal {
                label: SignalLabel::DownlinkChain { group },
                payload: blocks,
            });
        }
    }
    Ok(ChainOutcome {
        broadcast: DownlinkBroadcast {
            mode: RelayMode::Chain,
            signals,
        },
        buffer_peak,
    })
}

/// Uncoded relay: the access point rebroadcasts every part verbatim, in
/// (group, ascending sender) order.
pub fn forward_encode(scheme: &SchemeInstance, parts: &[Vec<Signal>]) -> Result<DownlinkBroadcast> {
    let k = scheme.job().node_count;
    let mut signals = Vec::new();
    if scheme.param() < k {
        let groups = enumerate_subsets(k, scheme.param() + 1)?;
        let mut next_part = vec![0usize; k as usize];
        for group in groups {
            for &member in group.members() {
                let slot = &mut next_part[member as usize - 1];
                let part = parts[member as usize - 1].get(*slot).ok_or_else(|| {
                    Error::MissingUplinkPart {
                        group: group.clone(),
                        sender: member,
                    }
                })?;
                *slot += 1;
                signals.push(part.clone());
            }
        }
    }
    Ok(DownlinkBroadcast {
        mode: RelayMode::Forward,
        signals,
    })
}

/// Recovers node `node`'s full IV row from its local table and the
/// broadcast, then reduces it.
pub fn decode_and_reduce(
    scheme: &SchemeInstance,
    node: u32,
    table: &IvTable,
    broadcast: &DownlinkBroadcast,
) -> Result<(Vec<Bits>, Bits)> {
    let job = scheme.job();
    let param = scheme.param() as usize;
    let mut row: Vec<Option<Bits>> = vec![None; job.file_count as usize];

    for &file in scheme.placement(node) {
        let id = IvId { target: node, file };
        let iv = table.get(&id).ok_or(Error::MissingIv { node, iv: id })?;
        row[file as usize - 1] = Some(iv.clone());
    }

    if scheme.param() < job.node_count {
        let local = |batch: usize, target: u32, owner: u32| {
            subblock(scheme, table, batch, target, owner)
                .map_err(|iv| Error::MissingIv { node, iv })
        };
        for batch in 0..scheme.batch_count() {
            let batch_set = scheme.batch_set(batch).clone();
            if batch_set.contains(node) {
                continue;
            }
            let group = batch_set.with(node);
            let group_rank = group.rank() as usize;
            let width = scheme.subblock_bits();
            let part_bits = scheme.part_bits();

            // The part this node itself uploaded for the group.
            let mut own = Bits::zeros(part_bits);
            for &source in group.members() {
                if source == node {
                    continue;
                }
                own.xor_with(&local(group.without(source).rank() as usize, source, node)?);
            }

            // Parts of the other group members.
            let mut member_parts: BTreeMap<u32, Bits> = BTreeMap::new();
            match broadcast.mode {
                RelayMode::Chain => {
                    let signal = broadcast
                        .signals
                        .get(group_rank)
                        .filter(|s| {
                            matches!(&s.label, SignalLabel::DownlinkChain { group: g } if *g == group)
                        })
                        .ok_or(Error::MissingDownlink { group: group.clone() })?;
                    if signal.payload.len() != param * part_bits {
                        return Err(Error::MalformedSignal(format!(
                            "chain signal for group {group} has {} bits, expected {}",
                            signal.payload.len(),
                            param * part_bits
                        )));
                    }
                    let block = |m: usize| signal.payload.slice(m * part_bits, part_bits);
                    let members = group.members();
                    let pos = group.position(node).expect("node belongs to its group");
                    // Telescope leftwards then rightwards from our own part:
                    // block m is part(members[m]) ^ part(members[m+1]).
                    let mut acc = own.clone();
                    for m in (0..pos).rev() {
                        acc.xor_with(&block(m));
                        member_parts.insert(members[m], acc.clone());
                    }
                    acc = own.clone();
                    for m in pos..param {
                        acc.xor_with(&block(m));
                        member_parts.insert(members[m + 1], acc.clone());
                    }
                }
                RelayMode::Forward => {
                    for (pos, &member) in group.members().iter().enumerate() {
                        if member == node {
                            continue;
                        }
                        let index = group_rank * (param + 1) + pos;
                        let signal = broadcast
                            .signals
                            .get(index)
                            .filter(|s| {
                                matches!(&s.label, SignalLabel::UplinkPart { group: g, sender }
                                    if *g == group && *sender == member)
                            })
                            .ok_or(Error::MissingDownlink {
                                group: group.clone(),
                            })?;
                        member_parts.insert(member, signal.payload.clone());
                    }
                }
            }

            // Peel this node's sub-block out of every recovered part.
            let mut pieces: Vec<Option<Bits>> = vec![None; param];
            for &owner in batch_set.members() {
                let mut piece =
                    member_parts
                        .get(&owner)
                        .cloned()
                        .ok_or(Error::UnrecoverableSubBlock {
                            batch: batch_set.clone(),
                            owner,
                        })?;
                for &source in batch_set.members() {
                    if source == owner {
                        continue;
                    }
                    piece.xor_with(&local(
                        group.without(source).rank() as usize,
                        source,
                        owner,
                    )?);
                }
                let slot = batch_set.position(owner).expect("owner in batch");
                pieces[slot] = Some(piece);
            }

            // Reassemble the batch's IVs slice by slice.
            for (index, file) in scheme.files_in_batch(batch).enumerate() {
                let mut iv = Bits::zeros(0);
                for piece in &pieces {
                    let piece = piece.as_ref().ok_or(Error::UnrecoverableSubBlock {
                        batch: batch_set.clone(),
                        owner: node,
                    })?;
                    iv.push_bits(&piece.slice(index * width, width));
                }
                row[file as usize - 1] = Some(iv);
            }
        }
    }

    let row: Vec<Bits> = row
        .into_iter()
        .enumerate()
        .map(|(ix, iv)| {
            iv.ok_or_else(|| Error::UnrecoverableSubBlock {
                batch: scheme
                    .batch_set(scheme.batch_of_file(ix as u32 + 1))
                    .clone(),
                owner: node,
            })
        })
        .collect::<Result<_>>()?;
    let output = reduce_output(&row);
    Ok((row, output))
}
