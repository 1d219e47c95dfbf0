//! Subsets of the node set `[1..K]`, enumerated and ranked.
//!
//! File batches and multicast groups are indexed by the size-`i` subsets of
//! the node set. The canonical enumeration order is colexicographic: it is
//! deterministic (it defines the batch numbering), and a subset's rank is
//! computable in O(i) binomial evaluations without tables. Node ids are
//! 1-based in every public signature, matching the usual presentation of the
//! scheme; the 0-based form appears only inside this module.

use crate::error::{Error, Result};
use num_integer::binomial;

/// `n choose k`, zero when `k > n`.
pub fn choose(n: u64, k: u64) -> u64 {
    if k > n {
        0
    } else {
        binomial(n, k)
    }
}

/// A set of node ids, strictly increasing, each in `[1..K]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeSet {
    members: Vec<u32>,
}

impl NodeSet {
    pub fn new(members: Vec<u32>, node_count: u32) -> Result<Self> {
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedNodeSet);
        }
        if let (Some(&first), Some(&last)) = (members.first(), members.last()) {
            if first == 0 {
                return Err(Error::NodeOutOfRange {
                    node: 0,
                    node_count,
                });
            }
            if last > node_count {
                return Err(Error::NodeOutOfRange {
                    node: last,
                    node_count,
                });
            }
        }
        Ok(Self { members })
    }

    /// Caller guarantees strictly increasing, 1-based members.
    pub(crate) fn from_sorted(members: Vec<u32>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(members.first().is_none_or(|&m| m >= 1));
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, node: u32) -> bool {
        self.members.binary_search(&node).is_ok()
    }

    /// 0-based position of `node` within the sorted members.
    pub fn position(&self, node: u32) -> Option<usize> {
        self.members.binary_search(&node).ok()
    }

    pub fn without(&self, node: u32) -> NodeSet {
        Self::from_sorted(
            self.members
                .iter()
                .copied()
                .filter(|&m| m != node)
                .collect(),
        )
    }

    pub fn with(&self, node: u32) -> NodeSet {
        let mut members = self.members.clone();
        if let Err(pos) = members.binary_search(&node) {
            members.insert(pos, node);
        }
        Self::from_sorted(members)
    }

    /// Colexicographic rank among all subsets of the same size:
    /// `sum over positions j (0-based) of choose(member - 1, j + 1)`.
    pub fn rank(&self) -> u64 {
        self.members
            .iter()
            .enumerate()
            .map(|(j, &m)| choose(u64::from(m) - 1, j as u64 + 1))
            .sum()
    }
}

impl std::fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self}")
    }
}

impl std::fmt::Display for NodeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (j, m) in self.members.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// All size-`size` subsets of `[1..node_count]` in colexicographic order.
///
/// The index of a subset in the returned sequence equals its
/// [`NodeSet::rank`]; this is the canonical batch and group numbering.
pub fn enumerate_subsets(node_count: u32, size: u32) -> Result<Vec<NodeSet>> {
    if size == 0 || size > node_count {
        return Err(Error::SubsetSizeOutOfRange { size, node_count });
    }
    let size = size as usize;
    let n = node_count;
    // Work 0-based; `current` stays strictly increasing.
    let mut current: Vec<u32> = (0..size as u32).collect();
    let mut out = Vec::with_capacity(choose(u64::from(n), size as u64) as usize);
    loop {
        out.push(NodeSet::from_sorted(
            current.iter().map(|&m| m + 1).collect(),
        ));
        // Colex successor: bump the lowest member that has headroom, reset
        // everything below it to the smallest prefix.
        let mut j = 0;
        loop {
            if j == size {
                return Ok(out);
            }
            let limit = if j + 1 < size { current[j + 1] } else { n };
            if current[j] + 1 < limit {
                current[j] += 1;
                for (t, slot) in current.iter_mut().enumerate().take(j) {
                    *slot = t as u32;
                }
                break;
            }
            j += 1;
        }
    }
}

/// Rank of `set` in the colexicographic enumeration for `node_count` nodes.
pub fn subset_rank(set: &NodeSet, node_count: u32) -> Result<u64> {
    if set.is_empty() {
        return Err(Error::SubsetSizeOutOfRange {
            size: 0,
            node_count,
        });
    }
    let last = *set.members().last().expect("nonempty");
    if last > node_count {
        return Err(Error::NodeOutOfRange {
            node: last,
            node_count,
        });
    }
    Ok(set.rank())
}

/// Inverse of [`subset_rank`] for subsets of the given size.
pub fn subset_unrank(node_count: u32, size: u32, rank: u64) -> Result<NodeSet> {
    if size == 0 || size > node_count {
        return Err(Error::SubsetSizeOutOfRange { size, node_count });
    }
    let count = choose(u64::from(node_count), u64::from(size));
    if rank >= count {
        return Err(Error::RankOutOfRange { rank, count });
    }
    let mut remaining = rank;
    let mut members = vec![0u32; size as usize];
    let mut ceiling = node_count; // exclusive bound on the 0-based member
    for j in (0..size as usize).rev() {
        // Largest value v with choose(v, j+1) <= remaining.
        let mut v = j as u32;
        for cand in (j as u32..ceiling).rev() {
            if choose(u64::from(cand), j as u64 + 1) <= remaining {
                v = cand;
                break;
            }
        }
        remaining -= choose(u64::from(v), j as u64 + 1);
        members[j] = v + 1;
        ceiling = v;
    }
    Ok(NodeSet::from_sorted(members))
}
