//! Job descriptions, file batching, placement, and the map phase.
//!
//! A job is a cluster of `node_count` nodes that each reduce one output over
//! all `file_count` files. For scheme parameter `i`, the files are split into
//! `choose(K, i)` equal batches, one per size-`i` node subset; every node in
//! the subset stores the batch. During the map phase a node computes exactly
//! the IVs it later consumes or encodes: the IVs of its own output over its
//! stored files, plus the IVs requested by nodes that do not hold the batch.
//! Nothing else is materialized.
//!
//! Node and file ids are 1-based in every public signature; vector indexing
//! inside the crate subtracts one at the call site. A built
//! [`SchemeInstance`] and a [`FileStore`] are immutable and freely
//! shareable across threads; per-node map work only reads them.
//!
//! The map and reduce functions are fixed: an IV is the leading `iv_bits` of
//! a keyed pseudorandom stream seeded by `(seed, target, file, file
//! contents)`, and an output is the XOR fold of its full IV row. IVs thereby
//! depend on file contents, so decoding mistakes cannot cancel out, while
//! every run stays reproducible from the job seed.

use crate::bits::Bits;
use crate::combinatorics::{choose, enumerate_subsets, NodeSet};
use crate::error::{Error, Result};
use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};

/// The problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobSpec {
    /// Number of computing nodes, `K >= 2`.
    pub node_count: u32,
    /// Number of files, `N >= 1`.
    pub file_count: u32,
    /// Bits per file, `W >= 1`.
    pub file_bits: u32,
    /// Bits per intermediate value, `V >= 1`.
    pub iv_bits: u32,
    /// Reproducibility seed for file contents and map functions.
    pub seed: u64,
}

impl JobSpec {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::InvalidJob(format!(
                "need at least 2 nodes, got {}",
                self.node_count
            )));
        }
        if self.file_count == 0 {
            return Err(Error::InvalidJob("need at least one file".into()));
        }
        if self.file_bits == 0 {
            return Err(Error::InvalidJob(
                "file width must be at least one bit".into(),
            ));
        }
        if self.iv_bits == 0 {
            return Err(Error::InvalidJob(
                "IV width must be at least one bit".into(),
            ));
        }
        Ok(())
    }

    /// `N * K * V`, the normalizer for communication loads.
    pub fn total_iv_bits(&self) -> u64 {
        u64::from(self.file_count) * u64::from(self.node_count) * u64::from(self.iv_bits)
    }
}

/// The `N` input files, each exactly `file_bits` wide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileStore {
    file_bits: u32,
    files: Vec<Bits>,
}

impl FileStore {
    pub fn new(files: Vec<Bits>, file_bits: u32) -> Result<Self> {
        if let Some(bad) = files.iter().position(|f| f.len() != file_bits as usize) {
            return Err(Error::DimensionMismatch(format!(
                "file {} has {} bits, expected {}",
                bad + 1,
                files[bad].len(),
                file_bits
            )));
        }
        Ok(Self { file_bits, files })
    }

    /// Deterministic pseudorandom contents derived from the job seed.
    pub fn generate(job: &JobSpec) -> Self {
        let files = (1..=job.file_count)
            .map(|n| derive_bits("file", job.seed, &[n], &[], job.file_bits as usize))
            .collect();
        Self {
            file_bits: job.file_bits,
            files,
        }
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn file_bits(&self) -> u32 {
        self.file_bits
    }

    /// File contents by 1-based id. Panics on an out-of-range id.
    pub fn file(&self, id: u32) -> &Bits {
        &self.files[id as usize - 1]
    }

    pub fn matches(&self, job: &JobSpec) -> Result<()> {
        if self.files.len() != job.file_count as usize || self.file_bits != job.file_bits {
            return Err(Error::DimensionMismatch(format!(
                "store has {} files of {} bits, job wants {} of {}",
                self.files.len(),
                self.file_bits,
                job.file_count,
                job.file_bits
            )));
        }
        Ok(())
    }
}

/// Identifier of the IV `v[target, file]`: the value node `target` needs
/// from file `file`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IvId {
    /// Node whose output function consumes this IV (1-based).
    pub target: u32,
    /// Source file id (1-based).
    pub file: u32,
}

impl std::fmt::Display for IvId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "v[{},{}]", self.target, self.file)
    }
}

/// IVs materialized at one node, keyed for deterministic iteration.
pub type IvTable = BTreeMap<IvId, Bits>;

fn derive_bits(tag: &str, seed: u64, indices: &[u32], payload: &[u8], bit_len: usize) -> Bits {
    let mut hasher = Sha256::new();
    hasher.update(tag.as_bytes());
    hasher.update(seed.to_le_bytes());
    for ix in indices {
        hasher.update(ix.to_le_bytes());
    }
    hasher.update((payload.len() as u64).to_le_bytes());
    hasher.update(payload);
    let mut rng = ChaCha20Rng::from_seed(hasher.finalize().into());
    Bits::random(&mut rng, bit_len)
}

/// The concrete map function: `iv_bits` pseudorandom bits keyed by the job
/// seed, the `(target, file)` pair, and the file contents.
pub fn map_iv(job: &JobSpec, target: u32, file: u32, contents: &Bits) -> Bits {
    derive_bits(
        "iv",
        job.seed,
        &[target, file],
        &contents.to_bytes(),
        job.iv_bits as usize,
    )
}

/// The concrete reduce function: XOR fold of the full IV row.
pub fn reduce_output(row: &[Bits]) -> Bits {
    let mut out = Bits::zeros(row.first().map_or(0, Bits::len));
    for iv in row {
        out.xor_with(iv);
    }
    out
}

/// Centralized reference computation of all `N * K` IVs, `rows[k-1][n-1]`.
///
/// This is the ground truth every node's decoded row is compared against; it
/// never touches placement, signals, or decoding.
pub fn oracle_rows(job: &JobSpec, store: &FileStore) -> Vec<Vec<Bits>> {
    (1..=job.node_count)
        .map(|k| {
            (1..=job.file_count)
                .map(|n| map_iv(job, k, n, store.file(n)))
                .collect()
        })
        .collect()
}

pub fn oracle_outputs(rows: &[Vec<Bits>]) -> Vec<Bits> {
    rows.iter().map(|row| reduce_output(row)).collect()
}

/// Materialized scheme for one parameter value: batches, placement, and the
/// per-node compute sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeInstance {
    job: JobSpec,
    param: u32,
    batch_sets: Vec<NodeSet>,
    batch_size: u32,
    placement: Vec<Vec<u32>>,
    own_ivs: Vec<BTreeSet<IvId>>,
    aux_ivs: Vec<BTreeSet<IvId>>,
}

/// Smallest file count usable with parameter `param`: one file per batch.
pub fn minimal_files(node_count: u32, param: u32) -> u64 {
    choose(u64::from(node_count), u64::from(param))
}

/// Smallest IV width usable with parameter `param`.
pub fn minimal_iv_bits(node_count: u32, param: u32) -> u32 {
    if param < node_count {
        param
    } else {
        1
    }
}

/// Every violated precondition of [`build_scheme`], in a fixed order, each
/// carrying the minimal fix.
pub fn check_build(job: &JobSpec, param: u32) -> Vec<Error> {
    let mut errors = Vec::new();
    if let Err(e) = job.validate() {
        errors.push(e);
        return errors;
    }
    if param == 0 || param > job.node_count {
        errors.push(Error::InvalidParameter(format!(
            "scheme parameter must lie in [1..{}], got {param}",
            job.node_count
        )));
        return errors;
    }
    let batch_count = choose(u64::from(job.node_count), u64::from(param));
    if u64::from(job.file_count) % batch_count != 0 {
        let suggested = batch_count * u64::from(job.file_count).div_ceil(batch_count);
        errors.push(Error::FileCountNotDivisible {
            node_count: job.node_count,
            param,
            batch_count,
            file_count: job.file_count,
            suggested,
        });
    }
    // For param == K there are no multicast groups and no sub-blocks, so the
    // IV width is unconstrained.
    if param < job.node_count && !job.iv_bits.is_multiple_of(param) {
        errors.push(Error::IvBitsNotDivisible {
            param,
            iv_bits: job.iv_bits,
            suggested: param * job.iv_bits.div_ceil(param),
        });
    }
    errors
}

/// Builds the placement and compute sets for parameter `param`.
///
/// Deterministic in `(job, param)`: batch `t` (colex rank of its node
/// subset) holds files `t*eta + 1 ..= (t+1)*eta`.
pub fn build_scheme(job: &JobSpec, param: u32) -> Result<SchemeInstance> {
    if let Some(first) = check_build(job, param).into_iter().next() {
        return Err(first);
    }
    let k = job.node_count;
    let batch_sets = enumerate_subsets(k, param)?;
    let batch_size = (u64::from(job.file_count) / batch_sets.len() as u64) as u32;

    let mut placement = vec![Vec::new(); k as usize];
    let mut own_ivs = vec![BTreeSet::new(); k as usize];
    let mut aux_ivs = vec![BTreeSet::new(); k as usize];
    for (t, set) in batch_sets.iter().enumerate() {
        let first = t as u32 * batch_size + 1;
        let absent: Vec<u32> = (1..=k).filter(|q| !set.contains(*q)).collect();
        for &member in set.members() {
            let me = member as usize - 1;
            for file in first..first + batch_size {
                placement[me].push(file);
                own_ivs[me].insert(IvId {
                    target: member,
                    file,
                });
                for &q in &absent {
                    aux_ivs[me].insert(IvId { target: q, file });
                }
            }
        }
    }
    for files in &mut placement {
        files.sort_unstable();
    }
    Ok(SchemeInstance {
        job: *job,
        param,
        batch_sets,
        batch_size,
        placement,
        own_ivs,
        aux_ivs,
    })
}

impl SchemeInstance {
    pub fn job(&self) -> &JobSpec {
        &self.job
    }

    pub fn param(&self) -> u32 {
        self.param
    }

    /// Files per batch (`eta`).
    pub fn batch_size(&self) -> u32 {
        self.batch_size
    }

    pub fn batch_count(&self) -> usize {
        self.batch_sets.len()
    }

    /// The node subset storing batch `batch` (the batch's colex rank).
    pub fn batch_set(&self, batch: usize) -> &NodeSet {
        &self.batch_sets[batch]
    }

    /// Global 1-based ids of the files in batch `batch`, ascending.
    pub fn files_in_batch(&self, batch: usize) -> impl Iterator<Item = u32> {
        let first = batch as u32 * self.batch_size + 1;
        first..first + self.batch_size
    }

    pub fn batch_of_file(&self, file: u32) -> usize {
        ((file - 1) / self.batch_size) as usize
    }

    /// Sorted 1-based file ids stored at `node`.
    pub fn placement(&self, node: u32) -> &[u32] {
        &self.placement[node as usize - 1]
    }

    /// IVs of `node`'s own output computed locally.
    pub fn own_ivs(&self, node: u32) -> &BTreeSet<IvId> {
        &self.own_ivs[node as usize - 1]
    }

    /// IVs `node` computes on behalf of nodes missing the batch.
    pub fn aux_ivs(&self, node: u32) -> &BTreeSet<IvId> {
        &self.aux_ivs[node as usize - 1]
    }

    pub fn compute_set(&self, node: u32) -> BTreeSet<IvId> {
        self.own_ivs(node)
            .union(self.aux_ivs(node))
            .copied()
            .collect()
    }

    /// Width of one IV sub-block (`V / i`); the whole IV when `param == K`.
    pub fn subblock_bits(&self) -> usize {
        if self.param < self.job.node_count {
            (self.job.iv_bits / self.param) as usize
        } else {
            self.job.iv_bits as usize
        }
    }

    /// Node responsible for piece `piece` of every IV derived from `batch`.
    pub fn subblock_owner(&self, batch: usize, piece: usize) -> u32 {
        self.batch_sets[batch].members()[piece]
    }

    /// Number of multicast groups (size `param + 1` subsets); zero when
    /// `param == K`.
    pub fn group_count(&self) -> u64 {
        choose(u64::from(self.job.node_count), u64::from(self.param) + 1)
    }

    /// Bits in one uplink part: `eta * V / i`.
    pub fn part_bits(&self) -> usize {
        self.batch_size as usize * self.subblock_bits()
    }
}

/// Runs the map phase: node `k` materializes exactly `own + aux` IVs.
pub fn run_map(scheme: &SchemeInstance, store: &FileStore) -> Result<Vec<IvTable>> {
    store.matches(scheme.job())?;
    let job = scheme.job();
    (1..=job.node_count)
        .map(|k| {
            let mut table = IvTable::new();
            for &iv in scheme.own_ivs(k).iter().chain(scheme.aux_ivs(k)) {
                table.insert(iv, map_iv(job, iv.target, iv.file, store.file(iv.file)));
            }
            Ok(table)
        })
        .collect()
}
