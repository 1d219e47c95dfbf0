//! File-group mixtures of base schemes.
//!
//! A mixture with weights `(w1, w2, w3)` splits the files into three groups
//! of sizes `w1*N`, `w2*N`, `w3*N` and runs the schemes for parameters
//! `i-1`, `i`, and `K` on them independently. Loads are linear in the file
//! count, so the combined report is exactly the weighted sum of the three
//! corner quadruples.

use crate::error::{Error, Result};
use crate::scheme::{minimal_files, JobSpec};
use crate::Rat;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Nonnegative rational weights summing to one, attached to the scheme
/// parameters `(i-1, i, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixtureWeights {
    weights: [Rat; 3],
}

impl MixtureWeights {
    pub fn new(w1: Rat, w2: Rat, w3: Rat) -> Result<Self> {
        let weights = [w1, w2, w3];
        if weights.iter().any(Rat::is_negative) {
            return Err(Error::InvalidMixture(format!(
                "weights must be nonnegative, got ({w1}, {w2}, {w3})"
            )));
        }
        if w1 + w2 + w3 != Rat::from_integer(1) {
            return Err(Error::InvalidMixture(format!(
                "weights must sum to 1, got ({w1}, {w2}, {w3}) = {}",
                w1 + w2 + w3
            )));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> [Rat; 3] {
        self.weights
    }
}

/// One active group of a mixture plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixtureGroup {
    /// Scheme parameter this group runs under.
    pub param: u32,
    /// Sub-job covering only this group's files.
    pub job: JobSpec,
    pub weight: Rat,
    /// Global id of the group's first file minus one.
    pub file_offset: u32,
    pub file_count: u32,
}

/// Validated decomposition of a job into independently runnable groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixturePlan {
    pub base_param: u32,
    pub groups: Vec<MixtureGroup>,
}

/// Scheme parameters addressed by a mixture at base parameter `i`.
pub fn mixture_params(node_count: u32, base_param: u32) -> [u32; 3] {
    [base_param - 1, base_param, node_count]
}

/// Smallest file count for which every active group is integral and
/// divisible by its batch count.
pub fn minimal_mixture_files(node_count: u32, base_param: u32, weights: &MixtureWeights) -> u64 {
    let params = mixture_params(node_count, base_param);
    let mut need = 1u64;
    for (param, weight) in params.into_iter().zip(weights.weights()) {
        if weight.is_zero() {
            continue;
        }
        let batches = minimal_files(node_count, param);
        let numer = weight.numer().unsigned_abs();
        let denom = *weight.denom() as u64;
        // N must be a multiple of denom, and (N/denom)*numer a multiple of
        // the batch count.
        let per_group = denom * (batches / batches.gcd(&numer));
        need = need.lcm(&per_group);
    }
    need
}

/// Every violated precondition of [`plan_mixture`], each carrying its
/// minimal fix.
pub fn check_mixture(job: &JobSpec, base_param: u32, weights: &MixtureWeights) -> Vec<Error> {
    let mut errors = Vec::new();
    if let Err(e) = job.validate() {
        errors.push(e);
        return errors;
    }
    if base_param < 2 || base_param > job.node_count - 1 {
        errors.push(Error::InvalidMixture(format!(
            "base parameter must lie in [2..{}], got {base_param}",
            job.node_count - 1
        )));
        return errors;
    }
    let suggested = minimal_mixture_files(job.node_count, base_param, weights);
    let n = Rat::from_integer(i64::from(job.file_count));
    for (param, weight) in mixture_params(job.node_count, base_param)
        .into_iter()
        .zip(weights.weights())
    {
        if weight.is_zero() {
            continue;
        }
        let share = weight * n;
        if !share.is_integer() {
            errors.push(Error::MixtureInfeasible {
                reason: format!(
                    "weight {weight} of {} files is not an integral group size",
                    job.file_count
                ),
                suggested,
            });
        } else {
            let group_files = *share.numer() as u64;
            let batches = minimal_files(job.node_count, param);
            if !group_files.is_multiple_of(batches) {
                errors.push(Error::MixtureInfeasible {
                    reason: format!(
                        "group for parameter {param} holds {group_files} files, not a \
                         multiple of its {batches} batches"
                    ),
                    suggested,
                });
            }
        }
        if param < job.node_count && !job.iv_bits.is_multiple_of(param) {
            errors.push(Error::IvBitsNotDivisible {
                param,
                iv_bits: job.iv_bits,
                suggested: param * job.iv_bits.div_ceil(param),
            });
        }
    }
    errors
}

/// Validates a mixture and lays the groups out over contiguous file ranges.
///
/// Groups with zero weight are dropped and impose no constraints. Each
/// active group's parameter must divide the IV width unless it equals the
/// node count (full replication sends nothing).
pub fn plan_mixture(
    job: &JobSpec,
    base_param: u32,
    weights: &MixtureWeights,
) -> Result<MixturePlan> {
    if let Some(first) = check_mixture(job, base_param, weights).into_iter().next() {
        return Err(first);
    }
    let params = mixture_params(job.node_count, base_param);
    let n = Rat::from_integer(i64::from(job.file_count));

    let mut groups = Vec::new();
    let mut offset = 0u32;
    for (index, (param, weight)) in params.into_iter().zip(weights.weights()).enumerate() {
        if weight.is_zero() {
            continue;
        }
        let group_files = *(weight * n).numer() as u32;
        groups.push(MixtureGroup {
            param,
            job: JobSpec {
                file_count: group_files,
                // Decorrelate pseudorandom contents across groups.
                seed: job
                    .seed
                    .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64 + 1)),
                ..*job
            },
            weight,
            file_offset: offset,
            file_count: group_files,
        });
        offset += group_files;
    }
    debug_assert_eq!(offset, job.file_count);
    Ok(MixturePlan { base_param, groups })
}
