//! Exclusivity statistics and communication lower bounds.
//!
//! From an execution trace this module counts, for every IV, which nodes
//! computed it: an IV computed at its requesting node is "self-computed",
//! otherwise it is charged to the exact set of other nodes holding it. The
//! per-multiplicity totals feed two kinds of checks:
//!
//! - linear constraints tying the statistics to the storage and computation
//!   loads (missing IVs must be covered; duplication is bounded by the
//!   computation budget), attained with equality by the scheme;
//! - a floor on the broadcast length — an IV held by `j` other nodes costs
//!   at least `V/(j+1)` downlink bits — which the chain-coded broadcast
//!   meets exactly and the forwarding variant exceeds.
//!
//! The support-plane evaluators reproduce the planar lower bounds under the
//! corner-span triangles of both surfaces; combined with the per-storage
//! envelope curves they certify the surfaces from below.

use crate::combinatorics::NodeSet;
use crate::error::{Error, Result};
use crate::geometry::{envelope_curves, Space};
use crate::scalar::{int, ratio, Scalar};
use crate::scheme::IvId;
use crate::sim::{LoadReport, ShuffleTrace};
use crate::Rat;
use std::collections::BTreeMap;

/// Who computed what, aggregated by multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusivityStats {
    node_count: u32,
    file_count: u32,
    /// `holder_counts[j-1]`: IVs not computed at their requesting node and
    /// exclusively computed by exactly `j` other nodes.
    holder_counts: Vec<u64>,
    /// Per requesting node: IVs it computed itself.
    self_computed: Vec<u64>,
    /// Exact holder set per (requesting node, holder set) pair.
    per_pair: BTreeMap<(u32, NodeSet), u64>,
}

impl ExclusivityStats {
    pub fn node_count(&self) -> u32 {
        self.node_count
    }

    pub fn file_count(&self) -> u32 {
        self.file_count
    }

    /// IVs exclusively computed by exactly `j` non-requesting nodes.
    pub fn holder_count(&self, j: usize) -> u64 {
        assert!(
            j >= 1 && j < self.node_count as usize,
            "multiplicity out of range"
        );
        self.holder_counts[j - 1]
    }

    pub fn holder_counts(&self) -> &[u64] {
        &self.holder_counts
    }

    pub fn self_computed(&self) -> &[u64] {
        &self.self_computed
    }

    pub fn self_computed_total(&self) -> u64 {
        self.self_computed.iter().sum()
    }

    pub fn per_pair(&self) -> &BTreeMap<(u32, NodeSet), u64> {
        &self.per_pair
    }

    /// Total IVs not computed at their requesting node.
    pub fn missing_total(&self) -> u64 {
        self.holder_counts.iter().sum()
    }

    /// `sum over j of (j-1) * holder_count(j)`.
    pub fn duplication_total(&self) -> u64 {
        self.holder_counts
            .iter()
            .enumerate()
            .map(|(ix, &b)| ix as u64 * b)
            .sum()
    }

    /// Per requesting node, self-computed plus charged IVs must account for
    /// every one of its `N` IVs.
    pub fn partition_identity_holds(&self) -> bool {
        (1..=self.node_count).all(|k| {
            let charged: u64 = self
                .per_pair
                .range(
                    (k, NodeSet::from_sorted(vec![]))..=(k, NodeSet::from_sorted(vec![u32::MAX])),
                )
                .map(|(_, &count)| count)
                .sum();
            self.self_computed[k as usize - 1] + charged == u64::from(self.file_count)
        })
    }
}

/// Builds the exclusivity statistics from the trace's compute-set
/// snapshots. Errors if some IV was computed nowhere.
pub fn extract_stats(trace: &ShuffleTrace) -> Result<ExclusivityStats> {
    let k = trace.node_count;
    let mut holder_counts = vec![0u64; k.saturating_sub(1) as usize];
    let mut self_computed = vec![0u64; k as usize];
    let mut per_pair: BTreeMap<(u32, NodeSet), u64> = BTreeMap::new();
    for target in 1..=k {
        for file in 1..=trace.file_count {
            let iv = IvId { target, file };
            let holders: Vec<u32> = (1..=k)
                .filter(|&q| trace.compute_sets[q as usize - 1].contains(&iv))
                .collect();
            if holders.is_empty() {
                return Err(Error::IvComputedNowhere { iv });
            }
            if holders.contains(&target) {
                self_computed[target as usize - 1] += 1;
            } else {
                holder_counts[holders.len() - 1] += 1;
                *per_pair
                    .entry((target, NodeSet::from_sorted(holders)))
                    .or_insert(0) += 1;
            }
        }
    }
    Ok(ExclusivityStats {
        node_count: k,
        file_count: trace.file_count,
        holder_counts,
        self_computed,
        per_pair,
    })
}

/// Slacks of the two exclusivity constraints, both nonnegative for any
/// valid execution and zero for the pure scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintCheck {
    /// `missing_total - N*(K - r)`: nodes must fetch at least the IVs their
    /// storage cannot provide.
    pub coverage_slack: Rat,
    /// `(c - 1)*N*K - duplication_total`: extra copies cost computation.
    pub duplication_slack: Rat,
}

impl ConstraintCheck {
    pub fn holds(&self) -> bool {
        self.coverage_slack >= Rat::from_integer(0)
            && self.duplication_slack >= Rat::from_integer(0)
    }

    pub fn attained_with_equality(&self) -> bool {
        self.coverage_slack == Rat::from_integer(0)
            && self.duplication_slack == Rat::from_integer(0)
    }
}

/// Evaluates both exclusivity constraints in exact rationals.
pub fn check_exclusivity_constraints(
    stats: &ExclusivityStats,
    report: &LoadReport,
) -> ConstraintCheck {
    let n = Rat::from_integer(i64::from(stats.file_count));
    let k = Rat::from_integer(i64::from(stats.node_count));
    let one = Rat::from_integer(1);
    let missing = Rat::from_integer(stats.missing_total() as i64);
    let duplication = Rat::from_integer(stats.duplication_total() as i64);
    ConstraintCheck {
        coverage_slack: missing - n * (k - report.storage),
        duplication_slack: (report.computation - one) * n * k - duplication,
    }
}

/// Minimum broadcast length in bits implied by the statistics:
/// `V * sum over j of holder_count(j) / (j+1)`.
pub fn min_downlink_bits(stats: &ExclusivityStats, iv_bits: u32) -> Rat {
    stats
        .holder_counts
        .iter()
        .enumerate()
        .map(|(ix, &b)| Rat::new((b * u64::from(iv_bits)) as i64, ix as i64 + 2))
        .sum()
}

/// Support plane of the upload surface under the corner-span triangle `i`.
pub fn uplink_support_plane<S: Scalar>(node_count: u32, i: u32, r: S, c: S) -> S {
    assert!(
        (2..node_count).contains(&i),
        "plane index {i} outside [2..{}]",
        node_count - 1
    );
    let k = i64::from(node_count);
    let i = i64::from(i);
    ratio::<S>(-2, k * i) * r + ratio::<S>(-1, i * (i - 1)) * c + ratio(2 * i - 1, i * (i - 1))
}

/// Support plane of the download surface under the corner-span triangle `i`.
pub fn downlink_support_plane<S: Scalar>(node_count: u32, i: u32, r: S, c: S) -> S {
    assert!(
        (2..node_count).contains(&i),
        "plane index {i} outside [2..{}]",
        node_count - 1
    );
    let k = i64::from(node_count);
    let i = i64::from(i);
    ratio::<S>(-(2 * i - 1), k * i * (i + 1)) * r
        + ratio::<S>(-1, i * (i + 1)) * c
        + ratio(2, i + 1)
}

/// Slope of the secant under the per-multiplicity download curve between
/// breakpoints `i-1` and `i` (negative for all `i >= 2`).
pub fn secant_slope<S: Scalar>(i: u32) -> S {
    let i = i64::from(i);
    ratio(-1, i * (i + 1))
}

/// Intercept of that secant (positive throughout the regime).
pub fn secant_intercept<S: Scalar>(node_count: u32, r: S, i: u32) -> S {
    let k = i64::from(node_count);
    let i = i64::from(i);
    let storage_slack = S::one() - r / int(k);
    ratio::<S>(2 * i - 1, i * (i + 1)) * storage_slack + ratio(1, i * (i + 1))
}

/// Computation-load breakpoint `1 + (1 - r/K)(i - 1)` where the secant
/// touches the curve.
pub fn computation_breakpoint<S: Scalar>(node_count: u32, r: S, i: u32) -> S {
    let k = i64::from(node_count);
    S::one() + (S::one() - r / int(k)) * int(i64::from(i) - 1)
}

/// Which per-storage curve closes the download bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DownlinkEnvelope {
    /// The download curve `1/(r+1) * (1 - r/K)`; the sound choice.
    DownloadCurve,
    /// The upload curve `1/r * (1 - r/K)`. Kept evaluable for comparison:
    /// it exceeds the download achieved at the scheme corners and is
    /// therefore not a valid download bound.
    UploadCurve,
}

/// One space's lower bound at `(r, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaneBound<S> {
    /// Index of the maximizing support plane, if any planes exist (none for
    /// `K = 2`).
    pub best_plane: Option<u32>,
    pub plane_value: Option<S>,
    pub envelope_value: S,
    /// `max(plane_value, envelope_value)`.
    pub bound: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundPair<S> {
    pub uplink: PlaneBound<S>,
    pub downlink: PlaneBound<S>,
}

/// Largest applicable lower bounds on upload and download at `(r, c)`:
/// the maximum over all support planes and the per-storage envelope.
pub fn plane_bounds<S: Scalar>(node_count: u32, r: S, c: S) -> Result<BoundPair<S>> {
    plane_bounds_with(node_count, r, c, DownlinkEnvelope::DownloadCurve)
}

pub fn plane_bounds_with<S: Scalar>(
    node_count: u32,
    r: S,
    c: S,
    downlink_envelope: DownlinkEnvelope,
) -> Result<BoundPair<S>> {
    if c < S::one() || r < c || int::<S>(i64::from(node_count)) < r {
        return Err(Error::OutOfRegime {
            r: r.to_string(),
            c: c.to_string(),
            node_count,
        });
    }
    let (upload_curve, download_curve) = envelope_curves::<S>(node_count)?;
    let assemble = |space: Space| -> Result<PlaneBound<S>> {
        let mut best_plane = None;
        let mut plane_value: Option<S> = None;
        for i in 2..node_count {
            let value = match space {
                Space::Uplink => uplink_support_plane(node_count, i, r, c),
                Space::Downlink => downlink_support_plane(node_count, i, r, c),
            };
            if plane_value.is_none_or(|v| value > v) {
                plane_value = Some(value);
                best_plane = Some(i);
            }
        }
        let envelope_value = match (space, downlink_envelope) {
            (Space::Uplink, _) => upload_curve.value(r)?,
            (Space::Downlink, DownlinkEnvelope::DownloadCurve) => download_curve.value(r)?,
            (Space::Downlink, DownlinkEnvelope::UploadCurve) => upload_curve.value(r)?,
        };
        let bound = match plane_value {
            Some(v) if v > envelope_value => v,
            _ => envelope_value,
        };
        Ok(PlaneBound {
            best_plane,
            plane_value,
            envelope_value,
            bound,
        })
    };
    Ok(BoundPair {
        uplink: assemble(Space::Uplink)?,
        downlink: assemble(Space::Downlink)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{scheme_corner, surface_value, TradeoffSurface};
    use crate::scheme::JobSpec;
    use crate::sim::{execute, execute_forwarding};
    use crate::{rat, Rat};

    fn job(k: u32, n: u32, v: u32) -> JobSpec {
        JobSpec {
            node_count: k,
            file_count: n,
            file_bits: 8,
            iv_bits: v,
            seed: 9,
        }
    }

    #[test]
    fn pure_scheme_statistics() {
        let exec = execute(&job(3, 6, 2), 2).unwrap();
        let stats = extract_stats(&exec.trace).unwrap();
        // Every missing IV is held by exactly the i nodes of its batch.
        assert_eq!(stats.holder_count(2), 6);
        assert_eq!(stats.holder_count(1), 0);
        assert_eq!(stats.self_computed_total(), 12);
        assert!(stats.partition_identity_holds());
        for ((target, holders), count) in stats.per_pair() {
            assert_eq!(holders.len(), 2);
            assert!(!holders.contains(*target));
            assert_eq!(*count, 2);
        }
    }

    #[test]
    fn full_replication_statistics() {
        let exec = execute(&job(4, 2, 3), 4).unwrap();
        let stats = extract_stats(&exec.trace).unwrap();
        assert!(stats.holder_counts().iter().all(|&b| b == 0));
        assert_eq!(stats.self_computed_total(), 8);
        assert!(stats.partition_identity_holds());
    }

    #[test]
    fn statistics_catch_uncovered_ivs() {
        let mut exec = execute(&job(3, 6, 2), 2).unwrap();
        let victim = crate::scheme::IvId { target: 1, file: 5 };
        for set in &mut exec.trace.compute_sets {
            set.remove(&victim);
        }
        assert!(matches!(
            extract_stats(&exec.trace),
            Err(Error::IvComputedNowhere { iv }) if iv == victim
        ));
    }

    #[test]
    fn scheme_attains_both_constraints_with_equality() {
        for (k, i) in [(3u32, 2u32), (4, 2), (5, 3), (6, 1)] {
            let n = crate::scheme::minimal_files(k, i) as u32;
            let v = crate::scheme::minimal_iv_bits(k, i);
            let exec = execute(&job(k, n, v), i).unwrap();
            let stats = extract_stats(&exec.trace).unwrap();
            assert_eq!(stats.missing_total(), u64::from(n) * u64::from(k - i));
            let check = check_exclusivity_constraints(&stats, &exec.report);
            assert!(check.holds());
            assert!(check.attained_with_equality(), "K={k} i={i}");
        }
    }

    #[test]
    fn full_replication_constraints_degenerate() {
        let exec = execute(&job(4, 2, 3), 4).unwrap();
        let stats = extract_stats(&exec.trace).unwrap();
        let check = check_exclusivity_constraints(&stats, &exec.report);
        assert_eq!(check.coverage_slack, rat(0, 1));
        // (c - 1)NK with c = 1: zero budget, zero duplication.
        assert_eq!(check.duplication_slack, rat(0, 1));
        assert!(check.holds());
    }

    #[test]
    fn chain_broadcast_meets_the_floor_exactly() {
        for (k, i) in [(3u32, 2u32), (5, 2), (6, 4)] {
            let n = crate::scheme::minimal_files(k, i) as u32;
            let v = crate::scheme::minimal_iv_bits(k, i);
            let exec = execute(&job(k, n, v), i).unwrap();
            let stats = extract_stats(&exec.trace).unwrap();
            let floor = min_downlink_bits(&stats, v);
            assert_eq!(
                floor,
                Rat::from_integer(exec.report.raw.downlink_bits as i64)
            );
        }
    }

    #[test]
    fn forwarding_exceeds_the_floor() {
        let exec = execute_forwarding(&job(4, 6, 2), 2).unwrap();
        let stats = extract_stats(&exec.trace).unwrap();
        let floor = min_downlink_bits(&stats, 2);
        let measured = Rat::from_integer(exec.report.raw.downlink_bits as i64);
        assert!(measured > floor);
        assert!(check_exclusivity_constraints(&stats, &exec.report).holds());
    }

    #[test]
    fn floor_is_zero_without_missing_ivs() {
        let exec = execute(&job(4, 2, 3), 4).unwrap();
        let stats = extract_stats(&exec.trace).unwrap();
        assert_eq!(min_downlink_bits(&stats, 3), rat(0, 1));
    }

    #[test]
    fn support_plane_examples() {
        assert_eq!(
            downlink_support_plane::<Rat>(3, 2, rat(2, 1), rat(4, 3)),
            rat(1, 9)
        );
        assert_eq!(
            uplink_support_plane::<Rat>(3, 2, rat(2, 1), rat(4, 3)),
            rat(1, 6)
        );
    }

    #[test]
    fn planes_pass_through_their_corners() {
        for k in 3..=8u32 {
            for i in 2..k {
                for corner in [i - 1, i, k] {
                    let p = scheme_corner::<Rat>(k, corner);
                    assert_eq!(
                        downlink_support_plane(k, i, p.storage, p.computation),
                        p.download,
                        "downlink K={k} i={i} corner={corner}"
                    );
                    assert_eq!(
                        uplink_support_plane(k, i, p.storage, p.computation),
                        p.upload,
                        "uplink K={k} i={i} corner={corner}"
                    );
                }
            }
        }
    }

    #[test]
    fn secant_signs_hold_across_the_regime() {
        let k = 7u32;
        for i in 2..k {
            assert!(secant_slope::<Rat>(i) < rat(0, 1));
            for step in 0..=24i64 {
                let r = rat(1, 1) + rat(step * 6, 24);
                let mu = secant_intercept::<Rat>(k, r, i);
                assert!(mu > rat(0, 1), "i={i} r={r}");
                let sum = secant_slope::<Rat>(i) + mu;
                if r < rat(7, 1) {
                    assert!(sum > rat(0, 1), "i={i} r={r}");
                } else {
                    assert_eq!(sum, rat(0, 1));
                }
            }
        }
    }

    #[test]
    fn secant_touches_the_curve_at_both_breakpoints() {
        // At x = breakpoint(i-1) and x = breakpoint(i), the secant equals
        // (1 - r/K)^2 / (x + 1 - 2r/K).
        let k = 6u32;
        for i in 2..k {
            for step in 0..5i64 {
                let r = rat(1, 1) + rat(step, 1);
                if r >= rat(6, 1) {
                    continue;
                }
                let slack = rat(1, 1) - r / rat(6, 1);
                for touch in [i - 1, i] {
                    let x = computation_breakpoint::<Rat>(k, r, touch);
                    let curve = slack * slack / (x + rat(1, 1) - rat(2, 1) * r / rat(6, 1));
                    let secant = secant_slope::<Rat>(i) * x + secant_intercept::<Rat>(k, r, i);
                    assert_eq!(curve, secant, "i={i} touch={touch} r={r}");
                }
            }
        }
    }

    #[test]
    fn bounds_match_the_surfaces_across_the_regime() {
        let k = 6u32;
        let uplink = TradeoffSurface::<Rat>::new(k, crate::geometry::Space::Uplink).unwrap();
        let downlink = TradeoffSurface::<Rat>::new(k, crate::geometry::Space::Downlink).unwrap();
        // Deterministic pseudo-random regime points plus a coarse grid.
        let mut state = 0xBEEFu64;
        let mut next = move |m: i64| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) as i64) % m
        };
        let mut points = Vec::new();
        for _ in 0..200 {
            let r = rat(1, 1) + rat(next(5 * 12 + 1), 12);
            let c = rat(1, 1) + (r - rat(1, 1)) * rat(next(13), 12);
            points.push((r, c));
        }
        for rs in 0..=10i64 {
            for cs in 0..=rs {
                points.push((rat(1, 1) + rat(rs, 2), rat(1, 1) + rat(cs, 2)));
            }
        }
        for (r, c) in points {
            let pair = plane_bounds(k, r, c).unwrap();
            let lstar = uplink.value(r, c).unwrap();
            let dstar = downlink.value(r, c).unwrap();
            assert_eq!(pair.uplink.bound, lstar, "uplink at (r={r}, c={c})");
            assert_eq!(pair.downlink.bound, dstar, "downlink at (r={r}, c={c})");
            // In the corner-span region the plane alone is already tight.
            let (_, facet) = uplink.locate(r, c).unwrap();
            if facet.pareto {
                assert_eq!(pair.downlink.plane_value, Some(dstar), "(r={r}, c={c})");
            }
        }
    }

    #[test]
    fn bound_examples() {
        let pair = plane_bounds::<Rat>(3, rat(2, 1), rat(4, 3)).unwrap();
        assert_eq!(pair.downlink.bound, rat(1, 9));
        assert_eq!(pair.uplink.bound, rat(1, 6));
        let pair = plane_bounds::<Rat>(5, rat(5, 1), rat(1, 1)).unwrap();
        assert_eq!(pair.downlink.bound, rat(0, 1));
        assert_eq!(pair.uplink.bound, rat(0, 1));
        // K = 2 has no support planes; the envelope carries the bound.
        let pair = plane_bounds::<Rat>(2, rat(1, 1), rat(1, 1)).unwrap();
        assert_eq!(pair.downlink.best_plane, None);
        assert_eq!(pair.downlink.bound, rat(1, 4));
        assert!(plane_bounds::<Rat>(4, rat(1, 2), rat(1, 4)).is_err());
    }

    #[test]
    fn upload_curve_is_not_a_sound_download_bound() {
        // At the scheme corners the upload-curve variant exceeds the
        // download the scheme actually achieves.
        let p2 = scheme_corner::<Rat>(4, 2);
        let sound = plane_bounds_with(
            4,
            p2.storage,
            p2.computation,
            DownlinkEnvelope::DownloadCurve,
        )
        .unwrap();
        let literal =
            plane_bounds_with(4, p2.storage, p2.computation, DownlinkEnvelope::UploadCurve)
                .unwrap();
        assert_eq!(sound.downlink.bound, p2.download);
        assert!(literal.downlink.envelope_value > p2.download);
    }

    #[test]
    fn bounds_are_tight_at_every_scheme_corner() {
        for k in 2..=8u32 {
            for i in 1..k {
                let p = scheme_corner::<Rat>(k, i);
                let pair = plane_bounds(k, p.storage, p.computation).unwrap();
                assert_eq!(pair.uplink.bound, p.upload, "K={k} i={i}");
                assert_eq!(pair.downlink.bound, p.download, "K={k} i={i}");
                assert_eq!(
                    surface_value(k, p.storage, p.computation, Space::Downlink).unwrap(),
                    p.download
                );
            }
        }
    }
}
