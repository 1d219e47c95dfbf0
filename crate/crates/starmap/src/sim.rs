//! Deterministic star-network execution harness.
//!
//! Phases are barriers in logical time: all files are placed, every node
//! maps, every uplink part reaches the access point, the broadcast goes out,
//! and only then do nodes decode and reduce. There is no latency model; the
//! metered quantities are bit counts. Loads are exact rationals derived from
//! the raw counters, so closed-form comparisons are `==`, never tolerances.
//! A run owns all of its state: concurrent runs on independent jobs are
//! safe, and repeated runs of one job reproduce the trace byte for byte.

use crate::bits::Bits;
use crate::combinatorics::enumerate_subsets;
use crate::error::Result;
use crate::geometry::{scheme_corner, SccQuadruple};
use crate::mixture::{plan_mixture, MixtureWeights};
use crate::scheme::{build_scheme, oracle_outputs, oracle_rows, run_map, FileStore, IvId, JobSpec};
use crate::shuffle::{
    chain_encode, decode_and_reduce, encode_uplink, forward_encode, DownlinkBroadcast, RelayMode,
};
use crate::signal::Signal;
use crate::Rat;
use std::collections::BTreeSet;

/// Raw counters behind a load report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RawCounters {
    pub stored_files: u64,
    pub computed_ivs: u64,
    pub uplink_bits: u64,
    pub downlink_bits: u64,
}

impl RawCounters {
    fn add(&mut self, other: &RawCounters) {
        self.stored_files += other.stored_files;
        self.computed_ivs += other.computed_ivs;
        self.uplink_bits += other.uplink_bits;
        self.downlink_bits += other.downlink_bits;
    }
}

/// Measured loads: storage `r`, computation `c`, upload `L`, download `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadReport {
    pub storage: Rat,
    pub computation: Rat,
    pub upload: Rat,
    pub download: Rat,
    pub raw: RawCounters,
}

impl LoadReport {
    pub fn from_raw(job: &JobSpec, raw: RawCounters) -> Self {
        let files = i64::from(job.file_count);
        let functions = files * i64::from(job.node_count);
        let bits = functions * i64::from(job.iv_bits);
        let count = |v: u64| i64::try_from(v).expect("counter fits in i64");
        Self {
            storage: Rat::new(count(raw.stored_files), files),
            computation: Rat::new(count(raw.computed_ivs), functions),
            upload: Rat::new(count(raw.uplink_bits), bits),
            download: Rat::new(count(raw.downlink_bits), bits),
            raw,
        }
    }

    pub fn quadruple(&self) -> SccQuadruple<Rat> {
        SccQuadruple {
            storage: self.storage,
            computation: self.computation,
            upload: self.upload,
            download: self.download,
        }
    }

    /// `1 <= c <= r <= K` and `0 <= D <= L <= 1 - r/K`.
    pub fn in_nontrivial_regime(&self, node_count: u32) -> bool {
        let one = Rat::from_integer(1);
        let k = Rat::from_integer(i64::from(node_count));
        one <= self.computation
            && self.computation <= self.storage
            && self.storage <= k
            && Rat::from_integer(0) <= self.download
            && self.download <= self.upload
            && self.upload <= one - self.storage / k
    }

    /// Single-line record with rational fields rendered `p/q`.
    pub fn record_line(&self) -> String {
        format!(
            "report,{},{},{},{},{},{},{},{}",
            self.storage,
            self.computation,
            self.upload,
            self.download,
            self.raw.stored_files,
            self.raw.computed_ivs,
            self.raw.uplink_bits,
            self.raw.downlink_bits
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Uplink,
    Downlink,
}

impl Phase {
    fn name(self) -> &'static str {
        match self {
            Phase::Uplink => "uplink",
            Phase::Downlink => "downlink",
        }
    }
}

/// One transmitted signal (or chain block) in the shuffle trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub phase: Phase,
    pub label: &'static str,
    pub group_rank: u64,
    /// Sender node id for uplink parts and forwarded parts; 1-based block
    /// position for chain blocks.
    pub index: u32,
    pub bits: u64,
}

impl TraceRecord {
    pub fn line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.phase.name(),
            self.label,
            self.group_rank,
            self.index,
            self.bits
        )
    }
}

/// Ordered record of every transmission plus per-node compute-set
/// snapshots, sufficient to reconstruct the exclusivity statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShuffleTrace {
    pub node_count: u32,
    pub file_count: u32,
    pub iv_bits: u32,
    pub records: Vec<TraceRecord>,
    pub compute_sets: Vec<BTreeSet<IvId>>,
}

impl ShuffleTrace {
    pub fn lines(&self) -> Vec<String> {
        self.records.iter().map(TraceRecord::line).collect()
    }

    /// `(uplink bits, downlink bits)` re-counted from the records.
    pub fn recount_bits(&self) -> (u64, u64) {
        let sum = |phase: Phase| {
            self.records
                .iter()
                .filter(|r| r.phase == phase)
                .map(|r| r.bits)
                .sum()
        };
        (sum(Phase::Uplink), sum(Phase::Downlink))
    }
}

/// First decoded bit that disagrees with the centralized reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mismatch {
    pub node: u32,
    pub iv: IvId,
    pub bit_offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Mismatch),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Pure { param: u32 },
    Forwarding { param: u32 },
    Mixture { param: u32, weights: MixtureWeights },
}

/// A completed end-to-end run.
#[derive(Debug, Clone)]
pub struct Execution {
    pub job: JobSpec,
    pub mode: RunMode,
    pub report: LoadReport,
    pub verdict: Verdict,
    pub trace: ShuffleTrace,
    /// Peak number of parts the access point buffered within any group.
    pub chain_buffer_peak: usize,
    /// Decoded IV rows, `rows[k-1][n-1]`.
    pub rows: Vec<Vec<Bits>>,
    /// Reduce outputs per node.
    pub outputs: Vec<Bits>,
}

impl Execution {
    /// Loads this run must report if every phase is correct: the corner
    /// quadruple, the forwarding variant (download = upload), or the
    /// weighted corner combination.
    pub fn expected_loads(&self) -> SccQuadruple<Rat> {
        let k = self.job.node_count;
        match self.mode {
            RunMode::Pure { param } => scheme_corner::<Rat>(k, param),
            RunMode::Forwarding { param } => {
                let mut q = scheme_corner::<Rat>(k, param);
                q.download = q.upload;
                q
            }
            RunMode::Mixture { param, weights } => {
                let [w1, w2, w3] = weights.weights();
                let parts = [
                    (w1, scheme_corner::<Rat>(k, param - 1)),
                    (w2, scheme_corner::<Rat>(k, param)),
                    (w3, scheme_corner::<Rat>(k, k)),
                ];
                let mut out = SccQuadruple {
                    storage: Rat::from_integer(0),
                    computation: Rat::from_integer(0),
                    upload: Rat::from_integer(0),
                    download: Rat::from_integer(0),
                };
                for (w, q) in parts {
                    out.storage += w * q.storage;
                    out.computation += w * q.computation;
                    out.upload += w * q.upload;
                    out.download += w * q.download;
                }
                out
            }
        }
    }

    pub fn matches_closed_form(&self) -> bool {
        self.report.quadruple() == self.expected_loads()
    }
}

fn uplink_records(
    scheme: &crate::scheme::SchemeInstance,
    parts: &[Vec<Signal>],
) -> Result<Vec<TraceRecord>> {
    let k = scheme.job().node_count;
    let mut records = Vec::new();
    if scheme.param() < k {
        let groups = enumerate_subsets(k, scheme.param() + 1)?;
        let mut next = vec![0usize; k as usize];
        for group in &groups {
            for &member in group.members() {
                let slot = &mut next[member as usize - 1];
                let part = &parts[member as usize - 1][*slot];
                *slot += 1;
                records.push(TraceRecord {
                    phase: Phase::Uplink,
                    label: "part",
                    group_rank: group.rank(),
                    index: member,
                    bits: part.bit_len(),
                });
            }
        }
    }
    Ok(records)
}

fn downlink_records(
    scheme: &crate::scheme::SchemeInstance,
    broadcast: &DownlinkBroadcast,
) -> Vec<TraceRecord> {
    let mut records = Vec::new();
    match broadcast.mode {
        RelayMode::Chain => {
            let blocks = scheme.param() as usize;
            let block_bits = scheme.part_bits() as u64;
            for signal in &broadcast.signals {
                let rank = match &signal.label {
                    crate::signal::SignalLabel::DownlinkChain { group } => group.rank(),
                    _ => unreachable!("chain broadcast holds chain signals"),
                };
                for block in 0..blocks {
                    records.push(TraceRecord {
                        phase: Phase::Downlink,
                        label: "chain-block",
                        group_rank: rank,
                        index: block as u32 + 1,
                        bits: block_bits,
                    });
                }
            }
        }
        RelayMode::Forward => {
            for signal in &broadcast.signals {
                let (rank, sender) = match &signal.label {
                    crate::signal::SignalLabel::UplinkPart { group, sender } => {
                        (group.rank(), *sender)
                    }
                    _ => unreachable!("forwarded broadcast holds uplink parts"),
                };
                records.push(TraceRecord {
                    phase: Phase::Downlink,
                    label: "forward-part",
                    group_rank: rank,
                    index: sender,
                    bits: signal.bit_len(),
                });
            }
        }
    }
    records
}

fn execute_relay(job: &JobSpec, param: u32, relay: RelayMode) -> Result<Execution> {
    let scheme = build_scheme(job, param)?;
    let store = FileStore::generate(job);
    let tables = run_map(&scheme, &store)?;
    let parts = encode_uplink(&scheme, &tables)?;

    let (broadcast, buffer_peak) = match relay {
        RelayMode::Chain => {
            let outcome = chain_encode(&scheme, &parts)?;
            (outcome.broadcast, outcome.buffer_peak)
        }
        RelayMode::Forward => (forward_encode(&scheme, &parts)?, 0),
    };

    let mut records = uplink_records(&scheme, &parts)?;
    records.extend(downlink_records(&scheme, &broadcast));

    let mut rows = Vec::with_capacity(job.node_count as usize);
    let mut outputs = Vec::with_capacity(job.node_count as usize);
    for node in 1..=job.node_count {
        let (row, output) =
            decode_and_reduce(&scheme, node, &tables[node as usize - 1], &broadcast)?;
        rows.push(row);
        outputs.push(output);
    }

    let reference = oracle_rows(job, &store);
    let reference_outputs = oracle_outputs(&reference);
    let verdict = compare_to_reference(&rows, &outputs, &reference, &reference_outputs);

    let raw = RawCounters {
        stored_files: (1..=job.node_count)
            .map(|k| scheme.placement(k).len() as u64)
            .sum(),
        computed_ivs: tables.iter().map(|t| t.len() as u64).sum(),
        uplink_bits: parts.iter().flatten().map(Signal::bit_len).sum(),
        downlink_bits: broadcast.total_bits(),
    };

    let trace = ShuffleTrace {
        node_count: job.node_count,
        file_count: job.file_count,
        iv_bits: job.iv_bits,
        records,
        compute_sets: (1..=job.node_count)
            .map(|k| tables[k as usize - 1].keys().copied().collect())
            .collect(),
    };

    let mode = match relay {
        RelayMode::Chain => RunMode::Pure { param },
        RelayMode::Forward => RunMode::Forwarding { param },
    };
    Ok(Execution {
        job: *job,
        mode,
        report: LoadReport::from_raw(job, raw),
        verdict,
        trace,
        chain_buffer_peak: buffer_peak,
        rows,
        outputs,
    })
}

fn compare_to_reference(
    rows: &[Vec<Bits>],
    outputs: &[Bits],
    reference: &[Vec<Bits>],
    reference_outputs: &[Bits],
) -> Verdict {
    for (k0, (row, expect)) in rows.iter().zip(reference).enumerate() {
        for (n0, (got, want)) in row.iter().zip(expect).enumerate() {
            if let Some(bit_offset) = got.first_difference(want) {
                return Verdict::Fail(Mismatch {
                    node: k0 as u32 + 1,
                    iv: IvId {
                        target: k0 as u32 + 1,
                        file: n0 as u32 + 1,
                    },
                    bit_offset,
                });
            }
        }
    }
    for (k0, (got, want)) in outputs.iter().zip(reference_outputs).enumerate() {
        if let Some(bit_offset) = got.first_difference(want) {
            return Verdict::Fail(Mismatch {
                node: k0 as u32 + 1,
                iv: IvId {
                    target: k0 as u32 + 1,
                    file: 0,
                },
                bit_offset,
            });
        }
    }
    Verdict::Pass
}

/// Runs map, upload, chain coding, broadcast, decode, and reduce end to end.
pub fn execute(job: &JobSpec, param: u32) -> Result<Execution> {
    execute_relay(job, param, RelayMode::Chain)
}

/// Same pipeline with a forwarding access point (download equals upload).
pub fn execute_forwarding(job: &JobSpec, param: u32) -> Result<Execution> {
    execute_relay(job, param, RelayMode::Forward)
}

/// Runs the three sub-schemes of a mixture on disjoint file groups and
/// merges the outcome into one execution over the full job.
pub fn execute_mixture(
    job: &JobSpec,
    base_param: u32,
    weights: &MixtureWeights,
) -> Result<Execution> {
    let plan = plan_mixture(job, base_param, weights)?;
    let mut raw = RawCounters::default();
    let mut records = Vec::new();
    let mut compute_sets: Vec<BTreeSet<IvId>> = vec![BTreeSet::new(); job.node_count as usize];
    let mut rows: Vec<Vec<Bits>> = vec![Vec::new(); job.node_count as usize];
    let mut outputs: Vec<Option<Bits>> = vec![None; job.node_count as usize];
    let mut verdict = Verdict::Pass;
    let mut buffer_peak = 0usize;

    for group in &plan.groups {
        let sub = execute(&group.job, group.param)?;
        raw.add(&sub.report.raw);
        records.extend(sub.trace.records);
        buffer_peak = buffer_peak.max(sub.chain_buffer_peak);
        for node in 0..job.node_count as usize {
            for iv in &sub.trace.compute_sets[node] {
                compute_sets[node].insert(IvId {
                    target: iv.target,
                    file: iv.file + group.file_offset,
                });
            }
            rows[node].extend(sub.rows[node].iter().cloned());
            outputs[node] = Some(match outputs[node].take() {
                None => sub.outputs[node].clone(),
                Some(acc) => acc.xored(&sub.outputs[node]),
            });
        }
        if verdict.passed() {
            if let Verdict::Fail(m) = sub.verdict {
                verdict = Verdict::Fail(Mismatch {
                    iv: IvId {
                        target: m.iv.target,
                        file: m.iv.file + group.file_offset,
                    },
                    ..m
                });
            }
        }
    }

    Ok(Execution {
        job: *job,
        mode: RunMode::Mixture {
            param: base_param,
            weights: *weights,
        },
        report: LoadReport::from_raw(job, raw),
        verdict,
        trace: ShuffleTrace {
            node_count: job.node_count,
            file_count: job.file_count,
            iv_bits: job.iv_bits,
            records,
            compute_sets,
        },
        chain_buffer_peak: buffer_peak,
        rows,
        outputs: outputs
            .into_iter()
            .map(|o| o.expect("at least one group"))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn job(k: u32, n: u32, v: u32) -> JobSpec {
        JobSpec {
            node_count: k,
            file_count: n,
            file_bits: 8,
            iv_bits: v,
            seed: 42,
        }
    }

    #[test]
    fn three_node_point_is_exact() {
        let exec = execute(&job(3, 6, 2), 2).unwrap();
        assert!(exec.verdict.passed());
        let r = exec.report;
        assert_eq!(r.storage, rat(2, 1));
        assert_eq!(r.computation, rat(4, 3));
        assert_eq!(r.upload, rat(1, 6));
        assert_eq!(r.download, rat(1, 9));
        assert!(exec.matches_closed_form());
        assert_eq!(exec.chain_buffer_peak, 1);
    }

    #[test]
    fn full_replication_point() {
        let exec = execute(&job(4, 1, 3), 4).unwrap();
        assert!(exec.verdict.passed());
        assert_eq!(
            exec.report.quadruple(),
            SccQuadruple {
                storage: rat(4, 1),
                computation: rat(1, 1),
                upload: rat(0, 1),
                download: rat(0, 1)
            }
        );
        assert!(exec.trace.records.is_empty());
        assert_eq!(exec.chain_buffer_peak, 0);
    }

    #[test]
    fn ten_node_closed_forms() {
        let n = crate::scheme::minimal_files(10, 3) as u32;
        let exec = execute(&job(10, n, 3), 3).unwrap();
        assert!(exec.verdict.passed());
        let r = exec.report;
        assert_eq!(r.storage, rat(3, 1));
        assert_eq!(r.computation, rat(12, 5));
        assert_eq!(r.upload, rat(7, 30));
        assert_eq!(r.download, rat(7, 40));
    }

    #[test]
    fn toy_trace_shape_and_totals() {
        let exec = execute(&job(3, 6, 2), 2).unwrap();
        let lines = exec.trace.lines();
        assert_eq!(lines.len(), 5);
        assert_eq!(
            lines
                .iter()
                .filter(|l| l.starts_with("uplink,part"))
                .count(),
            3
        );
        assert_eq!(
            lines
                .iter()
                .filter(|l| l.starts_with("downlink,chain-block"))
                .count(),
            2
        );
        let (up, down) = exec.trace.recount_bits();
        assert_eq!(up, exec.report.raw.uplink_bits);
        assert_eq!(down, exec.report.raw.downlink_bits);
        assert_eq!(exec.report.record_line(), "report,2,4/3,1/6,1/9,12,24,6,4");
    }

    #[test]
    fn trace_is_deterministic() {
        let a = execute(&job(5, 10, 4), 2).unwrap();
        let b = execute(&job(5, 10, 4), 2).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.report, b.report);
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn reports_stay_in_the_nontrivial_regime() {
        for (k, i) in [(2u32, 1u32), (4, 2), (5, 3), (6, 5), (4, 4)] {
            let n = crate::scheme::minimal_files(k, i) as u32;
            let v = crate::scheme::minimal_iv_bits(k, i);
            let exec = execute(&job(k, n, v), i).unwrap();
            assert!(exec.verdict.passed(), "K={k} i={i}");
            assert!(exec.report.in_nontrivial_regime(k), "K={k} i={i}");
            if i < k {
                assert!(exec.report.download < exec.report.upload, "K={k} i={i}");
            }
        }
    }

    #[test]
    fn forwarding_doubles_nothing_but_download() {
        let coded = execute(&job(4, 6, 2), 2).unwrap();
        let forwarded = execute_forwarding(&job(4, 6, 2), 2).unwrap();
        assert!(forwarded.verdict.passed());
        assert_eq!(forwarded.report.storage, coded.report.storage);
        assert_eq!(forwarded.report.computation, coded.report.computation);
        assert_eq!(forwarded.report.upload, coded.report.upload);
        assert_eq!(forwarded.report.download, forwarded.report.upload);
        assert!(forwarded.matches_closed_form());
    }

    #[test]
    fn degenerate_mixture_equals_the_pure_scheme() {
        let weights = MixtureWeights::new(rat(0, 1), rat(1, 1), rat(0, 1)).unwrap();
        let mixed = execute_mixture(&job(4, 6, 2), 2, &weights).unwrap();
        let pure = execute(&job(4, 6, 2), 2).unwrap();
        assert!(mixed.verdict.passed());
        assert_eq!(mixed.report.quadruple(), pure.report.quadruple());
    }

    #[test]
    fn half_half_mixture_averages_two_pure_runs() {
        let weights = MixtureWeights::new(rat(1, 2), rat(1, 2), rat(0, 1)).unwrap();
        let mixed = execute_mixture(&job(3, 6, 2), 2, &weights).unwrap();
        assert!(mixed.verdict.passed());
        assert!(mixed.matches_closed_form());
        // Independent check: two pure runs, averaged componentwise.
        let low = execute(&job(3, 3, 2), 1).unwrap().report.quadruple();
        let high = execute(&job(3, 3, 2), 2).unwrap().report.quadruple();
        let half = rat(1, 2);
        assert_eq!(mixed.report.storage, half * (low.storage + high.storage));
        assert_eq!(
            mixed.report.computation,
            half * (low.computation + high.computation)
        );
        assert_eq!(mixed.report.upload, half * (low.upload + high.upload));
        assert_eq!(mixed.report.download, half * (low.download + high.download));
    }

    #[test]
    fn all_weight_on_full_replication() {
        let weights = MixtureWeights::new(rat(0, 1), rat(0, 1), rat(1, 1)).unwrap();
        let mixed = execute_mixture(&job(4, 6, 2), 2, &weights).unwrap();
        let q = mixed.report.quadruple();
        assert_eq!(
            (q.storage, q.computation, q.upload, q.download),
            (rat(4, 1), rat(1, 1), rat(0, 1), rat(0, 1))
        );
    }

    #[test]
    fn mismatch_reports_the_first_differing_bit() {
        let spec = job(3, 6, 2);
        let exec = execute(&spec, 2).unwrap();
        let store = crate::scheme::FileStore::generate(&spec);
        let reference = crate::scheme::oracle_rows(&spec, &store);
        let reference_outputs = crate::scheme::oracle_outputs(&reference);
        let mut rows = exec.rows.clone();
        let mut corrupted = rows[1][4].clone();
        corrupted.set(1, !corrupted.bit(1));
        rows[1][4] = corrupted;
        match compare_to_reference(&rows, &exec.outputs, &reference, &reference_outputs) {
            Verdict::Fail(m) => {
                assert_eq!(m.node, 2);
                assert_eq!(m.iv, IvId { target: 2, file: 5 });
                assert_eq!(m.bit_offset, 1);
            }
            Verdict::Pass => panic!("corruption must fail the verdict"),
        }
    }

    #[test]
    fn mixture_rows_cover_all_files() {
        let weights = MixtureWeights::new(rat(1, 2), rat(1, 4), rat(1, 4)).unwrap();
        let mixed = execute_mixture(&job(4, 24, 2), 2, &weights).unwrap();
        assert!(mixed.verdict.passed());
        for row in &mixed.rows {
            assert_eq!(row.len(), 24);
        }
        // Compute sets must cover the whole id space with global ids.
        let max_file = mixed
            .trace
            .compute_sets
            .iter()
            .flatten()
            .map(|iv| iv.file)
            .max()
            .unwrap();
        assert_eq!(max_file, 24);
    }
}
