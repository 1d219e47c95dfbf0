//! Batch verification: every scheme parameter for every cluster size, at
//! minimal feasible dimensions, checked end to end.
//!
//! One case runs the full pipeline and then asserts everything the crate
//! promises about it: decoded rows match the centralized reference, the
//! measured loads equal the closed forms and sit on the surfaces, the
//! exclusivity statistics have the scheme's exact shape and meet both
//! linear constraints with equality, the broadcast meets the downlink
//! floor exactly, the plane bounds are tight, the access point never
//! buffered more than one part per group, and a re-run reproduces the
//! trace byte for byte.

use crate::bounds::{
    check_exclusivity_constraints, extract_stats, min_downlink_bits, plane_bounds,
};
use crate::error::Result;
use crate::geometry::{surface_value, Space};
use crate::scheme::{minimal_files, minimal_iv_bits, JobSpec};
use crate::sim::{execute, Execution};
use crate::Rat;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub node_count: u32,
    pub param: u32,
    pub job: JobSpec,
    pub report_line: String,
    pub checks: Vec<CheckResult>,
}

impl CaseOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Smallest job usable with `(node_count, param)`.
pub fn minimal_job(node_count: u32, param: u32, seed: u64) -> JobSpec {
    JobSpec {
        node_count,
        file_count: minimal_files(node_count, param) as u32,
        file_bits: 8,
        iv_bits: minimal_iv_bits(node_count, param),
        seed,
    }
}

fn push(checks: &mut Vec<CheckResult>, name: &'static str, passed: bool, detail: String) {
    checks.push(CheckResult {
        name,
        passed,
        detail,
    });
}

/// Runs one `(node_count, param)` case and evaluates every check.
pub fn verify_case(node_count: u32, param: u32, seed: u64) -> Result<CaseOutcome> {
    let job = minimal_job(node_count, param, seed);
    let exec = execute(&job, param)?;
    let mut checks = Vec::new();

    push(
        &mut checks,
        "oracle",
        exec.verdict.passed(),
        format!("{:?}", exec.verdict),
    );

    let expected = exec.expected_loads();
    let measured = exec.report.quadruple();
    push(
        &mut checks,
        "closed-form",
        measured == expected,
        format!("measured {}", exec.report.record_line()),
    );

    let (up, down) = exec.trace.recount_bits();
    push(
        &mut checks,
        "trace-totals",
        up == exec.report.raw.uplink_bits && down == exec.report.raw.downlink_bits,
        format!("trace recount {up}/{down} bits"),
    );

    let strict_gap = param == node_count || exec.report.download < exec.report.upload;
    push(
        &mut checks,
        "regime",
        exec.report.in_nontrivial_regime(node_count) && strict_gap,
        format!("L={} D={}", exec.report.upload, exec.report.download),
    );

    match extract_stats(&exec.trace) {
        Ok(stats) => {
            let expected_missing = u64::from(job.file_count) * u64::from(node_count - param);
            let shape_ok = stats.partition_identity_holds()
                && stats.missing_total() == expected_missing
                && stats.holder_counts().iter().enumerate().all(|(ix, &b)| {
                    if ix + 1 == param as usize {
                        b == expected_missing
                    } else {
                        b == 0
                    }
                });
            push(
                &mut checks,
                "stats-shape",
                shape_ok,
                format!("holder counts {:?}", stats.holder_counts()),
            );

            let constraints = check_exclusivity_constraints(&stats, &exec.report);
            push(
                &mut checks,
                "constraint-equalities",
                constraints.holds() && constraints.attained_with_equality(),
                format!(
                    "coverage slack {}, duplication slack {}",
                    constraints.coverage_slack, constraints.duplication_slack
                ),
            );

            let floor = min_downlink_bits(&stats, job.iv_bits);
            let measured_down = Rat::from_integer(exec.report.raw.downlink_bits as i64);
            push(
                &mut checks,
                "downlink-floor",
                measured_down == floor,
                format!("floor {floor}, measured {measured_down}"),
            );
        }
        Err(e) => push(&mut checks, "stats-shape", false, e.to_string()),
    }

    let r = exec.report.storage;
    let c = exec.report.computation;
    match plane_bounds(node_count, r, c) {
        Ok(pair) => push(
            &mut checks,
            "bound-tightness",
            pair.uplink.bound == exec.report.upload && pair.downlink.bound == exec.report.download,
            format!("bounds L>={} D>={}", pair.uplink.bound, pair.downlink.bound),
        ),
        Err(e) => push(&mut checks, "bound-tightness", false, e.to_string()),
    }

    let surfaces_match = surface_value(node_count, r, c, Space::Uplink)? == exec.report.upload
        && surface_value(node_count, r, c, Space::Downlink)? == exec.report.download;
    push(
        &mut checks,
        "surface-match",
        surfaces_match,
        format!("at (r={r}, c={c})"),
    );

    push(
        &mut checks,
        "chain-buffer",
        exec.chain_buffer_peak <= 1,
        format!("peak {}", exec.chain_buffer_peak),
    );

    let rerun = execute(&job, param)?;
    push(
        &mut checks,
        "determinism",
        rerun.trace == exec.trace && rerun.report == exec.report,
        "re-run compared".into(),
    );

    Ok(CaseOutcome {
        node_count,
        param,
        job,
        report_line: exec.report.record_line(),
        checks,
    })
}

/// Re-exported executions for callers that want the raw run too.
pub fn case_execution(node_count: u32, param: u32, seed: u64) -> Result<Execution> {
    execute(&minimal_job(node_count, param, seed), param)
}

/// Every `(K <= max_nodes, i in [1..K-1])` case.
pub fn verify_sweep(max_nodes: u32, seed: u64) -> Result<Vec<CaseOutcome>> {
    if max_nodes < 2 {
        return Err(crate::Error::InvalidParameter(format!(
            "need at least 2 nodes to verify, got {max_nodes}"
        )));
    }
    let mut outcomes = Vec::new();
    for k in 2..=max_nodes {
        for i in 1..k {
            outcomes.push(verify_case(k, i, seed)?);
        }
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_case_passes_every_check() {
        let outcome = verify_case(3, 2, 7).unwrap();
        assert!(
            outcome.passed(),
            "failures: {:?}",
            outcome.failures().collect::<Vec<_>>()
        );
        assert_eq!(outcome.checks.len(), 11);
    }

    #[test]
    fn small_sweep_counts_cases() {
        let outcomes = verify_sweep(3, 7).unwrap();
        assert_eq!(outcomes.len(), 3); // (2,1), (3,1), (3,2)
        assert!(outcomes.iter().all(CaseOutcome::passed));
    }

    #[test]
    fn sweep_rejects_tiny_clusters() {
        assert!(verify_sweep(1, 7).is_err());
    }
}
