//! Match summary and its reconstruction from an event log.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use qsmodels_core::executive::{Event, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub outcome: Outcome,
    pub ticks: u64,
    /// Plan requests issued.
    pub replans: u64,
    pub plans_ready: u64,
    pub plan_failures: u64,
    pub invalidations: u64,
    pub preemptions: u64,
    /// One entry per `plan_ready`, in log order.
    pub plan_latencies_ms: Vec<f64>,
    /// Horizon used → number of plans.
    pub horizon_histogram: BTreeMap<usize, u64>,
}

/// Accumulates a report from typed events as a match runs.
#[derive(Debug, Clone, Default)]
pub struct ReportBuilder {
    replans: u64,
    plans_ready: u64,
    plan_failures: u64,
    invalidations: u64,
    preemptions: u64,
    latencies: Vec<f64>,
    histogram: BTreeMap<usize, u64>,
}

impl ReportBuilder {
    pub fn observe(&mut self, e: &Event) {
        match e {
            Event::PlanRequested { .. } => self.replans += 1,
            Event::PlanReady {
                latency_ms,
                horizon,
                ..
            } => {
                self.plans_ready += 1;
                self.latencies.push(*latency_ms);
                *self.histogram.entry(*horizon).or_default() += 1;
            }
            Event::PlanFailed { .. } => self.plan_failures += 1,
            Event::PlanInvalidated { .. } => self.invalidations += 1,
            Event::PreemptionFired { .. } => self.preemptions += 1,
            Event::ActionStarted { .. }
            | Event::ActionDone { .. }
            | Event::MatchEnd { .. }
            | Event::OpponentCounts { .. } => {}
        }
    }

    pub fn finish(self, outcome: Outcome, ticks: u64) -> MatchReport {
        MatchReport {
            outcome,
            ticks,
            replans: self.replans,
            plans_ready: self.plans_ready,
            plan_failures: self.plan_failures,
            invalidations: self.invalidations,
            preemptions: self.preemptions,
            plan_latencies_ms: self.latencies,
            horizon_histogram: self.histogram,
        }
    }
}

#[derive(Debug, Error)]
pub enum RebuildError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("log has no match_end record")]
    NoEnd,
}

/// Recomputes a report from newline-delimited JSON, reading the records
/// as plain JSON rather than through the typed event model.
pub fn rebuild_report(log: &str) -> Result<MatchReport, RebuildError> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut latencies = Vec::new();
    let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();
    let mut end: Option<(Outcome, u64)> = None;
    for (i, line) in log.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| RebuildError::Line {
            line: i + 1,
            message,
        };
        let v: Value = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let kind = v["type"]
            .as_str()
            .ok_or_else(|| err("record without a type".into()))?;
        *counts.entry(kind.to_owned()).or_default() += 1;
        match kind {
            "plan_ready" => {
                latencies.push(
                    v["latency_ms"]
                        .as_f64()
                        .ok_or_else(|| err("plan_ready without latency_ms".into()))?,
                );
                let h = v["horizon"]
                    .as_u64()
                    .ok_or_else(|| err("plan_ready without horizon".into()))?;
                *histogram.entry(h as usize).or_default() += 1;
            }
            "match_end" => {
                let outcome =
                    serde_json::from_value(v["outcome"].clone()).map_err(|e| err(e.to_string()))?;
                let tick = v["tick"]
                    .as_u64()
                    .ok_or_else(|| err("match_end without tick".into()))?;
                end = Some((outcome, tick));
            }
            _ => {}
        }
    }
    let (outcome, ticks) = end.ok_or(RebuildError::NoEnd)?;
    let n = |k: &str| counts.get(k).copied().unwrap_or(0);
    Ok(MatchReport {
        outcome,
        ticks,
        replans: n("plan_requested"),
        plans_ready: n("plan_ready"),
        plan_failures: n("plan_failed"),
        invalidations: n("plan_invalidated"),
        preemptions: n("preemption_fired"),
        plan_latencies_ms: latencies,
        horizon_histogram: histogram,
    })
}

/// Field-by-field differences between two reports, empty when equal.
pub fn report_discrepancies(a: &MatchReport, b: &MatchReport) -> Vec<String> {
    let mut out = Vec::new();
    let mut cmp = |name: &str, x: String, y: String| {
        if x != y {
            out.push(format!("{name}: {x} != {y}"));
        }
    };
    cmp(
        "outcome",
        format!("{:?}", a.outcome),
        format!("{:?}", b.outcome),
    );
    cmp("ticks", a.ticks.to_string(), b.ticks.to_string());
    cmp("replans", a.replans.to_string(), b.replans.to_string());
    cmp(
        "plans_ready",
        a.plans_ready.to_string(),
        b.plans_ready.to_string(),
    );
    cmp(
        "plan_failures",
        a.plan_failures.to_string(),
        b.plan_failures.to_string(),
    );
    cmp(
        "invalidations",
        a.invalidations.to_string(),
        b.invalidations.to_string(),
    );
    cmp(
        "preemptions",
        a.preemptions.to_string(),
        b.preemptions.to_string(),
    );
    cmp(
        "plan_latencies_ms",
        format!("{:?}", a.plan_latencies_ms),
        format!("{:?}", b.plan_latencies_ms),
    );
    cmp(
        "horizon_histogram",
        format!("{:?}", a.horizon_histogram),
        format!("{:?}", b.horizon_histogram),
    );
    out
}
