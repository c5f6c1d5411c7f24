use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::encoder::Emergency;

/// How a match ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    BotWin,
    EnemyWin,
    /// Both agents died on the same tick.
    Draw,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TransitionCount {
    pub from: String,
    pub to: String,
    pub count: u64,
}

/// One line of the match event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    PlanRequested {
        tick: u64,
        /// Largest horizon the request may use.
        horizon: usize,
    },
    PlanReady {
        tick: u64,
        latency_ms: f64,
        horizon: usize,
        plan: Vec<String>,
    },
    PlanFailed {
        tick: u64,
        latency_ms: f64,
        reason: String,
    },
    PlanInvalidated {
        tick: u64,
        assumption: String,
    },
    PreemptionFired {
        tick: u64,
        /// Plan step the reaction came from; `None` for the built-in fallback.
        step: Option<usize>,
        emergency: Emergency,
        action: String,
    },
    ActionStarted {
        tick: u64,
        action: String,
    },
    ActionDone {
        tick: u64,
        action: String,
    },
    MatchEnd {
        tick: u64,
        outcome: Outcome,
    },
    OpponentCounts {
        tick: u64,
        counts: Vec<TransitionCount>,
    },
}

impl Event {
    pub fn tick(&self) -> u64 {
        match self {
            Event::PlanRequested { tick, .. }
            | Event::PlanReady { tick, .. }
            | Event::PlanFailed { tick, .. }
            | Event::PlanInvalidated { tick, .. }
            | Event::PreemptionFired { tick, .. }
            | Event::ActionStarted { tick, .. }
            | Event::ActionDone { tick, .. }
            | Event::MatchEnd { tick, .. }
            | Event::OpponentCounts { tick, .. } => *tick,
        }
    }

    /// The record's `type` tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Event::PlanRequested { .. } => "plan_requested",
            Event::PlanReady { .. } => "plan_ready",
            Event::PlanFailed { .. } => "plan_failed",
            Event::PlanInvalidated { .. } => "plan_invalidated",
            Event::PreemptionFired { .. } => "preemption_fired",
            Event::ActionStarted { .. } => "action_started",
            Event::ActionDone { .. } => "action_done",
            Event::MatchEnd { .. } => "match_end",
            Event::OpponentCounts { .. } => "opponent_counts",
        }
    }
}

pub fn transition_counts<K: ToString>(counts: &BTreeMap<(K, K), u64>) -> Vec<TransitionCount> {
    counts
        .iter()
        .map(|((a, b), n)| TransitionCount {
            from: a.to_string(),
            to: b.to_string(),
            count: *n,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let e = Event::PlanReady {
            tick: 7,
            latency_ms: 300.0,
            horizon: 3,
            plan: vec!["attack".into()],
        };
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(
            s,
            r#"{"type":"plan_ready","tick":7,"latency_ms":300.0,"horizon":3,"plan":["attack"]}"#
        );
        assert_eq!(serde_json::from_str::<Event>(&s).unwrap(), e);
        let e = Event::PreemptionFired {
            tick: 2,
            step: Some(1),
            emergency: Emergency::UnderAttack,
            action: "elude(w3)".into(),
        };
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains(r#""emergency":"under_attack""#), "{s}");
        assert_eq!(e.kind(), "preemption_fired");
    }
}
