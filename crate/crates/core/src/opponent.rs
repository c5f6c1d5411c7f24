//! Frequency-count model of the enemy's waypoint-to-waypoint moves.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arena::WaypointId;

/// Default sighting gap (ticks) beyond which a move is not counted.
pub const DEFAULT_STALENESS_WINDOW: u64 = 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpponentModel {
    counts: BTreeMap<(WaypointId, WaypointId), u64>,
    last_seen: Option<(WaypointId, u64)>,
    window: u64,
    /// With learning off only `last_seen` is tracked.
    learning: bool,
}

impl Default for OpponentModel {
    fn default() -> Self {
        OpponentModel::new(DEFAULT_STALENESS_WINDOW)
    }
}

impl OpponentModel {
    pub fn new(window: u64) -> Self {
        OpponentModel {
            counts: BTreeMap::new(),
            last_seen: None,
            window,
            learning: true,
        }
    }

    pub fn without_learning(mut self) -> Self {
        self.learning = false;
        self
    }

    /// A model preloaded with transition counts and no last sighting.
    pub fn from_counts(counts: impl IntoIterator<Item = ((WaypointId, WaypointId), u64)>) -> Self {
        OpponentModel {
            counts: counts.into_iter().collect(),
            ..OpponentModel::default()
        }
    }

    /// Records a sighting. A move `prev -> w` is counted when the previous
    /// sighting is at most `window` ticks old and at a different waypoint.
    pub fn observe(&mut self, waypoint: &WaypointId, tick: u64) {
        if let Some((prev, at)) = &self.last_seen {
            let fresh = tick.saturating_sub(*at) <= self.window;
            if self.learning && fresh && prev != waypoint {
                *self
                    .counts
                    .entry((prev.clone(), waypoint.clone()))
                    .or_default() += 1;
            }
        }
        self.last_seen = Some((waypoint.clone(), tick));
    }

    /// Most frequent successor of `from`; ties go to the smallest id and an
    /// unseen source predicts itself.
    pub fn predict_next(&self, from: &WaypointId) -> WaypointId {
        let mut best: Option<(&WaypointId, u64)> = None;
        for ((src, dst), &n) in &self.counts {
            if src != from || n == 0 {
                continue;
            }
            // Keys iterate in ascending dst order, so strict > keeps the smallest id.
            if best.is_none_or(|(_, b)| n > b) {
                best = Some((dst, n));
            }
        }
        best.map_or_else(|| from.clone(), |(w, _)| w.clone())
    }

    pub fn count(&self, from: &WaypointId, to: &WaypointId) -> u64 {
        self.counts
            .get(&(from.clone(), to.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<(WaypointId, WaypointId), u64> {
        &self.counts
    }

    pub fn last_seen(&self) -> Option<&(WaypointId, u64)> {
        self.last_seen.as_ref()
    }
}
