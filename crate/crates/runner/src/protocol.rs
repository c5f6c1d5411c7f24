//! JSON frames exchanged with the duel client, protocol version 1.

use serde::{Deserialize, Serialize};

use qsmodels_core::arena::{AgentState, Arena, Cell, Direction, Item, WorldState};
use qsmodels_core::executive::{Executive, Mode, Outcome};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointView {
    pub id: String,
    pub x: i32,
    pub y: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemView {
    pub id: String,
    pub kind: String,
    pub waypoint: String,
    pub cell: Cell,
    pub available: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapView {
    pub width: usize,
    pub height: usize,
    /// One string per row: `#` wall, `.` floor.
    pub rows: Vec<String>,
    pub waypoints: Vec<WaypointView>,
    pub edges: Vec<(String, String)>,
    pub items: Vec<ItemView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentView {
    pub cell: Cell,
    pub facing: Direction,
    pub health: u32,
    pub tier: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStepView {
    pub t: usize,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreemptionView {
    pub tick: u64,
    pub step: Option<usize>,
    pub emergency: String,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ServerFrame {
    #[serde(rename_all = "camelCase")]
    Config {
        map: MapView,
        tick_ms: u64,
        protocol_version: u32,
    },
    #[serde(rename_all = "camelCase")]
    State {
        tick: u64,
        bot: AgentView,
        enemy: AgentView,
        items: Vec<ItemView>,
        mode: Mode,
        plan: Vec<PlanStepView>,
        current_step: Option<usize>,
        last_preemption: Option<PreemptionView>,
    },
    End {
        outcome: Outcome,
    },
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", deny_unknown_fields)]
pub enum ClientFrame {
    Input { keys: Vec<String> },
}

fn agent(a: &AgentState) -> AgentView {
    AgentView {
        cell: a.cell,
        facing: a.facing,
        health: a.health,
        tier: a.armed_tier,
    }
}

fn items(arena: &Arena, items: &[Item]) -> Vec<ItemView> {
    items
        .iter()
        .map(|i| ItemView {
            id: i.id.to_string(),
            kind: i.kind.to_string(),
            waypoint: i.waypoint.to_string(),
            cell: arena.waypoint_cell(&i.waypoint).unwrap_or(Cell::new(0, 0)),
            available: i.available,
        })
        .collect()
}

pub fn config_frame(world: &WorldState, tick_ms: u64) -> ServerFrame {
    let arena = &world.arena;
    ServerFrame::Config {
        map: MapView {
            width: arena.map.width(),
            height: arena.map.height(),
            rows: arena.map.rows(),
            waypoints: arena
                .graph
                .waypoints()
                .map(|(id, c)| WaypointView {
                    id: id.to_string(),
                    x: c.x,
                    y: c.y,
                })
                .collect(),
            edges: arena
                .graph
                .edges()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            items: items(arena, &world.items),
        },
        tick_ms,
        protocol_version: PROTOCOL_VERSION,
    }
}

pub fn state_frame(world: &WorldState, exec: &Executive) -> ServerFrame {
    ServerFrame::State {
        tick: world.tick,
        bot: agent(&world.bot),
        enemy: agent(&world.enemy),
        items: items(&world.arena, &world.items),
        mode: exec.mode(),
        plan: exec
            .plan()
            .map(|p| {
                p.steps()
                    .map(|(t, a)| PlanStepView {
                        t,
                        action: a.to_string(),
                    })
                    .collect()
            })
            .unwrap_or_default(),
        current_step: exec.current_step(),
        last_preemption: exec.last_preemption().map(|r| PreemptionView {
            tick: r.tick,
            step: r.step,
            emergency: r.emergency.to_string(),
            action: r.action.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_frames() {
        let f: ClientFrame =
            serde_json::from_str(r#"{"type":"input","keys":["ArrowUp"," "]}"#).unwrap();
        assert_eq!(
            f,
            ClientFrame::Input {
                keys: vec!["ArrowUp".into(), " ".into()]
            }
        );
        assert!(serde_json::from_str::<ClientFrame>(r#"{"type":"input"}"#).is_err());
        assert!(serde_json::from_str::<ClientFrame>(r#"{"type":"fire"}"#).is_err());
        assert!(serde_json::from_str::<ClientFrame>(r#"{"type":"input","keys":[1]}"#).is_err());
        assert!(
            serde_json::from_str::<ClientFrame>(r#"{"type":"input","keys":[],"x":1}"#).is_err()
        );
    }

    #[test]
    fn end_and_error_frames() {
        let s = serde_json::to_string(&ServerFrame::End {
            outcome: Outcome::BotWin,
        })
        .unwrap();
        assert_eq!(s, r#"{"type":"end","outcome":"bot_win"}"#);
        let s = serde_json::to_string(&ServerFrame::Error {
            message: "bad".into(),
        })
        .unwrap();
        assert_eq!(s, r#"{"type":"error","message":"bad"}"#);
    }
}
