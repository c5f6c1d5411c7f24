//! Two-layer planning bot for a deterministic duel arena.

pub mod arena;
pub mod encoder;
pub mod executive;
pub mod opponent;
pub mod perception;
pub mod solver;
