//! Stance-aware multi-agent debate for claim verification.

pub mod agents;
pub mod cli;
pub mod corpus;
pub mod debate;
pub mod eval;
pub mod gateway;
pub mod model;
pub mod opinion;
pub mod stance;
