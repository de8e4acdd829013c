//! Experiment bench: corpus generation, convergence curves, the ladder
//! construction with its tile decoding, and the one-crossing tree search.

pub mod convergence;
pub mod corpus;
pub mod ladder;
pub mod one_respecting;
pub mod tiles;
