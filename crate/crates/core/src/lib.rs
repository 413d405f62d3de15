//! Frequency-stacked two-stage polyphase channeliser toolkit.
//!
//! Modules follow the processing chain: transform engine, prototype design,
//! filter-bank runtime, stacking planner, front-end simulation, complexity
//! models and the coarse/fine channeliser pipeline.

pub mod fftcore;
pub mod filter_design;
pub mod complexity;
pub mod polyphase_bank;
pub mod stacking_planner;
pub mod frontend_sim;
pub mod channeliser;
