//! IO and orchestration companion to `decofield-core`: JSON experiment
//! configs, thread-parallel (but bit-reproducible) integration drivers, and
//! CSV/JSON artifact writers.

pub mod config;
pub mod output;
pub mod parallel;
pub mod runners;
