//! Exact simulation of sequential social learning when players care about
//! how many predecessors chose the same action.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod decision;
pub mod equilibrium;
pub mod numeric;
pub mod signal_model;
