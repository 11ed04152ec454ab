//! Scenario files, edge-list IO, artifact formats and the command
//! implementations behind the `possync` binary.

pub mod commands;
pub mod edgelist;
pub mod output;
pub mod scenario;
