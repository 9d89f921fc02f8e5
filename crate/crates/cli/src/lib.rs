//! Experiment runner for the branching-maximum library: configuration,
//! artifact I/O and the command implementations behind the `maxbranch` binary.

pub mod commands;
pub mod config;
pub mod io;
