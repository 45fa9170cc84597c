//! Configuration, execution and output for the `bergman-lab` command line tool.

pub mod config;
pub mod plot;
pub mod run;
