//! Files, command line, benchmarking and HTTP service around `sqd-core`.

pub mod bench;
pub mod cli;
pub mod format;
pub mod options;
pub mod service;
pub mod view;
