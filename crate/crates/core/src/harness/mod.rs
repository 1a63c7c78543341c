//! Experiment plumbing: setup, configuration, traces, rate fits and the
//! verification suite.

pub mod setup;
pub mod trace;
pub mod rates;
pub mod config;
pub mod properties;
pub mod verify;
