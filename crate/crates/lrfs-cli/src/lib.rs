//! Scenario harness for the `lrfs` toolkit: configuration parsing,
//! ground-truth and measurement simulation, the end-to-end filter runner,
//! and the diagnostic audit suite.

pub mod audit;
pub mod config;
pub mod runner;
pub mod scenario;
