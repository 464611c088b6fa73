//! Experiment harness for `gibbsfree-core`: configuration, experiment
//! runners, CSV/SVG output and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod experiments;
pub mod output;
pub mod plot;
