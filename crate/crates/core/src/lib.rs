//! Energy model for autonomous electric vehicles driven by in-wheel motors.
//!
//! Layers, bottom up:
//! - [`dynamics`]: resistance forces, demand torque, drive-state classifier
//! - [`efficiency_map`]: motor efficiency surfaces, synthesis and CSV I/O
//! - [`strategy`]: constant-speed energy on a grade and optimal-speed search
//! - [`cycle`]: time-stepped drive-cycle simulation
//! - [`sscm`], [`case_study`], [`config`], [`report`]: the scenario runner

// `!(x > y)` is used on purpose so NaN falls into the rejection branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod case_study;
pub mod config;
pub mod cycle;
pub mod dynamics;
pub mod efficiency_map;
pub mod error;
pub mod report;
pub mod sscm;
pub mod strategy;
pub mod units;

pub use error::{Error, Result};
