//! Desk-scale toolkit for multitarget state representation with labeled
//! random finite sets.
//!
//! A multitarget state is a finite set of (kinematic state, label) pairs;
//! the label makes target identity part of the state itself. This crate
//! provides the set and trajectory types built on that idea, exact
//! enumeration-based densities and a grid Bayes filter small enough to audit
//! by hand, and the diagnostic machinery that contrasts the labeled picture
//! with unlabeled trajectory-set representations (where stripping labels
//! loses information, physically impossible scenarios become representable,
//! and densities over mixed-length trajectories stop being comparable).
//!
//! Modules:
//! - [`state_model`]: labels, labeled states/sets, track segments, label
//!   trajectories.
//! - [`grid`]: finite grids and cells for desk-scale state spaces.
//! - [`distributions`]: labeled multi-Bernoulli density and friends, with
//!   enumeration oracles and sampling.
//! - [`exact_filter`]: exact labeled Bayes predict/update on a grid, plus
//!   moment-style estimators.
//! - [`trajectory_repr`]: unlabeled sets-of-trajectories, label
//!   stripping/restoration, physical-consistency diagnostics.
//! - [`tphd_lab`]: trajectory intensity functions, unit bookkeeping and the
//!   incommensurability checks for mixed-length Gaussian mixtures.
//! - [`metrics`]: optimal-assignment set distance and the tuple-vs-set
//!   comparison report.
//! - [`records`]: canonical line-oriented text serialization.
//! - [`numeric`]: compensated summation and rounding helpers.

pub mod distributions;
pub mod exact_filter;
pub mod grid;
pub mod metrics;
pub mod numeric;
pub mod records;
pub mod state_model;
pub mod tphd_lab;
pub mod trajectory_repr;

pub use grid::{Cell, Grid, GridError};
pub use state_model::{
    is_labeled, labels_of, KinematicState, LTrajectory, Label, LabeledSet, LabeledState,
    PointSet, State, StateModelError, TrackSegment,
};
