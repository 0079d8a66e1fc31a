//! Labeled multitarget state representation.
//!
//! The central objects are finite sets of labeled states: pairs of a
//! kinematic state and a discrete [`Label`], stamped with the time-index they
//! refer to. A set is *labeled* when its elements carry pairwise distinct
//! labels. Two elements may share the same kinematic state as long as their
//! labels differ; that is a legitimate multitarget configuration (two targets
//! momentarily co-located), not an error. The converse, one label on two
//! distinct states at the same time, is forbidden: a target cannot be in two
//! places at once.
//!
//! [`LabeledSet`] enforces labeledness at construction, so holding a value of
//! that type is proof of the property. [`PointSet`] deliberately does not:
//! density functions are defined on it so they can be evaluated on sets that
//! violate labeledness (and either vanish there or, for the diagnostic
//! counterexamples, fail to vanish).
//!
//! Per-label history is covered by [`TrackSegment`] (one maximal run of
//! consecutive time steps) and [`LTrajectory`] (the full per-time record of a
//! label across a window, with gaps).

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

/// Bound for kinematic state types usable in sets, segments and
/// trajectories: cloneable, exactly comparable, hashable and canonically
/// orderable. Grid cells and [`KinematicState`] both qualify.
pub trait State: Clone + Eq + Ord + Hash + fmt::Debug {}

impl<T: Clone + Eq + Ord + Hash + fmt::Debug> State for T {}

// ============================================================================
// Errors
// ============================================================================

#[derive(Debug, Error, PartialEq)]
pub enum StateModelError {
    #[error("states span multiple time-indices ({first} and {other})")]
    MixedTimeIndices { first: u32, other: u32 },
    #[error("label {label} appears on distinct kinematic states in one set")]
    DuplicateLabel { label: Label },
    #[error("kinematic state must have at least one coordinate")]
    EmptyCoordinates,
    #[error("kinematic state coordinate at axis {axis} is not finite")]
    NonFiniteCoordinate { axis: usize },
    #[error("state sequence is empty")]
    EmptySequence,
    #[error("state sequence mixes labels {expected} and {found}")]
    LabelMismatch { expected: Label, found: Label },
    #[error("time-indices must increase by exactly 1: {prev} followed by {next}")]
    NonConsecutiveTimes { prev: u32, next: u32 },
}

// ============================================================================
// Labels
// ============================================================================

/// Discrete track label `birth_time:index`.
///
/// `birth_time` is the time-index of the birth cohort the label belongs to;
/// `index` numbers labels within the cohort starting from 1. Labels identify
/// targets and carry no semantic ordering; the `Ord` implementation is the
/// canonical lexicographic ordering used only for deterministic iteration,
/// tie-breaking and serialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub birth_time: u32,
    pub index: u32,
}

impl Label {
    /// Creates a label.
    ///
    /// # Panics
    /// Panics if `index` is 0; cohort indices start at 1.
    pub fn new(birth_time: u32, index: u32) -> Self {
        assert!(index >= 1, "label index within a birth cohort starts at 1");
        Self { birth_time, index }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.birth_time, self.index)
    }
}

// ============================================================================
// Kinematic states
// ============================================================================

/// A point in a fixed-dimension Euclidean state space.
///
/// Coordinates are validated finite. Equality, hashing and the canonical
/// ordering use the exact floating-point representation: there is no
/// tolerance-based comparison at the set level (approximate matching belongs
/// to the metrics module). Exact comparison keeps set membership and
/// deterministic iteration well defined.
#[derive(Clone, Debug)]
pub struct KinematicState {
    coords: Vec<f64>,
}

impl KinematicState {
    pub fn new(coords: Vec<f64>) -> Result<Self, StateModelError> {
        if coords.is_empty() {
            return Err(StateModelError::EmptyCoordinates);
        }
        if let Some(axis) = coords.iter().position(|c| !c.is_finite()) {
            return Err(StateModelError::NonFiniteCoordinate { axis });
        }
        Ok(Self { coords })
    }

    /// One-dimensional state, the common case in desk examples.
    ///
    /// # Panics
    /// Panics on non-finite input.
    pub fn scalar(x: f64) -> Self {
        Self::new(vec![x]).expect("scalar state requires a finite coordinate")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl PartialEq for KinematicState {
    fn eq(&self, other: &Self) -> bool {
        self.coords.len() == other.coords.len()
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Eq for KinematicState {}

impl Hash for KinematicState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_usize(self.coords.len());
        for c in &self.coords {
            state.write_u64(c.to_bits());
        }
    }
}

impl Ord for KinematicState {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            let ord = a.total_cmp(b);
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        self.coords.len().cmp(&other.coords.len())
    }
}

impl PartialOrd for KinematicState {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for KinematicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

// ============================================================================
// Labeled states and sets
// ============================================================================

/// One labeled target state at a given time-index.
///
/// The derived ordering (label first) is the canonical element order inside
/// sets and serialized records.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledState<S> {
    pub label: Label,
    pub x: S,
    pub time: u32,
}

impl<S: State> LabeledState<S> {
    pub fn new(x: S, label: Label, time: u32) -> Self {
        Self { label, x, time }
    }
}

/// Finite set of `(label, state)` pairs with **no** labeledness requirement.
///
/// Exact duplicate pairs collapse (set semantics); distinct pairs may share a
/// label. Densities take this type so that they can be evaluated on
/// non-labeled sets: the labeled ones vanish there and the diagnostic
/// counterexample (a Poisson-style density on the labeled space) does not.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointSet<S> {
    elems: Vec<(Label, S)>,
}

impl<S: State> PointSet<S> {
    /// Builds the set, sorting into canonical label-major order and
    /// collapsing exact duplicates.
    pub fn new(pairs: impl IntoIterator<Item = (Label, S)>) -> Self {
        let mut elems: Vec<_> = pairs.into_iter().collect();
        elems.sort();
        elems.dedup();
        Self { elems }
    }

    pub fn empty() -> Self {
        Self { elems: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &(Label, S)> {
        self.elems.iter()
    }

    /// Distinct labels, in canonical order.
    pub fn labels(&self) -> BTreeSet<Label> {
        self.elems.iter().map(|(l, _)| *l).collect()
    }

    /// The defining property: as many distinct labels as elements.
    pub fn is_labeled(&self) -> bool {
        self.labels().len() == self.elems.len()
    }
}

/// Finite set of labeled states sharing one time-index, with pairwise
/// distinct labels.
///
/// Construction validates both requirements, so every value of this type is
/// labeled by construction. Elements are kept in canonical label order, which
/// makes equality, hashing and the `Ord` used for deterministic map keys
/// agree with set semantics.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledSet<S> {
    elems: Vec<LabeledState<S>>,
}

impl<S: State> LabeledSet<S> {
    pub fn new(
        elems: impl IntoIterator<Item = LabeledState<S>>,
    ) -> Result<Self, StateModelError> {
        let mut v: Vec<_> = elems.into_iter().collect();
        v.sort();
        v.dedup();
        if let Some(first) = v.first() {
            let t = first.time;
            if let Some(bad) = v.iter().find(|e| e.time != t) {
                return Err(StateModelError::MixedTimeIndices { first: t, other: bad.time });
            }
        }
        for w in v.windows(2) {
            if w[0].label == w[1].label {
                return Err(StateModelError::DuplicateLabel { label: w[0].label });
            }
        }
        Ok(Self { elems: v })
    }

    pub fn empty() -> Self {
        Self { elems: Vec::new() }
    }

    /// Internal constructor for elements already in canonical order with the
    /// invariants established by the caller.
    pub(crate) fn from_sorted_unchecked(elems: Vec<LabeledState<S>>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1] && w[0].label != w[1].label));
        debug_assert!(elems.windows(2).all(|w| w[0].time == w[1].time));
        Self { elems }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Elements in canonical label order.
    pub fn iter(&self) -> std::slice::Iter<'_, LabeledState<S>> {
        self.elems.iter()
    }

    /// The shared time-index; `None` for the empty set.
    pub fn time(&self) -> Option<u32> {
        self.elems.first().map(|e| e.time)
    }

    /// Labels in canonical order.
    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.elems.iter().map(|e| e.label)
    }

    pub fn contains_label(&self, label: Label) -> bool {
        self.get(label).is_some()
    }

    /// State occupied by `label`, if present.
    pub fn get(&self, label: Label) -> Option<&S> {
        self.elems
            .binary_search_by_key(&label, |e| e.label)
            .ok()
            .map(|i| &self.elems[i].x)
    }

    /// Projection to `(label, state)` pairs, dropping the time-index.
    pub fn point_set(&self) -> PointSet<S> {
        PointSet::new(self.elems.iter().map(|e| (e.label, e.x.clone())))
    }
}

/// Checks the defining labeledness property on a raw collection.
///
/// The input is interpreted as a set (exact duplicate entries collapse) and
/// must share a single time-index; mixed time-indices are malformed rather
/// than merely non-labeled. Returns whether distinct labels are as numerous
/// as elements.
pub fn is_labeled<S: State>(states: &[LabeledState<S>]) -> Result<bool, StateModelError> {
    if let Some(first) = states.first() {
        let t = first.time;
        if let Some(bad) = states.iter().find(|e| e.time != t) {
            return Err(StateModelError::MixedTimeIndices { first: t, other: bad.time });
        }
    }
    let set: BTreeSet<&LabeledState<S>> = states.iter().collect();
    let labels: BTreeSet<Label> = set.iter().map(|e| e.label).collect();
    Ok(labels.len() == set.len())
}

/// Distinct labels appearing in a raw collection of labeled states.
pub fn labels_of<S: State>(states: &[LabeledState<S>]) -> BTreeSet<Label> {
    states.iter().map(|e| e.label).collect()
}

// ============================================================================
// Track segments and label trajectories
// ============================================================================

/// One maximal run of a label through consecutive time steps: a label, the
/// time-index of its first state, and one state per step.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrackSegment<S> {
    label: Label,
    start_time: u32,
    states: Vec<S>,
}

impl<S: State> TrackSegment<S> {
    pub fn new(label: Label, start_time: u32, states: Vec<S>) -> Result<Self, StateModelError> {
        if states.is_empty() {
            return Err(StateModelError::EmptySequence);
        }
        Ok(Self { label, start_time, states })
    }

    /// Builds a segment from per-step labeled states.
    ///
    /// The states must be nonempty, all carry the same label, and have
    /// time-indices increasing by exactly 1 in input order.
    pub fn from_states(states: &[LabeledState<S>]) -> Result<Self, StateModelError> {
        let first = states.first().ok_or(StateModelError::EmptySequence)?;
        for e in states {
            if e.label != first.label {
                return Err(StateModelError::LabelMismatch {
                    expected: first.label,
                    found: e.label,
                });
            }
        }
        for w in states.windows(2) {
            if w[1].time != w[0].time + 1 {
                return Err(StateModelError::NonConsecutiveTimes {
                    prev: w[0].time,
                    next: w[1].time,
                });
            }
        }
        Ok(Self {
            label: first.label,
            start_time: first.time,
            states: states.iter().map(|e| e.x.clone()).collect(),
        })
    }

    /// Expands the segment back into per-step labeled states; the exact
    /// inverse of [`TrackSegment::from_states`].
    pub fn to_states(&self) -> Vec<LabeledState<S>> {
        self.states
            .iter()
            .enumerate()
            .map(|(j, x)| LabeledState::new(x.clone(), self.label, self.start_time + j as u32))
            .collect()
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn start_time(&self) -> u32 {
        self.start_time
    }

    /// Time-index of the last state.
    pub fn end_time(&self) -> u32 {
        self.start_time + (self.states.len() as u32 - 1)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false // validated nonempty at construction
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }
}

/// Per-time record of one label across a contiguous time window.
///
/// Entry `j` is the state the label occupies at time `start_time + j`, or
/// `None` where the label is absent. Since the label appears at most once in
/// a labeled set, each entry is a singleton or empty; this is the per-label
/// slice of a time-sequence of labeled sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LTrajectory<S> {
    label: Label,
    start_time: u32,
    entries: Vec<Option<S>>,
}

impl<S: State> LTrajectory<S> {
    pub fn new(label: Label, start_time: u32, entries: Vec<Option<S>>) -> Self {
        Self { label, start_time, entries }
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn start_time(&self) -> u32 {
        self.start_time
    }

    /// Number of time steps covered (present or not).
    pub fn window_len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Option<S>] {
        &self.entries
    }

    /// State at an absolute time-index, if the label is present then.
    pub fn entry(&self, time: u32) -> Option<&S> {
        let j = time.checked_sub(self.start_time)? as usize;
        self.entries.get(j)?.as_ref()
    }

    /// Splits the trajectory into its maximal runs of consecutive presence.
    ///
    /// Segments are returned in increasing time order, all carry this
    /// trajectory's label, their time ranges are pairwise disjoint, and
    /// concatenating their states reproduces exactly the nonempty entries.
    pub fn segments(&self) -> Vec<TrackSegment<S>> {
        let mut out = Vec::new();
        let mut run: Vec<S> = Vec::new();
        let mut run_start = 0u32;
        for (j, e) in self.entries.iter().enumerate() {
            match e {
                Some(x) => {
                    if run.is_empty() {
                        run_start = self.start_time + j as u32;
                    }
                    run.push(x.clone());
                }
                None => {
                    if !run.is_empty() {
                        out.push(TrackSegment {
                            label: self.label,
                            start_time: run_start,
                            states: std::mem::take(&mut run),
                        });
                    }
                }
            }
        }
        if !run.is_empty() {
            out.push(TrackSegment { label: self.label, start_time: run_start, states: run });
        }
        out
    }
}

// ============================================================================
// Tests
// ============================================================================
