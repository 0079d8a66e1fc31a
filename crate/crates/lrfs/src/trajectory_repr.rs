//! Trajectory-level state representations and their failure modes.
//!
//! A *trajectory* is a start time plus a nonempty run of states, one per
//! consecutive time step; a finite set of them ([`SoT`]) describes a whole
//! surveillance window without any notion of identity. The labeled
//! counterpart ([`LabeledSoT`]) is a finite set of track segments whose
//! same-label members are time-disjoint, so a label traces one target
//! through dropouts and reacquisitions.
//!
//! The operations here make the difference between the two representations
//! executable rather than rhetorical: [`strip_labels`] is lossy on purpose
//! (distinct labeled sets can collapse), [`restore_labels`] shows what extra
//! information is needed to undo the loss, [`physical_support`] exhibits
//! distinct unlabeled sets that describe identical physical histories,
//! [`is_physically_consistent`] diagnoses unlabeled sets that no physical
//! scene could have produced, and [`count_interpretations`] counts how many
//! target histories one unlabeled set can legitimately mean.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::state_model::{Label, State, TrackSegment};

/// Default bound on the number of partitions [`count_interpretations`]
/// will enumerate before giving up.
pub const DEFAULT_INTERPRETATION_CAP: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("a trajectory needs at least one state")]
    EmptyStates,
    #[error("no label assigned to the trajectory starting at {start_time} with {len} states")]
    MissingAssignment { start_time: u32, len: usize },
    #[error(
        "label {label} is assigned to time-overlapping segments (starting at {first_start} and {second_start})"
    )]
    OverlappingSegments { label: Label, first_start: u32, second_start: u32 },
    #[error("interpretation enumeration exceeded the cap of {cap} partitions")]
    TooManyInterpretations { cap: usize },
}

// ============================================================================
// Trajectory and sets of trajectories
// ============================================================================

/// An unlabeled trajectory: a start time and the states occupied at
/// consecutive time steps from there on.
///
/// Ordering is derived (start time, then states), giving every collection a
/// canonical arrangement.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trajectory<S> {
    start_time: u32,
    states: Vec<S>,
}

impl<S: State> Trajectory<S> {
    pub fn new(start_time: u32, states: Vec<S>) -> Result<Self, TrajectoryError> {
        if states.is_empty() {
            return Err(TrajectoryError::EmptyStates);
        }
        Ok(Self { start_time, states })
    }

    pub fn start_time(&self) -> u32 {
        self.start_time
    }

    /// Inclusive final time index.
    pub fn end_time(&self) -> u32 {
        self.start_time + (self.states.len() as u32 - 1)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false // states are nonempty by construction
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    /// The `(time, state)` elements the trajectory claims.
    pub fn elements(&self) -> impl Iterator<Item = (u32, &S)> {
        self.states.iter().enumerate().map(|(j, s)| (self.start_time + j as u32, s))
    }

    /// Whether the two time windows share any time index.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.start_time <= other.end_time() && other.start_time <= self.end_time()
    }

    /// The same physical history re-represented as single-step trajectories,
    /// one per element.
    pub fn time_slices(&self) -> Vec<Trajectory<S>> {
        self.elements()
            .map(|(t, s)| Trajectory { start_time: t, states: vec![s.clone()] })
            .collect()
    }
}

impl<S: State> From<TrackSegment<S>> for Trajectory<S> {
    /// Forgets the segment's label, keeping its timing and states.
    fn from(segment: TrackSegment<S>) -> Self {
        let start_time = segment.start_time();
        Self { start_time, states: segment.states().to_vec() }
    }
}

/// A finite set of trajectories, stored sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SoT<S> {
    trajectories: Vec<Trajectory<S>>,
}

impl<S: State> SoT<S> {
    pub fn new(trajectories: impl IntoIterator<Item = Trajectory<S>>) -> Self {
        let mut trajectories: Vec<_> = trajectories.into_iter().collect();
        trajectories.sort();
        trajectories.dedup();
        Self { trajectories }
    }

    pub fn empty() -> Self {
        Self { trajectories: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Trajectories in canonical order. [`count_interpretations`] group
    /// indices refer to this order.
    pub fn iter(&self) -> impl Iterator<Item = &Trajectory<S>> {
        self.trajectories.iter()
    }

    pub fn contains(&self, trajectory: &Trajectory<S>) -> bool {
        self.trajectories.binary_search(trajectory).is_ok()
    }
}

/// A finite set of labeled track segments in which segments sharing a label
/// are pairwise time-disjoint: one target cannot run two segments at once.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LabeledSoT<S> {
    segments: Vec<TrackSegment<S>>,
}

impl<S: State> LabeledSoT<S> {
    pub fn new(
        segments: impl IntoIterator<Item = TrackSegment<S>>,
    ) -> Result<Self, TrajectoryError> {
        let mut segments: Vec<_> = segments.into_iter().collect();
        segments.sort();
        segments.dedup();
        for w in segments.windows(2) {
            // Sorted by (label, start, ..): same-label segments are
            // adjacent and ordered by start time, so only neighbors can
            // witness an overlap first.
            if w[0].label() == w[1].label() && w[1].start_time() <= w[0].end_time() {
                return Err(TrajectoryError::OverlappingSegments {
                    label: w[0].label(),
                    first_start: w[0].start_time(),
                    second_start: w[1].start_time(),
                });
            }
        }
        Ok(Self { segments })
    }

    pub fn empty() -> Self {
        Self { segments: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TrackSegment<S>> {
        self.segments.iter()
    }
}

// ============================================================================
// Label stripping and restoration
// ============================================================================

/// Forgets every segment's label.
///
/// This is deliberately lossy: segments that differ only in label become the
/// same trajectory, so the output can be *smaller* than the input and no
/// inverse exists in general.
pub fn strip_labels<S: State>(labeled: &LabeledSoT<S>) -> SoT<S> {
    SoT::new(labeled.iter().cloned().map(Trajectory::from))
}

/// Reattaches labels to an unlabeled set of trajectories according to an
/// explicit assignment — the side information stripping threw away.
///
/// Distinct trajectories may receive the same label only if their time
/// windows are disjoint (a dropped-and-reacquired track); overlapping
/// same-label trajectories are rejected. With an injective assignment this
/// is a right inverse of [`strip_labels`].
pub fn restore_labels<S: State>(
    sot: &SoT<S>,
    assignment: &BTreeMap<Trajectory<S>, Label>,
) -> Result<LabeledSoT<S>, TrajectoryError> {
    let mut segments = Vec::with_capacity(sot.len());
    for trajectory in sot.iter() {
        let label = assignment.get(trajectory).copied().ok_or_else(|| {
            TrajectoryError::MissingAssignment {
                start_time: trajectory.start_time(),
                len: trajectory.len(),
            }
        })?;
        segments.push(
            TrackSegment::new(label, trajectory.start_time(), trajectory.states().to_vec())
                .expect("trajectory states are nonempty"),
        );
    }
    LabeledSoT::new(segments)
}

// ============================================================================
// Physical support and consistency
// ============================================================================

/// The multiset of `(time, state)` elements the set of trajectories covers,
/// as a map from element to multiplicity.
///
/// Distinct sets of trajectories can have identical support — the support is
/// what a physical scene determines, the decomposition into trajectories is
/// representational surplus.
pub fn physical_support<S: State>(sot: &SoT<S>) -> BTreeMap<(u32, S), usize> {
    let mut support = BTreeMap::new();
    for trajectory in sot.iter() {
        for (t, s) in trajectory.elements() {
            *support.entry((t, s.clone())).or_insert(0) += 1;
        }
    }
    support
}

/// One way a set of trajectories contradicts physics.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConsistencyFinding<S> {
    /// Two distinct trajectories claim the same `(time, state)` element, so
    /// a single target would have to split (or two would have to merge).
    Split { time: u32, state: S },
    /// After chaining unambiguously time-adjacent trajectories, two chains
    /// describe the very same physical trajectory — one history, recorded
    /// twice.
    DuplicatedTrajectory { trajectory: Trajectory<S> },
}

/// Verdict of [`is_physically_consistent`] with every violation found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyReport<S> {
    findings: Vec<ConsistencyFinding<S>>,
}

impl<S: State> ConsistencyReport<S> {
    pub fn is_consistent(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn findings(&self) -> &[ConsistencyFinding<S>] {
        &self.findings
    }
}

/// Checks whether some physical scene could have produced this set of
/// trajectories, reporting every violation found.
///
/// Two rules are checked, matching the two ways a set of trajectories can be
/// impossible. First, no `(time, state)` element may be claimed by two
/// distinct trajectories. Second, after merging chains of trajectories that
/// adjoin in time unambiguously (a unique chain ending at `t` followed by a
/// unique chain starting at `t + 1`), no two chains may be identical
/// records: that would be two distinct instances of one physical trajectory.
/// State comparison is exact — these are grid-valued or otherwise discrete
/// states, not noisy measurements.
pub fn is_physically_consistent<S: State>(sot: &SoT<S>) -> ConsistencyReport<S> {
    let mut findings = Vec::new();

    // A trajectory visits each time index once, so any element with
    // multiplicity >= 2 is shared between distinct trajectories.
    for ((time, state), count) in physical_support(sot) {
        if count >= 2 {
            findings.push(ConsistencyFinding::Split { time, state });
        }
    }

    // Maximal unambiguous chaining, then pairwise record comparison.
    let mut chains: Vec<Trajectory<S>> = sot.iter().cloned().collect();
    loop {
        let mut merge = None;
        for (i, chain) in chains.iter().enumerate() {
            let t = chain.end_time();
            if chains.iter().filter(|c| c.end_time() == t).count() != 1 {
                continue;
            }
            let starters: Vec<usize> = chains
                .iter()
                .enumerate()
                .filter(|(_, c)| c.start_time() == t + 1)
                .map(|(j, _)| j)
                .collect();
            if let [j] = starters[..] {
                merge = Some((i, j));
                break;
            }
        }
        let Some((i, j)) = merge else { break };
        let tail = chains[j].states.clone();
        chains[i].states.extend(tail);
        chains.remove(j);
    }
    chains.sort();
    for w in chains.windows(2) {
        if w[0] == w[1] {
            let finding = ConsistencyFinding::DuplicatedTrajectory { trajectory: w[0].clone() };
            if findings.last() != Some(&finding) {
                findings.push(finding);
            }
        }
    }

    ConsistencyReport { findings }
}

// ============================================================================
// Interpretation counting
// ============================================================================

/// Every admissible reading of a set of trajectories as target histories.
///
/// Each partition groups trajectory indices (into the [`SoT`]'s canonical
/// order); a group collects the segments of one target, so its members must
/// be pairwise time-disjoint. Groups are ordered by smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretations {
    partitions: Vec<Vec<Vec<usize>>>,
}

impl Interpretations {
    pub fn count(&self) -> usize {
        self.partitions.len()
    }

    pub fn partitions(&self) -> &[Vec<Vec<usize>>] {
        &self.partitions
    }
}

/// Enumerates the ways of reading the trajectories as segment histories of
/// individual targets: partitions into groups whose members are pairwise
/// time-disjoint. A count of 1 means the reading is unambiguous.
///
/// The input is assumed physically consistent (see
/// [`is_physically_consistent`]); the count is purely representational — any
/// time-disjoint pair may be read as one target, however implausible the
/// jump, because the representation itself cannot rule it out.
///
/// Uses [`DEFAULT_INTERPRETATION_CAP`]; see [`count_interpretations_capped`].
pub fn count_interpretations<S: State>(sot: &SoT<S>) -> Result<Interpretations, TrajectoryError> {
    count_interpretations_capped(sot, DEFAULT_INTERPRETATION_CAP)
}

/// [`count_interpretations`] with an explicit partition cap.
pub fn count_interpretations_capped<S: State>(
    sot: &SoT<S>,
    cap: usize,
) -> Result<Interpretations, TrajectoryError> {
    let trajectories: Vec<&Trajectory<S>> = sot.iter().collect();
    let n = trajectories.len();
    let disjoint: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| !trajectories[i].overlaps(trajectories[j])).collect())
        .collect();

    fn recurse(
        idx: usize,
        n: usize,
        disjoint: &[Vec<bool>],
        groups: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
        cap: usize,
    ) -> Result<(), TrajectoryError> {
        if idx == n {
            if out.len() == cap {
                return Err(TrajectoryError::TooManyInterpretations { cap });
            }
            out.push(groups.clone());
            return Ok(());
        }
        for g in 0..groups.len() {
            if groups[g].iter().all(|&m| disjoint[m][idx]) {
                groups[g].push(idx);
                recurse(idx + 1, n, disjoint, groups, out, cap)?;
                groups[g].pop();
            }
        }
        groups.push(vec![idx]);
        recurse(idx + 1, n, disjoint, groups, out, cap)?;
        groups.pop();
        Ok(())
    }

    let mut out = Vec::new();
    recurse(0, n, &disjoint, &mut Vec::new(), &mut out, cap)?;
    Ok(Interpretations { partitions: out })
}

// ============================================================================
// Tests
// ============================================================================
