//! Distances between multitarget states, and why they need sets.
//!
//! [`set_distance`] is an optimal-assignment (OSPA-style) metric between
//! labeled sets: per-pair cost is kinematic distance plus a label-mismatch
//! penalty, cut off at `c`; unmatched targets are charged the cutoff;
//! the whole thing is normalized by the larger cardinality. It is a genuine
//! metric on canonical set representations, which is exactly what ordered
//! representations cannot offer: [`tuple_representation_demo`] takes one
//! physical population, reorders it, and reports a positive componentwise
//! distance between two encodings of the *same* state alongside a set
//! distance of exactly zero. A "distance" that separates one state from
//! itself is not a function of the state — the demo makes that failure a
//! reproducible artifact rather than an argument.

use thiserror::Error;

use crate::state_model::{KinematicState, LabeledSet, LabeledState, StateModelError};

/// Exhaustive assignment enumeration is used up to this cardinality; the
/// polynomial assignment solver takes over above it.
const EXHAUSTIVE_ASSIGNMENT_LIMIT: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("cutoff {0} must be finite and > 0")]
    BadCutoff(f64),
    #[error("order {0} must be finite and >= 1")]
    BadOrder(f64),
    #[error("label penalty {penalty} must lie in [0, cutoff = {cutoff}]")]
    BadLabelPenalty { penalty: f64, cutoff: f64 },
    #[error("kinematic dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("indices are not a permutation of 0..{len}")]
    NotAPermutation { len: usize },
    #[error("permutation over {permutation} elements applied to {population}")]
    PermutationSizeMismatch { permutation: usize, population: usize },
    #[error("population elements must be pairwise distinct")]
    PopulationNotDistinct,
    #[error(transparent)]
    MalformedSet(#[from] StateModelError),
}

// ============================================================================
// Parameters
// ============================================================================

/// Parameters of the assignment metric: cutoff `c` (also the per-target
/// charge for cardinality mismatch), order `p`, and the extra cost `alpha`
/// added when matched targets carry different labels.
///
/// `alpha <= c` keeps the label penalty from exceeding what an unmatched
/// target would cost, which is required for the triangle inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssignmentMetricParams {
    cutoff: f64,
    order: f64,
    label_penalty: f64,
}

impl AssignmentMetricParams {
    pub fn new(cutoff: f64, order: f64, label_penalty: f64) -> Result<Self, MetricsError> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(MetricsError::BadCutoff(cutoff));
        }
        if !(order.is_finite() && order >= 1.0) {
            return Err(MetricsError::BadOrder(order));
        }
        if !(label_penalty.is_finite() && (0.0..=cutoff).contains(&label_penalty)) {
            return Err(MetricsError::BadLabelPenalty { penalty: label_penalty, cutoff });
        }
        Ok(Self { cutoff, order, label_penalty })
    }

    /// Kinematic-only variant: labels are ignored entirely (`alpha = 0`).
    pub fn kinematic_only(self) -> Self {
        Self { label_penalty: 0.0, ..self }
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn label_penalty(&self) -> f64 {
        self.label_penalty
    }
}

impl Default for AssignmentMetricParams {
    fn default() -> Self {
        Self { cutoff: 10.0, order: 1.0, label_penalty: 2.0 }
    }
}

// ============================================================================
// Set distance
// ============================================================================

fn euclidean(a: &KinematicState, b: &KinematicState) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Per-pair cost: kinematic distance, plus the label penalty if the labels
/// differ, cut off at `c`. Cutting at `c` is what keeps the per-pair cost a
/// bounded metric and the whole construction a metric.
fn pair_cost(
    a: &LabeledState<KinematicState>,
    b: &LabeledState<KinematicState>,
    params: &AssignmentMetricParams,
) -> f64 {
    let penalty = if a.label == b.label { 0.0 } else { params.label_penalty };
    (euclidean(&a.x, &b.x) + penalty).min(params.cutoff)
}

/// Minimum total cost over assignments of all rows to distinct columns
/// (square matrix), by brute-force permutation enumeration.
fn min_assignment_exhaustive(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    fn recurse(cost: &[Vec<f64>], row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if row == cost.len() {
            *best = acc;
            return;
        }
        for col in 0..used.len() {
            if !used[col] {
                used[col] = true;
                recurse(cost, row + 1, used, acc + cost[row][col], best);
                used[col] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    recurse(cost, 0, &mut vec![false; n], 0.0, &mut best);
    if n == 0 {
        0.0
    } else {
        best
    }
}

/// Minimum total assignment cost for a square matrix in O(n^3), via the
/// standard potentials-and-augmenting-paths scheme.
fn min_assignment_polynomial(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    if n == 0 {
        return 0.0;
    }
    // 1-indexed arrays; p[j] is the row matched to column j, 0 if free.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[p[j] - 1][j - 1]).sum()
}

/// Optimal-assignment distance between two labeled sets.
///
/// With `m` the larger and `n` the smaller cardinality, the distance is
/// `((min-assignment sum of pair costs^p + (m - n) * c^p) / m)^(1/p)`:
/// matched targets pay kinematic distance plus the label penalty (cut off at
/// `c`), unmatched targets pay the cutoff, and the result is normalized per
/// target. Two empty sets are at distance 0. Symmetric, zero exactly on
/// equal sets, and triangle-respecting, so estimates can be ranked by it.
pub fn set_distance(
    a: &LabeledSet<KinematicState>,
    b: &LabeledSet<KinematicState>,
    params: &AssignmentMetricParams,
) -> Result<f64, MetricsError> {
    let dims: Vec<usize> = a.iter().chain(b.iter()).map(|e| e.x.dim()).collect();
    if let Some(&first) = dims.first() {
        if let Some(&other) = dims.iter().find(|&&d| d != first) {
            return Err(MetricsError::DimensionMismatch { left: first, right: other });
        }
    }

    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let m = large.len();
    let n = small.len();
    if m == 0 {
        return Ok(0.0);
    }

    let c_p = params.cutoff.powf(params.order);
    let small_elems: Vec<_> = small.iter().collect();
    let large_elems: Vec<_> = large.iter().collect();
    // m x m matrix: real rows are the smaller set's elements, dummy rows
    // charge the cutoff whatever they match.
    let cost: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    if i < n {
                        pair_cost(small_elems[i], large_elems[j], params).powf(params.order)
                    } else {
                        c_p
                    }
                })
                .collect()
        })
        .collect();

    let total = if m <= EXHAUSTIVE_ASSIGNMENT_LIMIT {
        min_assignment_exhaustive(&cost)
    } else {
        min_assignment_polynomial(&cost)
    };
    Ok((total / m as f64).powf(1.0 / params.order))
}

// ============================================================================
// Tuple-representation demonstration
// ============================================================================

/// A validated permutation of `0..len`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    indices: Vec<usize>,
}

impl Permutation {
    pub fn new(indices: Vec<usize>) -> Result<Self, MetricsError> {
        let len = indices.len();
        let mut seen = vec![false; len];
        for &i in &indices {
            if i >= len || seen[i] {
                return Err(MetricsError::NotAPermutation { len });
            }
            seen[i] = true;
        }
        Ok(Self { indices })
    }

    pub fn identity(len: usize) -> Self {
        Self { indices: (0..len).collect() }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.indices.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// The reordered sequence: element `i` of the result is `items[π(i)]`.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Result<Vec<T>, MetricsError> {
        if items.len() != self.indices.len() {
            return Err(MetricsError::PermutationSizeMismatch {
                permutation: self.indices.len(),
                population: items.len(),
            });
        }
        Ok(self.indices.iter().map(|&i| items[i].clone()).collect())
    }
}

/// What [`tuple_representation_demo`] found for one population and one
/// permutation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TupleDemoReport {
    /// Componentwise distance between the original ordering and the
    /// permuted ordering — two encodings of the same physical population.
    pub tuple_distance: f64,
    /// [`set_distance`] between the set forms of the same two orderings.
    pub set_distance: f64,
}

/// Measures one physical population against a reordering of itself, both as
/// ordered tuples (componentwise) and as sets.
///
/// The set distance is always exactly 0 — the set form does not depend on
/// the ordering. The componentwise distance is positive for any
/// non-identity permutation that actually moves distinct elements, so as a
/// "distance between states" it distinguishes a state from itself: ordered
/// representations admit no well-defined multitarget metric, and this report
/// is the executable witness.
///
/// The population must be a valid labeled set (one time index, distinct
/// labels) with pairwise distinct elements.
pub fn tuple_representation_demo(
    population: &[LabeledState<KinematicState>],
    permutation: &Permutation,
    params: &AssignmentMetricParams,
) -> Result<TupleDemoReport, MetricsError> {
    for (i, a) in population.iter().enumerate() {
        if population[i + 1..].contains(a) {
            return Err(MetricsError::PopulationNotDistinct);
        }
    }
    let reordered = permutation.apply(population)?;

    // Componentwise ("the i-th entry against the i-th entry"), with the
    // same per-pair cost and normalization as the set metric so the two
    // numbers are directly comparable.
    let n = population.len();
    let tuple_distance = if n == 0 {
        0.0
    } else {
        let total: f64 = population
            .iter()
            .zip(&reordered)
            .map(|(a, b)| pair_cost(a, b, params).powf(params.order))
            .sum();
        (total / n as f64).powf(1.0 / params.order)
    };

    let as_set = LabeledSet::new(population.iter().cloned())?;
    let reordered_set = LabeledSet::new(reordered)?;
    let set_distance = set_distance(&as_set, &reordered_set, params)?;

    Ok(TupleDemoReport { tuple_distance, set_distance })
}

// ============================================================================
// Tests
// ============================================================================
