//! Distributions on labeled finite sets over a grid.
//!
//! The workhorse is the labeled multi-Bernoulli (LMB) family: each label
//! exists independently with some probability and, when it exists, occupies a
//! grid cell drawn from its own spatial distribution. [`lmb_density`]
//! evaluates the density exactly; [`lmb_normalization`] brute-force
//! enumerates every labeled set the parameters can produce and sums the
//! density, which is the executable proof that the density is correctly
//! normalized (and the oracle other code is tested against).
//!
//! [`labeled_poisson_density`] is here as a diagnostic foil: the natural
//! Poisson-style product density on (cell, label) space. It is positive on
//! sets that repeat a label, so it is *not* a distribution over labeled sets;
//! no Poisson process exists on the labeled space. Code that needs a
//! cautionary nonzero value on an invalid set calls this.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::Cell;
use crate::numeric::{kahan_sum, KahanSum};
use crate::state_model::{Label, LabeledSet, LabeledState, PointSet};

/// Tolerance for validating that an explicitly supplied PMF sums to 1.
pub const PMF_SUM_TOLERANCE: f64 = 1e-12;

/// Tolerance for validating normalization of derived distributions
/// (supports, cardinality PMFs), which accumulate float error over many
/// terms.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

// ============================================================================
// Errors
// ============================================================================

#[derive(Debug, Error, PartialEq)]
pub enum DistributionError {
    #[error("pmf must have at least one entry")]
    PmfEmpty,
    #[error("pmf entry {index} is {value}, expected a finite value in [0,1]")]
    PmfEntryOutOfRange { index: usize, value: f64 },
    #[error("pmf sums to {sum}, expected 1 within {PMF_SUM_TOLERANCE:e}")]
    PmfNotNormalized { sum: f64 },
    #[error("existence probability for label {label} is {value}, expected in [0,1]")]
    ExistenceOutOfRange { label: Label, value: f64 },
    #[error("label {label} appears twice in the parameter set")]
    DuplicateLabel { label: Label },
    #[error("spatial pmf for label {label} covers {got} cells, expected {expected}")]
    GridMismatch { label: Label, got: usize, expected: usize },
    #[error(
        "enumeration bound exceeded: {labels} labels on {cells} cells \
         (limits: {max_labels} labels, {max_cells} cells)"
    )]
    EnumerationBound { labels: usize, cells: usize, max_labels: usize, max_cells: usize },
    #[error("intensity value for label {label} at cell {cell} is {value}, expected finite >= 0")]
    IntensityOutOfRange { label: Label, cell: Cell, value: f64 },
    #[error("support probability {value} for one atom is not a finite value in [0,1]")]
    SupportEntryOutOfRange { value: f64 },
    #[error("support sums to {sum}, expected 1 within {NORMALIZATION_TOLERANCE:e}")]
    SupportNotNormalized { sum: f64 },
}

// ============================================================================
// Probability mass functions on grid cells
// ============================================================================

/// Validated probability mass function over the cells `0..len`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Validates entries in `[0,1]` and a total of 1 within
    /// [`PMF_SUM_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self, DistributionError> {
        if probs.is_empty() {
            return Err(DistributionError::PmfEmpty);
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
                return Err(DistributionError::PmfEntryOutOfRange { index, value });
            }
        }
        let sum = kahan_sum(probs.iter().copied());
        if (sum - 1.0).abs() > PMF_SUM_TOLERANCE {
            return Err(DistributionError::PmfNotNormalized { sum });
        }
        Ok(Self { probs })
    }

    /// Uniform distribution over `len` cells.
    pub fn uniform(len: usize) -> Result<Self, DistributionError> {
        if len == 0 {
            return Err(DistributionError::PmfEmpty);
        }
        Ok(Self { probs: vec![1.0 / len as f64; len] })
    }

    /// All mass on one cell.
    pub fn point_mass(cell: Cell, len: usize) -> Result<Self, DistributionError> {
        if len == 0 {
            return Err(DistributionError::PmfEmpty);
        }
        if cell.0 >= len {
            return Err(DistributionError::PmfEntryOutOfRange { index: cell.0, value: 1.0 });
        }
        let mut probs = vec![0.0; len];
        probs[cell.0] = 1.0;
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // validated nonempty
    }

    /// Probability of `cell`; cells outside the support have probability 0.
    pub fn get(&self, cell: Cell) -> f64 {
        self.probs.get(cell.0).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Draws one cell by inverse-CDF with a single uniform variate, so the
    /// stream consumption (and therefore the result for a seeded generator)
    /// is identical across platforms.
    pub fn sample(&self, rng: &mut impl Rng) -> Cell {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return Cell(i);
            }
        }
        // Rounding can leave acc marginally below 1; fall back to the last
        // cell that carries mass.
        let last = self.probs.iter().rposition(|&p| p > 0.0).expect("pmf sums to 1");
        Cell(last)
    }
}

// ============================================================================
// Labeled multi-Bernoulli parameters
// ============================================================================

/// One labeled Bernoulli component: the track exists with probability
/// `existence` and, when it does, occupies a cell drawn from `spatial`.
#[derive(Clone, Debug, PartialEq)]
pub struct LmbComponent {
    pub label: Label,
    pub existence: f64,
    pub spatial: Pmf,
}

impl LmbComponent {
    pub fn new(label: Label, existence: f64, spatial: Pmf) -> Result<Self, DistributionError> {
        if !(existence.is_finite() && (0.0..=1.0).contains(&existence)) {
            return Err(DistributionError::ExistenceOutOfRange { label, value: existence });
        }
        Ok(Self { label, existence, spatial })
    }
}

/// Parameters of a labeled multi-Bernoulli distribution: a finite label set
/// with per-label existence probabilities and spatial distributions, all over
/// the same grid.
#[derive(Clone, Debug, PartialEq)]
pub struct LmbParams {
    components: Vec<LmbComponent>, // sorted by label, labels distinct
    cells: usize,
}

impl LmbParams {
    pub fn new(components: Vec<LmbComponent>) -> Result<Self, DistributionError> {
        let mut components = components;
        components.sort_by_key(|c| c.label);
        for w in components.windows(2) {
            if w[0].label == w[1].label {
                return Err(DistributionError::DuplicateLabel { label: w[0].label });
            }
        }
        let cells = components.first().map(|c| c.spatial.len()).unwrap_or(0);
        for c in &components {
            if c.spatial.len() != cells {
                return Err(DistributionError::GridMismatch {
                    label: c.label,
                    got: c.spatial.len(),
                    expected: cells,
                });
            }
        }
        Ok(Self { components, cells })
    }

    /// Components in canonical label order.
    pub fn components(&self) -> &[LmbComponent] {
        &self.components
    }

    /// Number of grid cells the spatial distributions cover (0 when there
    /// are no components).
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn component(&self, label: Label) -> Option<&LmbComponent> {
        self.components
            .binary_search_by_key(&label, |c| c.label)
            .ok()
            .map(|i| &self.components[i])
    }
}

/// Bounds guarding enumeration against combinatorial blowup: summing over
/// every label subset costs `(1 + cells)^labels` density evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumerationLimits {
    pub max_labels: usize,
    pub max_cells: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self { max_labels: 6, max_cells: 32 }
    }
}

impl EnumerationLimits {
    fn check(&self, labels: usize, cells: usize) -> Result<(), DistributionError> {
        if labels > self.max_labels || cells > self.max_cells {
            return Err(DistributionError::EnumerationBound {
                labels,
                cells,
                max_labels: self.max_labels,
                max_cells: self.max_cells,
            });
        }
        Ok(())
    }
}

// ============================================================================
// LMB density, normalization oracle, sampling
// ============================================================================

/// Exact labeled multi-Bernoulli density of a finite set of (label, cell)
/// pairs.
///
/// The value is zero unless the set is labeled (distinct labels) and every
/// label belongs to the parameter set; otherwise it is the product of
/// `existence * spatial(cell)` over members and `1 - existence` over the
/// parameter labels that are absent.
pub fn lmb_density(params: &LmbParams, x: &PointSet<Cell>) -> f64 {
    if !x.is_labeled() {
        return 0.0;
    }
    let mut density = 1.0;
    for (label, cell) in x.iter() {
        match params.component(*label) {
            // A label outside the parameter set cannot exist.
            None => return 0.0,
            Some(c) => density *= c.existence * c.spatial.get(*cell),
        }
    }
    let present = x.labels();
    for c in params.components() {
        if !present.contains(&c.label) {
            density *= 1.0 - c.existence;
        }
    }
    density
}

/// Visits every finite set of (label, cell) pairs with labels drawn (without
/// repetition) from the parameter label set and cells from the grid, in a
/// fixed deterministic order.
fn for_each_labeled_set(
    params: &LmbParams,
    mut visit: impl FnMut(&[(Label, Cell)]),
) {
    let labels: Vec<Label> = params.components().iter().map(|c| c.label).collect();
    let n = labels.len();
    let cells = params.cells();
    let mut pairs: Vec<(Label, Cell)> = Vec::with_capacity(n);
    for mask in 0u32..(1u32 << n) {
        let chosen: Vec<Label> =
            (0..n).filter(|i| mask & (1 << i) != 0).map(|i| labels[i]).collect();
        let m = chosen.len();
        if m == 0 {
            visit(&[]);
            continue;
        }
        // Mixed-radix counter over cell assignments for the chosen labels.
        let mut assign = vec![0usize; m];
        loop {
            pairs.clear();
            for (j, &l) in chosen.iter().enumerate() {
                pairs.push((l, Cell(assign[j])));
            }
            visit(&pairs);
            let mut j = m;
            loop {
                if j == 0 {
                    break;
                }
                j -= 1;
                assign[j] += 1;
                if assign[j] < cells {
                    break;
                }
                assign[j] = 0;
            }
            if assign.iter().all(|&a| a == 0) {
                break;
            }
        }
    }
}

/// Brute-force normalization check: enumerates **every** labeled set the
/// parameters can produce, evaluates [`lmb_density`] on each, and returns the
/// compensated sum (which must be 1 for a correctly normalized density).
///
/// This is deliberately the slow, independent route; it exists to validate
/// the density, not to be fast. The enumeration costs
/// `(1 + cells)^labels` evaluations and refuses to start beyond `limits`.
pub fn lmb_normalization(
    params: &LmbParams,
    limits: &EnumerationLimits,
) -> Result<f64, DistributionError> {
    limits.check(params.components().len(), params.cells())?;
    let mut total = KahanSum::new();
    for_each_labeled_set(params, |pairs| {
        total.add(lmb_density(params, &PointSet::new(pairs.iter().copied())));
    });
    Ok(total.value())
}

/// Full enumeration of an LMB distribution into an explicit support table,
/// with every element stamped with `time`.
pub fn lmb_support(
    params: &LmbParams,
    time: u32,
    limits: &EnumerationLimits,
) -> Result<LabeledSupport, DistributionError> {
    limits.check(params.components().len(), params.cells())?;
    let mut atoms = BTreeMap::new();
    for_each_labeled_set(params, |pairs| {
        let p = lmb_density(params, &PointSet::new(pairs.iter().copied()));
        if p > 0.0 {
            let set = LabeledSet::new(
                pairs.iter().map(|&(l, c)| LabeledState::new(c, l, time)),
            )
            .expect("enumerated labels are distinct");
            atoms.insert(set, p);
        }
    });
    LabeledSupport::new(atoms)
}

/// Draws one labeled set from the LMB distribution: each label is included
/// independently with its existence probability and placed by its spatial
/// distribution. Elements are stamped with `time`.
///
/// Fully deterministic for a fixed seed (ChaCha8 stream, fixed label order,
/// single-variate inverse-CDF placement).
pub fn lmb_sample(params: &LmbParams, time: u32, seed: u64) -> LabeledSet<Cell> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lmb_sample_with(params, time, &mut rng)
}

/// As [`lmb_sample`], drawing from a caller-supplied generator (for bulk
/// sampling without reseeding).
pub fn lmb_sample_with(
    params: &LmbParams,
    time: u32,
    rng: &mut impl Rng,
) -> LabeledSet<Cell> {
    let mut elems = Vec::new();
    for c in params.components() {
        if rng.random_bool(c.existence) {
            elems.push(LabeledState::new(c.spatial.sample(rng), c.label, time));
        }
    }
    LabeledSet::new(elems).expect("parameter labels are distinct")
}

// ============================================================================
// Poisson-style density on the labeled space (diagnostic)
// ============================================================================

/// Nonnegative intensity on (label, cell) space, represented sparsely;
/// absent entries are zero.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct IntensityFunction {
    values: BTreeMap<(Label, Cell), f64>,
}

impl IntensityFunction {
    pub fn new(
        values: impl IntoIterator<Item = ((Label, Cell), f64)>,
    ) -> Result<Self, DistributionError> {
        let mut map = BTreeMap::new();
        for ((label, cell), value) in values {
            if !(value.is_finite() && value >= 0.0) {
                return Err(DistributionError::IntensityOutOfRange { label, cell, value });
            }
            map.insert((label, cell), value);
        }
        Ok(Self { values: map })
    }

    /// Intensity at one (label, cell) point.
    pub fn get(&self, label: Label, cell: Cell) -> f64 {
        self.values.get(&(label, cell)).copied().unwrap_or(0.0)
    }

    /// Total mass: the sum of the intensity over the whole (label, cell)
    /// space.
    pub fn total_mass(&self) -> f64 {
        kahan_sum(self.values.values().copied())
    }
}

/// Poisson-style product density on the labeled space:
/// `exp(-total_mass) * product of D over the set's elements`.
///
/// **This is not a labeled-set distribution**, and that is the point: it
/// assigns strictly positive probability to sets that repeat a label (for
/// instance two cells sharing one label), so no Poisson process exists on
/// the space of labeled sets. It is provided as the executable witness of
/// that fact, not as a usable model.
pub fn labeled_poisson_density(intensity: &IntensityFunction, x: &PointSet<Cell>) -> f64 {
    let mut density = (-intensity.total_mass()).exp();
    for (label, cell) in x.iter() {
        density *= intensity.get(*label, *cell);
    }
    density
}

// ============================================================================
// Explicit supports and cardinality
// ============================================================================

/// Enumeration-backed distribution over labeled sets: an explicit map from
/// canonical sets to probabilities. Atoms with probability zero are absent.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSupport {
    atoms: BTreeMap<LabeledSet<Cell>, f64>,
}

impl LabeledSupport {
    /// Validates entries in `[0,1]` and a total of 1 within
    /// [`NORMALIZATION_TOLERANCE`].
    pub fn new(atoms: BTreeMap<LabeledSet<Cell>, f64>) -> Result<Self, DistributionError> {
        for &p in atoms.values() {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(DistributionError::SupportEntryOutOfRange { value: p });
            }
        }
        let sum = kahan_sum(atoms.values().copied());
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(DistributionError::SupportNotNormalized { sum });
        }
        let atoms = atoms.into_iter().filter(|&(_, p)| p > 0.0).collect();
        Ok(Self { atoms })
    }

    /// Atoms in canonical set order.
    pub fn atoms(&self) -> impl Iterator<Item = (&LabeledSet<Cell>, f64)> {
        self.atoms.iter().map(|(s, &p)| (s, p))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Probability of one set (zero when absent).
    pub fn prob(&self, set: &LabeledSet<Cell>) -> f64 {
        self.atoms.get(set).copied().unwrap_or(0.0)
    }
}

/// Distribution of `|X|` (number of targets) with nonnegative entries
/// summing to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct CardinalityPmf {
    probs: Vec<f64>,
}

impl CardinalityPmf {
    pub fn new(probs: Vec<f64>) -> Result<Self, DistributionError> {
        // Entries are typically sums of atom probabilities, so a group can
        // exceed 1 by rounding noise even when the source distribution is
        // exactly normalized; extend the same tolerance used for the total.
        for (index, &value) in probs.iter().enumerate() {
            if !(value.is_finite() && (0.0..=1.0 + NORMALIZATION_TOLERANCE).contains(&value)) {
                return Err(DistributionError::PmfEntryOutOfRange { index, value });
            }
        }
        let sum = kahan_sum(probs.iter().copied());
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(DistributionError::SupportNotNormalized { sum });
        }
        let mut probs = probs;
        while probs.len() > 1 && probs.last() == Some(&0.0) {
            probs.pop();
        }
        if probs.is_empty() {
            probs.push(1.0); // the empty-support edge: all mass on n = 0
        }
        Ok(Self { probs })
    }

    /// Probability of exactly `n` targets.
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    /// Largest cardinality with recorded (possibly zero) probability.
    pub fn max_cardinality(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// First moment: the expected number of targets.
    pub fn mean(&self) -> f64 {
        kahan_sum(self.probs.iter().enumerate().map(|(n, &p)| n as f64 * p))
    }

    /// Smallest maximizer of the PMF (the canonical MAP cardinality).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (n, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = n;
            }
        }
        best
    }
}

/// Cardinality distribution of an explicit support: groups atom
/// probabilities by set size.
pub fn cardinality_pmf(support: &LabeledSupport) -> CardinalityPmf {
    let max_n = support.atoms().map(|(s, _)| s.len()).max().unwrap_or(0);
    let mut sums = vec![KahanSum::new(); max_n + 1];
    for (set, p) in support.atoms() {
        sums[set.len()].add(p);
    }
    CardinalityPmf::new(sums.iter().map(|s| s.value()).collect())
        .expect("grouping a normalized support preserves normalization")
}

// ============================================================================
// Tests
// ============================================================================
