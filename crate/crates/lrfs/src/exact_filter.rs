//! Exact labeled Bayes filter on a finite grid.
//!
//! At desk scale the multitarget Bayes recursion can be carried exactly: the
//! posterior is an explicit map from labeled sets to probabilities, predict
//! enumerates per-target survival/transition and labeled-Bernoulli birth,
//! and update applies the full association-sum measurement likelihood and
//! renormalizes. Nothing is pruned or approximated; the only concession is a
//! hard cap on problem size, since the support grows like
//! `(1 + cells)^labels`.
//!
//! Labels are preserved through prediction (a surviving target keeps its
//! label) and new targets enter with fresh labels `(k, 1..n)` at birth time
//! `k`, so posterior supports consist exclusively of labeled sets and target
//! identity never has to be reconstructed after the fact.
//!
//! Measurements are symbols from a finite alphabet. Because the alphabet is
//! finite, two detections can genuinely produce the same symbol, so a scan is
//! a *multiset* of symbols; [`MeasurementSet`] keeps multiplicity. The
//! likelihood in [`measurement_likelihood`] is the exact probability of a
//! scan under independent per-target detection and Poisson clutter uniform
//! over the alphabet, which keeps simulation and inference consistent with
//! each other down to the last term.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::distributions::{
    cardinality_pmf, CardinalityPmf, DistributionError, LabeledSupport, Pmf,
};
use crate::grid::Cell;
use crate::numeric::{kahan_sum, round_half_up, KahanSum};
use crate::state_model::{LTrajectory, Label, LabeledSet, LabeledState};

/// Tolerance for the posterior-mass sanity check after predict/update.
pub const POSTERIOR_TOLERANCE: f64 = 1e-9;

// ============================================================================
// Errors and limits
// ============================================================================

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    #[error("survival probability {0} outside [0,1]")]
    SurvivalOutOfRange(f64),
    #[error("detection probability {0} outside [0,1]")]
    DetectionOutOfRange(f64),
    #[error("clutter rate {0} must be finite and >= 0")]
    ClutterOutOfRange(f64),
    #[error("transition kernel has {rows} rows for {cells} cells")]
    KernelShape { rows: usize, cells: usize },
    #[error("likelihood table has {rows} rows for {cells} cells")]
    LikelihoodShape { rows: usize, cells: usize },
    #[error("likelihood row {row} covers {got} symbols, expected alphabet size {expected}")]
    AlphabetMismatch { row: usize, got: usize, expected: usize },
    #[error("{what} covers {got} cells, expected {expected}")]
    GridMismatch { what: &'static str, got: usize, expected: usize },
    #[error("birth label {label} collides with a label already in use")]
    LabelCollision { label: Label },
    #[error("filter cap exceeded: {labels} labels (limit {max})")]
    TooManyLabels { labels: usize, max: usize },
    #[error("filter cap exceeded: {cells} cells (limit {max})")]
    TooManyCells { cells: usize, max: usize },
    #[error("filter cap exceeded: step {step} (limit {max})")]
    TooManySteps { step: u32, max: u32 },
    #[error("filter cap exceeded: enumeration needs {entries} table entries (limit {max})")]
    TableTooLarge { entries: u128, max: usize },
    #[error("measurement symbol {symbol} outside alphabet of size {alphabet}")]
    MeasurementOutsideAlphabet { symbol: Meas, alphabet: usize },
    #[error("degenerate update at time {time}: the scan has zero probability under the prior")]
    DegenerateUpdate { time: u32 },
    #[error("posterior mass drifted to {total}, beyond {POSTERIOR_TOLERANCE:e} from 1")]
    NormalizationDrift { total: f64 },
    #[error("posterior atom at time {found} does not match posterior time {expected}")]
    AtomTimeMismatch { expected: u32, found: u32 },
    #[error("posterior atom uses label {label} outside the declared universe")]
    LabelOutsideUniverse { label: Label },
    #[error("estimate {index} carries time {found}, expected {expected}")]
    InvalidEstimate { index: usize, expected: u32, found: u32 },
    #[error(transparent)]
    Support(#[from] DistributionError),
}

/// Hard caps keeping exact enumeration tractable.
///
/// `max_table_entries` bounds the dense tables predict accumulates into
/// (sum over label subsets of `cells^|subset|`); the label/cell/step caps are
/// the coarse per-axis guards. Exceeding any cap is a typed error, never an
/// approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterLimits {
    pub max_labels: usize,
    pub max_cells: usize,
    pub max_steps: u32,
    pub max_table_entries: usize,
}

impl Default for FilterLimits {
    fn default() -> Self {
        Self { max_labels: 6, max_cells: 32, max_steps: 12, max_table_entries: 1 << 22 }
    }
}

// ============================================================================
// Measurements
// ============================================================================

/// One measurement: a symbol index in the finite alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Meas(pub usize);

impl fmt::Display for Meas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One scan: the multiset of symbols received in a single time step.
///
/// Symbols are kept sorted; repeats are meaningful (two detections or
/// clutter returns can coincide on a finite alphabet).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MeasurementSet {
    symbols: Vec<Meas>,
}

impl MeasurementSet {
    pub fn new(symbols: impl IntoIterator<Item = Meas>) -> Self {
        let mut symbols: Vec<_> = symbols.into_iter().collect();
        symbols.sort();
        Self { symbols }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbols in sorted order (repeats included).
    pub fn symbols(&self) -> &[Meas] {
        &self.symbols
    }

    /// Multiplicity of each distinct symbol.
    pub fn counts(&self) -> BTreeMap<Meas, usize> {
        let mut counts = BTreeMap::new();
        for &s in &self.symbols {
            *counts.entry(s).or_insert(0) += 1;
        }
        counts
    }
}

// ============================================================================
// Motion and sensor models
// ============================================================================

/// Row-stochastic transition kernel: row `c` is the distribution of the next
/// cell given the target currently occupies cell `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionKernel {
    rows: Vec<Pmf>,
}

impl TransitionKernel {
    pub fn new(rows: Vec<Pmf>) -> Result<Self, FilterError> {
        let cells = rows.len();
        if cells == 0 {
            return Err(FilterError::KernelShape { rows: 0, cells: 0 });
        }
        for pmf in &rows {
            if pmf.len() != cells {
                return Err(FilterError::KernelShape { rows: cells, cells: pmf.len() });
            }
        }
        Ok(Self { rows })
    }

    /// Deterministic stay-in-place motion.
    pub fn identity(cells: usize) -> Self {
        let rows = (0..cells)
            .map(|c| Pmf::point_mass(Cell(c), cells).expect("cell within grid"))
            .collect();
        Self { rows }
    }

    pub fn cells(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, from: Cell) -> &Pmf {
        &self.rows[from.0]
    }
}

/// One labeled-Bernoulli birth opportunity; its label is assigned by
/// position in the cohort at prediction time.
#[derive(Clone, Debug, PartialEq)]
pub struct BirthComponent {
    pub existence: f64,
    pub spatial: Pmf,
}

impl BirthComponent {
    pub fn new(existence: f64, spatial: Pmf) -> Result<Self, FilterError> {
        if !(existence.is_finite() && (0.0..=1.0).contains(&existence)) {
            return Err(FilterError::SurvivalOutOfRange(existence));
        }
        Ok(Self { existence, spatial })
    }
}

/// Multitarget motion model: independent per-target survival and cell
/// transition, plus a labeled-Bernoulli birth cohort per time step.
///
/// The cohort scheduled at time `k` enters during the prediction into time
/// `k` with the fresh labels `(k, 1), ..., (k, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MotionModel {
    survival: f64,
    kernel: TransitionKernel,
    births: BTreeMap<u32, Vec<BirthComponent>>,
}

impl MotionModel {
    pub fn new(
        survival: f64,
        kernel: TransitionKernel,
        births: BTreeMap<u32, Vec<BirthComponent>>,
    ) -> Result<Self, FilterError> {
        if !(survival.is_finite() && (0.0..=1.0).contains(&survival)) {
            return Err(FilterError::SurvivalOutOfRange(survival));
        }
        for cohort in births.values() {
            for b in cohort {
                if b.spatial.len() != kernel.cells() {
                    return Err(FilterError::GridMismatch {
                        what: "birth spatial pmf",
                        got: b.spatial.len(),
                        expected: kernel.cells(),
                    });
                }
            }
        }
        Ok(Self { survival, kernel, births })
    }

    pub fn survival(&self) -> f64 {
        self.survival
    }

    pub fn kernel(&self) -> &TransitionKernel {
        &self.kernel
    }

    pub fn cells(&self) -> usize {
        self.kernel.cells()
    }

    /// Birth cohort entering at time `k` (empty when none is scheduled).
    pub fn births_at(&self, k: u32) -> &[BirthComponent] {
        self.births.get(&k).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Labels of the cohort entering at time `k`.
    pub fn birth_labels_at(&self, k: u32) -> Vec<Label> {
        (1..=self.births_at(k).len() as u32).map(|i| Label::new(k, i)).collect()
    }
}

/// Sensor model: independent per-target detection, per-cell symbol
/// likelihoods over a finite alphabet, and Poisson clutter uniform over the
/// alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorModel {
    detection: f64,
    likelihood: Vec<Pmf>, // one row per cell, each over the alphabet
    clutter_rate: f64,
    alphabet: usize,
}

impl SensorModel {
    pub fn new(
        detection: f64,
        likelihood: Vec<Pmf>,
        clutter_rate: f64,
        alphabet: usize,
    ) -> Result<Self, FilterError> {
        if !(detection.is_finite() && (0.0..=1.0).contains(&detection)) {
            return Err(FilterError::DetectionOutOfRange(detection));
        }
        if !(clutter_rate.is_finite() && clutter_rate >= 0.0) {
            return Err(FilterError::ClutterOutOfRange(clutter_rate));
        }
        if likelihood.is_empty() || alphabet == 0 {
            return Err(FilterError::LikelihoodShape { rows: likelihood.len(), cells: 0 });
        }
        for (row, pmf) in likelihood.iter().enumerate() {
            if pmf.len() != alphabet {
                return Err(FilterError::AlphabetMismatch {
                    row,
                    got: pmf.len(),
                    expected: alphabet,
                });
            }
        }
        Ok(Self { detection, likelihood, clutter_rate, alphabet })
    }

    /// Noise-free sensor: cell `c` always reports symbol `c`.
    pub fn identity(cells: usize, detection: f64, clutter_rate: f64) -> Result<Self, FilterError> {
        let rows = (0..cells)
            .map(|c| Pmf::point_mass(Cell(c), cells).expect("cell within alphabet"))
            .collect();
        Self::new(detection, rows, clutter_rate, cells)
    }

    /// Same sensor with a different detection probability (for scheduled
    /// dropouts).
    pub fn with_detection(&self, detection: f64) -> Result<Self, FilterError> {
        Self::new(detection, self.likelihood.clone(), self.clutter_rate, self.alphabet)
    }

    pub fn detection(&self) -> f64 {
        self.detection
    }

    pub fn clutter_rate(&self) -> f64 {
        self.clutter_rate
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn cells(&self) -> usize {
        self.likelihood.len()
    }

    /// Symbol distribution for a detection of a target in `cell`.
    pub fn symbol_pmf(&self, cell: Cell) -> &Pmf {
        &self.likelihood[cell.0]
    }
}

// ============================================================================
// Posterior
// ============================================================================

/// Exact filtering posterior: an explicit distribution over labeled sets at
/// one time-index, together with the set of labels ever introduced.
///
/// Invariants: every atom is a labeled set at the posterior's time whose
/// labels come from the universe, probabilities sum to 1 (within
/// [`POSTERIOR_TOLERANCE`]), and sets absent from the support have
/// probability 0. Non-labeled sets cannot even be expressed as atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPosterior {
    time: u32,
    cells: usize,
    support: LabeledSupport,
    universe: BTreeSet<Label>,
}

impl LabeledPosterior {
    /// The state before any measurement: surely empty at time 0.
    pub fn initial(cells: usize) -> Self {
        let mut atoms = BTreeMap::new();
        atoms.insert(LabeledSet::empty(), 1.0);
        Self {
            time: 0,
            cells,
            support: LabeledSupport::new(atoms).expect("a point mass is normalized"),
            universe: BTreeSet::new(),
        }
    }

    /// Builds a posterior from explicit parts, validating every invariant.
    pub fn from_parts(
        time: u32,
        cells: usize,
        atoms: BTreeMap<LabeledSet<Cell>, f64>,
        universe: BTreeSet<Label>,
    ) -> Result<Self, FilterError> {
        for set in atoms.keys() {
            if let Some(t) = set.time() {
                if t != time {
                    return Err(FilterError::AtomTimeMismatch { expected: time, found: t });
                }
            }
            for e in set.iter() {
                if !universe.contains(&e.label) {
                    return Err(FilterError::LabelOutsideUniverse { label: e.label });
                }
                if e.x.0 >= cells {
                    return Err(FilterError::TooManyCells { cells: e.x.0 + 1, max: cells });
                }
            }
        }
        Ok(Self { time, cells, support: LabeledSupport::new(atoms)?, universe })
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    /// Size of the grid the posterior lives on.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// The explicit support table.
    pub fn support(&self) -> &LabeledSupport {
        &self.support
    }

    /// Probability of one labeled set (0 when absent).
    pub fn prob(&self, set: &LabeledSet<Cell>) -> f64 {
        self.support.prob(set)
    }

    /// Every label introduced so far, alive or not.
    pub fn label_universe(&self) -> &BTreeSet<Label> {
        &self.universe
    }

    /// Labels carried by at least one support atom.
    pub fn live_labels(&self) -> BTreeSet<Label> {
        self.support.atoms().flat_map(|(s, _)| s.labels().collect::<Vec<_>>()).collect()
    }

    pub fn cardinality(&self) -> CardinalityPmf {
        cardinality_pmf(&self.support)
    }
}

// ============================================================================
// Prediction
// ============================================================================

/// Advances the posterior one time step: every target independently survives
/// (with the model's survival probability) and moves by the transition
/// kernel keeping its label, and the birth cohort scheduled for the new time
/// enters as an independent labeled-Bernoulli population with fresh labels.
///
/// The result is exact: all `(1 + cells)^labels` outcomes are accumulated
/// (densely, grouped by surviving label set), then renormalized. Fails if a
/// birth label collides with any label ever used, or if any cap in `limits`
/// is exceeded.
pub fn predict(
    posterior: &LabeledPosterior,
    model: &MotionModel,
    limits: &FilterLimits,
) -> Result<LabeledPosterior, FilterError> {
    let cells = posterior.cells();
    if model.cells() != cells {
        return Err(FilterError::GridMismatch {
            what: "transition kernel",
            got: model.cells(),
            expected: cells,
        });
    }
    if cells > limits.max_cells {
        return Err(FilterError::TooManyCells { cells, max: limits.max_cells });
    }
    let next_time = posterior.time() + 1;
    if next_time > limits.max_steps {
        return Err(FilterError::TooManySteps { step: next_time, max: limits.max_steps });
    }

    let births = model.births_at(next_time);
    let birth_labels = model.birth_labels_at(next_time);
    for &label in &birth_labels {
        if posterior.universe.contains(&label) {
            return Err(FilterError::LabelCollision { label });
        }
    }

    // Canonical position of every label that can appear after this step:
    // live labels first, then the new cohort. Birth labels sort after live
    // ones (their birth time is strictly larger), so positions follow the
    // canonical label order and dense-table digits can be appended.
    let live: Vec<Label> = posterior.live_labels().into_iter().collect();
    let total_labels = live.len() + birth_labels.len();
    if total_labels > limits.max_labels {
        return Err(FilterError::TooManyLabels { labels: total_labels, max: limits.max_labels });
    }
    debug_assert!(total_labels < 64, "label positions are tracked in a u64 mask");
    let all_labels: Vec<Label> = live.iter().copied().chain(birth_labels.iter().copied()).collect();

    // Work bound: every subset of the label set gets a dense table of
    // cells^|subset| entries, i.e. (1 + cells)^labels entries in total.
    let mut entries: u128 = 1;
    for _ in 0..total_labels {
        entries = entries.saturating_mul(1 + cells as u128);
    }
    if entries > limits.max_table_entries as u128 {
        return Err(FilterError::TableTooLarge {
            entries,
            max: limits.max_table_entries,
        });
    }

    let pos_of = |label: Label| -> usize {
        all_labels.binary_search(&label).expect("label is live or newborn")
    };

    // --- Phase 1: survival and transition, grouped by surviving label set.
    let survival = model.survival();
    let mut tables: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for (atom, p) in posterior.support.atoms() {
        let members: Vec<(usize, Cell)> =
            atom.iter().map(|e| (pos_of(e.label), e.x)).collect();
        let n = members.len();
        // Iterate survivor subsets of this atom by index bitmask.
        for keep in 0u32..(1u32 << n) {
            let survivors: Vec<(usize, Cell)> = (0..n)
                .filter(|i| keep & (1 << i) != 0)
                .map(|i| members[i])
                .collect();
            let dead = n - survivors.len();
            let base = p * (1.0 - survival).powi(dead as i32) * survival.powi(survivors.len() as i32);
            if base == 0.0 {
                continue;
            }
            let mask: u64 = survivors.iter().map(|&(pos, _)| 1u64 << pos).sum();
            let table = tables
                .entry(mask)
                .or_insert_with(|| vec![0.0; cells.pow(survivors.len() as u32)]);
            // Outer product of kernel rows, written straight into the table.
            // Digit order: label positions ascending, last label fastest.
            accumulate_transitions(model.kernel(), &survivors, 0, 0, base, table);
        }
    }

    // --- Phase 2: fold in birth components one at a time. Each birth label
    // has a larger canonical position than everything already present, so
    // its destination cell is appended as the fastest-varying digit.
    for (b_idx, birth) in births.iter().enumerate() {
        let b_pos = live.len() + b_idx;
        let q = birth.existence;
        let mut next: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for (mask, table) in &tables {
            // Absent branch.
            if q < 1.0 {
                let dst = next.entry(*mask).or_insert_with(|| vec![0.0; table.len()]);
                for (i, w) in table.iter().enumerate() {
                    dst[i] += w * (1.0 - q);
                }
            }
            // Present branch.
            if q > 0.0 {
                let bm = mask | (1u64 << b_pos);
                let dst = next.entry(bm).or_insert_with(|| vec![0.0; table.len() * cells]);
                for (i, w) in table.iter().enumerate() {
                    if *w == 0.0 {
                        continue;
                    }
                    for c in 0..cells {
                        let s = birth.spatial.get(Cell(c));
                        if s > 0.0 {
                            dst[i * cells + c] += w * q * s;
                        }
                    }
                }
            }
        }
        tables = next;
    }

    // --- Phase 3: read the tables back out as canonical labeled sets.
    let mut atoms: BTreeMap<LabeledSet<Cell>, f64> = BTreeMap::new();
    let mut total = KahanSum::new();
    for (mask, table) in &tables {
        let labels: Vec<Label> =
            (0..total_labels).filter(|&i| mask & (1u64 << i) != 0).map(|i| all_labels[i]).collect();
        let m = labels.len();
        for (idx, &w) in table.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            total.add(w);
            let mut rem = idx;
            let mut cells_rev = vec![0usize; m];
            for j in (0..m).rev() {
                cells_rev[j] = rem % cells;
                rem /= cells;
            }
            let elems: Vec<LabeledState<Cell>> = labels
                .iter()
                .zip(&cells_rev)
                .map(|(&l, &c)| LabeledState::new(Cell(c), l, next_time))
                .collect();
            let set = LabeledSet::from_sorted_unchecked(elems);
            *atoms.entry(set).or_insert(0.0) += w;
        }
    }

    let total = total.value();
    if (total - 1.0).abs() > POSTERIOR_TOLERANCE {
        return Err(FilterError::NormalizationDrift { total });
    }
    for w in atoms.values_mut() {
        *w /= total;
    }

    let mut universe = posterior.universe.clone();
    universe.extend(birth_labels);
    Ok(LabeledPosterior {
        time: next_time,
        cells,
        support: LabeledSupport::new(atoms)?,
        universe,
    })
}

/// Recursively writes `base * prod kernel(src_j -> dst_j)` into every
/// destination-cell combination of `survivors[depth..]`.
fn accumulate_transitions(
    kernel: &TransitionKernel,
    survivors: &[(usize, Cell)],
    depth: usize,
    index: usize,
    weight: f64,
    table: &mut [f64],
) {
    if depth == survivors.len() {
        table[index] += weight;
        return;
    }
    let (_, src) = survivors[depth];
    let row = kernel.row(src);
    let cells = kernel.cells();
    for c in 0..cells {
        let t = row.get(Cell(c));
        if t > 0.0 {
            accumulate_transitions(kernel, survivors, depth + 1, index * cells + c, weight * t, table);
        }
    }
}

// ============================================================================
// Measurement likelihood and update
// ============================================================================

/// Exact probability of observing the scan `z` given the labeled set `x`:
/// every target is independently detected (producing one symbol from its
/// cell's likelihood row) and clutter adds a Poisson number of uniform
/// symbols. All detection/association assignments are summed.
pub fn measurement_likelihood(
    sensor: &SensorModel,
    x: &LabeledSet<Cell>,
    z: &MeasurementSet,
) -> f64 {
    let m = z.len();
    let a = sensor.alphabet() as f64;
    let lambda = sensor.clutter_rate();

    // Poisson-multiset prefix: exp(-lambda) / prod_s mult(s)!.
    let mut prefix = (-lambda).exp();
    for (_, count) in z.counts() {
        for k in 2..=count {
            prefix /= k as f64;
        }
    }

    // (lambda / alphabet)^r for r unexplained symbols, r = 0..=m.
    let ratio = lambda / a;
    let mut clutter_pow = vec![1.0; m + 1];
    for r in 1..=m {
        clutter_pow[r] = clutter_pow[r - 1] * ratio;
    }

    let cells: Vec<Cell> = x.iter().map(|e| e.x).collect();
    let mut used = vec![false; m];
    let sum = association_sum(sensor, &cells, z.symbols(), &mut used, 0, &clutter_pow);
    prefix * sum
}

/// Sum over assignments of targets `cells[t..]` to distinct unused symbol
/// instances (or to a missed detection); unassigned instances are priced as
/// clutter at the leaves.
fn association_sum(
    sensor: &SensorModel,
    cells: &[Cell],
    symbols: &[Meas],
    used: &mut [bool],
    t: usize,
    clutter_pow: &[f64],
) -> f64 {
    if t == cells.len() {
        let unexplained = used.iter().filter(|&&u| !u).count();
        return clutter_pow[unexplained];
    }
    let pd = sensor.detection();
    let mut total = (1.0 - pd) * association_sum(sensor, cells, symbols, used, t + 1, clutter_pow);
    if pd > 0.0 {
        let row = sensor.symbol_pmf(cells[t]);
        for j in 0..symbols.len() {
            if !used[j] {
                // Likelihood rows are Pmfs indexed positionally; a symbol
                // indexes them by its alphabet position.
                let lk = row.get(Cell(symbols[j].0));
                if lk > 0.0 {
                    used[j] = true;
                    total += pd * lk * association_sum(sensor, cells, symbols, used, t + 1, clutter_pow);
                    used[j] = false;
                }
            }
        }
    }
    total
}

/// Conditions the posterior on one scan: every atom is reweighted by the
/// exact scan likelihood and the support renormalized.
///
/// A scan with zero probability under the prior (for instance a symbol that
/// no target or clutter source can produce) leaves nothing to normalize and
/// is reported as a degenerate update rather than silently patched.
pub fn update(
    posterior: &LabeledPosterior,
    z: &MeasurementSet,
    sensor: &SensorModel,
) -> Result<LabeledPosterior, FilterError> {
    if sensor.cells() != posterior.cells() {
        return Err(FilterError::LikelihoodShape {
            rows: sensor.cells(),
            cells: posterior.cells(),
        });
    }
    for &s in z.symbols() {
        if s.0 >= sensor.alphabet() {
            return Err(FilterError::MeasurementOutsideAlphabet {
                symbol: s,
                alphabet: sensor.alphabet(),
            });
        }
    }
    let mut atoms: BTreeMap<LabeledSet<Cell>, f64> = BTreeMap::new();
    let mut total = KahanSum::new();
    for (set, p) in posterior.support.atoms() {
        let w = p * measurement_likelihood(sensor, set, z);
        if w > 0.0 {
            total.add(w);
            atoms.insert(set.clone(), w);
        }
    }
    let total = total.value();
    if total <= 0.0 {
        return Err(FilterError::DegenerateUpdate { time: posterior.time() });
    }
    for w in atoms.values_mut() {
        *w /= total;
    }
    Ok(LabeledPosterior {
        time: posterior.time(),
        cells: posterior.cells(),
        support: LabeledSupport::new(atoms)?,
        universe: posterior.universe.clone(),
    })
}

// ============================================================================
// Moment-style summaries and estimators
// ============================================================================

/// First-moment intensity on the grid, with labels marginalized out.
#[derive(Clone, Debug, PartialEq)]
pub struct UnlabeledPhd {
    intensity: Vec<f64>,
}

impl UnlabeledPhd {
    pub fn new(intensity: Vec<f64>) -> Self {
        debug_assert!(intensity.iter().all(|v| v.is_finite() && *v >= 0.0));
        Self { intensity }
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn get(&self, cell: Cell) -> f64 {
        self.intensity.get(cell.0).copied().unwrap_or(0.0)
    }
}

/// Collapses the posterior to its first-moment intensity: the expected
/// number of targets in each cell, identity forgotten.
pub fn phd_from_posterior(posterior: &LabeledPosterior) -> UnlabeledPhd {
    let mut sums = vec![KahanSum::new(); posterior.cells()];
    for (set, p) in posterior.support().atoms() {
        for e in set.iter() {
            sums[e.x.0].add(p);
        }
    }
    UnlabeledPhd::new(sums.iter().map(|s| s.value()).collect())
}

/// Expected total number of targets: the intensity summed over the grid.
pub fn expected_cardinality(phd: &UnlabeledPhd) -> f64 {
    kahan_sum(phd.intensity().iter().copied())
}

/// Classic intensity-peak readout: round the expected count half-up to get
/// `n`, then report the `n` highest-intensity cells (ties broken toward the
/// smaller cell index). Cells with zero intensity are never reported, so the
/// result can be shorter than `n`.
///
/// The output is a plain set of cells: this estimator has no access to
/// identity and cannot say which target is which.
pub fn phd_estimate(phd: &UnlabeledPhd) -> Vec<Cell> {
    let n = round_half_up(expected_cardinality(phd));
    let mut ranked: Vec<(usize, f64)> = phd
        .intensity()
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, v)| v > 0.0)
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut cells: Vec<Cell> = ranked.into_iter().take(n).map(|(c, _)| Cell(c)).collect();
    cells.sort();
    cells
}

/// Cardinality readout used by the CPHD-style estimator: the smallest
/// maximizer of the cardinality distribution.
pub fn cphd_cardinality_estimate(pmf: &CardinalityPmf) -> usize {
    pmf.argmax()
}

/// Joint MAP-style labeled estimate: pick the most probable cardinality
/// (smallest on ties), then the most probable support atom of that size
/// (canonically smallest on ties).
///
/// Unlike [`phd_estimate`] the result is a labeled set, so it plugs directly
/// into trajectory extraction.
pub fn map_labeled_estimate(posterior: &LabeledPosterior) -> LabeledSet<Cell> {
    let n = posterior.cardinality().argmax();
    let mut best: Option<(&LabeledSet<Cell>, f64)> = None;
    for (set, p) in posterior.support().atoms() {
        if set.len() != n {
            continue;
        }
        // Strict improvement keeps the canonically smallest tied atom,
        // because iteration is in canonical order.
        if best.map(|(_, bp)| p > bp).unwrap_or(true) {
            best = Some((set, p));
        }
    }
    best.map(|(s, _)| s.clone()).unwrap_or_else(LabeledSet::empty)
}

/// Reassembles per-label trajectories from a time-sequence of labeled
/// estimates starting at `start_time`.
///
/// Every label that appears anywhere gets one trajectory spanning the whole
/// window, with gaps where the label is absent; trajectories are returned in
/// canonical label order. Estimate `j` must carry time `start_time + j`.
pub fn extract_trajectories(
    start_time: u32,
    estimates: &[LabeledSet<Cell>],
) -> Result<Vec<LTrajectory<Cell>>, FilterError> {
    for (index, set) in estimates.iter().enumerate() {
        let expected = start_time + index as u32;
        if let Some(found) = set.time() {
            if found != expected {
                return Err(FilterError::InvalidEstimate { index, expected, found });
            }
        }
    }
    let labels: BTreeSet<Label> =
        estimates.iter().flat_map(|s| s.labels().collect::<Vec<_>>()).collect();
    Ok(labels
        .into_iter()
        .map(|label| {
            let entries: Vec<Option<Cell>> =
                estimates.iter().map(|s| s.get(label).copied()).collect();
            LTrajectory::new(label, start_time, entries)
        })
        .collect())
}

// ============================================================================
// Tests
// ============================================================================
