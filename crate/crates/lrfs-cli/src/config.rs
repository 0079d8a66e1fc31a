//! Scenario configuration: a human-readable TOML document parsed into fully
//! constructed model objects.
//!
//! Parsing has two failure layers. Syntax and type errors surface as
//! [`ConfigError::Syntax`] with the line/column the TOML reader reports.
//! Semantic problems (out-of-range probabilities, shape mismatches, missing
//! required sections) are collected **exhaustively** into
//! [`ConfigError::Invalid`], one [`Violation`] per problem, each carrying the
//! field path it refers to.
//!
//! A minimal configuration needs only the grid size and the horizon:
//!
//! ```toml
//! [grid]
//! cells = 8
//!
//! [time]
//! horizon = 8
//! ```
//!
//! Everything else defaults to a noiseless, birthless scenario: survival 1,
//! identity motion, perfect detection, zero clutter, MAP estimator, default
//! metric parameters, seed 0.

use std::collections::BTreeMap;
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use lrfs::distributions::Pmf;
use lrfs::exact_filter::{
    BirthComponent, FilterLimits, MotionModel, SensorModel, TransitionKernel,
};
use lrfs::metrics::AssignmentMetricParams;
use lrfs::{Cell, Grid};

// ============================================================================
// Errors
// ============================================================================

/// One semantic violation: where, and what is wrong.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    /// Malformed TOML or a type mismatch; the text carries line/column.
    #[error("{0}")]
    Syntax(String),
    /// Well-formed document with semantic problems; every violation found is
    /// listed, not just the first.
    #[error("{}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(violations: &[Violation]) -> String {
    let lines: Vec<String> = violations.iter().map(|v| format!("  - {v}")).collect();
    format!("invalid configuration ({} violation(s)):\n{}", violations.len(), lines.join("\n"))
}

// ============================================================================
// Raw (serde) layer — everything optional, unknown keys rejected
// ============================================================================

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    grid: Option<RawGrid>,
    time: Option<RawTime>,
    motion: Option<RawMotion>,
    sensor: Option<RawSensor>,
    #[serde(default)]
    birth: Vec<RawBirth>,
    estimator: Option<RawEstimator>,
    metric: Option<RawMetric>,
    limits: Option<RawLimits>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    cells: Option<usize>,
    dimension: Option<usize>,
    spacing: Option<f64>,
    origin: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    horizon: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMotion {
    survival: Option<f64>,
    kernel: Option<RawKernel>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawKernel {
    /// Targets never move.
    Identity,
    /// Stay with probability `stay`; otherwise step to an axis neighbor,
    /// reflecting at the boundary.
    RandomWalk { stay: f64 },
    /// Full row-stochastic matrix, one row per source cell.
    Explicit { rows: Vec<Vec<f64>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    detection: Option<f64>,
    clutter_rate: Option<f64>,
    likelihood: Option<RawLikelihood>,
    #[serde(default)]
    detection_override: Vec<RawDetectionOverride>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawLikelihood {
    /// Symbol j is reported exactly when the target occupies cell j.
    Identity,
    /// The true cell's symbol with probability `correct`; any other symbol
    /// uniformly otherwise.
    Confusion { correct: f64 },
    /// Full likelihood matrix: one row per cell, `alphabet` columns.
    Explicit { rows: Vec<Vec<f64>>, alphabet: usize },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetectionOverride {
    steps: Vec<u32>,
    detection: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBirth {
    time: Option<u32>,
    cells: Vec<usize>,
    existence: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEstimator {
    kind: Option<EstimatorKind>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// Joint MAP labeled estimate from the explicit posterior.
    Map,
    /// Intensity-peak readout (expected count, then peaks); label-blind.
    Phd,
    /// Cardinality-mode count with intensity peaks; label-blind.
    Cphd,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Map => "map",
            EstimatorKind::Phd => "phd",
            EstimatorKind::Cphd => "cphd",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    cutoff: Option<f64>,
    order: Option<f64>,
    label_penalty: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLimits {
    max_labels: Option<usize>,
    max_cells: Option<usize>,
    max_steps: Option<u32>,
    max_table_entries: Option<usize>,
}

// ============================================================================
// Resolved configuration
// ============================================================================

/// A fully validated scenario: every model object is already constructed.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub grid: Grid,
    pub horizon: u32,
    pub seed: u64,
    pub motion: MotionModel,
    pub sensor: SensorModel,
    /// Per-step detection probability overrides (time index -> p_D).
    pub detection_schedule: BTreeMap<u32, f64>,
    pub estimator: EstimatorKind,
    pub metric: AssignmentMetricParams,
    pub limits: FilterLimits,
}

impl ScenarioConfig {
    /// Detection probability in force at time step `k`.
    pub fn detection_at(&self, k: u32) -> f64 {
        self.detection_schedule.get(&k).copied().unwrap_or_else(|| self.sensor.detection())
    }
}

struct Check {
    violations: Vec<Violation>,
}

impl Check {
    fn new() -> Self {
        Self { violations: Vec::new() }
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { path: path.into(), message: message.into() });
    }

    /// Registers a violation unless `p` is a probability.
    fn probability(&mut self, path: &str, p: f64) -> bool {
        if p.is_finite() && (0.0..=1.0).contains(&p) {
            true
        } else {
            self.push(path, format!("probability out of range (got {p})"));
            false
        }
    }
}

/// Parses and validates a scenario document.
///
/// Returns the resolved configuration, or a syntax error with position, or
/// the complete list of semantic violations.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string().trim().to_string()))?;
    let mut check = Check::new();

    // ---- grid ----------------------------------------------------------
    let cells_per_axis = match raw.grid.as_ref().and_then(|g| g.cells) {
        Some(0) => {
            check.push("grid.cells", "must be at least 1");
            1
        }
        Some(n) => n,
        None => {
            check.push("grid.cells", "required field missing");
            1
        }
    };
    let dimension = match raw.grid.as_ref().and_then(|g| g.dimension) {
        Some(0) => {
            check.push("grid.dimension", "must be at least 1");
            1
        }
        Some(d) => d,
        None => 1,
    };
    let spacing = raw.grid.as_ref().and_then(|g| g.spacing).unwrap_or(1.0);
    if !(spacing.is_finite() && spacing > 0.0) {
        check.push("grid.spacing", format!("must be positive and finite (got {spacing})"));
    }
    let mut origin = raw
        .grid
        .as_ref()
        .and_then(|g| g.origin.clone())
        .unwrap_or_else(|| vec![0.0; dimension]);
    if origin.len() != dimension {
        check.push(
            "grid.origin",
            format!("expected {dimension} coordinate(s), got {}", origin.len()),
        );
        origin = vec![0.0; dimension]; // keep downstream checks on the intended shape
    }
    if let Some(bad) = origin.iter().find(|c| !c.is_finite()) {
        check.push("grid.origin", format!("coordinates must be finite (got {bad})"));
        origin = vec![0.0; dimension];
    }
    let safe_spacing = if spacing.is_finite() && spacing > 0.0 { spacing } else { 1.0 };
    let grid = Grid::new(vec![cells_per_axis; dimension], origin, safe_spacing)
        .expect("grid inputs sanitized above");
    let total_cells = grid.len();

    // ---- time ----------------------------------------------------------
    let horizon = match raw.time.as_ref().and_then(|t| t.horizon) {
        Some(0) => {
            check.push("time.horizon", "must be at least 1");
            1
        }
        Some(h) => h,
        None => {
            check.push("time.horizon", "required field missing");
            1
        }
    };

    // ---- limits --------------------------------------------------------
    let defaults = FilterLimits::default();
    let limits = match &raw.limits {
        Some(l) => FilterLimits {
            max_labels: l.max_labels.unwrap_or(defaults.max_labels),
            max_cells: l.max_cells.unwrap_or(defaults.max_cells),
            max_steps: l.max_steps.unwrap_or(defaults.max_steps),
            max_table_entries: l.max_table_entries.unwrap_or(defaults.max_table_entries),
        },
        None => defaults,
    };

    // ---- motion --------------------------------------------------------
    let survival = raw.motion.as_ref().and_then(|m| m.survival).unwrap_or(1.0);
    check.probability("motion.survival", survival);

    let kernel = match raw.motion.as_ref().and_then(|m| m.kernel.as_ref()) {
        None | Some(RawKernel::Identity) => TransitionKernel::identity(total_cells),
        Some(RawKernel::RandomWalk { stay }) => {
            if check.probability("motion.kernel.stay", *stay) {
                random_walk_kernel(&grid, *stay)
            } else {
                TransitionKernel::identity(total_cells)
            }
        }
        Some(RawKernel::Explicit { rows }) => {
            match explicit_kernel(rows, total_cells, &mut check) {
                Some(k) => k,
                None => TransitionKernel::identity(total_cells),
            }
        }
    };

    // ---- births --------------------------------------------------------
    let mut births: BTreeMap<u32, Vec<BirthComponent>> = BTreeMap::new();
    for (i, b) in raw.birth.iter().enumerate() {
        let time = match b.time {
            Some(t) if t >= 1 => t,
            Some(t) => {
                check.push(format!("birth[{i}].time"), format!("must be at least 1 (got {t})"));
                continue;
            }
            None => {
                check.push(format!("birth[{i}].time"), "required field missing");
                continue;
            }
        };
        if b.cells.is_empty() {
            check.push(format!("birth[{i}].cells"), "must list at least one cell");
            continue;
        }
        if b.existence.len() != b.cells.len() {
            check.push(
                format!("birth[{i}].existence"),
                format!("expected {} value(s), got {}", b.cells.len(), b.existence.len()),
            );
            continue;
        }
        if births.contains_key(&time) {
            check.push(format!("birth[{i}].time"), format!("step {time} declared twice"));
            continue;
        }
        let mut components = Vec::with_capacity(b.cells.len());
        let mut ok = true;
        for (j, (&cell, &q)) in b.cells.iter().zip(&b.existence).enumerate() {
            if cell >= total_cells {
                check.push(
                    format!("birth[{i}].cells[{j}]"),
                    format!("cell {cell} outside grid of {total_cells} cells"),
                );
                ok = false;
                continue;
            }
            if !check.probability(&format!("birth[{i}].existence[{j}]"), q) {
                ok = false;
                continue;
            }
            let spatial = Pmf::point_mass(Cell(cell), total_cells).expect("cell validated");
            components.push(BirthComponent::new(q, spatial).expect("existence validated"));
        }
        if ok {
            births.insert(time, components);
        }
    }

    // ---- sensor --------------------------------------------------------
    let detection = raw.sensor.as_ref().and_then(|s| s.detection).unwrap_or(1.0);
    check.probability("sensor.detection", detection);
    let clutter_rate = raw.sensor.as_ref().and_then(|s| s.clutter_rate).unwrap_or(0.0);
    if !(clutter_rate.is_finite() && clutter_rate >= 0.0) {
        check.push("sensor.clutter_rate", format!("must be nonnegative (got {clutter_rate})"));
    }
    let (likelihood_rows, alphabet) =
        match raw.sensor.as_ref().and_then(|s| s.likelihood.as_ref()) {
            None | Some(RawLikelihood::Identity) => (
                (0..total_cells)
                    .map(|c| Pmf::point_mass(Cell(c), total_cells).expect("cell within range"))
                    .collect::<Vec<_>>(),
                total_cells,
            ),
            Some(RawLikelihood::Confusion { correct }) => {
                if total_cells == 1 {
                    // No "other" symbol exists; degenerate to identity.
                    (vec![Pmf::point_mass(Cell(0), 1).expect("one cell")], 1)
                } else if check.probability("sensor.likelihood.correct", *correct) {
                    let off = (1.0 - correct) / (total_cells - 1) as f64;
                    let rows = (0..total_cells)
                        .map(|c| {
                            let probs = (0..total_cells)
                                .map(|s| if s == c { *correct } else { off })
                                .collect();
                            Pmf::new(probs).expect("row sums to 1")
                        })
                        .collect();
                    (rows, total_cells)
                } else {
                    (
                        (0..total_cells)
                            .map(|c| Pmf::point_mass(Cell(c), total_cells).expect("cell in range"))
                            .collect(),
                        total_cells,
                    )
                }
            }
            Some(RawLikelihood::Explicit { rows, alphabet }) => {
                let parsed =
                    explicit_likelihood(rows, *alphabet, total_cells, &mut check);
                match parsed {
                    Some(rows) => (rows, *alphabet),
                    None => (
                        (0..total_cells)
                            .map(|c| Pmf::point_mass(Cell(c), total_cells).expect("cell in range"))
                            .collect(),
                        total_cells,
                    ),
                }
            }
        };

    let mut detection_schedule = BTreeMap::new();
    if let Some(sensor) = &raw.sensor {
        for (i, o) in sensor.detection_override.iter().enumerate() {
            let pd = match o.detection {
                Some(p) => p,
                None => {
                    check.push(
                        format!("sensor.detection_override[{i}].detection"),
                        "required field missing",
                    );
                    continue;
                }
            };
            if !check.probability(&format!("sensor.detection_override[{i}].detection"), pd) {
                continue;
            }
            for &step in &o.steps {
                if step == 0 {
                    check.push(
                        format!("sensor.detection_override[{i}].steps"),
                        "steps are 1-based",
                    );
                    continue;
                }
                if detection_schedule.insert(step, pd).is_some() {
                    check.push(
                        format!("sensor.detection_override[{i}].steps"),
                        format!("step {step} assigned twice"),
                    );
                }
            }
        }
    }

    // ---- estimator / metric / seed --------------------------------------
    let estimator = raw
        .estimator
        .as_ref()
        .and_then(|e| e.kind)
        .unwrap_or(EstimatorKind::Map);

    let cutoff = raw.metric.as_ref().and_then(|m| m.cutoff).unwrap_or(10.0);
    let order = raw.metric.as_ref().and_then(|m| m.order).unwrap_or(1.0);
    let label_penalty = raw.metric.as_ref().and_then(|m| m.label_penalty).unwrap_or(2.0);
    let metric = match AssignmentMetricParams::new(cutoff, order, label_penalty) {
        Ok(m) => m,
        Err(e) => {
            check.push("metric", e.to_string());
            AssignmentMetricParams::default()
        }
    };

    let seed = raw.seed.unwrap_or(0);

    if !check.violations.is_empty() {
        return Err(ConfigError::Invalid(check.violations));
    }

    // Construction can no longer fail: every ingredient was validated.
    let motion = MotionModel::new(survival, kernel, births)
        .expect("motion parameters validated above");
    let sensor = SensorModel::new(detection, likelihood_rows, clutter_rate, alphabet)
        .expect("sensor parameters validated above");

    Ok(ScenarioConfig {
        grid,
        horizon,
        seed,
        motion,
        sensor,
        detection_schedule,
        estimator,
        metric,
        limits,
    })
}

/// Checks that the scenario fits inside the exact filter's enumeration caps.
/// `simulate` has no such restriction; `run` calls this before filtering.
pub fn check_run_limits(config: &ScenarioConfig) -> Result<(), ConfigError> {
    let mut check = Check::new();
    let limits = config.limits;
    if config.horizon > limits.max_steps {
        check.push(
            "time.horizon",
            format!("{} exceeds the filter step cap {}", config.horizon, limits.max_steps),
        );
    }
    if config.grid.len() > limits.max_cells {
        check.push(
            "grid",
            format!("{} cells exceed the filter cell cap {}", config.grid.len(), limits.max_cells),
        );
    }
    let total_labels: usize =
        (1..=config.horizon).map(|k| config.motion.births_at(k).len()).sum();
    if total_labels > limits.max_labels {
        check.push(
            "birth",
            format!("{total_labels} birth labels exceed the filter label cap {}", limits.max_labels),
        );
    }
    if check.violations.is_empty() {
        Ok(())
    } else {
        Err(ConfigError::Invalid(check.violations))
    }
}

/// Nearest-neighbor random walk on the grid: stay with probability `stay`,
/// otherwise pick one of the `2 * dim` axis directions uniformly; moves off
/// the boundary reflect back onto the source cell.
fn random_walk_kernel(grid: &Grid, stay: f64) -> TransitionKernel {
    let dim = grid.dim();
    let shape = grid.shape().to_vec();
    let total = grid.len();
    let share = (1.0 - stay) / (2 * dim) as f64;

    // Row-major strides, last axis fastest (matches Grid::center decoding).
    let mut strides = vec![1usize; dim];
    for axis in (0..dim.saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * shape[axis + 1];
    }

    let rows = (0..total)
        .map(|flat| {
            let mut probs = vec![0.0; total];
            probs[flat] += stay;
            let mut rem = flat;
            let mut coords = vec![0usize; dim];
            for axis in (0..dim).rev() {
                coords[axis] = rem % shape[axis];
                rem /= shape[axis];
            }
            for axis in 0..dim {
                for dir in [-1isize, 1] {
                    let target = coords[axis] as isize + dir;
                    let dest = if target < 0 || target as usize >= shape[axis] {
                        flat // reflect off the boundary
                    } else if dir < 0 {
                        flat - strides[axis]
                    } else {
                        flat + strides[axis]
                    };
                    probs[dest] += share;
                }
            }
            Pmf::new(probs).expect("walk row sums to 1")
        })
        .collect();
    TransitionKernel::new(rows).expect("square by construction")
}

fn explicit_kernel(
    rows: &[Vec<f64>],
    total_cells: usize,
    check: &mut Check,
) -> Option<TransitionKernel> {
    if rows.len() != total_cells {
        check.push(
            "motion.kernel.rows",
            format!("expected {total_cells} row(s), got {}", rows.len()),
        );
        return None;
    }
    let mut pmfs = Vec::with_capacity(rows.len());
    let mut ok = true;
    for (r, row) in rows.iter().enumerate() {
        match Pmf::new(row.clone()) {
            Ok(pmf) if pmf.len() == total_cells => pmfs.push(pmf),
            Ok(pmf) => {
                check.push(
                    format!("motion.kernel.rows[{r}]"),
                    format!("expected {total_cells} entries, got {}", pmf.len()),
                );
                ok = false;
            }
            Err(e) => {
                check.push(format!("motion.kernel.rows[{r}]"), e.to_string());
                ok = false;
            }
        }
    }
    if ok {
        Some(TransitionKernel::new(pmfs).expect("shape validated"))
    } else {
        None
    }
}

fn explicit_likelihood(
    rows: &[Vec<f64>],
    alphabet: usize,
    total_cells: usize,
    check: &mut Check,
) -> Option<Vec<Pmf>> {
    if alphabet == 0 {
        check.push("sensor.likelihood.alphabet", "must be at least 1");
        return None;
    }
    if rows.len() != total_cells {
        check.push(
            "sensor.likelihood.rows",
            format!("expected {total_cells} row(s), got {}", rows.len()),
        );
        return None;
    }
    let mut pmfs = Vec::with_capacity(rows.len());
    let mut ok = true;
    for (r, row) in rows.iter().enumerate() {
        if row.len() != alphabet {
            check.push(
                format!("sensor.likelihood.rows[{r}]"),
                format!("expected {alphabet} entries, got {}", row.len()),
            );
            ok = false;
            continue;
        }
        match Pmf::new(row.clone()) {
            Ok(pmf) => pmfs.push(pmf),
            Err(e) => {
                check.push(format!("sensor.likelihood.rows[{r}]"), e.to_string());
                ok = false;
            }
        }
    }
    if ok {
        Some(pmfs)
    } else {
        None
    }
}

// ============================================================================
// Tests
// ============================================================================
