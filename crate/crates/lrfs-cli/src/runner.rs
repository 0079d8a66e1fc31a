//! End-to-end scenario execution: simulate, filter, estimate, score, and
//! render the result in either a human-readable or a line-record format.
//!
//! Rendered output is a pure function of the configuration and seed — no
//! timestamps, durations, or machine identifiers — so identical inputs
//! produce byte-identical reports.

use std::fmt::Write as _;

use thiserror::Error;

use lrfs::exact_filter::{
    cphd_cardinality_estimate, expected_cardinality, extract_trajectories, map_labeled_estimate,
    phd_estimate, phd_from_posterior, predict, update, FilterError, LabeledPosterior,
    MeasurementSet, UnlabeledPhd,
};
use lrfs::metrics::set_distance;
use lrfs::records::{render_labeled_set, render_labeled_sot};
use lrfs::state_model::TrackSegment;
use lrfs::trajectory_repr::LabeledSoT;
use lrfs::{Cell, Grid, KinematicState, Label, LabeledSet, LabeledState};

use crate::config::{check_run_limits, ConfigError, EstimatorKind, ScenarioConfig};
use crate::scenario::{simulate, Simulation};

#[derive(Debug, Error)]
pub enum RunError {
    /// The scenario is valid but outside the exact filter's enumeration caps.
    #[error("{0}")]
    Limits(ConfigError),
    /// The filter itself failed (canonically: a zero-probability scan).
    #[error("{0}")]
    Filter(#[from] FilterError),
}

/// What the configured estimator reported at one step.
#[derive(Clone, Debug, PartialEq)]
pub enum Estimate {
    /// A labeled multitarget state (MAP readout).
    Labeled(LabeledSet<Cell>),
    /// A bare collection of cells (intensity-peak readouts); identity-free.
    Points(Vec<Cell>),
}

/// Everything produced at one time step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub time: u32,
    pub truth: LabeledSet<Cell>,
    pub scan: MeasurementSet,
    /// Number of atoms in the exact posterior's support.
    pub support_atoms: usize,
    pub expected_cardinality: f64,
    pub estimate: Estimate,
    /// Assignment distance between estimate and truth (label-aware for
    /// labeled estimates, kinematic-only for point estimates).
    pub distance: f64,
}

/// The full run: per-step reports plus the trajectories reassembled from the
/// labeled estimates (empty for identity-free estimators, which produce
/// nothing a trajectory could be threaded through).
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub cells: usize,
    pub horizon: u32,
    pub seed: u64,
    pub estimator: EstimatorKind,
    pub steps: Vec<StepReport>,
    pub tracks: LabeledSoT<KinematicState>,
}

/// Simulates the scenario under `seed` and runs the exact filter over it.
pub fn run(config: &ScenarioConfig, seed: u64) -> Result<RunReport, RunError> {
    check_run_limits(config).map_err(RunError::Limits)?;
    let sim = simulate(config, seed);
    run_against(config, seed, &sim)
}

/// Runs the filter against an existing simulation (exposed for tests that
/// need to inspect or doctor the scan sequence).
pub fn run_against(
    config: &ScenarioConfig,
    seed: u64,
    sim: &Simulation,
) -> Result<RunReport, RunError> {
    let grid = &config.grid;
    let mut posterior = LabeledPosterior::initial(grid.len());
    let mut steps = Vec::with_capacity(config.horizon as usize);
    let mut labeled_estimates: Vec<LabeledSet<Cell>> = Vec::new();

    for k in 1..=config.horizon {
        let predicted = predict(&posterior, &config.motion, &config.limits)?;
        let sensor = match config.detection_schedule.get(&k) {
            Some(&p_d) => config
                .sensor
                .with_detection(p_d)
                .expect("schedule entries are validated probabilities"),
            None => config.sensor.clone(),
        };
        let scan = sim.scan_at(k);
        posterior = update(&predicted, scan, &sensor)?;

        let phd = phd_from_posterior(&posterior);
        let expected = expected_cardinality(&phd);
        let truth = sim.truth_at(k).clone();

        let (estimate, distance) = match config.estimator {
            EstimatorKind::Map => {
                let est = map_labeled_estimate(&posterior);
                let d = set_distance(
                    &to_kinematic(&truth, grid),
                    &to_kinematic(&est, grid),
                    &config.metric,
                )
                .expect("grid centers share one dimension");
                labeled_estimates.push(est.clone());
                (Estimate::Labeled(est), d)
            }
            EstimatorKind::Phd => {
                let cells = phd_estimate(&phd);
                let d = point_distance(&truth, &cells, k, config);
                (Estimate::Points(cells), d)
            }
            EstimatorKind::Cphd => {
                let n = cphd_cardinality_estimate(&posterior.cardinality());
                let cells = top_intensity_cells(&phd, n);
                let d = point_distance(&truth, &cells, k, config);
                (Estimate::Points(cells), d)
            }
        };

        steps.push(StepReport {
            time: k,
            truth,
            scan: scan.clone(),
            support_atoms: posterior.support().len(),
            expected_cardinality: expected,
            estimate,
            distance,
        });
    }

    let tracks = if config.estimator == EstimatorKind::Map {
        let trajectories =
            extract_trajectories(1, &labeled_estimates).expect("estimates are time-aligned");
        let segments = trajectories.iter().flat_map(|t| {
            t.segments().into_iter().map(|s| {
                let states = s.states().iter().map(|&c| grid.center(c)).collect();
                TrackSegment::new(s.label(), s.start_time(), states)
                    .expect("segment runs are nonempty")
            })
        });
        LabeledSoT::new(segments).expect("per-label runs are time-disjoint")
    } else {
        LabeledSoT::empty()
    };

    Ok(RunReport {
        cells: grid.len(),
        horizon: config.horizon,
        seed,
        estimator: config.estimator,
        steps,
        tracks,
    })
}

/// The `n` highest-intensity cells (ties toward the smaller index), skipping
/// cells with no mass.
fn top_intensity_cells(phd: &UnlabeledPhd, n: usize) -> Vec<Cell> {
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

/// Maps a cell-valued labeled set to grid-center coordinates.
fn to_kinematic(set: &LabeledSet<Cell>, grid: &Grid) -> LabeledSet<KinematicState> {
    LabeledSet::new(
        set.iter().map(|e| LabeledState::new(grid.center(e.x), e.label, e.time)),
    )
    .expect("label structure is preserved by the state map")
}

/// Kinematic-only distance between labeled truth and a bare cell list.
///
/// The cells get placeholder labels so they fit the labeled-set container;
/// with the label penalty zeroed the labels have no effect on the value.
fn point_distance(
    truth: &LabeledSet<Cell>,
    cells: &[Cell],
    time: u32,
    config: &ScenarioConfig,
) -> f64 {
    let grid = &config.grid;
    let estimate = LabeledSet::new(
        cells
            .iter()
            .enumerate()
            .map(|(i, &c)| LabeledState::new(grid.center(c), Label::new(time, i as u32 + 1), time)),
    )
    .expect("placeholder labels are distinct");
    set_distance(&to_kinematic(truth, grid), &estimate, &config.metric.kinematic_only())
        .expect("grid centers share one dimension")
}

// ============================================================================
// Rendering
// ============================================================================

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Records,
}

/// Renders a full run report.
pub fn render_run(report: &RunReport, config: &ScenarioConfig, format: OutputFormat) -> String {
    match format {
        OutputFormat::Records => render_run_records(report, config),
        OutputFormat::Text => render_run_text(report, config),
    }
}

fn render_run_records(report: &RunReport, config: &ScenarioConfig) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "run cells={} horizon={} seed={} estimator={}",
        report.cells,
        report.horizon,
        report.seed,
        report.estimator.name()
    )
    .unwrap();
    for step in &report.steps {
        let k = step.time;
        writeln!(out, "step={k} kind=truth {}", render_labeled_set(&to_kinematic(&step.truth, &config.grid))).unwrap();
        writeln!(out, "step={k} kind=scan count={} symbols={}", step.scan.len(), symbol_list(&step.scan)).unwrap();
        writeln!(
            out,
            "step={k} kind=posterior atoms={} expected={}",
            step.support_atoms, step.expected_cardinality
        )
        .unwrap();
        match &step.estimate {
            Estimate::Labeled(set) => {
                writeln!(out, "step={k} kind=estimate {}", render_labeled_set(&to_kinematic(set, &config.grid))).unwrap();
            }
            Estimate::Points(cells) => {
                writeln!(out, "step={k} kind=estimate count={} cells={}", cells.len(), cell_list(cells)).unwrap();
            }
        }
        writeln!(out, "step={k} kind=distance value={}", step.distance).unwrap();
    }
    writeln!(out, "final kind=tracks {}", render_labeled_sot(&report.tracks)).unwrap();
    out
}

fn render_run_text(report: &RunReport, config: &ScenarioConfig) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "run: {} cells, horizon {}, seed {}, estimator {}",
        report.cells,
        report.horizon,
        report.seed,
        report.estimator.name()
    )
    .unwrap();
    for step in &report.steps {
        writeln!(out, "step {}", step.time).unwrap();
        writeln!(out, "  truth:     {}", render_labeled_set(&to_kinematic(&step.truth, &config.grid))).unwrap();
        writeln!(out, "  scan:      {} symbol(s) {}", step.scan.len(), symbol_list(&step.scan)).unwrap();
        writeln!(
            out,
            "  posterior: {} atom(s), expected cardinality {}",
            step.support_atoms, step.expected_cardinality
        )
        .unwrap();
        match &step.estimate {
            Estimate::Labeled(set) => {
                writeln!(out, "  estimate:  {}", render_labeled_set(&to_kinematic(set, &config.grid))).unwrap();
            }
            Estimate::Points(cells) => {
                writeln!(out, "  estimate:  {} cell(s) {}", cells.len(), cell_list(cells)).unwrap();
            }
        }
        writeln!(out, "  distance:  {}", step.distance).unwrap();
    }
    writeln!(out, "tracks: {}", render_labeled_sot(&report.tracks)).unwrap();
    out.push_str(&summary_body(report));
    out
}

/// Renders just the simulation (the `simulate` subcommand).
pub fn render_simulation(
    sim: &Simulation,
    config: &ScenarioConfig,
    seed: u64,
    format: OutputFormat,
) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Records => {
            writeln!(
                out,
                "simulation cells={} horizon={} seed={seed}",
                config.grid.len(),
                config.horizon
            )
            .unwrap();
            for k in 1..=config.horizon {
                let truth = to_kinematic(sim.truth_at(k), &config.grid);
                writeln!(out, "step={k} kind=truth {}", render_labeled_set(&truth)).unwrap();
                let scan = sim.scan_at(k);
                writeln!(out, "step={k} kind=scan count={} symbols={}", scan.len(), symbol_list(scan)).unwrap();
            }
        }
        OutputFormat::Text => {
            writeln!(
                out,
                "simulation: {} cells, horizon {}, seed {seed}",
                config.grid.len(),
                config.horizon
            )
            .unwrap();
            for k in 1..=config.horizon {
                writeln!(out, "step {k}").unwrap();
                let truth = to_kinematic(sim.truth_at(k), &config.grid);
                writeln!(out, "  truth: {}", render_labeled_set(&truth)).unwrap();
                let scan = sim.scan_at(k);
                writeln!(out, "  scan:  {} symbol(s) {}", scan.len(), symbol_list(scan)).unwrap();
            }
        }
    }
    out
}

/// Renders the aggregate summary (the `report` subcommand).
pub fn render_report(report: &RunReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Records => {
            let mut out = String::new();
            writeln!(
                out,
                "report cells={} horizon={} seed={} estimator={}",
                report.cells,
                report.horizon,
                report.seed,
                report.estimator.name()
            )
            .unwrap();
            let (mean, max) = distance_stats(report);
            writeln!(out, "metric kind=distance mean={mean} max={max}").unwrap();
            let atoms: Vec<usize> = report.steps.iter().map(|s| s.support_atoms).collect();
            writeln!(
                out,
                "metric kind=support max_atoms={}",
                atoms.iter().copied().max().unwrap_or(0)
            )
            .unwrap();
            writeln!(out, "metric kind=tracks segments={}", report.tracks.len()).unwrap();
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            writeln!(
                out,
                "report: {} cells, horizon {}, seed {}, estimator {}",
                report.cells,
                report.horizon,
                report.seed,
                report.estimator.name()
            )
            .unwrap();
            out.push_str(&summary_body(report));
            out
        }
    }
}

fn summary_body(report: &RunReport) -> String {
    let mut out = String::new();
    let (mean, max) = distance_stats(report);
    writeln!(out, "summary: mean distance {mean}, max distance {max}").unwrap();
    let max_atoms = report.steps.iter().map(|s| s.support_atoms).max().unwrap_or(0);
    writeln!(
        out,
        "summary: largest posterior support {max_atoms} atom(s), {} track segment(s)",
        report.tracks.len()
    )
    .unwrap();
    out
}

fn distance_stats(report: &RunReport) -> (f64, f64) {
    if report.steps.is_empty() {
        return (0.0, 0.0);
    }
    let sum: f64 = report.steps.iter().map(|s| s.distance).sum();
    let max = report.steps.iter().map(|s| s.distance).fold(0.0, f64::max);
    (sum / report.steps.len() as f64, max)
}

fn symbol_list(scan: &MeasurementSet) -> String {
    let parts: Vec<String> = scan.symbols().iter().map(|m| m.to_string()).collect();
    format!("[{}]", parts.join(" "))
}

fn cell_list(cells: &[Cell]) -> String {
    let parts: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
    format!("[{}]", parts.join(" "))
}
