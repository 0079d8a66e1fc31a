//! Acceptance gate: one test per acceptance criterion, named
//! `criterion_01_*` through `criterion_10_*`, each asserting its stated
//! tolerance. The harness prints one pass/fail line per criterion.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lrfs::distributions::{
    labeled_poisson_density, lmb_normalization, EnumerationLimits, IntensityFunction,
    LmbComponent, LmbParams, Pmf,
};
use lrfs::exact_filter::{
    expected_cardinality, extract_trajectories, phd_from_posterior, predict, update,
    BirthComponent, FilterLimits, LabeledPosterior, Meas, MeasurementSet, MotionModel,
    SensorModel, TransitionKernel,
};
use lrfs::metrics::{
    set_distance, tuple_representation_demo, AssignmentMetricParams, Permutation,
};
use lrfs::state_model::TrackSegment;
use lrfs::tphd_lab::{
    compare_densities, gm_tphd_build, gm_tphd_estimate, poisson_sot_density, trajectory_integral,
    GmBuildOutcome, GmTphdComponent, PoissonSotModel, TphdError, TrajectoryIntensity,
    UnitTaggedValue,
};
use lrfs::trajectory_repr::{is_physically_consistent, LabeledSoT, SoT, Trajectory};
use lrfs::{labels_of, Cell, Grid, KinematicState, Label, LabeledSet, LabeledState, PointSet};
use lrfs_cli::config::parse_config;
use lrfs_cli::runner::{run_against, Estimate};
use lrfs_cli::scenario::simulate;

fn random_pmf(rng: &mut ChaCha8Rng, cells: usize) -> Pmf {
    let weights: Vec<f64> = (0..cells).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = weights.iter().sum();
    Pmf::new(weights.into_iter().map(|w| w / total).collect()).expect("normalized")
}

// ============================================================================
// Criterion 1 — multi-Bernoulli normalization
// ============================================================================

#[test]
fn criterion_01_lmb_enumeration_is_normalized() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC0_0001);
    let limits = EnumerationLimits { max_labels: 4, max_cells: 16 };

    for case in 0..50 {
        let cells = rng.random_range(1..=16);
        let label_count = rng.random_range(1..=4usize);
        let mut labels = BTreeSet::new();
        while labels.len() < label_count {
            labels.insert((rng.random_range(0..3u32), rng.random_range(1..=3u32)));
        }
        let components: Vec<LmbComponent> = labels
            .into_iter()
            .map(|(k, i)| {
                LmbComponent::new(
                    Label::new(k, i),
                    rng.random_range(0.0..=1.0),
                    random_pmf(&mut rng, cells),
                )
                .expect("valid component")
            })
            .collect();
        let params = LmbParams::new(components).expect("distinct labels");
        let total = lmb_normalization(&params, &limits).expect("within enumeration bounds");
        assert!(
            (total - 1.0).abs() <= 1e-9,
            "case {case}: enumerated mass {total} is off by more than 1e-9"
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "50 cases took {elapsed:?}, over the 10 s budget");
    println!("criterion 01: 50/50 parameter sets normalized within 1e-9 in {elapsed:?}");
}

// ============================================================================
// Criteria 2 and 3 — posterior validity and moment consistency
// ============================================================================

/// Runs the 20 randomized filtering scenarios shared by criteria 2 and 3,
/// invoking `check` on every posterior (prediction and update alike).
fn randomized_filter_scenarios(mut check: impl FnMut(&LabeledPosterior)) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC0_0002);
    for _scenario in 0..20 {
        let cells = rng.random_range(2..=12usize);
        let steps = rng.random_range(4..=8u32);
        let survival = rng.random_range(0.5..=1.0);
        let detection = rng.random_range(0.1..=1.0);
        // Strictly positive clutter keeps every scan explainable, so the
        // update can never degenerate on randomized measurements.
        let clutter = rng.random_range(0.1..=1.5);

        let kernel =
            TransitionKernel::new((0..cells).map(|_| random_pmf(&mut rng, cells)).collect())
                .expect("square row-stochastic kernel");
        let mut births = std::collections::BTreeMap::new();
        let first_cohort = rng.random_range(1..=2usize);
        let second_cohort = rng.random_range(0..=(3 - first_cohort).min(1));
        for (time, cohort) in [(1u32, first_cohort), (2u32, second_cohort)] {
            if cohort > 0 {
                births.insert(
                    time,
                    (0..cohort)
                        .map(|_| {
                            BirthComponent::new(
                                rng.random_range(0.05..=0.95),
                                random_pmf(&mut rng, cells),
                            )
                            .expect("valid birth")
                        })
                        .collect::<Vec<_>>(),
                );
            }
        }
        let motion = MotionModel::new(survival, kernel, births).expect("valid motion");
        let sensor = SensorModel::identity(cells, detection, clutter).expect("valid sensor");
        let limits = FilterLimits::default();

        let mut posterior = LabeledPosterior::initial(cells);
        for _k in 1..=steps {
            let predicted = predict(&posterior, &motion, &limits).expect("within caps");
            check(&predicted);
            let scan = MeasurementSet::new(
                (0..rng.random_range(0..=3usize)).map(|_| Meas(rng.random_range(0..cells))),
            );
            posterior =
                update(&predicted, &scan, &sensor).expect("positive clutter explains any scan");
            check(&posterior);
        }
    }
}

#[test]
fn criterion_02_every_posterior_atom_is_a_labeled_set() {
    let mut atoms_checked = 0usize;
    randomized_filter_scenarios(|posterior| {
        for (set, _p) in posterior.support().atoms() {
            let elements: Vec<LabeledState<Cell>> = set.iter().cloned().collect();
            assert_eq!(
                labels_of(&elements).len(),
                set.len(),
                "an atom repeats a label: {set:?}"
            );
            atoms_checked += 1;
        }
    });
    assert!(atoms_checked > 0);
    println!("criterion 02: {atoms_checked} posterior atoms checked, zero label collisions");
}

#[test]
fn criterion_03_intensity_mass_equals_cardinality_mean() {
    let mut posteriors_checked = 0usize;
    randomized_filter_scenarios(|posterior| {
        let from_intensity = expected_cardinality(&phd_from_posterior(posterior));
        let from_cardinality = posterior.cardinality().mean();
        assert!(
            (from_intensity - from_cardinality).abs() <= 1e-9,
            "first moment disagrees: intensity mass {from_intensity} vs cardinality mean {from_cardinality}"
        );
        posteriors_checked += 1;
    });
    assert!(posteriors_checked > 0);
    println!("criterion 03: first moments agree within 1e-9 on {posteriors_checked} posteriors");
}

// ============================================================================
// Criterion 4 — noiseless oracle tracking
// ============================================================================

#[test]
fn criterion_04_noiseless_oracle_is_tracked_exactly() {
    // Deterministic drift: each cell advances one cell per step, saturating
    // at the top cell. Certain birth, survival, and detection; no clutter.
    let mut rows = Vec::new();
    for c in 0..8usize {
        let to = (c + 1).min(7);
        let row: Vec<String> =
            (0..8).map(|j| if j == to { "1.0" } else { "0.0" }.to_string()).collect();
        rows.push(format!("[{}]", row.join(", ")));
    }
    let text = format!(
        "[grid]\ncells = 8\n\n[time]\nhorizon = 8\n\n\
         [motion.kernel]\nkind = \"explicit\"\nrows = [{}]\n\n\
         [[birth]]\ntime = 1\ncells = [1, 6]\nexistence = [1.0, 1.0]\n",
        rows.join(", ")
    );
    let config = parse_config(&text).expect("oracle config is valid");
    let sim = simulate(&config, 0xACC4);
    let report = run_against(&config, 0xACC4, &sim).expect("noiseless run");

    for step in &report.steps {
        assert_eq!(step.distance, 0.0, "step {}: distance must be exactly 0", step.time);
        match &step.estimate {
            Estimate::Labeled(set) => assert_eq!(set, &step.truth, "step {}", step.time),
            other => panic!("expected a labeled estimate, got {other:?}"),
        }
    }

    // Trajectory extraction must reproduce the ground-truth segments exactly.
    let truth_tracks: LabeledSoT<KinematicState> = LabeledSoT::new(
        extract_trajectories(1, &sim.truth)
            .expect("truth is time-aligned")
            .iter()
            .flat_map(|t| {
                t.segments().into_iter().map(|s| {
                    let states =
                        s.states().iter().map(|&c| config.grid.center(c)).collect();
                    TrackSegment::new(s.label(), s.start_time(), states).expect("nonempty")
                })
            }),
    )
    .expect("truth segments are disjoint per label");
    assert_eq!(report.tracks, truth_tracks, "extracted tracks must equal ground-truth segments");
    assert_eq!(report.tracks.len(), 2);
    println!("criterion 04: 8/8 steps at distance 0 and exact segment match for both targets");
}

// ============================================================================
// Criterion 5 — representation counterexamples
// ============================================================================

#[test]
fn criterion_05_counterexamples_ce1_to_ce4_pass_exactly() {
    let start = Instant::now();
    let checks = lrfs_cli::audit::run_audit();
    for code in ["CE1", "CE2", "CE3", "CE4"] {
        let check = checks
            .iter()
            .find(|c| c.code == code)
            .unwrap_or_else(|| panic!("audit must include {code}"));
        assert!(check.pass, "{code} failed: {}", check.detail);
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "counterexamples took {elapsed:?}, over 1 s");
    println!("criterion 05: CE1-CE4 all pass in {elapsed:?}");
}

// ============================================================================
// Criterion 6 — nonexistence witnesses
// ============================================================================

#[test]
fn criterion_06_nonexistence_witnesses_are_strictly_positive() {
    // Witness 1: the Poisson-style product density on labeled space puts
    // strictly positive mass on a collection that repeats a label — which no
    // distribution over labeled sets could do.
    let label = Label::new(1, 1);
    let intensity =
        IntensityFunction::new([((label, Cell(0)), 0.7), ((label, Cell(1)), 0.5)])
            .expect("valid intensity");
    let repeated = PointSet::new([(label, Cell(0)), (label, Cell(1))]);
    assert!(!repeated.is_labeled(), "the witness set must NOT be a labeled set");
    let lrfs_density = labeled_poisson_density(&intensity, &repeated);
    assert!(
        lrfs_density > 1e-12,
        "labeled Poisson density {lrfs_density} must be strictly positive"
    );

    // Witness 2: a Poisson model over trajectory sets puts strictly positive
    // density on a physically impossible set (a track plus its own slices).
    let grid = Grid::line(3);
    let whole = (0u32, vec![Cell(0), Cell(1), Cell(2)]);
    let slices = [(0u32, vec![Cell(0)]), (1u32, vec![Cell(1)]), (2u32, vec![Cell(2)])];
    let mut intensity = TrajectoryIntensity::zero(grid, 2, 8).expect("tiny domain");
    intensity.set(whole.0, whole.1.clone(), 0.9).expect("in domain");
    for (start, cells) in &slices {
        intensity.set(*start, cells.clone(), 0.8).expect("in domain");
    }
    let model = PoissonSotModel::new(intensity);
    let sot = SoT::new(
        std::iter::once(&whole)
            .chain(slices.iter())
            .map(|(start, cells)| Trajectory::new(*start, cells.clone()).expect("nonempty")),
    );
    let report = is_physically_consistent(&sot);
    assert!(!report.is_consistent(), "the witness set must be physically impossible");
    let sot_density = poisson_sot_density(&model, &sot).expect("members in domain");
    assert!(
        sot_density > 1e-12,
        "trajectory Poisson density {sot_density} must be strictly positive"
    );
    println!(
        "criterion 06: witnesses at {lrfs_density} (labeled) and {sot_density} (trajectory), both > 1e-12"
    );
}

// ============================================================================
// Criterion 7 — incommensurability of mixed trajectory lengths
// ============================================================================

fn anchor_of_length(len: usize, offset: f64) -> Trajectory<KinematicState> {
    Trajectory::new(
        0,
        (0..len).map(|j| KinematicState::scalar(offset + j as f64)).collect(),
    )
    .expect("nonempty")
}

#[test]
fn criterion_07_mixed_lengths_always_refuse_comparison() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC0_0007);
    let mut mixed_refusals = 0usize;

    for case in 0..1000 {
        let len_a = rng.random_range(1..=4u32);
        let len_b = loop {
            let l = rng.random_range(1..=4u32);
            if l != len_a {
                break l;
            }
        };

        // compare_densities must refuse the mixed pair ...
        let a = UnitTaggedValue::new(rng.random_range(0.0..1.0), len_a).expect("valid");
        let b = UnitTaggedValue::new(rng.random_range(0.0..1.0), len_b).expect("valid");
        match compare_densities(a, b) {
            Err(TphdError::Incommensurable { .. }) => mixed_refusals += 1,
            other => panic!("case {case}: mixed lengths compared as {other:?}"),
        }

        // ... and so must the mixture estimator.
        let components = [
            GmTphdComponent::new(
                rng.random_range(0.1..1.0),
                anchor_of_length(len_a as usize, rng.random_range(-1.0..1.0)),
                DMatrix::identity(len_a as usize, len_a as usize),
            )
            .expect("valid component"),
            GmTphdComponent::new(
                rng.random_range(0.1..1.0),
                anchor_of_length(len_b as usize, rng.random_range(-1.0..1.0)),
                DMatrix::identity(len_b as usize, len_b as usize),
            )
            .expect("valid component"),
        ];
        assert!(
            matches!(gm_tphd_estimate(&components, 2.0), Err(TphdError::Incommensurable { .. })),
            "case {case}: the estimator must refuse mixed lengths"
        );

        // Same-length inputs must never be refused.
        let len = rng.random_range(1..=4u32);
        let c = UnitTaggedValue::new(rng.random_range(0.0..1.0), len).expect("valid");
        let d = UnitTaggedValue::new(rng.random_range(0.0..1.0), len).expect("valid");
        assert!(
            compare_densities(c, d).is_ok(),
            "case {case}: equal lengths must compare"
        );
        let same = [
            GmTphdComponent::new(
                rng.random_range(0.1..1.0),
                anchor_of_length(len as usize, rng.random_range(-1.0..1.0)),
                DMatrix::identity(len as usize, len as usize),
            )
            .expect("valid component"),
            GmTphdComponent::new(
                rng.random_range(0.1..1.0),
                anchor_of_length(len as usize, rng.random_range(1.5..3.0)),
                DMatrix::identity(len as usize, len as usize),
            )
            .expect("valid component"),
        ];
        assert!(
            gm_tphd_estimate(&same, 2.0).is_ok(),
            "case {case}: equal lengths must estimate"
        );
    }

    assert_eq!(mixed_refusals, 1000);
    println!("criterion 07: 1000/1000 mixed-length cases refused; 1000/1000 same-length cases accepted");
}

// ============================================================================
// Criterion 8 — Gaussian-mixture mass
// ============================================================================

#[test]
fn criterion_08_gaussian_mixture_integrates_to_its_expected_count() {
    // Unit-variance components over length-2 trajectories; the grid spans
    // +/- 6 standard deviations around both anchors at spacing 0.25.
    let grid = Grid::new(vec![56], vec![-7.0], 0.25).expect("valid grid");
    let components = [
        GmTphdComponent::new(
            0.5,
            Trajectory::new(0, vec![KinematicState::scalar(-1.0), KinematicState::scalar(-1.0)])
                .expect("nonempty"),
            DMatrix::identity(2, 2),
        )
        .expect("valid component"),
        GmTphdComponent::new(
            0.5,
            Trajectory::new(0, vec![KinematicState::scalar(1.0), KinematicState::scalar(1.0)])
                .expect("nonempty"),
            DMatrix::identity(2, 2),
        )
        .expect("valid component"),
    ];
    let built = gm_tphd_build(&components, 2.0, &grid, 1).expect("within domain cap");
    let intensity = match built {
        GmBuildOutcome::Evaluable(intensity) => intensity,
        GmBuildOutcome::MixedLength(report) => panic!("same-length mixture diagnosed: {report}"),
    };
    let integral = trajectory_integral(&intensity);
    assert!(
        (integral - 2.0).abs() <= 1e-3,
        "mixture mass {integral} differs from 2.0 by more than 1e-3"
    );
    println!("criterion 08: mixture with expected count 2 integrates to {integral}");
}

// ============================================================================
// Criterion 9 — ordered representations admit no multitarget metric
// ============================================================================

#[test]
fn criterion_09_tuple_distance_separates_what_set_distance_identifies() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC0_0009);
    let params = AssignmentMetricParams::default();

    // 100 populations measured against a reordering of themselves.
    for case in 0..100 {
        let n = rng.random_range(2..=5usize);
        let population: Vec<LabeledState<KinematicState>> = (0..n)
            .map(|i| {
                LabeledState::new(
                    KinematicState::scalar(i as f64 + rng.random_range(0.0..0.5)),
                    Label::new(0, i as u32 + 1),
                    0,
                )
            })
            .collect();
        // A random non-identity permutation: rotate by 1..n.
        let shift = rng.random_range(1..n);
        let indices: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let permutation = Permutation::new(indices).expect("a rotation is a permutation");
        assert!(!permutation.is_identity());

        let report = tuple_representation_demo(&population, &permutation, &params)
            .expect("distinct, labeled population");
        assert!(
            report.tuple_distance > 0.0,
            "case {case}: componentwise distance must separate the orderings"
        );
        assert_eq!(
            report.set_distance, 0.0,
            "case {case}: the set distance must identify the orderings exactly"
        );
    }

    // Triangle inequality on 10^4 randomized labeled-set triples.
    let label_pool: Vec<Label> =
        (0..3u32).flat_map(|k| (1..=2u32).map(move |i| Label::new(k, i))).collect();
    let random_set = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(0..=4usize);
        let mut labels = label_pool.clone();
        labels.shuffle(rng);
        LabeledSet::new(labels.into_iter().take(n).map(|label| {
            LabeledState::new(
                KinematicState::scalar(rng.random_range(0..24) as f64 * 0.5),
                label,
                0,
            )
        }))
        .expect("labels drawn without replacement")
    };
    for case in 0..10_000 {
        let x = random_set(&mut rng);
        let y = random_set(&mut rng);
        let z = random_set(&mut rng);
        let xz = set_distance(&x, &z, &params).expect("same dimension");
        let xy = set_distance(&x, &y, &params).expect("same dimension");
        let yz = set_distance(&y, &z, &params).expect("same dimension");
        assert!(
            xz <= xy + yz + 1e-9,
            "case {case}: triangle violated: d(x,z)={xz} > d(x,y)+d(y,z)={}",
            xy + yz
        );
    }
    println!("criterion 09: 100/100 tuple-vs-set witnesses and 10000/10000 triangle triples hold");
}

// ============================================================================
// Criterion 10 — byte-identical reports
// ============================================================================

#[test]
fn criterion_10_identical_config_and_seed_reproduce_report_bytes() {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/canonical.toml");
    let config = config.to_str().unwrap();
    let spawn = |format: &str| {
        Command::new(env!("CARGO_BIN_EXE_lrfs-cli"))
            .args(["run", "--config", config, "--format", format])
            .output()
            .expect("spawn the CLI binary")
    };
    for format in ["records", "text"] {
        let first = spawn(format);
        let second = spawn(format);
        assert_eq!(first.status.code(), Some(0));
        assert_eq!(second.status.code(), Some(0));
        assert!(!first.stdout.is_empty());
        assert_eq!(
            first.stdout, second.stdout,
            "{format} reports must be byte-identical across runs"
        );
    }
    println!("criterion 10: records and text reports byte-identical across repeated runs");
}
