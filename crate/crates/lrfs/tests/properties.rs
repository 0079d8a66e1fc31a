//! Randomized property tests for the library invariants that hold across the
//! whole input space, not just on hand-picked examples.

use std::collections::BTreeMap;

use proptest::prelude::*;

use lrfs::distributions::{
    cardinality_pmf, labeled_poisson_density, lmb_density, lmb_normalization, lmb_support,
    EnumerationLimits, IntensityFunction, LmbComponent, LmbParams, Pmf,
};
use lrfs::exact_filter::{
    extract_trajectories, predict, update, BirthComponent, FilterLimits, LabeledPosterior, Meas,
    MeasurementSet, MotionModel, SensorModel, TransitionKernel,
};
use lrfs::metrics::{set_distance, tuple_representation_demo, AssignmentMetricParams, Permutation};
use lrfs::records;
use lrfs::state_model::{
    labels_of, KinematicState, LTrajectory, Label, LabeledSet, LabeledState, PointSet,
    TrackSegment,
};
use lrfs::tphd_lab::{
    compare_densities, poisson_sot_density, PoissonSotModel, TphdError, TrajectoryIntensity,
    UnitTaggedValue,
};
use lrfs::trajectory_repr::{
    count_interpretations, physical_support, restore_labels, strip_labels, LabeledSoT, SoT,
    Trajectory,
};
use lrfs::{Cell, Grid};

// ============================================================================
// Strategies
// ============================================================================

fn arb_label() -> impl Strategy<Value = Label> {
    (0u32..4, 1u32..4).prop_map(|(k, i)| Label::new(k, i))
}

/// A normalized PMF over `cells` grid cells with strictly positive weights.
fn arb_pmf(cells: usize) -> impl Strategy<Value = Pmf> {
    prop::collection::vec(0.01f64..1.0, cells).prop_map(|w| {
        let total: f64 = w.iter().sum();
        Pmf::new(w.into_iter().map(|v| v / total).collect()).expect("normalized weights")
    })
}

/// LMB parameters with up to `max_labels` components on a `cells`-cell grid.
fn arb_lmb(max_labels: usize, cells: usize) -> impl Strategy<Value = LmbParams> {
    prop::collection::btree_set(arb_label(), 0..=max_labels).prop_flat_map(move |labels| {
        let n = labels.len();
        (
            Just(labels),
            prop::collection::vec(0.0f64..=1.0, n),
            prop::collection::vec(arb_pmf(cells), n),
        )
            .prop_map(|(labels, existences, pmfs)| {
                let components = labels
                    .into_iter()
                    .zip(existences)
                    .zip(pmfs)
                    .map(|((label, q), s)| LmbComponent::new(label, q, s).expect("valid component"))
                    .collect();
                LmbParams::new(components).expect("distinct labels by construction")
            })
    })
}

fn arb_state() -> impl Strategy<Value = KinematicState> {
    prop::collection::vec(-1.0e9f64..1.0e9, 1..=3)
        .prop_map(|coords| KinematicState::new(coords).expect("finite coordinates"))
}

/// A trajectory over scalar states with a bounded window.
fn arb_trajectory() -> impl Strategy<Value = Trajectory<KinematicState>> {
    (0u32..6, prop::collection::vec(-50.0f64..50.0, 1..5)).prop_map(|(start, xs)| {
        Trajectory::new(start, xs.into_iter().map(KinematicState::scalar).collect())
            .expect("nonempty states")
    })
}

// ============================================================================
// state_model
// ============================================================================

proptest! {
    /// Whatever the constructor accepts is labeled; what it rejects is a
    /// duplicate-label or mixed-time input.
    #[test]
    fn constructed_labeled_sets_are_labeled(
        pairs in prop::collection::vec((arb_label(), 0usize..8), 0..6),
        time in 0u32..5,
    ) {
        let elems: Vec<_> = pairs
            .iter()
            .map(|&(label, cell)| LabeledState::new(Cell(cell), label, time))
            .collect();
        match LabeledSet::new(elems) {
            Ok(set) => prop_assert!(set.point_set().is_labeled()),
            Err(_) => {
                let mut labels: Vec<_> = pairs.iter().map(|&(l, _)| l).collect();
                labels.sort();
                labels.dedup();
                prop_assert!(labels.len() < pairs.len(), "rejection requires a duplicate label");
            }
        }
    }

    /// A segment stores exactly the states it was built from.
    #[test]
    fn segment_states_round_trip(
        label in arb_label(),
        start in 0u32..10,
        xs in prop::collection::vec(-100.0f64..100.0, 1..6),
    ) {
        let states: Vec<_> = xs.iter().copied().map(KinematicState::scalar).collect();
        let segment = TrackSegment::new(label, start, states.clone()).unwrap();
        prop_assert_eq!(segment.states(), &states[..]);
        prop_assert_eq!(segment.start_time(), start);
        prop_assert_eq!(segment.end_time(), start + (states.len() as u32) - 1);
    }

    /// Decomposing a per-label trajectory into maximal segments partitions
    /// its nonempty entries: segments are time-disjoint, separated by at
    /// least one empty entry, and concatenate back to the nonempty entries.
    #[test]
    fn ltrajectory_segments_partition_presence(
        entries in prop::collection::vec(prop::option::weighted(0.6, -100.0f64..100.0), 1..10),
        label in arb_label(),
        start in 0u32..5,
    ) {
        let entries: Vec<Option<KinematicState>> =
            entries.into_iter().map(|e| e.map(KinematicState::scalar)).collect();
        let trajectory = LTrajectory::new(label, start, entries.clone());
        let segments = trajectory.segments();

        for segment in &segments {
            prop_assert_eq!(segment.label(), label);
        }
        for pair in segments.windows(2) {
            // Strictly separated: a gap of at least one empty entry.
            prop_assert!(pair[1].start_time() > pair[0].end_time() + 1);
        }
        let concatenated: Vec<KinematicState> =
            segments.iter().flat_map(|s| s.states().iter().cloned()).collect();
        let nonempty: Vec<KinematicState> = entries.iter().flatten().cloned().collect();
        prop_assert_eq!(concatenated, nonempty);
    }

    /// Labels distribute over unions of same-time sets (when the union is
    /// still a valid labeled set, which disjoint label pools guarantee).
    #[test]
    fn labels_distribute_over_union(
        left in prop::collection::vec(0usize..8, 0..4),
        right in prop::collection::vec(0usize..8, 0..4),
        time in 0u32..5,
    ) {
        // Disjoint label pools: birth time 0 on the left, 1 on the right.
        let a: Vec<_> = left
            .iter()
            .enumerate()
            .map(|(i, &c)| LabeledState::new(Cell(c), Label::new(0, i as u32 + 1), time))
            .collect();
        let b: Vec<_> = right
            .iter()
            .enumerate()
            .map(|(i, &c)| LabeledState::new(Cell(c), Label::new(1, i as u32 + 1), time))
            .collect();
        let union = LabeledSet::new(a.iter().cloned().chain(b.iter().cloned())).unwrap();
        let union_elems: Vec<_> = union.iter().cloned().collect();

        let mut expected = labels_of(&a);
        expected.extend(labels_of(&b));
        prop_assert_eq!(labels_of(&union_elems), expected);
    }
}

// ============================================================================
// distributions
// ============================================================================

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The density vanishes on every set with a repeated label.
    #[test]
    fn lmb_density_vanishes_off_labeled_sets(
        params in arb_lmb(3, 6),
        label in arb_label(),
        c1 in 0usize..6,
        c2 in 0usize..6,
    ) {
        prop_assume!(c1 != c2);
        let x = PointSet::new([(label, Cell(c1)), (label, Cell(c2))]);
        prop_assert!(!x.is_labeled());
        prop_assert_eq!(lmb_density(&params, &x), 0.0);
    }

    /// Enumerated total mass is 1 for arbitrary valid parameters.
    #[test]
    fn lmb_enumerates_to_unit_mass(params in arb_lmb(4, 12)) {
        let total = lmb_normalization(&params, &EnumerationLimits::default()).unwrap();
        prop_assert!((total - 1.0).abs() <= 1e-9, "total = {total}");
    }

    /// Raising any single existence probability weakly raises the
    /// probability that at least one target exists.
    #[test]
    fn raising_existence_raises_presence_probability(
        params in arb_lmb(3, 5),
        which in 0usize..3,
        bump in 0.0f64..1.0,
    ) {
        prop_assume!(!params.components().is_empty());
        let limits = EnumerationLimits::default();
        let components = params.components().to_vec();
        let index = which % components.len();

        let raised_q = (components[index].existence + bump).min(1.0);
        let mut raised = components.clone();
        raised[index] =
            LmbComponent::new(raised[index].label, raised_q, raised[index].spatial.clone())
                .unwrap();
        let raised = LmbParams::new(raised).unwrap();

        let p0_before = cardinality_pmf(&lmb_support(&params, 0, &limits).unwrap()).prob(0);
        let p0_after = cardinality_pmf(&lmb_support(&raised, 0, &limits).unwrap()).prob(0);
        // p(n >= 1) = 1 - p(0); allow for enumeration round-off.
        prop_assert!(1.0 - p0_after >= 1.0 - p0_before - 1e-12);
    }

    /// An intensity that puts mass on two cells of one label certifies that
    /// the exponential-of-intensity density does not vanish on non-labeled
    /// sets.
    #[test]
    fn poisson_style_density_accepts_duplicate_labels(
        label in arb_label(),
        c1 in 0usize..6,
        c2 in 0usize..6,
        m1 in 0.05f64..3.0,
        m2 in 0.05f64..3.0,
    ) {
        prop_assume!(c1 != c2);
        let intensity =
            IntensityFunction::new([((label, Cell(c1)), m1), ((label, Cell(c2)), m2)]).unwrap();
        let y = PointSet::new([(label, Cell(c1)), (label, Cell(c2))]);
        prop_assert!(!y.is_labeled());
        prop_assert!(labeled_poisson_density(&intensity, &y) > 0.0);
    }
}

// ============================================================================
// exact_filter
// ============================================================================

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Random short scenarios: every predict and update step keeps the
    /// posterior normalized within 1e-9, keeps every atom labeled (by
    /// construction of the support type, checked through the point-set
    /// view), and never invents a label outside the declared universe.
    #[test]
    fn filter_steps_preserve_normalization_and_label_provenance(
        cells in 2usize..5,
        survival in 0.5f64..=1.0,
        detection in 0.1f64..=1.0,
        clutter in 0.1f64..1.5,
        kernel_seed in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 4), 4),
        n_birth0 in 1usize..=2,
        n_birth1 in 0usize..=1,
        scans in prop::collection::vec(prop::collection::vec(0usize..4, 0..3), 3),
    ) {
        let rows: Vec<Pmf> = (0..cells)
            .map(|r| {
                let w = &kernel_seed[r % kernel_seed.len()][..cells];
                let total: f64 = w.iter().sum();
                Pmf::new(w.iter().map(|v| v / total).collect()).unwrap()
            })
            .collect();
        let kernel = TransitionKernel::new(rows).unwrap();
        let birth = |n: usize| -> Vec<BirthComponent> {
            (0..n)
                .map(|_| BirthComponent::new(0.4, Pmf::uniform(cells).unwrap()).unwrap())
                .collect()
        };
        let births = BTreeMap::from([(1u32, birth(n_birth0)), (2u32, birth(n_birth1))]);
        let model = MotionModel::new(survival, kernel, births).unwrap();
        let sensor = SensorModel::identity(cells, detection, clutter).unwrap();
        let limits = FilterLimits::default();

        let mut posterior = LabeledPosterior::initial(cells);
        for scan in &scans {
            let before: std::collections::BTreeSet<Label> =
                posterior.live_labels().into_iter().collect();
            let predicted = predict(&posterior, &model, &limits).unwrap();

            let mass: f64 = predicted.support().atoms().map(|(_, p)| p).sum();
            prop_assert!((mass - 1.0).abs() <= 1e-9, "predict mass = {mass}");
            let mut allowed = before.clone();
            allowed.extend(model.birth_labels_at(predicted.time()));
            for label in predicted.live_labels() {
                prop_assert!(allowed.contains(&label), "label {label} appeared from nowhere");
            }
            for (set, _) in predicted.support().atoms() {
                prop_assert!(set.point_set().is_labeled());
            }

            let z = MeasurementSet::new(scan.iter().map(|&s| Meas(s % cells)));
            // Positive clutter rate: every multiset over the alphabet has
            // positive likelihood, so the update cannot degenerate.
            let updated = update(&predicted, &z, &sensor).unwrap();
            let mass: f64 = updated.support().atoms().map(|(_, p)| p).sum();
            prop_assert!((mass - 1.0).abs() <= 1e-9, "update mass = {mass}");
            posterior = updated;
        }
    }

    /// Reading per-label trajectories back per time step reproduces exactly
    /// the per-step estimates they were extracted from.
    #[test]
    fn extraction_inverts_per_time_restriction(
        memberships in prop::collection::vec(
            prop::collection::vec(prop::option::of(0usize..6), 3),
            1..6,
        ),
        start in 0u32..4,
    ) {
        // Three potential labels; each step includes a label iff its slot is
        // Some, placing it in the given cell.
        let labels = [Label::new(0, 1), Label::new(0, 2), Label::new(1, 1)];
        let sets: Vec<LabeledSet<Cell>> = memberships
            .iter()
            .enumerate()
            .map(|(j, slots)| {
                let t = start + j as u32;
                LabeledSet::new(slots.iter().zip(labels).filter_map(|(slot, label)| {
                    slot.map(|c| LabeledState::new(Cell(c), label, t))
                }))
                .unwrap()
            })
            .collect();

        let trajectories = extract_trajectories(start, &sets).unwrap();
        for trajectory in &trajectories {
            for (j, set) in sets.iter().enumerate() {
                let t = start + j as u32;
                prop_assert_eq!(trajectory.entry(t), set.get(trajectory.label()));
            }
        }
        // Every label that ever appears is covered by exactly one trajectory.
        let extracted: Vec<Label> = trajectories.iter().map(|t| t.label()).collect();
        let mut expected: Vec<Label> = sets.iter().flat_map(|s| s.labels()).collect();
        expected.sort();
        expected.dedup();
        prop_assert_eq!(extracted, expected);
    }
}

// ============================================================================
// trajectory_repr
// ============================================================================

proptest! {
    /// Forgetting labels collapses same-kinematics segments: the witness
    /// that stripping is not injective exists for every trajectory.
    #[test]
    fn stripping_collapses_duplicated_kinematics(trajectory in arb_trajectory()) {
        let duplicated = LabeledSoT::new([
            TrackSegment::new(Label::new(0, 1), trajectory.start_time(), trajectory.states().to_vec())
                .unwrap(),
            TrackSegment::new(Label::new(0, 2), trajectory.start_time(), trajectory.states().to_vec())
                .unwrap(),
        ])
        .unwrap();
        prop_assert_eq!(duplicated.len(), 2);
        prop_assert_eq!(strip_labels(&duplicated).len(), 1);
    }

    /// Restoring labels with any injective assignment and stripping again is
    /// the identity, and restoration always yields a valid labeled set.
    #[test]
    fn restoration_is_a_right_inverse_of_stripping(
        trajectories in prop::collection::btree_set(arb_trajectory(), 0..5),
    ) {
        let sot = SoT::new(trajectories.iter().cloned());
        let assignment: BTreeMap<Trajectory<KinematicState>, Label> = sot
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), Label::new(9, i as u32 + 1)))
            .collect();
        let restored = restore_labels(&sot, &assignment).unwrap();
        prop_assert_eq!(strip_labels(&restored), sot);
    }

    /// Slicing every trajectory into singleton time-slices preserves the
    /// physical support multiset.
    #[test]
    fn slicing_preserves_physical_support(
        trajectories in prop::collection::btree_set(arb_trajectory(), 0..5),
    ) {
        let sot = SoT::new(trajectories.iter().cloned());
        let sliced = SoT::new(sot.iter().flat_map(|t| t.time_slices()));
        // Slices of distinct trajectories can coincide and collapse under
        // set semantics; compare against the multiset union computed
        // directly instead of physical_support(&sliced).
        let mut slice_support: BTreeMap<(u32, KinematicState), usize> = BTreeMap::new();
        for t in trajectories.iter() {
            for (time, x) in t.elements() {
                *slice_support.entry((time, x.clone())).or_insert(0) += 1;
            }
        }
        prop_assert_eq!(physical_support(&sot), slice_support);
        // And when no slices collide, the sliced set itself agrees.
        let total_elements: usize = sot.iter().map(|t| t.len()).sum();
        if sliced.len() == total_elements {
            prop_assert_eq!(physical_support(&sot), physical_support(&sliced));
        }
    }

    /// All-pairwise-overlapping sets read unambiguously; a time-disjoint
    /// pair always admits a second (merged) reading.
    #[test]
    fn interpretation_counts_track_time_overlap(
        xs in prop::collection::vec(-50.0f64..50.0, 2..5),
        gap in 1u32..4,
    ) {
        // Overlapping: all trajectories share time 0.
        let overlapping = SoT::new(xs.iter().enumerate().map(|(i, &x)| {
            Trajectory::new(0, vec![KinematicState::scalar(x + i as f64 * 1000.0)]).unwrap()
        }));
        if overlapping.len() == xs.len() {
            prop_assert_eq!(count_interpretations(&overlapping).unwrap().count(), 1);
        }

        // Disjoint pair: second starts after the first ends.
        let disjoint = SoT::new([
            Trajectory::new(0, vec![KinematicState::scalar(xs[0])]).unwrap(),
            Trajectory::new(gap, vec![KinematicState::scalar(xs[1] + 1000.0)]).unwrap(),
        ]);
        prop_assert!(count_interpretations(&disjoint).unwrap().count() >= 2);
    }
}

// ============================================================================
// tphd_lab
// ============================================================================

proptest! {
    /// Values of distinct length exponent never order; equal exponents
    /// always do.
    #[test]
    fn ordering_exists_exactly_on_equal_exponents(
        v1 in 0.0f64..10.0,
        v2 in 0.0f64..10.0,
        e1 in 1u32..6,
        e2 in 1u32..6,
    ) {
        let a = UnitTaggedValue::new(v1, e1).unwrap();
        let b = UnitTaggedValue::new(v2, e2).unwrap();
        match compare_densities(a, b) {
            Ok(_) => prop_assert_eq!(e1, e2),
            Err(TphdError::Incommensurable { left, right }) => {
                prop_assert_eq!((left, right), (e1, e2));
                prop_assert_ne!(e1, e2);
            }
            Err(other) => prop_assert!(false, "unexpected error {other:?}"),
        }
    }

    /// On singleton trajectory sets the exponential-form density is the
    /// intensity itself scaled by exp(-total mass).
    #[test]
    fn singleton_density_is_proportional_to_intensity(
        entries in prop::collection::vec(
            ((0u32..3), prop::collection::vec(0usize..3, 1..3), 0.1f64..5.0),
            1..6,
        ),
    ) {
        let grid = Grid::line(3);
        let mut intensity = TrajectoryIntensity::zero(grid, 2, 8).unwrap();
        for (start, cells, value) in &entries {
            let len = cells.len() as u32;
            prop_assume!(*start + len - 1 <= 2); // stay inside the window
            intensity.set(*start, cells.iter().map(|&c| Cell(c)).collect(), *value).unwrap();
        }
        let model = PoissonSotModel::new(intensity);
        let scale = (-model.mass()).exp();

        for (start, cells, _) in &entries {
            let trajectory =
                Trajectory::new(*start, cells.iter().map(|&c| Cell(c)).collect()).unwrap();
            let singleton = SoT::new([trajectory.clone()]);
            let density = poisson_sot_density(&model, &singleton).unwrap();
            let direct = model.intensity().get(*start, trajectory.states()).unwrap();
            prop_assert!((density - scale * direct).abs() <= 1e-12 * direct.max(1.0));
        }
    }
}

// ============================================================================
// metrics
// ============================================================================

proptest! {
    /// The set distance cannot see the order elements were listed in.
    #[test]
    fn set_distance_is_permutation_invariant(
        // Integer-valued coordinates guarantee distinctness via the set.
        xs in prop::collection::btree_set(-100i32..100, 2..5),
        seed in any::<u64>(),
    ) {
        let population: Vec<LabeledState<KinematicState>> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                LabeledState::new(KinematicState::scalar(x as f64), Label::new(0, i as u32 + 1), 0)
            })
            .collect();
        let n = population.len();
        // A deterministic non-trivial reordering derived from the seed.
        let mut indices: Vec<usize> = (0..n).collect();
        indices.rotate_left((seed as usize % (n - 1)) + 1);
        let permutation = Permutation::new(indices).unwrap();
        let shuffled = permutation.apply(&population).unwrap();

        let params = AssignmentMetricParams::default();
        let a = LabeledSet::new(population).unwrap();
        let b = LabeledSet::new(shuffled).unwrap();
        prop_assert_eq!(set_distance(&a, &b, &params).unwrap(), 0.0);
    }

    /// Nonnegativity, exact symmetry, and identity on equal sets.
    #[test]
    fn set_distance_metric_axioms(
        xs in prop::collection::vec((-100i32..100).prop_map(|v| v as f64), 0..5),
        ys in prop::collection::vec((-100i32..100).prop_map(|v| v as f64), 0..5),
    ) {
        let build = |vals: &[f64], birth: u32| {
            LabeledSet::new(vals.iter().enumerate().map(|(i, &x)| {
                LabeledState::new(KinematicState::scalar(x), Label::new(birth, i as u32 + 1), 0)
            }))
            .unwrap()
        };
        let a = build(&xs, 0);
        let b = build(&ys, 1);
        let params = AssignmentMetricParams::default();

        let ab = set_distance(&a, &b, &params).unwrap();
        let ba = set_distance(&b, &a, &params).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(set_distance(&a, &a, &params).unwrap(), 0.0);
        prop_assert_eq!(set_distance(&b, &b, &params).unwrap(), 0.0);
    }

    /// For every population of >= 2 distinct states and every non-identity
    /// permutation, the componentwise tuple distance is positive while the
    /// set distance vanishes — the well-definedness failure witness.
    #[test]
    fn tuple_witness_exists_for_every_distinct_population(
        xs in prop::collection::btree_set(-100i32..100, 2..6),
        rotation in 1usize..5,
    ) {
        let population: Vec<LabeledState<KinematicState>> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                LabeledState::new(KinematicState::scalar(x as f64), Label::new(0, i as u32 + 1), 0)
            })
            .collect();
        let n = population.len();
        let mut indices: Vec<usize> = (0..n).collect();
        indices.rotate_left((rotation % (n - 1)) + 1);
        let permutation = Permutation::new(indices).unwrap();
        prop_assert!(!permutation.is_identity());

        let report =
            tuple_representation_demo(&population, &permutation, &AssignmentMetricParams::default())
                .unwrap();
        prop_assert!(report.tuple_distance > 0.0);
        prop_assert_eq!(report.set_distance, 0.0);
    }
}

// ============================================================================
// records
// ============================================================================

proptest! {
    /// Rendering and parsing is the identity on every record kind, with
    /// coordinates recovered bit-exactly.
    #[test]
    fn records_round_trip_exactly(
        elems in prop::collection::btree_map(arb_label(), arb_state(), 0..5),
        time in 0u32..20,
        start in 0u32..20,
        states in prop::collection::vec(arb_state(), 1..5),
        entries in prop::collection::vec(prop::option::of(arb_state()), 1..6),
        trajectories in prop::collection::btree_set(arb_trajectory(), 0..4),
    ) {
        let set = LabeledSet::new(
            elems.iter().map(|(&l, x)| LabeledState::new(x.clone(), l, time)),
        )
        .unwrap();
        prop_assert_eq!(records::parse_labeled_set(&records::render_labeled_set(&set)).unwrap(), set);

        let segment = TrackSegment::new(Label::new(2, 7), start, states.clone()).unwrap();
        prop_assert_eq!(records::parse_segment(&records::render_segment(&segment)).unwrap(), segment);

        let trajectory = Trajectory::new(start, states.clone()).unwrap();
        prop_assert_eq!(
            records::parse_trajectory(&records::render_trajectory(&trajectory)).unwrap(),
            trajectory
        );

        let sot = SoT::new(trajectories.iter().cloned());
        prop_assert_eq!(records::parse_sot(&records::render_sot(&sot)).unwrap(), sot);

        let lsot = LabeledSoT::new(trajectories.iter().enumerate().map(|(i, t)| {
            TrackSegment::new(Label::new(5, i as u32 + 1), t.start_time(), t.states().to_vec())
                .unwrap()
        }))
        .unwrap();
        prop_assert_eq!(
            records::parse_labeled_sot(&records::render_labeled_sot(&lsot)).unwrap(),
            lsot
        );

        let ltrajectory = LTrajectory::new(Label::new(3, 1), start, entries.clone());
        prop_assert_eq!(
            records::parse_ltrajectory(&records::render_ltrajectory(&ltrajectory)).unwrap(),
            ltrajectory
        );
    }
}
