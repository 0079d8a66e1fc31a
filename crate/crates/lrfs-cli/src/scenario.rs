//! Ground-truth and measurement simulation for a configured scenario.
//!
//! The simulator draws from exactly the generative model the filter assumes:
//! independent per-target survival and cell transitions, labeled-Bernoulli
//! births with fresh labels `(k, 1), ..., (k, n)` at each scheduled step,
//! independent per-target detection through the sensor's symbol likelihoods,
//! and Poisson clutter uniform over the alphabet.
//!
//! Determinism: one seeded generator drives the whole run, and the draw order
//! is fixed — survivors in canonical label order, then births in cohort
//! order, then detections in label order, then clutter. Identical
//! configuration and seed therefore reproduce the identical simulation,
//! byte for byte, on any platform.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use lrfs::exact_filter::{Meas, MeasurementSet};
use lrfs::{Cell, Label, LabeledSet, LabeledState};

use crate::config::ScenarioConfig;

/// Ground truth and scans for steps `1..=horizon`; index `j` holds time
/// `j + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub truth: Vec<LabeledSet<Cell>>,
    pub scans: Vec<MeasurementSet>,
}

impl Simulation {
    /// Ground truth at time step `k` (1-based).
    pub fn truth_at(&self, k: u32) -> &LabeledSet<Cell> {
        &self.truth[(k - 1) as usize]
    }

    /// Scan received at time step `k` (1-based).
    pub fn scan_at(&self, k: u32) -> &MeasurementSet {
        &self.scans[(k - 1) as usize]
    }
}

/// Simulates one realization of the configured scenario.
///
/// `seed` is taken explicitly (rather than from the config) so a command-line
/// override replaces the configured value in exactly one place.
pub fn simulate(config: &ScenarioConfig, seed: u64) -> Simulation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let survival = config.motion.survival();
    let kernel = config.motion.kernel();
    let alphabet = config.sensor.alphabet();

    // Live targets, keyed by label so iteration is canonical. A label enters
    // at most once (birth cohorts are per-step with per-step label spaces),
    // so no label is ever reused after its target dies.
    let mut live: BTreeMap<Label, Cell> = BTreeMap::new();
    let mut truth = Vec::with_capacity(config.horizon as usize);
    let mut scans = Vec::with_capacity(config.horizon as usize);

    for k in 1..=config.horizon {
        // Survival and motion, in canonical label order.
        let mut next: BTreeMap<Label, Cell> = BTreeMap::new();
        for (&label, &cell) in &live {
            if rng.random_bool(survival) {
                next.insert(label, kernel.row(cell).sample(&mut rng));
            }
        }

        // Births, in cohort order; label (k, i + 1) for component i.
        for (i, component) in config.motion.births_at(k).iter().enumerate() {
            if rng.random_bool(component.existence) {
                let label = Label::new(k, i as u32 + 1);
                next.insert(label, component.spatial.sample(&mut rng));
            }
        }
        live = next;

        let set = LabeledSet::new(
            live.iter().map(|(&label, &cell)| LabeledState::new(cell, label, k)),
        )
        .expect("distinct labels sharing one time index");

        // Detections, in label order.
        let p_d = config.detection_at(k);
        let mut symbols = Vec::new();
        for (_, &cell) in &live {
            if rng.random_bool(p_d) {
                symbols.push(Meas(config.sensor.symbol_pmf(cell).sample(&mut rng).0));
            }
        }

        // Clutter last: a Poisson count of symbols uniform over the alphabet.
        let rate = config.sensor.clutter_rate();
        if rate > 0.0 {
            let poisson = Poisson::new(rate).expect("positive finite rate");
            let count = poisson.sample(&mut rng) as u64;
            for _ in 0..count {
                symbols.push(Meas(rng.random_range(0..alphabet)));
            }
        }

        truth.push(set);
        scans.push(MeasurementSet::new(symbols));
    }

    Simulation { truth, scans }
}
