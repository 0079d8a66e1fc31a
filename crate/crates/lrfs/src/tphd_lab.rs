//! Trajectory-domain intensity functions and their dimensional analysis.
//!
//! A trajectory intensity assigns a density value to every discretized
//! trajectory `(start k', states x^{1:i})` over a grid, for all windows that
//! fit a horizon. Its integral is the expected trajectory count, and the
//! natural estimation recipe — round the integral, pick that many peaks —
//! runs into a wall this module makes concrete: the value at a length-`i`
//! trajectory carries unit `1/length^i`, so values at different lengths are
//! *dimensionally incommensurable* and "higher peak" is undefined across
//! lengths. [`compare_densities`] refuses exactly those comparisons;
//! [`gm_tphd_estimate`] inherits the refusal for Gaussian-mixture
//! intensities with mixed anchor lengths, while [`gm_tphd_build`] reports
//! the offending length classes as a diagnostic.
//!
//! The same machinery hosts the second diagnostic of the module:
//! [`poisson_sot_density`] evaluates the would-be Poisson density over sets
//! of trajectories and demonstrably does *not* vanish on physically
//! impossible inputs (one history recorded twice), so no such Poisson family
//! exists as a distribution over sets of trajectories. Both diagnostics are
//! pure evaluations with typed outcomes, designed to be driven from tests
//! and from the scenario audit command.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::grid::{Cell, Grid};
use crate::numeric::{round_half_up, KahanSum};
use crate::state_model::KinematicState;
use crate::trajectory_repr::{SoT, Trajectory};

/// Smallest admissible covariance eigenvalue: anything at or below this is
/// treated as not positive definite.
pub const SPD_TOLERANCE: f64 = 1e-12;

/// Largest trajectory-domain size (number of discretized trajectories) an
/// intensity may be declared over; keeps every declared domain enumerable.
pub const DEFAULT_DOMAIN_CAP: u128 = 10_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum TphdError {
    #[error("density value {0} must be finite and >= 0")]
    BadValue(f64),
    #[error("a density unit exponent counts time steps and must be >= 1")]
    ZeroExponent,
    #[error(
        "cannot compare trajectory densities with unit exponents {left} and {right}: \
         the values carry incompatible units"
    )]
    Incommensurable { left: u32, right: u32 },
    #[error(
        "trajectory (start {start}, length {len}) lies outside the domain for horizon {horizon}"
    )]
    OutOfDomain { start: u32, len: usize, horizon: u32 },
    #[error("cell {cell} outside the {cells}-cell grid")]
    CellOutOfRange { cell: Cell, cells: usize },
    #[error("horizon {horizon} exceeds the scene bound {k_max}")]
    HorizonBeyondBound { horizon: u32, k_max: u32 },
    #[error("trajectory domain has {size} points, over the cap of {cap}")]
    DomainTooLarge { size: u128, cap: u128 },
    #[error("component weight {0} must be finite and > 0")]
    BadWeight(f64),
    #[error("anchor states must match the grid dimension {expected}, got {got}")]
    AnchorDimensionMismatch { expected: usize, got: usize },
    #[error("covariance is {rows}x{cols}, expected {expected}x{expected} for this anchor")]
    CovarianceShape { rows: usize, cols: usize, expected: usize },
    #[error("covariance is not symmetric (max asymmetry {max_asymmetry:e})")]
    CovarianceNotSymmetric { max_asymmetry: f64 },
    #[error("covariance is not positive definite (eigenvalue {eigenvalue:e} <= {SPD_TOLERANCE:e})")]
    CovarianceNotSpd { eigenvalue: f64 },
    #[error("expected trajectory count {0} must be finite and > 0")]
    BadExpectedCount(f64),
    #[error("a Gaussian-mixture intensity needs at least one component")]
    EmptyMixture,
}

// ============================================================================
// Unit-tagged values and their comparison
// ============================================================================

/// A nonnegative density value together with the unit it is measured in:
/// `1/length^i` for a value read off a length-`i` trajectory density.
///
/// Carrying the exponent makes dimensional soundness checkable: arithmetic
/// comparison is only meaningful between values of the same unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitTaggedValue {
    value: f64,
    length_exponent: u32,
}

impl UnitTaggedValue {
    pub fn new(value: f64, length_exponent: u32) -> Result<Self, TphdError> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(TphdError::BadValue(value));
        }
        if length_exponent == 0 {
            return Err(TphdError::ZeroExponent);
        }
        Ok(Self { value, length_exponent })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn length_exponent(&self) -> u32 {
        self.length_exponent
    }
}

/// Orders two density values iff they carry the same unit.
///
/// Values read off trajectories of different lengths live in different
/// units (`1/length^i` vs `1/length^j`), so no ordering between them is
/// defined — asking for one is an error, not a judgment call. This refusal
/// is the point: any peak-picking scheme that ranks such values is comparing
/// quantities that cannot be compared.
pub fn compare_densities(a: UnitTaggedValue, b: UnitTaggedValue) -> Result<Ordering, TphdError> {
    if a.length_exponent != b.length_exponent {
        return Err(TphdError::Incommensurable {
            left: a.length_exponent,
            right: b.length_exponent,
        });
    }
    Ok(a.value.total_cmp(&b.value))
}

// ============================================================================
// Trajectory intensity
// ============================================================================

/// A discretized intensity over trajectories: a nonnegative value for every
/// `(start k', cells c^{1:i})` with `0 <= k' <= horizon` and
/// `1 <= i <= horizon - k' + 1`, stored sparsely (absent means zero).
///
/// The declared domain must be enumerable (at most [`DEFAULT_DOMAIN_CAP`]
/// trajectories), which keeps [`trajectory_integral`] and the uniform
/// constructor total.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryIntensity {
    grid: Grid,
    horizon: u32,
    k_max: u32,
    values: BTreeMap<(u32, Vec<Cell>), f64>,
}

/// Number of discretized trajectories for a horizon over a grid:
/// `sum over k' and admissible i of cells^i`.
pub fn domain_size(grid: &Grid, horizon: u32) -> u128 {
    let g = grid.len() as u128;
    let mut total: u128 = 0;
    for start in 0..=horizon {
        let max_len = horizon - start + 1;
        let mut pow: u128 = 1;
        for _ in 1..=max_len {
            pow = pow.saturating_mul(g);
            total = total.saturating_add(pow);
        }
    }
    total
}

impl TrajectoryIntensity {
    /// An identically-zero intensity over the given domain.
    pub fn zero(grid: Grid, horizon: u32, k_max: u32) -> Result<Self, TphdError> {
        if horizon > k_max {
            return Err(TphdError::HorizonBeyondBound { horizon, k_max });
        }
        let size = domain_size(&grid, horizon);
        if size > DEFAULT_DOMAIN_CAP {
            return Err(TphdError::DomainTooLarge { size, cap: DEFAULT_DOMAIN_CAP });
        }
        Ok(Self { grid, horizon, k_max, values: BTreeMap::new() })
    }

    /// The constant intensity `value` on every trajectory of the domain.
    pub fn uniform(grid: Grid, horizon: u32, k_max: u32, value: f64) -> Result<Self, TphdError> {
        let mut intensity = Self::zero(grid, horizon, k_max)?;
        let cells = intensity.grid.len();
        for start in 0..=horizon {
            let max_len = (horizon - start + 1) as usize;
            for len in 1..=max_len {
                let mut tuple = vec![0usize; len];
                loop {
                    intensity.set(start, tuple.iter().map(|&c| Cell(c)).collect(), value)?;
                    // Mixed-radix increment, last position fastest.
                    let mut pos = len;
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        tuple[pos] += 1;
                        if tuple[pos] < cells {
                            break;
                        }
                        tuple[pos] = 0;
                    }
                    if tuple.iter().all(|&c| c == 0) {
                        break;
                    }
                }
            }
        }
        Ok(intensity)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Current time index: trajectories may start anywhere up to here and
    /// must end by here.
    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Overall scene bound the horizon lives within.
    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    fn check_domain(&self, start: u32, len: usize) -> Result<(), TphdError> {
        let fits = start <= self.horizon
            && len >= 1
            && len as u128 <= (self.horizon - start) as u128 + 1;
        if !fits {
            return Err(TphdError::OutOfDomain { start, len, horizon: self.horizon });
        }
        Ok(())
    }

    /// Sets the density value of one discretized trajectory.
    pub fn set(&mut self, start: u32, cells: Vec<Cell>, value: f64) -> Result<(), TphdError> {
        self.check_domain(start, cells.len())?;
        for &c in &cells {
            if c.0 >= self.grid.len() {
                return Err(TphdError::CellOutOfRange { cell: c, cells: self.grid.len() });
            }
        }
        if !(value.is_finite() && value >= 0.0) {
            return Err(TphdError::BadValue(value));
        }
        if value > 0.0 {
            self.values.insert((start, cells), value);
        } else {
            self.values.remove(&(start, cells));
        }
        Ok(())
    }

    /// Density value at one trajectory of the domain (0 where unset).
    pub fn get(&self, start: u32, cells: &[Cell]) -> Result<f64, TphdError> {
        self.check_domain(start, cells.len())?;
        Ok(self.values.get(&(start, cells.to_vec())).copied().unwrap_or(0.0))
    }

    /// Density value together with its unit `1/length^i`, `i` the
    /// trajectory's length.
    pub fn value_tagged(&self, start: u32, cells: &[Cell]) -> Result<UnitTaggedValue, TphdError> {
        let value = self.get(start, cells)?;
        UnitTaggedValue::new(value, cells.len() as u32)
    }

    /// Nonzero entries in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (u32, &[Cell], f64)> {
        self.values.iter().map(|((start, cells), &v)| (*start, cells.as_slice(), v))
    }
}

/// Integrates the intensity over its whole trajectory domain: the double sum
/// over start time and length of the grid sum, each length-`i` term weighted
/// by `cell_volume^i`. The result is the expected number of trajectories.
pub fn trajectory_integral(intensity: &TrajectoryIntensity) -> f64 {
    let volume = intensity.grid().cell_volume();
    let mut total = KahanSum::new();
    for (_, cells, value) in intensity.entries() {
        total.add(value * volume.powi(cells.len() as i32));
    }
    total.value()
}

// ============================================================================
// Gaussian-mixture trajectory intensities
// ============================================================================

/// One Gaussian component of a mixture intensity: a positive weight, an
/// anchor trajectory `(k0, x0^{1:i0})`, and a symmetric positive-definite
/// covariance over the stacked `i0 * dim` trajectory coordinates.
///
/// The component's density lives only on trajectories with the anchor's
/// exact start time and length; there it is the Gaussian in the stacked
/// coordinates centered at the anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct GmTphdComponent {
    weight: f64,
    anchor: Trajectory<KinematicState>,
    covariance: DMatrix<f64>,
}

impl GmTphdComponent {
    pub fn new(
        weight: f64,
        anchor: Trajectory<KinematicState>,
        covariance: DMatrix<f64>,
    ) -> Result<Self, TphdError> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(TphdError::BadWeight(weight));
        }
        let dim = anchor.states()[0].dim();
        let stacked = anchor.len() * dim;
        if covariance.nrows() != stacked || covariance.ncols() != stacked {
            return Err(TphdError::CovarianceShape {
                rows: covariance.nrows(),
                cols: covariance.ncols(),
                expected: stacked,
            });
        }
        let max_asymmetry = (0..stacked)
            .flat_map(|i| (0..stacked).map(move |j| (i, j)))
            .map(|(i, j)| (covariance[(i, j)] - covariance[(j, i)]).abs())
            .fold(0.0f64, f64::max);
        if max_asymmetry > 1e-9 {
            return Err(TphdError::CovarianceNotSymmetric { max_asymmetry });
        }
        let eigen = covariance.clone().symmetric_eigen();
        if let Some(&eigenvalue) =
            eigen.eigenvalues.iter().find(|&&ev| ev <= SPD_TOLERANCE)
        {
            return Err(TphdError::CovarianceNotSpd { eigenvalue });
        }
        Ok(Self { weight, anchor, covariance })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn anchor(&self) -> &Trajectory<KinematicState> {
        &self.anchor
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Trajectory length the component lives on.
    pub fn length(&self) -> usize {
        self.anchor.len()
    }
}

/// Result of assembling a Gaussian mixture into a trajectory intensity.
#[derive(Clone, Debug, PartialEq)]
pub enum GmBuildOutcome {
    /// All components share one trajectory length; the mixture is a
    /// well-defined function and has been evaluated on the grid.
    Evaluable(TrajectoryIntensity),
    /// Components disagree on trajectory length: their sum would add values
    /// of different units, so no function is produced — only the diagnosis.
    MixedLength(MixedLengthReport),
}

/// The length classes of a mixed-length mixture: trajectory length to the
/// (input-order) indices of the components anchored at that length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedLengthReport {
    classes: BTreeMap<usize, Vec<usize>>,
}

impl MixedLengthReport {
    pub fn classes(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.classes
    }

    /// The two smallest conflicting unit exponents, for error reporting.
    pub fn conflicting_exponents(&self) -> (u32, u32) {
        let mut lengths = self.classes.keys();
        let left = *lengths.next().expect("a mixed report has >= 2 classes") as u32;
        let right = *lengths.next().expect("a mixed report has >= 2 classes") as u32;
        (left, right)
    }
}

impl fmt::Display for MixedLengthReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mixture spans incompatible trajectory lengths:")?;
        for (len, members) in &self.classes {
            write!(f, " length {len} from components {members:?};")?;
        }
        Ok(())
    }
}

/// Evaluates the mixture `n_bar * sum_j w_j * Gaussian_j` on the discretized
/// trajectory domain, if it is a well-defined function.
///
/// Each component contributes on the grid tuples with its anchor's start
/// time and length (midpoint evaluation per cell). If the components do not
/// all share one trajectory length, their sum would mix units and the
/// outcome is a [`MixedLengthReport`] instead of an intensity. With weights
/// summing to 1 the built intensity integrates to `n_bar`, up to
/// discretization error.
pub fn gm_tphd_build(
    components: &[GmTphdComponent],
    n_bar: f64,
    grid: &Grid,
    horizon: u32,
) -> Result<GmBuildOutcome, TphdError> {
    if !(n_bar.is_finite() && n_bar > 0.0) {
        return Err(TphdError::BadExpectedCount(n_bar));
    }
    if components.is_empty() {
        return Err(TphdError::EmptyMixture);
    }
    for component in components {
        if component.anchor.states()[0].dim() != grid.dim() {
            return Err(TphdError::AnchorDimensionMismatch {
                expected: grid.dim(),
                got: component.anchor.states()[0].dim(),
            });
        }
    }

    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (j, component) in components.iter().enumerate() {
        classes.entry(component.length()).or_default().push(j);
    }
    if classes.len() > 1 {
        return Ok(GmBuildOutcome::MixedLength(MixedLengthReport { classes }));
    }

    let length = *classes.keys().next().expect("one class");
    let evals = (components.len() as u128).saturating_mul((grid.len() as u128).pow(length as u32));
    if evals > DEFAULT_DOMAIN_CAP {
        return Err(TphdError::DomainTooLarge { size: evals, cap: DEFAULT_DOMAIN_CAP });
    }

    let mut accumulated: BTreeMap<(u32, Vec<Cell>), f64> = BTreeMap::new();
    for component in components {
        let start = component.anchor.start_time();
        let chol = Cholesky::new(component.covariance.clone())
            .ok_or(TphdError::CovarianceNotSpd { eigenvalue: 0.0 })?;
        let stacked = component.covariance.nrows();
        let norm = ((2.0 * std::f64::consts::PI).powi(stacked as i32) * chol.determinant())
            .sqrt()
            .recip();
        let anchor_coords: Vec<f64> = component
            .anchor
            .states()
            .iter()
            .flat_map(|s| s.coords().iter().copied())
            .collect();

        let cells = grid.len();
        let mut tuple = vec![0usize; length];
        loop {
            let mut v = DVector::zeros(stacked);
            let mut offset = 0;
            for (t, &c) in tuple.iter().enumerate() {
                let center = grid.center(Cell(c));
                for (axis, &x) in center.coords().iter().enumerate() {
                    v[offset] = x - anchor_coords[t * grid.dim() + axis];
                    offset += 1;
                }
            }
            let q = v.dot(&chol.solve(&v));
            let density = component.weight * norm * (-0.5 * q).exp();
            if density > 0.0 {
                *accumulated
                    .entry((start, tuple.iter().map(|&c| Cell(c)).collect()))
                    .or_insert(0.0) += density;
            }
            let mut pos = length;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                tuple[pos] += 1;
                if tuple[pos] < cells {
                    break;
                }
                tuple[pos] = 0;
            }
            if tuple.iter().all(|&c| c == 0) {
                break;
            }
        }
    }

    let mut intensity = TrajectoryIntensity::zero(grid.clone(), horizon, horizon)?;
    for ((start, cells), value) in accumulated {
        intensity.set(start, cells, n_bar * value)?;
    }
    Ok(GmBuildOutcome::Evaluable(intensity))
}

/// The peak-picking estimate over a Gaussian-mixture intensity: round the
/// expected count half-up and report that many top-weight anchor
/// trajectories (ties broken canonically).
///
/// Defined only when every component shares one trajectory length. With
/// mixed lengths the weights rank values of different units, so "highest
/// peak" does not mean anything and the call fails with the two offending
/// exponents — there is no principled way to pick the peaks, which is the
/// finding this operation mechanizes.
pub fn gm_tphd_estimate(
    components: &[GmTphdComponent],
    n_bar: f64,
) -> Result<SoT<KinematicState>, TphdError> {
    if !(n_bar.is_finite() && n_bar > 0.0) {
        return Err(TphdError::BadExpectedCount(n_bar));
    }
    if components.is_empty() {
        return Err(TphdError::EmptyMixture);
    }
    let mut lengths: Vec<usize> = components.iter().map(GmTphdComponent::length).collect();
    lengths.sort_unstable();
    lengths.dedup();
    if let [left, right, ..] = lengths[..] {
        return Err(TphdError::Incommensurable { left: left as u32, right: right as u32 });
    }

    let n = round_half_up(n_bar);
    let mut ranked: Vec<&GmTphdComponent> = components.iter().collect();
    ranked.sort_by(|a, b| {
        b.weight.total_cmp(&a.weight).then_with(|| a.anchor.cmp(&b.anchor))
    });
    Ok(SoT::new(ranked.into_iter().take(n).map(|c| c.anchor.clone())))
}

// ============================================================================
// Poisson density over sets of trajectories
// ============================================================================

/// The would-be Poisson model over sets of trajectories: an intensity and
/// its total mass.
///
/// The density formula `exp(-mass) * prod of intensity values` is evaluated
/// by [`poisson_sot_density`]. It is *not* a valid distribution over sets of
/// trajectories — it fails to vanish on physically impossible sets — and
/// exhibiting that failure is this type's purpose.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonSotModel {
    intensity: TrajectoryIntensity,
    mass: f64,
}

impl PoissonSotModel {
    pub fn new(intensity: TrajectoryIntensity) -> Self {
        let mass = trajectory_integral(&intensity);
        Self { intensity, mass }
    }

    pub fn intensity(&self) -> &TrajectoryIntensity {
        &self.intensity
    }

    /// Total mass `integral of the intensity over all trajectories`.
    pub fn mass(&self) -> f64 {
        self.mass
    }
}

/// Evaluates `exp(-mass) * prod over trajectories of the intensity value`.
///
/// Every trajectory must lie in the model's domain. The result is positive
/// whenever all factors are — including on sets that no physical scene can
/// produce (the same history present twice, in split or duplicated form),
/// which is precisely why no Poisson distribution over sets of trajectories
/// exists: a genuine distribution would have to vanish there.
pub fn poisson_sot_density(model: &PoissonSotModel, sot: &SoT<Cell>) -> Result<f64, TphdError> {
    let mut density = (-model.mass).exp();
    for trajectory in sot.iter() {
        density *= model.intensity.get(trajectory.start_time(), trajectory.states())?;
    }
    Ok(density)
}

// ============================================================================
// Tests
// ============================================================================
