//! Small numeric helpers shared across the crate.

/// Compensated (Kahan) accumulator for long sums of `f64` terms.
///
/// Keeps the rounding error of a sum near one ulp instead of letting it grow
/// with the number of terms, which matters for enumeration sums on the order
/// of 1e5 terms checked against 1e-9 tolerances.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one term to the sum.
    pub fn add(&mut self, term: f64) {
        let y = term - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    /// Current value of the accumulated sum.
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Compensated sum of an iterator of terms, in iteration order.
pub fn kahan_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

/// Rounds half up: 0.49 -> 0, 0.5 -> 1, 1.5 -> 2.
///
/// Defined for nonnegative finite inputs; this is the rounding rule used to
/// turn expected cardinalities into integer target counts.
pub fn round_half_up(x: f64) -> usize {
    debug_assert!(x.is_finite() && x >= 0.0, "round_half_up expects x >= 0");
    (x + 0.5).floor() as usize
}
