//! Floating-point bookkeeping shared by the evaluators.

pub(crate) const EPS: f64 = f64::EPSILON;

/// Running sum that also tracks what a worst-case rounding bound needs:
/// the number of accumulated terms and the sum of their magnitudes.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Accumulator {
    pub sum: f64,
    pub abs_sum: f64,
    pub count: usize,
}

impl Accumulator {
    pub fn add(&mut self, term: f64) {
        self.sum += term;
        self.abs_sum += term.abs();
        self.count += 1;
    }

    /// Rounding slack for a sum whose terms each carry up to `depth`
    /// roundings of their own (products, powers).
    pub fn slack(&self, depth: usize) -> f64 {
        (self.count + depth + 2) as f64 * EPS * self.abs_sum
    }
}
