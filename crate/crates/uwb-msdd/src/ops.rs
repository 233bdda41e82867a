//! Multiplication-unit accounting for the detector metrics.
//!
//! Two counters are kept side by side:
//!
//! * `units` tallies metric multiplication units under the documented
//!   accounting convention: one unit per 2x2 trace/Frobenius inner product
//!   attributed to a candidate-class evaluation.  Candidate classes are
//!   counted over rotation patterns (`2^M` per window for the exhaustive
//!   detectors, `2^L` per stage for the Viterbi detectors); sign patterns are
//!   resolved by sign flips and are not charged.  This is the unit in which
//!   the complexity comparisons of the four detectors are expressed, and it
//!   scales with the work the detectors actually perform per window/stage.
//! * `trace_evals` counts the raw 2x2 inner products the optimized code
//!   executes.  The code-book group structure lets the implementation share
//!   base traces across all candidates, so this grows much more slowly; it is
//!   reported for transparency next to the unit counts.

/// Counter pair accumulated by the detectors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    /// Metric multiplication units (accounting convention above).
    pub units: u64,
    /// Raw executed 2x2 inner products.
    pub trace_evals: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_units(&mut self, n: u64) {
        self.units += n;
    }

    pub fn add_trace_evals(&mut self, n: u64) {
        self.trace_evals += n;
    }

    pub fn merge(&mut self, other: &OpCounter) {
        self.units += other.units;
        self.trace_evals += other.trace_evals;
    }
}
