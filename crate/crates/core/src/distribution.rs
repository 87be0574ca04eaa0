//! Probability tables over the four-point joint outcome space
//! {−1,1} × {−1,1}.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::outcome::{joint_index, Outcome, JOINT_OUTCOMES};

/// Tolerance on normalisation checks, matching the algebraic entry tolerance.
pub const PROBABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum DistributionError {
    #[error("probability {value} at cell {cell} outside [0, 1]")]
    OutOfRange { cell: usize, value: f64 },
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
}

/// Probabilities of the four joint outcomes, in the fixed order
/// (+1,+1), (+1,−1), (−1,+1), (−1,−1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    probabilities: [f64; 4],
}

impl OutcomeDistribution {
    /// Validate and wrap a probability table. Each entry must lie in
    /// [0, 1] and the sum must equal 1, both within [`PROBABILITY_TOL`].
    pub fn new(probabilities: [f64; 4]) -> Result<Self, DistributionError> {
        for (cell, &p) in probabilities.iter().enumerate() {
            if p.is_nan() || !(-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&p) {
                return Err(DistributionError::OutOfRange { cell, value: p });
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_TOL {
            return Err(DistributionError::NotNormalized(sum));
        }
        Ok(OutcomeDistribution { probabilities })
    }

    pub fn probability(&self, p: Outcome, q: Outcome) -> f64 {
        self.probabilities[joint_index(p, q)]
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.probabilities
    }

    /// Correlator E = Σ pq · n(p, q).
    pub fn correlator(&self) -> f64 {
        JOINT_OUTCOMES
            .iter()
            .map(|&(p, q)| (p.value() * q.value()) as f64 * self.probability(p, q))
            .sum()
    }

    /// Marginal of the first outcome: [P(p = +1), P(p = −1)].
    pub fn marginal_a(&self) -> [f64; 2] {
        [
            self.probabilities[0] + self.probabilities[1],
            self.probabilities[2] + self.probabilities[3],
        ]
    }

    /// Marginal of the second outcome: [P(q = +1), P(q = −1)].
    pub fn marginal_b(&self) -> [f64; 2] {
        [
            self.probabilities[0] + self.probabilities[2],
            self.probabilities[1] + self.probabilities[3],
        ]
    }

    /// Largest absolute cell difference to `other`.
    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
