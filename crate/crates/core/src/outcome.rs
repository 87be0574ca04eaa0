//! The ±1-valued outcomes of a polarisation measurement.

use serde::{Deserialize, Serialize};

/// A single polarisation measurement outcome, +1 or −1.
///
/// Serialized as the integer `1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    /// Both outcomes, in the canonical order (+1, −1).
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    /// The numeric value of the outcome.
    pub fn value(self) -> i32 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    /// Canonical index: +1 ↦ 0, −1 ↦ 1.
    ///
    /// +1 corresponds to the first computational basis vector, so this
    /// doubles as the basis index selected by the outcome's projector.
    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        o.value() as i8
    }
}

impl TryFrom<i8> for Outcome {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(format!("outcome must be 1 or -1, got {other}")),
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// The four joint outcomes (p, q), in the fixed order
/// (+1,+1), (+1,−1), (−1,+1), (−1,−1).
///
/// Every probability table, tally and serialized document in this crate
/// lists joint outcomes in this order.
pub const JOINT_OUTCOMES: [(Outcome, Outcome); 4] = [
    (Outcome::Plus, Outcome::Plus),
    (Outcome::Plus, Outcome::Minus),
    (Outcome::Minus, Outcome::Plus),
    (Outcome::Minus, Outcome::Minus),
];

/// Index of the joint outcome (p, q) in [`JOINT_OUTCOMES`].
pub fn joint_index(p: Outcome, q: Outcome) -> usize {
    2 * p.index() + q.index()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_and_indices() {
        assert_eq!(Outcome::Plus.value(), 1);
        assert_eq!(Outcome::Minus.value(), -1);
        assert_eq!(Outcome::Plus.index(), 0);
        assert_eq!(Outcome::Minus.index(), 1);
    }

    #[test]
    fn joint_order_is_canonical() {
        let idx: Vec<usize> = JOINT_OUTCOMES
            .iter()
            .map(|&(p, q)| joint_index(p, q))
            .collect();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }

    #[test]
    fn try_from_rejects_invalid() {
        assert!(Outcome::try_from(0i8).is_err());
        assert!(Outcome::try_from(2i8).is_err());
        assert_eq!(Outcome::try_from(1i8).unwrap(), Outcome::Plus);
        assert_eq!(Outcome::try_from(-1i8).unwrap(), Outcome::Minus);
    }
}
