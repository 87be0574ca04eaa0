//! Polariser settings: a single (a, b) pair and the four-angle experiment
//! configuration {a₁, a₂} × {b₁, b₂}.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SettingError {
    #[error("polariser angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error("angle pair ({0}, {1}) is not one of the configured settings")]
    UnconfiguredSetting(f64, f64),
}

/// One polariser configuration: Alice's angle `a` and Bob's angle `b`,
/// in radians. Both angles are finite by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SettingPair {
    a: f64,
    b: f64,
}

impl SettingPair {
    pub fn new(a: f64, b: f64) -> Result<Self, SettingError> {
        for angle in [a, b] {
            if !angle.is_finite() {
                return Err(SettingError::NonFiniteAngle(angle));
            }
        }
        Ok(SettingPair { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// The angle difference a − b that the joint statistics depend on.
    pub fn difference(&self) -> f64 {
        self.a - self.b
    }
}

/// The full experiment configuration: two candidate angles per side.
///
/// Setting blocks are always enumerated in the order
/// (a₁,b₁), (a₁,b₂), (a₂,b₁), (a₂,b₂), matching the sign pattern of the
/// CHSH combination S = E(a₁,b₁) − E(a₁,b₂) + E(a₂,b₁) + E(a₂,b₂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingAngles {
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
}

/// Sign carried by each setting block in the CHSH combination, in block order.
pub const CHSH_SIGNS: [f64; 4] = [1.0, -1.0, 1.0, 1.0];

impl SettingAngles {
    pub fn new(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self, SettingError> {
        for angle in [a1, a2, b1, b2] {
            if !angle.is_finite() {
                return Err(SettingError::NonFiniteAngle(angle));
            }
        }
        Ok(SettingAngles { a1, a2, b1, b2 })
    }

    /// The configuration used by Aspect et al.: a ∈ {0, π/4}, b ∈ {π/8, 3π/8}.
    pub fn aspect() -> Self {
        use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
        SettingAngles {
            a1: 0.0,
            a2: FRAC_PI_4,
            b1: FRAC_PI_8,
            b2: 3.0 * FRAC_PI_8,
        }
    }

    pub fn a(&self, index: usize) -> f64 {
        match index {
            0 => self.a1,
            1 => self.a2,
            _ => panic!("a-setting index must be 0 or 1, got {index}"),
        }
    }

    pub fn b(&self, index: usize) -> f64 {
        match index {
            0 => self.b1,
            1 => self.b2,
            _ => panic!("b-setting index must be 0 or 1, got {index}"),
        }
    }

    /// The setting pair selected by a pair of indices.
    pub fn pair(&self, a_index: usize, b_index: usize) -> SettingPair {
        SettingPair {
            a: self.a(a_index),
            b: self.b(b_index),
        }
    }

    /// All four setting pairs in canonical block order.
    pub fn pairs(&self) -> [SettingPair; 4] {
        [
            self.pair(0, 0),
            self.pair(0, 1),
            self.pair(1, 0),
            self.pair(1, 1),
        ]
    }

    /// All four (a_index, b_index) pairs in canonical block order.
    pub fn index_pairs() -> [(usize, usize); 4] {
        [(0, 0), (0, 1), (1, 0), (1, 1)]
    }

    /// True when the two a-angles or the two b-angles coincide.
    ///
    /// The induced measure stays well-defined; callers may want to warn.
    pub fn degenerate(&self) -> bool {
        self.a1 == self.a2 || self.b1 == self.b2
    }

    /// Resolve an angle pair to setting indices, matching each angle
    /// against the configured candidates within `tol`.
    pub fn resolve(&self, a: f64, b: f64, tol: f64) -> Result<(usize, usize), SettingError> {
        let a_index = [self.a1, self.a2]
            .iter()
            .position(|&x| (x - a).abs() <= tol);
        let b_index = [self.b1, self.b2]
            .iter()
            .position(|&x| (x - b).abs() <= tol);
        match (a_index, b_index) {
            (Some(ai), Some(bi)) => Ok((ai, bi)),
            _ => Err(SettingError::UnconfiguredSetting(a, b)),
        }
    }
}
