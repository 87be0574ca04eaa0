//! The explicit classical probability space behind the experiment: the
//! 16-point space {±1}² × {a₁,a₂} × {b₁,b₂} carrying the uniform mixture
//! of the four per-setting outcome measures.
//!
//! Every query in this module is an exact finite sum over the 16 points;
//! nothing here samples. The Monte-Carlo harness uses these values as its
//! reference distribution.

use serde::Serialize;
use thiserror::Error;

use crate::distribution::OutcomeDistribution;
use crate::outcome::{joint_index, Outcome, JOINT_OUTCOMES};
use crate::settings::{SettingAngles, SettingError, CHSH_SIGNS};

/// Tolerance used when matching queried angles against configured ones
/// and when deciding whether a factorization deviation is genuine.
pub const MEASURE_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Setting(#[from] SettingError),
    #[error("variable {0} is assigned in both target and condition")]
    OverlappingAssignment(&'static str),
    #[error("conditioning event {{{0}}} has probability zero")]
    ZeroProbabilityCondition(String),
    #[error("correction factor {name} = {value} outside (0, 1]")]
    CorrectionOutOfRange { name: &'static str, value: f64 },
    #[error("value {0} is not finite")]
    NonFinite(f64),
}

/// The probability measure on the 16 points (p, q, a, b).
///
/// Weights are stored flat in block-major order: blocks follow the
/// canonical setting order (a₁,b₁), (a₁,b₂), (a₂,b₁), (a₂,b₂) and cells
/// within a block follow the canonical joint outcome order. Each block
/// carries total weight ¼ and its cells are ¼·½cos²(a−b) on the diagonal
/// outcomes and ¼·½sin²(a−b) off it.
#[derive(Debug, Clone, Serialize)]
pub struct BellMeasure {
    angles: SettingAngles,
    weights: [f64; 16],
}

impl BellMeasure {
    /// Build the measure for the given angle configuration.
    ///
    /// Degenerate configurations (a₁ = a₂ or b₁ = b₂) are permitted: the
    /// measure stays well-defined. Callers that care should check
    /// [`SettingAngles::degenerate`] and warn.
    pub fn new(angles: SettingAngles) -> Self {
        let mut weights = [0.0; 16];
        for (block, (ai, bi)) in SettingAngles::index_pairs().into_iter().enumerate() {
            let block_dist = crate::quantum::closed_form_distribution(angles.pair(ai, bi));
            for (cell, &(p, q)) in JOINT_OUTCOMES.iter().enumerate() {
                weights[4 * block + cell] = 0.25 * block_dist.probability(p, q);
            }
        }
        BellMeasure { angles, weights }
    }

    pub fn angles(&self) -> SettingAngles {
        self.angles
    }

    /// Weight of the single point (p, q, a_index, b_index).
    pub fn weight(&self, p: Outcome, q: Outcome, a_index: usize, b_index: usize) -> f64 {
        self.weights[4 * (2 * a_index + b_index) + joint_index(p, q)]
    }

    /// All 16 weights in canonical order.
    pub fn weights(&self) -> [f64; 16] {
        self.weights
    }

    /// Total weight of a setting block.
    pub fn block_weight(&self, a_index: usize, b_index: usize) -> f64 {
        let base = 4 * (2 * a_index + b_index);
        self.weights[base..base + 4].iter().sum()
    }

    /// Conditional outcome distribution given a setting block.
    pub fn block(&self, a_index: usize, b_index: usize) -> OutcomeDistribution {
        let total = self.block_weight(a_index, b_index);
        let base = 4 * (2 * a_index + b_index);
        OutcomeDistribution::new([
            self.weights[base] / total,
            self.weights[base + 1] / total,
            self.weights[base + 2] / total,
            self.weights[base + 3] / total,
        ])
        .expect("block is a probability table")
    }

    /// Probability of an event, by direct summation over the 16 points.
    pub fn event_probability(&self, event: &Event) -> Result<f64, MeasureError> {
        let resolved = event.resolve(&self.angles)?;
        let mut sum = 0.0;
        for (ai, bi) in SettingAngles::index_pairs() {
            for &(p, q) in &JOINT_OUTCOMES {
                if resolved.matches(p, q, ai, bi) {
                    sum += self.weight(p, q, ai, bi);
                }
            }
        }
        Ok(sum)
    }

    /// Conditional probability P(target | condition).
    pub fn conditional_probability(&self, query: &ConditionalQuery) -> Result<f64, MeasureError> {
        let condition = self.event_probability(&query.condition)?;
        if condition <= 0.0 {
            return Err(MeasureError::ZeroProbabilityCondition(
                query.condition.to_string(),
            ));
        }
        let joint = self.event_probability(&query.target.intersect(&query.condition))?;
        Ok(joint / condition)
    }

    /// Marginal law of Alice's outcome given the setting pair (a, b):
    /// [P(ε_A = +1 | a, b), P(ε_A = −1 | a, b)].
    ///
    /// The angles must match one of the configured settings. The result is
    /// ½ for both outcomes and does not depend on which b is supplied.
    pub fn marginal_a(&self, a: f64, b: f64) -> Result<[f64; 2], MeasureError> {
        let (ai, bi) = self.angles.resolve(a, b, MEASURE_TOL)?;
        Ok(self.block(ai, bi).marginal_a())
    }

    /// Marginal law of Bob's outcome given the setting pair (a, b).
    pub fn marginal_b(&self, a: f64, b: f64) -> Result<[f64; 2], MeasureError> {
        let (ai, bi) = self.angles.resolve(a, b, MEASURE_TOL)?;
        Ok(self.block(ai, bi).marginal_b())
    }

    /// Check, per setting, whether the joint conditional law factorizes
    /// into the product of its two one-sided conditionals.
    pub fn check_a3_factorization(&self) -> FactorizationReport {
        let mut worst: f64 = 0.0;
        let mut worst_setting = (self.angles.a(0), self.angles.b(0));
        let mut worst_cell = (Outcome::Plus, Outcome::Plus);
        for (ai, bi) in SettingAngles::index_pairs() {
            let block = self.block(ai, bi);
            let ma = block.marginal_a();
            let mb = block.marginal_b();
            for &(p, q) in &JOINT_OUTCOMES {
                let joint = block.probability(p, q);
                let product = ma[p.index()] * mb[q.index()];
                let deviation = (joint - product).abs();
                if deviation > worst {
                    worst = deviation;
                    worst_setting = (self.angles.a(ai), self.angles.b(bi));
                    worst_cell = (p, q);
                }
            }
        }
        FactorizationReport {
            holds: worst <= MEASURE_TOL,
            worst_deviation: worst,
            worst_setting,
            worst_cell,
        }
    }

    /// The CHSH value of the measure: the signed sum of the four exact
    /// block correlators.
    pub fn chsh_value(&self) -> f64 {
        SettingAngles::index_pairs()
            .into_iter()
            .zip(CHSH_SIGNS)
            .map(|((ai, bi), sign)| sign * self.block(ai, bi).correlator())
            .sum()
    }

    /// Canonical JSON document: angles plus the 16 weights in fixed order.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("measure serializes")
    }
}

/// Closed-form CHSH value of the angle configuration:
/// cos 2(a₁−b₁) − cos 2(a₁−b₂) + cos 2(a₂−b₁) + cos 2(a₂−b₂).
pub fn chsh_closed_form(angles: &SettingAngles) -> f64 {
    SettingAngles::index_pairs()
        .into_iter()
        .zip(CHSH_SIGNS)
        .map(|((ai, bi), sign)| sign * (2.0 * (angles.a(ai) - angles.b(bi))).cos())
        .sum()
}

/// Scale an ideal CHSH value by the detection solid-angle factor `f` and
/// the polariser transmission factor `t`, both in (0, 1].
pub fn corrected_prediction(s: f64, f: f64, t: f64) -> Result<f64, MeasureError> {
    if !s.is_finite() {
        return Err(MeasureError::NonFinite(s));
    }
    for (name, value) in [("F", f), ("T", t)] {
        if !(value > 0.0 && value <= 1.0) {
            return Err(MeasureError::CorrectionOutOfRange { name, value });
        }
    }
    Ok(f * t * s)
}

/// Partial assignment of the four experiment variables
/// (ε_A, ε_B, γ_A, γ_B). Unassigned variables are unconstrained.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Event {
    pub outcome_a: Option<Outcome>,
    pub outcome_b: Option<Outcome>,
    pub angle_a: Option<f64>,
    pub angle_b: Option<f64>,
}

impl Event {
    pub fn outcome_a(p: Outcome) -> Self {
        Event {
            outcome_a: Some(p),
            ..Default::default()
        }
    }

    pub fn outcome_b(q: Outcome) -> Self {
        Event {
            outcome_b: Some(q),
            ..Default::default()
        }
    }

    pub fn with_angle_a(mut self, a: f64) -> Self {
        self.angle_a = Some(a);
        self
    }

    pub fn with_angle_b(mut self, b: f64) -> Self {
        self.angle_b = Some(b);
        self
    }

    pub fn with_outcome_b(mut self, q: Outcome) -> Self {
        self.outcome_b = Some(q);
        self
    }

    fn intersect(&self, other: &Event) -> Event {
        Event {
            outcome_a: self.outcome_a.or(other.outcome_a),
            outcome_b: self.outcome_b.or(other.outcome_b),
            angle_a: self.angle_a.or(other.angle_a),
            angle_b: self.angle_b.or(other.angle_b),
        }
    }

    fn resolve(&self, angles: &SettingAngles) -> Result<ResolvedEvent, MeasureError> {
        let resolve_a = |angle: f64| {
            [angles.a(0), angles.a(1)]
                .iter()
                .position(|&x| (x - angle).abs() <= MEASURE_TOL)
                .ok_or(SettingError::UnconfiguredSetting(angle, f64::NAN))
        };
        let resolve_b = |angle: f64| {
            [angles.b(0), angles.b(1)]
                .iter()
                .position(|&x| (x - angle).abs() <= MEASURE_TOL)
                .ok_or(SettingError::UnconfiguredSetting(f64::NAN, angle))
        };
        Ok(ResolvedEvent {
            outcome_a: self.outcome_a,
            outcome_b: self.outcome_b,
            a_index: self.angle_a.map(resolve_a).transpose()?,
            b_index: self.angle_b.map(resolve_b).transpose()?,
        })
    }
}

impl std::fmt::Display for Event {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if let Some(p) = self.outcome_a {
            parts.push(format!("eps_A={p}"));
        }
        if let Some(q) = self.outcome_b {
            parts.push(format!("eps_B={q}"));
        }
        if let Some(a) = self.angle_a {
            parts.push(format!("gamma_A={a}"));
        }
        if let Some(b) = self.angle_b {
            parts.push(format!("gamma_B={b}"));
        }
        if parts.is_empty() {
            parts.push("true".to_string());
        }
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Debug, Clone, Copy)]
struct ResolvedEvent {
    outcome_a: Option<Outcome>,
    outcome_b: Option<Outcome>,
    a_index: Option<usize>,
    b_index: Option<usize>,
}

impl ResolvedEvent {
    fn matches(&self, p: Outcome, q: Outcome, ai: usize, bi: usize) -> bool {
        self.outcome_a.is_none_or(|x| x == p)
            && self.outcome_b.is_none_or(|x| x == q)
            && self.a_index.is_none_or(|x| x == ai)
            && self.b_index.is_none_or(|x| x == bi)
    }
}

/// A conditional probability query P(target | condition). The target and
/// condition must constrain disjoint variable sets.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalQuery {
    target: Event,
    condition: Event,
}

impl ConditionalQuery {
    pub fn new(target: Event, condition: Event) -> Result<Self, MeasureError> {
        if target.outcome_a.is_some() && condition.outcome_a.is_some() {
            return Err(MeasureError::OverlappingAssignment("eps_A"));
        }
        if target.outcome_b.is_some() && condition.outcome_b.is_some() {
            return Err(MeasureError::OverlappingAssignment("eps_B"));
        }
        if target.angle_a.is_some() && condition.angle_a.is_some() {
            return Err(MeasureError::OverlappingAssignment("gamma_A"));
        }
        if target.angle_b.is_some() && condition.angle_b.is_some() {
            return Err(MeasureError::OverlappingAssignment("gamma_B"));
        }
        Ok(ConditionalQuery { target, condition })
    }

    pub fn target(&self) -> &Event {
        &self.target
    }

    pub fn condition(&self) -> &Event {
        &self.condition
    }
}

/// Outcome of the per-setting factorization comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FactorizationReport {
    /// True when every joint conditional equals the product of its
    /// one-sided conditionals within [`MEASURE_TOL`].
    pub holds: bool,
    pub worst_deviation: f64,
    pub worst_setting: (f64, f64),
    pub worst_cell: (Outcome, Outcome),
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

    fn aspect_measure() -> BellMeasure {
        BellMeasure::new(SettingAngles::aspect())
    }

    #[test]
    fn weight_at_first_block_diagonal_cell() {
        // ¼ · ½cos²(0 − π/8), evaluated independently.
        let m = aspect_measure();
        let expected = 0.25 * 0.5 * (0.0f64 - FRAC_PI_8).cos().powi(2);
        let got = m.weight(Outcome::Plus, Outcome::Plus, 0, 0);
        assert!((got - expected).abs() <= MEASURE_TOL);
        assert!((got - 0.1066941738).abs() < 1e-9);
    }

    #[test]
    fn block_weights_are_quarter() {
        let m = aspect_measure();
        for (ai, bi) in SettingAngles::index_pairs() {
            assert!((m.block_weight(ai, bi) - 0.25).abs() <= MEASURE_TOL);
        }
    }

    #[test]
    fn equal_angles_kill_anticorrelated_cells() {
        let angles = SettingAngles::new(0.4, 1.0, 0.4, 2.0).unwrap();
        let m = BellMeasure::new(angles);
        assert!(m.weight(Outcome::Plus, Outcome::Minus, 0, 0).abs() <= MEASURE_TOL);
        assert!(m.weight(Outcome::Minus, Outcome::Plus, 0, 0).abs() <= MEASURE_TOL);
    }

    #[test]
    fn conditional_on_other_side_outcome() {
        // P(ε_A=+1 | γ_A=a, γ_B=b, ε_B=+1) = cos²(a−b) for every setting,
        // while P(ε_A=+1 | γ_A=a) stays ½.
        let m = aspect_measure();
        let angles = m.angles();
        for (ai, bi) in SettingAngles::index_pairs() {
            let (a, b) = (angles.a(ai), angles.b(bi));
            let q = ConditionalQuery::new(
                Event::outcome_a(Outcome::Plus),
                Event::outcome_b(Outcome::Plus)
                    .with_angle_a(a)
                    .with_angle_b(b),
            )
            .unwrap();
            let got = m.conditional_probability(&q).unwrap();
            assert!((got - (a - b).cos().powi(2)).abs() <= MEASURE_TOL);
        }
        for a in [angles.a(0), angles.a(1)] {
            let q = ConditionalQuery::new(
                Event::outcome_a(Outcome::Plus),
                Event::default().with_angle_a(a),
            )
            .unwrap();
            assert!((m.conditional_probability(&q).unwrap() - 0.5).abs() <= MEASURE_TOL);
        }
    }

    #[test]
    fn conditional_on_bob_side_only() {
        // Summation oracle: P(ε_B=−1 | γ_B=b) over all 16 points is ½.
        let m = aspect_measure();
        for b in [m.angles().b(0), m.angles().b(1)] {
            let q = ConditionalQuery::new(
                Event::outcome_b(Outcome::Minus),
                Event::default().with_angle_b(b),
            )
            .unwrap();
            assert!((m.conditional_probability(&q).unwrap() - 0.5).abs() <= MEASURE_TOL);
        }
    }

    #[test]
    fn zero_probability_condition_is_an_error() {
        // Both b-angles equal Alice's first angle (degenerate but legal),
        // so anticorrelated outcomes under γ_A = a₁ carry no mass at all;
        // conditioning on them must fail loudly.
        let angles = SettingAngles::new(0.3, 1.5, 0.3, 0.3).unwrap();
        assert!(angles.degenerate());
        let m = BellMeasure::new(angles);
        let q = ConditionalQuery::new(
            Event::default().with_angle_b(0.3),
            Event::outcome_a(Outcome::Plus)
                .with_outcome_b(Outcome::Minus)
                .with_angle_a(0.3),
        )
        .unwrap();
        assert!(matches!(
            m.conditional_probability(&q),
            Err(MeasureError::ZeroProbabilityCondition(_))
        ));
    }

    #[test]
    fn overlapping_assignment_rejected() {
        let err = ConditionalQuery::new(
            Event::outcome_a(Outcome::Plus),
            Event::outcome_a(Outcome::Minus),
        )
        .unwrap_err();
        assert_eq!(err, MeasureError::OverlappingAssignment("eps_A"));
    }

    #[test]
    fn marginals_are_uniform_and_b_invariant() {
        let m = aspect_measure();
        let angles = m.angles();
        let with_b1 = m.marginal_a(angles.a(0), angles.b(0)).unwrap();
        let with_b2 = m.marginal_a(angles.a(0), angles.b(1)).unwrap();
        for i in 0..2 {
            assert!((with_b1[i] - 0.5).abs() <= MEASURE_TOL);
            assert!((with_b1[i] - with_b2[i]).abs() <= MEASURE_TOL);
        }
        let mb = m.marginal_b(angles.a(1), angles.b(0)).unwrap();
        assert!((mb[0] - 0.5).abs() <= MEASURE_TOL);
        assert!((mb[1] - 0.5).abs() <= MEASURE_TOL);
    }

    #[test]
    fn marginal_rejects_unconfigured_setting() {
        let m = aspect_measure();
        assert!(matches!(
            m.marginal_a(0.123, m.angles().b(0)),
            Err(MeasureError::Setting(SettingError::UnconfiguredSetting(..)))
        ));
    }

    #[test]
    fn a3_violated_at_aspect_angles() {
        let report = aspect_measure().check_a3_factorization();
        assert!(!report.holds);
        // Maximizing cell deviation |½cos²(a−b) − ¼|, computed directly.
        let expected = (0.5 * FRAC_PI_8.cos().powi(2) - 0.25).abs();
        assert!((report.worst_deviation - expected).abs() <= MEASURE_TOL);
        assert!(report.worst_deviation >= 0.1);
    }

    #[test]
    fn a3_holds_when_every_difference_is_quarter_pi() {
        // |a−b| ∈ {π/4, 3π/4} for all four settings makes every block the
        // uniform table, which is product-form.
        let angles = SettingAngles::new(0.0, FRAC_PI_2, FRAC_PI_4, -FRAC_PI_4).unwrap();
        let m = BellMeasure::new(angles);
        for (ai, bi) in SettingAngles::index_pairs() {
            for prob in m.block(ai, bi).probabilities() {
                assert!((prob - 0.25).abs() <= MEASURE_TOL);
            }
        }
        let report = m.check_a3_factorization();
        assert!(report.holds, "worst deviation {}", report.worst_deviation);
    }

    #[test]
    fn chsh_value_at_aspect_angles() {
        let s = aspect_measure().chsh_value();
        assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() <= MEASURE_TOL);
    }

    #[test]
    fn chsh_value_equal_angles() {
        let angles = SettingAngles::new(0.7, 0.7, 0.7, 0.7).unwrap();
        assert!((BellMeasure::new(angles).chsh_value() - 2.0).abs() <= MEASURE_TOL);
    }

    #[test]
    fn chsh_value_orthogonal_configuration() {
        // Every term has |a−b| ∈ {π/4, 3π/4}: all correlators vanish.
        let angles = SettingAngles::new(0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
        assert!(BellMeasure::new(angles).chsh_value().abs() <= MEASURE_TOL);
    }

    #[test]
    fn chsh_matches_closed_form() {
        for quad in [
            (0.0, FRAC_PI_4, FRAC_PI_8, 3.0 * FRAC_PI_8),
            (0.2, 1.3, -0.4, 2.9),
            (PI, -PI, 0.5, 0.5),
        ] {
            let angles = SettingAngles::new(quad.0, quad.1, quad.2, quad.3).unwrap();
            let m = BellMeasure::new(angles);
            assert!((m.chsh_value() - chsh_closed_form(&angles)).abs() <= MEASURE_TOL);
        }
    }

    #[test]
    fn corrected_prediction_matches_reported_band() {
        let s = 2.0 * std::f64::consts::SQRT_2;
        let corrected = corrected_prediction(s, 0.984, 0.971).unwrap();
        assert!((corrected - 2.70).abs() < 0.01);
        assert!((2.682..=2.712).contains(&corrected));
        assert_eq!(corrected_prediction(s, 1.0, 1.0).unwrap(), s);
    }

    #[test]
    fn corrected_prediction_rejects_bad_factors() {
        assert!(corrected_prediction(1.0, 0.0, 0.9).is_err());
        assert!(corrected_prediction(1.0, 0.5, 1.2).is_err());
        assert!(corrected_prediction(f64::NAN, 0.5, 0.5).is_err());
    }

    #[test]
    fn blocks_match_quantum_born_distribution() {
        let m = aspect_measure();
        for (ai, bi) in SettingAngles::index_pairs() {
            let settings = m.angles().pair(ai, bi);
            let born = crate::quantum::joint_born_distribution(settings).unwrap();
            assert!(m.block(ai, bi).max_abs_diff(&born) <= MEASURE_TOL);
        }
    }

    #[test]
    fn canonical_json_is_stable() {
        let m = aspect_measure();
        assert_eq!(m.to_canonical_json(), m.to_canonical_json());
        assert!(m.to_canonical_json().starts_with("{\"angles\""));
    }
}
