//! The quantum description of the experiment: projection-valued measures
//! on ℂ²⊗ℂ², the Bell state, Born-rule outcome statistics, and the
//! partial-trace relation between the joint measurement and the two
//! local ones.
//!
//! Born probabilities are available through two independent routes: the
//! full matrix path ⟨P(o)ψ, ψ⟩ and the closed form ½cos²(a−b) / ½sin²(a−b).
//! Tests hold the two routes to entry-wise agreement; a disagreement
//! would expose a transcription bug in either route.

use serde::Serialize;
use thiserror::Error;

use crate::distribution::{DistributionError, OutcomeDistribution};
use crate::matrix::{
    pauli_z_projector, rotation, Complex64, MatrixError, SquareMatrix, StateVector, ENTRY_TOL,
};
use crate::outcome::{Outcome, JOINT_OUTCOMES};
use crate::settings::SettingPair;

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error("PVM invariant violated: {check} deviates by {deviation}")]
    PvmInvariant { check: &'static str, deviation: f64 },
    #[error("Born probability has imaginary residue {0}, above tolerance")]
    ImaginaryResidue(f64),
    #[error("PVM dimension {pvm} does not match state dimension {state}")]
    DimensionMismatch { pvm: usize, state: usize },
}

/// A projection-valued measure: an ordered finite outcome set with one
/// orthogonal projector per outcome, summing to the identity.
#[derive(Debug, Clone)]
pub struct Pvm<L> {
    outcomes: Vec<L>,
    projectors: Vec<SquareMatrix>,
}

/// Worst per-entry deviations from the four defining PVM properties.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PvmDeviations {
    pub hermiticity: f64,
    pub idempotence: f64,
    pub orthogonality: f64,
    pub completeness: f64,
}

impl PvmDeviations {
    pub fn max(&self) -> f64 {
        self.hermiticity
            .max(self.idempotence)
            .max(self.orthogonality)
            .max(self.completeness)
    }

    /// Name of the worst-violated property.
    pub fn worst_check(&self) -> &'static str {
        let pairs = [
            ("hermiticity", self.hermiticity),
            ("idempotence", self.idempotence),
            ("orthogonality", self.orthogonality),
            ("completeness", self.completeness),
        ];
        pairs
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty")
            .0
    }
}

impl<L: Copy + PartialEq> Pvm<L> {
    /// Build a PVM, checking hermiticity, idempotence, mutual orthogonality
    /// and completeness within [`ENTRY_TOL`].
    pub fn new(outcomes: Vec<L>, projectors: Vec<SquareMatrix>) -> Result<Self, QuantumError> {
        assert_eq!(
            outcomes.len(),
            projectors.len(),
            "one projector per outcome"
        );
        let pvm = Pvm {
            outcomes,
            projectors,
        };
        let dev = pvm.deviations();
        if dev.max() > ENTRY_TOL {
            return Err(QuantumError::PvmInvariant {
                check: dev.worst_check(),
                deviation: dev.max(),
            });
        }
        Ok(pvm)
    }

    /// Build a PVM without validating its invariants.
    ///
    /// Intended for diagnostics and fault-injection: [`Pvm::deviations`]
    /// reports how far the result is from a genuine PVM.
    pub fn from_parts_unchecked(outcomes: Vec<L>, projectors: Vec<SquareMatrix>) -> Self {
        assert_eq!(
            outcomes.len(),
            projectors.len(),
            "one projector per outcome"
        );
        Pvm {
            outcomes,
            projectors,
        }
    }

    pub fn outcomes(&self) -> &[L] {
        &self.outcomes
    }

    pub fn projectors(&self) -> &[SquareMatrix] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn projector(&self, outcome: L) -> Option<&SquareMatrix> {
        self.outcomes
            .iter()
            .position(|&o| o == outcome)
            .map(|i| &self.projectors[i])
    }

    /// Measure the deviation of each defining property.
    pub fn deviations(&self) -> PvmDeviations {
        let dim = self.dim();
        let identity = SquareMatrix::identity(dim).expect("valid dim");
        let zero = SquareMatrix::zeros(dim).expect("valid dim");

        let mut hermiticity: f64 = 0.0;
        let mut idempotence: f64 = 0.0;
        let mut orthogonality: f64 = 0.0;
        let mut sum = zero.clone();
        for (i, p) in self.projectors.iter().enumerate() {
            hermiticity = hermiticity.max(p.max_abs_diff(&p.adjoint()));
            idempotence = idempotence.max(p.matmul(p).max_abs_diff(p));
            for q in &self.projectors[i + 1..] {
                orthogonality = orthogonality.max(p.matmul(q).max_abs_diff(&zero));
            }
            sum = sum.add(p);
        }
        PvmDeviations {
            hermiticity,
            idempotence,
            orthogonality,
            completeness: sum.max_abs_diff(&identity),
        }
    }
}

/// The maximally entangled two-photon state (|00⟩ + |11⟩)/√2.
pub fn bell_state() -> StateVector {
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::new(vec![
        Complex64::new(amp, 0.0),
        Complex64::ZERO,
        Complex64::ZERO,
        Complex64::new(amp, 0.0),
    ])
    .expect("unit norm by construction")
}

/// Projector of a polarisation measurement at angle `gamma` onto `outcome`:
/// R_γ† P_z(outcome) R_γ.
pub fn rotated_projector(gamma: f64, outcome: Outcome) -> Result<SquareMatrix, MatrixError> {
    let r = rotation(gamma)?;
    Ok(r.adjoint().matmul(&pauli_z_projector(outcome)).matmul(&r))
}

/// The joint measurement for a polariser configuration (a, b): four
/// projectors R_a†P_z({p})R_a ⊗ R_b†P_z({q})R_b over the outcomes (p, q).
pub fn joint_pvm(settings: SettingPair) -> Pvm<(Outcome, Outcome)> {
    let projectors = JOINT_OUTCOMES
        .iter()
        .map(|&(p, q)| {
            let left = rotated_projector(settings.a(), p).expect("finite angle");
            let right = rotated_projector(settings.b(), q).expect("finite angle");
            left.tensor(&right).expect("2x2 factors")
        })
        .collect();
    Pvm::new(JOINT_OUTCOMES.to_vec(), projectors).expect("projective by construction")
}

/// Alice's local measurement on the joint space: R_a†P_zR_a ⊗ I.
pub fn local_pvm_a(a: f64) -> Result<Pvm<Outcome>, MatrixError> {
    let identity = SquareMatrix::identity(2)?;
    let projectors = Outcome::ALL
        .iter()
        .map(|&p| rotated_projector(a, p)?.tensor(&identity))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Pvm::new(Outcome::ALL.to_vec(), projectors).expect("projective by construction"))
}

/// Bob's local measurement on the joint space: I ⊗ R_b†P_zR_b.
pub fn local_pvm_b(b: f64) -> Result<Pvm<Outcome>, MatrixError> {
    let identity = SquareMatrix::identity(2)?;
    let projectors = Outcome::ALL
        .iter()
        .map(|&q| identity.tensor(&rotated_projector(b, q)?))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Pvm::new(Outcome::ALL.to_vec(), projectors).expect("projective by construction"))
}

/// Born-rule probabilities ⟨P(o)ψ, ψ⟩ for each outcome, in PVM order.
///
/// The inner products of a projector with a state are real up to rounding;
/// an imaginary residue above [`ENTRY_TOL`] is reported as an error rather
/// than silently discarded.
pub fn born_probabilities<L: Copy + PartialEq>(
    pvm: &Pvm<L>,
    psi: &StateVector,
) -> Result<Vec<f64>, QuantumError> {
    if pvm.dim() != psi.dim() {
        return Err(QuantumError::DimensionMismatch {
            pvm: pvm.dim(),
            state: psi.dim(),
        });
    }
    pvm.projectors()
        .iter()
        .map(|p| {
            let value = p.expectation(psi)?;
            if value.im.abs() > ENTRY_TOL {
                return Err(QuantumError::ImaginaryResidue(value.im));
            }
            Ok(value.re)
        })
        .collect()
}

/// Born-rule distribution of the joint measurement at `settings` on the
/// Bell state, computed via the matrix path.
pub fn joint_born_distribution(settings: SettingPair) -> Result<OutcomeDistribution, QuantumError> {
    let probs = born_probabilities(&joint_pvm(settings), &bell_state())?;
    Ok(OutcomeDistribution::new([
        probs[0], probs[1], probs[2], probs[3],
    ])?)
}

/// The closed-form prediction for the joint outcome distribution on the
/// Bell state: ½cos²(a−b) when p = q and ½sin²(a−b) when p ≠ q.
pub fn closed_form_distribution(settings: SettingPair) -> OutcomeDistribution {
    let delta = settings.difference();
    let same = 0.5 * delta.cos().powi(2);
    let diff = 0.5 * delta.sin().powi(2);
    OutcomeDistribution::new([same, diff, diff, same]).expect("normalised by construction")
}

/// Deviation of the normalised partial traces of the joint PVM from the
/// corresponding single-side projectors.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PartialTraceCheck {
    /// Worst entry deviation of ½·tr_B of the q-marginalised joint PVM
    /// from R_a†P_z({p})R_a, over both outcomes p.
    pub deviation_a: f64,
    /// Mirror deviation for ½·tr_A against R_b†P_z({q})R_b.
    pub deviation_b: f64,
}

impl PartialTraceCheck {
    pub fn max_deviation(&self) -> f64 {
        self.deviation_a.max(self.deviation_b)
    }
}

/// Compare the normalised partial traces of the joint measurement with the
/// local projectors at the given settings.
///
/// For each outcome p, the joint projectors are summed over the other
/// side's outcome (PVMs are additive on disjoint sets), the partial trace
/// is taken, and the result is normalised by 1/dim(ℂ²) = ½ before the
/// entry-wise comparison.
pub fn partial_trace_check(settings: SettingPair) -> PartialTraceCheck {
    let joint = joint_pvm(settings);

    let mut deviation_a: f64 = 0.0;
    let mut deviation_b: f64 = 0.0;
    for &p in &Outcome::ALL {
        // Marginalise the joint PVM over Bob's outcome.
        let marginal = Outcome::ALL
            .iter()
            .map(|&q| joint.projector((p, q)).expect("all joint outcomes present"))
            .fold(SquareMatrix::zeros(4).expect("dim 4"), |acc, m| acc.add(m));
        let reduced = marginal
            .partial_trace_b()
            .expect("joint PVM acts on dim 4")
            .scale_real(0.5);
        let local = rotated_projector(settings.a(), p).expect("finite angle");
        deviation_a = deviation_a.max(reduced.max_abs_diff(&local));

        // Mirror: marginalise over Alice's outcome, trace out her factor.
        let marginal = Outcome::ALL
            .iter()
            .map(|&q| joint.projector((q, p)).expect("all joint outcomes present"))
            .fold(SquareMatrix::zeros(4).expect("dim 4"), |acc, m| acc.add(m));
        let reduced = marginal
            .partial_trace_a()
            .expect("joint PVM acts on dim 4")
            .scale_real(0.5);
        let local = rotated_projector(settings.b(), p).expect("finite angle");
        deviation_b = deviation_b.max(reduced.max_abs_diff(&local));
    }

    PartialTraceCheck {
        deviation_a,
        deviation_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn bell_state_amplitudes() {
        let psi = bell_state();
        assert!((psi.norm() - 1.0).abs() <= ENTRY_TOL);
        let amps = psi.amplitudes();
        assert!((amps[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() <= ENTRY_TOL);
        assert_eq!(amps[1], Complex64::ZERO);
        assert_eq!(amps[2], Complex64::ZERO);
    }

    #[test]
    fn rotated_projector_at_zero() {
        let p = rotated_projector(0.0, Outcome::Plus).unwrap();
        assert!(p.approx_eq(&pauli_z_projector(Outcome::Plus), 0.0));
    }

    #[test]
    fn rotated_projector_action_on_basis_vector() {
        // R_γ† P_z({+1}) R_γ |0⟩ = (cos²γ, −sinγ·cosγ)ᵀ.
        for gamma in [0.3, FRAC_PI_8, 1.2, -0.7] {
            let p = rotated_projector(gamma, Outcome::Plus).unwrap();
            let image = p.mul_vec(&[Complex64::ONE, Complex64::ZERO]).unwrap();
            let (sin, cos) = gamma.sin_cos();
            assert!((image[0] - Complex64::new(cos * cos, 0.0)).norm() <= ENTRY_TOL);
            assert!((image[1] - Complex64::new(-sin * cos, 0.0)).norm() <= ENTRY_TOL);
        }
    }

    #[test]
    fn rotated_projectors_complete() {
        // Completeness by direct summation.
        for gamma in [0.0, 0.5, FRAC_PI_8, 2.0] {
            let sum = rotated_projector(gamma, Outcome::Plus)
                .unwrap()
                .add(&rotated_projector(gamma, Outcome::Minus).unwrap());
            assert!(sum.approx_eq(&SquareMatrix::identity(2).unwrap(), ENTRY_TOL));
        }
    }

    #[test]
    fn joint_pvm_unrotated_case() {
        let pvm = joint_pvm(SettingPair::new(0.0, 0.0).unwrap());
        let first = pvm.projector((Outcome::Plus, Outcome::Plus)).unwrap();
        let expected = SquareMatrix::diagonal(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(first.approx_eq(&expected, 0.0));
    }

    #[test]
    fn joint_pvm_invariants_hold() {
        let pvm = joint_pvm(SettingPair::new(0.3, 1.1).unwrap());
        assert!(pvm.deviations().max() <= ENTRY_TOL);
    }

    #[test]
    fn local_pvm_a_unrotated_projector() {
        let pvm = local_pvm_a(0.0).unwrap();
        let expected = SquareMatrix::diagonal(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(pvm
            .projector(Outcome::Plus)
            .unwrap()
            .approx_eq(&expected, 0.0));
    }

    #[test]
    fn local_statistics_are_uniform() {
        // Both local outcomes occur with probability ½ on the Bell state,
        // whatever the angle.
        let psi = bell_state();
        for angle in [0.0, FRAC_PI_8, 0.9, -2.3] {
            for pvm in [local_pvm_a(angle).unwrap(), local_pvm_b(angle).unwrap()] {
                let probs = born_probabilities(&pvm, &psi).unwrap();
                assert!((probs[0] - 0.5).abs() <= ENTRY_TOL);
                assert!((probs[1] - 0.5).abs() <= ENTRY_TOL);
            }
        }
    }

    #[test]
    fn local_pvm_b_completeness() {
        let pvm = local_pvm_b(FRAC_PI_8).unwrap();
        let sum = pvm.projectors()[0].add(&pvm.projectors()[1]);
        assert!(sum.approx_eq(&SquareMatrix::identity(4).unwrap(), ENTRY_TOL));
    }

    #[test]
    fn born_matches_closed_form() {
        for (a, b) in [(0.0, FRAC_PI_8), (FRAC_PI_4, 3.0 * FRAC_PI_8), (1.0, -0.4)] {
            let settings = SettingPair::new(a, b).unwrap();
            let matrix_path = joint_born_distribution(settings).unwrap();
            let closed = closed_form_distribution(settings);
            assert!(matrix_path.max_abs_diff(&closed) <= ENTRY_TOL);
        }
    }

    #[test]
    fn equal_angles_give_perfect_correlation() {
        let settings = SettingPair::new(0.7, 0.7).unwrap();
        let d = joint_born_distribution(settings).unwrap();
        let expected = [0.5, 0.0, 0.0, 0.5];
        for (got, want) in d.probabilities().iter().zip(expected) {
            assert!((got - want).abs() <= ENTRY_TOL);
        }
    }

    #[test]
    fn joint_marginals_match_local_born() {
        let psi = bell_state();
        for (a, b) in [(0.0, FRAC_PI_8), (0.4, 1.9)] {
            let settings = SettingPair::new(a, b).unwrap();
            let joint = joint_born_distribution(settings).unwrap();
            let local_a = born_probabilities(&local_pvm_a(a).unwrap(), &psi).unwrap();
            let local_b = born_probabilities(&local_pvm_b(b).unwrap(), &psi).unwrap();
            for i in 0..2 {
                assert!((joint.marginal_a()[i] - local_a[i]).abs() <= ENTRY_TOL);
                assert!((joint.marginal_b()[i] - local_b[i]).abs() <= ENTRY_TOL);
            }
        }
    }

    #[test]
    fn partial_trace_check_small_deviation() {
        for (a, b) in [
            (0.0, FRAC_PI_8),
            (FRAC_PI_4, 3.0 * FRAC_PI_8),
            (0.923, 0.923),
        ] {
            let check = partial_trace_check(SettingPair::new(a, b).unwrap());
            assert!(check.max_deviation() <= ENTRY_TOL, "({a}, {b}): {check:?}");
        }
    }

    #[test]
    fn tampered_pvm_reports_deviation() {
        let good = joint_pvm(SettingPair::new(0.0, FRAC_PI_8).unwrap());
        let mut projectors = good.projectors().to_vec();
        projectors[0] = projectors[0].scale_real(1.1);
        let bad = Pvm::from_parts_unchecked(good.outcomes().to_vec(), projectors);
        let dev = bad.deviations();
        assert!(dev.max() > ENTRY_TOL);
        assert!(Pvm::new(bad.outcomes().to_vec(), bad.projectors().to_vec()).is_err());
    }

    #[test]
    fn born_rejects_dimension_mismatch() {
        let pvm = joint_pvm(SettingPair::new(0.0, 0.0).unwrap());
        let psi = StateVector::new(vec![Complex64::ONE, Complex64::ZERO]).unwrap();
        assert!(matches!(
            born_probabilities(&pvm, &psi),
            Err(QuantumError::DimensionMismatch { .. })
        ));
    }
}
