//! Local hidden-variable models and the CHSH bound |S| ≤ 2.
//!
//! A [`LocalModel`] is a finite mixture over a hidden variable λ of
//! setting-wise independent response probabilities. Two structural choices
//! make the type coincide with the hypothesis class of the bound:
//! the λ-weights do not depend on the settings (freedom), and the joint
//! outcome law is *defined* as the product of the two one-sided laws
//! (locality). λ is identified with its index into the weight vector.
//!
//! Optimisation over stochastic models reduces to the 16 deterministic
//! strategies: the CHSH value is linear in the λ-measure and in each
//! response probability, so its maximum over the convex model class is
//! attained at an extreme point, and the extreme points are exactly the
//! deterministic strategies.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::classical::BellMeasure;
use crate::distribution::OutcomeDistribution;
use crate::outcome::{Outcome, JOINT_OUTCOMES};
use crate::settings::{SettingAngles, CHSH_SIGNS};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("lambda weights must be non-negative, got {0}")]
    NegativeWeight(f64),
    #[error("lambda weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),
    #[error("response probability {0} outside [0, 1]")]
    ResponseOutOfRange(f64),
    #[error("response tables must have one row per lambda value")]
    SupportMismatch,
    #[error("lambda support must be non-empty")]
    EmptySupport,
}

/// Tolerance on the weight normalisation check and on the bound itself.
pub const MODEL_TOL: f64 = 1e-12;

/// A deterministic local strategy: a fixed ±1 answer per setting on each
/// side. These are the extreme points of the local model class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeterministicStrategy {
    /// Alice's answer for settings a₁ and a₂.
    pub f: [Outcome; 2],
    /// Bob's answer for settings b₁ and b₂.
    pub g: [Outcome; 2],
}

/// All 16 deterministic strategies, in lexicographic order of
/// (f(a₁), f(a₂), g(b₁), g(b₂)) with +1 before −1.
pub fn enumerate_deterministic_strategies() -> Vec<DeterministicStrategy> {
    let mut strategies = Vec::with_capacity(16);
    for &f1 in &Outcome::ALL {
        for &f2 in &Outcome::ALL {
            for &g1 in &Outcome::ALL {
                for &g2 in &Outcome::ALL {
                    strategies.push(DeterministicStrategy {
                        f: [f1, f2],
                        g: [g1, g2],
                    });
                }
            }
        }
    }
    strategies
}

/// The CHSH combination f(a₁)g(b₁) − f(a₁)g(b₂) + f(a₂)g(b₁) + f(a₂)g(b₂)
/// of a deterministic strategy. Always ±2: factoring gives
/// f(a₁)(g(b₁) − g(b₂)) + f(a₂)(g(b₁) + g(b₂)), and exactly one of the two
/// parenthesised terms vanishes while the other is ±2.
pub fn chsh_functional(s: &DeterministicStrategy) -> i32 {
    let f1 = s.f[0].value();
    let f2 = s.f[1].value();
    let g1 = s.g[0].value();
    let g2 = s.g[1].value();
    f1 * g1 - f1 * g2 + f2 * g1 + f2 * g2
}

/// A finite-λ local model: a probability weight per λ and, per λ and per
/// setting index, the probability of answering +1 on each side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalModel {
    weights: Vec<f64>,
    /// response_a[λ][i] = P(ε_A = +1 | γ_A = a_i, λ).
    response_a: Vec<[f64; 2]>,
    /// response_b[λ][j] = P(ε_B = +1 | γ_B = b_j, λ).
    response_b: Vec<[f64; 2]>,
}

impl LocalModel {
    pub fn new(
        weights: Vec<f64>,
        response_a: Vec<[f64; 2]>,
        response_b: Vec<[f64; 2]>,
    ) -> Result<Self, ModelError> {
        if weights.is_empty() {
            return Err(ModelError::EmptySupport);
        }
        if response_a.len() != weights.len() || response_b.len() != weights.len() {
            return Err(ModelError::SupportMismatch);
        }
        for &w in &weights {
            if w.is_nan() || w < 0.0 {
                return Err(ModelError::NegativeWeight(w));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MODEL_TOL {
            return Err(ModelError::WeightsNotNormalized(total));
        }
        for row in response_a.iter().chain(&response_b) {
            for &p in row {
                if !(0.0..=1.0).contains(&p) {
                    return Err(ModelError::ResponseOutOfRange(p));
                }
            }
        }
        Ok(LocalModel {
            weights,
            response_a,
            response_b,
        })
    }

    /// The degenerate model concentrated on a single deterministic strategy.
    pub fn from_strategy(s: &DeterministicStrategy) -> Self {
        let as_prob = |o: Outcome| if o == Outcome::Plus { 1.0 } else { 0.0 };
        LocalModel {
            weights: vec![1.0],
            response_a: vec![[as_prob(s.f[0]), as_prob(s.f[1])]],
            response_b: vec![[as_prob(s.g[0]), as_prob(s.g[1])]],
        }
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    /// Conditional expectation of Alice's outcome given λ and a-setting.
    fn mean_a(&self, lambda: usize, a_index: usize) -> f64 {
        2.0 * self.response_a[lambda][a_index] - 1.0
    }

    fn mean_b(&self, lambda: usize, b_index: usize) -> f64 {
        2.0 * self.response_b[lambda][b_index] - 1.0
    }

    /// Correlator E(a_i, b_j) = Σ_λ w(λ) Ā(λ, a_i) B̄(λ, b_j).
    pub fn correlator(&self, a_index: usize, b_index: usize) -> f64 {
        (0..self.weights.len())
            .map(|l| self.weights[l] * self.mean_a(l, a_index) * self.mean_b(l, b_index))
            .sum()
    }

    /// The joint outcome distribution the model induces under a setting:
    /// P(p, q) = Σ_λ w(λ) P(p | a_i, λ) P(q | b_j, λ).
    pub fn joint_distribution(&self, a_index: usize, b_index: usize) -> OutcomeDistribution {
        let mut cells = [0.0; 4];
        for l in 0..self.weights.len() {
            let pa = self.response_a[l][a_index];
            let pb = self.response_b[l][b_index];
            let side_a = [pa, 1.0 - pa];
            let side_b = [pb, 1.0 - pb];
            for (cell, &(p, q)) in JOINT_OUTCOMES.iter().enumerate() {
                cells[cell] += self.weights[l] * side_a[p.index()] * side_b[q.index()];
            }
        }
        OutcomeDistribution::new(cells).expect("mixture of product laws is a probability table")
    }

    /// Largest cell difference between the model's induced blocks and the
    /// blocks of `target`, over all four settings.
    pub fn block_distance(&self, target: &BellMeasure) -> f64 {
        SettingAngles::index_pairs()
            .into_iter()
            .map(|(ai, bi)| {
                self.joint_distribution(ai, bi)
                    .max_abs_diff(&target.block(ai, bi))
            })
            .fold(0.0, f64::max)
    }
}

/// CHSH value of a local model: the signed sum of its four correlators.
/// Lies in [−2, 2] for every valid model.
pub fn local_model_chsh(model: &LocalModel) -> f64 {
    SettingAngles::index_pairs()
        .into_iter()
        .zip(CHSH_SIGNS)
        .map(|((ai, bi), sign)| sign * model.correlator(ai, bi))
        .sum()
}

/// Draw a random local model: support size 1..=8, weights and response
/// probabilities uniform.
pub fn sample_local_model<R: Rng>(rng: &mut R) -> LocalModel {
    let support = rng.random_range(1..=8usize);
    let mut weights: Vec<f64> = (0..support).map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        for w in &mut weights {
            *w /= total;
        }
    } else {
        weights = vec![1.0 / support as f64; support];
    }
    let response = |rng: &mut R| {
        (0..support)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect::<Vec<_>>()
    };
    let response_a = response(rng);
    let response_b = response(rng);
    LocalModel::new(weights, response_a, response_b).expect("sampled model is valid")
}

/// Result of probing the CHSH bound with random local models.
#[derive(Debug, Clone, Serialize)]
pub struct BoundProbeReport {
    /// Number of random models sampled.
    pub trials: u64,
    /// Largest |S| over the sampled models and the 16 deterministic
    /// strategies.
    pub max_abs_s: f64,
    /// Largest |S| over the deterministic strategies alone (always 2).
    pub deterministic_max: f64,
    /// Whether every probed value respected |S| ≤ 2 within [`MODEL_TOL`].
    pub bound_respected: bool,
    /// The model attaining `max_abs_s`.
    pub witness: LocalModel,
}

/// Models evaluated per RNG stream; the probe is partitioned into batches
/// so that sequential and data-parallel execution visit identical streams.
const PROBE_BATCH: u64 = 256;

fn probe_batch(seed: u64, batch: u64, count: u64) -> (f64, LocalModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch + 1);
    let mut best = f64::NEG_INFINITY;
    let mut witness = None;
    for _ in 0..count {
        let model = sample_local_model(&mut rng);
        let s = local_model_chsh(&model).abs();
        if s > best {
            best = s;
            witness = Some(model);
        }
    }
    (best, witness.expect("count >= 1"))
}

fn merge_probes(a: (f64, LocalModel), b: (f64, LocalModel)) -> (f64, LocalModel) {
    if b.0 > a.0 {
        b
    } else {
        a
    }
}

fn probe_layout(trials: u64) -> Vec<(u64, u64)> {
    (0..trials.div_ceil(PROBE_BATCH))
        .map(|batch| {
            let start = batch * PROBE_BATCH;
            (batch, PROBE_BATCH.min(trials - start))
        })
        .collect()
}

fn finish_report(trials: u64, sampled: (f64, LocalModel)) -> BoundProbeReport {
    let deterministic_max = enumerate_deterministic_strategies()
        .iter()
        .map(|s| chsh_functional(s).abs() as f64)
        .fold(0.0, f64::max);
    let (max_abs_s, witness) = if deterministic_max > sampled.0 {
        let best = enumerate_deterministic_strategies()
            .into_iter()
            .max_by(|x, y| (chsh_functional(x).abs()).cmp(&chsh_functional(y).abs()))
            .expect("16 strategies");
        (deterministic_max, LocalModel::from_strategy(&best))
    } else {
        sampled
    };
    BoundProbeReport {
        trials,
        max_abs_s,
        deterministic_max,
        bound_respected: max_abs_s <= 2.0 + MODEL_TOL,
        witness,
    }
}

/// Probe the bound with `trials` random models plus the 16 deterministic
/// extremes, sequentially. Deterministic given the seed, and identical to
/// [`verify_chsh_bound_parallel`] batch for batch.
pub fn verify_chsh_bound(trials: u64, seed: u64) -> BoundProbeReport {
    assert!(trials >= 1, "at least one trial required");
    let sampled = probe_layout(trials)
        .into_iter()
        .map(|(batch, count)| probe_batch(seed, batch, count))
        .reduce(merge_probes)
        .expect("at least one batch");
    finish_report(trials, sampled)
}

/// Data-parallel version of [`verify_chsh_bound`]; same batches, same
/// streams, same result.
#[cfg(feature = "parallel")]
pub fn verify_chsh_bound_parallel(trials: u64, seed: u64) -> BoundProbeReport {
    use rayon::prelude::*;
    assert!(trials >= 1, "at least one trial required");
    let sampled = probe_layout(trials)
        .into_par_iter()
        .map(|(batch, count)| probe_batch(seed, batch, count))
        .reduce_with(merge_probes)
        .expect("at least one batch");
    finish_report(trials, sampled)
}

/// The best CHSH value attainable by mixtures of local strategies,
/// together with an attaining strategy as a degenerate model.
#[derive(Debug, Clone, Serialize)]
pub struct BestLocalApproximation {
    pub model: LocalModel,
    pub strategy: DeterministicStrategy,
    /// CHSH value of the returned model: always 2.
    pub achieved_s: f64,
    /// Exact CHSH value of the target measure, for the gap.
    pub target_s: f64,
    /// Largest cell difference between the model's induced blocks and the
    /// target's blocks.
    pub block_distance: f64,
}

/// Maximise the CHSH combination over local models by exhaustive search of
/// the 16 deterministic extremes (the objective is linear, so the optimum
/// is extremal). The optimum is 2 whatever the target: the objective does
/// not see the target's correlations, only its own sign pattern. The
/// returned `block_distance` quantifies how far the optimal model stays
/// from the target's statistics.
pub fn best_local_approximation(target: &BellMeasure) -> BestLocalApproximation {
    let strategy = enumerate_deterministic_strategies()
        .into_iter()
        .max_by_key(chsh_functional)
        .expect("16 strategies");
    let model = LocalModel::from_strategy(&strategy);
    let achieved_s = local_model_chsh(&model);
    BestLocalApproximation {
        block_distance: model.block_distance(target),
        target_s: target.chsh_value(),
        strategy,
        model,
        achieved_s,
    }
}
