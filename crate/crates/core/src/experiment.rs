//! Seeded Monte-Carlo runs of the four-step protocol: prepare the Bell
//! state, pick a polariser pair uniformly and independently per side, pass
//! the photons through, record the ±1 outcomes; then the counting
//! statistics E_k and S_k built from the tallies.
//!
//! Randomness comes from a single documented generator, ChaCha8 with a
//! 64-bit seed. Single-stream mode consumes the generator's stream 0 and
//! guarantees the prefix property: a longer run extends a shorter one
//! sample for sample. Batched mode partitions runs into fixed batches of
//! [`BATCH_RUNS`] and gives batch `i` its own stream `i + 1`; the batched
//! result is reproducible and independent of thread scheduling, but is a
//! different (equally distributed) sample than single-stream mode.
//! Settings are driven by classical pseudo-randomness; a physical
//! randomiser on each wing is statistically equivalent for everything
//! measured here.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::BellMeasure;
use crate::distribution::OutcomeDistribution;
use crate::outcome::{Outcome, JOINT_OUTCOMES};
use crate::quantum::{joint_born_distribution, QuantumError};
use crate::settings::{SettingAngles, CHSH_SIGNS};

/// Runs per RNG stream in batched mode.
pub const BATCH_RUNS: u64 = 1 << 16;

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error("runs must be at least 1")]
    NoRuns,
    #[error("setting (a={a}, b={b}) has no recorded runs")]
    EmptySetting { a: f64, b: f64 },
    #[error("checkpoints must be non-empty and strictly increasing")]
    BadCheckpoints,
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Which exact distribution the sampler draws outcomes from. Both describe
/// the same statistics; keeping the routes separate lets them cross-check
/// each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingSource {
    /// Born-rule probabilities of the joint measurement, via the matrix path.
    QuantumExact,
    /// Setting blocks of the 16-point classical measure.
    BellMeasure,
}

impl std::fmt::Display for SamplingSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SamplingSource::QuantumExact => write!(f, "quantum-exact"),
            SamplingSource::BellMeasure => write!(f, "bell-measure"),
        }
    }
}

/// Configuration of a simulated experiment.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExperimentConfig {
    pub angles: SettingAngles,
    pub runs: u64,
    pub seed: u64,
    pub source: SamplingSource,
}

/// One run: the selected polariser pair and the recorded outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunRecord {
    pub a: f64,
    pub b: f64,
    pub p: Outcome,
    pub q: Outcome,
}

/// Per-setting, per-cell counters accumulated over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyTable {
    angles: SettingAngles,
    /// counts[a_index][b_index][cell] with cells in canonical joint order.
    counts: [[[u64; 4]; 2]; 2],
    total: u64,
}

impl TallyTable {
    pub fn empty(angles: SettingAngles) -> Self {
        TallyTable {
            angles,
            counts: [[[0; 4]; 2]; 2],
            total: 0,
        }
    }

    pub fn from_counts(angles: SettingAngles, counts: [[[u64; 4]; 2]; 2]) -> Self {
        let total = counts.iter().flatten().flatten().sum();
        TallyTable {
            angles,
            counts,
            total,
        }
    }

    pub fn angles(&self) -> SettingAngles {
        self.angles
    }

    /// Total number of runs k.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of runs under a given setting.
    pub fn setting_count(&self, a_index: usize, b_index: usize) -> u64 {
        self.counts[a_index][b_index].iter().sum()
    }

    /// Number of runs under a setting that produced the outcome (p, q).
    pub fn cell_count(&self, a_index: usize, b_index: usize, p: Outcome, q: Outcome) -> u64 {
        self.counts[a_index][b_index][crate::outcome::joint_index(p, q)]
    }

    fn record(&mut self, a_index: usize, b_index: usize, cell: usize) {
        self.counts[a_index][b_index][cell] += 1;
        self.total += 1;
    }

    /// Cell-wise sum; merging is associative and commutative.
    pub fn merge(mut self, other: &TallyTable) -> TallyTable {
        assert_eq!(
            self.angles, other.angles,
            "merging tallies of different configurations"
        );
        for ai in 0..2 {
            for bi in 0..2 {
                for cell in 0..4 {
                    self.counts[ai][bi][cell] += other.counts[ai][bi][cell];
                }
            }
        }
        self.total += other.total;
        self
    }

    /// Empirical frequency of ε_A = +1 within a setting block, if visited.
    pub fn marginal_a_frequency(&self, a_index: usize, b_index: usize) -> Option<f64> {
        let n = self.setting_count(a_index, b_index);
        if n == 0 {
            return None;
        }
        let plus = self.counts[a_index][b_index][0] + self.counts[a_index][b_index][1];
        Some(plus as f64 / n as f64)
    }

    /// Empirical frequency of ε_B = +1 within a setting block, if visited.
    pub fn marginal_b_frequency(&self, a_index: usize, b_index: usize) -> Option<f64> {
        let n = self.setting_count(a_index, b_index);
        if n == 0 {
            return None;
        }
        let plus = self.counts[a_index][b_index][0] + self.counts[a_index][b_index][2];
        Some(plus as f64 / n as f64)
    }

    /// CSV rows in the documented column order `a,b,p,q,count`, one row
    /// per setting and cell, blocks and cells in canonical order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,p,q,count\n");
        for (ai, bi) in SettingAngles::index_pairs() {
            for &(p, q) in &JOINT_OUTCOMES {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    self.angles.a(ai),
                    self.angles.b(bi),
                    p.value(),
                    q.value(),
                    self.cell_count(ai, bi, p, q)
                ));
            }
        }
        out
    }
}

/// The exact per-setting outcome distributions the sampler draws from,
/// as cumulative tables in canonical cell order.
fn cumulative_blocks(cfg: &ExperimentConfig) -> Result<[[[f64; 4]; 2]; 2], ExperimentError> {
    let measure = BellMeasure::new(cfg.angles);
    let mut blocks = [[[0.0; 4]; 2]; 2];
    for (ai, bi) in SettingAngles::index_pairs() {
        let dist: OutcomeDistribution = match cfg.source {
            SamplingSource::QuantumExact => joint_born_distribution(cfg.angles.pair(ai, bi))?,
            SamplingSource::BellMeasure => measure.block(ai, bi),
        };
        let probs = dist.probabilities();
        let mut acc = 0.0;
        for cell in 0..4 {
            acc += probs[cell];
            blocks[ai][bi][cell] = acc;
        }
        blocks[ai][bi][3] = 1.0;
    }
    Ok(blocks)
}

fn sample_cell(cumulative: &[f64; 4], u: f64) -> usize {
    cumulative.iter().position(|&c| u < c).unwrap_or(3)
}

fn sample_into<R: Rng>(
    tally: &mut TallyTable,
    blocks: &[[[f64; 4]; 2]; 2],
    rng: &mut R,
    runs: u64,
) {
    for _ in 0..runs {
        let a_index = rng.random_range(0..2usize);
        let b_index = rng.random_range(0..2usize);
        let cell = sample_cell(&blocks[a_index][b_index], rng.random::<f64>());
        tally.record(a_index, b_index, cell);
    }
}

/// Simulate one run and return its record; consumes three draws from `rng`.
pub fn sample_run<R: Rng>(
    angles: &SettingAngles,
    blocks: &[[[f64; 4]; 2]; 2],
    rng: &mut R,
) -> RunRecord {
    let a_index = rng.random_range(0..2usize);
    let b_index = rng.random_range(0..2usize);
    let cell = sample_cell(&blocks[a_index][b_index], rng.random::<f64>());
    let (p, q) = JOINT_OUTCOMES[cell];
    RunRecord {
        a: angles.a(a_index),
        b: angles.b(b_index),
        p,
        q,
    }
}

/// Run the experiment on a single RNG stream. Fully deterministic given
/// the seed, with the prefix property: the first n runs of a longer
/// experiment equal an n-run experiment with the same seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TallyTable, ExperimentError> {
    if cfg.runs == 0 {
        return Err(ExperimentError::NoRuns);
    }
    let blocks = cumulative_blocks(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tally = TallyTable::empty(cfg.angles);
    sample_into(&mut tally, &blocks, &mut rng, cfg.runs);
    Ok(tally)
}

fn batch_layout(runs: u64) -> Vec<(u64, u64)> {
    (0..runs.div_ceil(BATCH_RUNS))
        .map(|batch| (batch, BATCH_RUNS.min(runs - batch * BATCH_RUNS)))
        .collect()
}

fn batch_tally(
    cfg: &ExperimentConfig,
    blocks: &[[[f64; 4]; 2]; 2],
    batch: u64,
    count: u64,
) -> TallyTable {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(batch + 1);
    let mut tally = TallyTable::empty(cfg.angles);
    sample_into(&mut tally, blocks, &mut rng, count);
    tally
}

/// Run the experiment over per-batch RNG streams, serially. Produces the
/// same tally as [`run_experiment_parallel`]: the batch/stream layout is
/// fixed, so only the execution order differs, and counter merging is
/// order-independent.
pub fn run_experiment_batched(cfg: &ExperimentConfig) -> Result<TallyTable, ExperimentError> {
    if cfg.runs == 0 {
        return Err(ExperimentError::NoRuns);
    }
    let blocks = cumulative_blocks(cfg)?;
    Ok(batch_layout(cfg.runs)
        .into_iter()
        .map(|(batch, count)| batch_tally(cfg, &blocks, batch, count))
        .fold(TallyTable::empty(cfg.angles), |acc, t| acc.merge(&t)))
}

/// Data-parallel twin of [`run_experiment_batched`], batch per work item.
#[cfg(feature = "parallel")]
pub fn run_experiment_parallel(cfg: &ExperimentConfig) -> Result<TallyTable, ExperimentError> {
    use rayon::prelude::*;
    if cfg.runs == 0 {
        return Err(ExperimentError::NoRuns);
    }
    let blocks = cumulative_blocks(cfg)?;
    Ok(batch_layout(cfg.runs)
        .into_par_iter()
        .map(|(batch, count)| batch_tally(cfg, &blocks, batch, count))
        .reduce(|| TallyTable::empty(cfg.angles), |acc, t| acc.merge(&t)))
}

/// Estimated correlator E_k for one setting: the signed cell ratio
/// (N(+,+) − N(+,−) − N(−,+) + N(−,−)) / N.
pub fn estimate_e(
    tally: &TallyTable,
    a_index: usize,
    b_index: usize,
) -> Result<f64, ExperimentError> {
    let n = tally.setting_count(a_index, b_index);
    if n == 0 {
        return Err(ExperimentError::EmptySetting {
            a: tally.angles().a(a_index),
            b: tally.angles().b(b_index),
        });
    }
    let c = &tally.counts[a_index][b_index];
    let signed = c[0] as i64 - c[1] as i64 - c[2] as i64 + c[3] as i64;
    Ok(signed as f64 / n as f64)
}

/// Estimate and standard error for one setting.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SettingEstimate {
    pub a: f64,
    pub b: f64,
    pub count: u64,
    pub e: f64,
    /// √(Var(pq)/N) with Var(pq) = 1 − E² for ±1-valued products.
    pub std_error: f64,
}

/// The CHSH estimate S_k with its standard error.
///
/// The standard error of S is the root-sum-square of the four per-setting
/// standard errors; the four blocks are sampled independently.
#[derive(Debug, Clone, Serialize)]
pub struct ChshEstimate {
    pub settings: Vec<SettingEstimate>,
    pub s: f64,
    pub std_error: f64,
    pub runs: u64,
}

impl ChshEstimate {
    /// CSV rows with columns `quantity,a,b,n,value,std_error`: one `E` row
    /// per setting in canonical order, then one `S` row with empty angles.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,a,b,n,value,std_error\n");
        for s in &self.settings {
            out.push_str(&format!(
                "E,{},{},{},{},{}\n",
                s.a, s.b, s.count, s.e, s.std_error
            ));
        }
        out.push_str(&format!(
            "S,,,{},{},{}\n",
            self.runs, self.s, self.std_error
        ));
        out
    }
}

/// Combine the four per-setting estimates into S_k. Every setting must
/// have been visited at least once.
pub fn estimate_s(tally: &TallyTable) -> Result<ChshEstimate, ExperimentError> {
    let mut settings = Vec::with_capacity(4);
    let mut s = 0.0;
    let mut variance = 0.0;
    for ((ai, bi), sign) in SettingAngles::index_pairs().into_iter().zip(CHSH_SIGNS) {
        let e = estimate_e(tally, ai, bi)?;
        let n = tally.setting_count(ai, bi);
        let var_pq = (1.0 - e * e).max(0.0);
        let std_error = (var_pq / n as f64).sqrt();
        settings.push(SettingEstimate {
            a: tally.angles().a(ai),
            b: tally.angles().b(bi),
            count: n,
            e,
            std_error,
        });
        s += sign * e;
        variance += std_error * std_error;
    }
    Ok(ChshEstimate {
        settings,
        s,
        std_error: variance.sqrt(),
        runs: tally.total(),
    })
}

/// One checkpoint of a convergence sweep. `estimate` is absent when some
/// setting had no runs yet; the unvisited settings are listed instead.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub runs: u64,
    pub estimate: Option<ChshEstimate>,
    pub empty_settings: Vec<(f64, f64)>,
}

/// Grow a single-stream run through the given checkpoints, estimating at
/// each. Checkpoints must be strictly increasing; the run ends at the last
/// one. Later checkpoints reuse all earlier samples, so two sweeps with
/// the same seed agree point for point.
pub fn convergence_sweep(
    cfg: &ExperimentConfig,
    checkpoints: &[u64],
) -> Result<Vec<SweepPoint>, ExperimentError> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::BadCheckpoints);
    }
    if checkpoints[0] == 0 {
        return Err(ExperimentError::BadCheckpoints);
    }
    let blocks = cumulative_blocks(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tally = TallyTable::empty(cfg.angles);
    let mut points = Vec::with_capacity(checkpoints.len());
    let mut done = 0u64;
    for &checkpoint in checkpoints {
        sample_into(&mut tally, &blocks, &mut rng, checkpoint - done);
        done = checkpoint;
        match estimate_s(&tally) {
            Ok(estimate) => points.push(SweepPoint {
                runs: checkpoint,
                estimate: Some(estimate),
                empty_settings: Vec::new(),
            }),
            Err(ExperimentError::EmptySetting { .. }) => {
                let empty_settings = SettingAngles::index_pairs()
                    .into_iter()
                    .filter(|&(ai, bi)| tally.setting_count(ai, bi) == 0)
                    .map(|(ai, bi)| (cfg.angles.a(ai), cfg.angles.b(bi)))
                    .collect();
                points.push(SweepPoint {
                    runs: checkpoint,
                    estimate: None,
                    empty_settings,
                });
            }
            Err(other) => return Err(other),
        }
    }
    Ok(points)
}

/// Two-sample Pearson comparison of the 16 (setting, outcome) cells
/// produced by the two sampling sources.
#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    /// Acceptance threshold on the statistic; [`CHI_SQUARE_THRESHOLD`]
    /// corresponds to a tail probability of roughly 1e-6 at 15 degrees of
    /// freedom.
    pub threshold: f64,
    pub consistent: bool,
}

/// Upper critical value used by [`cross_source_chi_square`].
pub const CHI_SQUARE_THRESHOLD: f64 = 60.0;

/// Sample the same configuration from both sources and compare their
/// tallies cell by cell. The second source runs with `seed + 1` so the two
/// samples are independent. With equal totals the two-sample statistic
/// reduces to Σ (n₁ − n₂)²/(n₁ + n₂) over the non-empty cells.
pub fn cross_source_chi_square(cfg: &ExperimentConfig) -> Result<ChiSquareReport, ExperimentError> {
    let first = run_experiment(&ExperimentConfig {
        source: SamplingSource::QuantumExact,
        ..*cfg
    })?;
    let second = run_experiment(&ExperimentConfig {
        source: SamplingSource::BellMeasure,
        seed: cfg.seed.wrapping_add(1),
        ..*cfg
    })?;
    let mut statistic = 0.0;
    let mut nonzero = 0usize;
    for (ai, bi) in SettingAngles::index_pairs() {
        for &(p, q) in &JOINT_OUTCOMES {
            let n1 = first.cell_count(ai, bi, p, q) as f64;
            let n2 = second.cell_count(ai, bi, p, q) as f64;
            if n1 + n2 > 0.0 {
                nonzero += 1;
                statistic += (n1 - n2).powi(2) / (n1 + n2);
            }
        }
    }
    Ok(ChiSquareReport {
        statistic,
        degrees_of_freedom: nonzero.saturating_sub(1),
        threshold: CHI_SQUARE_THRESHOLD,
        consistent: statistic < CHI_SQUARE_THRESHOLD,
    })
}
