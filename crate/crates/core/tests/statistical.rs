//! Multi-seed statistical checks of the Monte-Carlo estimators against
//! the exact distribution. Binomial standard deviations are the yardstick:
//! a 5σ excursion has probability ~6e-7 per check, so across the few
//! hundred checks below even a single failure indicates a real defect.

use bell_core::experiment::{estimate_s, run_experiment, ExperimentConfig, SamplingSource};
use bell_core::settings::SettingAngles;

const SEEDS: u64 = 100;
const RUNS: u64 = 1_000_000;

#[test]
fn estimators_and_marginals_concentrate_over_100_seeds() {
    let angles = SettingAngles::aspect();
    let mut e_failures = 0u32;
    let mut marginal_failures = 0u32;

    for seed in 0..SEEDS {
        let cfg = ExperimentConfig {
            angles,
            runs: RUNS,
            seed,
            source: SamplingSource::QuantumExact,
        };
        let tally = run_experiment(&cfg).unwrap();
        let estimate = estimate_s(&tally).unwrap();

        for setting in &estimate.settings {
            // E_k concentrates on cos 2(a−b) with σ = √((1−E²)/N).
            let exact = (2.0 * (setting.a - setting.b)).cos();
            let sigma = ((1.0 - exact * exact) / setting.count as f64).sqrt();
            if (setting.e - exact).abs() > 5.0 * sigma {
                e_failures += 1;
            }
        }

        for (ai, bi) in SettingAngles::index_pairs() {
            let n = tally.setting_count(ai, bi) as f64;
            let sigma = (0.25 / n).sqrt();
            for freq in [
                tally.marginal_a_frequency(ai, bi).unwrap(),
                tally.marginal_b_frequency(ai, bi).unwrap(),
            ] {
                if (freq - 0.5).abs() > 5.0 * sigma {
                    marginal_failures += 1;
                }
            }
        }
    }

    assert!(
        e_failures < 1,
        "{e_failures} of {} correlator estimates strayed beyond 5 sigma",
        SEEDS * 4
    );
    assert!(
        marginal_failures < 1,
        "{marginal_failures} of {} sampled marginals strayed beyond 5 sigma",
        SEEDS * 8
    );
}

#[test]
fn sweep_closes_in_on_the_exact_value() {
    let cfg = ExperimentConfig {
        angles: SettingAngles::aspect(),
        runs: 1_000_000,
        seed: 0xB311,
        source: SamplingSource::QuantumExact,
    };
    let exact = 2.0 * std::f64::consts::SQRT_2;
    let points =
        bell_core::experiment::convergence_sweep(&cfg, &[1_000, 10_000, 100_000, 1_000_000])
            .unwrap();
    let deviations: Vec<f64> = points
        .iter()
        .map(|p| (p.estimate.as_ref().expect("all settings visited").s - exact).abs())
        .collect();
    assert!(deviations[3] < 0.02, "final deviation {}", deviations[3]);
    // Not monotone run to run, but the last checkpoint must beat the first.
    assert!(deviations[3] < deviations[0]);
}

#[test]
fn setting_occupancy_is_uniform_within_binomial_tolerance() {
    let cfg = ExperimentConfig {
        angles: SettingAngles::aspect(),
        runs: RUNS,
        seed: 0xB311,
        source: SamplingSource::BellMeasure,
    };
    let tally = run_experiment(&cfg).unwrap();
    let sigma = (0.25 * 0.75 / RUNS as f64).sqrt();
    for (ai, bi) in SettingAngles::index_pairs() {
        let freq = tally.setting_count(ai, bi) as f64 / RUNS as f64;
        assert!(
            (freq - 0.25).abs() < 5.0 * sigma,
            "occupancy {freq} at ({ai}, {bi})"
        );
    }
}
