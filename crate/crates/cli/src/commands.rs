//! One function per subcommand, each producing a [`ReportDocument`] and a
//! human-readable rendering.

use serde_json::{json, Map, Value};

use bell_core::classical::BellMeasure;
use bell_core::experiment::{
    estimate_s, run_experiment, run_experiment_parallel, ChshEstimate, ExperimentConfig,
    ExperimentError, TallyTable,
};
use bell_core::lhv::best_local_approximation;
use bell_core::outcome::JOINT_OUTCOMES;
use bell_core::quantum::partial_trace_check;
use bell_core::settings::{SettingAngles, SettingPair};

use crate::angle::format_angle;
use crate::battery::{run_battery, BatteryOptions, BatteryReport};
use crate::config::{EchoFields, Resolved};
use crate::error::CliError;
use crate::report::{tag_floats, tagged, Provenance, ReportDocument};

/// Correction factors for detection solid angle and polariser transmission.
#[derive(Debug, Clone, Copy)]
pub struct Correction {
    pub f: f64,
    pub t: f64,
}

impl Correction {
    /// Parse the `--correct F=0.984,T=0.971` flag value.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut f = None;
        let mut t = None;
        for part in text.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("bad --correct component '{part}'")))?;
            let parsed: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad --correct value '{value}'")))?;
            match key.trim() {
                "F" | "f" => f = Some(parsed),
                "T" | "t" => t = Some(parsed),
                other => {
                    return Err(CliError::usage(format!(
                        "unknown --correct key '{other}', expected F and T"
                    )))
                }
            }
        }
        match (f, t) {
            (Some(f), Some(t)) => Ok(Correction { f, t }),
            _ => Err(CliError::usage("--correct needs both F=.. and T=..")),
        }
    }
}

pub struct CommandOutput {
    pub report: ReportDocument,
    pub human: String,
    /// CSV body when the command supports `--csv`.
    pub csv: Option<String>,
    /// Exit with a verification failure even though the report was built.
    pub verification_failure: Option<String>,
}

fn settings_line(angles: &SettingAngles) -> String {
    format!(
        "angles: a1={} a2={} b1={} b2={}",
        format_angle(angles.a(0)),
        format_angle(angles.a(1)),
        format_angle(angles.b(0)),
        format_angle(angles.b(1)),
    )
}

fn block_json(block: &bell_core::OutcomeDistribution) -> Value {
    let probs = block.probabilities();
    json!({
        "pp": probs[0],
        "pm": probs[1],
        "mp": probs[2],
        "mm": probs[3],
    })
}

// ── exact ────────────────────────────────────────────────────────────────

pub fn cmd_exact(
    resolved: &Resolved,
    correction: Option<Correction>,
) -> Result<CommandOutput, CliError> {
    let measure = BellMeasure::new(resolved.angles);
    let s = measure.chsh_value();

    let mut settings_json = Vec::new();
    let mut human = String::new();
    human.push_str(&format!(
        "Exact CHSH values   {}\n",
        settings_line(&resolved.angles)
    ));
    if resolved.angles.degenerate() {
        human.push_str("warning: degenerate configuration (equal angles on one side)\n");
    }
    human.push_str("setting (a, b)                E(a,b)        block (++, +-, -+, --)\n");
    for (ai, bi) in SettingAngles::index_pairs() {
        let pair = resolved.angles.pair(ai, bi);
        let block = measure.block(ai, bi);
        let e = block.correlator();
        settings_json.push(json!({
            "a": pair.a(),
            "b": pair.b(),
            "e": e,
            "block": block_json(&block),
        }));
        let probs = block.probabilities();
        human.push_str(&format!(
            "({:>7}, {:>7})   {:>20.16}   {:.6} {:.6} {:.6} {:.6}\n",
            format_angle(pair.a()),
            format_angle(pair.b()),
            e,
            probs[0],
            probs[1],
            probs[2],
            probs[3],
        ));
    }
    human.push_str(&format!("S = {s:.16}\n"));

    let mut results = Map::new();
    results.insert(
        "settings".into(),
        tag_floats(Value::Array(settings_json), Provenance::Exact),
    );
    results.insert("s".into(), tagged(&s, Provenance::Exact));
    // Canonical measure document: angles plus the 16 point weights in
    // block-major order.
    results.insert("measure".into(), tagged(&measure, Provenance::Exact));
    if let Some(c) = correction {
        let corrected = bell_core::classical::corrected_prediction(s, c.f, c.t)
            .map_err(|e| CliError::usage(e.to_string()))?;
        results.insert(
            "correction".into(),
            json!({
                "f": tagged(&c.f, Provenance::Exact),
                "t": tagged(&c.t, Provenance::Exact),
                "corrected_s": tagged(&corrected, Provenance::Corrected),
            }),
        );
        human.push_str(&format!(
            "corrected S (F={}, T={}) = {corrected:.16}\n",
            c.f, c.t
        ));
    }

    let mut warnings = Vec::new();
    if resolved.angles.degenerate() {
        warnings.push("degenerate configuration: equal angles on one side".to_string());
    }

    let csv = {
        let mut out = String::from("a,b,p,q,probability\n");
        for (ai, bi) in SettingAngles::index_pairs() {
            let pair = resolved.angles.pair(ai, bi);
            let block = measure.block(ai, bi);
            for &(p, q) in &JOINT_OUTCOMES {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    pair.a(),
                    pair.b(),
                    p.value(),
                    q.value(),
                    block.probability(p, q)
                ));
            }
        }
        out
    };

    Ok(CommandOutput {
        report: ReportDocument {
            command: "exact",
            seed: None,
            config: resolved.echo(EchoFields::default()),
            results: Value::Object(results),
            warnings,
        },
        human,
        csv: Some(csv),
        verification_failure: None,
    })
}

// ── simulate ─────────────────────────────────────────────────────────────

fn estimate_json(estimate: &ChshEstimate) -> Value {
    tagged(estimate, Provenance::Sampled)
}

pub fn cmd_simulate(resolved: &Resolved) -> Result<CommandOutput, CliError> {
    if resolved.runs == 0 {
        return Err(CliError::usage("--runs must be at least 1"));
    }
    let cfg = ExperimentConfig {
        angles: resolved.angles,
        runs: resolved.runs,
        seed: resolved.seed,
        source: resolved.source,
    };
    let tally = if resolved.parallel {
        run_experiment_parallel(&cfg)?
    } else {
        run_experiment(&cfg)?
    };

    let exact_s = BellMeasure::new(resolved.angles).chsh_value();
    let mut warnings = Vec::new();
    let estimate = match estimate_s(&tally) {
        Ok(estimate) => Some(estimate),
        Err(ExperimentError::EmptySetting { .. }) => {
            for (ai, bi) in SettingAngles::index_pairs() {
                if tally.setting_count(ai, bi) == 0 {
                    warnings.push(format!(
                        "setting (a={}, b={}) has no recorded runs; estimate omitted",
                        resolved.angles.a(ai),
                        resolved.angles.b(bi)
                    ));
                }
            }
            None
        }
        Err(other) => return Err(other.into()),
    };

    let mut human = String::new();
    human.push_str(&format!(
        "Simulated experiment   {}   runs={} seed={} source={} mode={}\n",
        settings_line(&resolved.angles),
        resolved.runs,
        resolved.seed,
        resolved.source,
        if resolved.parallel {
            "parallel-batched"
        } else {
            "single-stream"
        },
    ));
    human.push_str(&tally_human(&tally));
    match &estimate {
        Some(estimate) => {
            for setting in &estimate.settings {
                human.push_str(&format!(
                    "E({:>7}, {:>7}) = {:+.6} ± {:.6}   (N = {})\n",
                    format_angle(setting.a),
                    format_angle(setting.b),
                    setting.e,
                    setting.std_error,
                    setting.count,
                ));
            }
            human.push_str(&format!(
                "S_k = {:+.6} ± {:.6}   exact S = {:+.6}   deviation = {:+.6}\n",
                estimate.s,
                estimate.std_error,
                exact_s,
                estimate.s - exact_s,
            ));
        }
        None => {
            for warning in &warnings {
                human.push_str(&format!("warning: {warning}\n"));
            }
        }
    }

    let mut results = Map::new();
    results.insert(
        "estimate".into(),
        estimate.as_ref().map(estimate_json).unwrap_or(Value::Null),
    );
    results.insert("tally".into(), tagged(&tally, Provenance::Exact));
    results.insert("exact_s".into(), tagged(&exact_s, Provenance::Exact));
    results.insert(
        "deviation_from_exact".into(),
        estimate
            .as_ref()
            .map(|e| tagged(&(e.s - exact_s), Provenance::Sampled))
            .unwrap_or(Value::Null),
    );

    let mut csv = tally.to_csv();
    if let Some(estimate) = &estimate {
        csv.push('\n');
        csv.push_str(&estimate.to_csv());
    }

    Ok(CommandOutput {
        report: ReportDocument {
            command: "simulate",
            seed: Some(resolved.seed),
            config: resolved.echo(EchoFields {
                seed: true,
                runs: true,
                trials: false,
                mode: true,
            }),
            results: Value::Object(results),
            warnings,
        },
        human,
        csv: Some(csv),
        verification_failure: None,
    })
}

fn tally_human(tally: &TallyTable) -> String {
    let mut out = String::from("counts per setting (++, +-, -+, --):\n");
    for (ai, bi) in SettingAngles::index_pairs() {
        let cells: Vec<u64> = JOINT_OUTCOMES
            .iter()
            .map(|&(p, q)| tally.cell_count(ai, bi, p, q))
            .collect();
        out.push_str(&format!(
            "({:>7}, {:>7})   N={:>9}   {:>9} {:>9} {:>9} {:>9}\n",
            format_angle(tally.angles().a(ai)),
            format_angle(tally.angles().b(bi)),
            tally.setting_count(ai, bi),
            cells[0],
            cells[1],
            cells[2],
            cells[3],
        ));
    }
    out
}

// ── verify ───────────────────────────────────────────────────────────────

pub fn cmd_verify(resolved: &Resolved, tamper_pvm: bool) -> Result<CommandOutput, CliError> {
    if resolved.trials == 0 {
        return Err(CliError::usage("--trials must be at least 1"));
    }
    let report = run_battery(&BatteryOptions {
        angles: resolved.angles,
        trials: resolved.trials,
        seed: resolved.seed,
        parallel: resolved.parallel,
        tamper_pvm,
    });

    let human = battery_human(&report, &resolved.angles);
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();

    let checks_json: Vec<Value> = report
        .checks
        .iter()
        .map(|c| {
            let provenance = if c.sampled {
                Provenance::Sampled
            } else {
                Provenance::Exact
            };
            json!({
                "name": c.name,
                "passed": c.passed,
                "worst": tagged(&c.worst, provenance),
                "detail": c.detail,
            })
        })
        .collect();

    Ok(CommandOutput {
        report: ReportDocument {
            command: "verify",
            seed: Some(resolved.seed),
            config: resolved.echo(EchoFields {
                seed: true,
                runs: false,
                trials: true,
                mode: true,
            }),
            results: json!({
                "checks": checks_json,
                "all_passed": report.all_passed,
            }),
            warnings: Vec::new(),
        },
        human,
        csv: None,
        verification_failure: (!report.all_passed)
            .then(|| format!("failed checks: {}", failed.join(", "))),
    })
}

fn battery_human(report: &BatteryReport, angles: &SettingAngles) -> String {
    let mut out = format!("Verification battery   {}\n", settings_line(angles));
    for check in &report.checks {
        out.push_str(&format!(
            "[{}] {:<20} worst={:.3e}   {}\n",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.worst,
            check.detail,
        ));
    }
    out.push_str(if report.all_passed {
        "all checks passed\n"
    } else {
        "SOME CHECKS FAILED\n"
    });
    out
}

// ── lhv ──────────────────────────────────────────────────────────────────

pub fn cmd_lhv(resolved: &Resolved) -> Result<CommandOutput, CliError> {
    if resolved.trials == 0 {
        return Err(CliError::usage("--trials must be at least 1"));
    }
    let probe = if resolved.parallel {
        bell_core::lhv::verify_chsh_bound_parallel(resolved.trials, resolved.seed)
    } else {
        bell_core::lhv::verify_chsh_bound(resolved.trials, resolved.seed)
    };
    let target = BellMeasure::new(resolved.angles);
    let best = best_local_approximation(&target);

    let mut human = format!(
        "Local-model bound probe   {}   trials={} seed={}\n",
        settings_line(&resolved.angles),
        resolved.trials,
        resolved.seed,
    );
    human.push_str(&format!(
        "max |S| over sampled models and deterministic strategies: {:.12} \
         (bound 2, respected: {})\n",
        probe.max_abs_s, probe.bound_respected,
    ));
    human.push_str(&format!(
        "deterministic strategies: max |S| = {}\n",
        probe.deterministic_max,
    ));
    human.push_str(&format!(
        "best local strategy reaches S = {} against exact S = {:.12}; \
         closest block distance {:.6}\n",
        best.achieved_s, best.target_s, best.block_distance,
    ));

    let results = json!({
        "probe": {
            "trials": probe.trials,
            "max_abs_s": tagged(&probe.max_abs_s, Provenance::Sampled),
            "deterministic_max": tagged(&probe.deterministic_max, Provenance::Exact),
            "bound_respected": probe.bound_respected,
            "witness": tagged(&probe.witness, Provenance::Sampled),
        },
        "best_approximation": {
            "achieved_s": tagged(&best.achieved_s, Provenance::Exact),
            "target_s": tagged(&best.target_s, Provenance::Exact),
            "block_distance": tagged(&best.block_distance, Provenance::Exact),
            "strategy": serde_json::to_value(best.strategy).expect("strategy serializes"),
        },
    });

    Ok(CommandOutput {
        report: ReportDocument {
            command: "lhv",
            seed: Some(resolved.seed),
            config: resolved.echo(EchoFields {
                seed: true,
                runs: false,
                trials: true,
                mode: true,
            }),
            results,
            warnings: Vec::new(),
        },
        human,
        csv: None,
        verification_failure: (!probe.bound_respected)
            .then(|| format!("local model exceeded the bound: |S| = {}", probe.max_abs_s)),
    })
}

// ── trace-theorem ────────────────────────────────────────────────────────

pub fn cmd_trace_theorem(resolved: &Resolved) -> Result<CommandOutput, CliError> {
    use rand::Rng;
    use rand::SeedableRng;

    let mut human = format!(
        "Partial-trace consistency   {}\n",
        settings_line(&resolved.angles)
    );
    let mut worst: f64 = 0.0;
    let mut settings_json = Vec::new();
    for (ai, bi) in SettingAngles::index_pairs() {
        let pair = resolved.angles.pair(ai, bi);
        let check = partial_trace_check(pair);
        worst = worst.max(check.max_deviation());
        settings_json.push(json!({
            "a": pair.a(),
            "b": pair.b(),
            "deviation_a": check.deviation_a,
            "deviation_b": check.deviation_b,
        }));
        human.push_str(&format!(
            "({:>7}, {:>7})   dev_A = {:.3e}   dev_B = {:.3e}\n",
            format_angle(pair.a()),
            format_angle(pair.b()),
            check.deviation_a,
            check.deviation_b,
        ));
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(resolved.seed);
    let samples = resolved.trials.min(100_000);
    for _ in 0..samples {
        let a = (rng.random::<f64>() - 0.5) * 2.0 * std::f64::consts::PI;
        let b = (rng.random::<f64>() - 0.5) * 2.0 * std::f64::consts::PI;
        let check = partial_trace_check(SettingPair::new(a, b).expect("finite"));
        worst = worst.max(check.max_deviation());
    }
    let within = worst <= bell_core::ENTRY_TOL;
    human.push_str(&format!(
        "worst deviation over 4 configured + {samples} random settings: {worst:.3e} \
         (tolerance {:.0e}) — {}\n",
        bell_core::ENTRY_TOL,
        if within { "ok" } else { "EXCEEDED" },
    ));

    Ok(CommandOutput {
        report: ReportDocument {
            command: "trace-theorem",
            seed: Some(resolved.seed),
            config: resolved.echo(EchoFields {
                seed: true,
                runs: false,
                trials: true,
                mode: false,
            }),
            results: json!({
                "settings": tag_floats(Value::Array(settings_json), Provenance::Exact),
                "random_settings": samples,
                "max_deviation": tagged(&worst, Provenance::Exact),
                "within_tolerance": within,
            }),
            warnings: Vec::new(),
        },
        human,
        csv: None,
        verification_failure: (!within)
            .then(|| format!("partial-trace deviation {worst:e} above tolerance")),
    })
}
