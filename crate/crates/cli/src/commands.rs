use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::json;

use cpdnet_core::detector::DetectorConfig;
use cpdnet_core::eval::{evaluate as score, run_experiment, Ratio};
use cpdnet_core::ingest::{self, Bucketing, Columns, IngestConfig, Origin};
use cpdnet_core::presets::{preset, PRESET_NAMES};
use cpdnet_core::report;
use cpdnet_core::synthgen::{generate_scenario, GroundTruth, ScenarioSpec};
use cpdnet_core::{bucket_snapshots, parse_edges, scan, BootstrapSampleSize};

use crate::output::{Outputs, RunManifest};
use crate::{DetectArgs, DetectorArgs, EvaluateArgs, ExperimentArgs, Format, SimulateArgs};

fn wants(format: Option<Format>, f: Format) -> bool {
    format.is_none_or(|x| x == f)
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn apply_detector_args(mut config: DetectorConfig, args: &DetectorArgs) -> Result<DetectorConfig> {
    if let Some(w) = &args.window_lengths {
        config.window_lengths = w.clone();
    }
    if let Some(a) = args.alpha {
        config.alpha = a;
    }
    if let Some(b) = args.bootstrap {
        config.bootstrap_replicates = b;
    }
    if let Some(s) = &args.bootstrap_sample {
        config.bootstrap_sample = s.parse::<BootstrapSampleSize>()?;
    }
    if let Some(m) = args.min_nodes {
        config.min_nodes = m;
    }
    if let Some(s) = args.subsample {
        config.subsample_nodes = Some(s);
    }
    config.validate()?;
    Ok(config)
}

fn parse_origin(s: &str) -> Result<Origin> {
    if s == "first-event" {
        return Ok(Origin::FirstEvent);
    }
    s.parse::<i64>()
        .map(Origin::Epoch)
        .with_context(|| format!("--origin must be 'first-event' or an epoch timestamp, got {s:?}"))
}

pub fn detect(args: DetectArgs) -> Result<()> {
    let allow_list = args
        .allow_list
        .as_deref()
        .map(ingest::load_allow_list)
        .transpose()?;
    let ingest_config = IngestConfig {
        bucketing: if args.calendar_months {
            Bucketing::CalendarMonth
        } else {
            Bucketing::Fixed {
                seconds: args.bucket_seconds,
            }
        },
        origin: parse_origin(&args.origin)?,
        delimiter: args.delimiter,
        columns: Columns {
            time: args.columns[0],
            source: args.columns[1],
            target: args.columns[2],
        },
        allow_list,
    };
    let seed = resolve_seed(args.seed);
    let detector = apply_detector_args(
        DetectorConfig {
            window_lengths: vec![1, 2, 4],
            rng_seed: seed,
            ..DetectorConfig::default()
        },
        &args.detector,
    )?;

    let parsed = parse_edges(&args.edges, &ingest_config)?;
    let skipped = &parsed.skipped;
    eprintln!(
        "ingest: {} edges kept, {} self-loops, {} malformed lines, {} outside allow-list",
        parsed.edges.len(),
        skipped.self_loops,
        skipped.malformed,
        skipped.filtered
    );
    let sequence = bucket_snapshots(&parsed.edges, &ingest_config)?;
    eprintln!(
        "ingest: {} snapshots ({} empty)",
        sequence.snapshots.len(),
        sequence.empty_buckets().len()
    );
    let report = scan(&sequence.snapshots, &detector)?;

    let mut outputs = Outputs::new(&args.out);
    if wants(args.format, Format::Json) {
        outputs.add("report.json", report::change_report_json(&report)?);
    }
    if wants(args.format, Format::Csv) {
        outputs.add("report.csv", report::change_report_csv(&report)?);
    }
    let ingest_echo = IngestConfig {
        allow_list: None,
        ..ingest_config
    };
    let mut manifest = RunManifest::new(
        "detect",
        Some(seed),
        json!({
            "ingest": ingest_echo,
            "detector": detector,
            "skipped": skipped,
            "event_counts": sequence.event_counts,
        }),
    );
    manifest.inputs.push(args.edges.display().to_string());
    if let Some(p) = &args.allow_list {
        manifest.inputs.push(p.display().to_string());
    }
    outputs.commit(manifest)?;
    eprintln!(
        "detect: {} boundary tests, {} flagged, {} change points",
        report.tests.len(),
        report.flagged_count(),
        report.change_points.len()
    );
    Ok(())
}

fn load_scenario(args: &SimulateArgs) -> Result<ScenarioSpec> {
    match (&args.preset, &args.config) {
        (Some(name), _) => {
            let p = preset(name).with_context(|| {
                format!(
                    "unknown preset {name:?}; expected one of {}",
                    PRESET_NAMES.join(", ")
                )
            })?;
            Ok(ScenarioSpec {
                rng_seed: resolve_seed(args.seed),
                ..p.scenario
            })
        }
        (None, Some(path)) => {
            let mut spec = ScenarioSpec::load(path)?;
            if let Some(s) = args.seed {
                spec.rng_seed = s;
            }
            Ok(spec)
        }
        (None, None) => bail!("one of --preset or --config is required"),
    }
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    if args.bucket_seconds <= 0 {
        bail!("--bucket-seconds must be > 0");
    }
    let spec = load_scenario(&args)?;
    let (snapshots, truth) = generate_scenario(&spec)?;
    let mut outputs = Outputs::new(&args.out);
    outputs.add(
        "edges.csv",
        report::edge_stream(&snapshots, args.bucket_seconds),
    );
    outputs.add("ground_truth.json", report::to_json(&truth)?);
    outputs.add("scenario.json", report::to_json(&spec)?);
    let mut manifest = RunManifest::new(
        "simulate",
        Some(spec.rng_seed),
        json!({ "scenario": spec, "bucket_seconds": args.bucket_seconds }),
    );
    if let Some(p) = &args.config {
        manifest.inputs.push(p.display().to_string());
    }
    outputs.commit(manifest)?;
    eprintln!(
        "simulate: {} snapshots, {} planted changes",
        snapshots.len(),
        truth.change_indices.len()
    );
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let report = report::load_change_report(&args.report)?;
    let truth = GroundTruth::load(&args.truth)?;
    let result = score(&report.change_indices(), &truth, args.tolerance);
    let mut outputs = Outputs::new(&args.out);
    if wants(args.format, Format::Json) {
        outputs.add("eval.json", report::to_json(&result)?);
    }
    if wants(args.format, Format::Csv) {
        outputs.add("eval.csv", report::eval_csv(&result)?);
    }
    let mut manifest = RunManifest::new("evaluate", None, json!({ "tolerance": args.tolerance }));
    manifest.inputs = [&args.report, &args.truth]
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    outputs.commit(manifest)?;
    println!(
        "precision {}  recall {}  (tp {}, fp {}, fn {}, tolerance {})",
        result.precision,
        result.recall,
        result.true_positives,
        result.false_positives,
        result.false_negatives,
        result.tolerance
    );
    Ok(())
}

fn fmt_ratio(r: Ratio) -> String {
    match r {
        Ratio::Value(v) => format!("{v:.3}"),
        Ratio::NotApplicable => "n/a".into(),
    }
}

pub fn experiment(args: ExperimentArgs) -> Result<()> {
    let p = preset(&args.preset).with_context(|| {
        format!(
            "unknown preset {:?}; expected one of {}",
            args.preset,
            PRESET_NAMES.join(", ")
        )
    })?;
    let seed = resolve_seed(args.seed);
    let spec = ScenarioSpec {
        rng_seed: seed,
        ..p.scenario
    };
    let detector = apply_detector_args(
        DetectorConfig {
            rng_seed: seed,
            ..p.detector
        },
        &args.detector,
    )?;
    let summary = run_experiment(&spec, &detector, args.repeats, args.tolerance)?;

    println!(
        "preset\trepeats\talpha\ttolerance\tprecision_mean\tprecision_std\trecall_mean\trecall_std"
    );
    println!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        p.name,
        summary.repeats,
        detector.alpha,
        summary.tolerance,
        fmt_ratio(summary.precision.mean),
        fmt_ratio(summary.precision.std),
        fmt_ratio(summary.recall.mean),
        fmt_ratio(summary.recall.std),
    );

    if let Some(dir) = &args.out {
        write_experiment(dir, &args, seed, &spec, &detector, &summary)?;
    }
    Ok(())
}

fn write_experiment(
    dir: &Path,
    args: &ExperimentArgs,
    seed: u64,
    spec: &ScenarioSpec,
    detector: &DetectorConfig,
    summary: &cpdnet_core::ExperimentSummary,
) -> Result<()> {
    let mut outputs = Outputs::new(dir);
    if wants(args.format, Format::Json) {
        outputs.add("experiment.json", report::to_json(summary)?);
    }
    if wants(args.format, Format::Csv) {
        outputs.add("experiment.csv", report::experiment_csv(summary)?);
    }
    let manifest = RunManifest::new(
        "experiment",
        Some(seed),
        json!({
            "preset": args.preset,
            "repeats": args.repeats,
            "tolerance": args.tolerance,
            "scenario": spec,
            "detector": detector,
        }),
    );
    outputs.commit(manifest)
}
