//! Scoring detections against planted changes.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::detector::{scan, DetectorConfig};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, TAG_REPEAT};
use crate::synthgen::{generate_scenario, GroundTruth, ScenarioSpec};

pub const DEFAULT_TOLERANCE: usize = 1;

/// A ratio that may be undefined (zero denominator). Serialized as a number
/// or the string `"n/a"`; never coerced to 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Value(f64),
    NotApplicable,
}

impl Ratio {
    pub fn of(num: usize, den: usize) -> Self {
        if den == 0 {
            Ratio::NotApplicable
        } else {
            Ratio::Value(num as f64 / den as f64)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Value(v) => Some(v),
            Ratio::NotApplicable => None,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Value(v) => write!(f, "{v}"),
            Ratio::NotApplicable => f.write_str("n/a"),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Value(v) => s.serialize_f64(*v),
            Ratio::NotApplicable => s.serialize_str("n/a"),
        }
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Ratio::Value(v)),
            Raw::Str(s) if s == "n/a" => Ok(Ratio::NotApplicable),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected number or \"n/a\", got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub tolerance: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: Ratio,
    pub recall: Ratio,
    /// `(detected, true)` index pairs.
    pub matches: Vec<(usize, usize)>,
}

/// One-to-one matching, closest pairs first.
///
/// A detection may match a true change at most `tolerance` indices away.
/// Among candidate pairs, smaller distance wins, then the earlier detection,
/// then the earlier true change.
pub fn match_detections(detected: &[usize], truth: &[usize], tolerance: usize) -> EvalResult {
    let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
    for (i, &d) in detected.iter().enumerate() {
        let lo = truth.partition_point(|&t| t + tolerance < d);
        for (j, &t) in truth.iter().enumerate().skip(lo) {
            if t > d + tolerance {
                break;
            }
            candidates.push((d.abs_diff(t), i, j));
        }
    }
    candidates.sort_unstable();
    let mut used_d = vec![false; detected.len()];
    let mut used_t = vec![false; truth.len()];
    let mut matches = Vec::new();
    for (_, i, j) in candidates {
        if used_d[i] || used_t[j] {
            continue;
        }
        used_d[i] = true;
        used_t[j] = true;
        matches.push((detected[i], truth[j]));
    }
    matches.sort_unstable();
    let tp = matches.len();
    let fp = detected.len() - tp;
    let fn_ = truth.len() - tp;
    EvalResult {
        tolerance,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        precision: Ratio::of(tp, tp + fp),
        recall: Ratio::of(tp, tp + fn_),
        matches,
    }
}

/// Mean and sample standard deviation over the runs where a ratio is defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: Ratio,
    pub std: Ratio,
    pub defined_runs: usize,
}

impl Aggregate {
    pub fn from_ratios(values: impl IntoIterator<Item = Ratio>) -> Self {
        let xs: Vec<f64> = values.into_iter().filter_map(Ratio::value).collect();
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: Ratio::NotApplicable,
                std: Ratio::NotApplicable,
                defined_runs: 0,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
            Ratio::Value((ss / (n - 1) as f64).sqrt())
        } else {
            Ratio::NotApplicable
        };
        Self {
            mean: Ratio::Value(mean),
            std,
            defined_runs: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub repeat: usize,
    pub scenario_seed: u64,
    pub detector_seed: u64,
    pub snapshots: usize,
    pub flagged_boundaries: usize,
    pub eval: EvalResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub repeats: usize,
    pub tolerance: usize,
    pub precision: Aggregate,
    pub recall: Aggregate,
    pub runs: Vec<RunSummary>,
}

/// Generates `repeats` scenarios, scans each one and aggregates the scores.
///
/// Repeat `r` derives its scenario seed from `spec.rng_seed` and its detector
/// seed from `config.rng_seed`, so repeats may run in any order.
pub fn run_experiment(
    spec: &ScenarioSpec,
    config: &DetectorConfig,
    repeats: usize,
    tolerance: usize,
) -> Result<ExperimentSummary> {
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be >= 1".into()));
    }
    spec.validate()?;
    config.validate()?;
    let runs = (0..repeats)
        .into_par_iter()
        .map(|r| run_once(spec, config, r, tolerance))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentSummary {
        repeats,
        tolerance,
        precision: Aggregate::from_ratios(runs.iter().map(|r| r.eval.precision)),
        recall: Aggregate::from_ratios(runs.iter().map(|r| r.eval.recall)),
        runs,
    })
}

fn run_once(
    spec: &ScenarioSpec,
    config: &DetectorConfig,
    repeat: usize,
    tolerance: usize,
) -> Result<RunSummary> {
    let scenario_seed = derive_seed(spec.rng_seed, &[TAG_REPEAT, repeat as u64, 0]);
    let detector_seed = derive_seed(config.rng_seed, &[TAG_REPEAT, repeat as u64, 1]);
    let spec = ScenarioSpec {
        rng_seed: scenario_seed,
        ..spec.clone()
    };
    let config = DetectorConfig {
        rng_seed: detector_seed,
        ..config.clone()
    };
    let (snapshots, truth) = generate_scenario(&spec)?;
    let report = scan(&snapshots, &config)?;
    Ok(RunSummary {
        repeat,
        scenario_seed,
        detector_seed,
        snapshots: snapshots.len(),
        flagged_boundaries: report.flagged_count(),
        eval: evaluate(&report.change_indices(), &truth, tolerance),
    })
}

pub fn evaluate(detected: &[usize], truth: &GroundTruth, tolerance: usize) -> EvalResult {
    let mut detected = detected.to_vec();
    detected.sort_unstable();
    match_detections(&detected, &truth.change_indices, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_is_perfect() {
        let r = match_detections(&[3, 8, 20], &[3, 8, 20], 1);
        assert_eq!(r.precision, Ratio::Value(1.0));
        assert_eq!(r.recall, Ratio::Value(1.0));
        assert_eq!(r.matches, vec![(3, 3), (8, 8), (20, 20)]);
    }

    #[test]
    fn shift_by_tolerance_still_matches() {
        let r = match_detections(&[5, 10, 22], &[3, 8, 20], 2);
        assert_eq!(
            (r.true_positives, r.false_positives, r.false_negatives),
            (3, 0, 0)
        );
        let r = match_detections(&[13, 23, 33], &[10, 20, 30], 2);
        assert_eq!(r.true_positives, 0);
    }

    #[test]
    fn empty_detections() {
        let r = match_detections(&[], &[4, 9], 1);
        assert_eq!(r.precision, Ratio::NotApplicable);
        assert_eq!(r.recall, Ratio::Value(0.0));
        let r = match_detections(&[], &[], 1);
        assert_eq!(r.recall, Ratio::NotApplicable);
    }

    #[test]
    fn nearest_first_is_one_to_one() {
        // 5 is closest to 5; 4 then falls back to nothing within tolerance 1
        // except 5, which is taken.
        let r = match_detections(&[4, 5], &[5], 1);
        assert_eq!(r.matches, vec![(5, 5)]);
        assert_eq!(r.false_positives, 1);
        let r = match_detections(&[5], &[4, 6], 1);
        assert_eq!(r.matches, vec![(5, 4)]);
        assert_eq!(r.false_negatives, 1);
    }

    #[test]
    fn ratio_serde() {
        let json = serde_json::to_string(&[Ratio::Value(0.5), Ratio::NotApplicable]).unwrap();
        assert_eq!(json, r#"[0.5,"n/a"]"#);
        let back: Vec<Ratio> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![Ratio::Value(0.5), Ratio::NotApplicable]);
    }

    #[test]
    fn aggregate_uses_sample_std() {
        let agg =
            Aggregate::from_ratios([Ratio::Value(0.5), Ratio::NotApplicable, Ratio::Value(1.0)]);
        assert_eq!(agg.defined_runs, 2);
        assert_eq!(agg.mean, Ratio::Value(0.75));
        let Ratio::Value(s) = agg.std else { panic!() };
        assert!((s - (0.125f64).sqrt()).abs() < 1e-15);
        let agg = Aggregate::from_ratios([Ratio::Value(0.3), Ratio::NotApplicable]);
        assert_eq!(agg.defined_runs, 1);
        assert_eq!(agg.std, Ratio::NotApplicable);
    }

    fn sorted_unique(max: usize, len: usize) -> impl Strategy<Value = Vec<usize>> {
        prop::collection::btree_set(0..max, 0..len).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn counts_are_consistent(
            det in sorted_unique(200, 40),
            truth in sorted_unique(200, 40),
            tol in 0usize..4,
            shift in 0usize..50,
        ) {
            let r = match_detections(&det, &truth, tol);
            prop_assert_eq!(r.true_positives + r.false_positives, det.len());
            prop_assert_eq!(r.true_positives + r.false_negatives, truth.len());
            let mut seen_d: Vec<_> = r.matches.iter().map(|m| m.0).collect();
            let mut seen_t: Vec<_> = r.matches.iter().map(|m| m.1).collect();
            seen_d.dedup();
            seen_t.sort_unstable();
            seen_t.dedup();
            prop_assert_eq!(seen_d.len(), r.true_positives);
            prop_assert_eq!(seen_t.len(), r.true_positives);
            prop_assert!(r.matches.iter().all(|&(d, t)| d.abs_diff(t) <= tol));

            let shifted = |v: &[usize]| v.iter().map(|x| x + shift).collect::<Vec<_>>();
            let moved = match_detections(&shifted(&det), &shifted(&truth), tol);
            prop_assert_eq!(moved.true_positives, r.true_positives);

            let wider = match_detections(&det, &truth, tol + 1);
            prop_assert!(wider.true_positives >= r.true_positives);
        }
    }
}
