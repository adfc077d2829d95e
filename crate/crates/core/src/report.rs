//! Stable on-disk formats.
//!
//! * Change report JSON: the serialized [`ChangeReport`].
//! * Change report CSV: one row per boundary test with columns
//!   `boundary_index,window_length,distance,p_value,flagged,skipped_reason`.
//!   Skipped tests leave `distance` and `p_value` empty.
//! * Evaluation CSV: a single row
//!   `tolerance,true_positives,false_positives,false_negatives,precision,recall`.
//! * Experiment CSV: one row per repeat with the same scoring columns.
//! * Edge stream: `timestamp,source,target` lines, node names `n<id>`.

use std::path::Path;

use serde::Serialize;

use crate::detector::ChangeReport;
use crate::error::{Error, Result};
use crate::eval::{EvalResult, ExperimentSummary};
use crate::graph::SnapshotGraph;

pub const CHANGE_CSV_HEADER: [&str; 6] = [
    "boundary_index",
    "window_length",
    "distance",
    "p_value",
    "flagged",
    "skipped_reason",
];

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn change_report_json(report: &ChangeReport) -> Result<String> {
    to_json(report)
}

pub fn change_report_from_json(text: &str) -> Result<ChangeReport> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_change_report(path: &Path) -> Result<ChangeReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    change_report_from_json(&text)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn change_report_csv(report: &ChangeReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CHANGE_CSV_HEADER)?;
    for t in &report.tests {
        w.write_record([
            t.boundary_index.to_string(),
            t.window_length.to_string(),
            opt(t.distance),
            opt(t.p_value),
            t.flagged.to_string(),
            t.skipped_reason.map(|r| r.to_string()).unwrap_or_default(),
        ])?;
    }
    finish(w)
}

const SCORE_COLUMNS: [&str; 6] = [
    "tolerance",
    "true_positives",
    "false_positives",
    "false_negatives",
    "precision",
    "recall",
];

fn score_fields(e: &EvalResult) -> [String; 6] {
    [
        e.tolerance.to_string(),
        e.true_positives.to_string(),
        e.false_positives.to_string(),
        e.false_negatives.to_string(),
        e.precision.to_string(),
        e.recall.to_string(),
    ]
}

pub fn eval_csv(result: &EvalResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SCORE_COLUMNS)?;
    w.write_record(score_fields(result))?;
    finish(w)
}

pub fn experiment_csv(summary: &ExperimentSummary) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "repeat",
        "scenario_seed",
        "detector_seed",
        "snapshots",
        "flagged_boundaries",
    ];
    header.extend(SCORE_COLUMNS);
    w.write_record(&header)?;
    for run in &summary.runs {
        let mut row = vec![
            run.repeat.to_string(),
            run.scenario_seed.to_string(),
            run.detector_seed.to_string(),
            run.snapshots.to_string(),
            run.flagged_boundaries.to_string(),
        ];
        row.extend(score_fields(&run.eval));
        w.write_record(&row)?;
    }
    finish(w)
}

/// Writes snapshots as one timestamped stream; snapshot `i` gets timestamp
/// `i * bucket_seconds`. Isolated nodes have no interactions and are not
/// represented.
pub fn edge_stream(snapshots: &[SnapshotGraph], bucket_seconds: i64) -> String {
    let mut out = String::from("# timestamp,source,target\n");
    for (i, g) in snapshots.iter().enumerate() {
        let t = i as i64 * bucket_seconds;
        for e in g.edges() {
            let (a, b) = e.endpoints();
            out.push_str(&format!("{t},n{},n{}\n", a.0, b.0));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{scan, DetectorConfig};
    use crate::eval::match_detections;
    use crate::graph::NodeId;
    use crate::ingest::{bucket_snapshots, parse_edges, Bucketing, IngestConfig, Origin};

    fn star(index: usize, leaves: u32) -> SnapshotGraph {
        SnapshotGraph::from_parts(index, [], (1..=leaves).map(|i| (NodeId(0), NodeId(i))))
    }

    #[test]
    fn report_round_trips_and_csv_shape() {
        let snaps = vec![star(0, 70), star(1, 20), star(2, 70), star(3, 90)];
        let config = DetectorConfig {
            bootstrap_replicates: 50,
            ..DetectorConfig::default()
        };
        let report = scan(&snaps, &config).unwrap();
        let json = change_report_json(&report).unwrap();
        assert_eq!(change_report_from_json(&json).unwrap(), report);
        assert!(json.contains("\"too few nodes\""));

        let csv = change_report_csv(&report).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CHANGE_CSV_HEADER.join(","));
        assert_eq!(lines.len(), 1 + report.tests.len());
        assert_eq!(lines[1], "1,1,,,false,too few nodes");
    }

    #[test]
    fn eval_csv_marks_undefined() {
        let csv = eval_csv(&match_detections(&[], &[3], 1)).unwrap();
        assert_eq!(csv, "tolerance,true_positives,false_positives,false_negatives,precision,recall\n1,0,0,1,n/a,0\n");
    }

    #[test]
    fn edge_stream_reingests() {
        let snaps = vec![star(0, 3), star(1, 5), SnapshotGraph::new(2), star(3, 2)];
        let text = edge_stream(&snaps, 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, text).unwrap();
        let config = IngestConfig {
            bucketing: Bucketing::Fixed { seconds: 1 },
            origin: Origin::Epoch(0),
            ..IngestConfig::default()
        };
        let parsed = parse_edges(&path, &config).unwrap();
        let seq = bucket_snapshots(&parsed.edges, &config).unwrap();
        assert_eq!(seq.event_counts, vec![3, 5, 0, 2]);
        for (a, b) in seq.snapshots.iter().zip(&snaps) {
            assert_eq!(a.degree_sequence().0.len(), b.degree_sequence().0.len());
        }
    }
}
