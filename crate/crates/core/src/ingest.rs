//! Timestamped edge lists and their bucketing into snapshots.
//!
//! Input is plain text, one interaction per line, with a configurable
//! delimiter and column order. Lines starting with `#` and blank lines are
//! ignored. Self-loops and unparseable lines are dropped and counted.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{DateTime, Datelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, SnapshotGraph, TemporalEdge};

pub const WEEK_SECONDS: i64 = 7 * 24 * 3600;
/// Fixed-width "month".
pub const MONTH_SECONDS: i64 = 30 * 24 * 3600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    /// Bucket 0 starts at the earliest event.
    #[default]
    FirstEvent,
    /// Bucket 0 starts at this epoch timestamp.
    Epoch(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bucketing {
    /// Half-open intervals `[origin + k*width, origin + (k+1)*width)`.
    Fixed { seconds: i64 },
    /// UTC calendar months counted from the origin's month.
    CalendarMonth,
}

/// Positions of the three fields within a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Columns {
    pub time: usize,
    pub source: usize,
    pub target: usize,
}

impl Default for Columns {
    fn default() -> Self {
        Self {
            time: 0,
            source: 1,
            target: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub bucketing: Bucketing,
    pub origin: Origin,
    pub delimiter: char,
    pub columns: Columns,
    /// When set, interactions touching any other node are dropped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allow_list: Option<BTreeSet<String>>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            bucketing: Bucketing::Fixed {
                seconds: WEEK_SECONDS,
            },
            origin: Origin::FirstEvent,
            delimiter: ',',
            columns: Columns::default(),
            allow_list: None,
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<()> {
        if let Bucketing::Fixed { seconds } = self.bucketing {
            if seconds <= 0 {
                return Err(Error::InvalidParameter("bucket_seconds must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Reads a node allow-list: one name per line, `#` comments ignored.
pub fn load_allow_list(path: &Path) -> Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipReport {
    pub self_loops: usize,
    pub malformed: usize,
    pub filtered: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedEdges {
    pub edges: Vec<TemporalEdge>,
    pub skipped: SkipReport,
}

fn parse_line(line: &str, config: &IngestConfig) -> Option<TemporalEdge> {
    let fields: Vec<&str> = line.split(config.delimiter).map(str::trim).collect();
    let get = |i: usize| fields.get(i).copied().filter(|f| !f.is_empty());
    let timestamp = get(config.columns.time)?.parse::<i64>().ok()?;
    let source = get(config.columns.source)?;
    let target = get(config.columns.target)?;
    Some(TemporalEdge::new(timestamp, source, target))
}

/// Parses an edge list in file order.
pub fn parse_edges(path: &Path, config: &IngestConfig) -> Result<ParsedEdges> {
    config.validate()?;
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut edges = Vec::new();
    let mut skipped = SkipReport::default();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some(edge) = parse_line(trimmed, config) else {
            skipped.malformed += 1;
            continue;
        };
        if edge.is_self_loop() {
            skipped.self_loops += 1;
            continue;
        }
        if let Some(allow) = &config.allow_list {
            if !allow.contains(&edge.source) || !allow.contains(&edge.target) {
                skipped.filtered += 1;
                continue;
            }
        }
        edges.push(edge);
    }
    if edges.is_empty() && skipped.self_loops == 0 && skipped.filtered == 0 {
        return Err(Error::NoValidEdges {
            path: path.to_path_buf(),
        });
    }
    Ok(ParsedEdges { edges, skipped })
}

/// Snapshots produced by bucketing, with the bookkeeping needed to audit
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSequence {
    pub snapshots: Vec<SnapshotGraph>,
    /// Raw interactions per bucket, before duplicate collapsing.
    pub event_counts: Vec<usize>,
    /// Node names indexed by [`NodeId`].
    pub node_names: Vec<String>,
    /// Resolved origin timestamp of bucket 0.
    pub origin: i64,
}

impl SnapshotSequence {
    /// Indices of buckets that received no interactions.
    pub fn empty_buckets(&self) -> Vec<usize> {
        self.event_counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .map(|(i, _)| i)
            .collect()
    }
}

fn month_number(ts: i64) -> Result<i64> {
    let dt = DateTime::from_timestamp(ts, 0)
        .ok_or_else(|| Error::InvalidParameter(format!("timestamp {ts} out of range")))?;
    Ok(i64::from(dt.year()) * 12 + i64::from(dt.month0()))
}

fn bucket_of(ts: i64, origin: i64, bucketing: Bucketing) -> Result<i64> {
    match bucketing {
        Bucketing::Fixed { seconds } => Ok((ts - origin).div_euclid(seconds)),
        Bucketing::CalendarMonth => Ok(month_number(ts)? - month_number(origin)?),
    }
}

/// Groups interactions into contiguous snapshots from the first to the last
/// non-empty bucket. Buckets without events become empty snapshots.
///
/// Node ids are assigned in sorted name order, so the result does not
/// depend on the order of `edges`.
pub fn bucket_snapshots(edges: &[TemporalEdge], config: &IngestConfig) -> Result<SnapshotSequence> {
    config.validate()?;
    if edges.is_empty() {
        return Err(Error::NoEdgesToBucket);
    }
    let origin = match config.origin {
        Origin::FirstEvent => edges.iter().map(|e| e.timestamp).min().expect("non-empty"),
        Origin::Epoch(t) => t,
    };
    let names: BTreeSet<&str> = edges
        .iter()
        .flat_map(|e| [e.source.as_str(), e.target.as_str()])
        .collect();
    let ids: BTreeMap<&str, NodeId> = names
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, NodeId(i as u32)))
        .collect();

    let mut buckets: BTreeMap<i64, (usize, Vec<(NodeId, NodeId)>)> = BTreeMap::new();
    for e in edges {
        let k = bucket_of(e.timestamp, origin, config.bucketing)?;
        let entry = buckets.entry(k).or_default();
        entry.0 += 1;
        if !e.is_self_loop() {
            entry
                .1
                .push((ids[e.source.as_str()], ids[e.target.as_str()]));
        }
    }
    let first = *buckets.keys().next().expect("non-empty");
    let last = *buckets.keys().next_back().expect("non-empty");
    let span = (last - first + 1) as usize;
    let mut snapshots: Vec<SnapshotGraph> = (0..span).map(SnapshotGraph::new).collect();
    let mut event_counts = vec![0usize; span];
    for (k, (count, pairs)) in buckets {
        let i = (k - first) as usize;
        event_counts[i] = count;
        let g = &mut snapshots[i];
        for (a, b) in pairs {
            g.add_edge(a, b);
        }
    }
    let origin = match config.bucketing {
        Bucketing::Fixed { seconds } => origin + first * seconds,
        Bucketing::CalendarMonth => origin,
    };
    Ok(SnapshotSequence {
        snapshots,
        event_counts,
        node_names: names.into_iter().map(String::from).collect(),
        origin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn weekly() -> IngestConfig {
        IngestConfig::default()
    }

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_and_reports_skips() {
        let f = write("# t,s,t\n100,a,b\n200,b,c\n100,a,a\nabc,a,b\n\n300,c\n");
        let parsed = parse_edges(f.path(), &weekly()).unwrap();
        assert_eq!(parsed.edges.len(), 2);
        assert_eq!(parsed.edges[0], TemporalEdge::new(100, "a", "b"));
        assert_eq!(parsed.skipped.self_loops, 1);
        assert_eq!(parsed.skipped.malformed, 2);
    }

    #[test]
    fn custom_delimiter_and_columns() {
        let f = write("a\tb\t50\n");
        let config = IngestConfig {
            delimiter: '\t',
            columns: Columns {
                time: 2,
                source: 0,
                target: 1,
            },
            ..weekly()
        };
        let parsed = parse_edges(f.path(), &config).unwrap();
        assert_eq!(parsed.edges, vec![TemporalEdge::new(50, "a", "b")]);
    }

    #[test]
    fn allow_list_filters() {
        let f = write("1,a,b\n2,a,z\n");
        let config = IngestConfig {
            allow_list: Some(["a", "b"].into_iter().map(String::from).collect()),
            ..weekly()
        };
        let parsed = parse_edges(f.path(), &config).unwrap();
        assert_eq!(parsed.edges.len(), 1);
        assert_eq!(parsed.skipped.filtered, 1);
    }

    #[test]
    fn parse_errors() {
        let f = write("x,y\nfoo\n");
        assert!(matches!(
            parse_edges(f.path(), &weekly()),
            Err(Error::NoValidEdges { .. })
        ));
        assert!(matches!(
            parse_edges(Path::new("/nonexistent/edges.csv"), &weekly()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn same_week_single_snapshot() {
        let edges = [
            TemporalEdge::new(0, "a", "b"),
            TemporalEdge::new(604_799, "b", "c"),
        ];
        let seq = bucket_snapshots(&edges, &weekly()).unwrap();
        assert_eq!(seq.snapshots.len(), 1);
        assert_eq!(seq.snapshots[0].edge_count(), 2);
    }

    #[test]
    fn boundary_starts_next_bucket() {
        let edges = [
            TemporalEdge::new(0, "a", "b"),
            TemporalEdge::new(604_800, "b", "c"),
        ];
        let seq = bucket_snapshots(&edges, &weekly()).unwrap();
        assert_eq!(seq.snapshots.len(), 2);
        assert!(seq.snapshots.iter().all(|s| s.edge_count() == 1));
    }

    #[test]
    fn gaps_become_empty_snapshots() {
        let edges = [
            TemporalEdge::new(0, "a", "b"),
            TemporalEdge::new(1_814_400, "b", "c"),
        ];
        let seq = bucket_snapshots(&edges, &weekly()).unwrap();
        assert_eq!(seq.snapshots.len(), 4);
        assert_eq!(seq.event_counts, vec![1, 0, 0, 1]);
        assert_eq!(seq.empty_buckets(), vec![1, 2]);
        assert!(seq.snapshots[1].is_empty() && seq.snapshots[2].is_empty());
        assert_eq!(seq.snapshots[3].index, 3);
    }

    #[test]
    fn explicit_origin_and_negative_offsets() {
        let edges = [
            TemporalEdge::new(10, "a", "b"),
            TemporalEdge::new(25, "b", "c"),
        ];
        let config = IngestConfig {
            bucketing: Bucketing::Fixed { seconds: 10 },
            origin: Origin::Epoch(15),
            ..weekly()
        };
        // t=10 falls in bucket -1, t=25 in bucket 1.
        let seq = bucket_snapshots(&edges, &config).unwrap();
        assert_eq!(seq.event_counts, vec![1, 0, 1]);
        assert_eq!(seq.origin, 5);
    }

    #[test]
    fn calendar_months() {
        // 2001-01-31T00:00Z, 2001-02-01T00:00Z, 2001-04-15T00:00Z
        let edges = [
            TemporalEdge::new(980_899_200, "a", "b"),
            TemporalEdge::new(980_985_600, "b", "c"),
            TemporalEdge::new(987_292_800, "c", "d"),
        ];
        let config = IngestConfig {
            bucketing: Bucketing::CalendarMonth,
            ..weekly()
        };
        let seq = bucket_snapshots(&edges, &config).unwrap();
        assert_eq!(seq.event_counts, vec![1, 1, 0, 1]);
    }

    #[test]
    fn bucketing_rejects_empty_and_zero_width() {
        assert!(matches!(
            bucket_snapshots(&[], &weekly()),
            Err(Error::NoEdgesToBucket)
        ));
        let config = IngestConfig {
            bucketing: Bucketing::Fixed { seconds: 0 },
            ..weekly()
        };
        assert!(bucket_snapshots(&[TemporalEdge::new(0, "a", "b")], &config).is_err());
    }

    #[test]
    fn bucketing_is_order_invariant() {
        let mut edges: Vec<TemporalEdge> = (0..300)
            .map(|i| {
                TemporalEdge::new(
                    i * 9_000,
                    format!("u{}", i % 17),
                    format!("u{}", (i * 7 + 3) % 23),
                )
            })
            .filter(|e| !e.is_self_loop())
            .collect();
        let a = bucket_snapshots(&edges, &weekly()).unwrap();
        edges.reverse();
        edges.rotate_left(41);
        let b = bucket_snapshots(&edges, &weekly()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.event_counts.iter().sum::<usize>(), edges.len());
    }
}
