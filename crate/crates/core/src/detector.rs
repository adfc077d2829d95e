//! Sliding-window change point scan.
//!
//! For every window length `W` and every boundary `b` with a full window on
//! both sides, the earlier window `[b-W, b)` is the base model and the later
//! window `[b, b+W)` is compared against it. A boundary is flagged when the
//! bootstrap p-value of the observed KS distance exceeds `alpha`.

use std::fmt;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DegreeSequence, EmpiricalCdf, SnapshotGraph, WindowGraph};
use crate::seed::{derive_seed, derived_rng, Rng, TAG_BOUNDARY, TAG_SUBSAMPLE};
use crate::stats::{bootstrap_distances, bootstrap_pvalue, ks_statistic};

pub const DEFAULT_ALPHA: f64 = 0.90;
pub const DEFAULT_REPLICATES: usize = 1000;
pub const DEFAULT_MIN_NODES: usize = 50;
pub const DEFAULT_SUBSAMPLE: usize = 200;

/// How many draws each bootstrap replicate takes from the base window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BootstrapSampleSize {
    /// As many draws as the base window has nodes.
    BaseSize,
    /// `round(n*m / (n+m))` for base size `n` and comparison size `m`: the
    /// size at which a one-sample resampling distance has the same scale as
    /// the two-sample distance it is compared with.
    Effective,
    /// A fixed number of draws.
    Fixed(usize),
}

impl BootstrapSampleSize {
    pub fn resolve(self, base_len: usize, compare_len: usize) -> usize {
        match self {
            Self::BaseSize => base_len,
            Self::Effective => {
                let (n, m) = (base_len as f64, compare_len as f64);
                ((n * m / (n + m)).round() as usize).max(1)
            }
            Self::Fixed(k) => k.max(1),
        }
    }
}

impl std::str::FromStr for BootstrapSampleSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" | "base-size" => Ok(Self::BaseSize),
            "effective" => Ok(Self::Effective),
            other => other
                .parse::<usize>()
                .ok()
                .filter(|&k| k > 0)
                .map(Self::Fixed)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "bootstrap sample size must be 'base', 'effective' or a positive count, got {other:?}"
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub window_lengths: Vec<usize>,
    pub alpha: f64,
    pub bootstrap_replicates: usize,
    pub bootstrap_sample: BootstrapSampleSize,
    pub min_nodes: usize,
    /// Windows with more nodes than this are reduced to a uniform sample of
    /// this many node degrees.
    pub subsample_nodes: Option<usize>,
    pub rng_seed: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            window_lengths: vec![1],
            alpha: DEFAULT_ALPHA,
            bootstrap_replicates: DEFAULT_REPLICATES,
            bootstrap_sample: BootstrapSampleSize::Effective,
            min_nodes: DEFAULT_MIN_NODES,
            subsample_nodes: None,
            rng_seed: 0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.window_lengths.is_empty() {
            return bad("window_lengths must not be empty");
        }
        if self.window_lengths.contains(&0) {
            return bad("window lengths must be >= 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if self.min_nodes == 0 {
            return bad("min_nodes must be >= 1");
        }
        if self.bootstrap_replicates == 0 {
            return bad("bootstrap_replicates must be >= 1");
        }
        if self.subsample_nodes == Some(0) {
            return bad("subsample_nodes must be >= 1");
        }
        Ok(())
    }

    fn largest_window(&self) -> usize {
        self.window_lengths.iter().copied().max().unwrap_or(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SkipReason {
    #[serde(rename = "too few nodes")]
    TooFewNodes,
    #[serde(rename = "empty window")]
    EmptyWindow,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::TooFewNodes => "too few nodes",
            SkipReason::EmptyWindow => "empty window",
        })
    }
}

/// Degrees of one window, ready for testing.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub node_count: usize,
    pub degrees: DegreeSequence,
    pub cdf: EmpiricalCdf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowOutcome {
    Sample(WindowSample),
    Skipped(SkipReason),
}

/// Builds the degree CDF of the union of `length` snapshots from `start`.
///
/// Degrees come back sorted. Subsampling draws from the sorted degree
/// multiset rather than from node ids, which is the same distribution as
/// sampling nodes and keeps everything downstream independent of how nodes
/// are named.
pub fn window_cdf(
    snapshots: &[SnapshotGraph],
    start: usize,
    length: usize,
    config: &DetectorConfig,
    rng: &mut Rng,
) -> Result<WindowOutcome> {
    let window = WindowGraph::union(snapshots, start, length)?;
    let node_count = window.graph.node_count();
    if node_count == 0 {
        return Ok(WindowOutcome::Skipped(SkipReason::EmptyWindow));
    }
    if node_count < config.min_nodes {
        return Ok(WindowOutcome::Skipped(SkipReason::TooFewNodes));
    }
    let mut degrees = window.graph.degree_sequence().0;
    degrees.sort_unstable();
    if let Some(k) = config.subsample_nodes {
        if node_count > k {
            degrees = index::sample(rng, node_count, k)
                .into_iter()
                .map(|i| degrees[i])
                .collect();
            degrees.sort_unstable();
        }
    }
    let degrees = DegreeSequence::new(degrees);
    let cdf = EmpiricalCdf::from_degrees(&degrees)?;
    Ok(WindowOutcome::Sample(WindowSample {
        node_count,
        degrees,
        cdf,
    }))
}

/// Result of testing one boundary at one window length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTest {
    /// First snapshot of the later window.
    pub boundary_index: usize,
    pub window_length: usize,
    pub distance: Option<f64>,
    pub p_value: Option<f64>,
    pub flagged: bool,
    pub skipped_reason: Option<SkipReason>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// Flagged at the largest configured window length.
    ChangePoint,
    /// Flagged only at shorter window lengths.
    Anomaly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    pub boundary_index: usize,
    pub p_value: f64,
    pub scales: Vec<usize>,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeReport {
    pub seed: u64,
    pub config: DetectorConfig,
    pub snapshot_count: usize,
    pub tests: Vec<BoundaryTest>,
    pub change_points: Vec<ChangePoint>,
}

impl ChangeReport {
    pub fn change_indices(&self) -> Vec<usize> {
        self.change_points
            .iter()
            .map(|c| c.boundary_index)
            .collect()
    }

    pub fn flagged_count(&self) -> usize {
        self.tests.iter().filter(|t| t.flagged).count()
    }
}

fn test_boundary(
    snapshots: &[SnapshotGraph],
    boundary: usize,
    w: usize,
    config: &DetectorConfig,
) -> Result<BoundaryTest> {
    let key = [TAG_BOUNDARY, w as u64, boundary as u64];
    let mut base_rng = derived_rng(
        config.rng_seed,
        &[TAG_SUBSAMPLE, w as u64, boundary as u64, 0],
    );
    let mut next_rng = derived_rng(
        config.rng_seed,
        &[TAG_SUBSAMPLE, w as u64, boundary as u64, 1],
    );
    let base = window_cdf(snapshots, boundary - w, w, config, &mut base_rng)?;
    let next = window_cdf(snapshots, boundary, w, config, &mut next_rng)?;
    let skipped = |reason| BoundaryTest {
        boundary_index: boundary,
        window_length: w,
        distance: None,
        p_value: None,
        flagged: false,
        skipped_reason: Some(reason),
    };
    let (base, next) = match (base, next) {
        (WindowOutcome::Sample(a), WindowOutcome::Sample(b)) => (a, b),
        (WindowOutcome::Skipped(SkipReason::EmptyWindow), _)
        | (_, WindowOutcome::Skipped(SkipReason::EmptyWindow)) => {
            return Ok(skipped(SkipReason::EmptyWindow))
        }
        _ => return Ok(skipped(SkipReason::TooFewNodes)),
    };
    let observed = ks_statistic(&base.cdf, &next.cdf)?;
    let sample_size = config
        .bootstrap_sample
        .resolve(base.degrees.len(), next.degrees.len());
    let distances = bootstrap_distances(
        &base.degrees,
        config.bootstrap_replicates,
        sample_size,
        derive_seed(config.rng_seed, &key),
    )?;
    let p = bootstrap_pvalue(observed, &distances)?.p_value;
    Ok(BoundaryTest {
        boundary_index: boundary,
        window_length: w,
        distance: Some(observed.value()),
        p_value: Some(p),
        flagged: p > config.alpha,
        skipped_reason: None,
    })
}

/// Runs every boundary test at every window length and collects the
/// flagged boundaries into change points.
pub fn scan(snapshots: &[SnapshotGraph], config: &DetectorConfig) -> Result<ChangeReport> {
    config.validate()?;
    let shortest = config.window_lengths.iter().copied().min().unwrap_or(1);
    if snapshots.len() < 2 * shortest {
        return Err(Error::TooFewSnapshots {
            got: snapshots.len(),
            need: 2 * shortest,
        });
    }
    let mut scales = config.window_lengths.clone();
    scales.sort_unstable();
    scales.dedup();
    let jobs: Vec<(usize, usize)> = scales
        .iter()
        .flat_map(|&w| {
            let last = snapshots.len().saturating_sub(w);
            (w..=last).map(move |b| (w, b))
        })
        .collect();
    let tests = jobs
        .into_par_iter()
        .map(|(w, b)| test_boundary(snapshots, b, w, config))
        .collect::<Result<Vec<_>>>()?;
    if tests.iter().all(|t| t.skipped_reason.is_some()) {
        return Err(Error::InsufficientData);
    }
    let change_points = merge_flags(&tests, config.largest_window());
    Ok(ChangeReport {
        seed: config.rng_seed,
        config: config.clone(),
        snapshot_count: snapshots.len(),
        tests,
        change_points,
    })
}

/// Picks the entry with the highest p-value, preferring the earlier boundary.
fn strongest<'a, I: Iterator<Item = &'a (usize, f64, usize)>>(items: I) -> (usize, f64) {
    items
        .fold(None::<(usize, f64)>, |best, &(b, p, _)| match best {
            Some((bb, bp)) if bp > p || (bp == p && bb <= b) => Some((bb, bp)),
            _ => Some((b, p)),
        })
        .expect("non-empty group")
}

/// Collapses flagged boundaries into change points.
///
/// At each scale `W`, flags closer than `W` boundaries apart come from the
/// same switch and are reduced to their strongest member. The per-scale
/// representatives are then grouped across scales when they lie closer than
/// the larger of their two window lengths.
pub(crate) fn merge_flags(tests: &[BoundaryTest], largest: usize) -> Vec<ChangePoint> {
    let mut scales: Vec<usize> = tests.iter().map(|t| t.window_length).collect();
    scales.sort_unstable();
    scales.dedup();

    let mut reps: Vec<(usize, f64, usize)> = Vec::new();
    for &w in &scales {
        let mut flagged: Vec<(usize, f64, usize)> = tests
            .iter()
            .filter(|t| t.window_length == w && t.flagged)
            .map(|t| (t.boundary_index, t.p_value.unwrap_or(0.0), w))
            .collect();
        flagged.sort_by_key(|f| f.0);
        let mut cluster: Vec<(usize, f64, usize)> = Vec::new();
        for f in flagged {
            if cluster.last().is_some_and(|last| f.0 - last.0 >= w) {
                let (b, p) = strongest(cluster.iter());
                reps.push((b, p, w));
                cluster.clear();
            }
            cluster.push(f);
        }
        if !cluster.is_empty() {
            let (b, p) = strongest(cluster.iter());
            reps.push((b, p, w));
        }
    }
    reps.sort_by_key(|r| (r.0, r.2));

    let mut out = Vec::new();
    let mut group: Vec<(usize, f64, usize)> = Vec::new();
    let flush = |group: &mut Vec<(usize, f64, usize)>, out: &mut Vec<ChangePoint>| {
        if group.is_empty() {
            return;
        }
        let (b, p) = strongest(group.iter());
        let mut ws: Vec<usize> = group.iter().map(|g| g.2).collect();
        ws.sort_unstable();
        ws.dedup();
        let classification = if ws.contains(&largest) {
            Classification::ChangePoint
        } else {
            Classification::Anomaly
        };
        out.push(ChangePoint {
            boundary_index: b,
            p_value: p,
            scales: ws,
            classification,
        });
        group.clear();
    };
    for r in reps {
        if let Some(last) = group.last() {
            if r.0 - last.0 >= last.2.max(r.2) {
                flush(&mut group, &mut out);
            }
        }
        group.push(r);
    }
    flush(&mut group, &mut out);
    out
}
