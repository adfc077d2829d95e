//! Change point detection for evolving networks from degree distributions.
//!
//! The pipeline turns timestamped interactions (or synthetic model draws)
//! into a sequence of snapshot graphs, compares the degree CDFs of adjacent
//! windows with a two-sample KS distance, and decides whether the distance is
//! unusual with a bootstrap built from the earlier window. Only degrees are
//! used, so the method needs neither node identities nor the network size.
//!
//! ```
//! use cpdnet_core::{scan, generate_scenario, presets};
//!
//! let mut preset = presets::preset("minimal").unwrap();
//! preset.scenario.rng_seed = 1;
//! preset.detector.bootstrap_replicates = 200;
//! let (snapshots, truth) = generate_scenario(&preset.scenario).unwrap();
//! let report = scan(&snapshots, &preset.detector).unwrap();
//! assert_eq!(report.change_indices(), truth.change_indices);
//! ```

pub mod detector;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ingest;
pub mod presets;
pub mod report;
pub mod seed;
pub mod stats;
pub mod synthgen;

pub use detector::{
    scan, window_cdf, BootstrapSampleSize, BoundaryTest, ChangePoint, ChangeReport, Classification,
    DetectorConfig, SkipReason, WindowOutcome,
};
pub use error::{Error, Result};
pub use eval::{match_detections, run_experiment, EvalResult, ExperimentSummary, Ratio};
pub use graph::{
    degree_sequence, empirical_cdf, DegreeSequence, EmpiricalCdf, NodeId, SnapshotGraph,
    TemporalEdge, WindowGraph,
};
pub use ingest::{bucket_snapshots, parse_edges, IngestConfig, SnapshotSequence};
pub use stats::{bootstrap_distances, bootstrap_pvalue, ks_statistic, BootstrapResult, KsDistance};
pub use synthgen::{
    generate_caveman, generate_er, generate_scenario, GroundTruth, ModelConfig, ScenarioSpec,
    SizeScaling,
};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
