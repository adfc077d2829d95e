//! Synthetic snapshot streams with planted model switches.

use std::collections::HashSet;
use std::path::Path;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, SnapshotGraph};
use crate::seed::{derived_rng, Rng, TAG_SCHEDULE, TAG_SNAPSHOT};

/// Rewiring attempts per edge before the original edge is kept.
const MAX_REWIRE_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelConfig {
    ErdosRenyi {
        n: usize,
        er_p: f64,
    },
    Caveman {
        n: usize,
        communities: usize,
        rewire_p: f64,
    },
}

impl ModelConfig {
    pub fn node_count(&self) -> usize {
        match *self {
            ModelConfig::ErdosRenyi { n, .. } | ModelConfig::Caveman { n, .. } => n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match *self {
            ModelConfig::ErdosRenyi { n, er_p } => {
                if n == 0 {
                    return bad("ER node count must be >= 1".into());
                }
                if !(0.0..=1.0).contains(&er_p) {
                    return bad(format!("er_p {er_p} outside [0, 1]"));
                }
            }
            ModelConfig::Caveman {
                n,
                communities,
                rewire_p,
            } => {
                if communities == 0 || n < communities {
                    return bad(format!(
                        "caveman needs n >= communities >= 1, got n={n}, c={communities}"
                    ));
                }
                if !(0.0..=1.0).contains(&rewire_p) {
                    return bad(format!("rewire_p {rewire_p} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }

    /// The same model at a different node count.
    ///
    /// With [`SizeScaling::PreserveDegreeScale`] an ER model keeps its mean
    /// degree `(n-1)p` and a caveman model keeps its community size, with `n`
    /// rounded to the nearest whole number of communities. Otherwise only `n`
    /// changes.
    pub fn resized(&self, n: usize, scaling: SizeScaling) -> ModelConfig {
        match (*self, scaling) {
            (ModelConfig::ErdosRenyi { er_p, .. }, SizeScaling::FixedParameters) => {
                ModelConfig::ErdosRenyi { n, er_p }
            }
            (ModelConfig::ErdosRenyi { n: base, er_p }, SizeScaling::PreserveDegreeScale) => {
                let er_p = if n > 1 {
                    (er_p * (base.max(1) - 1) as f64 / (n - 1) as f64).min(1.0)
                } else {
                    er_p
                };
                ModelConfig::ErdosRenyi { n, er_p }
            }
            (
                ModelConfig::Caveman {
                    rewire_p,
                    communities,
                    ..
                },
                SizeScaling::FixedParameters,
            ) => ModelConfig::Caveman {
                n,
                communities,
                rewire_p,
            },
            (
                ModelConfig::Caveman {
                    n: base,
                    communities,
                    rewire_p,
                },
                SizeScaling::PreserveDegreeScale,
            ) => {
                let size = (base / communities).max(1);
                let communities = ((n as f64 / size as f64).round() as usize).max(1);
                ModelConfig::Caveman {
                    n: communities * size,
                    communities,
                    rewire_p,
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> SnapshotGraph {
        match *self {
            ModelConfig::ErdosRenyi { n, er_p } => generate_er(n, er_p, rng),
            ModelConfig::Caveman {
                n,
                communities,
                rewire_p,
            } => generate_caveman(n, communities, rewire_p, rng),
        }
    }
}

/// G(n, p): every unordered pair joined independently with probability `p`.
pub fn generate_er(n: usize, p: f64, rng: &mut Rng) -> SnapshotGraph {
    let mut g = SnapshotGraph::with_nodes(0, n);
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if rng.random::<f64>() < p {
                g.add_edge(NodeId(a), NodeId(b));
            }
        }
    }
    g
}

/// Relaxed caveman graph.
///
/// Starts from `c` disjoint cliques (the last one absorbs `n mod c` extra
/// nodes). Each clique edge `(u, v)` is then, with probability `rewire_p`,
/// moved to `(u, x)` for a uniformly drawn `x != u`. Draws that would
/// duplicate an existing edge are retried a bounded number of times, after
/// which the original edge is kept, so the edge count never changes.
pub fn generate_caveman(n: usize, c: usize, rewire_p: f64, rng: &mut Rng) -> SnapshotGraph {
    let mut adjacency: Vec<HashSet<u32>> = vec![HashSet::new(); n];
    let mut clique_edges = Vec::new();
    let size = n / c.max(1);
    for k in 0..c {
        let start = k * size;
        let end = if k + 1 == c { n } else { start + size };
        for a in start as u32..end as u32 {
            for b in a + 1..end as u32 {
                adjacency[a as usize].insert(b);
                adjacency[b as usize].insert(a);
                clique_edges.push((a, b));
            }
        }
    }
    if n > 1 {
        for (u, v) in clique_edges {
            if rng.random::<f64>() >= rewire_p {
                continue;
            }
            for _ in 0..MAX_REWIRE_ATTEMPTS {
                // Uniform over all nodes except u.
                let mut x = rng.random_range(0..n as u32 - 1);
                if x >= u {
                    x += 1;
                }
                if adjacency[u as usize].contains(&x) {
                    continue;
                }
                adjacency[u as usize].remove(&v);
                adjacency[v as usize].remove(&u);
                adjacency[u as usize].insert(x);
                adjacency[x as usize].insert(u);
                break;
            }
        }
    }
    let mut g = SnapshotGraph::with_nodes(0, n);
    for (a, nbrs) in adjacency.iter().enumerate() {
        for &b in nbrs {
            if (a as u32) < b {
                g.add_edge(NodeId(a as u32), NodeId(b));
            }
        }
    }
    g
}

/// How a model adapts when a snapshot's node count is drawn from a range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SizeScaling {
    /// Keep the degree distribution's scale: ER mean degree, caveman
    /// community size.
    #[default]
    PreserveDegreeScale,
    /// Keep `er_p` / `communities` and change only `n`.
    FixedParameters,
}

/// Planted-switch scenario: the model alternates between `config_a` and
/// `config_b`, holding each for a Normal-distributed number of snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub config_a: ModelConfig,
    pub config_b: ModelConfig,
    pub num_changes: usize,
    #[serde(default = "default_run_mean")]
    pub run_length_mean: f64,
    #[serde(default = "default_run_var")]
    pub run_length_var: f64,
    /// Inclusive node-count range; when set, every snapshot draws its own
    /// size uniformly from it.
    #[serde(default)]
    pub size_range: Option<(usize, usize)>,
    #[serde(default)]
    pub size_scaling: SizeScaling,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_run_mean() -> f64 {
    4.0
}

fn default_run_var() -> f64 {
    2.0
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        self.config_a.validate()?;
        self.config_b.validate()?;
        if self.num_changes == 0 {
            return Err(Error::InvalidParameter("num_changes must be >= 1".into()));
        }
        if !(self.run_length_mean > 0.0 && self.run_length_mean.is_finite()) {
            return Err(Error::InvalidParameter(
                "run_length_mean must be > 0".into(),
            ));
        }
        if !(self.run_length_var >= 0.0 && self.run_length_var.is_finite()) {
            return Err(Error::InvalidParameter(
                "run_length_var must be >= 0".into(),
            ));
        }
        if let Some((lo, hi)) = self.size_range {
            if lo == 0 || lo > hi {
                return Err(Error::InvalidParameter(format!(
                    "bad size range [{lo}, {hi}]"
                )));
            }
            for cfg in [self.config_a, self.config_b] {
                if let ModelConfig::Caveman { communities, .. } = cfg {
                    if lo < communities {
                        return Err(Error::InvalidParameter(format!(
                            "size range lower bound {lo} below community count {communities}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: Self = toml::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Lengths of the `num_changes + 1` runs.
    pub fn run_lengths(&self) -> Vec<usize> {
        let mut rng = derived_rng(self.rng_seed, &[TAG_SCHEDULE]);
        let normal = (self.run_length_var > 0.0).then(|| {
            Normal::new(self.run_length_mean, self.run_length_var.sqrt()).expect("validated")
        });
        (0..=self.num_changes)
            .map(|_| {
                let x = normal.map_or(self.run_length_mean, |d| d.sample(&mut rng));
                x.round().max(1.0) as usize
            })
            .collect()
    }
}

/// Snapshot ordinals where the active configuration switches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub change_indices: Vec<usize>,
}

impl GroundTruth {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Generates the snapshot stream and its switch schedule.
///
/// Snapshot `i` draws from its own derived stream, so generation order does
/// not affect the output.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<(Vec<SnapshotGraph>, GroundTruth)> {
    spec.validate()?;
    let runs = spec.run_lengths();
    let mut plan = Vec::new();
    let mut change_indices = Vec::with_capacity(spec.num_changes);
    for (r, &len) in runs.iter().enumerate() {
        if r > 0 {
            change_indices.push(plan.len());
        }
        let cfg = if r % 2 == 0 {
            spec.config_a
        } else {
            spec.config_b
        };
        plan.extend(std::iter::repeat_n(cfg, len));
    }
    let snapshots = plan
        .into_par_iter()
        .enumerate()
        .map(|(i, cfg)| {
            let mut rng = derived_rng(spec.rng_seed, &[TAG_SNAPSHOT, i as u64]);
            let cfg = match spec.size_range {
                Some((lo, hi)) => cfg.resized(rng.random_range(lo..=hi), spec.size_scaling),
                None => cfg,
            };
            let mut g = cfg.sample(&mut rng);
            g.index = i;
            g
        })
        .collect();
    Ok((snapshots, GroundTruth { change_indices }))
}
