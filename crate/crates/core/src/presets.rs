//! Named synthetic experiments.
//!
//! Each preset pairs a scenario with the detector settings it is scored
//! under. Seeds are left at zero; callers substitute their own.

use serde::{Deserialize, Serialize};

use crate::detector::DetectorConfig;
use crate::synthgen::{ModelConfig, ScenarioSpec, SizeScaling};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub scenario: ScenarioSpec,
    pub detector: DetectorConfig,
}

pub const PRESET_NAMES: [&str; 5] = ["exp1", "exp2", "exp3", "exp3-varying", "minimal"];

fn er(n: usize, p: f64) -> ModelConfig {
    ModelConfig::ErdosRenyi { n, er_p: p }
}

fn caveman(rewire_p: f64) -> ModelConfig {
    ModelConfig::Caveman {
        n: 200,
        communities: 5,
        rewire_p,
    }
}

fn scenario(a: ModelConfig, b: ModelConfig) -> ScenarioSpec {
    ScenarioSpec {
        config_a: a,
        config_b: b,
        num_changes: 100,
        run_length_mean: 4.0,
        run_length_var: 2.0,
        size_range: None,
        size_scaling: SizeScaling::default(),
        rng_seed: 0,
    }
}

pub fn preset(name: &str) -> Option<Preset> {
    let detector = DetectorConfig::default();
    let (description, scenario, detector) = match name {
        "exp1" => (
            "ER n=200, p alternating 0.003 (fragmented) / 0.009 (connected)",
            scenario(er(200, 0.003), er(200, 0.009)),
            detector,
        ),
        "exp2" => (
            "ER n=200, p alternating 0.1 / 0.15 (both connected)",
            scenario(er(200, 0.1), er(200, 0.15)),
            detector,
        ),
        "exp3" => (
            "Caveman n=200, 5 communities, rewiring alternating 0.4 / 0.7",
            scenario(caveman(0.4), caveman(0.7)),
            detector,
        ),
        "exp3-varying" => (
            "Caveman as exp3 with n ~ U(200, 1000) per snapshot, 200-node subsample",
            ScenarioSpec {
                size_range: Some((200, 1000)),
                ..scenario(caveman(0.4), caveman(0.7))
            },
            DetectorConfig {
                subsample_nodes: Some(crate::detector::DEFAULT_SUBSAMPLE),
                ..detector
            },
        ),
        "minimal" => (
            "One switch between two ER configurations, one snapshot each",
            ScenarioSpec {
                num_changes: 1,
                run_length_mean: 1.0,
                run_length_var: 0.0,
                ..scenario(er(200, 0.003), er(200, 0.05))
            },
            detector,
        ),
        _ => return None,
    };
    Some(Preset {
        name: name.to_string(),
        description: description.to_string(),
        scenario,
        detector,
    })
}
