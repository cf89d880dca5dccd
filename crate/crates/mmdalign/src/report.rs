//! JSON report schema (version 1).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub kind: String,
    /// Effective configuration, defaults merged with flags.
    pub config: Value,
    pub scenarios: Vec<ScenarioResult>,
    pub tasks: Vec<TaskResult>,
    pub seeds: BTreeMap<String, u64>,
    /// Wall-clock time; only recorded when timing is requested.
    pub runtime_ms: Option<u64>,
    #[serde(default)]
    pub extras: BTreeMap<String, Value>,
}

impl ExperimentReport {
    pub fn new(kind: &str, config: Value) -> Self {
        ExperimentReport {
            schema: SCHEMA_VERSION,
            kind: kind.into(),
            config,
            scenarios: Vec::new(),
            tasks: Vec::new(),
            seeds: BTreeMap::new(),
            runtime_ms: None,
            extras: BTreeMap::new(),
        }
    }

    pub fn scenario(&self, name: &str) -> Option<&ScenarioResult> {
        self.scenarios.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    /// Target-domain accuracy; absent when the target has no labels.
    pub accuracy: Option<f64>,
    pub mmd_before: Option<f64>,
    pub mmd_after: Option<f64>,
    pub selected_restart: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub restarts: Vec<RestartSummary>,
}

impl ScenarioResult {
    pub fn accuracy_only(name: &str, accuracy: f64) -> Self {
        ScenarioResult {
            name: name.into(),
            accuracy: Some(accuracy),
            mmd_before: None,
            mmd_after: None,
            selected_restart: None,
            restarts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    /// `None` for the identity start.
    pub seed: Option<u64>,
    pub mmd_before: Option<f64>,
    pub mmd_after: Option<f64>,
    pub iterations: Option<usize>,
    pub stop: Option<String>,
    /// Error on the labeled target subset (semi-supervised runs only).
    pub labeled_error: Option<f64>,
    /// Accuracy on the full labeled target.
    pub target_accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Ok,
    Skipped,
    Failed,
}

/// One binary task of the embedding experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub classes: [i64; 2],
    pub status: TaskStatus,
    pub reason: Option<String>,
    pub seed: u64,
    pub n_source: usize,
    pub n_target: usize,
    pub n_labeled: usize,
    pub p: Option<usize>,
    pub baseline: Option<f64>,
    pub unsupervised: Option<f64>,
    pub semisupervised: Option<f64>,
    pub delta_unsupervised: Option<f64>,
    pub delta_semisupervised: Option<f64>,
    pub mmd_before: Option<f64>,
    pub mmd_after: Option<f64>,
    pub selected_unsupervised: Option<usize>,
    pub selected_semisupervised: Option<usize>,
}

impl TaskResult {
    pub fn empty(classes: [i64; 2], seed: u64, status: TaskStatus, reason: Option<String>) -> Self {
        TaskResult {
            classes,
            status,
            reason,
            seed,
            n_source: 0,
            n_target: 0,
            n_labeled: 0,
            p: None,
            baseline: None,
            unsupervised: None,
            semisupervised: None,
            delta_unsupervised: None,
            delta_semisupervised: None,
            mmd_before: None,
            mmd_after: None,
            selected_unsupervised: None,
            selected_semisupervised: None,
        }
    }
}
