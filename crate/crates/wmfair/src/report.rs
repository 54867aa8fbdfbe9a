//! Machine-readable run reports. Everything is ordered deterministically
//! so that identical runs produce byte-identical JSON.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub tool: String,
    pub command: String,
    pub inputs: Vec<Input>,
    pub model: String,
    /// Every option in effect, defaults included, so the run can be
    /// repeated.
    pub flags: BTreeMap<String, serde_json::Value>,
    /// Configurations stored by the final exploration.
    pub states: usize,
    pub result: Body,
    /// Only present with `--timing`; left out by default so that reports
    /// stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Input {
    pub path: String,
    pub sha256: String,
}

impl Input {
    /// Reads a file and records its digest.
    pub fn read(path: &Path) -> std::io::Result<(Input, String)> {
        let bytes = std::fs::read(path)?;
        let sha256 = hex::encode(Sha256::digest(&bytes));
        let text = String::from_utf8(bytes).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        Ok((Input { path: path.display().to_string(), sha256 }, text))
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Body {
    Litmus(LitmusResult),
    Verdict(Box<VerdictReport>),
    Samples(SampleSummary),
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LitmusResult {
    pub bound: usize,
    pub reduced: bool,
    pub truncated: bool,
    /// Final control states; listed only when the file states no
    /// expectation.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub finals: Vec<String>,
    pub expectations: Vec<ExpectationRow>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpectationRow {
    pub expect: String,
    pub predicate: String,
    pub reachable: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerdictReport {
    pub model: String,
    pub spec: String,
    pub bound: usize,
    pub saturation: Saturation,
    pub bscc_sets: Vec<Vec<String>>,
    pub accepted: bool,
    /// Bottom components without a cycle inside the bound.
    pub dead_ends: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<BracketReport>,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Saturation {
    /// `heuristic` when the bound was found by a stable window, `exact`
    /// when it was given.
    pub mode: String,
    pub start: usize,
    pub window: usize,
    pub history: Vec<BoundRow>,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub bound: usize,
    pub states: usize,
    pub vertices: usize,
    pub edges: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BracketReport {
    pub lo: f64,
    pub hi: f64,
    pub eps: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Witness {
    pub states: Vec<String>,
    /// Control state where the cycle starts.
    pub entry: String,
    pub stem: Vec<String>,
    pub cycle: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleSummary {
    pub bound: usize,
    pub steps: usize,
    pub runs: Vec<RunRow>,
    pub accepted: usize,
    pub rejected: usize,
    /// Runs stuck at the bound, which are not judged.
    pub inconclusive: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRow {
    pub seed: u64,
    pub steps: usize,
    pub plain_hits: usize,
    pub max_size: usize,
    pub deadlocked: bool,
    pub stuck: bool,
    pub tail: Vec<String>,
    pub accepted: Option<bool>,
    pub final_control: String,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
