use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{LeapError, Result};
use crate::scheduler::StageTimes;

/// The six per-frame steps, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Read,
    Preprocess,
    Infer,
    Postprocess,
    Overlay,
    Write,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Read,
        Stage::Preprocess,
        Stage::Infer,
        Stage::Postprocess,
        Stage::Overlay,
        Stage::Write,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Read => "read",
            Stage::Preprocess => "preprocess",
            Stage::Infer => "infer",
            Stage::Postprocess => "postprocess",
            Stage::Overlay => "overlay",
            Stage::Write => "write",
        }
    }
}

impl FromStr for Stage {
    type Err = LeapError;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s.trim())
            .ok_or_else(|| LeapError::Configuration(format!("unknown stage `{s}`")))
    }
}

/// Partition of the six stages into consecutive worker groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageGrouping {
    groups: Vec<Vec<Stage>>,
}

impl Default for StageGrouping {
    /// read+preprocess | infer | postprocess+overlay | write
    fn default() -> Self {
        StageGrouping {
            groups: vec![
                vec![Stage::Read, Stage::Preprocess],
                vec![Stage::Infer],
                vec![Stage::Postprocess, Stage::Overlay],
                vec![Stage::Write],
            ],
        }
    }
}

impl StageGrouping {
    /// Groups must be non-empty and, concatenated, list every stage once in order.
    pub fn new(groups: Vec<Vec<Stage>>) -> Result<Self> {
        if groups.iter().any(Vec::is_empty) {
            return Err(LeapError::Configuration("empty stage group".into()));
        }
        let flat: Vec<Stage> = groups.iter().flatten().copied().collect();
        if flat != Stage::ALL {
            return Err(LeapError::Configuration(format!(
                "groups must cover read..write in order, got {flat:?}"
            )));
        }
        Ok(StageGrouping { groups })
    }

    /// Everything in one group, as run by the synchronous scheduler.
    pub fn single() -> Self {
        StageGrouping {
            groups: vec![Stage::ALL.to_vec()],
        }
    }

    pub fn groups(&self) -> &[Vec<Stage>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Per-group time, the sum of its stages.
    pub fn group_times(&self, t: &StageTimes) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|&s| t.get(s)).sum())
            .collect()
    }
}

impl fmt::Display for StageGrouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|g| g.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("+"))
            .collect();
        f.write_str(&parts.join("|"))
    }
}

impl FromStr for StageGrouping {
    type Err = LeapError;

    /// Parses `read+preprocess|infer|postprocess+overlay|write`.
    fn from_str(s: &str) -> Result<Self> {
        let groups = s
            .split('|')
            .map(|g| g.split('+').map(str::parse).collect::<Result<Vec<Stage>>>())
            .collect::<Result<Vec<_>>>()?;
        StageGrouping::new(groups)
    }
}

impl Serialize for StageGrouping {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A frame rate that may be unbounded (zero frame time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Fps(f64),
    Unbounded,
}

impl Rate {
    pub fn from_period_ms(ms: f64) -> Self {
        if ms > 0.0 {
            Rate::Fps(1000.0 / ms)
        } else {
            Rate::Unbounded
        }
    }

    pub fn fps(self) -> Option<f64> {
        match self {
            Rate::Fps(v) => Some(v),
            Rate::Unbounded => None,
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Fps(v) => write!(f, "{v}"),
            Rate::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rate::Fps(v) => s.serialize_f64(*v),
            Rate::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

/// Analytic frame-time prediction for synchronous and pipelined execution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputPrediction {
    pub si_ms: f64,
    pub psi_lower_bound_ms: f64,
    pub si_fps: Rate,
    pub psi_max_fps: Rate,
}

/// Synchronous frame time is the sum of all stages; pipelined frame time
/// cannot beat the slowest worker group.
pub fn predict_times_grouped(t: &StageTimes, grouping: &StageGrouping) -> ThroughputPrediction {
    let si_ms = t.sum();
    let psi_lower_bound_ms = grouping.group_times(t).into_iter().fold(0.0, f64::max);
    ThroughputPrediction {
        si_ms,
        psi_lower_bound_ms,
        si_fps: Rate::from_period_ms(si_ms),
        psi_max_fps: Rate::from_period_ms(psi_lower_bound_ms),
    }
}

pub fn predict_times(t: &StageTimes) -> ThroughputPrediction {
    predict_times_grouped(t, &StageGrouping::default())
}
