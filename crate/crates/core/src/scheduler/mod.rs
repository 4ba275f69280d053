//! Inference scheduling: asynchronous, synchronous and pipelined execution
//! with per-stage latency records.

mod grouping;
mod io;
mod run;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LeapError, Result};
use crate::inference::Prediction;

pub use grouping::{predict_times, predict_times_grouped, Rate, Stage, StageGrouping, ThroughputPrediction};
pub use io::{CollectSink, DirSink, DirSource, FrameSink, FrameSource, SyntheticSource};
pub use run::{run, run_async, run_pipelined, run_sync, RunOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Async,
    Sync,
    Pipelined,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Async => "async",
            Mode::Sync => "sync",
            Mode::Pipelined => "pipelined",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = LeapError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "async" => Ok(Mode::Async),
            "sync" => Ok(Mode::Sync),
            "pipelined" => Ok(Mode::Pipelined),
            other => Err(LeapError::Configuration(format!("unknown mode `{other}`"))),
        }
    }
}

/// Milliseconds spent in each of the six stages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub read_ms: f64,
    pub preprocess_ms: f64,
    pub infer_ms: f64,
    pub postprocess_ms: f64,
    pub overlay_ms: f64,
    pub write_ms: f64,
}

impl StageTimes {
    pub fn new(read: f64, preprocess: f64, infer: f64, postprocess: f64, overlay: f64, write: f64) -> Self {
        StageTimes {
            read_ms: read,
            preprocess_ms: preprocess,
            infer_ms: infer,
            postprocess_ms: postprocess,
            overlay_ms: overlay,
            write_ms: write,
        }
    }

    pub fn get(&self, stage: Stage) -> f64 {
        match stage {
            Stage::Read => self.read_ms,
            Stage::Preprocess => self.preprocess_ms,
            Stage::Infer => self.infer_ms,
            Stage::Postprocess => self.postprocess_ms,
            Stage::Overlay => self.overlay_ms,
            Stage::Write => self.write_ms,
        }
    }

    pub fn set(&mut self, stage: Stage, ms: f64) {
        let slot = match stage {
            Stage::Read => &mut self.read_ms,
            Stage::Preprocess => &mut self.preprocess_ms,
            Stage::Infer => &mut self.infer_ms,
            Stage::Postprocess => &mut self.postprocess_ms,
            Stage::Overlay => &mut self.overlay_ms,
            Stage::Write => &mut self.write_ms,
        };
        *slot = ms;
    }

    pub fn to_array(&self) -> [f64; 6] {
        Stage::ALL.map(|s| self.get(s))
    }

    pub fn sum(&self) -> f64 {
        self.to_array().iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.to_array().into_iter().fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        for s in Stage::ALL {
            let v = self.get(s);
            if !(v >= 0.0 && v.is_finite()) {
                return Err(LeapError::Range(format!("{} time {v} must be a non-negative number", s.as_str())));
            }
        }
        Ok(())
    }
}

/// Bounded channels between pipelined workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueSpec {
    pub depth: usize,
    pub count: usize,
}

impl Default for QueueSpec {
    fn default() -> Self {
        QueueSpec { depth: 4, count: 3 }
    }
}

impl QueueSpec {
    /// Three queues of `depth` items.
    pub fn new(depth: usize) -> Result<Self> {
        Self::for_grouping(depth, &StageGrouping::default())
    }

    /// One queue between each pair of adjacent worker groups.
    pub fn for_grouping(depth: usize, grouping: &StageGrouping) -> Result<Self> {
        if depth == 0 {
            return Err(LeapError::Configuration("queue depth must be at least 1".into()));
        }
        Ok(QueueSpec {
            depth,
            count: grouping.len() - 1,
        })
    }

    /// Most frames that can be alive between source and sink: one per
    /// worker plus a full queue between each pair.
    pub fn in_flight_bound(&self) -> usize {
        (self.count + 1) + self.count * self.depth
    }
}

/// Timing of one frame through the video path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_index: u64,
    pub stages: StageTimes,
    /// Read start to write end, queue waits included.
    pub total_ms: f64,
    pub start_ms: f64,
    pub end_ms: f64,
    pub mode: Mode,
}

/// One asynchronous inference on a sampled frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceRecord {
    pub frame_index: u64,
    pub preprocess_ms: f64,
    pub infer_ms: f64,
    pub postprocess_ms: f64,
    pub start_ms: f64,
    pub end_ms: f64,
    pub prediction: Prediction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    /// Frames delivered to the sink.
    pub frames: u64,
    pub elapsed_ms: f64,
    pub fps: f64,
    /// `elapsed_ms / frames`.
    pub mean_period_ms: f64,
    pub mean_total_ms: f64,
    /// Frames never sampled by inference; always 0 outside async mode.
    pub dropped_frames: u64,
    pub stage_means_ms: StageTimes,
    pub stage_medians_ms: StageTimes,
    pub groups: Option<String>,
    pub queue: Option<QueueSpec>,
    pub max_in_flight: Option<usize>,
    pub records: Vec<FrameRecord>,
    pub inferences: Vec<InferenceRecord>,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) / 2.0
    }
}

impl RunReport {
    pub(crate) fn build(
        mode: Mode,
        elapsed_ms: f64,
        records: Vec<FrameRecord>,
        inferences: Vec<InferenceRecord>,
    ) -> Self {
        let frames = records.len() as u64;
        let mut means = StageTimes::default();
        let mut medians = StageTimes::default();
        for s in Stage::ALL {
            // async inference stages are timed on the sampled frames only
            let samples: Vec<f64> = match (mode, s) {
                (Mode::Async, Stage::Preprocess) => inferences.iter().map(|r| r.preprocess_ms).collect(),
                (Mode::Async, Stage::Infer) => inferences.iter().map(|r| r.infer_ms).collect(),
                (Mode::Async, Stage::Postprocess) => inferences.iter().map(|r| r.postprocess_ms).collect(),
                _ => records.iter().map(|r| r.stages.get(s)).collect(),
            };
            means.set(s, mean(&samples));
            medians.set(s, median(&samples));
        }
        let totals: Vec<f64> = records.iter().map(|r| r.total_ms).collect();
        let dropped_frames = if mode == Mode::Async {
            let mut sampled: Vec<u64> = inferences.iter().map(|r| r.frame_index).collect();
            sampled.sort_unstable();
            sampled.dedup();
            frames.saturating_sub(sampled.len() as u64)
        } else {
            0
        };
        let (fps, mean_period_ms) = if frames > 0 && elapsed_ms > 0.0 {
            (frames as f64 * 1000.0 / elapsed_ms, elapsed_ms / frames as f64)
        } else {
            (0.0, 0.0)
        };
        RunReport {
            mode,
            frames,
            elapsed_ms,
            fps,
            mean_period_ms,
            mean_total_ms: mean(&totals),
            dropped_frames,
            stage_means_ms: means,
            stage_medians_ms: medians,
            groups: None,
            queue: None,
            max_in_flight: None,
            records,
            inferences,
        }
    }

    pub fn frame_indices(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.frame_index).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
