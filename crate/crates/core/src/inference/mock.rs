use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LeapError, Result};
use crate::inference::{Backend, Prediction, RawOutput, Tensor, NONE_CLASS, QUADRANT_CLASSES};
use crate::video::Frame;

/// Sleeps for `ms` milliseconds to stand in for real work.
pub fn simulate_work(ms: f64) {
    if ms > 0.0 {
        thread::sleep(Duration::from_secs_f64(ms / 1000.0));
    }
}

/// Stage durations and canned output for [`MockBackend`].
#[derive(Debug, Clone, PartialEq)]
pub struct MockConfig {
    pub preprocess_ms: f64,
    pub infer_ms: f64,
    pub postprocess_ms: f64,
    pub emit: Prediction,
    /// Uniform extra delay in `[0, jitter_ms)` added to each step.
    pub jitter_ms: f64,
    pub seed: u64,
}

impl Default for MockConfig {
    fn default() -> Self {
        MockConfig {
            preprocess_ms: 0.0,
            infer_ms: 0.0,
            postprocess_ms: 0.0,
            emit: Prediction::one_hot(QUADRANT_CLASSES + 1, NONE_CLASS),
            jitter_ms: 0.0,
            seed: 0,
        }
    }
}

impl MockConfig {
    pub fn timed(preprocess_ms: f64, infer_ms: f64, postprocess_ms: f64) -> Self {
        MockConfig {
            preprocess_ms,
            infer_ms,
            postprocess_ms,
            ..Default::default()
        }
    }

    /// Emits a one-hot score vector for `class` over the five quadrant classes.
    pub fn with_emit_class(mut self, class: usize) -> Self {
        self.emit = Prediction::one_hot(QUADRANT_CLASSES + 1, class);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("preprocess_ms", self.preprocess_ms),
            ("infer_ms", self.infer_ms),
            ("postprocess_ms", self.postprocess_ms),
            ("jitter_ms", self.jitter_ms),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(LeapError::Configuration(format!("{name} must be a non-negative duration, got {v}")));
            }
        }
        Ok(())
    }
}

/// Backend that only spends time. Infer calls are serialized, modeling a
/// single accelerator shared by every worker.
#[derive(Debug)]
pub struct MockBackend {
    cfg: MockConfig,
    accelerator: Mutex<()>,
    jitter: Mutex<ChaCha8Rng>,
}

impl MockBackend {
    pub fn new(cfg: MockConfig) -> Result<Self> {
        cfg.validate()?;
        let jitter = Mutex::new(ChaCha8Rng::seed_from_u64(cfg.seed));
        Ok(MockBackend {
            cfg,
            accelerator: Mutex::new(()),
            jitter,
        })
    }

    pub fn config(&self) -> &MockConfig {
        &self.cfg
    }

    fn spend(&self, ms: f64) {
        let extra = if self.cfg.jitter_ms > 0.0 {
            let mut rng = self.jitter.lock().unwrap_or_else(|e| e.into_inner());
            rng.random_range(0.0..self.cfg.jitter_ms)
        } else {
            0.0
        };
        simulate_work(ms + extra);
    }
}

impl Backend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn input_size(&self) -> Option<(u32, u32)> {
        None
    }

    fn preprocess(&self, frame: &Frame) -> Result<Tensor> {
        self.spend(self.cfg.preprocess_ms);
        Ok(Tensor::luma_plane(frame))
    }

    fn infer(&self, _input: &Tensor) -> Result<RawOutput> {
        let _busy = self.accelerator.lock().unwrap_or_else(|e| e.into_inner());
        self.spend(self.cfg.infer_ms);
        Ok(RawOutput::Decoded(self.cfg.emit.clone()))
    }

    fn postprocess(&self, raw: RawOutput) -> Result<Prediction> {
        self.spend(self.cfg.postprocess_ms);
        match raw {
            RawOutput::Decoded(p) => Ok(p),
            RawOutput::Tensor(_) => Ok(self.cfg.emit.clone()),
        }
    }
}
