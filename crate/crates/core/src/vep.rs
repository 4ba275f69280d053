//! The video enhancement pipeline: a daisy chain of frame-level stages
//! between an input and an output frame ring.

use crate::error::{LeapError, Result};
use crate::histeq::{pack_gpio, HistEqConfig, HistEqState};
use crate::video::{Frame, FrameRing};

/// One enhancement core in the chain.
pub trait EnhancementStage: Send {
    fn name(&self) -> &str;

    /// Processes one frame; the output has the input's dimensions.
    fn process(&mut self, frame: &Frame) -> Result<Frame>;

    /// Applies new dimensions following the core's reconfiguration protocol.
    fn reconfigure(&mut self, rows: u32, cols: u32) -> Result<()>;

    /// Currently configured `(rows, cols)`, if the stage tracks dimensions.
    fn dimensions(&self) -> Option<(u32, u32)>;
}

/// Pass-through stage.
#[derive(Debug, Default, Clone)]
pub struct IdentityStage {
    dims: Option<(u32, u32)>,
}

impl EnhancementStage for IdentityStage {
    fn name(&self) -> &str {
        "identity"
    }

    fn process(&mut self, frame: &Frame) -> Result<Frame> {
        Ok(frame.clone())
    }

    fn reconfigure(&mut self, rows: u32, cols: u32) -> Result<()> {
        self.dims = Some((rows, cols));
        Ok(())
    }

    fn dimensions(&self) -> Option<(u32, u32)> {
        self.dims
    }
}

/// Histogram equalization core driven through its GPIO word.
#[derive(Debug, Clone)]
pub struct HistEqStage {
    state: HistEqState,
}

impl HistEqStage {
    pub fn new(config: HistEqConfig) -> Result<Self> {
        Ok(HistEqStage {
            state: HistEqState::new(config)?,
        })
    }

    pub fn state(&self) -> &HistEqState {
        &self.state
    }
}

impl EnhancementStage for HistEqStage {
    fn name(&self) -> &str {
        "histeq"
    }

    fn process(&mut self, frame: &Frame) -> Result<Frame> {
        let (rows, cols) = self.state.dimensions();
        if frame.dimensions() != (cols, rows) {
            return Err(LeapError::Configuration(format!(
                "histeq configured for {cols}x{rows}, got {}x{}",
                frame.width(),
                frame.height()
            )));
        }
        self.state
            .push_frame(frame)?
            .ok_or_else(|| LeapError::Framing("core emitted no frame".into()))
    }

    fn reconfigure(&mut self, rows: u32, cols: u32) -> Result<()> {
        self.state.configure(pack_gpio(rows, cols, true)?)?;
        self.state.configure(pack_gpio(rows, cols, false)?)
    }

    fn dimensions(&self) -> Option<(u32, u32)> {
        Some(self.state.dimensions())
    }
}

/// Ordered chain of enhancement stages between two frame rings.
pub struct Pipeline {
    stages: Vec<Box<dyn EnhancementStage>>,
    input_ring: FrameRing,
    output_ring: FrameRing,
    dims: Option<(u32, u32)>,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline")
            .field("stages", &self.stage_names())
            .field("capacity", &self.input_ring.capacity())
            .field("dims", &self.dims)
            .finish()
    }
}

/// Builds a pipeline with default capacity-4 rings. An empty chain is the identity.
pub fn chain(stages: Vec<Box<dyn EnhancementStage>>) -> Pipeline {
    Pipeline {
        stages,
        input_ring: FrameRing::default(),
        output_ring: FrameRing::default(),
        dims: None,
    }
}

impl Pipeline {
    pub fn with_rings(
        stages: Vec<Box<dyn EnhancementStage>>,
        input_ring: FrameRing,
        output_ring: FrameRing,
    ) -> Result<Self> {
        if input_ring.capacity() != output_ring.capacity() {
            return Err(LeapError::Configuration(format!(
                "input ring holds {} frames, output ring {}",
                input_ring.capacity(),
                output_ring.capacity()
            )));
        }
        Ok(Pipeline {
            stages,
            input_ring,
            output_ring,
            dims: None,
        })
    }

    /// Pipeline holding a single histogram equalization stage.
    pub fn histeq(config: HistEqConfig) -> Result<Self> {
        let mut p = chain(vec![Box::new(HistEqStage::new(config)?)]);
        p.dims = Some((config.rows, config.cols));
        Ok(p)
    }

    pub fn stage_names(&self) -> Vec<&str> {
        self.stages.iter().map(|s| s.name()).collect()
    }

    pub fn stages(&self) -> &[Box<dyn EnhancementStage>] {
        &self.stages
    }

    pub fn input_ring(&self) -> &FrameRing {
        &self.input_ring
    }

    pub fn output_ring(&self) -> &FrameRing {
        &self.output_ring
    }

    /// Configured `(rows, cols)`; `None` accepts any frame size.
    pub fn dimensions(&self) -> Option<(u32, u32)> {
        self.dims
    }

    /// Fans new dimensions out to every stage.
    pub fn reconfigure(&mut self, rows: u32, cols: u32) -> Result<()> {
        for s in &mut self.stages {
            s.reconfigure(rows, cols)?;
        }
        self.dims = Some((rows, cols));
        Ok(())
    }

    /// Runs `frame` through every stage and publishes the result to the output ring.
    pub fn process(&mut self, frame: &Frame) -> Result<Frame> {
        if let Some((rows, cols)) = self.dims {
            if frame.dimensions() != (cols, rows) {
                return Err(LeapError::Configuration(format!(
                    "pipeline configured for {cols}x{rows}, got {}x{}",
                    frame.width(),
                    frame.height()
                )));
            }
        }
        let mut current = frame.clone();
        for s in &mut self.stages {
            let next = s.process(&current)?;
            debug_assert_eq!(next.dimensions(), current.dimensions());
            current = next;
        }
        self.output_ring.publish(current.clone());
        Ok(current)
    }

    /// Processes the latest frame of the input ring, if any.
    pub fn process_latest(&mut self) -> Result<Option<Frame>> {
        match self.input_ring.latest() {
            Some(f) => self.process(&f).map(Some),
            None => Ok(None),
        }
    }

    /// Makes `producer` the pipeline's input ring (shared storage, no copy).
    pub fn zero_copy_bind(&mut self, producer: &FrameRing) -> Result<()> {
        if producer.capacity() != self.input_ring.capacity() {
            return Err(LeapError::Configuration(format!(
                "producer ring holds {} frames but the pipeline expects {}",
                producer.capacity(),
                self.input_ring.capacity()
            )));
        }
        self.input_ring = producer.clone();
        Ok(())
    }
}
