use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{LeapError, Result};
use crate::inference::{overlay, simulate_work, Backend, Prediction, RawOutput, Tensor};
use crate::scheduler::{
    FrameRecord, FrameSink, FrameSource, InferenceRecord, Mode, QueueSpec, RunReport, Stage, StageGrouping,
    StageTimes,
};
use crate::vep::Pipeline;
use crate::video::Frame;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Extra simulated cost of drawing the overlay.
    pub overlay_ms: f64,
    /// Worker groups for pipelined mode.
    pub grouping: StageGrouping,
}

fn ms_since(t0: Instant, t: Instant) -> f64 {
    t.duration_since(t0).as_secs_f64() * 1000.0
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, t.elapsed().as_secs_f64() * 1000.0))
}

fn check_resolution(source: &dyn FrameSource, vep: &Pipeline) -> Result<()> {
    if let Some((rows, cols)) = vep.dimensions() {
        let (w, h) = source.resolution();
        if (w, h) != (cols, rows) {
            return Err(LeapError::Configuration(format!(
                "source delivers {w}x{h} but the enhancement pipeline is configured for {cols}x{rows}"
            )));
        }
    }
    Ok(())
}

/// A frame in flight together with everything computed for it so far.
struct Job {
    start: Instant,
    /// Enhanced frame, before any inference step.
    frame: Frame,
    tensor: Option<Tensor>,
    raw: Option<RawOutput>,
    prediction: Option<Prediction>,
    output: Option<Frame>,
    times: StageTimes,
}

/// Reads one frame and runs it through the enhancement pipeline.
fn read_job(source: &mut dyn FrameSource, vep: &mut Pipeline) -> Result<Option<Job>> {
    let start = Instant::now();
    let Some(raw) = source.next_frame()? else {
        return Ok(None);
    };
    let index = raw.index;
    let mut frame = vep.process(&raw)?;
    frame.index = index;
    let mut times = StageTimes::default();
    times.read_ms = start.elapsed().as_secs_f64() * 1000.0;
    Ok(Some(Job {
        start,
        frame,
        tensor: None,
        raw: None,
        prediction: None,
        output: None,
        times,
    }))
}

fn missing(stage: Stage) -> LeapError {
    LeapError::Worker(format!("{} stage ran before its input was ready", stage.as_str()))
}

/// Runs every non-read stage of `stages` on `job`.
fn run_stages(
    stages: &[Stage],
    job: &mut Job,
    backend: &dyn Backend,
    overlay_ms: f64,
    mut sink: Option<&mut (dyn FrameSink + '_)>,
) -> Result<()> {
    for &stage in stages {
        let t = Instant::now();
        match stage {
            Stage::Read => continue,
            Stage::Preprocess => job.tensor = Some(backend.preprocess(&job.frame)?),
            Stage::Infer => {
                let tensor = job.tensor.take().ok_or_else(|| missing(stage))?;
                job.raw = Some(backend.infer(&tensor)?);
            }
            Stage::Postprocess => {
                let raw = job.raw.take().ok_or_else(|| missing(stage))?;
                job.prediction = Some(backend.postprocess(raw)?);
            }
            Stage::Overlay => {
                let p = job.prediction.as_ref().ok_or_else(|| missing(stage))?;
                job.output = Some(overlay(&job.frame, p));
                simulate_work(overlay_ms);
            }
            Stage::Write => {
                let out = job.output.take().ok_or_else(|| missing(stage))?;
                let sink = sink.as_deref_mut().ok_or_else(|| LeapError::Worker("write stage has no sink".into()))?;
                sink.write(out)?;
            }
        }
        job.times.set(stage, t.elapsed().as_secs_f64() * 1000.0);
    }
    Ok(())
}

fn finish_record(job: &Job, t0: Instant, mode: Mode) -> FrameRecord {
    let end = Instant::now();
    FrameRecord {
        frame_index: job.frame.index,
        stages: job.times,
        total_ms: ms_since(job.start, end),
        start_ms: ms_since(t0, job.start),
        end_ms: ms_since(t0, end),
        mode,
    }
}

/// One frame at a time: read, preprocess, infer, postprocess, overlay on
/// the enhanced frame, write. Stops early if the source runs dry.
pub fn run_sync(
    source: &mut dyn FrameSource,
    vep: &mut Pipeline,
    backend: &dyn Backend,
    sink: &mut dyn FrameSink,
    n_frames: u64,
    opts: &RunOptions,
) -> Result<RunReport> {
    check_resolution(source, vep)?;
    let t0 = Instant::now();
    let mut records = Vec::with_capacity(n_frames as usize);
    for _ in 0..n_frames {
        let Some(mut job) = read_job(source, vep)? else { break };
        run_stages(&Stage::ALL, &mut job, backend, opts.overlay_ms, Some(&mut *sink))?;
        records.push(finish_record(&job, t0, Mode::Sync));
    }
    sink.finish()?;
    Ok(RunReport::build(Mode::Sync, ms_since(t0, Instant::now()), records, vec![]))
}

/// One worker per stage group, joined by bounded FIFO channels of
/// `q.depth` items. Frames leave in the order they were read.
pub fn run_pipelined(
    source: &mut dyn FrameSource,
    vep: &mut Pipeline,
    backend: &dyn Backend,
    sink: &mut dyn FrameSink,
    n_frames: u64,
    q: QueueSpec,
    opts: &RunOptions,
) -> Result<RunReport> {
    check_resolution(source, vep)?;
    let groups = opts.grouping.groups();
    if q.depth == 0 || q.count + 1 != groups.len() {
        return Err(LeapError::Configuration(format!(
            "{} queues of depth {} cannot join {} worker groups",
            q.count,
            q.depth,
            groups.len()
        )));
    }
    let last = groups.len() - 1;
    let in_flight = AtomicUsize::new(0);
    let max_in_flight = AtomicUsize::new(0);
    let t0 = Instant::now();

    let mut senders: Vec<Option<SyncSender<Job>>> = Vec::with_capacity(last);
    let mut receivers: Vec<Option<Receiver<Job>>> = vec![None];
    for _ in 0..last {
        let (tx, rx) = sync_channel::<Job>(q.depth);
        senders.push(Some(tx));
        receivers.push(Some(rx));
    }
    senders.push(None);

    let overlay_ms = opts.overlay_ms;
    let (results, records) = thread::scope(|s| {
        let mut handles = Vec::with_capacity(groups.len());
        let mut sink = Some(sink);
        let mut head = Some((source, vep));
        let mut tail_handle = None;
        for (g, stages) in groups.iter().enumerate() {
            let tx = senders[g].take();
            let rx = receivers[g].take();
            let in_flight = &in_flight;
            let max_in_flight = &max_in_flight;
            let sink = if g == last { sink.take() } else { None };
            let head = if g == 0 { head.take() } else { None };
            let handle = s.spawn(move || -> Result<Vec<FrameRecord>> {
                let mut sink = sink;
                let mut records = Vec::new();
                let mut handle_job = |mut job: Job| -> Result<bool> {
                    run_stages(stages, &mut job, backend, overlay_ms, sink.as_deref_mut())?;
                    match &tx {
                        Some(tx) => Ok(tx.send(job).is_ok()),
                        None => {
                            records.push(finish_record(&job, t0, Mode::Pipelined));
                            in_flight.fetch_sub(1, Ordering::SeqCst);
                            Ok(true)
                        }
                    }
                };
                if let Some((source, vep)) = head {
                    for _ in 0..n_frames {
                        let Some(job) = read_job(source, vep)? else { break };
                        let now = in_flight.fetch_add(1, Ordering::SeqCst) + 1;
                        max_in_flight.fetch_max(now, Ordering::SeqCst);
                        if !handle_job(job)? {
                            break;
                        }
                    }
                } else if let Some(rx) = rx {
                    for job in rx {
                        if !handle_job(job)? {
                            break;
                        }
                    }
                }
                drop(handle_job);
                if let Some(sink) = sink {
                    sink.finish()?;
                }
                Ok(records)
            });
            if g == last {
                tail_handle = Some(handle);
            } else {
                handles.push(handle);
            }
        }
        let join = |h: thread::ScopedJoinHandle<'_, Result<Vec<FrameRecord>>>| {
            h.join()
                .unwrap_or_else(|_| Err(LeapError::Worker("pipeline worker panicked".into())))
        };
        let records = join(tail_handle.expect("at least one group"));
        let results: Vec<Result<Vec<FrameRecord>>> = handles.into_iter().map(join).collect();
        (results, records)
    });
    for r in results {
        r?;
    }
    let records = records?;
    let elapsed = ms_since(t0, Instant::now());
    let mut report = RunReport::build(Mode::Pipelined, elapsed, records, vec![]);
    report.groups = Some(opts.grouping.to_string());
    report.queue = Some(q);
    report.max_in_flight = Some(max_in_flight.load(Ordering::SeqCst));
    Ok(report)
}

/// Video path and inference run on separate workers.
///
/// The video worker reads at the source frame rate, enhances, publishes the
/// enhanced frame to the pipeline's output ring and writes it to the sink
/// without waiting on inference. The inference worker repeatedly takes the
/// newest frame in the ring, so slow inference skips frames instead of
/// stalling the video.
pub fn run_async(
    source: &mut dyn FrameSource,
    vep: &mut Pipeline,
    backend: &dyn Backend,
    sink: &mut dyn FrameSink,
    n_frames: u64,
) -> Result<RunReport> {
    check_resolution(source, vep)?;
    let ring = vep.output_ring().clone();
    ring.reset();
    let fps = source.fps();
    let period = (fps > 0.0).then(|| Duration::from_secs_f64(1.0 / fps));
    let t0 = Instant::now();

    let (video, inference) = thread::scope(|s| {
        let infer_ring = ring.clone();
        let inference = s.spawn(move || -> Result<Vec<InferenceRecord>> {
            let mut log = Vec::new();
            let mut last = None;
            while let Some(frame) = infer_ring.wait_newer(last) {
                let start = Instant::now();
                let (tensor, preprocess_ms) = timed(|| backend.preprocess(&frame))?;
                let (raw, infer_ms) = timed(|| backend.infer(&tensor))?;
                let (prediction, postprocess_ms) = timed(|| backend.postprocess(raw))?;
                log.push(InferenceRecord {
                    frame_index: frame.index,
                    preprocess_ms,
                    infer_ms,
                    postprocess_ms,
                    start_ms: ms_since(t0, start),
                    end_ms: ms_since(t0, Instant::now()),
                    prediction,
                });
                last = Some(frame.index);
            }
            Ok(log)
        });

        let video = (|| -> Result<(Vec<FrameRecord>, Instant)> {
            let mut records = Vec::with_capacity(n_frames as usize);
            for i in 0..n_frames {
                if let Some(p) = period {
                    let due = t0 + p.mul_f64(i as f64);
                    let now = Instant::now();
                    if due > now {
                        thread::sleep(due - now);
                    }
                }
                let Some(mut job) = read_job(source, vep)? else { break };
                let t = Instant::now();
                sink.write(job.frame.clone())?;
                job.times.write_ms = t.elapsed().as_secs_f64() * 1000.0;
                records.push(finish_record(&job, t0, Mode::Async));
            }
            sink.finish()?;
            Ok((records, Instant::now()))
        })();
        // always release the inference worker, even after a video error
        ring.close();
        let inference = inference
            .join()
            .unwrap_or_else(|_| Err(LeapError::Worker("inference worker panicked".into())));
        (video, inference)
    });
    // throughput is the video path's; waiting out the last inference is not counted
    let (records, video_end) = video?;
    let inferences = inference?;
    Ok(RunReport::build(Mode::Async, ms_since(t0, video_end), records, inferences))
}

/// Dispatches to the scheduler for `mode`; `q` is used by pipelined mode only.
pub fn run(
    mode: Mode,
    source: &mut dyn FrameSource,
    vep: &mut Pipeline,
    backend: &dyn Backend,
    sink: &mut dyn FrameSink,
    n_frames: u64,
    q: QueueSpec,
    opts: &RunOptions,
) -> Result<RunReport> {
    match mode {
        Mode::Async => run_async(source, vep, backend, sink, n_frames),
        Mode::Sync => run_sync(source, vep, backend, sink, n_frames, opts),
        Mode::Pipelined => run_pipelined(source, vep, backend, sink, n_frames, q, opts),
    }
}
