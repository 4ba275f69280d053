//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use leap_core::eval::{
    average_precision, gen_synthetic_dataset, iou, map_50_95, read_manifest, run_eval, BoxF, EvalOptions,
    EvalReport, EvalVariant, GtBox, VariantTag, IOU_THRESHOLDS,
};
use leap_core::histeq::{
    build_lut, equalize, pack_gpio, unpack_gpio, ColorMode, GpioWord, HistEqConfig, HistEqState, Histogram, Lut,
    TimingMode,
};
use leap_core::inference::{BrightSquareDetector, Detection, MockBackend, MockConfig, QuadrantClassifier};
use leap_core::scheduler::{
    predict_times, run_async, run_pipelined, CollectSink, FrameSink, QueueSpec, RunOptions, StageTimes,
    SyntheticSource,
};
use leap_core::vep::chain;
use leap_core::video::{detokenize, tokenize};
use leap_core::{Frame, LeapError, Pixel};

// Regression numbers frozen from the first reference run: 200 images,
// seed 42, 64x64, threshold 30, divisor 8.
const PINNED_TOP1: [(VariantTag, f64); 3] = [
    (VariantTag::Original, 1.0),
    (VariantTag::Dark, 0.0),
    (VariantTag::DarkHisteq, 1.0),
];
const PINNED_MAP: [(VariantTag, f64); 3] = [
    (VariantTag::Original, 1.0),
    (VariantTag::Dark, 0.0),
    (VariantTag::DarkHisteq, 1.0),
];

const RESNET50: [f64; 6] = [1.0, 28.0, 13.0, 0.0, 0.0, 50.0];
const YOLOV3: [f64; 6] = [1.0, 43.0, 87.0, 153.0, 0.0, 50.0];

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn random_frame(rng: &mut ChaCha8Rng, w: u32, h: u32) -> Frame {
    let px = (0..w * h)
        .map(|_| Pixel::new(rng.random(), rng.random(), rng.random()))
        .collect();
    Frame::from_pixels(w, h, px).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for mode in [ColorMode::LumaGain, ColorMode::PerChannel] {
        for i in 0..100 {
            let f = random_frame(&mut rng, 16, 16);
            let cfg = HistEqConfig::new(16, 16, mode, TimingMode::TwoPass).unwrap();
            let mut state = HistEqState::new(cfg).unwrap();
            let mut out = Vec::new();
            for t in tokenize(&f) {
                state.push_pixel(t, &mut out).map_err(|e| e.to_string())?;
            }
            let streamed = detokenize(&out, 16, 16).map_err(|e| e.to_string())?;
            check(
                streamed.to_rgb_bytes() == equalize(&f, &cfg).unwrap().to_rgb_bytes(),
                format!("frame {i} ({mode:?}) differs"),
            )?;
        }
    }
    Ok("100 frames x 2 color modes byte-identical".into())
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for mode in [ColorMode::LumaGain, ColorMode::PerChannel] {
        let delayed = HistEqConfig::new(16, 16, mode, TimingMode::FrameDelayed).unwrap();
        let mut state = HistEqState::new(delayed).unwrap();
        for i in 0..50 {
            let f = random_frame(&mut rng, 16, 16);
            let want = equalize(&f, &HistEqConfig::new(16, 16, mode, TimingMode::TwoPass).unwrap()).unwrap();
            let outs: Vec<Frame> = (0..3).map(|_| state.push_frame(&f).unwrap().unwrap()).collect();
            check(outs[1] == want, format!("frame {i} ({mode:?}): second repeat differs"))?;
            check(outs[2] == want, format!("frame {i} ({mode:?}): third repeat differs"))?;
        }
    }
    Ok("repeats 2-3 equal two-pass output".into())
}

/// Float oracle: round-half-away of 255 * (cdf - cdf_min) / (n - cdf_min).
fn lut_oracle(bins: &[u32; 256]) -> [u8; 256] {
    let n: u64 = bins.iter().map(|&b| b as u64).sum();
    let first = bins.iter().position(|&b| b > 0).unwrap();
    let cdf_min = bins[first] as u64;
    let mut out = [0u8; 256];
    if cdf_min == n {
        for (v, o) in out.iter_mut().enumerate() {
            *o = v as u8;
        }
        return out;
    }
    let mut cdf = 0u64;
    for v in 0..256 {
        cdf += bins[v] as u64;
        if v >= first {
            out[v] = (255.0 * (cdf - cdf_min) as f64 / (n - cdf_min) as f64).round() as u8;
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut degenerate = 0;
    for i in 0..1000 {
        let mut h = Histogram::default();
        let occupied = match i % 4 {
            0 => 1,
            1 => rng.random_range(2..5),
            _ => rng.random_range(1..=256),
        };
        for _ in 0..occupied {
            let level = rng.random::<u8>() as usize;
            h.bins[level] += rng.random_range(1..2000);
        }
        let n = h.total();
        let lut = build_lut(&h, n).map_err(|e| e.to_string())?;
        check(lut.is_monotone(), format!("histogram {i}: LUT not monotone"))?;
        check(lut.map == lut_oracle(&h.bins), format!("histogram {i}: LUT differs from oracle"))?;
        if h.bins.iter().filter(|&&b| b > 0).count() == 1 {
            degenerate += 1;
            check(lut == Lut::identity(), format!("histogram {i}: single level is not identity"))?;
        }
    }
    check(degenerate >= 250, "too few degenerate histograms exercised")?;

    let mut h = Histogram::default();
    for v in [10u8, 10, 20, 30] {
        h.add(v);
    }
    let lut = build_lut(&h, 4).unwrap();
    check(
        (lut.get(10), lut.get(20), lut.get(30)) == (0, 128, 255),
        format!("worked example gave {:?}", (lut.get(10), lut.get(20), lut.get(30))),
    )?;
    Ok(format!("1000 histograms ({degenerate} degenerate), worked example exact"))
}

fn criterion_4() -> Outcome {
    let grid: Vec<u32> = (0..64).map(|i| i * 4095 / 63).collect();
    check(grid[0] == 0 && grid[63] == 4095, "grid endpoints")?;
    for &rows in &grid {
        for &cols in &grid {
            for reset in [false, true] {
                let w = pack_gpio(rows, cols, reset).map_err(|e| e.to_string())?;
                check(unpack_gpio(w) == (rows, cols, reset), format!("({rows},{cols},{reset})"))?;
            }
        }
    }
    check(pack_gpio(1080, 1920, false).unwrap() == GpioWord(0x0078_0438), "1080x1920 word")?;

    let cfg = HistEqConfig::new(1080, 1920, ColorMode::LumaGain, TimingMode::TwoPass).unwrap();
    let mut state = HistEqState::new(cfg).unwrap();
    let changed = state.configure(pack_gpio(720, 1280, false).unwrap());
    check(matches!(changed, Err(LeapError::Protocol(_))), "resize without reset accepted")?;
    check(state.dimensions() == (1080, 1920), "rejected resize changed dimensions")?;
    state.configure(pack_gpio(720, 1280, true).unwrap()).map_err(|e| e.to_string())?;
    state.configure(pack_gpio(720, 1280, false).unwrap()).map_err(|e| e.to_string())?;
    check(state.dimensions() == (720, 1280), "resize with reset not applied")?;
    Ok("64x64x2 grid round-trips, resize without reset rejected".into())
}

fn leap(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_leap")).args(args).output().unwrap()
}

fn cli_run(mode: &str, t: [f64; 6], frames: u64, report: &Path) -> Result<Value, String> {
    let s = |v: f64| v.to_string();
    let frames = frames.to_string();
    let out = leap(&[
        "run",
        "--mode",
        mode,
        "--frames",
        &frames,
        "--enhance",
        "none",
        "--read-ms",
        &s(t[0]),
        "--preprocess-ms",
        &s(t[1]),
        "--infer-ms",
        &s(t[2]),
        "--postprocess-ms",
        &s(t[3]),
        "--overlay-ms",
        &s(t[4]),
        "--write-ms",
        &s(t[5]),
        "--report",
        report.to_str().unwrap(),
    ]);
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    serde_json::from_str(&std::fs::read_to_string(report).unwrap()).map_err(|e| e.to_string())
}

fn predict_line(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .and_then(|v| v.parse().ok())
        .unwrap_or(f64::NAN)
}

fn criterion_5(sync: &[(&str, [f64; 6], Value)]) -> Outcome {
    let mut detail = Vec::new();
    for (name, t, report) in sync {
        let expected = t.iter().sum::<f64>();
        let st = StageTimes::new(t[0], t[1], t[2], t[3], t[4], t[5]);
        check(predict_times(&st).si_ms == expected, format!("{name}: library si_ms"))?;
        let out = leap(&[
            "predict",
            "--read-ms",
            &t[0].to_string(),
            "--preprocess-ms",
            &t[1].to_string(),
            "--infer-ms",
            &t[2].to_string(),
            "--postprocess-ms",
            &t[3].to_string(),
            "--overlay-ms",
            &t[4].to_string(),
            "--write-ms",
            &t[5].to_string(),
        ]);
        let text = String::from_utf8_lossy(&out.stdout);
        check(out.status.success(), format!("{name}: predict failed"))?;
        check(predict_line(&text, "si_ms") == expected, format!("{name}: predict si_ms"))?;

        let mean = report["mean_total_ms"].as_f64().unwrap();
        check(
            mean >= expected && mean <= expected * 1.15,
            format!("{name}: sync mean total {mean:.2} ms outside [{expected}, {:.1}]", expected * 1.15),
        )?;
        check(report["frames"] == 50, format!("{name}: frame count"))?;
        detail.push(format!("{name} si={expected} measured={mean:.2}ms"));
    }
    Ok(detail.join(", "))
}

fn criterion_6(
    sync: &[(&str, [f64; 6], Value)],
    dir: &Path,
) -> Outcome {
    let mut detail = Vec::new();
    for (name, t, sync_report) in sync {
        let report = cli_run("pipelined", *t, 50, &dir.join(format!("{name}_psi.json")))?;
        let bound = predict_times(&StageTimes::new(t[0], t[1], t[2], t[3], t[4], t[5])).psi_lower_bound_ms;
        let period = report["mean_period_ms"].as_f64().unwrap();
        let sync_total = sync_report["mean_total_ms"].as_f64().unwrap();
        check(
            period < sync_total,
            format!("{name}: pipelined period {period:.2} not below sync {sync_total:.2}"),
        )?;
        check(period >= bound, format!("{name}: pipelined period {period:.2} below bound {bound}"))?;
        let idx: Vec<u64> = report["records"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["frame_index"].as_u64().unwrap())
            .collect();
        check(idx == (0..50).collect::<Vec<_>>(), format!("{name}: order or conservation broken"))?;
        let fps = report["fps"].as_f64().unwrap();
        if *name == "resnet50" {
            check(fps > 10.0, format!("resnet50: {fps:.2} fps"))?;
        }
        detail.push(format!("{name} period={period:.2}ms bound={bound} sync={sync_total:.2}ms fps={fps:.2}"));
    }
    Ok(detail.join(", "))
}

fn criterion_7(dir: &Path) -> Outcome {
    let start = Instant::now();
    let files = gen_synthetic_dataset(200, 42, 64, dir).map_err(|e| e.to_string())?;
    let variants = EvalVariant::standard(8).unwrap();
    let opts = EvalOptions::default();

    let entries = read_manifest(&files.classification_manifest).map_err(|e| e.to_string())?;
    let EvalReport::Accuracy(acc) =
        run_eval(&entries, dir, &variants, &QuadrantClassifier::new(30.0), &opts).map_err(|e| e.to_string())?
    else {
        return Err("classification manifest gave a mAP report".into());
    };
    let top1 = |t| acc.row(t).unwrap().top1;
    let (orig, dark, eq) = (top1(VariantTag::Original), top1(VariantTag::Dark), top1(VariantTag::DarkHisteq));
    check(orig >= 0.95, format!("top-1 original {orig}"))?;
    check(dark <= 0.40, format!("top-1 dark {dark}"))?;
    check(eq >= 0.85, format!("top-1 dark_histeq {eq}"))?;
    check(eq - dark >= 0.30, format!("recovery {:.3}", eq - dark))?;
    for (tag, want) in PINNED_TOP1 {
        check(top1(tag) == want, format!("{} top-1 {} != pinned {want}", tag.as_str(), top1(tag)))?;
    }

    let entries = read_manifest(&files.detection_manifest).map_err(|e| e.to_string())?;
    let EvalReport::Map(det) =
        run_eval(&entries, dir, &variants, &BrightSquareDetector::new(30.0), &opts).map_err(|e| e.to_string())?
    else {
        return Err("detection manifest gave an accuracy report".into());
    };
    let map = |t| det.row(t).unwrap().map;
    check(
        map(VariantTag::Dark) < map(VariantTag::DarkHisteq),
        format!("mAP dark {} not below dark_histeq {}", map(VariantTag::Dark), map(VariantTag::DarkHisteq)),
    )?;
    for (tag, want) in PINNED_MAP {
        check(map(tag) == want, format!("{} mAP {} != pinned {want}", tag.as_str(), map(tag)))?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 30.0, format!("took {secs:.1}s"))?;
    Ok(format!(
        "top-1 {orig}/{dark}/{eq}, mAP {}/{}/{}, {secs:.1}s",
        map(VariantTag::Original),
        map(VariantTag::Dark),
        map(VariantTag::DarkHisteq)
    ))
}

fn det(x: f64, y: f64, w: f64, h: f64, class_id: u32, score: f64) -> Detection {
    Detection { x, y, w, h, class_id, score }
}

fn gt(x: u32, y: u32, w: u32, h: u32, class_id: u32) -> GtBox {
    GtBox { x, y, w, h, class_id }
}

/// Brute-force single-class AP: enumerate the ranked list, then for every
/// recall level take the best precision at any cutoff with recall >= level.
fn ap_oracle(preds: &[Vec<Detection>], gts: &[Vec<GtBox>], t: f64) -> f64 {
    let npos: usize = gts.iter().map(Vec::len).sum();
    let mut ranked: Vec<(usize, usize)> = preds
        .iter()
        .enumerate()
        .flat_map(|(i, d)| (0..d.len()).map(move |j| (i, j)))
        .collect();
    ranked.sort_by(|a, b| preds[b.0][b.1].score.total_cmp(&preds[a.0][a.1].score));
    let mut taken: Vec<Vec<bool>> = gts.iter().map(|g| vec![false; g.len()]).collect();
    let mut points = Vec::new();
    let mut tp = 0;
    for (k, &(i, j)) in ranked.iter().enumerate() {
        let d = &preds[i][j];
        let mut best: Option<(usize, f64)> = None;
        for (g, b) in gts[i].iter().enumerate() {
            let o = iou(BoxF::from(d), BoxF::from(b));
            if !taken[i][g] && o >= t && best.is_none_or(|(_, bo)| o > bo) {
                best = Some((g, o));
            }
        }
        if let Some((g, _)) = best {
            taken[i][g] = true;
            tp += 1;
        }
        points.push((tp as f64 / npos as f64, tp as f64 / (k + 1) as f64));
    }
    (0..101)
        .map(|r| {
            let level = r as f64 / 100.0;
            points
                .iter()
                .filter(|(rec, _)| *rec >= level)
                .map(|(_, p)| *p)
                .fold(0.0, f64::max)
        })
        .sum::<f64>()
        / 101.0
}

fn criterion_8() -> Outcome {
    let gts = vec![vec![gt(4, 4, 8, 8, 0)], vec![gt(0, 0, 3, 5, 0)]];
    let perfect = vec![vec![det(4.0, 4.0, 8.0, 8.0, 0, 0.9)], vec![det(0.0, 0.0, 3.0, 5.0, 0, 0.4)]];
    let m = map_50_95(&perfect, &gts).unwrap().map;
    check(m == 1.0, format!("perfect detector {m}"))?;
    let m = map_50_95(&[vec![], vec![]], &gts).unwrap().map;
    check(m == 0.0, format!("empty predictions {m}"))?;

    let gts7 = vec![vec![gt(0, 0, 10, 10, 0)], vec![gt(20, 20, 10, 10, 1)]];
    let preds7 = vec![
        vec![det(0.0, 0.0, 7.0, 10.0, 0, 0.8)],
        vec![det(20.0, 20.0, 10.0, 7.0, 1, 0.6)],
    ];
    let m = map_50_95(&preds7, &gts7).unwrap().map;
    check(m == 0.5, format!("IoU-0.70 construction {m}"))?;

    // a false positive outranks a true positive whose IoU is 0.6
    let hand_gts = vec![vec![gt(0, 0, 10, 10, 0)], vec![gt(0, 0, 10, 10, 0)]];
    let hand = vec![
        vec![det(30.0, 30.0, 10.0, 10.0, 0, 0.95), det(0.0, 0.0, 6.0, 10.0, 0, 0.7)],
        vec![det(0.0, 0.0, 10.0, 9.0, 0, 0.9), det(0.0, 0.0, 10.0, 10.0, 0, 0.5)],
    ];
    let mut per_t = Vec::new();
    for &t in &IOU_THRESHOLDS {
        let got = average_precision(&hand, &hand_gts, t).unwrap();
        let want = ap_oracle(&hand, &hand_gts, t);
        check((got - want).abs() < 1e-12, format!("hand-built PR at {t}: {got} vs oracle {want}"))?;
        per_t.push(got);
    }
    let m = map_50_95(&hand, &hand_gts).unwrap().map;
    let want = per_t.iter().sum::<f64>() / 10.0;
    check((m - want).abs() < 1e-12, "hand-built mAP")?;
    Ok(format!("perfect 1, empty 0, IoU-0.70 0.5, hand-built mAP {m:.4} matches oracle"))
}

fn criterion_9() -> Outcome {
    // 10 ms frame period, 100 ms inference
    let backend = MockBackend::new(MockConfig::timed(0.0, 100.0, 0.0)).unwrap();
    let mut src = SyntheticSource::new(32, 32, 100.0).unwrap();
    let mut sink = CollectSink::default();
    let r = run_async(&mut src, &mut chain(vec![]), &backend, &mut sink, 100).map_err(|e| e.to_string())?;
    check(sink.indices == (0..100).collect::<Vec<_>>(), "sink missed or reordered frames")?;
    check(r.frames == 100, "report frame count")?;
    check(r.dropped_frames > 0, "no dropped frames reported")?;
    check(r.inferences.len() <= 100, "more inferences than frames")?;
    check(
        r.dropped_frames == 100 - r.inferences.len() as u64,
        "dropped != frames - sampled",
    )?;
    Ok(format!("100 frames delivered, {} sampled, dropped_frames={}", r.inferences.len(), r.dropped_frames))
}

/// Sink with its own random latency.
struct JitterSink {
    rng: ChaCha8Rng,
    inner: CollectSink,
}

impl FrameSink for JitterSink {
    fn write(&mut self, frame: Frame) -> leap_core::Result<()> {
        let ms: f64 = self.rng.random_range(0.0..0.6);
        std::thread::sleep(std::time::Duration::from_secs_f64(ms / 1000.0));
        self.inner.write(frame)
    }
}

fn criterion_10() -> Outcome {
    let mut detail = Vec::new();
    for depth in [1usize, 2, 4] {
        let cfg = MockConfig {
            jitter_ms: 0.6,
            seed: depth as u64,
            ..MockConfig::default()
        };
        let backend = MockBackend::new(cfg).unwrap();
        let mut src = SyntheticSource::new(16, 16, 0.0).unwrap();
        let mut sink = JitterSink {
            rng: ChaCha8Rng::seed_from_u64(100 + depth as u64),
            inner: CollectSink::default(),
        };
        let q = QueueSpec::new(depth).unwrap();
        let r = run_pipelined(&mut src, &mut chain(vec![]), &backend, &mut sink, 500, q, &RunOptions::default())
            .map_err(|e| e.to_string())?;
        check(sink.inner.indices == (0..500).collect::<Vec<_>>(), format!("depth {depth}: frames lost or reordered"))?;
        let peak = r.max_in_flight.unwrap();
        check(peak <= 4 + 3 * depth, format!("depth {depth}: {peak} frames in flight"))?;
        detail.push(format!("depth {depth} peak {peak}/{}", 4 + 3 * depth));
    }
    Ok(detail.join(", "))
}

fn run(n: u32, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into()))
    });
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("PASS criterion {n:>2} {name}: {detail} [{secs:.1}s]");
            true
        }
        Err(why) => {
            println!("FAIL criterion {n:>2} {name}: {why} [{secs:.1}s]");
            false
        }
    }
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    ok &= run(1, "histeq streaming/batch equivalence", criterion_1);
    ok &= run(2, "frame-delayed convergence", criterion_2);
    ok &= run(3, "LUT properties", criterion_3);
    ok &= run(4, "GPIO protocol", criterion_4);

    let sync_runs: Vec<(&str, [f64; 6], Value)> = [("resnet50", RESNET50), ("yolov3", YOLOV3)]
        .into_iter()
        .filter_map(|(name, t)| match cli_run("sync", t, 50, &dir.path().join(format!("{name}_si.json"))) {
            Ok(v) => Some((name, t, v)),
            Err(e) => {
                println!("sync run for {name} failed: {e}");
                None
            }
        })
        .collect();
    let have_sync = sync_runs.len() == 2;
    ok &= run(5, "timing table consistency", || {
        check(have_sync, "sync runs failed")?;
        criterion_5(&sync_runs)
    });
    ok &= run(6, "pipelining benefit", || {
        check(have_sync, "sync runs failed")?;
        criterion_6(&sync_runs, dir.path())
    });
    let ds = dir.path().join("dataset");
    ok &= run(7, "darken/enhance recovery", || criterion_7(&ds));
    ok &= run(8, "mAP engine oracle", criterion_8);
    ok &= run(9, "async sampling", criterion_9);
    ok &= run(10, "no-deadlock soak", criterion_10);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
