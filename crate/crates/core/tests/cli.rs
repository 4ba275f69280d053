use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use leap_core::histeq::{equalize, ColorMode, HistEqConfig};
use leap_core::video::ppm;
use leap_core::{Frame, Pixel};
use serde_json::Value;

fn leap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leap")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gradient(w: u32, h: u32) -> Frame {
    let px = (0..w * h)
        .map(|i| {
            let v = (i % 97) as u8;
            Pixel::new(v, v / 2 + 10, 60 - v.min(60))
        })
        .collect();
    Frame::from_pixels(w, h, px).unwrap()
}

#[test]
fn enhance_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let (input, output) = (dir.path().join("in.ppm"), dir.path().join("out.ppm"));
    let f = gradient(40, 30);
    ppm::save(&f, &input).unwrap();
    for mode in ["luma_gain", "per_channel"] {
        let out = leap(&["enhance", p(&input), p(&output), "--color-mode", mode]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let cfg = HistEqConfig {
            color_mode: mode.parse::<ColorMode>().unwrap(),
            ..HistEqConfig::for_frame(&f)
        };
        assert_eq!(ppm::load(&output).unwrap(), equalize(&f, &cfg).unwrap());
    }
}

#[test]
fn enhance_leaves_uniform_image_alone() {
    let dir = tempfile::tempdir().unwrap();
    let (input, output) = (dir.path().join("in.ppm"), dir.path().join("out.ppm"));
    ppm::save(&Frame::new(8, 8, Pixel::gray(77)).unwrap(), &input).unwrap();
    assert!(leap(&["enhance", p(&input), p(&output)]).status.success());
    assert_eq!(fs::read(&input).unwrap(), fs::read(&output).unwrap());
}

#[test]
fn enhance_missing_input_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = leap(&["enhance", p(&dir.path().join("nope.ppm")), p(&dir.path().join("o.ppm"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_dataset_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = leap(&["gen-dataset", "--n", "12", "--size", "32", "--seed", "7", "--out", p(d)]);
        assert!(out.status.success());
    }
    let listing = |root: &Path| {
        let mut files = Vec::new();
        for sub in [root.to_path_buf(), root.join("images")] {
            for e in fs::read_dir(&sub).unwrap() {
                let path = e.unwrap().path();
                if path.is_file() {
                    files.push(path.strip_prefix(root).unwrap().to_path_buf());
                }
            }
        }
        files.sort();
        files
    };
    let names = listing(&a);
    assert_eq!(names.len(), 14);
    assert_eq!(names, listing(&b));
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
    let out = leap(&["gen-dataset", "--n", "0", "--out", p(&dir.path().join("c"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_reports() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    assert!(leap(&["gen-dataset", "--n", "20", "--size", "32", "--out", p(&ds)]).status.success());
    let manifests: Vec<_> = fs::read_dir(&ds)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|f| f.extension().is_some_and(|x| x != "ppm"))
        .collect();
    assert_eq!(manifests.len(), 2, "{manifests:?}");

    let report = dir.path().join("r.json");
    let mut saw_map = false;
    for m in &manifests {
        let out = leap(&["eval", "--manifest", p(m), "--report", p(&report)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert_eq!(stdout.lines().count(), 3);
        let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        if let Some(aps) = v["variants"][0]["ap_per_threshold"].as_array() {
            saw_map = true;
            assert_eq!(aps.len(), 10);
            assert!(stdout.contains("map="));
        } else {
            assert!(stdout.contains("top1="));
        }
        let out = leap(&["eval", "--manifest", p(m), "--variants", "original,bright"]);
        assert_eq!(out.status.code(), Some(1));
    }
    assert!(saw_map);
}

#[test]
fn predict_output() {
    let out = leap(&["predict", "--infer-ms", "13", "--preprocess-ms", "28", "--read-ms", "1", "--write-ms", "50"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("si_ms=92\n"), "{text}");
    assert!(text.contains("psi_lower_bound_ms=50\n"), "{text}");

    let out = leap(&["predict"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("si_fps=unbounded") && text.contains("psi_max_fps=unbounded"), "{text}");

    let out = leap(&["predict", "--infer-ms", "-4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("leap.conf");
    fs::write(&cfg, "# test\nmode = pipelined\nframes = 9\nwrite_ms = 0\n").unwrap();
    let out = leap(&["--config", p(&cfg), "run", "--frames", "4"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("mode=pipelined") && text.contains("frames=4 "), "{text}");

    fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(leap(&["--config", p(&cfg), "run"]).status.code(), Some(1));
}

#[test]
fn async_with_slow_backend_drops_frames() {
    let out = leap(&["run", "--mode", "async", "--frames", "30", "--fps", "200", "--infer-ms", "40"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success());
    let dropped: u64 = text
        .split_whitespace()
        .find_map(|t| t.strip_prefix("dropped_frames="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(dropped > 0, "{text}");
}

#[test]
fn geometry_mismatch_is_rejected_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let sink = dir.path().join("out");
    let out = leap(&["run", "--width", "32", "--height", "32", "--rows", "16", "--sink", p(&sink)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!sink.exists());
}
