//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "leap.h"

#define CHECK(c) do { if (!(c)) { fprintf(stderr, "failed: %s\n", #c); return 1; } } while (0)

int main(void) {
    LeapFrame *f = NULL, *eq = NULL;
    const uint8_t rgb[12] = {10, 10, 10, 10, 10, 10, 20, 20, 20, 30, 30, 30};
    CHECK(leap_frame_from_rgb(2, 2, rgb, sizeof rgb, &f) == LEAP_STATUS_OK);
    CHECK(leap_equalize(f, LEAP_COLOR_MODE_LUMA_GAIN, &eq) == LEAP_STATUS_OK);
    uint8_t out[12];
    CHECK(leap_frame_copy_rgb(eq, out, sizeof out) == LEAP_STATUS_OK);
    CHECK(out[0] == 0 && out[6] == 128 && out[9] == 255);

    uint32_t word = 0;
    CHECK(leap_gpio_pack(1080, 1920, false, &word) == LEAP_STATUS_OK);
    CHECK(word == 0x00780438u);

    LeapStageTimes t = {1, 43, 87, 153, 0, 50};
    LeapThroughput p;
    CHECK(leap_predict_times(&t, &p) == LEAP_STATUS_OK);
    CHECK(p.si_ms == 334.0 && p.psi_lower_bound_ms == 153.0);

    CHECK(leap_frame_new(0, 1, 0, 0, 0, &f) == LEAP_STATUS_DIMENSION);
    leap_frame_free(eq);
    leap_frame_free(f);
    puts(leap_status_message(LEAP_STATUS_OK));
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // .../target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn c_program_links_and_runs() {
    if !have_cc() {
        eprintln!("no C compiler on PATH; skipping");
        return;
    }
    let lib = target_dir().join("libleap_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let bin = dir.path().join("client");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
