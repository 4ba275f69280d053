//! C ABI over `leap-core`.
//!
//! Objects cross the boundary as opaque handles created by a `*_new` or
//! producer function and released with the matching `*_free`. Every fallible
//! call returns a [`LeapStatus`] and writes its result through an out pointer
//! only on success. Panics never unwind into C; they surface as
//! `LEAP_STATUS_PANIC`.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use leap_core::eval::{darken, iou, BoxF};
use leap_core::histeq::{self, pack_gpio, unpack_gpio, ColorMode, GpioWord, HistEqConfig, HistEqState, TimingMode};
use leap_core::inference::{classify_quadrant, QUADRANT_CLASSES};
use leap_core::scheduler::{predict_times, StageTimes};
use leap_core::video::ppm;
use leap_core::{Frame, LeapError, Pixel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeapStatus {
    Ok = 0,
    NullPointer = 1,
    Dimension = 2,
    Format = 3,
    Configuration = 4,
    Protocol = 5,
    ResetViolation = 6,
    Framing = 7,
    Range = 8,
    Consistency = 9,
    Worker = 10,
    Io = 11,
    BufferTooSmall = 12,
    InvalidString = 13,
    Panic = 14,
}

impl From<&LeapError> for LeapStatus {
    fn from(e: &LeapError) -> Self {
        match e {
            LeapError::Dimension { .. } => LeapStatus::Dimension,
            LeapError::Format(_) => LeapStatus::Format,
            LeapError::Configuration(_) => LeapStatus::Configuration,
            LeapError::Protocol(_) => LeapStatus::Protocol,
            LeapError::ResetViolation => LeapStatus::ResetViolation,
            LeapError::Framing(_) => LeapStatus::Framing,
            LeapError::Range(_) => LeapStatus::Range,
            LeapError::Consistency(_) => LeapStatus::Consistency,
            LeapError::Worker(_) => LeapStatus::Worker,
            LeapError::Io(_) | LeapError::Json(_) => LeapStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeapColorMode {
    LumaGain = 0,
    PerChannel = 1,
}

impl From<LeapColorMode> for ColorMode {
    fn from(m: LeapColorMode) -> Self {
        match m {
            LeapColorMode::LumaGain => ColorMode::LumaGain,
            LeapColorMode::PerChannel => ColorMode::PerChannel,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeapTimingMode {
    TwoPass = 0,
    FrameDelayed = 1,
}

impl From<LeapTimingMode> for TimingMode {
    fn from(m: LeapTimingMode) -> Self {
        match m {
            LeapTimingMode::TwoPass => TimingMode::TwoPass,
            LeapTimingMode::FrameDelayed => TimingMode::FrameDelayed,
        }
    }
}

/// Opaque RGB24 frame.
pub struct LeapFrame(Frame);

/// Opaque streaming equalizer.
pub struct LeapHistEq(HistEqState);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LeapStageTimes {
    pub read_ms: f64,
    pub preprocess_ms: f64,
    pub infer_ms: f64,
    pub postprocess_ms: f64,
    pub overlay_ms: f64,
    pub write_ms: f64,
}

/// Frame-rate fields are `INFINITY` when the matching time is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LeapThroughput {
    pub si_ms: f64,
    pub psi_lower_bound_ms: f64,
    pub si_fps: f64,
    pub psi_max_fps: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LeapGpioFields {
    pub rows: u32,
    pub cols: u32,
    pub reset: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LeapBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

fn guard(f: impl FnOnce() -> Result<(), LeapStatus>) -> LeapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LeapStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => LeapStatus::Panic,
    }
}

fn status(e: LeapError) -> LeapStatus {
    LeapStatus::from(&e)
}

unsafe fn frame_ref<'a>(f: *const LeapFrame) -> Result<&'a Frame, LeapStatus> {
    f.as_ref().map(|f| &f.0).ok_or(LeapStatus::NullPointer)
}

unsafe fn put_frame(out: *mut *mut LeapFrame, frame: Frame) {
    *out = Box::into_raw(Box::new(LeapFrame(frame)));
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, LeapStatus> {
    if p.is_null() {
        return Err(LeapStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| LeapStatus::InvalidString)
}

/// Static, NUL-terminated description of `status`.
#[no_mangle]
pub extern "C" fn leap_status_message(status: LeapStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        LeapStatus::Ok => b"ok\0",
        LeapStatus::NullPointer => b"null pointer argument\0",
        LeapStatus::Dimension => b"dimension outside 1..=4095\0",
        LeapStatus::Format => b"malformed image data\0",
        LeapStatus::Configuration => b"invalid configuration\0",
        LeapStatus::Protocol => b"register protocol violation\0",
        LeapStatus::ResetViolation => b"pixel pushed while held in reset\0",
        LeapStatus::Framing => b"stream framing error\0",
        LeapStatus::Range => b"value out of range\0",
        LeapStatus::Consistency => b"inconsistent input\0",
        LeapStatus::Worker => b"worker failure\0",
        LeapStatus::Io => b"i/o failure\0",
        LeapStatus::BufferTooSmall => b"output buffer too small\0",
        LeapStatus::InvalidString => b"string is not valid UTF-8\0",
        LeapStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Creates a `width` x `height` frame filled with one color.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn leap_frame_new(
    width: u32,
    height: u32,
    r: u8,
    g: u8,
    b: u8,
    out: *mut *mut LeapFrame,
) -> LeapStatus {
    guard(|| {
        if out.is_null() {
            return Err(LeapStatus::NullPointer);
        }
        let f = Frame::new(width, height, Pixel::new(r, g, b)).map_err(status)?;
        put_frame(out, f);
        Ok(())
    })
}

/// Creates a frame from packed RGB bytes, row-major, `len == width*height*3`.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` to writable storage
/// for one handle.
#[no_mangle]
pub unsafe extern "C" fn leap_frame_from_rgb(
    width: u32,
    height: u32,
    data: *const u8,
    len: usize,
    out: *mut *mut LeapFrame,
) -> LeapStatus {
    guard(|| {
        if data.is_null() || out.is_null() {
            return Err(LeapStatus::NullPointer);
        }
        let bytes = std::slice::from_raw_parts(data, len);
        let f = Frame::from_rgb_bytes(width, height, bytes).map_err(status)?;
        put_frame(out, f);
        Ok(())
    })
}

/// Releases a frame. Null is ignored.
///
/// # Safety
/// `frame` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn leap_frame_free(frame: *mut LeapFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}

/// Width in pixels, 0 for null.
///
/// # Safety
/// `frame` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn leap_frame_width(frame: *const LeapFrame) -> u32 {
    frame.as_ref().map_or(0, |f| f.0.width())
}

/// Height in pixels, 0 for null.
///
/// # Safety
/// `frame` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn leap_frame_height(frame: *const LeapFrame) -> u32 {
    frame.as_ref().map_or(0, |f| f.0.height())
}

/// Copies the frame's packed RGB bytes into `buf`.
///
/// # Safety
/// `frame` must be a live handle and `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn leap_frame_copy_rgb(frame: *const LeapFrame, buf: *mut u8, len: usize) -> LeapStatus {
    guard(|| {
        let f = frame_ref(frame)?;
        if buf.is_null() {
            return Err(LeapStatus::NullPointer);
        }
        let bytes = f.to_rgb_bytes();
        if len < bytes.len() {
            return Err(LeapStatus::BufferTooSmall);
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        Ok(())
    })
}

/// Loads a binary PPM (P6, maxval 255).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn leap_ppm_read(path: *const c_char, out: *mut *mut LeapFrame) -> LeapStatus {
    guard(|| {
        let path = path_arg(path)?;
        if out.is_null() {
            return Err(LeapStatus::NullPointer);
        }
        put_frame(out, ppm::load(path).map_err(status)?);
        Ok(())
    })
}

/// Saves a frame as binary PPM.
///
/// # Safety
/// `frame` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn leap_ppm_write(frame: *const LeapFrame, path: *const c_char) -> LeapStatus {
    guard(|| {
        let f = frame_ref(frame)?;
        ppm::save(f, path_arg(path)?).map_err(status)
    })
}

/// Equalizes a whole frame with its own histogram.
///
/// # Safety
/// `frame` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn leap_equalize(
    frame: *const LeapFrame,
    color_mode: LeapColorMode,
    out: *mut *mut LeapFrame,
) -> LeapStatus {
    guard(|| {
        let f = frame_ref(frame)?;
        if out.is_null() {
            return Err(LeapStatus::NullPointer);
        }
        let cfg = HistEqConfig {
            color_mode: color_mode.into(),
            ..HistEqConfig::for_frame(f)
        };
        put_frame(out, histeq::equalize(f, &cfg).map_err(status)?);
        Ok(())
    })
}

/// Floor-divides every channel by `divisor`.
///
/// # Safety
/// `frame` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn leap_darken(frame: *const LeapFrame, divisor: u32, out: *mut *mut LeapFrame) -> LeapStatus {
    guard(|| {
        let f = frame_ref(frame)?;
        if out.is_null() {
            return Err(LeapStatus::NullPointer);
        }
        put_frame(out, darken(f, divisor).map_err(status)?);
        Ok(())
    })
}

/// Packs the enhancement core's control word.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn leap_gpio_pack(rows: u32, cols: u32, reset: bool, out: *mut u32) -> LeapStatus {
    guard(|| {
        if out.is_null() {
            return Err(LeapStatus::NullPointer);
        }
        *out = pack_gpio(rows, cols, reset).map_err(status)?.0;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn leap_gpio_unpack(word: u32) -> LeapGpioFields {
    let (rows, cols, reset) = unpack_gpio(GpioWord(word));
    LeapGpioFields { rows, cols, reset }
}

/// Creates a streaming equalizer, released and ready for frames.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn leap_histeq_new(
    rows: u32,
    cols: u32,
    color_mode: LeapColorMode,
    timing_mode: LeapTimingMode,
    out: *mut *mut LeapHistEq,
) -> LeapStatus {
    guard(|| {
        if out.is_null() {
            return Err(LeapStatus::NullPointer);
        }
        let cfg = HistEqConfig::new(rows, cols, color_mode.into(), timing_mode.into()).map_err(status)?;
        let state = HistEqState::new(cfg).map_err(status)?;
        *out = Box::into_raw(Box::new(LeapHistEq(state)));
        Ok(())
    })
}

/// Writes a control word, as software would over the register interface.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn leap_histeq_configure(h: *mut LeapHistEq, word: u32) -> LeapStatus {
    guard(|| {
        let h = h.as_mut().ok_or(LeapStatus::NullPointer)?;
        h.0.configure(GpioWord(word)).map_err(status)
    })
}

/// Streams one frame through the equalizer. `*out` is set to the emitted
/// frame, or to null when the core emits nothing for this input.
///
/// # Safety
/// `h` and `frame` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn leap_histeq_push_frame(
    h: *mut LeapHistEq,
    frame: *const LeapFrame,
    out: *mut *mut LeapFrame,
) -> LeapStatus {
    guard(|| {
        let h = h.as_mut().ok_or(LeapStatus::NullPointer)?;
        let f = frame_ref(frame)?;
        if out.is_null() {
            return Err(LeapStatus::NullPointer);
        }
        match h.0.push_frame(f).map_err(status)? {
            Some(eq) => put_frame(out, eq),
            None => *out = ptr::null_mut(),
        }
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`leap_histeq_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn leap_histeq_free(h: *mut LeapHistEq) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Synchronous and pipelined frame-time prediction.
///
/// # Safety
/// `times` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn leap_predict_times(times: *const LeapStageTimes, out: *mut LeapThroughput) -> LeapStatus {
    guard(|| {
        let t = times.as_ref().ok_or(LeapStatus::NullPointer)?;
        let out = out.as_mut().ok_or(LeapStatus::NullPointer)?;
        let st = StageTimes::new(t.read_ms, t.preprocess_ms, t.infer_ms, t.postprocess_ms, t.overlay_ms, t.write_ms);
        st.validate().map_err(status)?;
        let p = predict_times(&st);
        *out = LeapThroughput {
            si_ms: p.si_ms,
            psi_lower_bound_ms: p.psi_lower_bound_ms,
            si_fps: p.si_fps.fps().unwrap_or(f64::INFINITY),
            psi_max_fps: p.psi_max_fps.fps().unwrap_or(f64::INFINITY),
        };
        Ok(())
    })
}

/// Number of scores written by [`leap_classify_quadrant`].
#[no_mangle]
pub extern "C" fn leap_quadrant_class_count() -> usize {
    QUADRANT_CLASSES + 1
}

/// Quadrant classifier scores (four quadrants then "none").
///
/// # Safety
/// `frame` must be a live handle and `scores` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn leap_classify_quadrant(
    frame: *const LeapFrame,
    threshold: f64,
    scores: *mut f64,
    len: usize,
) -> LeapStatus {
    guard(|| {
        let f = frame_ref(frame)?;
        if scores.is_null() {
            return Err(LeapStatus::NullPointer);
        }
        let s = classify_quadrant(f, threshold);
        if len < s.len() {
            return Err(LeapStatus::BufferTooSmall);
        }
        ptr::copy_nonoverlapping(s.as_ptr(), scores, s.len());
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn leap_iou(a: LeapBox, b: LeapBox) -> f64 {
    iou(BoxF::new(a.x, a.y, a.w, a.h), BoxF::new(b.x, b.y, b.w, b.h))
}
