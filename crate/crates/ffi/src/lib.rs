//! C ABI over the `evsync` library.
//!
//! Every fallible function returns an [`EvsStatus`]; on failure a message is
//! stored per thread and can be read with [`evs_last_error_message`]. Library
//! objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Plain records ([`EvsEvent`],
//! [`EvsRegistration`], ...) are passed by value or through caller-owned
//! pointers.
//!
//! Output handles are written only on success. Buffers returned by the
//! library (`evs_events_write_*`) are released with [`evs_buffer_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use evsync::accum::{accumulate_with, to_voxel_grid, Polarity};
use evsync::align::{synchronize, AlignConfig, CompareGeometry};
use evsync::event::{
    parse_events_binary, parse_events_csv, write_events_binary, write_events_csv, Event,
    EventStream,
};
use evsync::frame::{Fps, Frame, FrameSequence, GrayFrame, RgbFrame};
use evsync::interp::{interpolate, BlockMatchConfig, InterpParams, InterpolationRequest, Method};
use evsync::metrics::{psnr, ssim};
use evsync::registration::{build_projection, estimate_registration, FeaturePair, SpatialRegistration};
use evsync::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Malformed text input (bad field, polarity, ordering).
    Parse = 3,
    /// Malformed binary input or image (magic, truncation, counts).
    Format = 4,
    /// Mismatched frame or sensor dimensions.
    Geometry = 5,
    /// No events fell in any window that had to be scored.
    EmptyCoverage = 6,
    Io = 7,
    /// A panic was caught at the boundary. This indicates a library bug.
    Internal = 8,
}

/// One event: pixel, timestamp in µs, polarity (-1 or 1).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvsEvent {
    pub x: u16,
    pub y: u16,
    pub t: u64,
    pub p: i8,
}

/// `x_frame = r * (x_event - dx)`, likewise for y.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvsRegistration {
    pub dx: f64,
    pub dy: f64,
    pub r: f64,
}

/// A matched feature: event-sensor point and frame-camera point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvsFeaturePair {
    pub event_x: f64,
    pub event_y: f64,
    pub frame_x: f64,
    pub frame_y: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvsAlignConfig {
    pub n_candidates: usize,
    pub step_us: u64,
    pub window_us: u64,
    pub interleave: usize,
    pub ssim_frames: usize,
    pub first_frame: usize,
    /// Count events regardless of polarity.
    pub unsigned_polarity: bool,
    /// Compare in the event sensor's grid instead of the frame camera's.
    pub compare_in_event_grid: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvsAlignment {
    pub subsequence_index: usize,
    pub k: usize,
    /// Event-clock time minus frame-clock time, µs.
    pub offset_us: i64,
    pub score: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvsMethod {
    Synthesis = 0,
    Warp = 1,
    Blend = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvsInterpParams {
    pub contrast: f64,
    pub epsilon: f64,
    pub method: EvsMethod,
    pub block: usize,
    pub radius: usize,
    pub energy_floor: f64,
    pub alpha: f64,
}

/// Opaque event stream.
pub struct EvsEventStream(EventStream);

/// Opaque gray or RGB frame with a timestamp.
pub struct EvsFrame(Frame);

/// Opaque, growable list of frames with a nominal frame rate.
pub struct EvsSequence {
    frames: Vec<Frame>,
    fps: Fps,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> EvsStatus {
    match err {
        Error::Parse { .. } | Error::NonMonotone { .. } | Error::Polarity(_) => EvsStatus::Parse,
        Error::BadMagic { .. }
        | Error::Truncated { .. }
        | Error::CountMismatch { .. }
        | Error::Image(_) => EvsStatus::Format,
        Error::OutOfBounds { .. } | Error::Unsorted { .. } | Error::InvalidArgument(_) => {
            EvsStatus::InvalidArgument
        }
        Error::Geometry { .. } => EvsStatus::Geometry,
        Error::EmptyCoverage(_) => EvsStatus::EmptyCoverage,
        Error::Io(_) => EvsStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EvsStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EvsStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            EvsStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {msg}"));
            EvsStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

/// An empty slice may come with a null pointer.
unsafe fn input<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn check_len(have: usize, want: usize, what: &str) -> Result<(), Fail> {
    if have != want {
        return Err(Error::InvalidArgument(format!("{what} holds {have} values, expected {want}")).into());
    }
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

fn give_buffer(bytes: Vec<u8>, data: &mut *mut u8, len: &mut usize) {
    let b = bytes.into_boxed_slice();
    *len = b.len();
    *data = Box::into_raw(b) as *mut u8;
}

// ---------------------------------------------------------------- errors

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn evs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, nul-terminated name of a status code.
#[no_mangle]
pub extern "C" fn evs_status_name(status: EvsStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        EvsStatus::Ok => b"ok\0",
        EvsStatus::NullPointer => b"null pointer\0",
        EvsStatus::InvalidArgument => b"invalid argument\0",
        EvsStatus::Parse => b"parse error\0",
        EvsStatus::Format => b"format error\0",
        EvsStatus::Geometry => b"geometry mismatch\0",
        EvsStatus::EmptyCoverage => b"empty event coverage\0",
        EvsStatus::Io => b"i/o error\0",
        EvsStatus::Internal => b"internal error\0",
    };
    s.as_ptr() as *const c_char
}

/// Releases a buffer returned by the library.
///
/// # Safety
/// `data` and `len` must come from one `evs_events_write_*` call, or `data`
/// must be null.
#[no_mangle]
pub unsafe extern "C" fn evs_buffer_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}

// ---------------------------------------------------------------- events

/// Builds a stream from an array of events, which must be sorted by time and
/// inside the sensor.
///
/// # Safety
/// `events` must point to `n` records (or be null with `n == 0`); `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_events_new(
    width: u16,
    height: u16,
    events: *const EvsEvent,
    n: usize,
    out_stream: *mut *mut EvsEventStream,
) -> EvsStatus {
    guard(|| {
        let out_stream = out(out_stream, "out_stream")?;
        let evs = input(events, n, "events")?
            .iter()
            .map(|e| Event::new(e.x, e.y, e.t, e.p))
            .collect();
        *out_stream = boxed(EvsEventStream(EventStream::new(width, height, evs)?));
        Ok(())
    })
}

/// Parses EVT-CSV text (with its `width=,height=` header).
///
/// # Safety
/// `data` must point to `len` readable bytes; `out_stream` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_events_parse_csv(
    data: *const u8,
    len: usize,
    out_stream: *mut *mut EvsEventStream,
) -> EvsStatus {
    guard(|| {
        let out_stream = out(out_stream, "out_stream")?;
        let s = parse_events_csv(input(data, len, "data")?)?;
        *out_stream = boxed(EvsEventStream(s));
        Ok(())
    })
}

/// Parses an EVB1 binary stream.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out_stream` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_events_parse_binary(
    data: *const u8,
    len: usize,
    out_stream: *mut *mut EvsEventStream,
) -> EvsStatus {
    guard(|| {
        let out_stream = out(out_stream, "out_stream")?;
        let s = parse_events_binary(input(data, len, "data")?)?;
        *out_stream = boxed(EvsEventStream(s));
        Ok(())
    })
}

/// Serializes to EVB1. Free the result with [`evs_buffer_free`].
///
/// # Safety
/// `stream` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_events_write_binary(
    stream: *const EvsEventStream,
    out_data: *mut *mut u8,
    out_len: *mut usize,
) -> EvsStatus {
    guard(|| {
        let s = deref(stream, "stream")?;
        let (d, l) = (out(out_data, "out_data")?, out(out_len, "out_len")?);
        give_buffer(write_events_binary(&s.0), d, l);
        Ok(())
    })
}

/// Serializes to EVT-CSV (not nul-terminated). Free the result with
/// [`evs_buffer_free`].
///
/// # Safety
/// `stream` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_events_write_csv(
    stream: *const EvsEventStream,
    out_data: *mut *mut u8,
    out_len: *mut usize,
) -> EvsStatus {
    guard(|| {
        let s = deref(stream, "stream")?;
        let (d, l) = (out(out_data, "out_data")?, out(out_len, "out_len")?);
        give_buffer(write_events_csv(&s.0).into_bytes(), d, l);
        Ok(())
    })
}

/// # Safety
/// `stream` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn evs_events_len(stream: *const EvsEventStream) -> usize {
    stream.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `stream` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn evs_events_width(stream: *const EvsEventStream) -> u16 {
    stream.as_ref().map_or(0, |s| s.0.width())
}

/// # Safety
/// `stream` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn evs_events_height(stream: *const EvsEventStream) -> u16 {
    stream.as_ref().map_or(0, |s| s.0.height())
}

/// Copies event `index` into `out_event`.
///
/// # Safety
/// `stream` must be a live handle; `out_event` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_events_get(
    stream: *const EvsEventStream,
    index: usize,
    out_event: *mut EvsEvent,
) -> EvsStatus {
    guard(|| {
        let s = deref(stream, "stream")?;
        let o = out(out_event, "out_event")?;
        let e = s.0.events().get(index).ok_or_else(|| {
            Error::InvalidArgument(format!("index {index} out of range for {} events", s.0.len()))
        })?;
        *o = EvsEvent { x: e.x, y: e.y, t: e.t, p: e.p };
        Ok(())
    })
}

/// # Safety
/// `stream` must be a handle from this library, or null. It must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn evs_events_free(stream: *mut EvsEventStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

/// Per-pixel polarity sums (or counts when `unsigned_polarity`) over
/// `[t0, t0 + window)`, written row-major into `out_values`, which must hold
/// exactly `width * height` values.
///
/// # Safety
/// `stream` must be a live handle; `out_values` must point to `len` writable
/// values.
#[no_mangle]
pub unsafe extern "C" fn evs_accumulate(
    stream: *const EvsEventStream,
    t0: u64,
    window: u64,
    unsigned_polarity: bool,
    out_values: *mut i32,
    len: usize,
) -> EvsStatus {
    guard(|| {
        let s = deref(stream, "stream")?;
        let dst = output(out_values, len, "out_values")?;
        let mode = if unsigned_polarity { Polarity::Unsigned } else { Polarity::Signed };
        let acc = accumulate_with(&s.0, t0, window, mode)?;
        check_len(len, acc.values.len(), "out_values")?;
        dst.copy_from_slice(&acc.values);
        Ok(())
    })
}

/// Temporal voxel grid with `bins` bins over `[t0, t1)`, written bin-major
/// then row-major into `out_values` (`bins * width * height` values).
///
/// # Safety
/// `stream` must be a live handle; `out_values` must point to `len` writable
/// values.
#[no_mangle]
pub unsafe extern "C" fn evs_voxel_grid(
    stream: *const EvsEventStream,
    t0: u64,
    t1: u64,
    bins: usize,
    out_values: *mut f64,
    len: usize,
) -> EvsStatus {
    guard(|| {
        let s = deref(stream, "stream")?;
        let dst = output(out_values, len, "out_values")?;
        let grid = to_voxel_grid(&s.0, t0, t1, bins)?;
        check_len(len, grid.data.len(), "out_values")?;
        dst.copy_from_slice(&grid.data);
        Ok(())
    })
}

// ---------------------------------------------------------------- frames

/// Creates a frame from `width * height * channels` intensities in [0, 255],
/// row-major and channel-interleaved. `channels` is 1 (gray) or 3 (RGB).
///
/// # Safety
/// `pixels` must point to `len` readable values; `out_frame` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn evs_frame_new(
    width: usize,
    height: usize,
    channels: usize,
    pixels: *const f64,
    len: usize,
    t: u64,
    out_frame: *mut *mut EvsFrame,
) -> EvsStatus {
    guard(|| {
        let o = out(out_frame, "out_frame")?;
        let px = input(pixels, len, "pixels")?.to_vec();
        let frame = match channels {
            1 => Frame::Gray(GrayFrame::new(width, height, px, t)?),
            3 => Frame::Rgb(RgbFrame::new(width, height, px, t)?),
            c => return Err(Error::InvalidArgument(format!("channels must be 1 or 3, got {c}")).into()),
        };
        *o = boxed(EvsFrame(frame));
        Ok(())
    })
}

/// # Safety
/// `frame` must be a handle from this library, or null. It must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn evs_frame_free(frame: *mut EvsFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}

/// # Safety
/// `frame` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn evs_frame_width(frame: *const EvsFrame) -> usize {
    frame.as_ref().map_or(0, |f| f.0.dims().0)
}

/// # Safety
/// `frame` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn evs_frame_height(frame: *const EvsFrame) -> usize {
    frame.as_ref().map_or(0, |f| f.0.dims().1)
}

/// 1 for gray, 3 for RGB, 0 for null.
///
/// # Safety
/// `frame` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn evs_frame_channels(frame: *const EvsFrame) -> usize {
    frame.as_ref().map_or(0, |f| match f.0 {
        Frame::Gray(_) => 1,
        Frame::Rgb(_) => 3,
    })
}

/// # Safety
/// `frame` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn evs_frame_time(frame: *const EvsFrame) -> u64 {
    frame.as_ref().map_or(0, |f| f.0.t())
}

/// Copies the pixels out; `len` must equal `width * height * channels`.
///
/// # Safety
/// `frame` must be a live handle; `out_pixels` must point to `len` writable
/// values.
#[no_mangle]
pub unsafe extern "C" fn evs_frame_copy_pixels(
    frame: *const EvsFrame,
    out_pixels: *mut f64,
    len: usize,
) -> EvsStatus {
    guard(|| {
        let f = deref(frame, "frame")?;
        let dst = output(out_pixels, len, "out_pixels")?;
        let src = match &f.0 {
            Frame::Gray(g) => g.pixels(),
            Frame::Rgb(c) => c.pixels(),
        };
        check_len(len, src.len(), "out_pixels")?;
        dst.copy_from_slice(src);
        Ok(())
    })
}

/// SSIM of the grayscale versions of two frames.
///
/// # Safety
/// `a` and `b` must be live handles; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_ssim(a: *const EvsFrame, b: *const EvsFrame, out_value: *mut f64) -> EvsStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        *out(out_value, "out_value")? = ssim(&a.0.to_gray(), &b.0.to_gray())?;
        Ok(())
    })
}

/// PSNR in dB of the grayscale versions of two frames; infinite when equal.
///
/// # Safety
/// `a` and `b` must be live handles; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_psnr(a: *const EvsFrame, b: *const EvsFrame, out_value: *mut f64) -> EvsStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        *out(out_value, "out_value")? = psnr(&a.0.to_gray(), &b.0.to_gray())?;
        Ok(())
    })
}

// ------------------------------------------------------------- sequences

/// Creates an empty sequence with nominal rate `fps_num / fps_den`.
///
/// # Safety
/// `out_seq` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_sequence_new(fps_num: u32, fps_den: u32, out_seq: *mut *mut EvsSequence) -> EvsStatus {
    guard(|| {
        let o = out(out_seq, "out_seq")?;
        let fps = Fps::new(fps_num, fps_den)?;
        *o = boxed(EvsSequence { frames: Vec::new(), fps });
        Ok(())
    })
}

/// Appends a copy of `frame`. Timestamps must increase and all frames must
/// share kind and geometry.
///
/// # Safety
/// `seq` and `frame` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn evs_sequence_push(seq: *mut EvsSequence, frame: *const EvsFrame) -> EvsStatus {
    guard(|| {
        let s = out(seq, "seq")?;
        let f = deref(frame, "frame")?;
        if let Some(last) = s.frames.last() {
            if f.0.t() <= last.t() {
                return Err(Error::InvalidArgument(format!(
                    "frame time {} does not follow {}",
                    f.0.t(),
                    last.t()
                ))
                .into());
            }
            let (same_kind, (lw, lh), (fw, fh)) = (
                matches!((last, &f.0), (Frame::Gray(_), Frame::Gray(_)) | (Frame::Rgb(_), Frame::Rgb(_))),
                last.dims(),
                f.0.dims(),
            );
            if (lw, lh) != (fw, fh) {
                return Err(Error::Geometry { a_w: lw, a_h: lh, b_w: fw, b_h: fh }.into());
            }
            if !same_kind {
                return Err(Error::InvalidArgument("cannot mix gray and RGB frames".into()).into());
            }
        }
        s.frames.push(f.0.clone());
        Ok(())
    })
}

/// # Safety
/// `seq` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn evs_sequence_len(seq: *const EvsSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.frames.len())
}

/// Returns a new frame handle holding a copy of frame `index`.
///
/// # Safety
/// `seq` must be a live handle; `out_frame` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_sequence_get(
    seq: *const EvsSequence,
    index: usize,
    out_frame: *mut *mut EvsFrame,
) -> EvsStatus {
    guard(|| {
        let s = deref(seq, "seq")?;
        let o = out(out_frame, "out_frame")?;
        let f = s.frames.get(index).ok_or_else(|| {
            Error::InvalidArgument(format!("index {index} out of range for {} frames", s.frames.len()))
        })?;
        *o = boxed(EvsFrame(f.clone()));
        Ok(())
    })
}

/// # Safety
/// `seq` must be a handle from this library, or null. It must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn evs_sequence_free(seq: *mut EvsSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

// ------------------------------------------------------------ geometry

/// Shift from the first pair, scale from the distance ratio of both.
///
/// # Safety
/// `pairs` must point to two records; `out_reg` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_registration_estimate(
    pairs: *const EvsFeaturePair,
    out_reg: *mut EvsRegistration,
) -> EvsStatus {
    guard(|| {
        let p = input(pairs, 2, "pairs")?;
        let o = out(out_reg, "out_reg")?;
        let conv = |f: &EvsFeaturePair| FeaturePair {
            event: [f.event_x, f.event_y],
            frame: [f.frame_x, f.frame_y],
        };
        let reg = estimate_registration(conv(&p[0]), conv(&p[1]))?;
        *o = EvsRegistration { dx: reg.dx, dy: reg.dy, r: reg.r };
        Ok(())
    })
}

/// Projects events into a `target_width x target_height` frame-camera grid
/// with clock offset `offset_us` (event time minus frame time). Events that
/// land outside, or before time zero, are dropped and counted.
///
/// # Safety
/// `stream` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_project_events(
    stream: *const EvsEventStream,
    reg: EvsRegistration,
    offset_us: i64,
    target_width: u16,
    target_height: u16,
    out_stream: *mut *mut EvsEventStream,
    out_dropped: *mut usize,
) -> EvsStatus {
    guard(|| {
        let s = deref(stream, "stream")?;
        let o = out(out_stream, "out_stream")?;
        let d = out(out_dropped, "out_dropped")?;
        let proj = build_projection(
            SpatialRegistration { dx: reg.dx, dy: reg.dy, r: reg.r },
            offset_us,
            target_width,
            target_height,
        )?;
        let (projected, dropped) = proj.project_stream(&s.0);
        *o = boxed(EvsEventStream(projected));
        *d = dropped;
        Ok(())
    })
}

// ----------------------------------------------------------- alignment

/// Fills `out_cfg` with the default search: 250 candidates 100 µs apart,
/// 25 ms windows, 3 subsequences, 10 frames each.
///
/// # Safety
/// `out_cfg` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_align_config_default(out_cfg: *mut EvsAlignConfig) -> EvsStatus {
    guard(|| {
        let d = AlignConfig::default();
        *out(out_cfg, "out_cfg")? = EvsAlignConfig {
            n_candidates: d.n_candidates,
            step_us: d.step,
            window_us: d.window,
            interleave: d.interleave,
            ssim_frames: d.ssim_frames,
            first_frame: d.first_frame,
            unsigned_polarity: d.polarity == Polarity::Unsigned,
            compare_in_event_grid: d.geometry == CompareGeometry::EventSensor,
        };
        Ok(())
    })
}

/// Estimates the clock offset between a frame sequence and an event stream.
/// The coarse stage runs unless `use_manual_coarse` is set, in which case the
/// fine search is centred on `manual_coarse_us`.
///
/// # Safety
/// `seq` and `events` must be live handles; `reg` and `cfg` readable;
/// `out_alignment` writable.
#[no_mangle]
pub unsafe extern "C" fn evs_synchronize(
    seq: *const EvsSequence,
    events: *const EvsEventStream,
    reg: *const EvsRegistration,
    cfg: *const EvsAlignConfig,
    use_manual_coarse: bool,
    manual_coarse_us: i64,
    out_alignment: *mut EvsAlignment,
) -> EvsStatus {
    guard(|| {
        let s = deref(seq, "seq")?;
        let ev = deref(events, "events")?;
        let r = deref(reg, "reg")?;
        let c = deref(cfg, "cfg")?;
        let o = out(out_alignment, "out_alignment")?;
        let gray = FrameSequence::new(s.frames.iter().map(Frame::to_gray).collect(), s.fps)?;
        let config = AlignConfig {
            n_candidates: c.n_candidates,
            step: c.step_us,
            window: c.window_us,
            interleave: c.interleave,
            ssim_frames: c.ssim_frames,
            first_frame: c.first_frame,
            polarity: if c.unsigned_polarity { Polarity::Unsigned } else { Polarity::Signed },
            geometry: if c.compare_in_event_grid {
                CompareGeometry::EventSensor
            } else {
                CompareGeometry::FrameCamera
            },
        };
        let reg = SpatialRegistration::new(r.dx, r.dy, r.r)?;
        let manual = use_manual_coarse.then_some(manual_coarse_us);
        let a = synchronize(&gray, &ev.0, &reg, &config, manual)?;
        *o = EvsAlignment {
            subsequence_index: a.subsequence_index,
            k: a.k,
            offset_us: a.offset_us,
            score: a.score,
        };
        Ok(())
    })
}

// ------------------------------------------------------- interpolation

/// Fills `out_params` with the defaults: blend method, contrast 0.15,
/// epsilon 1, 16 px blocks, radius 8, alpha 0.5.
///
/// # Safety
/// `out_params` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evs_interp_params_default(out_params: *mut EvsInterpParams) -> EvsStatus {
    guard(|| {
        let d = InterpParams::default();
        *out(out_params, "out_params")? = EvsInterpParams {
            contrast: d.contrast,
            epsilon: d.epsilon,
            method: EvsMethod::Blend,
            block: d.flow.block,
            radius: d.flow.radius,
            energy_floor: d.flow.energy_floor,
            alpha: d.alpha,
        };
        Ok(())
    })
}

/// Generates frames at `left.t + targets[i]` from two boundary frames and the
/// events between them (already in frame-camera coordinates and clock).
/// Targets must increase strictly and lie strictly inside the interval.
///
/// # Safety
/// `left`, `right` and `events` must be live handles; `targets` must point to
/// `n_targets` values; `params` readable; `out_seq` writable.
#[no_mangle]
pub unsafe extern "C" fn evs_interpolate(
    left: *const EvsFrame,
    right: *const EvsFrame,
    events: *const EvsEventStream,
    targets: *const u64,
    n_targets: usize,
    params: *const EvsInterpParams,
    out_seq: *mut *mut EvsSequence,
) -> EvsStatus {
    guard(|| {
        let (l, r) = (deref(left, "left")?, deref(right, "right")?);
        let ev = deref(events, "events")?;
        let p = deref(params, "params")?;
        let o = out(out_seq, "out_seq")?;
        let request = InterpolationRequest {
            left: l.0.clone(),
            right: r.0.clone(),
            events: ev.0.clone(),
            targets: input(targets, n_targets, "targets")?.to_vec(),
            params: InterpParams {
                contrast: p.contrast,
                epsilon: p.epsilon,
                method: match p.method {
                    EvsMethod::Synthesis => Method::Synthesis,
                    EvsMethod::Warp => Method::Warp,
                    EvsMethod::Blend => Method::Blend,
                },
                flow: BlockMatchConfig {
                    block: p.block,
                    radius: p.radius,
                    energy_floor: p.energy_floor,
                },
                alpha: p.alpha,
            },
        };
        let seq = interpolate(&request)?;
        let fps = seq.nominal_fps;
        *o = boxed(EvsSequence { frames: seq.into_frames(), fps });
        Ok(())
    })
}
