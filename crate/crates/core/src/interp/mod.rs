//! Intermediate frame generation from two bounding frames and the events
//! recorded between them.
//!
//! Four stages, each usable on its own:
//!
//! * synthesis: [`synthesis_integrate`] applies the per-pixel event sum to a
//!   boundary frame, inverting the log-intensity event model;
//! * warping: [`estimate_flow`] and [`warp_frame`] move a boundary frame along
//!   block-matched event motion;
//! * refinement: [`refine_warp`] corrects a warped frame toward the
//!   synthesized one with a residual flow;
//! * blending: [`blend`] mixes the four candidates with fixed convex weights.
//!
//! [`interpolate`] runs the stages for a list of targets, [`upscale_sequence`]
//! fills a whole sequence, and [`evaluate_grid`] scores subsample-then-upscale
//! round trips against held-out frames.

pub mod flow;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use flow::{
    apply_residual, estimate_flow, refine_warp, warp_frame, BlockMatchConfig, Direction,
    FlowField,
};

use crate::accum::{accumulate_slice, Polarity};
use crate::error::{Error, Result};
use crate::event::EventStream;
use crate::frame::{Fps, Frame, FrameSequence, GrayFrame};
use crate::metrics::{psnr, ssim};

/// Interpolation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Event integration from both boundary frames.
    Synthesis,
    /// Flow warping of both boundary frames.
    Warp,
    /// Synthesis, warping and refinement combined.
    #[default]
    Blend,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synthesis" => Ok(Method::Synthesis),
            "warp" => Ok(Method::Warp),
            "blend" => Ok(Method::Blend),
            other => Err(Error::invalid(format!(
                "unknown method {other:?} (expected synthesis, warp or blend)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Synthesis => "synthesis",
            Method::Warp => "warp",
            Method::Blend => "blend",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpParams {
    /// Contrast threshold of the event model.
    pub contrast: f64,
    /// Log-intensity floor of the event model.
    pub epsilon: f64,
    pub method: Method,
    pub flow: BlockMatchConfig,
    /// Weight of the warped frames against the synthesized ones.
    pub alpha: f64,
}

impl Default for InterpParams {
    fn default() -> Self {
        InterpParams {
            contrast: 0.15,
            epsilon: 1.0,
            method: Method::Blend,
            flow: BlockMatchConfig::default(),
            alpha: 0.5,
        }
    }
}

impl InterpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.contrast.is_finite() && self.contrast > 0.0) {
            return Err(Error::invalid(format!("contrast must be positive, got {}", self.contrast)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        self.flow.validate()
    }
}

/// Two bounding frames, the events between them, and the offsets `dt` (from
/// `left.t`) at which to produce frames.
#[derive(Debug, Clone)]
pub struct InterpolationRequest {
    pub left: Frame,
    pub right: Frame,
    pub events: EventStream,
    pub targets: Vec<u64>,
    pub params: InterpParams,
}

impl InterpolationRequest {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let (t_l, t_r) = (self.left.t(), self.right.t());
        if t_l >= t_r {
            return Err(Error::invalid(format!(
                "left frame time {t_l} must precede right frame time {t_r}"
            )));
        }
        if matches!(
            (&self.left, &self.right),
            (Frame::Gray(_), Frame::Rgb(_)) | (Frame::Rgb(_), Frame::Gray(_))
        ) {
            return Err(Error::invalid("left and right frames must be the same kind"));
        }
        let (lw, lh) = self.left.dims();
        let (rw, rh) = self.right.dims();
        if (lw, lh) != (rw, rh) {
            return Err(Error::Geometry { a_w: lw, a_h: lh, b_w: rw, b_h: rh });
        }
        check_event_geometry(&self.events, lw, lh)?;
        let interval = t_r - t_l;
        for (i, &dt) in self.targets.iter().enumerate() {
            if dt == 0 || dt >= interval {
                return Err(Error::invalid(format!(
                    "target offset {dt} outside the open interval (0, {interval})"
                )));
            }
            if i > 0 && dt <= self.targets[i - 1] {
                return Err(Error::invalid("target offsets must be strictly increasing"));
            }
        }
        Ok(())
    }
}

fn check_event_geometry(events: &EventStream, w: usize, h: usize) -> Result<()> {
    let (ew, eh) = (events.width() as usize, events.height() as usize);
    if (ew, eh) != (w, h) {
        return Err(Error::Geometry { a_w: w, a_h: h, b_w: ew, b_h: eh });
    }
    Ok(())
}

/// Applies the event sum between `base.t` and `t_target` to `base`:
/// `clamp((base + epsilon) * exp(contrast * S) - epsilon, 0, 255)`.
///
/// Forward integration sums events in `[base.t, t_target)`; backward
/// integration (from a later frame) sums `[t_target, base.t)` and negates.
pub fn synthesis_integrate(
    base: &GrayFrame,
    events: &EventStream,
    t_target: u64,
    contrast: f64,
    epsilon: f64,
    direction: Direction,
) -> Result<GrayFrame> {
    check_event_geometry(events, base.width(), base.height())?;
    let (slice, sign) = match direction {
        Direction::Forward if t_target >= base.t => (events.window(base.t, t_target), 1.0),
        Direction::Backward if t_target <= base.t => (events.window(t_target, base.t), -1.0),
        _ => {
            return Err(Error::invalid(format!(
                "target time {t_target} not reachable {} from frame at {}",
                if direction == Direction::Forward { "forward" } else { "backward" },
                base.t
            )))
        }
    };
    let sum = accumulate_slice(slice, base.width(), base.height(), 0, 1, Polarity::Signed);
    let pixels = base
        .pixels()
        .iter()
        .zip(&sum.values)
        .map(|(&b, &s)| {
            if s == 0 {
                b
            } else {
                ((b + epsilon) * (contrast * sign * s as f64).exp() - epsilon).clamp(0.0, 255.0)
            }
        })
        .collect();
    GrayFrame::new(base.width(), base.height(), pixels, t_target)
}

/// Convex combination with weights `alpha(1-tau)`, `alpha*tau`,
/// `(1-alpha)(1-tau)` and `(1-alpha)*tau`. Output carries `synth_left.t`.
pub fn blend(
    warp_left: &GrayFrame,
    warp_right: &GrayFrame,
    synth_left: &GrayFrame,
    synth_right: &GrayFrame,
    tau: f64,
    alpha: f64,
) -> Result<GrayFrame> {
    for f in [warp_right, synth_left, synth_right] {
        warp_left.same_geometry(f)?;
    }
    if !(0.0..=1.0).contains(&tau) || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "blend weights out of range: tau={tau} alpha={alpha}"
        )));
    }
    let pixels = (0..warp_left.pixels().len())
        .map(|i| {
            let q = [
                warp_left.pixels()[i],
                warp_right.pixels()[i],
                synth_left.pixels()[i],
                synth_right.pixels()[i],
            ];
            let warp = q[0] + tau * (q[1] - q[0]);
            let synth = q[2] + tau * (q[3] - q[2]);
            let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (synth + alpha * (warp - synth)).clamp(lo, hi)
        })
        .collect();
    Ok(GrayFrame::from_raw(warp_left.width(), warp_left.height(), pixels, synth_left.t))
}

fn interpolate_plane(
    left: &GrayFrame,
    right: &GrayFrame,
    events: &EventStream,
    flow: Option<&FlowField>,
    t: u64,
    params: &InterpParams,
) -> Result<GrayFrame> {
    let tau = (t - left.t) as f64 / (right.t - left.t) as f64;
    let (c, eps) = (params.contrast, params.epsilon);
    let mut out = match (params.method, flow) {
        (Method::Synthesis, _) | (_, None) => {
            let sl = synthesis_integrate(left, events, t, c, eps, Direction::Forward)?;
            let sr = synthesis_integrate(right, events, t, c, eps, Direction::Backward)?;
            blend(&sl, &sr, &sl, &sr, tau, 0.0)?
        }
        (Method::Warp, Some(flow)) => {
            let wl = warp_frame(left, flow, tau, Direction::Forward)?;
            let wr = warp_frame(right, flow, tau, Direction::Backward)?;
            blend(&wl, &wr, &wl, &wr, tau, 1.0)?
        }
        (Method::Blend, Some(flow)) => {
            let sl = synthesis_integrate(left, events, t, c, eps, Direction::Forward)?;
            let sr = synthesis_integrate(right, events, t, c, eps, Direction::Backward)?;
            let wl = warp_frame(left, flow, tau, Direction::Forward)?;
            let wr = warp_frame(right, flow, tau, Direction::Backward)?;
            let (block, radius) = (params.flow.block, params.flow.radius);
            let wl = apply_residual(&wl, &refine_warp(&wl, &sl, block, radius)?)?;
            let wr = apply_residual(&wr, &refine_warp(&wr, &sr, block, radius)?)?;
            blend(&wl, &wr, &sl, &sr, tau, params.alpha)?
        }
    };
    out.t = t;
    Ok(out)
}

/// Frames at absolute times strictly between the two boundary frames.
fn interpolate_times(
    left: &Frame,
    right: &Frame,
    events: &EventStream,
    times: &[u64],
    params: &InterpParams,
) -> Result<Vec<Frame>> {
    let (t_l, t_r) = (left.t(), right.t());
    let flow = match params.method {
        Method::Synthesis => None,
        _ => Some(estimate_flow(events, t_l, t_l + (t_r - t_l) / 2, t_r, &params.flow)?),
    };
    let (lp, rp) = (left.planes(), right.planes());
    times
        .par_iter()
        .map(|&t| {
            let planes = lp
                .iter()
                .zip(&rp)
                .map(|(l, r)| interpolate_plane(l, r, events, flow.as_ref(), t, params))
                .collect::<Result<Vec<_>>>()?;
            left.like_from_planes(&planes)
        })
        .collect()
}

fn rate_for(interval_us: u64, parts: u64) -> Fps {
    let num = 1_000_000u64 * parts;
    let (mut a, mut b) = (num, interval_us);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    let (n, d) = (num / a, interval_us / a);
    match (u32::try_from(n), u32::try_from(d)) {
        (Ok(n), Ok(d)) => Fps { num: n, den: d },
        _ => Fps::integer((1e6 * parts as f64 / interval_us as f64).round().max(1.0) as u32),
    }
}

/// Produces one frame per target offset, stamped `left.t + dt`, strictly
/// inside the open interval between the boundary frames.
pub fn interpolate(request: &InterpolationRequest) -> Result<FrameSequence<Frame>> {
    request.validate()?;
    let t_l = request.left.t();
    let times: Vec<u64> = request.targets.iter().map(|dt| t_l + dt).collect();
    let frames = interpolate_times(
        &request.left,
        &request.right,
        &request.events,
        &times,
        &request.params,
    )?;
    let interval = request.right.t() - t_l;
    FrameSequence::new(frames, rate_for(interval, request.targets.len() as u64 + 1))
}

/// `factor - 1` evenly spaced offsets, rounded to whole microseconds.
pub fn upscale_targets(interval_us: u64, factor: u32) -> Result<Vec<u64>> {
    if factor < 1 {
        return Err(Error::invalid("upscale factor must be at least 1"));
    }
    if interval_us < factor as u64 {
        return Err(Error::invalid(format!(
            "interval of {interval_us} us too short for factor {factor}"
        )));
    }
    let f = factor as u64;
    Ok((1..f).map(|j| (2 * j * interval_us + f) / (2 * f)).collect())
}

/// Inserts `factor - 1` frames between every consecutive pair, keeping the
/// originals: `M` frames become `M + (M - 1)(factor - 1)`.
pub fn upscale_sequence(
    seq: &FrameSequence<Frame>,
    events: &EventStream,
    factor: u32,
    params: &InterpParams,
) -> Result<FrameSequence<Frame>> {
    params.validate()?;
    let frames = seq.frames();
    let mut out = Vec::with_capacity(frames.len() + frames.len().saturating_sub(1) * factor.saturating_sub(1) as usize);
    for (i, pair) in frames.windows(2).enumerate() {
        if i == 0 {
            out.push(pair[0].clone());
        }
        let request = InterpolationRequest {
            left: pair[0].clone(),
            right: pair[1].clone(),
            events: events.clone(),
            targets: upscale_targets(pair[1].t() - pair[0].t(), factor)?,
            params: *params,
        };
        request.validate()?;
        let times: Vec<u64> = request.targets.iter().map(|dt| pair[0].t() + dt).collect();
        out.extend(interpolate_times(&pair[0], &pair[1], events, &times, params)?);
        out.push(pair[1].clone());
    }
    if frames.len() == 1 {
        out.push(frames[0].clone());
    }
    FrameSequence::new(out, seq.nominal_fps.multiplied(factor.max(1)))
}

/// Contrast that best predicts `right` from `left` by forward integration
/// (least squares, golden-section search over `[0.01, 1]`).
pub fn calibrate_contrast(
    left: &GrayFrame,
    right: &GrayFrame,
    events: &EventStream,
    epsilon: f64,
) -> Result<f64> {
    left.same_geometry(right)?;
    if right.t <= left.t {
        return Err(Error::invalid("calibration needs right.t > left.t"));
    }
    let cost = |c: f64| -> Result<f64> {
        let pred = synthesis_integrate(left, events, right.t, c, epsilon, Direction::Forward)?;
        Ok(crate::metrics::mse(pred.pixels(), right.pixels()))
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.01, 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cost(c)?, cost(d)?);
    for _ in 0..60 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d)?;
        }
    }
    Ok((a + b) / 2.0)
}

/// Scores for one in-between position of a subsample-and-upscale run,
/// averaged over every keyframe pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPosition {
    /// 1-based index of the frame between two keyframes.
    pub position: usize,
    pub frames: usize,
    pub psnr: f64,
    pub ssim: f64,
    /// Same scores for repeating the left keyframe.
    pub baseline_psnr: f64,
    pub baseline_ssim: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub factor: u32,
    pub input_fps: Fps,
    pub method: Method,
    pub positions: Vec<GridPosition>,
}

impl GridReport {
    fn mean(&self, f: impl Fn(&GridPosition) -> f64) -> f64 {
        let n: usize = self.positions.iter().map(|p| p.frames).sum();
        self.positions.iter().map(|p| f(p) * p.frames as f64).sum::<f64>() / n as f64
    }

    pub fn mean_psnr(&self) -> f64 {
        self.mean(|p| p.psnr)
    }

    pub fn mean_ssim(&self) -> f64 {
        self.mean(|p| p.ssim)
    }

    pub fn baseline_psnr(&self) -> f64 {
        self.mean(|p| p.baseline_psnr)
    }

    pub fn baseline_ssim(&self) -> f64 {
        self.mean(|p| p.baseline_ssim)
    }

    pub fn csv_header() -> &'static str {
        "input_fps,factor,method,position,frames,psnr,ssim,baseline_psnr,baseline_ssim"
    }

    pub fn csv_rows(&self) -> String {
        self.positions
            .iter()
            .map(|p| {
                format!(
                    "{},{},{},{},{},{:.4},{:.6},{:.4},{:.6}\n",
                    self.input_fps,
                    self.factor,
                    self.method,
                    p.position,
                    p.frames,
                    p.psnr,
                    p.ssim,
                    p.baseline_psnr,
                    p.baseline_ssim
                )
            })
            .collect()
    }

    pub fn text(&self) -> String {
        let mut s = format!(
            "input_fps={} factor={} method={} psnr={:.3} ssim={:.4} baseline_psnr={:.3} baseline_ssim={:.4}\n",
            self.input_fps,
            self.factor,
            self.method,
            self.mean_psnr(),
            self.mean_ssim(),
            self.baseline_psnr(),
            self.baseline_ssim()
        );
        for p in &self.positions {
            s.push_str(&format!(
                "  position={} frames={} psnr={:.3} ssim={:.4} baseline_psnr={:.3} baseline_ssim={:.4}\n",
                p.position, p.frames, p.psnr, p.ssim, p.baseline_psnr, p.baseline_ssim
            ));
        }
        s
    }
}

/// Keeps every `factor`-th frame of `originals`, regenerates the dropped
/// ones at their original timestamps, and scores them against the originals
/// (on luma for RGB input). One report per factor.
pub fn evaluate_grid(
    originals: &FrameSequence<Frame>,
    events: &EventStream,
    factors: &[u32],
    params: &InterpParams,
) -> Result<Vec<GridReport>> {
    params.validate()?;
    let frames = originals.frames();
    factors
        .iter()
        .map(|&factor| {
            let f = factor as usize;
            if f < 2 || frames.len() < f + 1 {
                return Err(Error::invalid(format!(
                    "factor {factor} needs at least {} frames, have {}",
                    f + 1,
                    frames.len()
                )));
            }
            let mut sums = vec![[0.0f64; 4]; f - 1];
            let mut counts = vec![0usize; f - 1];
            let mut k = 0;
            while k + f < frames.len() {
                let (left, right) = (&frames[k], &frames[k + f]);
                let times: Vec<u64> = frames[k + 1..k + f].iter().map(Frame::t).collect();
                let made = interpolate_times(left, right, events, &times, params)?;
                let left_gray = left.to_gray();
                for (j, (m, o)) in made.iter().zip(&frames[k + 1..k + f]).enumerate() {
                    let (mg, og) = (m.to_gray(), o.to_gray());
                    sums[j][0] += psnr(&mg, &og)?;
                    sums[j][1] += ssim(&mg, &og)?;
                    sums[j][2] += psnr(&left_gray, &og)?;
                    sums[j][3] += ssim(&left_gray, &og)?;
                    counts[j] += 1;
                }
                k += f;
            }
            let positions = sums
                .iter()
                .zip(&counts)
                .enumerate()
                .map(|(j, (s, &n))| GridPosition {
                    position: j + 1,
                    frames: n,
                    psnr: s[0] / n as f64,
                    ssim: s[1] / n as f64,
                    baseline_psnr: s[2] / n as f64,
                    baseline_ssim: s[3] / n as f64,
                })
                .collect();
            Ok(GridReport {
                factor,
                input_fps: originals.nominal_fps.divided(factor),
                method: params.method,
                positions,
            })
        })
        .collect()
}
