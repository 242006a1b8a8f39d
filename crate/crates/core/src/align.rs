//! Clock synchronization between an event stream and a frame sequence.
//!
//! The frame sequence is split into interleaved lower-rate subsequences.
//! For every subsequence and every candidate offset on a fixed grid, the
//! absolute differences of successive subsequence frames are compared by
//! SSIM with normalized accumulations of the events that fall in the same
//! intervals shifted by the candidate offset. The best (subsequence,
//! candidate) pair gives the offset.

use rayon::prelude::*;

use crate::accum::{accumulate_slice, normalize_accum, Polarity};
use crate::error::{Error, Result};
use crate::event::EventStream;
use crate::frame::{FrameSequence, GrayFrame, Timed};
use crate::metrics::{frame_abs_diff, ssim};
use crate::registration::{build_projection, Projection, SpatialRegistration};

/// Where the SSIM comparison happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompareGeometry {
    /// Events are projected into the frame camera's pixel grid.
    #[default]
    FrameCamera,
    /// Difference images are resampled into the event sensor's pixel grid.
    EventSensor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignConfig {
    pub n_candidates: usize,
    /// Candidate spacing, µs.
    pub step: u64,
    /// Nominal accumulation window, µs; also the default coarse scan step.
    pub window: u64,
    pub interleave: usize,
    pub ssim_frames: usize,
    /// Index (within each subsequence) of the first frame used.
    pub first_frame: usize,
    pub polarity: Polarity,
    pub geometry: CompareGeometry,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            n_candidates: 250,
            step: 100,
            window: 25_000,
            interleave: 3,
            ssim_frames: 10,
            first_frame: 0,
            polarity: Polarity::Signed,
            geometry: CompareGeometry::FrameCamera,
        }
    }
}

impl AlignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_candidates == 0
            || self.step == 0
            || self.window == 0
            || self.interleave == 0
            || self.ssim_frames == 0
        {
            return Err(Error::invalid("alignment parameters must all be positive"));
        }
        Ok(())
    }

    /// Total span of candidate offsets, µs.
    pub fn search_span(&self) -> u64 {
        self.n_candidates as u64 * self.step
    }
}

/// Result of the fine temporal search.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalAlignment {
    pub subsequence_index: usize,
    pub k: usize,
    /// Event-clock time minus frame-clock time, µs.
    pub offset_us: i64,
    pub score: f64,
    /// `score_curve[m][k]`: mean SSIM of subsequence `m` at candidate `k`.
    pub score_curve: Vec<Vec<f64>>,
    /// Offset of candidate 0; candidate `k` is at `start_us + k * step`.
    pub start_us: i64,
    pub step: u64,
    /// Candidates whose windows held no events at all (scored -1).
    pub empty_candidates: Vec<(usize, usize)>,
}

impl TemporalAlignment {
    pub fn candidate_offset(&self, k: usize) -> i64 {
        self.start_us + k as i64 * self.step as i64
    }

    /// One line: `subseq=<m> k=<k> offset_us=<o> ssim=<s>`.
    pub fn report_line(&self) -> String {
        format!(
            "subseq={} k={} offset_us={} ssim={:.6}",
            self.subsequence_index, self.k, self.offset_us, self.score
        )
    }

    /// Score table as `subseq,k,ssim` CSV with a header row.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("subseq,k,ssim\n");
        for (m, row) in self.score_curve.iter().enumerate() {
            for (k, s) in row.iter().enumerate() {
                out.push_str(&format!("{m},{k},{s:.9}\n"));
            }
        }
        out
    }
}

/// Splits a sequence into `factor` interleaved subsequences: subsequence `m`
/// holds frames `m, m + factor, m + 2 factor, ...`.
pub fn split_interleaved<F: Timed + Clone>(
    seq: &FrameSequence<F>,
    factor: usize,
) -> Result<Vec<FrameSequence<F>>> {
    if factor == 0 {
        return Err(Error::invalid("interleave factor must be at least 1"));
    }
    if factor > seq.len() {
        return Err(Error::invalid(format!(
            "interleave factor {factor} exceeds sequence length {}",
            seq.len()
        )));
    }
    let fps = seq.nominal_fps.divided(factor as u32);
    (0..factor)
        .map(|m| {
            let frames = seq.frames().iter().skip(m).step_by(factor).cloned().collect();
            FrameSequence::new(frames, fps)
        })
        .collect()
}

/// Events and difference images brought into one pixel grid.
struct Comparison {
    events: EventStream,
    width: usize,
    height: usize,
}

impl Comparison {
    fn new(
        events: &EventStream,
        reg: &SpatialRegistration,
        frame_dims: (usize, usize),
        geometry: CompareGeometry,
    ) -> Result<Self> {
        match geometry {
            CompareGeometry::FrameCamera => {
                let (w, h) = frame_dims;
                let proj = build_projection(*reg, 0, w as u16, h as u16)?;
                let (events, _) = proj.project_stream(events);
                Ok(Comparison {
                    events,
                    width: w,
                    height: h,
                })
            }
            CompareGeometry::EventSensor => Ok(Comparison {
                events: events.clone(),
                width: events.width() as usize,
                height: events.height() as usize,
            }),
        }
    }

    /// Brings a frame-camera difference image into the comparison grid.
    fn target(
        &self,
        diff: GrayFrame,
        reg: &SpatialRegistration,
        geometry: CompareGeometry,
    ) -> Result<GrayFrame> {
        match geometry {
            CompareGeometry::FrameCamera => Ok(diff),
            CompareGeometry::EventSensor => {
                let proj = build_projection(*reg, 0, diff.width() as u16, diff.height() as u16)?;
                let mut pixels = Vec::with_capacity(self.width * self.height);
                for y in 0..self.height {
                    for x in 0..self.width {
                        let [u, v] = proj.map_point(x as f64, y as f64);
                        pixels.push(diff.sample_clamped(u, v));
                    }
                }
                Ok(GrayFrame::from_raw(self.width, self.height, pixels, diff.t))
            }
        }
    }

    /// Normalized accumulation over `[a, b)`, clamped at time zero. `None`
    /// when no event falls in the window.
    fn accumulation(&self, a: i64, b: i64, mode: Polarity) -> Option<GrayFrame> {
        let (a, b) = (a.max(0) as u64, b.max(0) as u64);
        let slice = self.events.window(a, b);
        if slice.is_empty() {
            return None;
        }
        let acc = accumulate_slice(slice, self.width, self.height, a, b.saturating_sub(a).max(1), mode);
        Some(normalize_accum(&acc))
    }
}

/// One difference image and the frame-clock interval it spans.
struct DiffImage {
    image: GrayFrame,
    t_a: u64,
    t_b: u64,
}

/// Fine search over `n_candidates` offsets `coarse + k * step`.
///
/// Event windows are anchored on each subsequence's own frame times, so the
/// candidate offset is directly the clock offset for every subsequence and no
/// per-subsequence phase correction is needed. Ties go to the smallest
/// subsequence index, then the smallest `k`.
pub fn temporal_search(
    rgb: &FrameSequence<GrayFrame>,
    events: &EventStream,
    coarse: i64,
    reg: &SpatialRegistration,
    cfg: &AlignConfig,
) -> Result<TemporalAlignment> {
    cfg.validate()?;
    let needed = cfg.interleave * (cfg.first_frame + cfg.ssim_frames + 1);
    if rgb.len() < needed {
        return Err(Error::invalid(format!(
            "temporal search needs at least {needed} frames, got {}",
            rgb.len()
        )));
    }
    let subs = split_interleaved(rgb, cfg.interleave)?;
    let sub_period = rgb.nominal_fps.divided(cfg.interleave as u32).period_us();
    if cfg.search_span() as f64 > 2.0 * sub_period {
        return Err(Error::invalid(format!(
            "candidate span {} us exceeds two subsequence periods ({sub_period:.0} us)",
            cfg.search_span()
        )));
    }
    let dims = rgb.geometry().expect("non-empty sequence");
    let cmp = Comparison::new(events, reg, dims, cfg.geometry)?;

    let diffs: Vec<Vec<DiffImage>> = subs
        .iter()
        .map(|sub| {
            let fr = sub.frames();
            (cfg.first_frame..cfg.first_frame + cfg.ssim_frames)
                .map(|f| {
                    let image = cmp.target(frame_abs_diff(&fr[f], &fr[f + 1])?, reg, cfg.geometry)?;
                    Ok(DiffImage {
                        image,
                        t_a: fr[f].t,
                        t_b: fr[f + 1].t,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let n_sub = cfg.interleave;
    let cells: Vec<(usize, usize)> = (0..n_sub)
        .flat_map(|m| (0..cfg.n_candidates).map(move |k| (m, k)))
        .collect();
    let scored: Vec<Result<Option<f64>>> = cells
        .par_iter()
        .map(|&(m, k)| {
            let offset = coarse + (k as u64 * cfg.step) as i64;
            let mut sum = 0.0;
            let mut any = false;
            for d in &diffs[m] {
                let acc = cmp.accumulation(d.t_a as i64 + offset, d.t_b as i64 + offset, cfg.polarity);
                any |= acc.is_some();
                let acc = acc.unwrap_or_else(|| GrayFrame::filled(cmp.width, cmp.height, 0.0, 0));
                sum += ssim(&acc, &d.image)?;
            }
            Ok(any.then(|| sum / diffs[m].len() as f64))
        })
        .collect();

    let mut curve = vec![vec![0.0; cfg.n_candidates]; n_sub];
    let mut empty = Vec::new();
    for (&(m, k), s) in cells.iter().zip(scored) {
        curve[m][k] = match s? {
            Some(v) => v,
            None => {
                empty.push((m, k));
                -1.0
            }
        };
    }
    if empty.len() == cells.len() {
        return Err(Error::EmptyCoverage(
            "no candidate window contains any event".into(),
        ));
    }

    let (mut best_m, mut best_k) = (0, 0);
    for m in 0..n_sub {
        for k in 0..cfg.n_candidates {
            if curve[m][k] > curve[best_m][best_k] {
                (best_m, best_k) = (m, k);
            }
        }
    }
    Ok(TemporalAlignment {
        subsequence_index: best_m,
        k: best_k,
        offset_us: coarse + (best_k as u64 * cfg.step) as i64,
        score: curve[best_m][best_k],
        score_curve: curve,
        start_us: coarse,
        step: cfg.step,
        empty_candidates: empty,
    })
}

/// Scores explicit offsets with one difference image (the most active frame
/// pair about `span` apart) and returns the best offset. Ties go to the
/// earliest offset in `offsets`.
fn scan_offsets(
    rgb: &FrameSequence<GrayFrame>,
    events: &EventStream,
    reg: &SpatialRegistration,
    span: u64,
    offsets: &[i64],
) -> Result<i64> {
    let frames = rgb.frames();
    let period = rgb.nominal_fps.period_us();
    let gap = ((span as f64 / period).round() as usize).max(1);
    if frames.len() <= gap {
        return Err(Error::invalid(format!(
            "coarse scan needs more than {gap} frames, got {}",
            frames.len()
        )));
    }
    let (mut best_pair, mut best_energy) = (0, -1.0);
    for i in 0..frames.len() - gap {
        let d = frame_abs_diff(&frames[i], &frames[i + gap])?;
        let energy: f64 = d.pixels().iter().sum();
        if energy > best_energy {
            (best_pair, best_energy) = (i, energy);
        }
    }
    let (fa, fb) = (&frames[best_pair], &frames[best_pair + gap]);
    let diff = frame_abs_diff(fa, fb)?;
    let dims = rgb.geometry().expect("non-empty sequence");
    let cmp = Comparison::new(events, reg, dims, CompareGeometry::FrameCamera)?;

    let scores: Vec<f64> = offsets
        .par_iter()
        .map(|&o| {
            let acc = cmp.accumulation(fa.t as i64 + o, fb.t as i64 + o, Polarity::Signed);
            match acc {
                Some(a) => ssim(&a, &diff),
                None => Ok(-1.0),
            }
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    Ok(offsets[best])
}

/// Offsets `n * step` whose window around frames `[t_a, t_b]` lies within
/// the event time span.
fn grid_offsets(rgb: &FrameSequence<GrayFrame>, events: &EventStream, step: u64) -> Result<Vec<i64>> {
    let (ev_min, ev_max) = events
        .time_span()
        .ok_or_else(|| Error::EmptyCoverage("event stream is empty".into()))?;
    let frames = rgb.frames();
    let (t_first, t_last) = (frames[0].t as i64, frames[frames.len() - 1].t as i64);
    if ev_max - ev_min < step {
        return Err(Error::invalid(format!(
            "event stream spans {} us, shorter than one {step} us window",
            ev_max - ev_min
        )));
    }
    let step = step as i64;
    let lo = (ev_min as i64 - t_last).div_euclid(step);
    let hi = (ev_max as i64 - t_first).div_euclid(step) + 1;
    Ok((lo..=hi).map(|n| n * step).collect())
}

/// Coarse clock offset on a grid of multiples of `scan_step`, comparing one
/// normalized accumulation with one frame difference per grid point.
pub fn coarse_offset(
    rgb: &FrameSequence<GrayFrame>,
    events: &EventStream,
    reg: &SpatialRegistration,
    scan_step: u64,
) -> Result<i64> {
    if rgb.is_empty() {
        return Err(Error::invalid("empty frame sequence"));
    }
    if scan_step == 0 {
        return Err(Error::invalid("scan step must be positive"));
    }
    let offsets = grid_offsets(rgb, events, scan_step)?;
    scan_offsets(rgb, events, reg, scan_step, &offsets)
}

/// Runs the coarse scan (twice: on the `cfg.window` grid, then a five times
/// finer grid around the winner) unless `manual_coarse` is given, and
/// centres the fine search on the result.
pub fn synchronize(
    rgb: &FrameSequence<GrayFrame>,
    events: &EventStream,
    reg: &SpatialRegistration,
    cfg: &AlignConfig,
    manual_coarse: Option<i64>,
) -> Result<TemporalAlignment> {
    cfg.validate()?;
    let center = match manual_coarse {
        Some(c) => c,
        None => {
            let first = coarse_offset(rgb, events, reg, cfg.window)?;
            let fine_step = (cfg.window / 5).max(1) as i64;
            let around: Vec<i64> = (-5..=5).map(|i| first + i * fine_step).collect();
            scan_offsets(rgb, events, reg, cfg.window, &around)?
        }
    };
    let start = center - (cfg.search_span() / 2) as i64;
    temporal_search(rgb, events, start, reg, cfg)
}

/// Convenience: the projection implied by an alignment and registration.
pub fn projection_for(
    alignment: &TemporalAlignment,
    reg: SpatialRegistration,
    target: (usize, usize),
) -> Result<Projection> {
    build_projection(reg, alignment.offset_us, target.0 as u16, target.1 as u16)
}
