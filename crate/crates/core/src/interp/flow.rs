//! Block-matching motion estimation and backward warping.

use rayon::prelude::*;

use crate::accum::{accumulate_slice, normalize_accum, Polarity};
use crate::error::{Error, Result};
use crate::event::EventStream;
use crate::frame::GrayFrame;

/// Dense displacement field, pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize) -> Self {
        FlowField {
            width,
            height,
            u: vec![0.0; width * height],
            v: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }

    pub fn magnitude(&self, x: usize, y: usize) -> f64 {
        let (u, v) = self.at(x, y);
        u.hypot(v)
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().chain(&self.v).all(|&c| c == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockMatchConfig {
    pub block: usize,
    pub radius: usize,
    /// Minimum number of events in a block for its vector to count.
    pub energy_floor: f64,
}

impl Default for BlockMatchConfig {
    fn default() -> Self {
        BlockMatchConfig {
            block: 16,
            radius: 8,
            energy_floor: 4.0,
        }
    }
}

impl BlockMatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block < 4 {
            return Err(Error::invalid("block size must be at least 4"));
        }
        if self.radius < 1 {
            return Err(Error::invalid("search radius must be at least 1"));
        }
        Ok(())
    }
}

/// Block grid over a frame; edge blocks may be smaller.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Blocks {
    pub width: usize,
    pub height: usize,
    pub size: usize,
    pub nx: usize,
    pub ny: usize,
}

impl Blocks {
    pub fn new(width: usize, height: usize, size: usize) -> Result<Self> {
        if width < size || height < size {
            return Err(Error::invalid(format!(
                "{width}x{height} frame is smaller than one {size}x{size} block"
            )));
        }
        Ok(Blocks {
            width,
            height,
            size,
            nx: width.div_ceil(size),
            ny: height.div_ceil(size),
        })
    }

    pub fn bounds(&self, bx: usize, by: usize) -> (usize, usize, usize, usize) {
        let x0 = bx * self.size;
        let y0 = by * self.size;
        (
            x0,
            y0,
            (x0 + self.size).min(self.width),
            (y0 + self.size).min(self.height),
        )
    }

    fn center(&self, b: usize, len: usize) -> f64 {
        let lo = b * self.size;
        let hi = (lo + self.size).min(len);
        (lo + hi - 1) as f64 / 2.0
    }

    /// Matching window: the block grown by half a block on every side,
    /// clipped to the frame.
    pub fn support(&self, bx: usize, by: usize) -> (usize, usize, usize, usize) {
        let (x0, y0, x1, y1) = self.bounds(bx, by);
        let m = self.size / 2;
        (
            x0.saturating_sub(m),
            y0.saturating_sub(m),
            (x1 + m).min(self.width),
            (y1 + m).min(self.height),
        )
    }

    pub fn block_of(&self, x: usize, y: usize) -> (usize, usize) {
        (x / self.size, y / self.size)
    }
}

/// Integer displacement `s` minimising `sum |target(x) - source(x - s)|` over
/// the block, i.e. the block content of `source` moved by `s` lands on
/// `target`. Source samples outside the frame clamp to the edge. Ties go to
/// the shortest displacement, then scan order. Returns the displacement, its
/// SAD and the SAD at zero displacement.
fn match_block(
    source: &GrayFrame,
    target: &GrayFrame,
    blocks: &Blocks,
    bx: usize,
    by: usize,
    radius: usize,
) -> ((i64, i64), f64, f64) {
    let (x0, y0, x1, y1) = blocks.support(bx, by);
    let r = radius as i64;
    let (wmax, hmax) = (source.width() as i64 - 1, source.height() as i64 - 1);
    let sad = |sx: i64, sy: i64| -> f64 {
        let mut acc = 0.0;
        for y in y0..y1 {
            let src_y = (y as i64 - sy).clamp(0, hmax) as usize;
            for x in x0..x1 {
                let src_x = (x as i64 - sx).clamp(0, wmax) as usize;
                acc += (target.get(x, y) - source.get(src_x, src_y)).abs();
            }
        }
        acc
    };
    let zero = sad(0, 0);
    let mut best = ((0i64, 0i64), zero);
    for sy in -r..=r {
        for sx in -r..=r {
            let s = sad(sx, sy);
            let (bs, bv) = best;
            let shorter = sx * sx + sy * sy < bs.0 * bs.0 + bs.1 * bs.1;
            if s < bv || (s == bv && shorter) {
                best = ((sx, sy), s);
            }
        }
    }
    (best.0, best.1, zero)
}

/// Bilinear interpolation of per-block vectors placed at block centres,
/// using only blocks marked valid (weights renormalized). Pixels with no
/// valid neighbouring block get zero.
fn densify(blocks: &Blocks, vectors: &[(f64, f64)], valid: &[bool]) -> FlowField {
    let mut field = FlowField::zeros(blocks.width, blocks.height);
    let axis = |p: usize, n: usize, len: usize| -> (usize, usize, f64) {
        let pf = p as f64;
        let b = (p / blocks.size).min(n - 1);
        let c = blocks.center(b, len);
        let (lo, hi) = if pf >= c {
            (b, (b + 1).min(n - 1))
        } else {
            (b.saturating_sub(1), b)
        };
        if lo == hi {
            return (lo, hi, 0.0);
        }
        let (cl, ch) = (blocks.center(lo, len), blocks.center(hi, len));
        (lo, hi, ((pf - cl) / (ch - cl)).clamp(0.0, 1.0))
    };
    for y in 0..blocks.height {
        let (y0, y1, fy) = axis(y, blocks.ny, blocks.height);
        for x in 0..blocks.width {
            let (x0, x1, fx) = axis(x, blocks.nx, blocks.width);
            let corners = [
                (x0, y0, (1.0 - fx) * (1.0 - fy)),
                (x1, y0, fx * (1.0 - fy)),
                (x0, y1, (1.0 - fx) * fy),
                (x1, y1, fx * fy),
            ];
            let (mut u, mut v, mut wsum) = (0.0, 0.0, 0.0);
            for (bx, by, w) in corners {
                let i = by * blocks.nx + bx;
                if w > 0.0 && valid[i] {
                    u += w * vectors[i].0;
                    v += w * vectors[i].1;
                    wsum += w;
                }
            }
            if wsum > 0.0 {
                let i = y * blocks.width + x;
                field.u[i] = u / wsum;
                field.v[i] = v / wsum;
            }
        }
    }
    field
}

/// Event-driven flow over `[t_start, t_end)`: block matching between the
/// normalized accumulations of `[t_start, t_mid)` and `[t_mid, t_end)`,
/// scaled by two to span the full interval. Blocks with fewer than
/// `energy_floor` events carry no vector.
pub fn estimate_flow(
    events: &EventStream,
    t_start: u64,
    t_mid: u64,
    t_end: u64,
    cfg: &BlockMatchConfig,
) -> Result<FlowField> {
    cfg.validate()?;
    if !(t_start <= t_mid && t_mid <= t_end) {
        return Err(Error::invalid(format!(
            "flow interval times out of order: {t_start}, {t_mid}, {t_end}"
        )));
    }
    let (w, h) = (events.width() as usize, events.height() as usize);
    let blocks = Blocks::new(w, h, cfg.block)?;
    let first_slice = events.window(t_start, t_mid);
    let second_slice = events.window(t_mid, t_end);
    if first_slice.is_empty() && second_slice.is_empty() {
        return Ok(FlowField::zeros(w, h));
    }
    let first = normalize_accum(&accumulate_slice(first_slice, w, h, t_start, (t_mid - t_start).max(1), Polarity::Signed));
    let second = normalize_accum(&accumulate_slice(second_slice, w, h, t_mid, (t_end - t_mid).max(1), Polarity::Signed));

    let mut counts = vec![0usize; blocks.nx * blocks.ny];
    for e in first_slice.iter().chain(second_slice) {
        let (bx, by) = blocks.block_of(e.x as usize, e.y as usize);
        counts[by * blocks.nx + bx] += 1;
    }
    let valid: Vec<bool> = counts
        .iter()
        .map(|&c| c > 0 && c as f64 >= cfg.energy_floor)
        .collect();
    let vectors: Vec<(f64, f64)> = (0..blocks.nx * blocks.ny)
        .into_par_iter()
        .map(|i| {
            if !valid[i] {
                return (0.0, 0.0);
            }
            let ((sx, sy), _, _) =
                match_block(&first, &second, &blocks, i % blocks.nx, i / blocks.nx, cfg.radius);
            (2.0 * sx as f64, 2.0 * sy as f64)
        })
        .collect();
    Ok(densify(&blocks, &vectors, &valid))
}

/// Which boundary frame is being warped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// From the left (earlier) frame.
    Forward,
    /// From the right (later) frame.
    Backward,
}

/// Backward warping with bilinear sampling and edge clamping. From the left
/// frame `out(x) = frame(x - tau * flow(x))`; from the right frame
/// `out(x) = frame(x + (1 - tau) * flow(x))`.
pub fn warp_frame(
    frame: &GrayFrame,
    flow: &FlowField,
    tau: f64,
    direction: Direction,
) -> Result<GrayFrame> {
    if flow.width != frame.width() || flow.height != frame.height() {
        return Err(Error::Geometry {
            a_w: frame.width(),
            a_h: frame.height(),
            b_w: flow.width,
            b_h: flow.height,
        });
    }
    let scale = match direction {
        Direction::Forward => -tau,
        Direction::Backward => 1.0 - tau,
    };
    let w = frame.width();
    let mut pixels = vec![0.0; w * frame.height()];
    pixels
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(y, row)| {
            for (x, out) in row.iter_mut().enumerate() {
                let (u, v) = flow.at(x, y);
                *out = frame.sample_clamped(x as f64 + scale * u, y as f64 + scale * v);
            }
        });
    Ok(GrayFrame::from_raw(w, frame.height(), pixels, frame.t))
}

/// Residual flow moving `warped` toward `synthesized`, by block matching on
/// intensities. Applying it (forward warp with tau = 1) never increases the
/// mean absolute difference to `synthesized` on any block: blocks where it
/// would are reset to zero residual.
pub fn refine_warp(
    warped: &GrayFrame,
    synthesized: &GrayFrame,
    block: usize,
    radius: usize,
) -> Result<FlowField> {
    BlockMatchConfig {
        block,
        radius,
        energy_floor: 0.0,
    }
    .validate()?;
    warped.same_geometry(synthesized)?;
    let blocks = Blocks::new(warped.width(), warped.height(), block)?;
    let n = blocks.nx * blocks.ny;
    let vectors: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let ((sx, sy), _, zero) =
                match_block(warped, synthesized, &blocks, i % blocks.nx, i / blocks.nx, radius);
            if zero == 0.0 {
                (0.0, 0.0)
            } else {
                (sx as f64, sy as f64)
            }
        })
        .collect();
    let mut field = densify(&blocks, &vectors, &vec![true; n]);
    let refined = warp_frame(warped, &field, 1.0, Direction::Forward)?;
    for by in 0..blocks.ny {
        for bx in 0..blocks.nx {
            let (x0, y0, x1, y1) = blocks.bounds(bx, by);
            let (mut before, mut after) = (0.0, 0.0);
            for y in y0..y1 {
                for x in x0..x1 {
                    let s = synthesized.get(x, y);
                    before += (warped.get(x, y) - s).abs();
                    after += (refined.get(x, y) - s).abs();
                }
            }
            if after > before {
                for y in y0..y1 {
                    for x in x0..x1 {
                        let i = y * field.width + x;
                        field.u[i] = 0.0;
                        field.v[i] = 0.0;
                    }
                }
            }
        }
    }
    Ok(field)
}

/// Applies a residual from [`refine_warp`].
pub fn apply_residual(warped: &GrayFrame, residual: &FlowField) -> Result<GrayFrame> {
    warp_frame(warped, residual, 1.0, Direction::Forward)
}
