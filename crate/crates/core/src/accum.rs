//! Frame-like summaries of event slices: signed accumulation images and
//! bilinear temporal voxel grids.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::event::{Event, EventStream};
use crate::frame::GrayFrame;

/// Per-pixel polarity sums over `[t0, t0 + window)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccumulationFrame {
    pub width: usize,
    pub height: usize,
    pub values: Vec<i32>,
    pub t0: u64,
    pub window: u64,
}

impl AccumulationFrame {
    pub fn zeros(width: usize, height: usize, t0: u64, window: u64) -> Self {
        AccumulationFrame {
            width,
            height,
            values: vec![0; width * height],
            t0,
            window,
        }
    }

    pub fn total(&self) -> i64 {
        self.values.iter().map(|&v| v as i64).sum()
    }

    /// Sum of absolute values.
    pub fn energy(&self) -> u64 {
        self.values.iter().map(|v| v.unsigned_abs() as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }
}

/// How polarities are combined when accumulating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarity {
    /// Signed sum of polarities.
    #[default]
    Signed,
    /// Event count, ignoring polarity.
    Unsigned,
}

pub(crate) fn accumulate_slice(
    events: &[Event],
    width: usize,
    height: usize,
    t0: u64,
    window: u64,
    mode: Polarity,
) -> AccumulationFrame {
    let mut frame = AccumulationFrame::zeros(width, height, t0, window);
    for e in events {
        let v = match mode {
            Polarity::Signed => e.p as i32,
            Polarity::Unsigned => 1,
        };
        frame.values[e.y as usize * width + e.x as usize] += v;
    }
    frame
}

/// Signed polarity sum per pixel over the half-open window
/// `[t0, t0 + window)`.
pub fn accumulate(stream: &EventStream, t0: u64, window: u64) -> Result<AccumulationFrame> {
    accumulate_with(stream, t0, window, Polarity::Signed)
}

pub fn accumulate_with(
    stream: &EventStream,
    t0: u64,
    window: u64,
    mode: Polarity,
) -> Result<AccumulationFrame> {
    if window == 0 {
        return Err(Error::invalid("accumulation window must be positive"));
    }
    Ok(accumulate_slice(
        stream.window(t0, t0.saturating_add(window)),
        stream.width() as usize,
        stream.height() as usize,
        t0,
        window,
        mode,
    ))
}

/// `n` frames, frame `k` covering `[t_start + k*period, t_start + k*period + window)`.
pub fn accumulate_sequence(
    stream: &EventStream,
    t_start: u64,
    period: u64,
    window: u64,
    n: usize,
) -> Result<Vec<AccumulationFrame>> {
    if n == 0 {
        return Err(Error::invalid("accumulate_sequence needs n >= 1"));
    }
    (0..n as u64)
        .map(|k| accumulate(stream, t_start + k * period, window))
        .collect()
}

/// Maps `|value|` linearly onto `[0, 255]` by the frame's largest magnitude.
/// An all-zero frame stays zero. The output timestamp is the window start.
pub fn normalize_accum(frame: &AccumulationFrame) -> GrayFrame {
    let max = frame.values.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    let pixels = if max == 0 {
        vec![0.0; frame.values.len()]
    } else {
        let scale = 255.0 / max as f64;
        frame
            .values
            .iter()
            .map(|&v| v.unsigned_abs() as f64 * scale)
            .collect()
    };
    GrayFrame::from_raw(frame.width, frame.height, pixels, frame.t0)
}

/// `bins` temporal planes of real-valued polarity mass over `[t0, t1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub width: usize,
    pub height: usize,
    pub bins: usize,
    /// Bin-major, then row-major.
    pub data: Vec<f64>,
    pub t0: u64,
    pub t1: u64,
}

impl VoxelGrid {
    pub fn bin(&self, b: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[b * n..(b + 1) * n]
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Writes the grid: a text line
    /// `VOXG <width> <height> <bins> <t0> <t1>` followed by
    /// `bins * height * width` little-endian f64 values, bin by bin.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(
            w,
            "VOXG {} {} {} {} {}",
            self.width, self.height, self.bins, self.t0, self.t1
        )?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::parse(1, "missing voxel grid header"))?;
        let header = std::str::from_utf8(&bytes[..nl])
            .map_err(|_| Error::parse(1, "header is not UTF-8"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "VOXG" {
            return Err(Error::parse(1, "expected VOXG <w> <h> <bins> <t0> <t1>"));
        }
        let num = |s: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::parse(1, format!("invalid number {s:?}")))
        };
        let (width, height, bins) = (
            num(fields[1])? as usize,
            num(fields[2])? as usize,
            num(fields[3])? as usize,
        );
        let (t0, t1) = (num(fields[4])?, num(fields[5])?);
        let payload = &bytes[nl + 1..];
        let expected = width * height * bins * 8;
        if payload.len() != expected {
            return Err(Error::Truncated {
                expected: nl + 1 + expected,
                available: bytes.len(),
            });
        }
        let data = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(VoxelGrid {
            width,
            height,
            bins,
            data,
            t0,
            t1,
        })
    }
}

/// Splits each event's polarity between the two bins bracketing its
/// normalized time `u = (t - t0) (B - 1) / (t1 - t0)`. Events outside
/// `[t0, t1)` are ignored.
pub fn to_voxel_grid(stream: &EventStream, t0: u64, t1: u64, bins: usize) -> Result<VoxelGrid> {
    if t1 <= t0 {
        return Err(Error::invalid(format!("voxel window [{t0}, {t1}) is empty")));
    }
    if bins == 0 {
        return Err(Error::invalid("voxel grid needs at least one bin"));
    }
    let (width, height) = (stream.width() as usize, stream.height() as usize);
    let plane = width * height;
    let mut data = vec![0.0; plane * bins];
    let span = (t1 - t0) as f64;
    for e in stream.window(t0, t1) {
        let idx = e.y as usize * width + e.x as usize;
        let p = e.p as f64;
        if bins == 1 {
            data[idx] += p;
            continue;
        }
        let u = (e.t - t0) as f64 * (bins - 1) as f64 / span;
        let lo = (u.floor() as usize).min(bins - 1);
        let frac = u - lo as f64;
        data[lo * plane + idx] += p * (1.0 - frac);
        if frac > 0.0 && lo + 1 < bins {
            data[(lo + 1) * plane + idx] += p * frac;
        }
    }
    Ok(VoxelGrid {
        width,
        height,
        bins,
        data,
        t0,
        t1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream(events: Vec<Event>) -> EventStream {
        EventStream::from_unsorted(8, 6, events).unwrap()
    }

    #[test]
    fn accumulate_cases() {
        let s = stream(vec![Event::new(2, 3, 50, 1)]);
        assert!(accumulate(&s, 100, 10).unwrap().is_zero());
        let a = accumulate(&s, 0, 100).unwrap();
        assert_eq!(a.values[3 * 8 + 2], 1);
        assert_eq!(a.total(), 1);
        assert!(accumulate(&s, 0, 0).is_err());
        let seq = accumulate_sequence(&s, 0, 100, 100, 1).unwrap();
        assert_eq!(seq, vec![a]);
    }

    #[test]
    fn candidate_offsets_span_one_window() {
        let s = stream(vec![]);
        let seq = accumulate_sequence(&s, 1_000, 100, 25_000, 250).unwrap();
        assert_eq!(seq.len(), 250);
        assert_eq!(seq[249].t0 - seq[0].t0 + 100, 25_000);
    }

    #[test]
    fn normalize_cases() {
        let mut f = AccumulationFrame::zeros(3, 1, 0, 1);
        assert!(normalize_accum(&f).pixels().iter().all(|&v| v == 0.0));
        f.values = vec![-2, 0, 1];
        assert_eq!(normalize_accum(&f).pixels(), &[255.0, 0.0, 127.5]);
    }

    #[test]
    fn voxel_cases() {
        let s = stream(vec![
            Event::new(1, 1, 0, 1),
            Event::new(2, 1, 50, -1),
            Event::new(3, 1, 99, 1),
        ]);
        let g = to_voxel_grid(&s, 0, 100, 5).unwrap();
        assert_eq!(g.bin(0)[8 + 1], 1.0);
        assert!((g.bin(2)[8 + 2] + 1.0).abs() < 1e-12);
        let one = to_voxel_grid(&s, 0, 100, 1).unwrap();
        let acc = accumulate(&s, 0, 100).unwrap();
        let as_f: Vec<f64> = acc.values.iter().map(|&v| v as f64).collect();
        assert_eq!(one.data, as_f);
        assert!(to_voxel_grid(&s, 5, 5, 3).is_err());
        assert!(to_voxel_grid(&s, 0, 5, 0).is_err());
    }

    #[test]
    fn voxel_file_round_trip() {
        let s = stream(vec![Event::new(1, 1, 10, 1), Event::new(7, 5, 77, -1)]);
        let g = to_voxel_grid(&s, 0, 100, 4).unwrap();
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        assert_eq!(VoxelGrid::read_from(buf.as_slice()).unwrap(), g);
        assert!(VoxelGrid::read_from(&buf[..buf.len() - 1]).is_err());
    }

    fn arb_events() -> impl Strategy<Value = Vec<Event>> {
        prop::collection::vec(
            (0u16..8, 0u16..6, 0u64..5000, prop::bool::ANY)
                .prop_map(|(x, y, t, p)| Event::new(x, y, t, if p { 1 } else { -1 })),
            0..300,
        )
    }

    proptest! {
        #[test]
        fn additivity(ev in arb_events(), a in 0u64..2000, w1 in 1u64..2000, w2 in 1u64..2000) {
            let s = stream(ev);
            let whole = accumulate(&s, a, w1 + w2).unwrap();
            let left = accumulate(&s, a, w1).unwrap();
            let right = accumulate(&s, a + w1, w2).unwrap();
            let sum: Vec<i32> = left.values.iter().zip(&right.values).map(|(x, y)| x + y).collect();
            prop_assert_eq!(whole.values, sum);
        }

        #[test]
        fn mass_conservation(ev in arb_events(), t0 in 0u64..2000, len in 1u64..4000, bins in 1usize..9) {
            let s = stream(ev);
            let g = to_voxel_grid(&s, t0, t0 + len, bins).unwrap();
            let expect: i64 = s.window(t0, t0 + len).iter().map(|e| e.p as i64).sum();
            prop_assert!((g.total() - expect as f64).abs() <= 1e-9 * (expect.abs() as f64).max(1.0));
        }

        #[test]
        fn normalization_scale_invariant(vals in prop::collection::vec(-50i32..50, 12), k in 1i32..20) {
            let f = AccumulationFrame { width: 4, height: 3, values: vals.clone(), t0: 0, window: 1 };
            let g = AccumulationFrame { values: vals.iter().map(|v| v * k).collect(), ..f.clone() };
            let (a, b) = (normalize_accum(&f), normalize_accum(&g));
            for (x, y) in a.pixels().iter().zip(b.pixels()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
