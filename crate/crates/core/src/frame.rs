//! Grayscale and RGB frames, timestamped frame sequences, and their storage
//! as binary PGM/PPM files with a text manifest carrying timestamps.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Frames per second as an integer ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fps {
    pub num: u32,
    pub den: u32,
}

impl Fps {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::invalid(format!("frame rate {num}/{den} must be positive")));
        }
        Ok(Fps { num, den })
    }

    pub const fn integer(num: u32) -> Self {
        Fps { num, den: 1 }
    }

    /// Frame period in microseconds (real valued).
    pub fn period_us(&self) -> f64 {
        1e6 * self.den as f64 / self.num as f64
    }

    /// Timestamp of frame `k`: `round(k * 1e6 * den / num)` microseconds,
    /// computed in integers so that rates related by an integer factor give
    /// nested timestamp sets.
    pub fn frame_time(&self, k: u64) -> u64 {
        let n = k as u128 * 1_000_000 * self.den as u128;
        let d = self.num as u128;
        ((2 * n + d) / (2 * d)) as u64
    }

    /// Rate of every `factor`-th frame.
    pub fn divided(&self, factor: u32) -> Fps {
        let den = self.den as u64 * factor as u64;
        let g = gcd(self.num as u64, den);
        Fps {
            num: (self.num as u64 / g) as u32,
            den: (den / g) as u32,
        }
    }

    /// Rate with `factor` frames per original frame.
    pub fn multiplied(&self, factor: u32) -> Fps {
        let num = self.num as u64 * factor as u64;
        let g = gcd(num, self.den as u64);
        Fps {
            num: (num / g) as u32,
            den: (self.den as u64 / g) as u32,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (n, d) = s.split_once('/').unwrap_or((s, "1"));
        let num = n
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("invalid frame rate {s:?}")))?;
        let den = d
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("invalid frame rate {s:?}")))?;
        Fps::new(num, den)
    }
}

impl fmt::Display for Fps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Single-channel image with intensities nominally in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    /// Timestamp in microseconds.
    pub t: u64,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>, t: u64) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "{} pixels for a {width}x{height} frame",
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite pixel at index {i}")));
        }
        Ok(GrayFrame {
            width,
            height,
            pixels,
            t,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64, t: u64) -> Self {
        GrayFrame {
            width,
            height,
            pixels: vec![value; width * height],
            t,
        }
    }

    /// Builds a frame without the finiteness scan; callers guarantee the
    /// length.
    pub(crate) fn from_raw(width: usize, height: usize, pixels: Vec<f64>, t: u64) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        GrayFrame {
            width,
            height,
            pixels,
            t,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Bilinear sample at real coordinates with pixel centres on integers;
    /// coordinates outside the frame clamp to the nearest edge pixel.
    pub fn sample_clamped(&self, x: f64, y: f64) -> f64 {
        let xmax = (self.width - 1) as f64;
        let ymax = (self.height - 1) as f64;
        let x = x.clamp(0.0, xmax);
        let y = y.clamp(0.0, ymax);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let top = self.get(x0, y0) * (1.0 - fx) + self.get(x1, y0) * fx;
        let bottom = self.get(x0, y1) * (1.0 - fx) + self.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    pub fn same_geometry(&self, other: &GrayFrame) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::Geometry {
                a_w: self.width,
                a_h: self.height,
                b_w: other.width,
                b_h: other.height,
            });
        }
        Ok(())
    }
}

/// Three-channel interleaved RGB image.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbFrame {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    pub t: u64,
}

impl RgbFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>, t: u64) -> Result<Self> {
        if pixels.len() != width * height * 3 {
            return Err(Error::invalid(format!(
                "{} samples for a {width}x{height} RGB frame",
                pixels.len()
            )));
        }
        if let Some(i) = pixels
            .iter()
            .position(|v| !v.is_finite() || *v < 0.0 || *v > 255.0)
        {
            return Err(Error::invalid(format!("RGB sample {i} outside [0, 255]")));
        }
        Ok(RgbFrame {
            width,
            height,
            pixels,
            t,
        })
    }

    /// Replicates a gray frame into three equal channels.
    pub fn from_gray(gray: &GrayFrame) -> Self {
        let pixels = gray
            .pixels
            .iter()
            .flat_map(|&v| [v.clamp(0.0, 255.0); 3])
            .collect();
        RgbFrame {
            width: gray.width,
            height: gray.height,
            pixels,
            t: gray.t,
        }
    }

    /// Assembles an RGB frame from three planes of identical geometry.
    pub fn from_channels(channels: [&GrayFrame; 3]) -> Result<Self> {
        channels[0].same_geometry(channels[1])?;
        channels[0].same_geometry(channels[2])?;
        let n = channels[0].pixels.len();
        let mut pixels = Vec::with_capacity(n * 3);
        for i in 0..n {
            for c in &channels {
                pixels.push(c.pixels[i].clamp(0.0, 255.0));
            }
        }
        Ok(RgbFrame {
            width: channels[0].width,
            height: channels[0].height,
            pixels,
            t: channels[0].t,
        })
    }

    pub fn channel(&self, c: usize) -> GrayFrame {
        let pixels = self.pixels.iter().skip(c).step_by(3).copied().collect();
        GrayFrame::from_raw(self.width, self.height, pixels, self.t)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }
}

/// BT.601 luma, written as `g + 0.299 (r - g) + 0.114 (b - g)` so that equal
/// channels map back to the same value without rounding.
pub fn to_grayscale(frame: &RgbFrame) -> GrayFrame {
    let pixels = frame
        .pixels
        .chunks_exact(3)
        .map(|p| p[1] + 0.299 * (p[0] - p[1]) + 0.114 * (p[2] - p[1]))
        .collect();
    GrayFrame::from_raw(frame.width, frame.height, pixels, frame.t)
}

/// Either kind of frame, as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    Gray(GrayFrame),
    Rgb(RgbFrame),
}

impl Frame {
    pub fn t(&self) -> u64 {
        match self {
            Frame::Gray(f) => f.t,
            Frame::Rgb(f) => f.t,
        }
    }

    pub fn set_t(&mut self, t: u64) {
        match self {
            Frame::Gray(f) => f.t = t,
            Frame::Rgb(f) => f.t = t,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            Frame::Gray(f) => (f.width, f.height),
            Frame::Rgb(f) => (f.width, f.height),
        }
    }

    pub fn to_gray(&self) -> GrayFrame {
        match self {
            Frame::Gray(f) => f.clone(),
            Frame::Rgb(f) => to_grayscale(f),
        }
    }

    /// Channel planes: one for gray frames, three for RGB.
    pub fn planes(&self) -> Vec<GrayFrame> {
        match self {
            Frame::Gray(f) => vec![f.clone()],
            Frame::Rgb(f) => (0..3).map(|c| f.channel(c)).collect(),
        }
    }

    /// Inverse of [`Frame::planes`], using `self` only to pick the kind.
    pub fn like_from_planes(&self, planes: &[GrayFrame]) -> Result<Frame> {
        match self {
            Frame::Gray(_) => Ok(Frame::Gray(planes[0].clone())),
            Frame::Rgb(_) => Ok(Frame::Rgb(RgbFrame::from_channels([
                &planes[0], &planes[1], &planes[2],
            ])?)),
        }
    }
}

/// Frames with strictly increasing timestamps and a common geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence<F = GrayFrame> {
    frames: Vec<F>,
    pub nominal_fps: Fps,
}

/// Timestamp and geometry access shared by all frame kinds.
pub trait Timed {
    fn time(&self) -> u64;
    fn geometry(&self) -> (usize, usize);
}

impl Timed for GrayFrame {
    fn time(&self) -> u64 {
        self.t
    }
    fn geometry(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

impl Timed for RgbFrame {
    fn time(&self) -> u64 {
        self.t
    }
    fn geometry(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

impl Timed for Frame {
    fn time(&self) -> u64 {
        self.t()
    }
    fn geometry(&self) -> (usize, usize) {
        self.dims()
    }
}

impl<F: Timed> FrameSequence<F> {
    pub fn new(frames: Vec<F>, nominal_fps: Fps) -> Result<Self> {
        for w in frames.windows(2) {
            if w[1].time() <= w[0].time() {
                return Err(Error::invalid(format!(
                    "frame timestamps not strictly increasing: {} then {}",
                    w[0].time(),
                    w[1].time()
                )));
            }
            if w[1].geometry() != w[0].geometry() {
                let (a_w, a_h) = w[0].geometry();
                let (b_w, b_h) = w[1].geometry();
                return Err(Error::Geometry { a_w, a_h, b_w, b_h });
            }
        }
        Ok(FrameSequence {
            frames,
            nominal_fps,
        })
    }

    pub fn frames(&self) -> &[F] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<F> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn geometry(&self) -> Option<(usize, usize)> {
        self.frames.first().map(Timed::geometry)
    }
}

impl FrameSequence<Frame> {
    pub fn to_gray(&self) -> FrameSequence<GrayFrame> {
        FrameSequence {
            frames: self.frames.iter().map(Frame::to_gray).collect(),
            nominal_fps: self.nominal_fps,
        }
    }
}

// ---------------------------------------------------------------------------
// PGM / PPM

/// Encodes a gray frame as binary PGM (P5, maxval 255).
pub fn encode_pgm(frame: &GrayFrame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend(frame.pixels.iter().map(|&v| quantize(v)));
    out
}

/// Encodes an RGB frame as binary PPM (P6, maxval 255).
pub fn encode_ppm(frame: &RgbFrame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend(frame.pixels.iter().map(|&v| quantize(v)));
    out
}

/// Rounds half away from zero and clamps into a byte.
fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Decodes a P5 or P6 image. The timestamp is set to `t`.
pub fn decode_pnm(bytes: &[u8], t: u64) -> Result<Frame> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos).ok_or_else(|| Error::Image("empty file".into()))?;
    let channels = match magic.as_slice() {
        b"P5" => 1,
        b"P6" => 3,
        other => {
            return Err(Error::Image(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let mut header = [0usize; 3];
    for h in header.iter_mut() {
        let tok = next_token(bytes, &mut pos).ok_or_else(|| Error::Image("short header".into()))?;
        *h = std::str::from_utf8(&tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Image("invalid header number".into()))?;
    }
    let [width, height, maxval] = header;
    if maxval != 255 {
        return Err(Error::Image(format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let need = width * height * channels;
    let raster = bytes.get(pos..pos + need).ok_or(Error::Truncated {
        expected: pos + need,
        available: bytes.len(),
    })?;
    let pixels: Vec<f64> = raster.iter().map(|&b| b as f64).collect();
    Ok(if channels == 1 {
        Frame::Gray(GrayFrame::from_raw(width, height, pixels, t))
    } else {
        Frame::Rgb(RgbFrame {
            width,
            height,
            pixels,
            t,
        })
    })
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Option<Vec<u8>> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (*pos > start).then(|| bytes[start..*pos].to_vec())
}

pub fn read_frame(path: &Path, t: u64) -> Result<Frame> {
    decode_pnm(&fs::read(path)?, t)
}

pub fn write_frame(path: &Path, frame: &Frame) -> Result<()> {
    let bytes = match frame {
        Frame::Gray(f) => encode_pgm(f),
        Frame::Rgb(f) => encode_ppm(f),
    };
    fs::write(path, bytes)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Manifest

/// One manifest line: a frame file (relative to the manifest) and its time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub file: String,
    pub t: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub nominal_fps: Fps,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty manifest"))?;
        let fps = header
            .trim()
            .strip_prefix("nominal_fps=")
            .ok_or_else(|| Error::parse(1, "expected nominal_fps=<num>/<den>"))?;
        let nominal_fps = Fps::parse(fps).map_err(|e| Error::parse(1, e.to_string()))?;
        let mut entries: Vec<ManifestEntry> = Vec::new();
        for (i, line) in lines {
            let (file, t) = line
                .trim()
                .rsplit_once(',')
                .ok_or_else(|| Error::parse(i + 1, "expected <filename>,<t_us>"))?;
            let t: u64 = t
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("invalid timestamp {t:?}")))?;
            if entries.last().is_some_and(|e| e.t >= t) {
                return Err(Error::NonMonotone { line: i + 1 });
            }
            entries.push(ManifestEntry {
                file: file.trim().to_string(),
                t,
            });
        }
        Ok(Manifest {
            nominal_fps,
            entries,
        })
    }

    pub fn render(&self) -> String {
        let mut out = format!("nominal_fps={}\n", self.nominal_fps);
        for e in &self.entries {
            out.push_str(&format!("{},{}\n", e.file, e.t));
        }
        out
    }
}

/// Reads a manifest and every frame it lists.
pub fn read_sequence(manifest_path: &Path) -> Result<FrameSequence<Frame>> {
    let manifest = Manifest::parse(&fs::read_to_string(manifest_path)?)?;
    let dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut frames = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let frame = read_frame(&dir.join(&entry.file), entry.t)?;
        if let Some(first) = frames.first() {
            let first: &Frame = first;
            if first.dims() != frame.dims() {
                let ((a_w, a_h), (b_w, b_h)) = (first.dims(), frame.dims());
                return Err(Error::Geometry { a_w, a_h, b_w, b_h });
            }
        }
        frames.push(frame);
    }
    FrameSequence::new(frames, manifest.nominal_fps)
}

/// Writes each frame as `<prefix><index>.pgm|ppm` into `dir` plus a
/// `manifest.txt`; returns the manifest path.
pub fn write_sequence<F>(dir: &Path, prefix: &str, seq: &FrameSequence<F>) -> Result<PathBuf>
where
    F: Timed + Clone + Into<Frame>,
{
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(seq.len());
    for (i, f) in seq.frames().iter().enumerate() {
        let frame: Frame = f.clone().into();
        let ext = match frame {
            Frame::Gray(_) => "pgm",
            Frame::Rgb(_) => "ppm",
        };
        let file = format!("{prefix}{i:05}.{ext}");
        write_frame(&dir.join(&file), &frame)?;
        entries.push(ManifestEntry { file, t: f.time() });
    }
    let manifest = Manifest {
        nominal_fps: seq.nominal_fps,
        entries,
    };
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest.render())?;
    Ok(path)
}

impl From<GrayFrame> for Frame {
    fn from(f: GrayFrame) -> Self {
        Frame::Gray(f)
    }
}

impl From<RgbFrame> for Frame {
    fn from(f: RgbFrame) -> Self {
        Frame::Rgb(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grayscale_coefficients() {
        let white = RgbFrame::new(1, 1, vec![255.0; 3], 5).unwrap();
        assert_eq!(to_grayscale(&white).pixels(), &[255.0]);
        assert_eq!(to_grayscale(&white).t, 5);
        let red = RgbFrame::new(1, 1, vec![255.0, 0.0, 0.0], 0).unwrap();
        assert!((to_grayscale(&red).pixels()[0] - 76.245).abs() < 1e-12);
        for v in 0..=255 {
            let v = v as f64 + 0.25;
            let f = RgbFrame::new(1, 1, vec![v.min(255.0); 3], 0).unwrap();
            assert_eq!(to_grayscale(&f).pixels()[0], v.min(255.0));
        }
    }

    #[test]
    fn pgm_decode_payload() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 64, 128, 255]);
        let f = decode_pnm(&bytes, 0).unwrap().to_gray();
        assert_eq!(f.pixels(), &[0.0, 64.0, 128.0, 255.0]);
    }

    #[test]
    fn pgm_round_trip_and_rounding() {
        let f = GrayFrame::new(3, 1, vec![0.0, 127.5, 254.0], 9).unwrap();
        let back = decode_pnm(&encode_pgm(&f), 9).unwrap().to_gray();
        assert_eq!(back.pixels(), &[0.0, 128.0, 254.0]);

        let ints = GrayFrame::new(2, 2, vec![1.0, 2.0, 3.0, 250.0], 1).unwrap();
        assert_eq!(decode_pnm(&encode_pgm(&ints), 1).unwrap(), Frame::Gray(ints));

        let rgb = RgbFrame::new(1, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3).unwrap();
        assert_eq!(decode_pnm(&encode_ppm(&rgb), 3).unwrap(), Frame::Rgb(rgb));
    }

    #[test]
    fn pnm_rejects_maxval_and_comments_ok() {
        let bytes = b"P5\n1 1\n65535\n\0\0";
        assert!(matches!(decode_pnm(bytes, 0), Err(Error::Image(_))));
        let mut ok = b"P5\n# a comment\n1 1\n255\n".to_vec();
        ok.push(7);
        assert_eq!(decode_pnm(&ok, 0).unwrap().to_gray().pixels(), &[7.0]);
        assert!(matches!(
            decode_pnm(b"P5\n2 2\n255\n\x01", 0),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn fps_timestamps() {
        let f120 = Fps::integer(120);
        let ts: Vec<u64> = (0..4).map(|k| f120.frame_time(k)).collect();
        assert_eq!(ts, vec![0, 8333, 16667, 25000]);
        let f40 = Fps::integer(40);
        for k in 0..100 {
            assert_eq!(f40.frame_time(k), f120.frame_time(3 * k));
        }
        assert_eq!(f120.divided(3), Fps::integer(40));
        assert_eq!(Fps::parse("30000/1001").unwrap(), Fps { num: 30000, den: 1001 });
    }

    #[test]
    fn manifest_round_trip_and_order() {
        for text in [
            "nominal_fps=120\na.pgm,0\nb.pgm,8333\n",
            "nominal_fps=30000/1001\na.pgm,0\nb.pgm,33367\n",
        ] {
            assert_eq!(Manifest::parse(text).unwrap().render(), text);
        }
        assert_eq!(
            Manifest::parse("nominal_fps=120/1\na.pgm,0\n").unwrap().render(),
            "nominal_fps=120\na.pgm,0\n"
        );
        assert!(Manifest::parse("nominal_fps=120/1\na.pgm,5\nb.pgm,5\n").is_err());
        assert!(Manifest::parse("fps=120\n").is_err());
    }

    #[test]
    fn sequence_rejects_non_increasing() {
        let a = GrayFrame::filled(2, 2, 0.0, 10);
        let b = GrayFrame::filled(2, 2, 0.0, 10);
        assert!(FrameSequence::new(vec![a.clone(), b], Fps::integer(1)).is_err());
        let c = GrayFrame::filled(3, 2, 0.0, 11);
        assert!(matches!(
            FrameSequence::new(vec![a, c], Fps::integer(1)),
            Err(Error::Geometry { .. })
        ));
    }

    #[test]
    fn sequence_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let frames = vec![
            GrayFrame::new(2, 1, vec![1.0, 2.0], 0).unwrap(),
            GrayFrame::new(2, 1, vec![3.0, 4.0], 8333).unwrap(),
        ];
        let seq = FrameSequence::new(frames.clone(), Fps::integer(120)).unwrap();
        let manifest = write_sequence(dir.path(), "f", &seq).unwrap();
        let back = read_sequence(&manifest).unwrap().to_gray();
        assert_eq!(back.frames(), frames.as_slice());
        assert_eq!(back.nominal_fps, Fps::integer(120));
    }
}
