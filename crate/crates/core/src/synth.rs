//! Synthetic ground truth: analytic scenes of moving primitives, rendered to
//! frames, and an idealized event camera that fires whenever a pixel's
//! log-intensity moves one contrast threshold away from its reference.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event::{Event, EventStream};
use crate::frame::{Fps, FrameSequence, GrayFrame, RgbFrame};
use crate::registration::SpatialRegistration;

/// Slack on the threshold comparison so that a change of exactly `k * C`
/// fires `k` events despite rounding in the log differences.
const THRESHOLD_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disc { radius: f64 },
    /// Axis-aligned rectangle with full width and height.
    Rect { width: f64, height: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub shape: Shape,
    pub intensity: f64,
    /// Centre at t = 0, pixel units, pixel centres on integer coordinates.
    pub center: [f64; 2],
    /// Pixels per second.
    pub velocity: [f64; 2],
}

impl SceneObject {
    pub fn position(&self, t_us: f64) -> [f64; 2] {
        let s = t_us * 1e-6;
        [
            self.center[0] + self.velocity[0] * s,
            self.center[1] + self.velocity[1] * s,
        ]
    }
}

/// Parametric scene: uniform background plus moving primitives painted in
/// list order (later objects occlude earlier ones).
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub background: f64,
    pub objects: Vec<SceneObject>,
    pub duration_us: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("scene must have positive size"));
        }
        if !(0.0..=255.0).contains(&self.background) {
            return Err(Error::invalid("background intensity outside [0, 255]"));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if !(0.0..=255.0).contains(&o.intensity) {
                return Err(Error::invalid(format!("object {i}: intensity outside [0, 255]")));
            }
            if o.intensity == self.background {
                return Err(Error::invalid(format!(
                    "object {i}: intensity equals background"
                )));
            }
            if !o.velocity.iter().chain(&o.center).all(|v| v.is_finite()) {
                return Err(Error::invalid(format!("object {i}: non-finite motion")));
            }
            let ok = match o.shape {
                Shape::Disc { radius } => radius > 0.0,
                Shape::Rect { width, height } => width > 0.0 && height > 0.0,
            };
            if !ok {
                return Err(Error::invalid(format!("object {i}: non-positive size")));
            }
        }
        Ok(())
    }

    /// The same latent scene as observed by a second camera whose pixel
    /// coordinates map onto this one by `x = r (x' - dx)`, `y = r (y' - dy)`.
    pub fn as_seen_through(
        &self,
        reg: &SpatialRegistration,
        width: usize,
        height: usize,
    ) -> SceneSpec {
        let r = reg.r;
        let objects = self
            .objects
            .iter()
            .map(|o| SceneObject {
                shape: match o.shape {
                    Shape::Disc { radius } => Shape::Disc { radius: radius / r },
                    Shape::Rect { width, height } => Shape::Rect {
                        width: width / r,
                        height: height / r,
                    },
                },
                intensity: o.intensity,
                center: [o.center[0] / r + reg.dx, o.center[1] / r + reg.dy],
                velocity: [o.velocity[0] / r, o.velocity[1] / r],
            })
            .collect();
        SceneSpec {
            width,
            height,
            background: self.background,
            objects,
            duration_us: self.duration_us,
        }
    }

    /// Two-object default scene used by the CLI demo.
    pub fn demo() -> SceneSpec {
        SceneSpec {
            width: 128,
            height: 96,
            background: 40.0,
            objects: vec![
                SceneObject {
                    shape: Shape::Rect {
                        width: 30.0,
                        height: 14.0,
                    },
                    intensity: 120.0,
                    center: [100.0, 70.0],
                    velocity: [-180.0, -30.0],
                },
                SceneObject {
                    shape: Shape::Disc { radius: 10.0 },
                    intensity: 220.0,
                    center: [14.0, 30.0],
                    velocity: [240.0, 60.0],
                },
            ],
            duration_us: 420_000,
        }
    }
}

/// Idealized event camera parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventCameraModel {
    /// Contrast threshold in log-intensity units.
    pub contrast: f64,
    /// Intensity floor added before taking logarithms.
    pub epsilon: f64,
    /// Internal simulation step in microseconds.
    pub sim_step: u64,
    /// Render supersampling used for the latent intensity.
    pub supersample: usize,
    /// Standard deviation of per-event threshold jitter; zero disables it.
    pub threshold_jitter: f64,
    pub seed: u64,
}

impl Default for EventCameraModel {
    fn default() -> Self {
        EventCameraModel {
            contrast: 0.15,
            epsilon: 1.0,
            sim_step: 100,
            supersample: 4,
            threshold_jitter: 0.0,
            seed: 0,
        }
    }
}

impl EventCameraModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.contrast > 0.0 && self.contrast.is_finite()) {
            return Err(Error::invalid("contrast threshold must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if self.sim_step == 0 {
            return Err(Error::invalid("sim_step must be at least 1 us"));
        }
        if self.supersample == 0 {
            return Err(Error::invalid("supersample must be at least 1"));
        }
        if self.threshold_jitter < 0.0 || !self.threshold_jitter.is_finite() {
            return Err(Error::invalid("threshold jitter must be non-negative"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Rendering

#[derive(Clone, Copy)]
struct Placed {
    shape: Shape,
    intensity: f64,
    cx: f64,
    cy: f64,
}

enum Cover {
    Full,
    None,
    Partial,
}

impl Placed {
    fn contains(&self, px: f64, py: f64) -> bool {
        match self.shape {
            Shape::Disc { radius } => {
                let (dx, dy) = (px - self.cx, py - self.cy);
                dx * dx + dy * dy < radius * radius
            }
            Shape::Rect { width, height } => {
                (px - self.cx).abs() < width / 2.0 && (py - self.cy).abs() < height / 2.0
            }
        }
    }

    /// Coverage of the unit pixel square centred on (x, y).
    fn cover(&self, x: f64, y: f64) -> Cover {
        match self.shape {
            Shape::Disc { radius } => {
                let d = ((x - self.cx).powi(2) + (y - self.cy).powi(2)).sqrt();
                if d + std::f64::consts::FRAC_1_SQRT_2 < radius {
                    Cover::Full
                } else if d - std::f64::consts::FRAC_1_SQRT_2 > radius {
                    Cover::None
                } else {
                    Cover::Partial
                }
            }
            Shape::Rect { width, height } => {
                let (ax, ay) = ((x - self.cx).abs(), (y - self.cy).abs());
                let (hw, hh) = (width / 2.0, height / 2.0);
                if ax + 0.5 <= hw && ay + 0.5 <= hh {
                    Cover::Full
                } else if ax - 0.5 >= hw || ay - 0.5 >= hh {
                    Cover::None
                } else {
                    Cover::Partial
                }
            }
        }
    }

    /// Inclusive pixel-row range the object can touch.
    fn row_range(&self) -> (f64, f64) {
        let h = match self.shape {
            Shape::Disc { radius } => radius,
            Shape::Rect { height, .. } => height / 2.0,
        };
        (self.cy - h - 1.0, self.cy + h + 1.0)
    }

    fn col_range(&self) -> (f64, f64) {
        let w = match self.shape {
            Shape::Disc { radius } => radius,
            Shape::Rect { width, .. } => width / 2.0,
        };
        (self.cx - w - 1.0, self.cx + w + 1.0)
    }
}

fn place(scene: &SceneSpec, t_us: f64) -> Vec<Placed> {
    scene
        .objects
        .iter()
        .map(|o| {
            let [cx, cy] = o.position(t_us);
            Placed {
                shape: o.shape,
                intensity: o.intensity,
                cx,
                cy,
            }
        })
        .collect()
}

/// Renders one row. Pixels whose square is entirely inside or outside every
/// object skip supersampling; the result equals full supersampling.
#[allow(clippy::needless_range_loop)]
fn render_row(placed: &[Placed], background: f64, y: usize, ss: usize, out: &mut [f64]) {
    out.fill(background);
    let yf = y as f64;
    let active: Vec<&Placed> = placed
        .iter()
        .filter(|p| {
            let (lo, hi) = p.row_range();
            yf >= lo && yf <= hi
        })
        .collect();
    if active.is_empty() {
        return;
    }
    let width = out.len();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &active {
        let (lo, hi) = p.col_range();
        x_lo = x_lo.min(lo);
        x_hi = x_hi.max(hi);
    }
    let x_start = x_lo.max(0.0).floor() as usize;
    let x_end = (x_hi.ceil().max(-1.0) as i64 + 1).clamp(0, width as i64) as usize;
    let inv = 1.0 / ss as f64;
    for x in x_start..x_end {
        let xf = x as f64;
        let mut value = background;
        let mut partial = false;
        for p in &active {
            match p.cover(xf, yf) {
                Cover::Full => {
                    value = p.intensity;
                    partial = false;
                }
                Cover::None => {}
                Cover::Partial => partial = true,
            }
        }
        if partial {
            let mut sum = 0.0;
            for j in 0..ss {
                let py = yf - 0.5 + (j as f64 + 0.5) * inv;
                for i in 0..ss {
                    let px = xf - 0.5 + (i as f64 + 0.5) * inv;
                    let mut v = background;
                    for p in &active {
                        if p.contains(px, py) {
                            v = p.intensity;
                        }
                    }
                    sum += v;
                }
            }
            value = sum * inv * inv;
        }
        out[x] = value;
    }
}

fn render_unchecked(scene: &SceneSpec, t_us: f64, ss: usize) -> Vec<f64> {
    let placed = place(scene, t_us);
    let mut pixels = vec![0.0; scene.width * scene.height];
    for (y, row) in pixels.chunks_exact_mut(scene.width).enumerate() {
        render_row(&placed, scene.background, y, ss, row);
    }
    pixels
}

/// Anti-aliased analytic rendering at time `t` (µs). Each pixel is the mean
/// of `supersample²` point samples on a regular grid inside the pixel.
pub fn render_frame(scene: &SceneSpec, t: u64, supersample: usize) -> Result<GrayFrame> {
    if t > scene.duration_us {
        return Err(Error::invalid(format!(
            "render time {t} outside scene duration {}",
            scene.duration_us
        )));
    }
    if supersample == 0 {
        return Err(Error::invalid("supersample must be at least 1"));
    }
    Ok(GrayFrame::from_raw(
        scene.width,
        scene.height,
        render_unchecked(scene, t as f64, supersample),
        t,
    ))
}

/// Frames at `round(k * 1e6 * den / num)` µs for every such time within the
/// scene duration.
pub fn generate_sequence(
    scene: &SceneSpec,
    fps: Fps,
    supersample: usize,
) -> Result<FrameSequence<GrayFrame>> {
    scene.validate()?;
    let times: Vec<u64> = (0..)
        .map(|k| fps.frame_time(k))
        .take_while(|&t| t <= scene.duration_us)
        .collect();
    let frames = times
        .par_iter()
        .map(|&t| render_frame(scene, t, supersample))
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames, fps)
}

/// As [`generate_sequence`] with the gray value replicated into RGB.
pub fn generate_rgb_sequence(
    scene: &SceneSpec,
    fps: Fps,
    supersample: usize,
) -> Result<FrameSequence<RgbFrame>> {
    let gray = generate_sequence(scene, fps, supersample)?;
    let fps = gray.nominal_fps;
    FrameSequence::new(
        gray.into_frames().iter().map(RgbFrame::from_gray).collect(),
        fps,
    )
}

// ---------------------------------------------------------------------------
// Event generation

struct PixelState {
    l_ref: f64,
    l_prev: f64,
    threshold: f64,
}

struct Jitter {
    rng: ChaCha8Rng,
    normal: Normal<f64>,
    contrast: f64,
}

impl Jitter {
    fn next(&mut self) -> f64 {
        (self.contrast + self.normal.sample(&mut self.rng)).max(0.1 * self.contrast)
    }
}

/// Simulation time grid: multiples of `step` plus the duration itself.
fn step_times(duration: u64, step: u64) -> Vec<u64> {
    let mut ts: Vec<u64> = (0..=duration / step).map(|k| k * step).collect();
    if *ts.last().unwrap() != duration {
        ts.push(duration);
    }
    ts
}

/// Simulates the event camera over the whole scene duration.
///
/// Every pixel keeps a reference log-intensity `ln(I + epsilon)` initialised
/// at t = 0. At each simulation step, while the new log-intensity is at least
/// one threshold away from the reference, an event is emitted at the linearly
/// interpolated crossing time (floored to whole microseconds) and the
/// reference moves by exactly one threshold in the event's direction. Rows
/// are simulated in parallel and the merged output is stably sorted by time,
/// pixel-major within ties.
pub fn generate_events(scene: &SceneSpec, model: &EventCameraModel) -> Result<EventStream> {
    scene.validate()?;
    model.validate()?;
    if scene.width > u16::MAX as usize || scene.height > u16::MAX as usize {
        return Err(Error::invalid("scene too large for 16-bit event coordinates"));
    }
    let times = step_times(scene.duration_us, model.sim_step);
    let placements: Vec<Vec<Placed>> = times.iter().map(|&t| place(scene, t as f64)).collect();
    let width = scene.width;

    let rows: Vec<Vec<Event>> = (0..scene.height)
        .into_par_iter()
        .map(|y| {
            let mut row = vec![0.0; width];
            render_row(&placements[0], scene.background, y, model.supersample, &mut row);
            let mut jitters: Vec<Option<Jitter>> = (0..width)
                .map(|x| {
                    (model.threshold_jitter > 0.0).then(|| Jitter {
                        rng: ChaCha8Rng::seed_from_u64(
                            model.seed ^ ((y * width + x) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                        ),
                        normal: Normal::new(0.0, model.threshold_jitter).unwrap(),
                        contrast: model.contrast,
                    })
                })
                .collect();
            let mut states: Vec<PixelState> = row
                .iter()
                .zip(jitters.iter_mut())
                .map(|(&i, j)| {
                    let l = (i + model.epsilon).ln();
                    PixelState {
                        l_ref: l,
                        l_prev: l,
                        threshold: j.as_mut().map_or(model.contrast, Jitter::next),
                    }
                })
                .collect();
            let mut per_pixel: Vec<Vec<Event>> = vec![Vec::new(); width];

            for k in 1..times.len() {
                render_row(&placements[k], scene.background, y, model.supersample, &mut row);
                let (t0, t1) = (times[k - 1] as f64, times[k] as f64);
                for x in 0..width {
                    let st = &mut states[x];
                    let l_new = (row[x] + model.epsilon).ln();
                    loop {
                        let diff = l_new - st.l_ref;
                        if diff.abs() < st.threshold - THRESHOLD_SLACK {
                            break;
                        }
                        let pol = if diff > 0.0 { 1.0 } else { -1.0 };
                        let level = st.l_ref + pol * st.threshold;
                        let span = l_new - st.l_prev;
                        let frac = if span.abs() > 0.0 {
                            ((level - st.l_prev) / span).clamp(0.0, 1.0)
                        } else {
                            1.0
                        };
                        let t = (t0 + frac * (t1 - t0)).floor() as u64;
                        per_pixel[x].push(Event::new(x as u16, y as u16, t, pol as i8));
                        st.l_ref = level;
                        if let Some(j) = jitters[x].as_mut() {
                            st.threshold = j.next();
                        }
                    }
                    st.l_prev = l_new;
                }
            }
            per_pixel.into_iter().flatten().collect()
        })
        .collect();

    let mut events: Vec<Event> = rows.into_iter().flatten().collect();
    events.sort_by_key(|e| e.t);
    EventStream::new(scene.width as u16, scene.height as u16, events)
}

/// Adds `delta` µs to every timestamp.
pub fn shift_events(stream: &EventStream, delta: i64) -> Result<EventStream> {
    let shifted = stream
        .events()
        .iter()
        .map(|e| {
            let t = e.t as i128 + delta as i128;
            if t < 0 || t > u64::MAX as i128 {
                Err(Error::invalid(format!(
                    "shift {delta} moves timestamp {} out of range",
                    e.t
                )))
            } else {
                Ok(Event { t: t as u64, ..*e })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    EventStream::new(stream.width(), stream.height(), shifted)
}

// ---------------------------------------------------------------------------
// Scene files

/// Parses the scene text format:
///
/// ```text
/// width = 128
/// height = 96
/// background = 40
/// duration_us = 400000
///
/// [object]
/// shape = disc          # or: rect
/// radius = 10           # rect: extents = <w>, <h>
/// intensity = 220
/// center = 14, 30
/// velocity = 240, 60    # pixels per second
/// ```
pub fn parse_scene(text: &str) -> Result<SceneSpec> {
    #[derive(Default)]
    struct Partial {
        shape: Option<String>,
        radius: Option<f64>,
        extents: Option<[f64; 2]>,
        intensity: Option<f64>,
        center: Option<[f64; 2]>,
        velocity: Option<[f64; 2]>,
        line: usize,
    }

    let mut width = None;
    let mut height = None;
    let mut background = None;
    let mut duration = None;
    let mut partials: Vec<Partial> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "[object]" {
            partials.push(Partial {
                line: line_no,
                ..Default::default()
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(line_no, format!("expected key = value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(line_no, format!("invalid number {v:?}")))
        };
        let pair = |v: &str| -> Result<[f64; 2]> {
            let (a, b) = v
                .split_once(',')
                .ok_or_else(|| Error::parse(line_no, format!("expected <a>, <b>, got {v:?}")))?;
            Ok([num(a)?, num(b)?])
        };
        match partials.last_mut() {
            None => match key {
                "width" => width = Some(num(value)? as usize),
                "height" => height = Some(num(value)? as usize),
                "background" => background = Some(num(value)?),
                "duration_us" => duration = Some(num(value)? as u64),
                _ => return Err(Error::parse(line_no, format!("unknown scene key {key:?}"))),
            },
            Some(obj) => match key {
                "shape" => obj.shape = Some(value.to_string()),
                "radius" => obj.radius = Some(num(value)?),
                "extents" => obj.extents = Some(pair(value)?),
                "intensity" => obj.intensity = Some(num(value)?),
                "center" => obj.center = Some(pair(value)?),
                "velocity" => obj.velocity = Some(pair(value)?),
                _ => return Err(Error::parse(line_no, format!("unknown object key {key:?}"))),
            },
        }
    }

    let missing = |what: &str, line: usize| Error::parse(line, format!("missing {what}"));
    let mut objects = Vec::with_capacity(partials.len());
    for p in partials {
        let shape = match p.shape.as_deref() {
            Some("disc") => Shape::Disc {
                radius: p.radius.ok_or_else(|| missing("radius", p.line))?,
            },
            Some("rect") => {
                let [w, h] = p.extents.ok_or_else(|| missing("extents", p.line))?;
                Shape::Rect {
                    width: w,
                    height: h,
                }
            }
            Some(other) => return Err(Error::parse(p.line, format!("unknown shape {other:?}"))),
            None => return Err(missing("shape", p.line)),
        };
        objects.push(SceneObject {
            shape,
            intensity: p.intensity.ok_or_else(|| missing("intensity", p.line))?,
            center: p.center.ok_or_else(|| missing("center", p.line))?,
            velocity: p.velocity.unwrap_or([0.0, 0.0]),
        });
    }
    let scene = SceneSpec {
        width: width.ok_or_else(|| missing("width", 1))?,
        height: height.ok_or_else(|| missing("height", 1))?,
        background: background.ok_or_else(|| missing("background", 1))?,
        objects,
        duration_us: duration.ok_or_else(|| missing("duration_us", 1))?,
    };
    scene.validate()?;
    Ok(scene)
}

/// Inverse of [`parse_scene`].
pub fn render_scene_file(scene: &SceneSpec) -> String {
    let mut out = format!(
        "width = {}\nheight = {}\nbackground = {}\nduration_us = {}\n",
        scene.width, scene.height, scene.background, scene.duration_us
    );
    for o in &scene.objects {
        out.push_str("\n[object]\n");
        match o.shape {
            Shape::Disc { radius } => out.push_str(&format!("shape = disc\nradius = {radius}\n")),
            Shape::Rect { width, height } => {
                out.push_str(&format!("shape = rect\nextents = {width}, {height}\n"))
            }
        }
        out.push_str(&format!(
            "intensity = {}\ncenter = {}, {}\nvelocity = {}, {}\n",
            o.intensity, o.center[0], o.center[1], o.velocity[0], o.velocity[1]
        ));
    }
    out
}
