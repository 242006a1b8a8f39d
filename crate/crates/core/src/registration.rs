//! Spatial registration between the event sensor and the frame camera, and
//! the combined space-time projection of events into frame-camera
//! coordinates.
//!
//! The projection is `x_i = r (x_j - dx)`, `y_i = r (y_j - dy)`,
//! `t_i = t_j - dt`. Pixel centres sit on integer coordinates.

use std::fmt;

use crate::error::{Error, Result};
use crate::event::{Event, EventStream};

/// A 2-D point in pixel units.
pub type Point = [f64; 2];

/// Shift and scale taking event-sensor pixels onto frame-camera pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialRegistration {
    pub dx: f64,
    pub dy: f64,
    pub r: f64,
}

impl SpatialRegistration {
    pub const IDENTITY: SpatialRegistration = SpatialRegistration {
        dx: 0.0,
        dy: 0.0,
        r: 1.0,
    };

    pub fn new(dx: f64, dy: f64, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!("scale ratio must be positive, got {r}")));
        }
        if !dx.is_finite() || !dy.is_finite() {
            return Err(Error::invalid("shift must be finite"));
        }
        Ok(SpatialRegistration { dx, dy, r })
    }

    /// Reads `dx=<v> dy=<v> r=<v>` (any whitespace, including newlines).
    pub fn parse(text: &str) -> Result<Self> {
        let (mut dx, mut dy, mut r) = (None, None, None);
        for tok in text.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("expected key=value, got {tok:?}")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::parse(1, format!("invalid number in {tok:?}")))?;
            match k {
                "dx" => dx = Some(v),
                "dy" => dy = Some(v),
                "r" => r = Some(v),
                _ => return Err(Error::parse(1, format!("unknown key {k:?}"))),
            }
        }
        match (dx, dy, r) {
            (Some(dx), Some(dy), Some(r)) => Self::new(dx, dy, r),
            _ => Err(Error::parse(1, "registration needs dx, dy and r")),
        }
    }
}

impl fmt::Display for SpatialRegistration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dx={} dy={} r={}", self.dx, self.dy, self.r)
    }
}

/// Shift measured at one matched feature: event position minus frame
/// position, per component.
///
/// This is the raw coordinate difference; composed with the projection it
/// maps the feature exactly onto its frame-camera match only when `r = 1`.
pub fn estimate_shift(feat_event: Point, feat_frame: Point) -> (f64, f64) {
    (
        feat_event[0] - feat_frame[0],
        feat_event[1] - feat_frame[1],
    )
}

/// One matched feature: its event-sensor and frame-camera positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeaturePair {
    pub event: Point,
    pub frame: Point,
}

/// Scale ratio: frame-camera distance over event-sensor distance between two
/// matched features.
pub fn estimate_scale(pair1: FeaturePair, pair2: FeaturePair) -> Result<f64> {
    let d_event = (pair2.event[0] - pair1.event[0]).hypot(pair2.event[1] - pair1.event[1]);
    if d_event == 0.0 {
        return Err(Error::invalid(
            "feature points coincide in the event sensor; scale undefined",
        ));
    }
    let d_frame = (pair2.frame[0] - pair1.frame[0]).hypot(pair2.frame[1] - pair1.frame[1]);
    Ok(d_frame / d_event)
}

/// Shift from the first pair, scale from both.
pub fn estimate_registration(pair1: FeaturePair, pair2: FeaturePair) -> Result<SpatialRegistration> {
    let (dx, dy) = estimate_shift(pair1.event, pair1.frame);
    let r = estimate_scale(pair1, pair2)?;
    SpatialRegistration::new(dx, dy, r)
}

/// Noiseless correspondences that the estimators above map back to `reg`
/// exactly: the first frame point is offset by the shift, the second keeps
/// the event-space direction with its length multiplied by `r`.
pub fn synthetic_features(reg: &SpatialRegistration, p1: Point, p2: Point) -> [FeaturePair; 2] {
    let q1 = [p1[0] - reg.dx, p1[1] - reg.dy];
    let q2 = [
        q1[0] + reg.r * (p2[0] - p1[0]),
        q1[1] + reg.r * (p2[1] - p1[1]),
    ];
    [
        FeaturePair {
            event: p1,
            frame: q1,
        },
        FeaturePair {
            event: p2,
            frame: q2,
        },
    ]
}

/// The composed space-time map from event-sensor coordinates to frame-camera
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub registration: SpatialRegistration,
    /// Clock offset: event time minus frame time, µs.
    pub dt_us: i64,
    pub target_width: u16,
    pub target_height: u16,
}

pub fn build_projection(
    reg: SpatialRegistration,
    dt_us: i64,
    target_width: u16,
    target_height: u16,
) -> Result<Projection> {
    let reg = SpatialRegistration::new(reg.dx, reg.dy, reg.r)?;
    Ok(Projection {
        registration: reg,
        dt_us,
        target_width,
        target_height,
    })
}

/// A projected event. Coordinates stay real valued; `in_frame` says whether
/// the rounded pixel lands inside the target and the time is non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedEvent {
    pub x: f64,
    pub y: f64,
    pub t: i64,
    pub p: i8,
    pub in_frame: bool,
}

impl Projection {
    pub fn map_point(&self, x: f64, y: f64) -> Point {
        let reg = &self.registration;
        [reg.r * (x - reg.dx), reg.r * (y - reg.dy)]
    }

    /// Closed-form inverse of [`Projection::map_point`].
    pub fn unmap_point(&self, x: f64, y: f64) -> Point {
        let reg = &self.registration;
        [x / reg.r + reg.dx, y / reg.r + reg.dy]
    }

    pub fn map_time(&self, t: i64) -> i64 {
        t - self.dt_us
    }

    pub fn unmap_time(&self, t: i64) -> i64 {
        t + self.dt_us
    }

    pub fn project_event(&self, e: &Event) -> ProjectedEvent {
        let [x, y] = self.map_point(e.x as f64, e.y as f64);
        let t = self.map_time(e.t as i64);
        let (rx, ry) = (x.round(), y.round());
        let in_frame = t >= 0
            && rx >= 0.0
            && ry >= 0.0
            && rx < self.target_width as f64
            && ry < self.target_height as f64;
        ProjectedEvent {
            x,
            y,
            t,
            p: e.p,
            in_frame,
        }
    }

    /// Projects every event, rounds to the nearest pixel (half away from
    /// zero) and drops events that leave the target frame or precede time
    /// zero. Returns the projected stream and the number dropped.
    pub fn project_stream(&self, stream: &EventStream) -> (EventStream, usize) {
        let mut out = Vec::with_capacity(stream.len());
        for e in stream.events() {
            let pe = self.project_event(e);
            if pe.in_frame {
                out.push(Event::new(
                    pe.x.round() as u16,
                    pe.y.round() as u16,
                    pe.t as u64,
                    pe.p,
                ));
            }
        }
        let dropped = stream.len() - out.len();
        let projected = EventStream::from_unsorted(self.target_width, self.target_height, out)
            .expect("projected events are in bounds by construction");
        (projected, dropped)
    }
}

pub fn project_event(proj: &Projection, e: &Event) -> ProjectedEvent {
    proj.project_event(e)
}

pub fn project_stream(proj: &Projection, stream: &EventStream) -> (EventStream, usize) {
    proj.project_stream(stream)
}
