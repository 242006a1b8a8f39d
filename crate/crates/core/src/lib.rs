//! Synchronization, registration and frame interpolation for an event
//! camera paired with a conventional frame camera.
//!
//! Events are projected into frame-camera coordinates by a shift-and-scale
//! [`SpatialRegistration`] plus a clock offset found by [`synchronize`],
//! which scores candidate offsets by SSIM between frame differences and
//! event accumulations. Registered events then drive [`interpolate`], which
//! produces frames between two captured ones. The [`synth`] module renders
//! moving scenes and simulates the matching event stream, which makes every
//! stage testable against known ground truth.

pub mod accum;
pub mod align;
pub mod error;
pub mod event;
pub mod frame;
pub mod interp;
pub mod metrics;
pub mod registration;
pub mod synth;

pub use accum::{accumulate, normalize_accum, to_voxel_grid, AccumulationFrame, Polarity, VoxelGrid};
pub use align::{synchronize, temporal_search, AlignConfig, CompareGeometry, TemporalAlignment};
pub use error::{Error, Result};
pub use event::{parse_events_binary, parse_events_csv, write_events_binary, write_events_csv, Event, EventStream};
pub use frame::{Fps, Frame, FrameSequence, GrayFrame, RgbFrame};
pub use interp::{interpolate, upscale_sequence, InterpParams, InterpolationRequest, Method};
pub use metrics::{psnr, ssim};
pub use registration::{build_projection, estimate_registration, FeaturePair, Projection, SpatialRegistration};
pub use synth::{generate_events, EventCameraModel, SceneSpec};
