use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use evsync::accum::{accumulate_with, normalize_accum, to_voxel_grid, Polarity};
use evsync::align::{synchronize, AlignConfig, CompareGeometry};
use evsync::event::{parse_events_binary, parse_events_csv, write_events_binary, write_events_csv, EventStream};
use evsync::frame::{read_frame, read_sequence, write_frame, write_sequence, Fps, Frame, FrameSequence, GrayFrame, RgbFrame};
use evsync::interp::{evaluate_grid, interpolate, upscale_targets, BlockMatchConfig, GridReport, InterpParams, InterpolationRequest, Method};
use evsync::metrics::{psnr, ssim};
use evsync::registration::{build_projection, estimate_registration, synthetic_features, FeaturePair, SpatialRegistration};
use evsync::synth::{generate_events, generate_sequence, parse_scene, shift_events, EventCameraModel, SceneSpec};

/// Event-camera / frame-camera synchronization and event-guided frame
/// interpolation.
#[derive(Parser)]
#[command(name = "evsync", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert an event file between EVT-CSV and EVB1.
    Convert(ConvertArgs),
    /// Render a synthetic scene and simulate its event stream.
    Synth(SynthArgs),
    /// Find the clock offset between events and frames.
    Align(AlignArgs),
    /// Estimate shift and scale from two matched features.
    Register(RegisterArgs),
    /// Project events into frame-camera coordinates and time.
    Project(ProjectArgs),
    /// Generate intermediate frames, or score a subsample-and-upscale grid.
    Interp(InterpArgs),
    /// Compare two frames.
    Metrics(MetricsArgs),
    /// Plot an alignment score curve as SVG.
    PlotSsim(PlotArgs),
    /// Write the normalized accumulation of an event window as PGM.
    Accumulate(AccumulateArgs),
    /// Write a temporal voxel grid of an event window.
    Voxel(VoxelArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EventFormat {
    Csv,
    Evb,
}

#[derive(Args)]
struct ConvertArgs {
    /// Input event file (format detected from content).
    input: PathBuf,
    /// Output event file.
    output: PathBuf,
    /// Output format; defaults to csv for .csv/.txt names, evb otherwise.
    #[arg(long, value_enum)]
    to: Option<EventFormat>,
}

#[derive(Args)]
struct SynthArgs {
    /// Scene description file; the built-in demo scene when omitted.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Frame rate as num or num/den.
    #[arg(long, default_value = "120")]
    fps: String,
    /// Offset added to every event timestamp, µs.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    shift: i64,
    /// Write RGB (PPM) frames instead of grayscale (PGM).
    #[arg(long)]
    rgb: bool,
    /// Registration of the event sensor, `dx=<v> dy=<v> r=<v>`.
    #[arg(long)]
    registration: Option<String>,
    /// Event sensor size as WxH; defaults to the frame size.
    #[arg(long)]
    sensor: Option<String>,
    #[arg(long, default_value_t = 0.15)]
    contrast: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Simulation step, µs.
    #[arg(long, default_value_t = 100)]
    sim_step: u64,
    #[arg(long, default_value_t = 4)]
    supersample: usize,
    /// Standard deviation of per-event threshold noise.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompareAt {
    Frame,
    Event,
}

#[derive(Args)]
struct AlignArgs {
    /// Frame manifest.
    #[arg(long)]
    frames: PathBuf,
    /// Event file (EVB1 or EVT-CSV).
    #[arg(long)]
    events: PathBuf,
    /// Registration file `dx=<v> dy=<v> r=<v>`; identity when omitted.
    #[arg(long)]
    registration: Option<PathBuf>,
    /// Write the report here as well as to standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the score curve CSV here.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Number of candidate offsets.
    #[arg(long, default_value_t = 250)]
    n_candidates: usize,
    /// Candidate spacing, µs.
    #[arg(long, default_value_t = 100)]
    step: u64,
    /// Accumulation window and coarse scan step, µs.
    #[arg(long, default_value_t = 25_000)]
    window: u64,
    /// Number of interleaved subsequences.
    #[arg(long, default_value_t = 3)]
    interleave: usize,
    /// Difference images averaged per candidate.
    #[arg(long, default_value_t = 10)]
    ssim_frames: usize,
    /// First subsequence frame used.
    #[arg(long, default_value_t = 0)]
    first_frame: usize,
    /// Centre of the fine search, µs, skipping the automatic coarse scan.
    #[arg(long, allow_negative_numbers = true)]
    coarse: Option<i64>,
    /// Count events instead of summing polarities.
    #[arg(long)]
    unsigned: bool,
    /// Pixel grid in which SSIM is computed.
    #[arg(long, value_enum, default_value = "frame")]
    compare_at: CompareAt,
}

#[derive(Args)]
struct RegisterArgs {
    /// Matched feature `xe,ye:xf,yf` (event sensor : frame camera); give twice.
    #[arg(long = "pair", num_args = 1)]
    pairs: Vec<String>,
    /// File with two lines `xe ye xf yf`.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Also write the registration file here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    registration: Option<PathBuf>,
    /// Clock offset, µs (event time minus frame time).
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    offset: i64,
    /// Frame camera size as WxH.
    #[arg(long)]
    target: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Synthesis,
    Warp,
    Blend,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Synthesis => Method::Synthesis,
            MethodArg::Warp => Method::Warp,
            MethodArg::Blend => Method::Blend,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Csv,
}

#[derive(Args)]
struct InterpArgs {
    /// Left boundary frame (PGM/PPM).
    #[arg(long, required_unless_present = "sequence")]
    left: Option<PathBuf>,
    /// Right boundary frame.
    #[arg(long, required_unless_present = "sequence")]
    right: Option<PathBuf>,
    /// Time of the left frame, µs.
    #[arg(long, required_unless_present = "sequence")]
    t_left: Option<u64>,
    /// Time of the right frame, µs.
    #[arg(long, required_unless_present = "sequence")]
    t_right: Option<u64>,
    /// Frame manifest: run the subsample-and-upscale grid against it.
    #[arg(long, conflicts_with_all = ["left", "right"])]
    sequence: Option<PathBuf>,
    /// Event file, already in frame-camera coordinates unless
    /// --registration or --offset is given.
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    registration: Option<PathBuf>,
    /// Clock offset, µs (event time minus frame time).
    #[arg(long, allow_negative_numbers = true)]
    offset: Option<i64>,
    /// Upscale factor: factor - 1 frames between the boundary frames.
    #[arg(long, default_value_t = 2)]
    factor: u32,
    /// Grid factors (with --sequence).
    #[arg(long, value_delimiter = ',', default_value = "3,6,12")]
    factors: Vec<u32>,
    #[arg(long, value_enum, default_value = "blend")]
    method: MethodArg,
    #[arg(long, default_value_t = 0.15)]
    contrast: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 16)]
    block: usize,
    #[arg(long, default_value_t = 8)]
    radius: usize,
    /// Minimum events per block for a flow vector.
    #[arg(long, default_value_t = 4.0)]
    energy_floor: f64,
    /// Weight of warped against synthesized frames.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Output directory for frames and manifest.
    #[arg(long, required_unless_present = "sequence")]
    out: Option<PathBuf>,
    /// Grid report format.
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

#[derive(Args)]
struct MetricsArgs {
    a: PathBuf,
    b: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Score curve CSV as written by `align --curve`.
    curve: PathBuf,
    /// Output SVG.
    out: PathBuf,
}

#[derive(Args)]
struct AccumulateArgs {
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    t0: u64,
    #[arg(long)]
    window: u64,
    #[arg(long)]
    unsigned: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VoxelArgs {
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    t0: u64,
    #[arg(long)]
    t1: u64,
    #[arg(long, default_value_t = 5)]
    bins: usize,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Convert(a) => cmd_convert(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Align(a) => cmd_align(a),
        Command::Register(a) => cmd_register(a),
        Command::Project(a) => cmd_project(a),
        Command::Interp(a) => cmd_interp(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::PlotSsim(a) => cmd_plot(a),
        Command::Accumulate(a) => cmd_accumulate(a),
        Command::Voxel(a) => cmd_voxel(a),
    }
}

fn read_events(path: &Path) -> Result<EventStream> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let stream = if bytes.starts_with(b"EVB1") {
        parse_events_binary(&bytes)
    } else {
        parse_events_csv(&bytes)
    };
    stream.with_context(|| format!("parsing {}", path.display()))
}

fn read_registration(path: Option<&Path>) -> Result<SpatialRegistration> {
    match path {
        None => Ok(SpatialRegistration::IDENTITY),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let line = text
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty() && !l.starts_with('#'))
                .unwrap_or("");
            SpatialRegistration::parse(line).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .with_context(|| format!("expected WxH, got {s:?}"))?;
    Ok((w.trim().parse()?, h.trim().parse()?))
}

fn cmd_convert(a: ConvertArgs) -> Result<()> {
    let stream = read_events(&a.input)?;
    let format = a.to.unwrap_or_else(|| {
        match a.output.extension().and_then(|e| e.to_str()) {
            Some("csv") | Some("txt") => EventFormat::Csv,
            _ => EventFormat::Evb,
        }
    });
    let bytes = match format {
        EventFormat::Csv => write_events_csv(&stream).into_bytes(),
        EventFormat::Evb => write_events_binary(&stream),
    };
    fs::write(&a.output, bytes).with_context(|| format!("writing {}", a.output.display()))?;
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let scene = match &a.scene {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_scene(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => SceneSpec::demo(),
    };
    let fps = Fps::parse(&a.fps)?;
    let reg = match &a.registration {
        Some(s) => SpatialRegistration::parse(s)?,
        None => SpatialRegistration::IDENTITY,
    };
    let (sw, sh) = match &a.sensor {
        Some(s) => parse_size(s)?,
        None => (scene.width, scene.height),
    };
    let model = EventCameraModel {
        contrast: a.contrast,
        epsilon: a.epsilon,
        sim_step: a.sim_step,
        supersample: a.supersample,
        threshold_jitter: a.jitter,
        seed: a.seed,
    };
    model.validate()?;

    let gray = generate_sequence(&scene, fps, a.supersample)?;
    fs::create_dir_all(&a.out)?;
    if a.rgb {
        let rgb = FrameSequence::new(
            gray.frames().iter().map(RgbFrame::from_gray).collect(),
            gray.nominal_fps,
        )?;
        write_sequence(&a.out, "frame_", &rgb)?;
    } else {
        write_sequence(&a.out, "frame_", &gray)?;
    }

    let sensor_scene = scene.as_seen_through(&reg, sw, sh);
    let events = shift_events(&generate_events(&sensor_scene, &model)?, a.shift)?;
    fs::write(a.out.join("events.evb"), write_events_binary(&events))?;
    fs::write(a.out.join("registration.txt"), format!("{reg}\n"))?;
    fs::write(
        a.out.join("ground_truth.txt"),
        format!(
            "shift_us={}\ndx={} dy={} r={}\nevents={}\nframes={}\n",
            a.shift,
            reg.dx,
            reg.dy,
            reg.r,
            events.len(),
            gray.len()
        ),
    )?;
    let (w, h) = (sw as f64, sh as f64);
    let feats = synthetic_features(&reg, [0.25 * w, 0.25 * h], [0.75 * w, 0.75 * h]);
    let mut text = String::from("# xe ye xf yf\n");
    for f in feats {
        writeln!(text, "{} {} {} {}", f.event[0], f.event[1], f.frame[0], f.frame[1])?;
    }
    fs::write(a.out.join("features.txt"), text)?;
    println!("frames={} events={}", gray.len(), events.len());
    Ok(())
}

fn cmd_align(a: AlignArgs) -> Result<()> {
    let frames = read_sequence(&a.frames)
        .with_context(|| format!("reading {}", a.frames.display()))?
        .to_gray();
    let events = read_events(&a.events)?;
    let reg = read_registration(a.registration.as_deref())?;
    let cfg = AlignConfig {
        n_candidates: a.n_candidates,
        step: a.step,
        window: a.window,
        interleave: a.interleave,
        ssim_frames: a.ssim_frames,
        first_frame: a.first_frame,
        polarity: if a.unsigned { Polarity::Unsigned } else { Polarity::Signed },
        geometry: match a.compare_at {
            CompareAt::Frame => CompareGeometry::FrameCamera,
            CompareAt::Event => CompareGeometry::EventSensor,
        },
    };
    let result = synchronize(&frames, &events, &reg, &cfg, a.coarse)?;
    if !result.empty_candidates.is_empty() {
        eprintln!(
            "warning: {} candidates had no events and were scored -1",
            result.empty_candidates.len()
        );
    }
    let report = format!(
        "# projection: x_i = r*(x_j - dx), y_i = r*(y_j - dy), t_i = t_j - offset_us\n\
         # registration: {reg}\n{}\n",
        result.report_line()
    );
    print!("{report}");
    if let Some(p) = &a.report {
        fs::write(p, &report).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &a.curve {
        fs::write(p, result.curve_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn parse_point(s: &str) -> Result<[f64; 2]> {
    let (x, y) = s
        .split_once(',')
        .with_context(|| format!("expected x,y, got {s:?}"))?;
    Ok([x.trim().parse()?, y.trim().parse()?])
}

fn cmd_register(a: RegisterArgs) -> Result<()> {
    let pairs: Vec<FeaturePair> = if let Some(p) = &a.features {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|(i, l)| {
                let v: Vec<f64> = l
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .with_context(|| format!("{}: line {}: invalid number", p.display(), i + 1))?;
                if v.len() != 4 {
                    bail!("{}: line {}: expected xe ye xf yf", p.display(), i + 1);
                }
                Ok(FeaturePair { event: [v[0], v[1]], frame: [v[2], v[3]] })
            })
            .collect::<Result<_>>()?
    } else {
        a.pairs
            .iter()
            .map(|s| {
                let (e, f) = s
                    .split_once(':')
                    .with_context(|| format!("expected xe,ye:xf,yf, got {s:?}"))?;
                Ok(FeaturePair { event: parse_point(e)?, frame: parse_point(f)? })
            })
            .collect::<Result<_>>()?
    };
    if pairs.len() != 2 {
        bail!("need exactly two feature pairs, got {}", pairs.len());
    }
    let reg = estimate_registration(pairs[0], pairs[1])?;
    println!("{reg}");
    if let Some(p) = &a.out {
        fs::write(p, format!("{reg}\n"))?;
    }
    Ok(())
}

fn cmd_project(a: ProjectArgs) -> Result<()> {
    let events = read_events(&a.events)?;
    let reg = read_registration(a.registration.as_deref())?;
    let (w, h) = parse_size(&a.target)?;
    let proj = build_projection(reg, a.offset, u16::try_from(w)?, u16::try_from(h)?)?;
    let (out, dropped) = proj.project_stream(&events);
    let bytes = match a.out.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("txt") => write_events_csv(&out).into_bytes(),
        _ => write_events_binary(&out),
    };
    fs::write(&a.out, bytes)?;
    println!("projected={} dropped={dropped}", out.len());
    Ok(())
}

fn interp_params(a: &InterpArgs) -> InterpParams {
    InterpParams {
        contrast: a.contrast,
        epsilon: a.epsilon,
        method: a.method.into(),
        flow: BlockMatchConfig {
            block: a.block,
            radius: a.radius,
            energy_floor: a.energy_floor,
        },
        alpha: a.alpha,
    }
}

fn registered_events(a: &InterpArgs, dims: (usize, usize)) -> Result<EventStream> {
    let events = read_events(&a.events)?;
    if a.registration.is_none() && a.offset.is_none() {
        return Ok(events);
    }
    let reg = read_registration(a.registration.as_deref())?;
    let proj = build_projection(reg, a.offset.unwrap_or(0), u16::try_from(dims.0)?, u16::try_from(dims.1)?)?;
    let (out, dropped) = proj.project_stream(&events);
    if dropped > 0 {
        eprintln!("note: {dropped} events fell outside the frame and were dropped");
    }
    Ok(out)
}

fn cmd_interp(a: InterpArgs) -> Result<()> {
    let params = interp_params(&a);
    if let Some(manifest) = &a.sequence {
        let seq = read_sequence(manifest).with_context(|| format!("reading {}", manifest.display()))?;
        let events = registered_events(&a, seq.geometry().context("empty frame sequence")?)?;
        let reports = evaluate_grid(&seq, &events, &a.factors, &params)?;
        match a.format {
            ReportFormat::Text => reports.iter().for_each(|r| print!("{}", r.text())),
            ReportFormat::Csv => {
                println!("{}", GridReport::csv_header());
                reports.iter().for_each(|r| print!("{}", r.csv_rows()));
            }
        }
        return Ok(());
    }
    let (left, right) = (a.left.as_ref().unwrap(), a.right.as_ref().unwrap());
    let (t_l, t_r) = (a.t_left.unwrap(), a.t_right.unwrap());
    if t_r <= t_l {
        bail!("--t-right must be greater than --t-left");
    }
    let left = read_frame(left, t_l).with_context(|| format!("reading {}", left.display()))?;
    let right = read_frame(right, t_r).with_context(|| format!("reading {}", right.display()))?;
    let events = registered_events(&a, left.dims())?;
    let request = InterpolationRequest {
        left: left.clone(),
        right: right.clone(),
        events,
        targets: upscale_targets(t_r - t_l, a.factor)?,
        params,
    };
    let middle = interpolate(&request)?;
    let nominal_fps = middle.nominal_fps;
    let mut frames = vec![left];
    frames.extend(middle.into_frames());
    frames.push(right);
    let out = a.out.as_ref().unwrap();
    write_sequence(out, "frame_", &FrameSequence::new(frames, nominal_fps)?)?;
    println!("frames={} dir={}", a.factor + 1, out.display());
    Ok(())
}

fn fmt_metric(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

fn cmd_metrics(a: MetricsArgs) -> Result<()> {
    let fa = read_frame(&a.a, 0).with_context(|| format!("reading {}", a.a.display()))?;
    let fb = read_frame(&a.b, 0).with_context(|| format!("reading {}", a.b.display()))?;
    let (ga, gb): (GrayFrame, GrayFrame) = (fa.to_gray(), fb.to_gray());
    println!("ssim={} psnr={}", fmt_metric(ssim(&ga, &gb)?), fmt_metric(psnr(&ga, &gb)?));
    Ok(())
}

/// Parsed `subseq,k,ssim` rows.
fn parse_curve(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "subseq,k,ssim" => {}
        _ => bail!("line 1: expected header subseq,k,ssim"),
    }
    let rows = lines
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').map(str::trim).collect();
            if f.len() != 3 {
                bail!("line {}: expected 3 fields", i + 1);
            }
            let parsed = (f[0].parse::<usize>(), f[1].parse::<usize>(), f[2].parse::<f64>());
            match parsed {
                (Ok(m), Ok(k), Ok(s)) if s.is_finite() => Ok((m, k, s)),
                _ => bail!("line {}: invalid row {l:?}", i + 1),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        bail!("score curve has no rows");
    }
    Ok(rows)
}

fn plot_svg(rows: &[(usize, usize, f64)]) -> (String, (usize, usize, f64)) {
    let best = rows
        .iter()
        .copied()
        .fold(rows[0], |b, r| if r.2 > b.2 || (r.2 == b.2 && (r.0, r.1) < (b.0, b.1)) { r } else { b });
    let (w, h, pad) = (800.0, 400.0, 40.0);
    let k_max = rows.iter().map(|r| r.1).max().unwrap_or(0).max(1) as f64;
    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.2), hi.max(r.2)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let px = |k: usize| pad + (w - 2.0 * pad) * k as f64 / k_max;
    let py = |s: f64| h - pad - (h - 2.0 * pad) * (s - lo) / span;
    let colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
    let mut subs: Vec<usize> = rows.iter().map(|r| r.0).collect();
    subs.sort_unstable();
    subs.dedup();

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <line x1=\"{pad}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <text x=\"{tx}\" y=\"{ty}\" font-size=\"12\">k</text>\n\
         <text x=\"4\" y=\"{pad}\" font-size=\"12\">SSIM</text>\n",
        y0 = h - pad,
        x1 = w - pad,
        tx = w / 2.0,
        ty = h - 8.0,
    );
    for (i, m) in subs.iter().enumerate() {
        let mut pts: Vec<(usize, f64)> = rows.iter().filter(|r| r.0 == *m).map(|r| (r.1, r.2)).collect();
        pts.sort_by_key(|p| p.0);
        let points: Vec<String> = pts.iter().map(|&(k, s)| format!("{:.2},{:.2}", px(k), py(s))).collect();
        let _ = writeln!(
            svg,
            "<polyline data-subseq=\"{m}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
            colors[i % colors.len()],
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{}\">Seq {m}</text>",
            w - pad - 60.0,
            pad + 14.0 * (i as f64 + 1.0),
            colors[i % colors.len()]
        );
    }
    let _ = writeln!(
        svg,
        "<circle class=\"argmax\" data-subseq=\"{}\" data-k=\"{}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"none\" stroke=\"black\"/>",
        best.0,
        best.1,
        px(best.1),
        py(best.2)
    );
    svg.push_str("</svg>\n");
    (svg, best)
}

fn cmd_plot(a: PlotArgs) -> Result<()> {
    let text = fs::read_to_string(&a.curve).with_context(|| format!("reading {}", a.curve.display()))?;
    let rows = parse_curve(&text).with_context(|| format!("parsing {}", a.curve.display()))?;
    let (svg, (m, k, s)) = plot_svg(&rows);
    fs::write(&a.out, svg).with_context(|| format!("writing {}", a.out.display()))?;
    println!("subseq={m} k={k} ssim={s}");
    Ok(())
}

fn cmd_accumulate(a: AccumulateArgs) -> Result<()> {
    let events = read_events(&a.events)?;
    let mode = if a.unsigned { Polarity::Unsigned } else { Polarity::Signed };
    let acc = accumulate_with(&events, a.t0, a.window, mode)?;
    write_frame(&a.out, &Frame::Gray(normalize_accum(&acc)))?;
    println!("events={} total={}", acc.energy(), acc.total());
    Ok(())
}

fn cmd_voxel(a: VoxelArgs) -> Result<()> {
    let events = read_events(&a.events)?;
    let grid = to_voxel_grid(&events, a.t0, a.t1, a.bins)?;
    let file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    grid.write_to(std::io::BufWriter::new(file))?;
    println!("bins={} total={}", grid.bins, grid.total());
    Ok(())
}
