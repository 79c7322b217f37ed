use clap::{Args, Parser, Subcommand, ValueEnum};
use ovc_core::pgm;
use ovc_core::run::{self, BenchConfig, BenchInput, RunReport, StreamConfig};
use ovc_core::sensor_sim::{self, FrameSource, SensorRigConfig, SyntheticScene};
use ovc_core::transport::{self, BundleHeader};
use ovc_core::types::{Corner, DetectorConfig, Frame, DEFAULT_THRESHOLD};
use ovc_core::verify::{self, Fault, VerifyConfig};
use ovc_core::{detect_frame, suppress_map};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ovc",
    version,
    about = "Streaming AST corner detector and stereo/IMU front-end simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect corners in one PGM image.
    Detect(DetectArgs),
    /// Check the streaming pipeline against the brute-force oracle.
    Verify(VerifyArgs),
    /// Run the simulated sensors through the full pipeline.
    Stream(StreamArgs),
    /// Measure stereo throughput of detection + suppression + encoding.
    Bench(BenchArgs),
    /// Print the contents of an .ovcb bundle file.
    Inspect(InspectArgs),
    /// Write a synthetic test image as PGM.
    Synth(SynthArgs),
}

#[derive(Args, Clone, Copy)]
struct DetectorFlags {
    /// Contrast threshold, 0..=254.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD as i64)]
    threshold: i64,
    /// Pixels consumed per tick: 1, 2, 4 or 8.
    #[arg(long, default_value_t = 4)]
    lanes: i64,
}

impl DetectorFlags {
    fn config(self) -> Result<DetectorConfig, String> {
        DetectorConfig::new(self.threshold, self.lanes).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct DetectArgs {
    image: PathBuf,
    #[command(flatten)]
    detector: DetectorFlags,
    /// Corner file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write the frame and its corners as an .ovcb bundle.
    #[arg(long)]
    bundle: Option<PathBuf>,
    /// Dump the pre-suppression score map as a PGM.
    #[arg(long)]
    score_map: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    DropLastCorner,
    BumpScores,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Random frames per size.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Comma-separated WxH list.
    #[arg(long, value_delimiter = ',', value_parser = parse_size, default_value = "16x16,64x64,257x129")]
    sizes: Vec<(usize, usize)>,
    #[arg(long, value_delimiter = ',', default_value = "0,10,20,60")]
    thresholds: Vec<u8>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    lanes: Vec<usize>,
    /// Corrupt the streaming output on purpose (harness self-test).
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Args)]
struct RigFlags {
    #[arg(long, default_value_t = sensor_sim::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = sensor_sim::DEFAULT_WIDTH)]
    width: usize,
    #[arg(long, default_value_t = sensor_sim::DEFAULT_HEIGHT)]
    height: usize,
}

#[derive(Args)]
struct StreamArgs {
    #[command(flatten)]
    rig: RigFlags,
    #[command(flatten)]
    detector: DetectorFlags,
    #[arg(long, default_value_t = sensor_sim::DEFAULT_FRAME_RATE_HZ)]
    frame_rate: u32,
    #[arg(long, default_value_t = sensor_sim::DEFAULT_IMU_RATE_HZ)]
    imu_rate: u32,
    #[arg(long, default_value_t = transport::DEFAULT_RING_CAPACITY)]
    ring_capacity: usize,
    /// Simulated seconds to run.
    #[arg(long, default_value_t = 5.0)]
    duration: f64,
    /// Pace the simulation to the wall clock.
    #[arg(long)]
    realtime: bool,
    /// PGM files to play instead of the synthetic scene.
    #[arg(long, num_args = 1..)]
    images: Vec<PathBuf>,
    /// Stop when the image list is exhausted instead of looping.
    #[arg(long)]
    no_loop: bool,
    /// Corner motifs per synthetic frame.
    #[arg(long)]
    motifs: Option<usize>,
    /// Write each delivered bundle into this directory.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark on this PGM instead of the synthetic scene.
    #[arg(long)]
    image: Option<PathBuf>,
    #[command(flatten)]
    rig: RigFlags,
    #[command(flatten)]
    detector: DetectorFlags,
    #[arg(long, default_value_t = 200)]
    frames: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct InspectArgs {
    bundle: PathBuf,
    /// Write the bundle's corners here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Extract the raw image as PGM.
    #[arg(long)]
    image: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    /// Constant intensity.
    Flat,
    /// One dark dot in a bright 7×7 square on a flat background.
    Motif,
    /// Left image of the synthetic rig scene.
    Scene,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = SynthKind::Scene)]
    kind: SynthKind,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = sensor_sim::DEFAULT_SEED)]
    seed: u64,
    /// Motif center as X,Y (defaults to the image center).
    #[arg(long, value_parser = parse_point)]
    at: Option<(usize, usize)>,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    Ok((
        w.trim().parse().map_err(|e| format!("{s:?}: {e}"))?,
        h.trim().parse().map_err(|e| format!("{s:?}: {e}"))?,
    ))
}

fn parse_point(s: &str) -> Result<(usize, usize), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected X,Y, got {s:?}"))?;
    Ok((
        x.trim().parse().map_err(|e| format!("{s:?}: {e}"))?,
        y.trim().parse().map_err(|e| format!("{s:?}: {e}"))?,
    ))
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn load_frame(path: &Path) -> Result<Frame, Failure> {
    let img = pgm::read(path).map_err(Failure::usage)?;
    Frame::from_pixels(img.width, img.height, img.pixels)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_corners(corners: &[Corner], format: Format, out: Option<&Path>) -> CmdResult {
    let mut text = String::new();
    match format {
        Format::Csv => {
            text.push_str("x,y,score,polarity\n");
            for c in corners {
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    c.x,
                    c.y,
                    c.score,
                    c.polarity.as_str()
                ));
            }
        }
        Format::Jsonl => {
            for c in corners {
                let line = serde_json::json!({
                    "x": c.x,
                    "y": c.y,
                    "score": c.score,
                    "polarity": c.polarity.as_str(),
                });
                text.push_str(&line.to_string());
                text.push('\n');
            }
        }
    }
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(Failure::usage),
    }
}

fn cmd_detect(args: DetectArgs) -> CmdResult {
    let config = args.detector.config().map_err(Failure::usage)?;
    let frame = load_frame(&args.image)?;
    let map = detect_frame(&frame, config).map_err(Failure::usage)?;
    let corners = suppress_map(&map);
    log::info!("{}: {} corners", args.image.display(), corners.len());
    if let Some(path) = &args.score_map {
        pgm::write(path, map.width(), map.height(), &map.to_image()).map_err(Failure::usage)?;
    }
    if let Some(path) = &args.bundle {
        let bytes = transport::encode_bundle(&frame, &corners).map_err(Failure::usage)?;
        std::fs::write(path, bytes)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    }
    write_corners(&corners, args.format, args.out.as_deref())
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    for &l in &args.lanes {
        DetectorConfig::new(0, l as i64).map_err(Failure::usage)?;
    }
    for &t in &args.thresholds {
        DetectorConfig::new(t as i64, 1).map_err(Failure::usage)?;
    }
    if let Some(&(w, h)) = args.sizes.iter().find(|&&(w, h)| w < 7 || h < 7) {
        return Err(Failure::usage(format!("size {w}x{h} is smaller than 7x7")));
    }
    if args.trials == 0 {
        log::warn!("zero trials requested; nothing to compare");
        eprintln!("warning: --trials 0, nothing was compared");
    }
    let cfg = VerifyConfig {
        seed: args.seed,
        trials: args.trials,
        sizes: args.sizes,
        thresholds: args.thresholds,
        lanes: args.lanes,
        fault: args.inject_fault.map(|f| match f {
            FaultArg::DropLastCorner => Fault::DropLastCorner,
            FaultArg::BumpScores => Fault::BumpScores,
        }),
    };
    let report = verify::run_verify(&cfg);
    println!(
        "{} frames, {} comparisons, {} oracle corners",
        report.frames, report.comparisons, report.corners_checked
    );
    if report.passed() {
        println!("PASS");
        return Ok(());
    }
    for m in report.mismatches.iter().take(10) {
        println!("{m}");
    }
    println!("FAIL: {} mismatching comparisons", report.mismatches.len());
    Err(Failure {
        code: 1,
        message: format!(
            "verification failed; reproduce with: {}",
            report.mismatches[0].reproducer()
        ),
    })
}

fn print_report(report: &RunReport, json: bool) {
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(report).expect("report serializes")
        );
    } else {
        print!("{report}");
    }
}

fn cmd_stream(args: StreamArgs) -> CmdResult {
    let detector = args.detector.config().map_err(Failure::usage)?;
    let source = if args.images.is_empty() {
        let mut scene = SyntheticScene::default();
        if let Some(m) = args.motifs {
            scene.motif_count = m;
        }
        FrameSource::Synthetic(scene)
    } else {
        FrameSource::ImageSequence {
            paths: args.images,
            looping: !args.no_loop,
        }
    };
    let cfg = StreamConfig {
        rig: SensorRigConfig {
            width: args.rig.width,
            height: args.rig.height,
            frame_rate_hz: args.frame_rate,
            imu_rate_hz: args.imu_rate,
            seed: args.rig.seed,
            source,
        },
        detector,
        ring_capacity: args.ring_capacity,
        duration_s: args.duration,
        realtime: args.realtime,
        dump_dir: args.dump_dir,
    };
    let report = run::stream(&cfg).map_err(Failure::usage)?;
    print_report(&report, args.json);
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> CmdResult {
    let detector = args.detector.config().map_err(Failure::usage)?;
    let input = match &args.image {
        Some(path) => BenchInput::Image(load_frame(path)?),
        None => BenchInput::Seed(args.rig.seed),
    };
    let report = run::bench(&BenchConfig {
        input,
        frames: args.frames,
        detector,
        width: args.rig.width,
        height: args.rig.height,
    })
    .map_err(Failure::usage)?;
    print_report(&report, args.json);
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> CmdResult {
    let bytes = std::fs::read(&args.bundle)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.bundle.display())))?;
    let header = BundleHeader::parse(&bytes).map_err(Failure::usage)?;
    let (frame, corners) = transport::decode_bundle(&bytes).map_err(Failure::usage)?;
    eprintln!("sensor        {:?}", header.sensor_id);
    eprintln!("frame id      {}", header.frame_id);
    eprintln!("timestamp     {} ns", header.timestamp_ns);
    eprintln!("size          {}x{}", header.width, header.height);
    eprintln!("features      {}", header.feature_count);
    eprintln!(
        "bytes         {} = 32 header + {} pixels + {} features",
        bytes.len(),
        header.pixel_len(),
        transport::FEATURE_LEN * corners.len()
    );
    if let Some(path) = &args.image {
        pgm::write(path, frame.width(), frame.height(), frame.pixels()).map_err(Failure::usage)?;
    }
    write_corners(&corners, args.format, args.out.as_deref())
}

fn cmd_synth(args: SynthArgs) -> CmdResult {
    let (w, h) = (args.width, args.height);
    if w < 7 || h < 7 {
        return Err(Failure::usage(format!("size {w}x{h} is smaller than 7x7")));
    }
    let pixels = match args.kind {
        SynthKind::Flat => vec![128; w * h],
        SynthKind::Motif => {
            let (x, y) = args.at.unwrap_or((w / 2, h / 2));
            if x < 3 || y < 3 || x + 3 >= w || y + 3 >= h {
                return Err(Failure::usage(format!("motif at {x},{y} does not fit")));
            }
            let mut px = vec![200; w * h];
            sensor_sim::stamp_motif(&mut px, w, x, y, 200, 50);
            px
        }
        SynthKind::Scene => {
            sensor_sim::synthetic_pair(args.seed, 0, w, h, &SyntheticScene::default()).0
        }
    };
    pgm::write(&args.out, w, h, &pixels).map_err(Failure::usage)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("OVC_LOG"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Stream(a) => cmd_stream(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ovc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
