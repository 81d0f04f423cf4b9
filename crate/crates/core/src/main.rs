use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use kineseq::classifier::{classify, load_dataset, pca_project, write_projection, EvaluationDataset};
use kineseq::config::EngineConfig;
use kineseq::geometry::{extract_features, AngleTable, RawFrame};
use kineseq::matcher::{generate_variants, MovementDictionary};
use kineseq::pipeline::{read_stream, run_benchmark, stream_lines, write_stream, Engine};
use kineseq::sequencer::TokenSeq;
use kineseq::synth::{build_dataset, render_stream, PoseSet, SynthScript};

#[derive(Parser)]
#[command(
    name = "kineseq",
    version,
    about = "Exercise movement recognition from body keypoint streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a keypoint stream and report recognised movements
    Analyze(AnalyzeArgs),
    /// Classify a single keypoint frame
    Classify(ClassifyArgs),
    /// Project a dataset onto its first two principal components (CSV)
    Project {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Generate tempo variants of an ideal sequence
    GenVariants {
        /// Ideal sequence, e.g. "A6 B6 C10 B6 A6"
        #[arg(long)]
        ideal: String,
        #[arg(long, value_delimiter = ',', default_value = "0.75,1.25")]
        scales: Vec<f64>,
    },
    /// Render a synthetic keypoint stream
    Simulate(SimulateArgs),
    /// Write a synthetic evaluation dataset
    BuildDataset {
        #[arg(long, default_value_t = 20)]
        per_pose: usize,
        #[arg(long, default_value_t = 2.0)]
        jitter: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Canonical pose file; the bundled poses by default
        #[arg(long)]
        poses: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Time the per-frame path on a full buffer
    Bench {
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        #[arg(long, default_value_t = 400)]
        variants: usize,
    },
}

/// Configuration sources, lowest precedence first: file, environment, flags.
#[derive(Args)]
struct EngineArgs {
    /// TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Angle definition JSON; the bundled table by default
    #[arg(long)]
    angles: Option<PathBuf>,
    #[arg(long)]
    frame_period_ms: Option<u64>,
    #[arg(long)]
    buffer_capacity: Option<usize>,
    #[arg(long)]
    null_threshold: Option<f64>,
    #[arg(long)]
    separator_len: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    edit_limit: Option<usize>,
    #[arg(long)]
    segment_len: Option<usize>,
    #[arg(long)]
    position_scale: Option<f64>,
    #[arg(long)]
    min_keypoint_score: Option<f64>,
}

impl EngineArgs {
    fn resolve(&self) -> Result<EngineConfig> {
        let mut cfg = match &self.config {
            Some(p) => EngineConfig::from_toml(&read_text(p)?).with_context(|| p.display().to_string())?,
            None => EngineConfig::default(),
        };
        cfg.apply_env(std::env::vars()).context("environment")?;
        macro_rules! flag {
            ($($f:ident),*) => {$( if let Some(v) = self.$f { cfg.$f = v; } )*};
        }
        flag!(
            frame_period_ms,
            buffer_capacity,
            null_threshold,
            separator_len,
            k,
            edit_limit,
            segment_len,
            position_scale,
            min_keypoint_score
        );
        cfg.validate().context("configuration")?;
        Ok(cfg)
    }

    fn angle_table(&self) -> Result<AngleTable> {
        match &self.angles {
            Some(p) => AngleTable::from_json(&read_text(p)?).with_context(|| p.display().to_string()),
            None => Ok(AngleTable::default()),
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Evaluation CSV
    #[arg(long)]
    dataset: PathBuf,
    /// Movement dictionary JSON
    #[arg(long)]
    dictionary: PathBuf,
    /// Keypoint stream; standard input when omitted
    #[arg(long)]
    input: Option<PathBuf>,
    /// Read one frame per line and emit one JSON event per line as movements
    /// complete
    #[arg(long)]
    stream: bool,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// One frame as JSON; standard input when omitted
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum StreamFormat {
    Json,
    Jsonl,
}

#[derive(Args)]
struct SimulateArgs {
    /// Segments in run syntax, e.g. "A6 B6 C10 B6 A6 NULL7"
    #[arg(long)]
    script: String,
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 150)]
    period_ms: u64,
    #[arg(long, default_value_t = 0)]
    start_ms: u64,
    #[arg(long)]
    poses: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: StreamFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => read_text(p),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("<stdin>")?;
            Ok(s)
        }
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("{}: cannot create", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open_dataset(path: &Path, k: usize) -> Result<EvaluationDataset> {
    let file = File::open(path).with_context(|| format!("{}: cannot open", path.display()))?;
    load_dataset(BufReader::new(file), k).with_context(|| path.display().to_string())
}

fn open_dictionary(path: &Path) -> Result<MovementDictionary> {
    MovementDictionary::from_json(&read_text(path)?).with_context(|| path.display().to_string())
}

fn open_poses(path: Option<&Path>, table: &AngleTable) -> Result<PoseSet> {
    match path {
        Some(p) => PoseSet::from_json(&read_text(p)?, table).with_context(|| p.display().to_string()),
        None => Ok(PoseSet::bundled()),
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let cfg = args.engine.resolve()?;
    let dataset = open_dataset(&args.dataset, cfg.k)?;
    let dictionary = open_dictionary(&args.dictionary)?;
    let mut engine = Engine::new(dataset, dictionary, args.engine.angle_table()?, cfg)?;
    let name = args
        .input
        .as_ref()
        .map_or_else(|| "<stdin>".to_string(), |p| p.display().to_string());
    let mut out = sink(None)?;

    if args.stream {
        let reader: Box<dyn BufRead> = match &args.input {
            Some(p) => Box::new(BufReader::new(
                File::open(p).with_context(|| format!("{name}: cannot open"))?,
            )),
            None => Box::new(io::stdin().lock()),
        };
        for frame in stream_lines(reader) {
            let frame = frame.with_context(|| name.clone())?;
            for event in engine.push(frame).with_context(|| name.clone())? {
                writeln!(out, "{}", serde_json::to_string(&event)?)?;
            }
            out.flush()?;
        }
        for event in engine.finish()? {
            writeln!(out, "{}", serde_json::to_string(&event)?)?;
        }
    } else {
        let frames = read_stream(&read_input(args.input.as_deref())?).with_context(|| name.clone())?;
        for f in frames {
            engine.push(f).with_context(|| name.clone())?;
        }
        engine.finish()?;
        writeln!(out, "{}", engine.report().to_json())?;
    }
    out.flush()?;
    Ok(())
}

fn classify_one(args: &ClassifyArgs) -> Result<()> {
    let cfg = args.engine.resolve()?;
    let dataset = open_dataset(&args.dataset, cfg.k)?;
    let name = args
        .input
        .as_ref()
        .map_or_else(|| "<stdin>".to_string(), |p| p.display().to_string());
    let frame: RawFrame = serde_json::from_str(&read_input(args.input.as_deref())?).with_context(|| name.clone())?;
    let features = extract_features(&frame, &args.engine.angle_table()?).with_context(|| name.clone())?;
    let c = classify(&features, &dataset);
    let gated = c.accuracy >= cfg.null_threshold;
    let doc = serde_json::json!({
        "label": c.label,
        "accuracy": c.accuracy,
        "votes": c.votes,
        "k": c.k,
        "accepted": gated,
        "features": features,
    });
    writeln!(io::stdout(), "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(a) => analyze(&a),
        Command::Classify(c) => classify_one(&c),
        Command::Project { dataset, output } => {
            let ds = open_dataset(&dataset, 1)?;
            let points = pca_project(&ds).with_context(|| dataset.display().to_string())?;
            let mut out = sink(output.as_deref())?;
            write_projection(&points, &mut out)?;
            out.flush()?;
            Ok(())
        }
        Command::GenVariants { ideal, scales } => {
            let ideal: TokenSeq = ideal.parse().context("--ideal")?;
            let variants = generate_variants(&ideal, &scales).context("--scales")?;
            let names: Vec<String> = variants.iter().map(ToString::to_string).collect();
            writeln!(io::stdout(), "{}", serde_json::to_string_pretty(&names)?)?;
            Ok(())
        }
        Command::Simulate(s) => {
            let script = SynthScript::parse(&s.script, s.jitter, s.seed).context("--script")?;
            let poses = open_poses(s.poses.as_deref(), &AngleTable::default())?;
            let frames = render_stream(&script, &poses, s.period_ms, s.start_ms)?;
            let mut out = sink(s.output.as_deref())?;
            match s.format {
                StreamFormat::Jsonl => out.write_all(write_stream(&frames).as_bytes())?,
                StreamFormat::Json => writeln!(out, "{}", serde_json::to_string(&frames)?)?,
            }
            out.flush()?;
            Ok(())
        }
        Command::BuildDataset {
            per_pose,
            jitter,
            seed,
            poses,
            engine,
            output,
        } => {
            let cfg = engine.resolve()?;
            let table = engine.angle_table()?;
            let poses = open_poses(poses.as_deref(), &table)?;
            let mut out = sink(output.as_deref())?;
            build_dataset(&poses, per_pose, jitter, seed, &table, cfg.position_scale, &mut out)?;
            out.flush()?;
            Ok(())
        }
        Command::Bench { iterations, variants } => {
            if iterations == 0 || variants == 0 {
                bail!("--iterations and --variants must be positive");
            }
            let report = run_benchmark(iterations, variants);
            writeln!(io::stdout(), "{}", serde_json::to_string_pretty(&report)?)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream closed the pipe, e.g. `| head`
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
