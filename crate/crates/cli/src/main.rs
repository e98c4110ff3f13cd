use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use dynatrack::lifecycle::classify_events;
use dynatrack::oracle::brute_force_track;
use dynatrack::render::{AlluvialLayout, RenderOptions};
use dynatrack::report::ResultDocument;
use dynatrack::sweep::{check_range, mark_best, sweep_point, to_csv};
use dynatrack::synthetic::{generate, ScenarioSpec};
use dynatrack::{track, ClusteringSequence, Error, InputFormat, Relations};

/// Track dynamic clusters through a time series of clusterings.
#[derive(Parser)]
#[command(name = "dynatrack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label every cluster with a dynamic cluster id.
    Track(TrackArgs),
    /// Track with a range of history values and score each one.
    Sweep(SweepArgs),
    /// List life-cycle events of a tracking result.
    Events(EventsArgs),
    /// Draw a tracking result as an alluvial diagram (SVG).
    Render(RenderArgs),
    /// Generate a synthetic clustering sequence from a scenario file.
    Generate(GenerateArgs),
    /// Label with the brute-force reference tracker (small inputs only).
    Oracle(TrackArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Clustering sequence (JSON or CSV).
    #[arg(long)]
    input: PathBuf,
    /// Input format; defaults to the file extension, then JSON.
    #[arg(long)]
    format: Option<InputFormat>,
}

#[derive(Args)]
struct TrackArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of snapshots a match may reach back.
    #[arg(long)]
    history: usize,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    history_min: usize,
    #[arg(long)]
    history_max: usize,
    /// Write full rows, including lifespan histograms, as JSON.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EventsArgs {
    /// Result document written by `track`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Result document written by `track`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the computed layout as JSON.
    #[arg(long)]
    layout: Option<PathBuf>,
    #[arg(long, default_value_t = 12.0)]
    block_width: f64,
    /// Vertical space between blocks.
    #[arg(long, default_value_t = 4.0)]
    gap: f64,
    /// Horizontal space between columns.
    #[arg(long, default_value_t = 60.0)]
    column_spacing: f64,
    /// SVG size per layout unit.
    #[arg(long, default_value_t = 4.0)]
    scale: f64,
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Ground-truth labels; defaults to `<output stem>.truth.json`.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: InputFormat,
}

fn read_sequence(args: &InputArgs) -> Result<ClusteringSequence> {
    let format =
        args.format
            .unwrap_or_else(|| match args.input.extension().and_then(|e| e.to_str()) {
                Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
                _ => InputFormat::Json,
            });
    let file = fs::File::open(&args.input)
        .with_context(|| format!("cannot open {}", args.input.display()))?;
    ClusteringSequence::parse(io::BufReader::new(file), format)
        .with_context(|| format!("cannot read {}", args.input.display()))
}

fn read_result(path: &Path) -> Result<ResultDocument> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot open {}", path.display()))?;
    ResultDocument::from_json(&text).with_context(|| format!("cannot read {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .context("cannot write to stdout"),
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("serializable");
    out.push('\n');
    out
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Track(args) => {
            let seq = read_sequence(&args.input)?;
            let dc = track(&seq, args.history);
            write_output(
                args.output.as_deref(),
                &ResultDocument::new(&seq, &dc).to_json(),
            )
        }
        Command::Oracle(args) => {
            let seq = read_sequence(&args.input)?;
            let dc = brute_force_track(&seq, args.history)?;
            write_output(
                args.output.as_deref(),
                &ResultDocument::new(&seq, &dc).to_json(),
            )
        }
        Command::Sweep(args) => {
            let range = args.history_min..=args.history_max;
            check_range(&range)?;
            let seq = read_sequence(&args.input)?;
            let rels = Relations::build(&seq);
            let mut rows: Vec<_> = range
                .into_par_iter()
                .map(|x| sweep_point(&seq, &rels, x))
                .collect();
            mark_best(&mut rows);
            let best: Vec<String> = rows
                .iter()
                .filter(|r| r.best)
                .map(|r| r.history.to_string())
                .collect();
            if !best.is_empty() {
                eprintln!("highest total consistency at x = {}", best.join(", "));
            }
            let text = if args.json {
                json_line(&rows)
            } else {
                to_csv(&rows)
            };
            write_output(args.output.as_deref(), &text)
        }
        Command::Events(args) => {
            let (seq, dc) = read_result(&args.input)?.into_parts()?;
            write_output(
                args.output.as_deref(),
                &json_line(&classify_events(&dc, &seq)),
            )
        }
        Command::Render(args) => {
            let (seq, dc) = read_result(&args.input)?.into_parts()?;
            let opts = RenderOptions {
                block_width: args.block_width,
                gap: args.gap,
                column_spacing: args.column_spacing,
                scale: args.scale,
                ..RenderOptions::default()
            };
            let layout = AlluvialLayout::new(&seq, &dc, &opts);
            if let Some(path) = &args.layout {
                write_output(Some(path), &layout.to_json())?;
            }
            write_output(args.output.as_deref(), &layout.to_svg(&opts))
        }
        Command::Generate(args) => {
            let text = fs::read_to_string(&args.spec)
                .with_context(|| format!("cannot open {}", args.spec.display()))?;
            let spec: ScenarioSpec = serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
            let scenario = generate(&spec)?;
            let body = match args.format {
                InputFormat::Json => scenario.sequence.to_json(),
                InputFormat::Csv => scenario.sequence.to_csv(),
            };
            write_output(Some(&args.output), &body)?;
            let truth = args.truth.unwrap_or_else(|| {
                let stem = args
                    .output
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("scenario");
                args.output.with_file_name(format!("{stem}.truth.json"))
            });
            write_output(Some(&truth), &json_line(&scenario.truth))
        }
    }
}

/// Malformed input and bad arguments exit with 2, everything else with 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. } | Error::Schema(_) | Error::OutOfRange(_)) => 2,
        Some(
            Error::DuplicateMember { .. }
            | Error::EmptyCluster { .. }
            | Error::EmptyMemberId { .. }
            | Error::SnapshotGap { .. }
            | Error::EmptySequence
            | Error::Scenario(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
