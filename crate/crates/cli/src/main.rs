//! Command-line front end: one subcommand per pipeline stage.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/validation error.
//! Diagnostics go to stderr; the artifact goes to `--output` or stdout.

use std::fs::File;
use std::io::{BufReader, Write};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use traceagg::{
    build_aggregate, filter_incomplete, find_optimal_threshold, get_groups, render_group_dot,
    render_service_dot, EncodingKind, GroupingDoc, ServiceName, Threshold, TraceSet,
};

#[derive(Parser)]
#[command(
    name = "traceagg",
    version,
    about = "Filter, group, and aggregate distributed traces by workflow similarity"
)]
struct Cli {
    /// Print per-stage wall-clock timings to stderr.
    #[arg(long, global = true)]
    time: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Remove traces whose edge set is a proper subset of another trace's.
    Preprocess {
        /// Trace-set JSON to read.
        #[arg(long)]
        input: PathBuf,
        /// Where to write the kept trace set (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the full filter report (kept set plus removals with
        /// witnesses) to this path.
        #[arg(long)]
        removed: Option<PathBuf>,
    },
    /// Group traces at a fixed similarity threshold.
    Group {
        #[arg(long)]
        input: PathBuf,
        /// Trace encoding to compare.
        #[arg(long, default_value = "services", value_parser = parse_encoding)]
        encoding: EncodingKind,
        /// Similarity threshold in [0, 1], as a decimal.
        #[arg(long, value_parser = parse_threshold)]
        threshold: Threshold,
        /// Filter incomplete traces before grouping.
        #[arg(long)]
        preprocess: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Search for the threshold whose group count is closest to a goal.
    FindThreshold {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "services", value_parser = parse_encoding)]
        encoding: EncodingKind,
        /// Desired number of groups (>= 1).
        #[arg(long)]
        goal_groups: NonZeroUsize,
        /// Filter incomplete traces before searching.
        #[arg(long)]
        preprocess: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build and render the aggregate view of one group.
    Aggregate {
        /// The traces the grouping was computed from.
        #[arg(long)]
        input: PathBuf,
        /// Grouping JSON produced by `group` or `find-threshold`.
        #[arg(long)]
        groups: PathBuf,
        /// Which group to aggregate, by position in the grouping file.
        #[arg(long)]
        group_index: usize,
        /// Render the chosen-service view for this service (DOT only).
        #[arg(long)]
        service: Option<String>,
        /// Output format; defaults to json, or dot when --service is given.
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

fn parse_encoding(text: &str) -> Result<EncodingKind, String> {
    text.parse()
}

fn parse_threshold(text: &str) -> Result<Threshold, String> {
    Threshold::parse_decimal(text).map_err(|e| e.to_string())
}

enum CliError {
    Usage(String),
    Data(String),
}

impl From<traceagg::Error> for CliError {
    fn from(err: traceagg::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

struct Stages {
    enabled: bool,
}

impl Stages {
    fn run<T>(&self, name: &str, f: impl FnOnce() -> T) -> T {
        let started = Instant::now();
        let value = f();
        if self.enabled {
            eprintln!("[time] {name}: {:.3?}", started.elapsed());
        }
        value
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stages = Stages { enabled: cli.time };
    match cli.command {
        Command::Preprocess {
            input,
            output,
            removed,
        } => {
            let traces = stages.run("load", || load_traces(&input))?;
            let report = stages.run("filter", || filter_incomplete(&traces));
            eprintln!(
                "kept {}, removed {}",
                report.kept.len(),
                report.removed.len()
            );
            if let Some(path) = removed {
                write_file(&path, &report.to_json())?;
            }
            stages.run("write", || write_artifact(output.as_deref(), &report.kept.to_json()))
        }
        Command::Group {
            input,
            encoding,
            threshold,
            preprocess,
            output,
        } => {
            let traces = load_preprocessed(&stages, &input, preprocess)?;
            let grouping = stages.run("group", || get_groups(&traces, encoding, threshold));
            eprintln!("{} groups at threshold {}", grouping.num_groups(), threshold);
            stages.run("write", || {
                write_artifact(output.as_deref(), &grouping.to_json(&traces))
            })
        }
        Command::FindThreshold {
            input,
            encoding,
            goal_groups,
            preprocess,
            output,
        } => {
            let traces = load_preprocessed(&stages, &input, preprocess)?;
            let result =
                stages.run("search", || find_optimal_threshold(&traces, encoding, goal_groups))?;
            eprintln!(
                "threshold {} gives {} groups (goal {goal_groups}, {} probes)",
                result.threshold,
                result.num_groups,
                result.probes.len()
            );
            stages.run("write", || {
                write_artifact(output.as_deref(), &result.to_json(&traces))
            })
        }
        Command::Aggregate {
            input,
            groups,
            group_index,
            service,
            format,
            output,
        } => {
            let format = match (format, &service) {
                (Some(Format::Json), Some(_)) => {
                    return Err(CliError::Usage(
                        "--service renders a DOT view; it cannot be combined with --format json"
                            .into(),
                    ))
                }
                (Some(f), _) => f,
                (None, Some(_)) => Format::Dot,
                (None, None) => Format::Json,
            };
            let traces = stages.run("load", || load_traces(&input))?;
            let doc = stages.run("load groups", || load_grouping(&groups))?;
            let group = doc.groups.get(group_index).ok_or_else(|| {
                CliError::Data(format!(
                    "group index {group_index} out of range for {} groups",
                    doc.groups.len()
                ))
            })?;
            let members = group
                .members
                .iter()
                .map(|id| {
                    traces
                        .position_of_id(id)
                        .map(|i| traces.get(i).expect("position is valid"))
                        .ok_or_else(|| {
                            CliError::Data(format!(
                                "trace id {id:?} from the groups file is not in the input set"
                            ))
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let aggregate = stages.run("aggregate", || build_aggregate(members))?;
            let rendered = match (format, service) {
                (Format::Dot, Some(name)) => {
                    let name = ServiceName::new(name)
                        .map_err(|_| CliError::Usage("--service must be non-empty".into()))?;
                    render_service_dot(&aggregate, &name)?
                }
                (Format::Dot, None) => render_group_dot(&aggregate),
                (Format::Json, _) => aggregate.to_json(),
            };
            stages.run("write", || write_artifact(output.as_deref(), &rendered))
        }
    }
}

fn load_traces(path: &Path) -> Result<TraceSet, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    Ok(TraceSet::from_reader(BufReader::new(file))?)
}

fn load_preprocessed(
    stages: &Stages,
    input: &Path,
    preprocess: bool,
) -> Result<TraceSet, CliError> {
    let traces = stages.run("load", || load_traces(input))?;
    if !preprocess {
        return Ok(traces);
    }
    let report = stages.run("filter", || filter_incomplete(&traces));
    eprintln!(
        "kept {}, removed {}",
        report.kept.len(),
        report.removed.len()
    );
    Ok(report.kept)
}

fn load_grouping(path: &Path) -> Result<GroupingDoc, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Writes `content` (newline-terminated) to `path`, or stdout when absent.
fn write_artifact(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(path) => write_file(path, content),
        None => {
            let mut stdout = std::io::stdout().lock();
            write_newline_terminated(&mut stdout, content)
                .map_err(|e| CliError::Data(format!("cannot write to stdout: {e}")))
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    let mut file = File::create(path)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))?;
    write_newline_terminated(&mut file, content)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn write_newline_terminated(out: &mut impl Write, content: &str) -> std::io::Result<()> {
    out.write_all(content.as_bytes())?;
    if !content.ends_with('\n') {
        out.write_all(b"\n")?;
    }
    Ok(())
}
