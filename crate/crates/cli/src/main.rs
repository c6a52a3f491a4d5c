use std::io::Write;
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cfsynth::input::{parse_selector, ApplyBody, ApplyOptions, RequestOptions, SuggestBody, TableInput, TableOptions};
use cfsynth::output;
use cfsynth::service::{self, ServiceConfig, DEFAULT_BODY_LIMIT};
use cfsynth_core::engine::DEFAULT_TOP_K;
use cfsynth_core::rank::RankerWeights;
use cfsynth_core::rule::parse_rule;
use cfsynth_core::synth::SynthesisConfig;
use cfsynth_core::table::AnnotationFile;
use cfsynth_core::{apply, Engine};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cfsynth", version, about = "Learn conditional-formatting rules from formatted example cells")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Suggest rules for the formatted examples of one column.
    Suggest(SuggestArgs),
    /// Run a rule over a column.
    Apply(ApplyArgs),
    /// Serve the JSON HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    /// Rule JSON array.
    Json,
    /// Formulas, one per line.
    Formula,
    /// Boolean masks as CSV.
    Mask,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// The first line is data, not a header.
    #[arg(long)]
    no_header: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

impl TableArgs {
    fn options(&self) -> TableOptions {
        TableOptions {
            has_header: !self.no_header,
            delimiter: self.delimiter,
        }
    }
}

#[derive(Debug, Args)]
struct SuggestArgs {
    /// Table file (CSV).
    #[arg(long)]
    input: PathBuf,
    /// Column name or 0-based index; defaults to the examples file's column.
    #[arg(long)]
    column: Option<String>,
    /// Examples file: {"column": .., "examples": [{"row": .., "format": ..}]}.
    #[arg(long)]
    examples: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    top: usize,
    #[arg(long, value_enum, default_value_t = Emit::Json)]
    emit: Emit,
    /// Synthesis settings (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ranker weights (JSON map of feature name to weight, plus "bias").
    #[arg(long, env = "CFSYNTH_WEIGHTS")]
    weights: Option<PathBuf>,
    #[arg(long)]
    case_insensitive: bool,
    /// Fold negated literals into NOT(OR(..)) in formulas.
    #[arg(long)]
    not_folding: bool,
    #[command(flatten)]
    table: TableArgs,
    /// Also write the full response JSON to this file.
    #[arg(long)]
    dump_response: Option<PathBuf>,
    /// Write clustering rounds and learned trees to this file.
    #[arg(long)]
    dump_trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ApplyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    column: String,
    /// Rule JSON file.
    #[arg(long)]
    rule: PathBuf,
    #[arg(long, value_enum, default_value_t = Emit::Json)]
    emit: Emit,
    #[arg(long)]
    not_folding: bool,
    #[command(flatten)]
    table: TableArgs,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    #[arg(long, default_value_t = 8080, value_parser = clap::value_parser!(u16).range(1..))]
    port: u16,
    #[arg(long, env = "CFSYNTH_WEIGHTS")]
    weights: Option<PathBuf>,
    /// Largest accepted request body.
    #[arg(long, default_value_t = DEFAULT_BODY_LIMIT)]
    max_body_bytes: usize,
    /// Log filter, e.g. `info` or `cfsynth=debug`.
    #[arg(long, default_value = "info")]
    log: String,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Engine(#[from] cfsynth_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Engine(e) if e.needs_more_examples() => 2,
            _ => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_engine(weights: Option<&Path>) -> Result<Engine, CliError> {
    Ok(match weights {
        Some(p) => Engine::new(RankerWeights::from_json(&read(p)?)?),
        None => Engine::default(),
    })
}

fn suggest(args: &SuggestArgs) -> Result<String, CliError> {
    let annotation = AnnotationFile::from_json(&read(&args.examples)?)?;
    let config = match &args.config {
        Some(p) => cfsynth_core::json::from_str::<SynthesisConfig>(&read(p)?)?,
        None => SynthesisConfig::default(),
    };
    let body = SuggestBody {
        table: TableInput::Csv(read(&args.input)?),
        column: args.column.as_deref().map_or(annotation.column, parse_selector),
        examples: annotation.examples,
        top_k: args.top,
        options: RequestOptions {
            case_insensitive: args.case_insensitive,
            fold_negations: args.not_folding,
            table: args.table.options(),
            config,
        },
    };
    let engine = load_engine(args.weights.as_deref())?;
    let (resp, trace) = engine.suggest_traced(&body.prepare()?)?;
    for w in &resp.diagnostics.warnings {
        match &w.format {
            Some(f) => eprintln!("warning: {} for format {}", w.code, f.as_str()),
            None => eprintln!("warning: {}", w.code),
        }
    }
    if let Some(p) = &args.dump_response {
        write(p, &serde_json::to_string_pretty(&resp).expect("serializes"))?;
    }
    if let Some(p) = &args.dump_trace {
        write(p, &serde_json::to_string_pretty(&trace).expect("serializes"))?;
    }
    Ok(match args.emit {
        Emit::Json => output::rules_json(&resp) + "\n",
        Emit::Formula => output::formulas(&resp),
        Emit::Mask => output::masks_csv(&resp),
    })
}

fn apply_cmd(args: &ApplyArgs) -> Result<String, CliError> {
    let body = ApplyBody {
        table: TableInput::Csv(read(&args.input)?),
        column: parse_selector(&args.column),
        rule: parse_rule(&read(&args.rule)?)?,
        options: ApplyOptions {
            fold_negations: args.not_folding,
            table: args.table.options(),
        },
    };
    let (column, formula) = body.prepare()?;
    let result = apply(&body.rule, &column, formula)?;
    for w in &result.warnings {
        eprintln!("warning: {}", w.code);
    }
    Ok(match args.emit {
        Emit::Json => serde_json::to_string(&result).expect("serializes") + "\n",
        Emit::Formula => result.formula.clone() + "\n",
        Emit::Mask => output::apply_mask_csv(&result),
    })
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let filter = tracing_subscriber::EnvFilter::try_new(&args.log)
        .map_err(|e| cfsynth_core::Error::Config(format!("bad log filter: {e}")))?;
    tracing_subscriber::fmt().with_env_filter(filter).init();
    let config = ServiceConfig {
        bind: args.bind,
        port: args.port,
        weights: args.weights.clone(),
        body_limit: args.max_body_bytes,
        log: args.log.clone(),
    };
    let engine = load_engine(config.weights.as_deref())?;
    let io = |source| CliError::Io {
        path: PathBuf::from(config.addr().to_string()),
        source,
    };
    let rt = tokio::runtime::Runtime::new().map_err(io)?;
    rt.block_on(service::serve(config.clone(), engine)).map_err(io)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Suggest(a) => suggest(a),
        Command::Apply(a) => apply_cmd(a),
        Command::Serve(a) => serve(a).map(|()| String::new()),
    };
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            match &e {
                CliError::Engine(inner) => eprintln!("error[{}]: {inner}", inner.code()),
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
