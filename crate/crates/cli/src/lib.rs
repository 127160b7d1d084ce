//! Command implementations behind the `qimem` binary.
//!
//! Every command reads its input (a PBM bitmap, a shape specification, a
//! state dump, or a bundled demo named `demo:<name>`), runs one pipeline and
//! writes its primary output either to `--out` or to the supplied writer.
//! Human-readable summaries go to a separate log writer so that the primary
//! output can be piped.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use qimem::formats::{
    grover_report, parse_pbm, parse_shape_spec, read_dump, retrieval_report, witness_report,
    write_dump, write_pbm, Bitmap, ShapeSpec,
};
use qimem::{
    demos, find_shapes, locate_marked, locate_vertices_classical, max_svetlichny, store,
    DensityOperator, Grid, MemoryState, OracleSpec, PartialTrace, ProbePlan, RetrievalConfig,
    RetrievalMode, Shape, SparseState, StorageMode, StoredImage,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Probe level used when a memory carries no shape header information.
const HEADERLESS_LEVEL: usize = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qimem::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for unreadable or malformed input, 3 for domain errors, 4 when
    /// retrieval contradicts itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(qimem::Error::Parse { .. }) => 2,
            CliError::Core(qimem::Error::Consistency(_)) => 4,
            CliError::Core(_) => 3,
            CliError::Io { .. } | CliError::Usage(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Grid dimensions written as `WxH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridArg {
    pub width: usize,
    pub height: usize,
}

impl FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("invalid dimension {t:?}"));
        Ok(Self {
            width: parse(w)?,
            height: parse(h)?,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "qimem", version, about = "Store and retrieve images in simulated entangled qubit arrays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Store an image and write the memory state dump.
    Store(StoreArgs),
    /// Recover shapes from a memory by Svetlichny witness tests.
    Retrieve(RetrieveArgs),
    /// Locate the vertices of a classical memory with Grover search.
    Grover(GroverArgs),
    /// Maximize the Svetlichny witness of a built-in or dumped state.
    Witness(WitnessArgs),
    /// Summarize an input file.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// PBM (P1) bitmap, shape specification, state dump, or `demo:<name>`.
    pub input: String,
    /// Grid size for inputs that do not state one, as WxH.
    #[arg(long)]
    pub grid: Option<GridArg>,
    /// Storage mode used when the input is an image rather than a dump.
    #[arg(long, default_value = "entangled", value_parser = parse_mode)]
    pub mode: StorageMode,
}

fn parse_mode(s: &str) -> Result<StorageMode, String> {
    s.parse().map_err(|e: qimem::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct StoreArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Write the dump here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Evaluate correlators exactly (the default).
    #[arg(long, conflicts_with = "shots")]
    pub exact: bool,
    /// Estimate each correlator from this many repetitions.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative violation margin above the biseparable bound.
    #[arg(long, default_value_t = qimem::entanglement::DEFAULT_MARGIN)]
    pub margin: f64,
    /// Subset sizes to probe, e.g. 4,3. Defaults to the stored header.
    #[arg(long, value_delimiter = ',')]
    pub probe: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Test every candidate subset, including those overlapping found shapes.
    #[arg(long)]
    pub exhaustive: bool,
    /// Optimizer restarts per subset in exact mode.
    #[arg(long, default_value_t = qimem::entanglement::DEFAULT_RESTARTS)]
    pub restarts: usize,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a PBM with the recovered vertices marked black.
    #[arg(long)]
    pub image: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GroverArgs {
    /// PBM bitmap, shape specification, classical dump, or `demo:<name>`.
    pub input: String,
    #[arg(long)]
    pub grid: Option<GridArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Upper limit on Grover runs.
    #[arg(long, default_value_t = 64)]
    pub max_runs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    /// One of ghz2, ghz3, ghz4, singlet, biseparable3, or a state dump path.
    pub state: String,
    /// Qubits of a dumped state to keep (the rest are traced out).
    #[arg(long, value_delimiter = ',')]
    pub qubits: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = qimem::entanglement::DEFAULT_MARGIN)]
    pub margin: f64,
    #[arg(long, default_value_t = qimem::entanglement::DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

/// A parsed input file.
#[derive(Debug, Clone)]
pub enum Input {
    Pbm(Bitmap),
    Spec(ShapeSpec),
    Dump(MemoryState),
}

fn read_text(source: &str) -> CliResult<String> {
    if let Some(name) = source.strip_prefix("demo:") {
        return demos::find(name).map(|d| d.text.to_string()).ok_or_else(|| {
            let names: Vec<&str> = demos::DEMOS.iter().map(|d| d.name).collect();
            CliError::Usage(format!("unknown demo {name:?}; available: {}", names.join(", ")))
        });
    }
    fs::read_to_string(source).map_err(|source_err| CliError::Io {
        path: PathBuf::from(source),
        source: source_err,
    })
}

fn first_content_line(text: &str) -> &str {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .unwrap_or("")
}

/// Reads an input, recognizing its format from its first meaningful line:
/// a `P…` magic is a bitmap, `grid W H mode …` is a dump, anything else is a
/// shape specification.
pub fn load_input(source: &str, grid: Option<GridArg>) -> CliResult<Input> {
    let text = read_text(source)?;
    let first = first_content_line(&text);
    if first.starts_with('P') || (source.ends_with(".pbm") && !first.starts_with("grid")) {
        let bitmap = parse_pbm(&text)?;
        if let Some(g) = grid {
            if (g.width, g.height) != (bitmap.width, bitmap.height) {
                return Err(CliError::Usage(format!(
                    "--grid {}x{} disagrees with the {}x{} bitmap",
                    g.width, g.height, bitmap.width, bitmap.height
                )));
            }
        }
        return Ok(Input::Pbm(bitmap));
    }
    if first.split_whitespace().nth(3) == Some("mode") {
        return Ok(Input::Dump(read_dump(&text)?));
    }
    let fallback = grid.map(|g| Grid::new(g.width, g.height)).transpose()?;
    Ok(Input::Spec(parse_shape_spec(&text, fallback)?))
}

/// All black pixels of a bitmap form a single shape.
fn bitmap_image(bitmap: &Bitmap, mode: StorageMode) -> CliResult<StoredImage> {
    let grid = bitmap.grid()?;
    let black = bitmap.black();
    let shapes = if black.is_empty() { Vec::new() } else { vec![Shape::new(black)?] };
    Ok(StoredImage::new(grid, shapes, mode)?)
}

/// The memory described by an input, storing images in `mode`.
pub fn memory_of(input: &Input, mode: StorageMode) -> CliResult<MemoryState> {
    Ok(match input {
        Input::Dump(m) => m.clone(),
        Input::Pbm(b) => store(&bitmap_image(b, mode)?)?,
        Input::Spec(s) => store(&StoredImage::new(s.grid, s.shapes.clone(), mode)?)?,
    })
}

fn emit(out_path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out_path {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn log_line(log: &mut dyn Write, text: &str) {
    // summaries are best effort; a closed log stream must not fail the command
    let _ = log.write_all(text.as_bytes());
}

/// Runs one command. The primary output goes to `--out` or `stdout`, the
/// human-readable summary to `log`.
pub fn run(cli: &Cli, stdout: &mut dyn Write, log: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Store(args) => cmd_store(args, stdout, log),
        Command::Retrieve(args) => cmd_retrieve(args, stdout, log),
        Command::Grover(args) => cmd_grover(args, stdout, log),
        Command::Witness(args) => cmd_witness(args, stdout, log),
        Command::Inspect(args) => cmd_inspect(args, stdout),
    }
}

fn describe(memory: &MemoryState) -> String {
    let counts: Vec<String> = memory.header.vertex_counts.iter().map(|c| c.to_string()).collect();
    format!(
        "{}x{} grid, {} mode, {} shape(s){}, sparse size {}\n",
        memory.grid.width,
        memory.grid.height,
        memory.mode.as_str(),
        memory.header.shape_count(),
        if counts.is_empty() { String::new() } else { format!(" with vertex counts {}", counts.join(",")) },
        memory.state.support_size()
    )
}

pub fn cmd_store(args: &StoreArgs, stdout: &mut dyn Write, log: &mut dyn Write) -> CliResult<()> {
    let input = load_input(&args.input.input, args.input.grid)?;
    let memory = memory_of(&input, args.input.mode)?;
    emit(args.out.as_deref(), &write_dump(&memory), stdout)?;
    log_line(log, &format!("stored {}", describe(&memory)));
    Ok(())
}

pub fn cmd_retrieve(args: &RetrieveArgs, stdout: &mut dyn Write, log: &mut dyn Write) -> CliResult<()> {
    let input = load_input(&args.input.input, args.input.grid)?;
    let memory = memory_of(&input, args.input.mode)?;
    let plan = match &args.probe {
        Some(levels) => ProbePlan::Levels(levels.clone()),
        None if memory.header.shape_count() == 0 => ProbePlan::Levels(vec![HEADERLESS_LEVEL]),
        None => ProbePlan::from_header(&memory.header),
    };
    let config = RetrievalConfig {
        mode: args.shots.map_or(RetrievalMode::Exact, RetrievalMode::Shots),
        plan,
        margin: args.margin,
        restarts: args.restarts,
        seed: args.seed,
        workers: args.workers,
        skip_found: !args.exhaustive,
    };
    let report = find_shapes(&memory.state, memory.grid, &config)?;
    let (json, text) = retrieval_report(&report);
    emit(args.out.as_deref(), &json, stdout)?;
    if let Some(path) = &args.image {
        let mut bitmap = Bitmap::blank(memory.grid.width, memory.grid.height);
        for &q in report.found_shapes.iter().flatten() {
            let (x, y) = memory.grid.coordinates(q);
            bitmap.set(x, y);
        }
        emit(Some(path), &write_pbm(&bitmap), stdout)?;
    }
    log_line(log, &text);
    Ok(())
}

pub fn cmd_grover(args: &GroverArgs, stdout: &mut dyn Write, log: &mut dyn Write) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (search, width, height) = match load_input(&args.input, args.grid)? {
        // bitmaps may exceed the simulated qubit limit; the search only needs addresses
        Input::Pbm(bitmap) => {
            let marked = bitmap
                .black()
                .into_iter()
                .map(|(x, y)| y * bitmap.width + x)
                .collect();
            let spec = OracleSpec::for_grid(bitmap.width * bitmap.height, marked)?;
            (locate_marked(&spec, &mut rng, args.max_runs)?, bitmap.width, bitmap.height)
        }
        input => {
            let memory = memory_of(&input, StorageMode::Classical)?;
            let search = locate_vertices_classical(&memory, &mut rng, args.max_runs)?;
            (search, memory.grid.width, memory.grid.height)
        }
    };
    let (json, text) = grover_report(&search, width, height, args.seed);
    emit(args.out.as_deref(), &json, stdout)?;
    log_line(log, &text);
    Ok(())
}

fn built_in_state(name: &str) -> CliResult<Option<DensityOperator>> {
    let state = match name {
        "ghz2" => qimem::make_ghz(2)?,
        "ghz3" => qimem::make_ghz(3)?,
        "ghz4" => qimem::make_ghz(4)?,
        "singlet" => qimem::make_singlet(),
        "biseparable3" => {
            // Bell pair on the first two qubits, |+⟩ on the third
            let plus = SparseState::normalized(1, [(0, 1.0.into()), (1, 1.0.into())])?;
            qimem::make_ghz(2)?.tensor(&plus)?
        }
        _ => return Ok(None),
    };
    Ok(Some(state.to_density()?))
}

pub fn cmd_witness(args: &WitnessArgs, stdout: &mut dyn Write, log: &mut dyn Write) -> CliResult<()> {
    let rho = match built_in_state(&args.state)? {
        Some(rho) => {
            if args.qubits.is_some() {
                return Err(CliError::Usage("--qubits applies only to dumped states".into()));
            }
            rho
        }
        None if Path::new(&args.state).is_file() => {
            let memory = match load_input(&args.state, None)? {
                Input::Dump(m) => m,
                _ => return Err(CliError::Usage(format!("{} is not a state dump", args.state))),
            };
            let keep = match &args.qubits {
                Some(q) => q.clone(),
                None => (0..memory.n_qubits()).collect(),
            };
            memory.state.partial_trace(&keep)?
        }
        None => {
            return Err(CliError::Usage(format!(
                "unknown state {:?}; expected ghz2, ghz3, ghz4, singlet, biseparable3 or a dump file",
                args.state
            )))
        }
    };
    let config = qimem::OptimizerConfig {
        restarts: args.restarts,
        margin: args.margin,
        ..Default::default()
    };
    let result = max_svetlichny(&rho, &config, &mut ChaCha8Rng::seed_from_u64(args.seed))?;
    let (json, text) = witness_report(&args.state, &result, args.seed);
    emit(args.out.as_deref(), &json, stdout)?;
    log_line(log, &text);
    Ok(())
}

pub fn cmd_inspect(args: &InspectArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let input = load_input(&args.input.input, args.input.grid)?;
    let mut text = match &input {
        Input::Pbm(b) => format!(
            "PBM bitmap {}x{} with {} black pixel(s)\n",
            b.width,
            b.height,
            b.black().len()
        ),
        Input::Spec(s) => format!(
            "shape specification on a {}x{} grid with {} shape(s)\n",
            s.grid.width,
            s.grid.height,
            s.shapes.len()
        ),
        Input::Dump(_) => "state dump\n".to_string(),
    };
    let memory = memory_of(&input, args.input.mode)?;
    text.push_str(&format!("memory: {}", describe(&memory)));
    for (label, amplitude) in memory.state.iter() {
        text.push_str(&format!("  |{label}⟩ {:.6}{:+.6}i\n", amplitude.re, amplitude.im));
    }
    emit(None, &text, stdout)
}
