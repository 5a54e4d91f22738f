use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qoracle::bench::{generate_with_manifest, BenchmarkSpec, Family};
use qoracle::flow::{run_flow, FlowConfig, InputSource, PebbleBudget, StrategyKind};
use qoracle::mapper::{MapperConfig, MapperMode};
use qoracle::matrix::{run_matrix, MatrixConfig};
use qoracle::pebbling::DEFAULT_CONFLICT_LIMIT;
use qoracle::xag::{write_aiger, write_dump};

const EXIT_VERIFY: u8 = 1;
const EXIT_SYNTH: u8 = 2;

#[derive(Parser)]
#[command(name = "qoracle", version, about = "Garbage-free quantum oracle synthesis from XOR-AND graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one oracle.
    Synth(SynthArgs),
    /// Run the mapper/clean-up comparison grid.
    Matrix(MatrixArgs),
    /// Write a generated miter benchmark and its manifest.
    Bench(BenchArgs),
}

#[derive(Args)]
struct BenchSelect {
    /// Benchmark family: addassoc, multassoc or multdistr.
    #[arg(long)]
    family: Option<String>,
    /// Operand bit width.
    #[arg(long, short = 'w', default_value_t = 2)]
    width: usize,
    #[arg(long, default_value_t = 1)]
    faults: usize,
    /// Seed for fault placement.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl BenchSelect {
    fn spec(&self, family: &str) -> Result<BenchmarkSpec> {
        let family: Family = family.parse()?;
        Ok(BenchmarkSpec::new(family, self.width).with_faults(self.faults).with_seed(self.seed))
    }
}

#[derive(Args)]
struct MapperArgs {
    /// LUT size.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Cuts kept per node.
    #[arg(long, default_value_t = 8)]
    priority_cuts: usize,
    /// spectral, baseline (alias area).
    #[arg(long, default_value = "spectral")]
    mapper: String,
    #[arg(long)]
    no_xor_blocks: bool,
}

impl MapperArgs {
    fn config(&self) -> Result<MapperConfig> {
        let mode: MapperMode = self.mapper.parse()?;
        let base = match mode {
            MapperMode::Spectral => MapperConfig::spectral(self.k),
            MapperMode::BaselineArea => MapperConfig::baseline(self.k),
        };
        let cfg = base.with_priority_cuts(self.priority_cuts);
        Ok(if self.no_xor_blocks { cfg.with_xor_blocks(false) } else { cfg })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Qasm,
    Stats,
    All,
}

#[derive(Args)]
struct SynthArgs {
    /// ASCII AIGER (.aag) or XAG dump (.xag); otherwise --family selects a
    /// generated benchmark.
    #[arg(long, short = 'i')]
    input: Option<PathBuf>,
    #[command(flatten)]
    bench: BenchSelect,
    #[command(flatten)]
    mapper: MapperArgs,
    /// bennett or pebble.
    #[arg(long, default_value = "bennett")]
    strategy: String,
    /// Ancilla budget: N, bennett or bennett-D. Implies --strategy pebble.
    #[arg(long)]
    pebbles: Option<String>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Conflicts per SAT call; 0 means unlimited.
    #[arg(long, default_value_t = DEFAULT_CONFLICT_LIMIT)]
    conflict_limit: u64,
    #[arg(long, default_value_t = qoracle::flow::DEFAULT_MAX_RELAXATIONS)]
    max_relaxations: usize,
    /// Simulate the circuit on every basis input.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum, default_value = "all")]
    emit: Emit,
    /// Directory for <name>.qasm and <name>.stats.json; stdout otherwise.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    /// Also write the LUT cover, pebbling strategy and schedule.
    #[arg(long)]
    artifacts: bool,
    /// Record wall time in the stats.
    #[arg(long)]
    time: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Markdown,
    Csv,
    Json,
}

#[derive(Args)]
struct MatrixArgs {
    /// Comma-separated bit widths.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4])]
    widths: Vec<usize>,
    /// Comma-separated families; all by default.
    #[arg(long, value_delimiter = ',')]
    families: Vec<String>,
    #[arg(long, default_value_t = 1)]
    faults: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    priority_cuts: usize,
    /// M/P pebble budget is Bennett minus this.
    #[arg(long, default_value_t = 1)]
    mp_delta: usize,
    #[arg(long, default_value_t = DEFAULT_CONFLICT_LIMIT)]
    conflict_limit: u64,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum, default_value = "markdown")]
    format: TableFormat,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NetFormat {
    Xag,
    Aag,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    bench: BenchSelect,
    #[arg(long, value_enum, default_value = "xag")]
    format: NetFormat,
    /// Output directory.
    #[arg(long, short = 'o', default_value = ".")]
    out: PathBuf,
}

fn limit(n: u64) -> Option<u64> {
    (n > 0).then_some(n)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn synth(args: SynthArgs) -> Result<ExitCode> {
    let source = match (&args.input, &args.bench.family) {
        (Some(p), None) => InputSource::File(p.clone()),
        (None, Some(f)) => InputSource::Benchmark(args.bench.spec(f)?),
        (Some(_), Some(_)) => bail!("--input and --family are mutually exclusive"),
        (None, None) => bail!("either --input or --family is required"),
    };
    let mut cfg = FlowConfig::new(source).with_mapper(args.mapper.config()?).with_verify(args.verify);
    let strategy: StrategyKind = args.strategy.parse()?;
    cfg = match (&args.pebbles, strategy) {
        (Some(p), _) => cfg.pebble(p.parse::<PebbleBudget>()?),
        (None, StrategyKind::Pebble) => cfg.pebble(PebbleBudget::BennettMinus(1)),
        (None, StrategyKind::Bennett) => cfg.bennett(),
    };
    cfg.max_steps = args.max_steps;
    cfg.conflict_limit = limit(args.conflict_limit);
    cfg.max_relaxations = args.max_relaxations;
    cfg.record_time = args.time;

    let out = run_flow(&cfg)?;
    let name = &out.stats.name;
    let qasm = out.qasm();
    let stats = out.stats.to_json();
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            if args.emit != Emit::Stats {
                write(&dir.join(format!("{name}.qasm")), &qasm)?;
            }
            if args.emit != Emit::Qasm {
                write(&dir.join(format!("{name}.stats.json")), &stats)?;
            }
            if args.artifacts {
                write(&dir.join(format!("{name}.luts")), &out.luts.dump())?;
                write(&dir.join(format!("{name}.strategy")), &out.strategy.to_text())?;
                write(&dir.join(format!("{name}.schedule")), &out.schedule.dump())?;
            }
        }
        None => {
            if args.emit != Emit::Stats {
                print!("{qasm}");
            }
            if args.emit != Emit::Qasm {
                print!("{stats}");
            }
        }
    }
    if let Some(v) = &out.stats.verification {
        if !v.passed {
            eprintln!("verification failed: {}", v.failure.as_deref().unwrap_or("amplitude deviation"));
            return Ok(ExitCode::from(EXIT_VERIFY));
        }
        eprintln!("verified {} cases, max deviation {:.1e}", v.cases, v.max_deviation);
    }
    Ok(ExitCode::SUCCESS)
}

fn matrix(args: MatrixArgs) -> Result<ExitCode> {
    let families: Vec<Family> = if args.families.is_empty() {
        Family::ALL.to_vec()
    } else {
        args.families.iter().map(|f| f.parse()).collect::<Result<_, _>>()?
    };
    let mut specs = Vec::new();
    for &w in &args.widths {
        for &f in &families {
            specs.push(BenchmarkSpec::new(f, w).with_faults(args.faults).with_seed(args.seed));
        }
    }
    let mut cfg = MatrixConfig::new(specs);
    cfg.k = args.k;
    cfg.priority_cuts = args.priority_cuts;
    cfg.baseline_pebble_delta = args.mp_delta;
    cfg.conflict_limit = limit(args.conflict_limit);
    cfg.max_steps = args.max_steps;
    cfg.verify = args.verify;
    let result = run_matrix(&cfg);
    let text = match args.format {
        TableFormat::Markdown => result.to_markdown(),
        TableFormat::Csv => result.to_csv(),
        TableFormat::Json => serde_json::to_string_pretty(&result)? + "\n",
    };
    match &args.out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    let cells = result.rows.iter().flat_map(|r| &r.cells);
    if cells.clone().any(|c| c.verified == Some(false)) {
        return Ok(ExitCode::from(EXIT_VERIFY));
    }
    if cells.clone().any(|c| !c.ok()) {
        return Ok(ExitCode::from(EXIT_SYNTH));
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let Some(family) = &args.bench.family else { bail!("--family is required") };
    let spec = args.bench.spec(family)?;
    let (xag, manifest) = generate_with_manifest(&spec)?;
    fs::create_dir_all(&args.out)?;
    let name = spec.name();
    let (ext, text) = match args.format {
        NetFormat::Xag => ("xag", write_dump(&xag)),
        NetFormat::Aag => ("aag", write_aiger(&xag)),
    };
    write(&args.out.join(format!("{name}.{ext}")), &text)?;
    write(&args.out.join(format!("{name}.json")), &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Matrix(a) => matrix(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_SYNTH)
        }
    }
}
