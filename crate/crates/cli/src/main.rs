use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use misalign::experiments::{
    decade_levels, measure_db_gap, read_csv, run_experiment, validate_all, write_csv,
    write_csv_file, ExperimentId, ExperimentSpec, SchemeChoice, SweepAxis,
};
use misalign::simulation::{RngSeed, SymbolBlock};
use misalign::waveform::{realize_on_grid, synthesize, write_dump, WaveformConfig};
use misalign::{ChannelParams, Error, Misalignment, SweepResult};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "misalign", version, about = "BPSK interference simulator under symbol misalignment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form rows only (no Monte Carlo), for one point or a spec file.
    Analytic(Common),
    /// Closed-form and Monte Carlo rows for one point or a spec file.
    Simulate(Common),
    /// Run a shipped figure preset; flags override preset values.
    Figure {
        #[arg(value_enum)]
        id: Figure,
        #[command(flatten)]
        common: Common,
    },
    /// Horizontal dB gap between two curves of a sweep CSV.
    Gap(GapArgs),
    /// Run the self-check suite.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Synthesize one oversampled block and write it as a binary dump.
    Waveform(WaveformArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl From<Figure> for ExperimentId {
    fn from(f: Figure) -> Self {
        match f {
            Figure::Fig2 => ExperimentId::Fig2,
            Figure::Fig3 => ExperimentId::Fig3,
            Figure::Fig4 => ExperimentId::Fig4,
            Figure::Fig5 => ExperimentId::Fig5,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Conv,
    A,
    B,
}

impl From<SchemeArg> for SchemeChoice {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Conv => SchemeChoice::Conventional,
            SchemeArg::A => SchemeChoice::A,
            SchemeArg::B => SchemeChoice::B,
        }
    }
}

/// Sweep options. With `--spec` (or a figure preset) the file is read first
/// and every flag given here replaces the matching value. A flag on the
/// swept axis collapses the sweep to that single point.
#[derive(Args)]
struct Common {
    /// Spec file in `key = value` format.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    sir_db: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<f64>,
    /// Offsets for conventional rows (comma-separated).
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    #[arg(long, value_enum, value_delimiter = ',')]
    scheme: Option<Vec<SchemeArg>>,
    /// Symbols per block.
    #[arg(long)]
    n: Option<usize>,
    /// Scheme B maximum draw.
    #[arg(long)]
    k: Option<u32>,
    /// Monte Carlo blocks per row.
    #[arg(long)]
    blocks: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GapArgs {
    /// Sweep CSV as written by this tool.
    csv: PathBuf,
    /// Reference curve, e.g. `conv:0.5`, `a` or `b`.
    #[arg(long)]
    a: String,
    /// Compared curve; the gap is x_b - x_a.
    #[arg(long)]
    b: String,
    /// BER levels; defaults to every decade inside both curves.
    #[arg(long, value_delimiter = ',')]
    target: Vec<f64>,
    /// Use the Monte Carlo column instead of the closed form.
    #[arg(long)]
    sim: bool,
}

#[derive(Args)]
struct WaveformArgs {
    #[arg(long, allow_negative_numbers = true)]
    sir_db: f64,
    #[arg(long, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, value_enum, default_value = "conv")]
    scheme: SchemeArg,
    /// Offset for conventional timing; must lie on the tick grid.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 16)]
    k: u32,
    /// Ticks per symbol; a multiple of `n` for schemes a and b.
    #[arg(long, default_value_t = 64)]
    oversampling: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn spec_from(common: &Common, base: Option<ExperimentSpec>, analytic: bool) -> anyhow::Result<ExperimentSpec> {
    let base = match (&common.spec, base) {
        (Some(path), _) => Some(ExperimentSpec::from_file(path).map_err(|e| match e {
            // an unreadable spec is a bad argument, not a runtime failure
            Error::Io(io) => Error::InvalidParameter {
                name: "spec",
                reason: format!("{}: {io}", path.display()),
            },
            other => other,
        })?),
        (None, b) => b,
    };
    let mut spec = match base {
        Some(s) => s,
        None => {
            let (Some(sir), Some(snr)) = (common.sir_db, common.snr_db) else {
                return Err(Error::InvalidParameter {
                    name: "point",
                    reason: "give --sir-db and --snr-db, or --spec".into(),
                }
                .into());
            };
            ExperimentSpec {
                id: ExperimentId::Custom,
                axis: SweepAxis::Sir,
                values: vec![sir],
                fixed_db: snr,
                deltas: vec![0.0],
                schemes: vec![SchemeChoice::Conventional],
                n: 1000,
                k: 16,
                blocks: 1000,
                seed: 1,
                out: None,
            }
        }
    };
    if let Some(sir) = common.sir_db {
        match spec.axis {
            SweepAxis::Sir => spec.values = vec![sir],
            SweepAxis::Snr => spec.fixed_db = sir,
        }
    }
    if let Some(snr) = common.snr_db {
        match spec.axis {
            SweepAxis::Snr => spec.values = vec![snr],
            SweepAxis::Sir => spec.fixed_db = snr,
        }
    }
    if let Some(d) = &common.delta {
        spec.deltas = d.clone();
    }
    if let Some(s) = &common.scheme {
        spec.schemes = s.iter().map(|&s| s.into()).collect();
    }
    if let Some(n) = common.n {
        spec.n = n;
    }
    if let Some(k) = common.k {
        spec.k = k;
    }
    if let Some(b) = common.blocks {
        spec.blocks = b;
    }
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    if common.out.is_some() {
        spec.out = common.out.clone();
    }
    if analytic {
        spec.blocks = 0;
    }
    spec.validate()?;
    Ok(spec)
}

fn emit(spec: &ExperimentSpec) -> anyhow::Result<()> {
    let rows = run_experiment(spec)?;
    match &spec.out {
        Some(path) => {
            write_csv_file(path, &rows).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => write_csv(io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn parse_selector(s: &str) -> anyhow::Result<(String, Option<f64>)> {
    let (scheme, delta) = match s.split_once(':') {
        Some((sc, d)) => (sc, Some(d)),
        None => (s, None),
    };
    let choice: SchemeChoice = scheme.parse()?;
    let delta = match (choice, delta) {
        (SchemeChoice::Conventional, Some(d)) => Some(
            d.parse::<f64>()
                .map_err(|_| Error::InvalidParameter { name: "curve", reason: format!("bad offset in {s:?}") })?,
        ),
        (SchemeChoice::Conventional, None) => {
            return Err(Error::InvalidParameter {
                name: "curve",
                reason: format!("{s:?}: conventional curves need an offset, e.g. conv:0.5"),
            }
            .into())
        }
        (_, Some(_)) => {
            return Err(Error::InvalidParameter {
                name: "curve",
                reason: format!("{s:?}: only conventional curves take an offset"),
            }
            .into())
        }
        (_, None) => None,
    };
    Ok((choice.label().to_owned(), delta))
}

fn select(rows: &[SweepResult], selector: &str, sim: bool) -> anyhow::Result<Vec<(f64, f64)>> {
    let (scheme, delta) = parse_selector(selector)?;
    let picked: Vec<&SweepResult> = rows
        .iter()
        .filter(|r| r.scheme == scheme && r.delta == delta)
        .collect();
    if picked.is_empty() {
        bail!(Error::InvalidParameter {
            name: "curve",
            reason: format!("no rows match {selector:?}"),
        });
    }
    let snr_axis = picked.iter().all(|r| r.sir_db == picked[0].sir_db);
    picked
        .iter()
        .map(|r| {
            let x = if snr_axis { r.snr_db } else { r.sir_db };
            let y = if sim { r.sim_ber } else { r.analytic_ber };
            y.map(|y| (x, y)).ok_or_else(|| {
                anyhow!(Error::InvalidParameter {
                    name: "curve",
                    reason: format!("row at {x} dB has no {} BER", if sim { "simulated" } else { "analytic" }),
                })
            })
        })
        .collect()
}

/// Length of the leading run over which BER moves strictly in one direction.
fn monotone_run(c: &[(f64, f64)]) -> usize {
    if c.len() < 2 {
        return c.len();
    }
    let falling = c[1].1 < c[0].1;
    let mut end = 1;
    while end < c.len() && (c[end].1 < c[end - 1].1) == falling && c[end].1 != c[end - 1].1 && c[end].1 > 0.0 {
        end += 1;
    }
    end
}

fn gap(args: &GapArgs) -> anyhow::Result<()> {
    let rows = read_csv(&args.csv).with_context(|| format!("reading {}", args.csv.display()))?;
    let mut a = select(&rows, &args.a, args.sim)?;
    let mut b = select(&rows, &args.b, args.sim)?;
    if args.sim {
        // simulated curves wobble once they flatten onto the noise floor
        for (name, c) in [(&args.a, &mut a), (&args.b, &mut b)] {
            let keep = monotone_run(c);
            if keep < c.len() {
                eprintln!("{name}: using the first {keep} of {} points (monotone run)", c.len());
                c.truncate(keep);
            }
        }
    }
    let targets = if args.target.is_empty() {
        decade_levels(&a, &b)
    } else {
        args.target.clone()
    };
    if targets.is_empty() {
        bail!(Error::InvalidParameter {
            name: "target",
            reason: "the curves share no decade BER level; pass --target".into(),
        });
    }
    let mut out = io::stdout().lock();
    writeln!(out, "target_ber,gap_db")?;
    for t in targets {
        writeln!(out, "{t:e},{:.4}", measure_db_gap(&a, &b, t)?)?;
    }
    Ok(())
}

fn waveform(args: &WaveformArgs) -> anyhow::Result<()> {
    let params = ChannelParams::from_db(args.sir_db, args.snr_db)?;
    let choice: SchemeChoice = args.scheme.into();
    let kind = choice.kind(Misalignment::new(args.delta)?, args.k);
    let seed = RngSeed(args.seed);
    let mut rng = seed.stream(0);
    let scheme = realize_on_grid(kind, args.n, args.oversampling, &mut rng)?;
    let config = WaveformConfig::for_scheme(&scheme, args.n, args.oversampling)?;
    let a1 = SymbolBlock::random(args.n, &mut rng);
    let a2 = SymbolBlock::random(args.n, &mut rng);
    let wave = synthesize(&config, &a1, &a2, params, seed.derive(1))?;
    write_dump(&args.out, &wave).with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "wrote {} ticks ({} per symbol, delta0 = {}) to {}",
        wave.ticks.len(),
        wave.oversampling,
        scheme.delta0().value(),
        args.out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Analytic(c) => emit(&spec_from(&c, None, true)?)?,
        Command::Simulate(c) => emit(&spec_from(&c, None, false)?)?,
        Command::Figure { id, common } => {
            let preset = ExperimentSpec::preset(id.into())?;
            emit(&spec_from(&common, Some(preset), false)?)?
        }
        Command::Gap(g) => gap(&g)?,
        Command::Validate { seed } => {
            let report = validate_all(RngSeed(seed));
            println!("{report}");
            if !report.all_passed() {
                return Ok(ExitCode::from(EXIT_FAILURE));
            }
        }
        Command::Waveform(w) => waveform(&w)?,
    }
    Ok(ExitCode::SUCCESS)
}

/// Bad input maps to the usage code; anything else is a runtime failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidParameter { .. }
            | Error::SpecSyntax { .. }
            | Error::OffGrid { .. }
            | Error::TargetOutOfRange { .. }
            | Error::NonMonotoneCurve(_)
            | Error::Csv(_),
        ) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
