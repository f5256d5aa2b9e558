//! `dmmr`: reliability, fault tolerance and figure-of-merit analysis of NMR
//! and K-of-M DMMR redundancy schemes.
//!
//! Exit status: 0 success, 1 I/O failure, 2 bad command line, 3 invalid or
//! unknown scheme, 4 value out of range, 5 missing metrics (file or row),
//! 6 malformed input file.

mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use dmmr_core::gate_sim::CampaignSpec;
use dmmr_core::metrics::{fom_improvement, fom_improvement_tabulated, tradeoff_report};
use dmmr_core::monte_carlo::{self, simulate, simulate_with_threads};
use dmmr_core::numeric::format_significant;
use dmmr_core::reliability::compare;
use dmmr_core::{
    Composition, Error, MetricsTable, Probability, ReliabilityExpr, Scheme, SimConfig, SimReport,
    TradeoffRow,
};

use render::{emit, Format, Grid};

const COHORTS: [[&str; 3]; 2] = [["7MR", "3-of-6", "5-of-7"], ["9MR", "3-of-7", "5-of-8"]];

#[derive(Debug, Parser)]
#[command(name = "dmmr", version, about = "NMR / DMMR redundancy analysis")]
struct Cli {
    /// Output format.
    #[arg(
        long,
        global = true,
        value_enum,
        env = "DMMR_FORMAT",
        default_value = "table"
    )]
    format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Significant digits for printed numbers.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// System reliability at one module reliability.
    Reliability(ReliabilityArgs),
    /// Guaranteed and maximum fault tolerance by enumeration.
    Tolerance(SchemeList),
    /// System reliability sampled over a range of module reliabilities (CSV).
    Curve(CurveArgs),
    /// Monte Carlo fault injection.
    Simulate(SimulateArgs),
    /// Stuck-at fault campaign over all 256 multiplier operand pairs.
    Campaign(CampaignArgs),
    /// Figure of merit from power/delay/area metrics.
    Fom(FomArgs),
    /// Combined reliability / tolerance / FOM tradeoff report.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct SchemeList {
    /// Scheme such as 7MR, 3-of-6, NMR:7 or DMMR:3:6. Repeatable.
    #[arg(long = "scheme", short, required = true)]
    schemes: Vec<String>,
}

#[derive(Debug, Args)]
struct ReliabilityArgs {
    #[command(flatten)]
    schemes: SchemeList,
    /// Module reliability, e.g. 0.9 or 9/10.
    #[arg(long, short)]
    r: String,
    /// Print exact rationals.
    #[arg(long)]
    exact: bool,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long, short)]
    scheme: String,
    #[arg(long, default_value = "0")]
    start: String,
    #[arg(long, default_value = "1")]
    end: String,
    #[arg(long, default_value_t = 101)]
    steps: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, short)]
    scheme: String,
    /// Module reliability. Repeat to run a seeded sweep.
    #[arg(long, short, required = true)]
    r: Vec<String>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct CampaignArgs {
    /// Campaign spec JSON file.
    #[arg(long)]
    spec: PathBuf,
    /// Override the composition named in the spec file.
    #[arg(long)]
    composition: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Basis {
    /// Unrounded FOM values.
    Exact,
    /// FOM values rounded to two decimals before comparing.
    Tabulated,
}

#[derive(Debug, Args)]
struct FomArgs {
    /// `builtin` or a CSV file with scheme,power_uw,delay_ns,area_um2.
    #[arg(long, default_value = "builtin")]
    table: String,
    /// Schemes to report; defaults to every row of the table.
    #[arg(long = "scheme", short)]
    schemes: Vec<String>,
    /// Reference scheme for the improvement column.
    #[arg(long)]
    baseline: Option<String>,
    #[arg(long, value_enum, default_value = "exact")]
    basis: Basis,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Schemes to compare; defaults to the 3-fault and 4-fault cohorts.
    #[arg(long = "scheme", short)]
    schemes: Vec<String>,
    #[arg(long, short, default_value = "0.9")]
    r: String,
    /// `builtin` or a metrics CSV file.
    #[arg(long, default_value = "builtin")]
    metrics: String,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    MissingFile(PathBuf, std::io::Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Core(Error::InvalidScheme(_) | Error::SchemeSyntax(_)) => 3,
            Failure::Core(
                Error::Domain(_) | Error::InvalidPattern { .. } | Error::UnsupportedSize { .. },
            ) => 4,
            Failure::Core(Error::MissingMetrics(_)) | Failure::MissingFile(..) => 5,
            Failure::Core(Error::Format(_)) => 6,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::MissingFile(path, e) => format!("cannot read {}: {e}", path.display()),
            Failure::Io(msg) => msg.clone(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("dmmr: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let ctx = Ctx {
        format: cli.format,
        digits: cli.precision.max(1),
    };
    let text = match &cli.command {
        Command::Reliability(args) => reliability(&ctx, args)?,
        Command::Tolerance(args) => tolerance(&ctx, args)?,
        Command::Curve(args) => curve(&ctx, args)?,
        Command::Simulate(args) => simulate_cmd(&ctx, args)?,
        Command::Campaign(args) => campaign(&ctx, args)?,
        Command::Fom(args) => fom(&ctx, args)?,
        Command::Compare(args) => compare_cmd(&ctx, args)?,
    };
    match &cli.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Ctx {
    format: Format,
    digits: usize,
}

impl Ctx {
    fn num(&self, v: f64) -> String {
        format_significant(v, self.digits)
    }
}

fn parse_schemes(list: &[String]) -> CliResult<Vec<Scheme>> {
    Ok(list
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<Scheme>, _>>()?)
}

fn parse_probability(text: &str) -> CliResult<Probability> {
    Ok(text.parse()?)
}

fn load_metrics(source: &str) -> CliResult<MetricsTable> {
    if source.eq_ignore_ascii_case("builtin") {
        return Ok(MetricsTable::builtin());
    }
    let path = Path::new(source);
    let file = fs::File::open(path).map_err(|e| Failure::MissingFile(path.to_path_buf(), e))?;
    Ok(MetricsTable::from_csv(file)?)
}

#[derive(Serialize, Deserialize)]
struct ReliabilityOut {
    scheme: Scheme,
    r_module: f64,
    r_system: f64,
    r_system_exact: String,
    expr: ReliabilityExpr,
}

fn reliability(ctx: &Ctx, args: &ReliabilityArgs) -> CliResult<String> {
    let schemes = parse_schemes(&args.schemes.schemes)?;
    let r = parse_probability(&args.r)?;
    let mut out = Vec::new();
    let mut grid = Grid::new(["scheme", "r_module", "r_system"]);
    for s in schemes {
        let expr = ReliabilityExpr::derive_closed_form(s);
        let point = expr.evaluate(&r);
        let value = if args.exact {
            point.r_system.to_string()
        } else {
            ctx.num(point.r_system_f64())
        };
        grid.push(vec![s.to_string(), args.r.trim().to_string(), value]);
        out.push(ReliabilityOut {
            scheme: s,
            r_module: r.to_f64(),
            r_system: point.r_system_f64(),
            r_system_exact: point.r_system.to_string(),
            expr,
        });
    }
    if ctx.format == Format::Table && grid.rows.len() == 1 {
        return Ok(format!("{}\n", grid.rows[0][2]));
    }
    Ok(emit(ctx.format, &grid, &out))
}

#[derive(Serialize, Deserialize)]
struct ToleranceOut {
    scheme: Scheme,
    modules: usize,
    guaranteed_tolerance: usize,
    max_tolerance: usize,
}

fn tolerance(ctx: &Ctx, args: &SchemeList) -> CliResult<String> {
    let mut out = Vec::new();
    let mut grid = Grid::new(["scheme", "modules", "guaranteed_tolerance", "max_tolerance"]);
    for s in parse_schemes(&args.schemes)? {
        let t = s.tolerance_profile()?;
        grid.push(vec![
            s.to_string(),
            s.n_modules().to_string(),
            t.guaranteed_tolerance.to_string(),
            t.max_tolerance.to_string(),
        ]);
        out.push(ToleranceOut {
            scheme: s,
            modules: s.n_modules(),
            guaranteed_tolerance: t.guaranteed_tolerance,
            max_tolerance: t.max_tolerance,
        });
    }
    Ok(emit(ctx.format, &grid, &out))
}

#[derive(Serialize, Deserialize)]
struct CurvePoint {
    r_module: f64,
    r_system: f64,
}

fn curve(ctx: &Ctx, args: &CurveArgs) -> CliResult<String> {
    let s: Scheme = args.scheme.parse()?;
    let start = parse_probability(&args.start)?;
    let end = parse_probability(&args.end)?;
    let points = ReliabilityExpr::derive_closed_form(s).curve(&start, &end, args.steps)?;
    let mut grid = Grid::new(["r_module", "r_system"]);
    let mut out = Vec::new();
    for p in points {
        let (rm, rs) = (p.r_module.to_f64(), p.r_system_f64());
        grid.push(vec![ctx.num(rm), ctx.num(rs)]);
        out.push(CurvePoint {
            r_module: rm,
            r_system: rs,
        });
    }
    // curves are always CSV unless JSON is asked for
    let format = if ctx.format == Format::Json {
        Format::Json
    } else {
        Format::Csv
    };
    Ok(emit(format, &grid, &out))
}

fn simulate_cmd(ctx: &Ctx, args: &SimulateArgs) -> CliResult<String> {
    let s: Scheme = args.scheme.parse()?;
    let rs = args
        .r
        .iter()
        .map(|r| parse_probability(r))
        .collect::<CliResult<Vec<_>>>()?;
    let reports: Vec<SimReport> = if rs.len() == 1 {
        let config = SimConfig::new(s, rs[0].clone(), args.trials, args.seed)?;
        vec![match args.threads {
            Some(t) => simulate_with_threads(&config, t)?,
            None => simulate(&config)?,
        }]
    } else {
        monte_carlo::sweep(s, &rs, args.trials, args.seed)?
    };
    let mut grid = Grid::new([
        "scheme",
        "r_module",
        "trials",
        "seed",
        "successes",
        "estimate",
        "ci_low",
        "ci_high",
        "analytic",
    ]);
    for r in &reports {
        grid.push(vec![
            r.scheme.to_string(),
            ctx.num(r.r_module),
            r.trials.to_string(),
            r.seed.to_string(),
            r.successes.to_string(),
            ctx.num(r.estimate),
            ctx.num(r.ci_low),
            ctx.num(r.ci_high),
            ctx.num(r.analytic),
        ]);
    }
    Ok(if reports.len() == 1 {
        emit(ctx.format, &grid, &reports[0])
    } else {
        emit(ctx.format, &grid, &reports)
    })
}

fn campaign(ctx: &Ctx, args: &CampaignArgs) -> CliResult<String> {
    let text =
        fs::read_to_string(&args.spec).map_err(|e| Failure::MissingFile(args.spec.clone(), e))?;
    let mut spec = CampaignSpec::from_json(&text)?;
    if let Some(c) = &args.composition {
        spec.composition = c.parse::<Composition>()?;
    }
    let run = spec.run()?;
    let mut grid = Grid::new([
        "scheme",
        "composition",
        "faults",
        "inputs_swept",
        "mismatches",
        "survived",
    ]);
    grid.push(vec![
        run.scheme.to_string(),
        run.composition.to_string(),
        run.faults.len().to_string(),
        run.inputs_swept.to_string(),
        run.mismatches.to_string(),
        run.survived().to_string(),
    ]);
    Ok(emit(ctx.format, &grid, &run))
}

#[derive(Serialize, Deserialize)]
struct FomOut {
    scheme: Scheme,
    power_uw: f64,
    delay_ns: f64,
    area_um2: f64,
    fom: f64,
    baseline: Option<Scheme>,
    improvement_pct: Option<f64>,
}

fn fom(ctx: &Ctx, args: &FomArgs) -> CliResult<String> {
    let table = load_metrics(&args.table)?;
    let schemes = if args.schemes.is_empty() {
        table.rows().iter().map(|r| r.scheme).collect()
    } else {
        parse_schemes(&args.schemes)?
    };
    let baseline = match &args.baseline {
        Some(b) => {
            let b: Scheme = b.parse()?;
            Some((b, table.fom(&b)?))
        }
        None => None,
    };
    let mut grid = Grid::new([
        "scheme",
        "power_uw",
        "delay_ns",
        "area_um2",
        "fom",
        "baseline",
        "improvement",
    ]);
    let mut out = Vec::new();
    for s in schemes {
        let record = table.fom(&s)?;
        let improvement = baseline.as_ref().map(|(_, base)| match args.basis {
            Basis::Exact => fom_improvement(&record, base),
            Basis::Tabulated => fom_improvement_tabulated(&record, base),
        });
        let m = &record.metrics;
        grid.push(vec![
            s.to_string(),
            m.power.to_string(),
            m.delay.to_string(),
            m.area.to_string(),
            format!("{:.2}", record.fom_scaled),
            baseline
                .as_ref()
                .map(|(b, _)| b.to_string())
                .unwrap_or_default(),
            improvement.map(|v| format!("{v:.1}%")).unwrap_or_default(),
        ]);
        out.push(FomOut {
            scheme: s,
            power_uw: m.power,
            delay_ns: m.delay,
            area_um2: m.area,
            fom: record.fom_scaled,
            baseline: baseline.as_ref().map(|(b, _)| *b),
            improvement_pct: improvement,
        });
    }
    Ok(emit(ctx.format, &grid, &out))
}

fn compare_cmd(ctx: &Ctx, args: &CompareArgs) -> CliResult<String> {
    let table = load_metrics(&args.metrics)?;
    let r = parse_probability(&args.r)?;
    let groups: Vec<Vec<Scheme>> = if args.schemes.is_empty() {
        COHORTS
            .iter()
            .map(|c| {
                c.iter()
                    .map(|s| s.parse().expect("cohort names parse"))
                    .collect()
            })
            .collect()
    } else {
        vec![parse_schemes(&args.schemes)?]
    };
    let mut rows: Vec<TradeoffRow> = Vec::new();
    for group in groups {
        let exprs: Vec<_> = group
            .iter()
            .map(|s| ReliabilityExpr::derive_closed_form(*s))
            .collect();
        let ranked: Vec<Scheme> = compare(&exprs, &r)?.into_iter().map(|x| x.scheme).collect();
        rows.extend(tradeoff_report(&ranked, &r, &table)?);
    }
    let mut grid = Grid::new([
        "scheme",
        "modules",
        "max_tol",
        "guaranteed_tol",
        "r_system",
        "fom",
        "fom_vs_baseline",
    ]);
    for row in &rows {
        grid.push(vec![
            row.scheme.to_string(),
            row.modules.to_string(),
            row.max_tol.to_string(),
            row.guaranteed_tol.to_string(),
            ctx.num(row.r_system),
            format!("{:.2}", row.fom),
            row.fom_vs_baseline
                .map(|v| format!("{v:.1}"))
                .unwrap_or_default(),
        ]);
    }
    Ok(emit(ctx.format, &grid, &rows))
}
