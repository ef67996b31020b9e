use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gpgof::core::{AlternativeSpec, FamilySpec, Statistic};
use gpgof::data::{read_sample, DataFormat};
use gpgof::report::{DiagnoseReport, OutputFormat, TestReport};
use gpgof::sim::{run_diagnostics, run_experiment_with, SimConfig};
use gpgof::{exec, Execution, GofError};

#[derive(Parser)]
#[command(
    name = "gpgof",
    version,
    about = "Bootstrap goodness-of-fit tests for Katz and compound Poisson count data"
)]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true, env = "GPGOF_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether a sample follows a GP family.
    Test(TestArgs),
    /// Run a Monte Carlo size/power experiment described by a TOML file.
    Simulate(SimulateArgs),
    /// Average |d(k)| profile of an alternative and the S4/S5 recommendation.
    Diagnose(DiagnoseArgs),
}

fn parse_family(s: &str) -> Result<FamilySpec, String> {
    s.parse().map_err(|e: gpgof::core::Error| e.to_string())
}

fn parse_alt(s: &str) -> Result<AlternativeSpec, String> {
    s.parse().map_err(|e: gpgof::core::Error| e.to_string())
}

#[derive(Clone)]
struct StatList(Vec<Statistic>);

fn parse_stats(s: &str) -> Result<StatList, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        if part.trim().eq_ignore_ascii_case("all") {
            out.extend(Statistic::all());
        } else {
            out.push(
                part.parse()
                    .map_err(|e: gpgof::core::Error| e.to_string())?,
            );
        }
    }
    Ok(StatList(out))
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(a) if a > 0.0 && a < 1.0 => Ok(a),
        _ => Err(format!("alpha must be a number in (0, 1), got `{s}`")),
    }
}

#[derive(Args)]
struct TestArgs {
    /// Null family: katz, pp or pb:<nu>.
    #[arg(long, value_parser = parse_family)]
    family: FamilySpec,
    #[arg(long)]
    data: PathBuf,
    /// raw: whitespace-separated integers; freq: CSV `value,count` lines.
    #[arg(long, default_value = "raw")]
    format: DataFormat,
    /// Comma-separated statistics (s1..s7, ad, cvm) or `all`.
    #[arg(long, default_value = "all", value_parser = parse_stats)]
    stat: StatList,
    /// Bootstrap cycles.
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    bootstrap: u64,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    out: OutputFormat,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Null family: katz, pp or pb:<nu>.
    #[arg(long, value_parser = parse_family)]
    family: FamilySpec,
    /// Alternative descriptor, e.g. `pp:1,2` or `mkdu:4,0.5,1,0.25`.
    #[arg(long, value_parser = parse_alt)]
    alt: AlternativeSpec,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    out: OutputFormat,
}

fn run_test(args: TestArgs) -> Result<(), GofError> {
    let sample = read_sample(&args.data, args.format)?;
    let results = exec::bootstrap(
        &sample,
        args.family,
        &args.stat.0,
        args.bootstrap as usize,
        args.alpha,
        args.seed,
        Execution::Parallel,
    )?;
    let report = TestReport::new(&sample, args.family, args.seed, &results);
    print!("{}", report.render(args.out)?);
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<(), GofError> {
    let config = SimConfig::load(&args.config)?;
    let result = run_experiment_with(&config, Execution::Parallel, |cells, elapsed| {
        if let Some(first) = cells.first() {
            eprintln!(
                "{} n={}: {} replicates, {} failed, {:.1}s",
                first.alternative,
                first.n,
                first.completed + first.failures,
                first.failures,
                elapsed.as_secs_f64()
            );
        }
    })?;
    result.write_to_dir(&args.out_dir)?;
    for cell in result.cells.iter().filter(|c| c.flagged) {
        eprintln!(
            "warning: {} n={} {}: {} of {} replicates failed",
            cell.alternative,
            cell.n,
            cell.statistic,
            cell.failures,
            cell.failures + cell.completed
        );
    }
    println!("{}", args.out_dir.join("results.csv").display());
    println!("{}", args.out_dir.join("results.json").display());
    Ok(())
}

fn run_diagnose(args: DiagnoseArgs) -> Result<(), GofError> {
    let (n, reps) = (args.n as usize, args.reps as usize);
    let diagnostics = run_diagnostics(
        args.family,
        &args.alt,
        n,
        reps,
        args.seed,
        Execution::Parallel,
    )?;
    let report = DiagnoseReport {
        family: args.family,
        alternative: args.alt,
        n,
        reps,
        seed: args.seed,
        diagnostics,
    };
    print!("{}", report.render(args.out)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads as usize)
            .build_global()
        {
            eprintln!("gpgof: cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match cli.command {
        Command::Test(args) => run_test(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Diagnose(args) => run_diagnose(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gpgof: {e}");
            ExitCode::from(if e.is_user_error() { 2 } else { 1 })
        }
    }
}
