//! `lionman`: simulations, bound tables, verification suites and the play service.

use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use lionman::bounds::bounds_series;
use lionman::csv::fmt_f64;
use lionman::engine::{ManKind, Outcome};
use lionman::sim::{self, GameResult, SimConfig, Summary};
use lionman::strategies::DEFAULT_GREEDY_SAMPLES;
use lionman::verify::{run_suite, SuiteOptions, SuiteSelection};
use lionman::{LionKind, Point};

#[derive(Debug, Parser)]
#[command(name = "lionman", version, about = "Lion-and-man pursuit in the quadrant")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Play games and write their traces.
    Sim(SimArgs),
    /// Tabulate both capture-time bounds over a grid of m0.
    Bounds(BoundsArgs),
    /// Run numerical verification suites.
    Verify(VerifyArgs),
    /// Start the HTTP play service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LionArg {
    Fcls,
    Mcls,
}

impl From<LionArg> for LionKind {
    fn from(a: LionArg) -> Self {
        match a {
            LionArg::Fcls => LionKind::Fcls,
            LionArg::Mcls => LionKind::Mcls,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ManArg {
    Orthogonal,
    Greedy,
    Random,
    Scripted,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct SimArgs {
    #[arg(long, value_enum)]
    lion: LionArg,
    #[arg(long, value_enum)]
    man: ManArg,
    /// Lion start as X,Y. Random dominating starts when omitted.
    #[arg(long, value_name = "X,Y", value_parser = parse_point, requires = "man_pos")]
    lion_pos: Option<Point>,
    /// Man start as X,Y.
    #[arg(long, value_name = "X,Y", value_parser = parse_point, requires = "lion_pos")]
    man_pos: Option<Point>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    games: u64,
    /// Lion moves before a game is abandoned. Defaults to the fixed-center bound plus 8.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Man destinations for `--man scripted`, as `X,Y;X,Y;...`. The man stays put once they run out.
    #[arg(long, value_name = "X,Y;...", value_delimiter = ';', value_parser = parse_point)]
    moves: Vec<Point>,
    /// Direction samples per step for `--man greedy`.
    #[arg(long, default_value_t = DEFAULT_GREEDY_SAMPLES, value_parser = parse_samples)]
    greedy_samples: usize,
    /// Output file for one game, directory for several. Standard output when omitted (one game only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct BoundsArgs {
    #[arg(long, value_parser = parse_positive)]
    m0_min: f64,
    #[arg(long, value_parser = parse_positive)]
    m0_max: f64,
    #[arg(long, value_parser = parse_positive)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct VerifyArgs {
    /// prop3, lemma1, lemma2, lemma3, theorem1, theorem2 or all.
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    suite: SuiteSelection,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    cases: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9, value_parser = parse_tolerance)]
    tol: f64,
    /// Write per-check rows as CSV here; the text report still goes to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    /// Seconds of inactivity before a session is dropped.
    #[arg(long, default_value_t = 3600, value_parser = clap::value_parser!(u64).range(1..))]
    idle_timeout: u64,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {s}"))
    }
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be non-negative, got {s}"))
    }
}

fn parse_samples(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 4 => Ok(n),
        _ => Err(format!("must be an integer of at least 4, got {s}")),
    }
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected X,Y, got `{s}`"))?;
    let p = Point::new(parse_f64(x)?, parse_f64(y)?);
    if p.in_quadrant() {
        Ok(p)
    } else {
        Err(format!("`{s}` is outside the quadrant"))
    }
}

fn parse_suite(s: &str) -> Result<SuiteSelection, String> {
    s.parse().map_err(|e: lionman::verify::VerifyError| e.to_string())
}

/// Prints a usage error in clap's format and exits with status 2.
fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

#[derive(Debug)]
enum Failure {
    /// A check failed or a game broke an invariant.
    Check,
    Io(io::Error),
    Other(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn write_output(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn outcome_label(o: &Outcome) -> String {
    match o {
        Outcome::Captured { .. } => "captured".into(),
        Outcome::StepLimit => "step_limit".into(),
        Outcome::InvariantViolation(v) => format!("violation:{}", v.check),
    }
}

fn games_csv(results: &[GameResult]) -> String {
    let mut out = String::from("game,m0,bound,outcome,lion_moves\n");
    for r in results {
        let moves = r.trace.lion_moves().map_or(String::new(), |n| n.to_string());
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.index,
            fmt_f64(r.m0),
            r.bound,
            outcome_label(&r.trace.outcome),
            moves
        ));
    }
    out
}

fn summary_text(s: &Summary) -> String {
    format!("{}\n{}\n", Summary::CSV_HEADER, s.csv_line())
}

fn run_sim(args: SimArgs) -> Result<(), Failure> {
    let man = match args.man {
        ManArg::Orthogonal => ManKind::Orthogonal,
        ManArg::Greedy => ManKind::Greedy {
            samples: args.greedy_samples,
        },
        ManArg::Random => ManKind::Random,
        ManArg::Scripted => ManKind::Scripted {
            moves: args.moves.clone(),
        },
    };
    if !args.moves.is_empty() && !matches!(args.man, ManArg::Scripted) {
        usage_error("--moves is only used with --man scripted");
    }
    let start = args.lion_pos.zip(args.man_pos);
    if let Some((lion, man)) = start {
        if !lion.dominates(man) {
            usage_error(
                "--lion-pos must exceed --man-pos in both coordinates; otherwise the man escapes along an axis",
            );
        }
    }
    if args.games > 1 && args.out.is_none() {
        usage_error("--out DIR is required when --games is more than 1");
    }
    let config = SimConfig {
        lion: args.lion.into(),
        man,
        start,
        games: args.games as usize,
        max_steps: args.max_steps,
        seed: args.seed,
    };
    let results = sim::run_batch(&config).map_err(|e| Failure::Other(e.to_string()))?;
    let summary = sim::summarize(&results);

    if args.games == 1 {
        let trace = results[0].trace.to_csv();
        write_output(args.out.as_deref(), &trace)?;
        let mut err = io::stderr().lock();
        write!(err, "{}", summary_text(&summary))?;
        writeln!(err, "outcome: {}", outcome_label(&results[0].trace.outcome))?;
    } else {
        let dir = args.out.as_deref().expect("checked above");
        fs::create_dir_all(dir)?;
        let width = (args.games - 1).to_string().len();
        for r in &results {
            fs::write(dir.join(format!("game_{:0width$}.csv", r.index)), r.trace.to_csv())?;
        }
        fs::write(dir.join("games.csv"), games_csv(&results))?;
        fs::write(dir.join("summary.csv"), summary_text(&summary))?;
        print!("{}", summary_text(&summary));
    }

    let violations: Vec<_> = sim::violations(&results).collect();
    for v in &violations {
        if let Outcome::InvariantViolation(bad) = &v.trace.outcome {
            eprintln!("game {}: {bad}", v.index);
        }
    }
    // A game left uncaptured only because the caller capped the step count is not a failure.
    let overruns = results
        .iter()
        .filter(|r| match r.trace.outcome {
            Outcome::Captured { lion_moves } => lion_moves > r.bound,
            Outcome::StepLimit => args.max_steps.is_none_or(|cap| cap >= r.bound),
            Outcome::InvariantViolation(_) => false,
        })
        .count();
    if overruns > 0 {
        eprintln!("{overruns} game(s) not captured within the bound");
    }
    if violations.is_empty()
        && overruns == 0
        && summary.mean_capture.partial_cmp(&summary.bound) != Some(std::cmp::Ordering::Greater)
    {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn run_bounds(args: BoundsArgs) -> Result<(), Failure> {
    if args.m0_min > args.m0_max {
        usage_error("--m0-min must not exceed --m0-max");
    }
    let series = bounds_series(args.m0_min, args.m0_max, args.step).unwrap_or_else(|e| usage_error(e));
    write_output(args.out.as_deref(), &series.to_csv())?;
    let bad: Vec<_> = series.rows.iter().filter(|r| r.n_mcls > r.n_fcls).collect();
    for r in &bad {
        eprintln!(
            "m0 = {}: moving-center bound {} exceeds fixed-center bound {}",
            fmt_f64(r.m0),
            r.n_mcls,
            r.n_fcls
        );
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    let opts = SuiteOptions {
        cases: args.cases as usize,
        seed: args.seed,
        tol: args.tol,
    };
    let report = run_suite(args.suite, &opts).map_err(|e| Failure::Other(e.to_string()))?;
    if let Some(path) = &args.out {
        fs::write(path, report.to_csv())?;
    }
    print!("{}", report.to_text());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn run_serve(args: ServeArgs) -> Result<(), Failure> {
    let addr = SocketAddr::new(args.host, args.port);
    let store = Arc::new(lionman_service::SessionStore::new(Duration::from_secs(
        args.idle_timeout,
    )));
    let runtime = tokio::runtime::Runtime::new()?;
    eprintln!("listening on http://{addr}");
    runtime.block_on(lionman_service::serve(addr, store))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sim(a) => run_sim(a),
        Command::Bounds(a) => run_bounds(a),
        Command::Verify(a) => run_verify(a),
        Command::Serve(a) => run_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_parsing() {
        assert_eq!(parse_point("5,6").unwrap(), Point::new(5.0, 6.0));
        assert_eq!(parse_point(" 0.5 , 1e-3").unwrap(), Point::new(0.5, 1e-3));
        assert!(parse_point("5").is_err());
        assert!(parse_point("-1,2").is_err());
        assert!(parse_point("nan,2").is_err());
    }

    #[test]
    fn number_parsing() {
        assert!(parse_positive("0").is_err());
        assert!(parse_positive("inf").is_err());
        assert_eq!(parse_tolerance("0").unwrap(), 0.0);
        assert!(parse_samples("3").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
