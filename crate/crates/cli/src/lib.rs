//! Command-line front end for `multibase`.
//!
//! [`run`] parses an argument vector, dispatches to the library and writes
//! the result to standard output as text, JSON or CSV. Exit codes: 0 on
//! success, 1 for usage errors, 2 for domain errors, 3 for numeric failures
//! (and failed `report` checks), 4 for resource limits.

mod commands;
mod output;
mod report;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;

use clap::{Parser, Subcommand};
use multibase::{BaseSystem, ErrorKind, Limits};

pub use output::Format;

/// Environment variable overriding the byte limit of a single DP table.
pub const MAX_TABLE_BYTES_VAR: &str = "MULTIBASE_MAX_TABLE_BYTES";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(multibase::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Lib(e) => match e.kind() {
                ErrorKind::Domain => 2,
                ErrorKind::Numeric => 3,
                ErrorKind::Resource => 4,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Io(msg) => f.write_str(msg),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<multibase::Error> for CliError {
    fn from(e: multibase::Error) -> Self {
        CliError::Lib(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "multibase", version, about = "Counting, estimating and sampling multi-base representations")]
struct Cli {
    /// Comma-separated, strictly increasing, pairwise coprime bases.
    #[arg(long, global = true, default_value = "2,3", value_parser = parse_bases)]
    bases: Bases,
    /// Digits run over 0..d-1.
    #[arg(long, global = true, default_value = "2", value_parser = parse_u32)]
    digits: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the elements of S up to a limit.
    Seq(commands::SeqArgs),
    /// Exact number of representations of n, or a table of them.
    Count(commands::CountArgs),
    /// Asymptotic formulas, optionally compared with exact counts.
    Asym(commands::AsymArgs),
    /// Saddle-point estimates.
    Saddle(commands::SaddleArgs),
    /// Moments and normality of a digit statistic.
    Stats(commands::StatsArgs),
    /// Uniformly random representations of n.
    Sample(commands::SampleArgs),
    /// The fluctuating factor K(n) on a geometric grid.
    Fluct(commands::FluctArgs),
    /// Check the tail inequalities of the characteristic functions.
    Tails(commands::TailsArgs),
    /// Run a bundle of invocations with expected values from a JSON file.
    Report(report::ReportArgs),
}

#[derive(Debug, Clone)]
struct Bases(Vec<u64>);

/// Parses a non-negative integer, accepting scientific notation and
/// flooring fractional values.
pub fn parse_integer(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !x.is_finite() || x < 0.0 {
        return Err(format!("`{s}` must be finite and non-negative"));
    }
    let x = x.floor();
    if x >= 18_446_744_073_709_551_616.0 {
        return Err(format!("`{s}` does not fit in 64 bits"));
    }
    Ok(x as u64)
}

fn parse_u32(s: &str) -> Result<u32, String> {
    let v = parse_integer(s)?;
    u32::try_from(v).map_err(|_| format!("`{s}` does not fit in 32 bits"))
}

fn parse_usize(s: &str) -> Result<usize, String> {
    let v = parse_integer(s)?;
    usize::try_from(v).map_err(|_| format!("`{s}` is too large"))
}

fn parse_real(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

fn parse_bases(s: &str) -> Result<Bases, String> {
    s.split(',').map(parse_integer).collect::<Result<Vec<_>, _>>().map(Bases)
}

fn limits() -> Result<Limits, CliError> {
    let mut limits = Limits::default();
    if let Ok(v) = std::env::var(MAX_TABLE_BYTES_VAR) {
        limits.max_table_bytes =
            parse_integer(&v).map_err(|e| CliError::Usage(format!("{MAX_TABLE_BYTES_VAR}: {e}")))?;
    }
    Ok(limits)
}

fn execute(cli: &Cli) -> Result<output::Output, CliError> {
    let limits = limits()?;
    if let Command::Report(args) = &cli.command {
        return report::report(args);
    }
    let system = BaseSystem::new(&cli.bases.0, cli.digits)?;
    match &cli.command {
        Command::Seq(a) => commands::seq(&system, a),
        Command::Count(a) => commands::count(&system, a, &limits),
        Command::Asym(a) => commands::asym(&system, a, &limits),
        Command::Saddle(a) => commands::saddle(&system, a, &limits),
        Command::Stats(a) => commands::stats(&system, a, &limits),
        Command::Sample(a) => commands::sample(&system, a, &limits),
        Command::Fluct(a) => commands::fluct(&system, a, &limits),
        Command::Tails(a) => commands::tails(&system, a),
        Command::Report(_) => unreachable!("handled above"),
    }
}

/// Parses and executes one invocation; the first item is the program name.
fn invoke<I, T>(args: I) -> Result<output::Output, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string().trim_end().to_string()))?;
    execute(&cli)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return 1;
            }
            let _ = write!(out, "{text}");
            return 0;
        }
    };
    let result = execute(&cli).and_then(|o| o.render(cli.format).map(|s| (s, o.failures)));
    match result {
        Ok((rendered, failures)) => {
            let _ = out.write_all(rendered.as_bytes());
            let _ = out.flush();
            if failures > 0 {
                let _ = writeln!(err, "error: {failures} check(s) failed");
                return 3;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_accept_scientific_notation() {
        assert_eq!(parse_integer("1e6"), Ok(1_000_000));
        assert_eq!(parse_integer(" 2.5e1 "), Ok(25));
        assert_eq!(parse_integer("7.9"), Ok(7));
        assert_eq!(parse_integer("18446744073709551615"), Ok(u64::MAX));
        assert!(parse_integer("-1").is_err());
        assert!(parse_integer("1e20").is_err());
        assert!(parse_integer("nan").is_err());
        assert!(parse_integer("x").is_err());
    }

    #[test]
    fn bases_parse_as_list() {
        assert_eq!(parse_bases("2,3,5").unwrap().0, vec![2, 3, 5]);
        assert!(parse_bases("2,,3").is_err());
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(CliError::from(multibase::Error::NonCoprimeBases(1, 2)).exit_code(), 2);
        assert_eq!(CliError::from(multibase::Error::BracketFailure("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(multibase::Error::OutOfMemory { requested: 2, limit: 1 }).exit_code(), 4);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
    }

    #[test]
    fn help_exits_zero() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["multibase", "--help"], &mut out, &mut err), 0);
        assert!(String::from_utf8(out).unwrap().contains("count"));
    }

    #[test]
    fn missing_subcommand_is_usage_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["multibase"], &mut out, &mut err), 1);
    }
}
