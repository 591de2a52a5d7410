use clap::{ArgGroup, Args, ValueEnum};
use multibase::{
    build_count_table_with, build_moment_tables_with, build_sampler_with, cardinality_estimate, chernoff_log_bound,
    chi_square_uniformity, clt_prediction, count_brute_force, count_upto, count_via_power_partition_with,
    estimate_moments, evaluate_f_unrestricted, fluctuation_K, generate_upto, mahler_log_estimate,
    normality_report_with, pennington_log_estimate, rational_to_f64, solve_saddle, statistic_value,
    theorem1_constants, theorem1_log_estimate, theorem2_constants, theorem2_log_main_term, verify_tail_bounds_with,
    BaseSystem, CountTable, Error, GfKind, Limits, Mode, Statistic, TailCheck, SOLVER_TOLERANCE,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::output::{object, Output};
use crate::{parse_integer, parse_real, parse_usize, CliError};

type Outcome = Result<Output, CliError>;

#[derive(Debug, Args)]
pub struct SeqArgs {
    /// Largest value listed.
    #[arg(long, value_parser = parse_integer)]
    limit: u64,
    /// Print only the number of elements (with the analytic estimate).
    #[arg(long)]
    count_only: bool,
}

pub fn seq(system: &BaseSystem, a: &SeqArgs) -> Outcome {
    if a.count_only {
        let count = count_upto(system, a.limit)?;
        let estimate = if a.limit >= 2 { Some(cardinality_estimate(system, 1.0 / a.limit as f64)?) } else { None };
        let json = json!({ "limit": a.limit, "count": count, "estimate": estimate });
        return Ok(Output::new(json).text(count.to_string()));
    }
    let prefix = generate_upto(system, a.limit)?;
    let rows = prefix.elements().iter().enumerate().map(|(i, &h)| json!({ "index": i + 1, "element": h })).collect();
    Ok(Output::new(json!(prefix.elements())).rows(rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Sliding-window dynamic program.
    Dp,
    /// Direct enumeration (small n only).
    Brute,
    /// Partitions into powers of p; needs two bases with d equal to one of them.
    Power,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("target").required(true).args(["n", "table"])))]
pub struct CountArgs {
    #[arg(long, value_parser = parse_integer)]
    n: Option<u64>,
    /// Print P(0), ..., P(N).
    #[arg(long, value_name = "N", value_parser = parse_integer)]
    table: Option<u64>,
    #[arg(long, value_enum, default_value_t = Method::Dp)]
    method: Method,
}

fn power_table(system: &BaseSystem, n: u64, limits: &Limits) -> Result<CountTable, CliError> {
    let bases = system.bases();
    if bases.len() != 2 {
        return Err(Error::WrongArity { expected: 2, actual: bases.len() }.into());
    }
    let d = system.digit_bound() as u64;
    let p = match (bases[0] == d, bases[1] == d) {
        (true, _) => bases[1],
        (_, true) => bases[0],
        _ => return Err(Error::Domain(format!("method power needs the digit bound to equal a base, got d = {d}")).into()),
    };
    Ok(count_via_power_partition_with(d, p, n, limits)?)
}

fn counts(system: &BaseSystem, ns: &[u64], method: Method, limits: &Limits) -> Result<Vec<String>, CliError> {
    let top = ns.iter().copied().max().unwrap_or(0);
    let table = match method {
        Method::Dp => Some(build_count_table_with(system, top, limits)?),
        Method::Power => Some(power_table(system, top, limits)?),
        Method::Brute => None,
    };
    ns.iter()
        .map(|&n| match &table {
            Some(t) => Ok(t.count(n).to_string()),
            None => Ok(count_brute_force(system, n)?.to_string()),
        })
        .collect()
}

pub fn count(system: &BaseSystem, a: &CountArgs, limits: &Limits) -> Outcome {
    let method = a.method.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    if let Some(n) = a.n {
        let c = counts(system, &[n], a.method, limits)?.remove(0);
        return Ok(Output::new(json!({ "n": n, "count": c, "method": method })).text(c));
    }
    let top = a.table.unwrap_or(0);
    let ns: Vec<u64> = (0..=top).collect();
    let values = counts(system, &ns, a.method, limits)?;
    let text = values.iter().enumerate().map(|(n, c)| format!("{n} {c}")).collect::<Vec<_>>().join("\n");
    let rows: Vec<Value> = values.into_iter().enumerate().map(|(n, c)| json!({ "n": n, "count": c })).collect();
    Ok(Output::new(Value::Array(rows)).text(text))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    /// log P(n) to three terms (m ≥ 2).
    #[value(name = "1")]
    One,
    /// Main term and fluctuating factor for two bases.
    #[value(name = "2")]
    Two,
    /// Leading estimate of log P(pn) for partitions into powers of p.
    Mahler,
    /// Refined estimate of log P(pn) with O(1) remainder.
    Pennington,
    /// Mean and variance coefficients of a digit statistic.
    Clt,
}

#[derive(Debug, Args)]
pub struct AsymArgs {
    #[arg(long, value_enum)]
    theorem: Theorem,
    #[arg(long, value_parser = parse_integer)]
    n: Option<u64>,
    /// Power base for mahler and pennington.
    #[arg(long, default_value = "3", value_parser = parse_integer)]
    p: u64,
    /// Statistic for clt: sum, weight or digit:b.
    #[arg(long, default_value = "weight")]
    statistic: Statistic,
    /// Compare with exact values (needs --n).
    #[arg(long)]
    exact: bool,
}

fn power_partition_log_count(p: u64, n: u64, limits: &Limits) -> Result<f64, CliError> {
    let q = if p % 2 == 0 { 3 } else { 2 };
    let top = p.checked_mul(n).ok_or_else(|| Error::LimitOverflow(format!("{p}·{n} overflows")))?;
    Ok(count_via_power_partition_with(q, p, top, limits)?.ln_count(top))
}

pub fn asym(system: &BaseSystem, a: &AsymArgs, limits: &Limits) -> Outcome {
    if a.exact && a.n.is_none() {
        return Err(CliError::Usage("--exact needs --n".into()));
    }
    let need_n = || a.n.ok_or_else(|| CliError::Usage("this theorem needs --n".into()));
    let mut obj = match a.theorem {
        Theorem::One => {
            let mut obj = object(&theorem1_constants(system));
            if let Some(n) = a.n {
                let est = theorem1_log_estimate(system, n)?;
                obj.insert("n".into(), json!(n));
                obj.insert("log_estimate".into(), json!(est));
                if a.exact {
                    let lp = build_count_table_with(system, n, limits)?.ln_count(n);
                    let ln = (n as f64).ln();
                    obj.insert("log_count".into(), json!(lp));
                    obj.insert("residual".into(), json!(lp - est));
                    obj.insert("scaled_residual".into(), json!((lp - est) / (ln * ln.ln())));
                }
            }
            obj
        }
        Theorem::Two => {
            let mut obj = object(&theorem2_constants(system)?);
            if let Some(n) = a.n {
                obj.insert("n".into(), json!(n));
                obj.insert("log_main_term".into(), json!(theorem2_log_main_term(system, n)?));
                if a.exact {
                    let table = build_count_table_with(system, n, limits)?;
                    obj.insert("log_count".into(), json!(table.ln_count(n)));
                    obj.insert("fluctuation".into(), json!(fluctuation_K(system, n, &table.count(n))?));
                }
            }
            obj
        }
        Theorem::Mahler | Theorem::Pennington => {
            let n = need_n()?;
            let pennington = a.theorem == Theorem::Pennington;
            let est = if pennington { pennington_log_estimate(a.p, n)? } else { mahler_log_estimate(a.p, n)? };
            let mut obj = serde_json::Map::new();
            obj.insert("p".into(), json!(a.p));
            obj.insert("n".into(), json!(n));
            obj.insert("log_estimate".into(), json!(est));
            if a.exact {
                let lp = power_partition_log_count(a.p, n, limits)?;
                obj.insert("log_count".into(), json!(lp));
                if pennington {
                    obj.insert("remainder".into(), json!(lp - est));
                } else {
                    obj.insert("ratio".into(), json!(lp / est));
                }
            }
            obj
        }
        Theorem::Clt => {
            let pred = clt_prediction(system, a.statistic)?;
            let mut obj = object(&pred);
            if let Some(n) = a.n {
                obj.insert("n".into(), json!(n));
                obj.insert("predicted_mean".into(), json!(pred.mean(system, n)));
                obj.insert("predicted_variance".into(), json!(pred.variance(system, n)));
                if a.exact {
                    let table = build_moment_tables_with(system, n, a.statistic, limits)?;
                    let mean = rational_to_f64(&table.mean(n));
                    let variance = rational_to_f64(&table.variance(n));
                    obj.insert("mean".into(), json!(mean));
                    obj.insert("variance".into(), json!(variance));
                    obj.insert("mean_ratio".into(), json!(mean / pred.mean(system, n)));
                    obj.insert("variance_ratio".into(), json!(variance / pred.variance(system, n)));
                }
            }
            obj
        }
    };
    let name = a.theorem.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    obj.insert("theorem".into(), json!(name));
    Ok(Output::new(Value::Object(obj)))
}

#[derive(Debug, Args)]
pub struct SaddleArgs {
    #[arg(long, value_parser = parse_integer)]
    n: Option<u64>,
    /// Evaluate f(t,u) and its derivatives at this t instead of solving.
    #[arg(long, value_parser = parse_real, conflicts_with_all = ["n", "moments"])]
    t: Option<f64>,
    #[arg(long, default_value = "1", value_parser = parse_real)]
    u: f64,
    /// Series: f (sum of digits), g (Hamming weight) or h:b (occurrences of b).
    #[arg(long, default_value = "f")]
    series: GfKind,
    #[arg(long, default_value_t = SOLVER_TOLERANCE, value_parser = parse_real)]
    tol: f64,
    /// Predict the mean and variance of a statistic instead.
    #[arg(long)]
    moments: Option<Statistic>,
    /// Also report the Chernoff bound n·r + f(r,1) at this r.
    #[arg(long, value_parser = parse_real)]
    chernoff_r: Option<f64>,
    /// Compare with exact values.
    #[arg(long)]
    exact: bool,
}

pub fn saddle(system: &BaseSystem, a: &SaddleArgs, limits: &Limits) -> Outcome {
    if let Some(t) = a.t {
        return Ok(Output::new(json!(evaluate_f_unrestricted(system, a.series, t, a.u, a.tol)?)));
    }
    let n = a.n.ok_or_else(|| CliError::Usage("saddle needs --n or --t".into()))?;
    if let Some(stat) = a.moments {
        let est = estimate_moments(system, n, stat)?;
        let mut obj = object(&est);
        if a.exact {
            let table = build_moment_tables_with(system, n, stat, limits)?;
            let mean = rational_to_f64(&table.mean(n));
            let variance = rational_to_f64(&table.variance(n));
            obj.insert("exact_mean".into(), json!(mean));
            obj.insert("exact_variance".into(), json!(variance));
            obj.insert("mean_ratio".into(), json!(est.mean / mean));
            obj.insert("variance_ratio".into(), json!(est.variance / variance));
        }
        return Ok(Output::new(Value::Object(obj)));
    }
    let result = solve_saddle(system, a.series, n, a.u, a.tol)?;
    let mut obj = object(&result);
    if let Some(r) = a.chernoff_r {
        obj.insert("chernoff_r".into(), json!(r));
        obj.insert("chernoff_bound_at_r".into(), json!(chernoff_log_bound(system, n, r)?));
    }
    if a.exact {
        if a.series != GfKind::F || a.u != 1.0 {
            return Err(CliError::Usage("--exact compares counts and needs --series f --u 1".into()));
        }
        let lp = build_count_table_with(system, n, limits)?.ln_count(n);
        obj.insert("log_count".into(), json!(lp));
        obj.insert("relative_error".into(), json!((result.log_estimate - lp).abs() / lp));
    }
    Ok(Output::new(Value::Object(obj)))
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["exact", "samples"])))]
pub struct StatsArgs {
    #[arg(long, value_parser = parse_integer)]
    n: u64,
    /// sum, weight or digit:b.
    #[arg(long, default_value = "weight")]
    statistic: Statistic,
    /// Use the exact distribution.
    #[arg(long)]
    exact: bool,
    /// Estimate from this many uniform samples.
    #[arg(long, value_parser = parse_integer)]
    samples: Option<u64>,
    #[arg(long, default_value = "0", value_parser = parse_integer)]
    seed: u64,
}

pub fn stats(system: &BaseSystem, a: &StatsArgs, limits: &Limits) -> Outcome {
    let mode = match a.samples {
        Some(count) => Mode::Sampled { count, seed: a.seed },
        None => Mode::Exact,
    };
    let report = normality_report_with(system, a.n, a.statistic, mode, limits)?;
    Ok(Output::new(json!(report)))
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_parser = parse_integer)]
    n: u64,
    /// Number of representations drawn.
    #[arg(long, default_value = "1", value_parser = parse_integer)]
    count: u64,
    #[arg(long, default_value = "0", value_parser = parse_integer)]
    seed: u64,
    /// Instead of printing draws, test this many draws for uniformity.
    #[arg(long, value_name = "DRAWS", value_parser = parse_integer)]
    chi_square: Option<u64>,
}

pub fn sample(system: &BaseSystem, a: &SampleArgs, limits: &Limits) -> Outcome {
    let sampler = build_sampler_with(system, a.n, limits)?;
    if let Some(draws) = a.chi_square {
        return Ok(Output::new(json!(chi_square_uniformity(&sampler, draws, a.seed)?)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let draws: Vec<_> = (0..a.count).map(|_| sampler.sample(&mut rng)).collect();
    let text = draws.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n");
    let rows = draws
        .iter()
        .enumerate()
        .map(|(i, r)| {
            json!({
                "index": i + 1,
                "representation": r.to_string(),
                "sum": statistic_value(r, Statistic::SumOfDigits),
                "weight": statistic_value(r, Statistic::HammingWeight),
            })
        })
        .collect();
    let json = json!({
        "n": a.n,
        "seed": a.seed,
        "representations": sampler.count().to_string(),
        "samples": draws,
    });
    Ok(Output::new(json).text(text).rows(rows))
}

#[derive(Debug, Args)]
pub struct FluctArgs {
    #[arg(long, default_value = "1000", value_parser = parse_integer)]
    min: u64,
    #[arg(long, value_parser = parse_integer)]
    max: u64,
    /// Grid points are ⌈min·ratio^k⌉.
    #[arg(long, default_value = "1.1", value_parser = parse_real)]
    ratio: f64,
}

pub fn fluct(system: &BaseSystem, a: &FluctArgs, limits: &Limits) -> Outcome {
    if a.ratio <= 1.0 || a.min == 0 || a.min > a.max {
        return Err(CliError::Usage("fluct needs ratio > 1 and 1 ≤ min ≤ max".into()));
    }
    let mut grid: Vec<u64> = Vec::new();
    let mut k = 0;
    loop {
        let n = (a.min as f64 * a.ratio.powi(k)).ceil();
        if n > a.max as f64 {
            break;
        }
        if grid.last() != Some(&(n as u64)) {
            grid.push(n as u64);
        }
        k += 1;
    }
    let constants = theorem2_constants(system)?;
    let table = build_count_table_with(system, a.max, limits)?;
    let mut rows = Vec::with_capacity(grid.len());
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &n in &grid {
        let k = fluctuation_K(system, n, &table.count(n))?;
        lo = lo.min(k);
        hi = hi.max(k);
        rows.push(json!({
            "n": n,
            "log_count": table.ln_count(n),
            "log_main_term": theorem2_log_main_term(system, n)?,
            "fluctuation": k,
        }));
    }
    let mut text: Vec<String> = grid
        .iter()
        .zip(&rows)
        .map(|(n, row)| format!("{n} {}", row["fluctuation"]))
        .collect();
    text.push(format!("min {lo} max {hi} spread {}", hi / lo));
    let json = json!({
        "constants": constants,
        "points": rows,
        "min": lo,
        "max": hi,
        "spread": hi / lo,
    });
    Ok(Output::new(json).text(text.join("\n")).rows(rows))
}

#[derive(Debug, Clone)]
pub struct Reals(Vec<f64>);

fn parse_reals(s: &str) -> Result<Reals, String> {
    s.split(',').map(parse_real).collect::<Result<Vec<_>, _>>().map(Reals)
}

#[derive(Debug, Args)]
pub struct TailsArgs {
    /// Comma-separated radii r.
    #[arg(long, default_value = "1e-2,1e-3,1e-4", value_parser = parse_reals)]
    r: Reals,
    /// Points of the uniform y-grid on [-1/2, 1/2].
    #[arg(long, default_value = "1024", value_parser = parse_usize)]
    y_resolution: usize,
    /// Rationals a/q with q up to this bound join the grid.
    #[arg(long, default_value = "64", value_parser = parse_integer)]
    max_denominator: u64,
}

pub fn tails(system: &BaseSystem, a: &TailsArgs) -> Outcome {
    let check = TailCheck { max_denominator: a.max_denominator, ..TailCheck::all_series(system) };
    let report = verify_tail_bounds_with(system, &a.r.0, a.y_resolution, &check)?;
    let rows: Vec<Value> = report.per_r.iter().map(|s| json!(s)).collect();
    let mut text: Vec<String> = report
        .per_r
        .iter()
        .map(|s| {
            format!(
                "r {} points {} A1 {} A2 {} worst margin {} violations {}",
                s.r, s.points, s.fitted_a1, s.fitted_a2, s.worst_margin, s.violations
            )
        })
        .collect();
    text.push(format!("C {} A1 {} A2 {} violations {}", report.c, report.fitted_a1, report.fitted_a2, report.violations));
    Ok(Output::new(json!(report)).text(text.join("\n")).rows(rows))
}
