//! Command-line front end. Exit codes: 0 success, 1 verification or table
//! mismatch (and runtime failures), 2 usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::distance::min_distance;
use crate::error::{Error, Result};
use crate::gf2poly::Gf2Poly;
use crate::profile::{build_profile, ProfileCache, ScoreResult};
use crate::search::{self, CandidateSource, SearchConfig};
use crate::tables::{self, TABLES};
use crate::verify::{self, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "crcsel", version, about = "Minimum-distance profiles and ranking of CRC generator polynomials")]
pub struct Cli {
    #[command(flatten)]
    pub format: FormatArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct FormatArgs {
    /// Emit CSV
    #[arg(long, global = true, conflicts_with = "json")]
    pub csv: bool,
    /// Emit JSON
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Human,
    Csv,
    Json,
}

impl From<FormatArgs> for Format {
    fn from(f: FormatArgs) -> Self {
        if f.csv {
            Format::Csv
        } else if f.json {
            Format::Json
        } else {
            Format::Human
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Order n_c of a generator polynomial
    Order {
        poly: String,
    },
    /// Run-length distance profile over [p+1, min(M, n_c)]
    Profile {
        poly: String,
        #[arg(value_name = "M")]
        max_len: usize,
    },
    /// Cumulative distance score at one or more target lengths
    Score {
        poly: String,
        /// Comma-separated target lengths
        #[arg(value_name = "M", value_delimiter = ',', required = true)]
        targets: Vec<usize>,
    },
    /// Exhaustive search over all generators of one degree
    Search(SearchArgs),
    /// Cross-check the transform path against brute force on random codes
    Verify(VerifyArgs),
    /// Recompute the reference tables and figure data, flagging mismatches
    Tables {
        /// Only these tables (1-4)
        #[arg(long = "table", value_parser = clap::value_parser!(u8).range(1..=4))]
        only: Vec<u8>,
        /// Skip the degree-24 table
        #[arg(long)]
        skip_slow: bool,
    },
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    pub p: u32,
    /// Comma-separated target lengths
    #[arg(long = "M", value_delimiter = ',', default_value = "512")]
    pub targets: Vec<usize>,
    #[arg(long, default_value_t = search::DEFAULT_TOP_K)]
    pub top_k: usize,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = search::DEFAULT_BLOCK_SIZE)]
    pub block_size: usize,
    /// Score only these polynomials (comma-separated hex) instead of a full sweep
    #[arg(long, value_delimiter = ',')]
    pub candidates: Vec<String>,
    /// Confirm a full sweep above degree 20
    #[arg(long)]
    pub long_run: bool,
    /// Stop after this many blocks; resume later from the checkpoint
    #[arg(long)]
    pub stop_after_blocks: Option<usize>,
    /// Print per-block progress to stderr
    #[arg(long)]
    pub progress: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 4)]
    pub min_degree: u32,
    #[arg(long, default_value_t = 12)]
    pub max_degree: u32,
    /// Lengths drawn from [p+1, p+max_extra]
    #[arg(long, default_value_t = 20)]
    pub max_extra: usize,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Corrupt the transform results to exercise the failure path
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidPolynomial(_)
                | Error::InvalidLength(_)
                | Error::InvalidConfig(_)
                | Error::Unsupported(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io { path: PathBuf::from("<stdout>"), source: e }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let format = Format::from(cli.format);
    match &cli.command {
        Command::Order { poly } => {
            let g = Gf2Poly::parse_hex(poly)?;
            let order = g.order()?;
            match format {
                Format::Human => writeln!(out, "{order}"),
                Format::Csv => write!(out, "poly_hex,degree,order\n{g},{},{order}\n", g.degree()),
                Format::Json => writeln!(out, "{}", json!({"poly": g, "degree": g.degree(), "order": order})),
            }
            .map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Profile { poly, max_len } => {
            let g = Gf2Poly::parse_hex(poly)?;
            let profile = build_profile(g, *max_len)?;
            match format {
                Format::Csv => out.write_all(profile.to_csv().as_bytes()),
                Format::Json => writeln!(out, "{}", serde_json::to_string(&profile).expect("serializable")),
                Format::Human => {
                    let mut text = format!(
                        "{g}  degree {}  order {}  M {}\n{:>8} {:>8} {:>4}\n",
                        g.degree(),
                        profile.order,
                        profile.target,
                        "n_lo",
                        "n_hi",
                        "d"
                    );
                    for r in &profile.runs {
                        text.push_str(&format!("{:>8} {:>8} {:>4}\n", r.n_lo, r.n_hi, r.d));
                    }
                    if profile.order < profile.target as u64 {
                        text.push_str(&format!("(order {} < M: no lengths beyond the order)\n", profile.order));
                    }
                    out.write_all(text.as_bytes())
                }
            }
            .map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Score { poly, targets } => {
            let g = Gf2Poly::parse_hex(poly)?;
            let mut sorted = targets.clone();
            sorted.sort_unstable();
            sorted.dedup();
            let result = crate::profile::score_targets(g, &sorted)?;
            write_scores(out, format, &[result]).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Search(args) => cmd_search(args, format, out, err),
        Command::Verify(args) => cmd_verify(args, format, out),
        Command::Tables { only, skip_slow } => cmd_tables(only, *skip_slow, format, out),
    }
}

fn write_scores(out: &mut dyn Write, format: Format, results: &[ScoreResult]) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "poly_hex,degree,order,M,score")?;
            for r in results {
                for (m, s) in &r.scores {
                    let s = s.map(|v| v.to_string()).unwrap_or_default();
                    writeln!(out, "{},{},{},{m},{s}", r.poly, r.degree, r.order)?;
                }
            }
        }
        Format::Json => {
            let rows: Vec<_> = results
                .iter()
                .map(|r| {
                    json!({
                        "poly": r.poly,
                        "degree": r.degree,
                        "order": r.order,
                        "scores": r.scores.iter().map(|(m, s)| json!({"M": m, "score": s})).collect::<Vec<_>>(),
                    })
                })
                .collect();
            writeln!(out, "{}", serde_json::Value::Array(rows))?;
        }
        Format::Human => {
            let Some(first) = results.first() else { return Ok(()) };
            write!(out, "{:<10} {:>6} {:>10}", "poly", "degree", "order")?;
            for m in first.scores.keys() {
                write!(out, " {:>8}", format!("S({m})"))?;
            }
            writeln!(out)?;
            for r in results {
                write!(out, "{:<10} {:>6} {:>10}", r.poly.to_hex(), r.degree, r.order)?;
                for s in r.scores.values() {
                    write!(out, " {:>8}", s.map(|v| v.to_string()).unwrap_or_else(|| "-".into()))?;
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn cmd_search(args: &SearchArgs, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut config = SearchConfig::new(args.p, args.targets.clone());
    config.top_k = args.top_k;
    config.workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    config.checkpoint_path = args.checkpoint.clone();
    config.block_size = args.block_size;
    config.allow_long_run = args.long_run;
    config.stop_after_blocks = args.stop_after_blocks;
    config.progress = args.progress;
    if !args.candidates.is_empty() {
        let list = args
            .candidates
            .iter()
            .map(|s| Gf2Poly::parse_hex(s))
            .collect::<Result<Vec<_>>>()?;
        config.source = CandidateSource::List(list);
    }
    let outcome = search::run_search(&config)?;
    let board = &outcome.leaderboard;
    match format {
        Format::Csv => out.write_all(board.to_csv().as_bytes()),
        Format::Json => {
            let boards: Vec<_> = board
                .targets()
                .map(|m| json!({"M": m, "entries": board.entries(m)}))
                .collect();
            writeln!(
                out,
                "{}",
                json!({
                    "p": args.p,
                    "complete": outcome.is_complete(),
                    "completed_blocks": outcome.completed_blocks,
                    "total_blocks": outcome.total_blocks,
                    "leaderboards": boards,
                })
            )
        }
        Format::Human => {
            let mut text = String::new();
            for m in board.targets() {
                text.push_str(&format!("M = {m}\n{:>4} {:<10} {:>10} {:>8}\n", "rank", "poly", "order", "S"));
                for (i, e) in board.entries(m).iter().enumerate() {
                    text.push_str(&format!("{:>4} {:<10} {:>10} {:>8}\n", i + 1, e.poly.to_hex(), e.order, e.score));
                }
            }
            if !outcome.is_complete() {
                text.push_str(&format!(
                    "partial: {}/{} blocks done; rerun with the same checkpoint to resume\n",
                    outcome.completed_blocks, outcome.total_blocks
                ));
            }
            out.write_all(text.as_bytes())
        }
    }
    .map_err(io)?;
    let s = outcome.stats;
    let _ = writeln!(
        err,
        "candidates {} order-skipped {} pruned {} scored {} evaluations {}",
        s.candidates, s.skipped_by_order, s.pruned_by_bound, s.scored, s.evaluations
    );
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, format: Format, out: &mut dyn Write) -> Result<i32> {
    let config = VerifyConfig {
        min_degree: args.min_degree,
        max_degree: args.max_degree,
        max_extra: args.max_extra,
        samples: args.samples,
        seed: args.seed,
    };
    let report = if args.inject_fault {
        verify::verify_with(&config, |g, n| Ok(min_distance(g, n)? + u32::from(n % 7 == 0)))?
    } else {
        verify::verify(&config)?
    };
    let mismatches: Vec<_> = report.mismatches().collect();
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            json!({"seed": config.seed, "samples": report.samples.len(), "mismatches": mismatches, "passed": report.passed()})
        ),
        Format::Csv => {
            let mut text = String::from("poly_hex,n,transform,brute_force,status\n");
            for s in &report.samples {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.poly,
                    s.n,
                    s.fast,
                    s.oracle,
                    if s.fast == s.oracle { "ok" } else { "MISMATCH" }
                ));
            }
            out.write_all(text.as_bytes())
        }
        Format::Human => {
            let mut text = String::new();
            for s in &mismatches {
                text.push_str(&format!(
                    "MISMATCH {} n={} transform={} brute_force={}\n",
                    s.poly, s.n, s.fast, s.oracle
                ));
            }
            text.push_str(&format!(
                "verify seed={} degrees {}..={} lengths p+1..=p+{}: {} samples, {} mismatches: {}\n",
                config.seed,
                config.min_degree,
                config.max_degree,
                config.max_extra,
                report.samples.len(),
                mismatches.len(),
                if report.passed() { "PASS" } else { "FAIL" }
            ));
            out.write_all(text.as_bytes())
        }
    }
    .map_err(io)?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILURE })
}

fn cell(c: Option<u64>) -> String {
    c.map(|v| v.to_string()).unwrap_or_else(|| "-".into())
}

fn cmd_tables(only: &[u8], skip_slow: bool, format: Format, out: &mut dyn Write) -> Result<i32> {
    let cache = ProfileCache::new();
    let mut all_ok = true;
    let mut rows = Vec::new();
    for table in TABLES {
        if (!only.is_empty() && !only.contains(&table.id)) || (skip_slow && table.slow) {
            continue;
        }
        rows.push((table, tables::check_table(table, &cache)?));
    }
    let figure = if only.is_empty() || only.contains(&2) {
        tables::check_figure(&cache)?
    } else {
        Vec::new()
    };
    all_ok &= rows.iter().all(|(_, checks)| checks.iter().all(|c| c.ok()));
    all_ok &= figure.iter().all(|f| f.ok());

    match format {
        Format::Json => {
            let checks: Vec<_> = rows.iter().flat_map(|(_, c)| c.iter()).collect();
            writeln!(out, "{}", json!({"rows": checks, "figure": figure, "passed": all_ok}))
        }
        Format::Csv => {
            let mut text = String::from("table,poly_hex,degree,order,expected_order,M,score,expected_score,status\n");
            for (_, checks) in &rows {
                for c in checks {
                    for (m, got, want) in &c.scores {
                        let status = if c.order == c.expected_order && got == want { "ok" } else { "MISMATCH" };
                        text.push_str(&format!(
                            "{},{},{},{},{},{m},{},{},{status}\n",
                            c.table,
                            c.poly,
                            c.degree,
                            c.order,
                            c.expected_order,
                            got.map(|v| v.to_string()).unwrap_or_default(),
                            want.map(|v| v.to_string()).unwrap_or_default(),
                        ));
                    }
                }
            }
            out.write_all(text.as_bytes())
        }
        Format::Human => {
            let mut text = String::new();
            for (table, checks) in &rows {
                text.push_str(&format!("Table {}: {}\n", table.id, table.title));
                text.push_str(&format!("  {:<16} {:>6} {:>9}", "poly", "degree", "order"));
                for m in table.targets {
                    text.push_str(&format!(" {:>7}", m));
                }
                text.push('\n');
                for c in checks {
                    let name = if c.label.is_empty() { c.poly.to_hex() } else { format!("{} ({})", c.poly, c.label) };
                    text.push_str(&format!("  {:<16} {:>6} {:>9}", name, c.degree, c.order));
                    for (_, got, _) in &c.scores {
                        text.push_str(&format!(" {:>7}", cell(*got)));
                    }
                    if c.ok() {
                        text.push_str("  ok\n");
                    } else {
                        text.push_str("  MISMATCH");
                        if c.order != c.expected_order {
                            text.push_str(&format!(" order expected {}", c.expected_order));
                        }
                        for (m, got, want) in &c.scores {
                            if got != want {
                                text.push_str(&format!(" S({m}) expected {}", cell(*want)));
                            }
                        }
                        text.push('\n');
                    }
                }
            }
            if !figure.is_empty() {
                text.push_str("Figure: minimum distance at n =");
                for n in tables::FIGURE_LENGTHS {
                    text.push_str(&format!(" {n}"));
                }
                text.push('\n');
                for f in &figure {
                    text.push_str(&format!("  {:<16}", f.poly.to_hex()));
                    for (_, d) in &f.distances {
                        text.push_str(&format!(" {d:>3}"));
                    }
                    text.push_str(match (f.expected, f.ok()) {
                        (None, _) => "  (computed)\n",
                        (Some(_), true) => "  ok\n",
                        (Some(_), false) => "  MISMATCH\n",
                    });
                }
            }
            text.push_str(if all_ok { "all rows match\n" } else { "MISMATCHES FOUND\n" });
            out.write_all(text.as_bytes())
        }
    }
    .map_err(io)?;
    Ok(if all_ok { EXIT_OK } else { EXIT_FAILURE })
}
