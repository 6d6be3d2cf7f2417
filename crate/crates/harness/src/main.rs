use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mns_core::aog::{InterpretationKind, ProblemType};
use mns_core::layout::layout_table_json;
use mns_core::render::RenderSpec;
use mns_core::solver::Mode;
use mns_harness::bench::{cmd_solve, ResultRecord, RunConfig};
use mns_harness::dataset::{self, cmd_gen, GenConfig, GenFilters};
use mns_harness::server::{serve, AppState};
use mns_harness::stats::{cmd_stats, GroupBy};

#[derive(Parser)]
#[command(name = "mns", about = "Visual arithmetic problems: generate, solve, tabulate, serve")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a dataset directory.
    Gen {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "type", value_parser = parse_type)]
        problem_type: Option<ProblemType>,
        #[arg(long, value_parser = parse_interp)]
        interpretation: Option<InterpretationKind>,
        /// Integers per panel, center included.
        #[arg(long)]
        integers: Option<u8>,
        /// Also write PNG panels.
        #[arg(long)]
        png: bool,
        #[arg(long, default_value_t = 224)]
        px: u32,
    },
    /// Run the search solvers over a dataset.
    Solve {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "pure,context", value_parser = parse_mode)]
        modes: Vec<Mode>,
        #[arg(long, value_delimiter = ',', default_value = "100")]
        budgets: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy tables from a results file.
    Stats {
        #[arg(long)]
        results: PathBuf,
        /// cell, integers or steps
        #[arg(long, default_value = "cell", value_parser = parse_group)]
        by: GroupBy,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Serve the quiz API.
    Serve {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "session-logs")]
        logs: PathBuf,
    },
    /// Print every layout's slots, groupings and reading order as JSON.
    Layouts,
}

fn parse_type(s: &str) -> Result<ProblemType, String> {
    ProblemType::parse(s).ok_or_else(|| format!("unknown problem type `{s}`"))
}

fn parse_interp(s: &str) -> Result<InterpretationKind, String> {
    InterpretationKind::parse(s).ok_or_else(|| format!("unknown interpretation `{s}`"))
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    Mode::parse(s).ok_or_else(|| format!("unknown mode `{s}`"))
}

fn parse_group(s: &str) -> Result<GroupBy, String> {
    GroupBy::parse(s).ok_or_else(|| format!("unknown grouping `{s}`"))
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.cmd {
        Cmd::Gen { count, seed, out, problem_type, interpretation, integers, png, px } => {
            let cfg = GenConfig {
                count,
                seed,
                filters: GenFilters { problem_type, interpretation, integer_count: integers },
                render: RenderSpec::with_px(px),
                png,
            };
            let manifest = cmd_gen(&cfg, &out)?;
            println!("{} problems written to {}", manifest.len(), out.display());
        }
        Cmd::Solve { dataset, modes, budgets, out } => {
            let cfg = RunConfig::new(modes, budgets)?;
            let data = dataset::load(&dataset)?;
            let records = cmd_solve(&data.problems, &cfg);
            dataset::write_jsonl(&out, &records)?;
            let correct = records.iter().filter(|r| r.correct).count();
            println!("{} records ({correct} correct) written to {}", records.len(), out.display());
            if !data.corrupt.is_empty() {
                for (id, why) in &data.corrupt {
                    eprintln!("corrupt: {id}: {why}");
                }
                return Ok(ExitCode::from(2));
            }
        }
        Cmd::Stats { results, by, csv } => {
            let text = fs::read_to_string(&results)?;
            let records: Vec<ResultRecord> =
                text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect::<Result<_, _>>()?;
            let table = cmd_stats(&records, by)?;
            print!("{}", table.to_text());
            if let Some(path) = csv {
                fs::write(path, table.to_csv())?;
            }
        }
        Cmd::Serve { dataset, port, logs } => {
            let data = dataset::load(&dataset)?;
            let state = AppState::new(data.problems, logs, RenderSpec::default())?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(state, ([127, 0, 0, 1], port).into()))?;
        }
        Cmd::Layouts => println!("{}", serde_json::to_string_pretty(&layout_table_json())?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
