//! Command-line front end for the experiments.
//!
//! ```text
//! twsched --preset fig1-2-3 --seed 42 --out-dir out
//! ```
//!
//! Exit codes: 0 when every output was written, 1 on runtime errors, 2 on
//! usage or configuration errors.

mod plot;

use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use thiserror::Error;

pub use plot::{line_chart, Series};

use crate::baselines::Policy;
use crate::simulator::{
    run_experiment, Arrival, ConfigError, ExperimentConfig, ExperimentResults, DEFAULT_EXEC_TIMES,
};
use crate::time::Time;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Fixed arrivals of 1 to 20 tasks on 4 machines, 1000 replications.
    #[value(name = "fig1-2-3")]
    Fig123,
    /// Poisson(7) arrivals over 101 steps, 50 replications, 20 runs.
    #[value(name = "fig4-5-6-7")]
    Fig4567,
    /// Fixed arrivals of 1 to 101 tasks, 200 replications.
    #[value(name = "fig8")]
    Fig8,
    /// Fixed arrivals unless `--lambda` is given.
    #[value(name = "custom")]
    Custom,
}

#[derive(Clone, Debug, Parser)]
#[command(
    name = "twsched",
    version,
    about = "Runs task allocation experiments and writes CSV tables and SVG plots"
)]
pub struct Args {
    #[arg(long, value_enum)]
    pub preset: Preset,
    /// Number of identical machines.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub machines: Option<u64>,
    #[arg(long, env = "TWSCHED_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Replications per arrival count or run.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: Option<u64>,
    /// Independent Poisson runs.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: Option<u64>,
    /// Poisson arrival rate per step; switches `custom` to Poisson arrivals.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Time steps per Poisson run.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: Option<u64>,
    /// Inclusive range of arrival counts, `MIN..MAX`.
    #[arg(long, value_parser = parse_range)]
    pub n_range: Option<(usize, usize)>,
    /// Comma-separated execution times in seconds.
    #[arg(long, value_parser = parse_times)]
    pub exec_times: Option<ExecTimes>,
    /// Comma-separated subset of ours, random, fifo, greedy.
    #[arg(long)]
    pub policies: Option<String>,
    /// Directory for CSV and SVG output.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("`{s}` is not of the form MIN..MAX"))?;
    let a = a.parse::<usize>().map_err(|e| format!("`{a}`: {e}"))?;
    let b = b.parse::<usize>().map_err(|e| format!("`{b}`: {e}"))?;
    Ok((a, b))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecTimes(pub Vec<Time>);

fn parse_times(s: &str) -> Result<ExecTimes, String> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Time>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()
        .map(ExecTimes)
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("--{flag}: {source}")]
    Config {
        flag: &'static str,
        source: ConfigError,
    },
    #[error("--policies: {0}")]
    Policy(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Policy(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<Args, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Args::try_parse_from(argv)
}

fn default_exec_times() -> Vec<Time> {
    DEFAULT_EXEC_TIMES
        .iter()
        .map(|s| Time::from_secs(*s))
        .collect()
}

fn flag_of(e: &ConfigError) -> &'static str {
    match e {
        ConfigError::NoMachines => "machines",
        ConfigError::NoExecTimes | ConfigError::NonPositiveExec(_) => "exec-times",
        ConfigError::Lambda(_) => "lambda",
        ConfigError::NoSteps => "steps",
        ConfigError::NoReplications => "reps",
        ConfigError::NoRuns => "runs",
        ConfigError::NoPolicies => "policies",
        ConfigError::EmptyRange { .. } => "n-range",
    }
}

impl Args {
    /// The preset with every given flag applied on top.
    pub fn config(&self) -> Result<ExperimentConfig, CliError> {
        let (n_max, reps, poisson) = match self.preset {
            Preset::Fig123 => (20, 1000, false),
            Preset::Fig4567 => (20, 50, true),
            Preset::Fig8 => (101, 200, false),
            Preset::Custom => (20, 100, self.lambda.is_some()),
        };
        let arrival = if poisson {
            Arrival::Poisson {
                lambda: self.lambda.unwrap_or(7.0),
                steps: self.steps.map_or(101, |s| s as usize),
            }
        } else {
            let (min, max) = self.n_range.unwrap_or((1, n_max));
            Arrival::Fixed { min, max }
        };
        let policies = match &self.policies {
            None => Policy::ALL.to_vec(),
            Some(list) => {
                let mut out = Vec::new();
                for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let p = name
                        .parse::<Policy>()
                        .map_err(|e| CliError::Policy(e.to_string()))?;
                    if !out.contains(&p) {
                        out.push(p);
                    }
                }
                out
            }
        };
        let config = ExperimentConfig {
            machines: self.machines.map_or(4, |m| m as usize),
            exec_time_values: self
                .exec_times
                .as_ref()
                .map_or_else(default_exec_times, |e| e.0.clone()),
            arrival,
            replications: self.reps.map_or(reps, |r| r as usize),
            runs: self
                .runs
                .map_or(if poisson { 20 } else { 1 }, |r| r as usize),
            seed: self.seed,
            policies,
        };
        config.validate().map_err(|source| CliError::Config {
            flag: flag_of(&source),
            source,
        })?;
        Ok(config)
    }
}

fn series(
    results: &ExperimentResults,
    value: impl Fn(&crate::simulator::AggregateRow) -> Option<f64>,
) -> Vec<Series> {
    let mut policies: Vec<Policy> = Vec::new();
    for a in &results.aggregate {
        if !policies.contains(&a.policy) {
            policies.push(a.policy);
        }
    }
    policies
        .into_iter()
        .map(|p| Series {
            label: p.to_string(),
            points: results
                .aggregate_for(p)
                .filter_map(|a| value(a).map(|v| (a.n as f64, v)))
                .collect(),
        })
        .collect()
}

fn only(series: Vec<Series>, keep: &[Policy]) -> Vec<Series> {
    series
        .into_iter()
        .filter(|s| keep.iter().any(|p| p.name() == s.label))
        .collect()
}

/// Plot files for a preset, as `(file name, svg)`.
pub fn plots(preset: Preset, results: &ExperimentResults) -> Vec<(String, String)> {
    let makespan = || series(results, |a| Some(a.mean_makespan));
    let tcd = || series(results, |a| Some(a.mean_tcd));
    let minus = || series(results, |a| a.makespan_minus_ours);
    let baselines = [Policy::Random, Policy::Fifo, Policy::Greedy];
    let n = "arrived tasks";
    let chart = |file: &str, title: &str, x: &str, y: &str, s: Vec<Series>| {
        (file.to_owned(), line_chart(title, x, y, &s))
    };
    match preset {
        Preset::Fig123 => vec![
            chart(
                "fig1_makespan.svg",
                "Average makespan",
                n,
                "seconds",
                makespan(),
            ),
            chart(
                "fig2_greedy_minus_ours.svg",
                "Greedy minus ours, average makespan",
                n,
                "seconds",
                only(minus(), &[Policy::Greedy]),
            ),
            chart(
                "fig3_tcd.svg",
                "Average task completion difference",
                n,
                "seconds",
                tcd(),
            ),
        ],
        Preset::Fig4567 => {
            let first_run: Vec<Series> = {
                let mut out: Vec<Series> = Vec::new();
                for r in results.records.iter().filter(|r| r.n == 1) {
                    let point = (r.rep as f64 + 1.0, r.makespan.as_secs_f64());
                    match out.iter_mut().find(|s| s.label == r.policy.name()) {
                        Some(s) => s.points.push(point),
                        None => out.push(Series {
                            label: r.policy.to_string(),
                            points: vec![point],
                        }),
                    }
                }
                out
            };
            let run = "run";
            vec![
                chart(
                    "fig4_makespan_by_replication.svg",
                    "Makespan per replication, run 1",
                    "replication",
                    "seconds",
                    first_run,
                ),
                chart(
                    "fig5_run_mean_makespan.svg",
                    "Run average makespan",
                    run,
                    "seconds",
                    makespan(),
                ),
                chart(
                    "fig6_greedy_minus_ours.svg",
                    "Greedy minus ours, run average makespan",
                    run,
                    "seconds",
                    only(minus(), &[Policy::Greedy]),
                ),
                chart(
                    "fig7_run_mean_tcd.svg",
                    "Run average task completion difference",
                    run,
                    "seconds",
                    tcd(),
                ),
            ]
        }
        Preset::Fig8 => vec![
            chart(
                "fig8_tcd.svg",
                "Average task completion difference",
                n,
                "seconds",
                tcd(),
            ),
            chart(
                "fig8_minus_ours.svg",
                "Baseline minus ours, average makespan",
                n,
                "seconds",
                only(minus(), &baselines),
            ),
        ],
        Preset::Custom => {
            let x = if results.records.iter().any(|r| r.n == 0) {
                n
            } else {
                "n"
            };
            vec![
                chart("makespan.svg", "Average makespan", x, "seconds", makespan()),
                chart(
                    "minus_ours.svg",
                    "Minus ours, average makespan",
                    x,
                    "seconds",
                    only(minus(), &baselines),
                ),
                chart(
                    "tcd.svg",
                    "Average task completion difference",
                    x,
                    "seconds",
                    tcd(),
                ),
            ]
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes `results.csv`, `aggregate.csv` and the preset's plots.
pub fn emit_outputs(
    preset: Preset,
    results: &ExperimentResults,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_owned(),
        source,
    })?;
    let mut files = vec![
        ("results.csv".to_owned(), results.results_csv()),
        ("aggregate.csv".to_owned(), results.aggregate_csv()),
    ];
    files.extend(plots(preset, results));
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = out_dir.join(name);
        write(&path, &contents)?;
        written.push(path);
    }
    Ok(written)
}

pub fn run(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    let config = args.config()?;
    let results = run_experiment(&config).map_err(|source| CliError::Config {
        flag: flag_of(&source),
        source,
    })?;
    emit_outputs(args.preset, &results, &args.out_dir)
}

/// Parses `argv`, runs, reports and returns the exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match parse_args(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
