//! Arrival experiments on identical machines.
//!
//! A replication draws an arrival stream and replays it under every policy,
//! so all policies see exactly the same tasks. Fixed arrivals are one batch
//! of `n` tasks on empty machines; Poisson arrivals append one batch per
//! time step to queues that persist across steps.
//!
//! Random numbers come from ChaCha8 (`rand_chacha`). Replication `i` of an
//! experiment seeded with `s` uses `s + i * 0x9E3779B97F4A7C15` (wrapping);
//! arrivals are drawn from stream 0 of that generator and the random
//! policy's choices from stream 1.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::baselines::{MachinePool, Policy};
use crate::time::Time;

pub const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
pub const MAX_LAMBDA: f64 = 30.0;

/// Execution times used in the published experiments, in seconds.
pub const DEFAULT_EXEC_TIMES: [i64; 7] = [10, 12, 13, 15, 20, 32, 40];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("at least one machine is required")]
    NoMachines,
    #[error("at least one execution time is required")]
    NoExecTimes,
    #[error("execution time {0} is not positive")]
    NonPositiveExec(Time),
    #[error("lambda {0} is outside (0, {MAX_LAMBDA}]")]
    Lambda(f64),
    #[error("at least one time step is required")]
    NoSteps,
    #[error("at least one replication is required")]
    NoReplications,
    #[error("at least one run is required")]
    NoRuns,
    #[error("at least one policy is required")]
    NoPolicies,
    #[error("arrival range {min}..{max} is empty")]
    EmptyRange { min: usize, max: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Arrival {
    /// One batch of `n` tasks for every `n` in `min..=max`.
    Fixed { min: usize, max: usize },
    /// `steps` batches with Poisson(`lambda`) sizes.
    Poisson { lambda: f64, steps: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub machines: usize,
    pub exec_time_values: Vec<Time>,
    pub arrival: Arrival,
    pub replications: usize,
    /// Independent repetitions of the whole Poisson experiment. Fixed
    /// arrivals use a single run.
    pub runs: usize,
    pub seed: u64,
    pub policies: Vec<Policy>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.machines == 0 {
            return Err(ConfigError::NoMachines);
        }
        if self.exec_time_values.is_empty() {
            return Err(ConfigError::NoExecTimes);
        }
        if let Some(t) = self.exec_time_values.iter().find(|t| !t.is_positive()) {
            return Err(ConfigError::NonPositiveExec(*t));
        }
        if self.replications == 0 {
            return Err(ConfigError::NoReplications);
        }
        if self.policies.is_empty() {
            return Err(ConfigError::NoPolicies);
        }
        match self.arrival {
            Arrival::Fixed { min, max } if min > max => Err(ConfigError::EmptyRange { min, max }),
            Arrival::Fixed { .. } => Ok(()),
            Arrival::Poisson { lambda, steps } => {
                check_lambda(lambda)?;
                if steps == 0 {
                    return Err(ConfigError::NoSteps);
                }
                if self.runs == 0 {
                    return Err(ConfigError::NoRuns);
                }
                Ok(())
            }
        }
    }

    /// Values of the `n` column: arrival counts, or run numbers from 1.
    pub fn keys(&self) -> std::ops::RangeInclusive<usize> {
        match self.arrival {
            Arrival::Fixed { min, max } => min..=max,
            Arrival::Poisson { .. } => 1..=self.runs,
        }
    }

    pub fn replication_seed(&self, key: usize, rep: usize) -> u64 {
        let index = (key as u64)
            .wrapping_mul(self.replications as u64)
            .wrapping_add(rep as u64);
        self.seed.wrapping_add(index.wrapping_mul(SEED_STRIDE))
    }
}

fn check_lambda(lambda: f64) -> Result<(), ConfigError> {
    if lambda > 0.0 && lambda <= MAX_LAMBDA {
        Ok(())
    } else {
        Err(ConfigError::Lambda(lambda))
    }
}

/// `count` uniform draws from `values`.
pub fn sample_task_batch<R: Rng + ?Sized>(count: usize, values: &[Time], rng: &mut R) -> Vec<Time> {
    (0..count)
        .map(|_| values[rng.gen_range(0..values.len())])
        .collect()
}

/// Poisson(`lambda`) by inversion of the cumulative distribution.
pub fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u64, ConfigError> {
    check_lambda(lambda)?;
    let u: f64 = rng.gen();
    let mut p = (-lambda).exp();
    let mut cdf = p;
    let mut k = 0u64;
    // Past this point the remaining mass is below f64 resolution.
    let cap = (10.0 * MAX_LAMBDA) as u64;
    while u > cdf && k < cap {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    Ok(k)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricsRecord {
    pub policy: Policy,
    /// Arrival count (fixed) or run number (Poisson).
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub loads: Vec<Time>,
    pub makespan: Time,
    pub t_min: Time,
    pub tcd: Time,
}

impl MetricsRecord {
    fn new(policy: Policy, n: usize, rep: usize, seed: u64, loads: Vec<Time>) -> Self {
        let makespan = loads.iter().copied().max().unwrap_or(Time::ZERO);
        let t_min = loads.iter().copied().min().unwrap_or(Time::ZERO);
        MetricsRecord {
            policy,
            n,
            rep,
            seed,
            loads,
            makespan,
            t_min,
            tcd: makespan - t_min,
        }
    }
}

/// The arrival batches of one replication.
pub fn arrivals(config: &ExperimentConfig, key: usize, seed: u64) -> Vec<Vec<Time>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = &config.exec_time_values;
    match config.arrival {
        Arrival::Fixed { .. } => vec![sample_task_batch(key, values, &mut rng)],
        Arrival::Poisson { lambda, steps } => (0..steps)
            .map(|_| {
                let k = sample_poisson(lambda, &mut rng).expect("validated lambda");
                sample_task_batch(k as usize, values, &mut rng)
            })
            .collect(),
    }
}

fn replay(machines: usize, batches: &[Vec<Time>], policy: Policy, seed: u64) -> Vec<Time> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut pool = MachinePool::new(machines);
    for batch in batches {
        pool.assign(policy, batch, &mut rng);
    }
    pool.loads().to_vec()
}

/// One replication under one policy; `key` is the arrival count or run.
pub fn run_replication(
    config: &ExperimentConfig,
    policy: Policy,
    key: usize,
    rep: usize,
) -> MetricsRecord {
    let seed = config.replication_seed(key, rep);
    let batches = arrivals(config, key, seed);
    let loads = replay(config.machines, &batches, policy, seed);
    MetricsRecord::new(policy, key, rep, seed, loads)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub policy: Policy,
    pub n: usize,
    pub reps: usize,
    /// Seconds.
    pub mean_makespan: f64,
    pub mean_tcd: f64,
    /// Present when `Ours` was run as well.
    pub makespan_minus_ours: Option<f64>,
    pub tcd_minus_ours: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResults {
    pub machines: usize,
    /// Ordered by key, replication, then policy as configured.
    pub records: Vec<MetricsRecord>,
    /// Ordered by policy as configured, then key.
    pub aggregate: Vec<AggregateRow>,
}

fn mean_secs(total_millis: i128, count: usize) -> f64 {
    total_millis as f64 / count as f64 / 1000.0
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults, ConfigError> {
    config.validate()?;
    let mut records = Vec::new();
    for key in config.keys() {
        for rep in 0..config.replications {
            let seed = config.replication_seed(key, rep);
            let batches = arrivals(config, key, seed);
            for &policy in &config.policies {
                let loads = replay(config.machines, &batches, policy, seed);
                records.push(MetricsRecord::new(policy, key, rep, seed, loads));
            }
        }
    }

    let keys: Vec<usize> = config.keys().collect();
    let np = config.policies.len();
    let mut sums = vec![(0i128, 0i128); np * keys.len()];
    for (i, r) in records.iter().enumerate() {
        let k = i / (np * config.replications);
        let s = &mut sums[(i % np) * keys.len() + k];
        s.0 += i128::from(r.makespan.millis());
        s.1 += i128::from(r.tcd.millis());
    }
    let ours = config.policies.iter().position(|p| *p == Policy::Ours);
    let means = |p: usize, k: usize| {
        let (m, t) = sums[p * keys.len() + k];
        (
            mean_secs(m, config.replications),
            mean_secs(t, config.replications),
        )
    };
    let mut aggregate = Vec::with_capacity(sums.len());
    for (p, policy) in config.policies.iter().enumerate() {
        for (k, key) in keys.iter().enumerate() {
            let (mean_makespan, mean_tcd) = means(p, k);
            let base = ours.map(|o| means(o, k));
            aggregate.push(AggregateRow {
                policy: *policy,
                n: *key,
                reps: config.replications,
                mean_makespan,
                mean_tcd,
                makespan_minus_ours: base.map(|b| mean_makespan - b.0),
                tcd_minus_ours: base.map(|b| mean_tcd - b.1),
            });
        }
    }
    Ok(ExperimentResults {
        machines: config.machines,
        records,
        aggregate,
    })
}

impl ExperimentResults {
    /// `policy,n,rep,seed,makespan,tcd,load1..loadM`; times in seconds.
    pub fn results_csv(&self) -> String {
        let mut out = String::from("policy,n,rep,seed,makespan,tcd");
        for i in 1..=self.machines {
            write!(out, ",load{i}").expect("write to string");
        }
        out.push('\n');
        for r in &self.records {
            write!(
                out,
                "{},{},{},{},{},{}",
                r.policy, r.n, r.rep, r.seed, r.makespan, r.tcd
            )
            .expect("write to string");
            for l in &r.loads {
                write!(out, ",{l}").expect("write to string");
            }
            out.push('\n');
        }
        out
    }

    /// `policy,n,reps,mean_makespan,mean_tcd,makespan_minus_ours,tcd_minus_ours`.
    pub fn aggregate_csv(&self) -> String {
        let mut out = String::from(
            "policy,n,reps,mean_makespan,mean_tcd,makespan_minus_ours,tcd_minus_ours\n",
        );
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        for a in &self.aggregate {
            writeln!(
                out,
                "{},{},{},{:.4},{:.4},{},{}",
                a.policy,
                a.n,
                a.reps,
                a.mean_makespan,
                a.mean_tcd,
                opt(a.makespan_minus_ours),
                opt(a.tcd_minus_ours)
            )
            .expect("write to string");
        }
        out
    }

    pub fn aggregate_for(&self, policy: Policy) -> impl Iterator<Item = &AggregateRow> {
        self.aggregate.iter().filter(move |a| a.policy == policy)
    }

    pub fn records_for(&self, policy: Policy) -> impl Iterator<Item = &MetricsRecord> {
        self.records.iter().filter(move |r| r.policy == policy)
    }
}
