//! Allocation policies compared in the experiments.
//!
//! All of them append arriving tasks to a pool of identical machines.
//! Machine indices are zero-based.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::balancing::{balance_allocate, LoadVector};
use crate::time::Time;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Policy {
    /// Variance balancing on current loads.
    Ours,
    Random,
    /// Round-robin in arrival order.
    Fifo,
    /// Shortest queue by task count.
    Greedy,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::Ours, Policy::Random, Policy::Fifo, Policy::Greedy];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Ours => "ours",
            Policy::Random => "random",
            Policy::Fifo => "fifo",
            Policy::Greedy => "greedy",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown policy `{0}` (expected ours, random, fifo or greedy)")]
pub struct UnknownPolicy(pub String);

impl FromStr for Policy {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownPolicy(s.to_owned()))
    }
}

/// Loads, queue lengths and the round-robin cursor of a set of machines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachinePool {
    loads: Vec<Time>,
    counts: Vec<usize>,
    cursor: usize,
}

impl MachinePool {
    /// # Panics
    /// If `machines` is zero.
    pub fn new(machines: usize) -> Self {
        assert!(machines >= 1, "a pool needs at least one machine");
        MachinePool {
            loads: vec![Time::ZERO; machines],
            counts: vec![0; machines],
            cursor: 0,
        }
    }

    pub fn machines(&self) -> usize {
        self.loads.len()
    }

    pub fn loads(&self) -> &[Time] {
        &self.loads
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn push(&mut self, machine: usize, exec: Time) {
        self.loads[machine] += exec;
        self.counts[machine] += 1;
    }

    /// Assigns a batch with `policy`; returns the machine of each task.
    pub fn assign<R: Rng + ?Sized>(
        &mut self,
        policy: Policy,
        tasks: &[Time],
        rng: &mut R,
    ) -> Vec<usize> {
        match policy {
            Policy::Ours => assign_ours(self, tasks),
            Policy::Random => assign_random(self, tasks, rng),
            Policy::Fifo => assign_fifo(self, tasks),
            Policy::Greedy => assign_greedy(self, tasks),
        }
    }
}

/// Uniform, independent machine per task.
pub fn assign_random<R: Rng + ?Sized>(
    pool: &mut MachinePool,
    tasks: &[Time],
    rng: &mut R,
) -> Vec<usize> {
    tasks
        .iter()
        .map(|t| {
            let m = rng.gen_range(0..pool.machines());
            pool.push(m, *t);
            m
        })
        .collect()
}

/// Cyclic assignment continuing from the pool's cursor.
pub fn assign_fifo(pool: &mut MachinePool, tasks: &[Time]) -> Vec<usize> {
    tasks
        .iter()
        .map(|t| {
            let m = pool.cursor;
            pool.push(m, *t);
            pool.cursor = (m + 1) % pool.machines();
            m
        })
        .collect()
}

/// Each task goes to the machine with the fewest queued tasks, lowest index
/// on ties.
pub fn assign_greedy(pool: &mut MachinePool, tasks: &[Time]) -> Vec<usize> {
    tasks
        .iter()
        .map(|t| {
            let m = (0..pool.machines())
                .min_by_key(|i| (pool.counts[*i], *i))
                .expect("non-empty pool");
            pool.push(m, *t);
            m
        })
        .collect()
}

/// Variance balancing of the batch on top of the current loads.
///
/// # Panics
/// If a task has a non-positive duration.
pub fn assign_ours(pool: &mut MachinePool, tasks: &[Time]) -> Vec<usize> {
    let initial = LoadVector::new(pool.loads.clone()).expect("pool loads are valid");
    let a = balance_allocate(tasks, pool.machines(), &initial).expect("positive task durations");
    for &i in &a.order {
        pool.push(a.place_of[i], tasks[i]);
    }
    a.place_of
}
