//! Scheduling of tasks with time windows and pairwise time relations on
//! multi-stream robots, with load balancing and a simulation harness.

pub mod balancing;
pub mod baselines;
pub mod cli;
pub mod grid;
pub mod scheduler;
pub mod simulator;
pub mod task_graph;
pub mod time;
pub mod time_windows;
