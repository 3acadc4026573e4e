#![allow(dead_code)]

use rand::Rng;
use twsched::task_graph::{Task, TaskId, TaskSet};
use twsched::time::Time;
use twsched::time_windows::{classify, TimeWindow};

pub const MAX_CLASS: usize = 3;

/// A random task set whose declared relations all match the geometry of the
/// windows, so it always passes validation. Identical windows are reused
/// to form equal classes of at most `MAX_CLASS` members.
pub fn random_task_set<R: Rng>(rng: &mut R, max_tasks: usize) -> TaskSet {
    let n = rng.gen_range(2..=max_tasks);
    let mut windows: Vec<TimeWindow> = Vec::with_capacity(n);
    for _ in 0..n {
        let reuse = !windows.is_empty() && rng.gen_bool(0.25);
        let w = if reuse {
            let w = windows[rng.gen_range(0..windows.len())];
            if windows.iter().filter(|x| **x == w).count() < MAX_CLASS {
                w
            } else {
                fresh(rng)
            }
        } else {
            fresh(rng)
        };
        windows.push(w);
    }
    let ids: Vec<TaskId> = (0..n)
        .map(|i| TaskId::new(format!("t{i}")).unwrap())
        .collect();
    let mut b = TaskSet::builder();
    for (id, w) in ids.iter().zip(&windows) {
        let len = w.length().unwrap().millis() / 1000;
        let exec = Time::from_secs(rng.gen_range(1..=len));
        b.add(Task::new(id.clone(), *w, exec).unwrap());
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.4) {
                b.relate(&ids[i], classify(&windows[i], &windows[j]), &ids[j]);
            }
        }
    }
    b.build()
        .expect("geometry-consistent relations always validate")
}

fn fresh<R: Rng>(rng: &mut R) -> TimeWindow {
    let start = rng.gen_range(0..15);
    let len = rng.gen_range(1..8);
    TimeWindow::secs(start, start + len)
}

pub fn secs(v: &[i64]) -> Vec<Time> {
    v.iter().map(|s| Time::from_secs(*s)).collect()
}
