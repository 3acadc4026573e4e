//! Acceptance criteria, one line of output per criterion.
//!
//! Run with `cargo test --test acceptance`. The process exits non-zero if
//! any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twsched::balancing::{balance_allocate, brute_force_oracle, scaled_variance, LoadVector};
use twsched::baselines::Policy;
use twsched::cli::{self, parse_args};
use twsched::scheduler::{time_frame, Branch, RobotId, ScheduleState};
use twsched::simulator::{run_experiment, sample_poisson, ExperimentResults, DEFAULT_EXEC_TIMES};
use twsched::task_graph::{ExecutionProfile, TaskId};
use twsched::time::Time;
use twsched::time_windows::{
    classify, relation_partition, OrientedRelation, RelationKind, TimeWindow,
};

const SEED: &str = "20240601";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn preset(name: &str, extra: &[&str]) -> ExperimentResults {
    let mut argv = vec!["twsched", "--preset", name, "--seed", SEED];
    argv.extend_from_slice(extra);
    let config = parse_args(argv).unwrap().config().unwrap();
    run_experiment(&config).unwrap()
}

/// `(key, policy) -> (Σ makespan, Σ tcd)` in milliseconds.
fn sums(res: &ExperimentResults) -> BTreeMap<(usize, Policy), (i64, i64)> {
    let mut out: BTreeMap<(usize, Policy), (i64, i64)> = BTreeMap::new();
    for r in &res.records {
        let e = out.entry((r.n, r.policy)).or_default();
        e.0 += r.makespan.millis();
        e.1 += r.tcd.millis();
    }
    out
}

fn keys(res: &ExperimentResults) -> BTreeSet<usize> {
    res.records.iter().map(|r| r.n).collect()
}

fn multisets(values: &[i64], max_len: usize) -> Vec<Vec<i64>> {
    fn go(
        values: &[i64],
        from: usize,
        cur: &mut Vec<i64>,
        max_len: usize,
        out: &mut Vec<Vec<i64>>,
    ) {
        out.push(cur.clone());
        if cur.len() == max_len {
            return;
        }
        for i in from..values.len() {
            cur.push(values[i]);
            go(values, i, cur, max_len, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(values, 0, &mut Vec::new(), max_len, &mut out);
    out
}

fn show(loads: &[Time]) -> String {
    let parts: Vec<String> = loads.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

fn balancing_oracle_suite() -> Outcome {
    let sets = multisets(&DEFAULT_EXEC_TIMES, 6);
    let (mut checked, mut local, mut bound, mut small) = (0, 0, 0, 0);
    for m in 2..=4usize {
        let zeros = LoadVector::zeros(m).unwrap();
        for set in &sets {
            let items = common::secs(set);
            let a = balance_allocate(&items, m, &zeros).unwrap();
            let o = brute_force_oracle(&items, m, &zeros).unwrap();
            let loads = a.loads.as_slice();
            let sv = scaled_variance(loads);
            checked += 1;
            for (i, &p) in a.place_of.iter().enumerate() {
                for q in (0..m).filter(|q| *q != p) {
                    let mut moved = loads.to_vec();
                    moved[p] -= items[i];
                    moved[q] += items[i];
                    if scaled_variance(&moved) < sv {
                        local += 1;
                    }
                }
            }
            let m3 = 3 * m as i64;
            if a.makespan().millis() * m3 > (4 * m as i64 - 1) * o.min_makespan.millis() {
                bound += 1;
            }
            if items.len() <= m && sv != o.min_scaled_variance {
                small += 1;
            }
        }
    }
    outcome(
        local + bound + small == 0,
        format!(
            "{checked} instances; local-move improvements {local}, makespan bound violations {bound}, small-instance variance gaps {small}"
        ),
    )
}

fn documented_gap() -> Outcome {
    let items = common::secs(&[3, 3, 2, 2, 2]);
    let zeros = LoadVector::zeros(2).unwrap();
    let a = balance_allocate(&items, 2, &zeros).unwrap();
    let o = brute_force_oracle(&items, 2, &zeros).unwrap();
    let got = a.loads.as_slice().to_vec();
    let mut witness = o.variance_witness.loads.as_slice().to_vec();
    witness.sort();
    let pass = got == common::secs(&[7, 5])
        && o.min_scaled_variance == 0
        && witness == common::secs(&[6, 6])
        && a.loads.variance() == 1.0;
    outcome(
        pass,
        format!(
            "procedure loads {} (variance {}), oracle loads {} (variance {})",
            show(&got),
            a.loads.variance(),
            show(&witness),
            o.min_variance
        ),
    )
}

fn fig2_makespan() -> Outcome {
    let res = preset("fig1-2-3", &[]);
    let s = sums(&res);
    let reps = res
        .records
        .iter()
        .filter(|r| r.n == 1 && r.policy == Policy::Ours)
        .count();
    let mut per_instance: BTreeMap<usize, usize> = BTreeMap::new();
    let mut ours = BTreeMap::new();
    for r in res.records_for(Policy::Ours) {
        ours.insert((r.n, r.rep), r.makespan);
    }
    for r in res.records_for(Policy::Greedy) {
        if r.makespan < ours[&(r.n, r.rep)] {
            *per_instance.entry(r.n).or_default() += 1;
        }
    }
    let mut failures = Vec::new();
    for n in keys(&res) {
        let gap = s[&(n, Policy::Greedy)].0 - s[&(n, Policy::Ours)].0;
        if gap < 0 {
            failures.push(format!(
                "n={n} mean gap {}",
                gap as f64 / reps as f64 / 1000.0
            ));
        }
    }
    let mut flagged = Vec::new();
    for (n, count) in &per_instance {
        if *count * 100 > reps {
            failures.push(format!("n={n} {count} instance violations"));
        } else {
            flagged.push(format!("n={n}:{count}"));
        }
    }
    let detail = if failures.is_empty() {
        format!(
            "greedy mean makespan >= ours for n=1..20 over {reps} replications; instance violations flagged [{}]",
            flagged.join(" ")
        )
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn fig3_tcd() -> Outcome {
    let res = preset("fig1-2-3", &[]);
    let s = sums(&res);
    let mut failures = Vec::new();
    for n in keys(&res) {
        let (o, g) = (s[&(n, Policy::Ours)].1, s[&(n, Policy::Greedy)].1);
        let ok = if n < 4 { o == g } else { o <= g };
        if !ok {
            failures.push(format!("n={n} ours {o} greedy {g}"));
        }
    }
    let detail = if failures.is_empty() {
        "mean TCD(ours) <= TCD(greedy) for n >= 4, equal for n < 4".to_owned()
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn figs4_to_7() -> Outcome {
    let res = preset("fig4-5-6-7", &[]);
    let s = sums(&res);
    let mut failures = Vec::new();
    let mut worst = (i64::MAX, i64::MAX);
    for run in keys(&res) {
        let (om, ot) = s[&(run, Policy::Ours)];
        let (gm, gt) = s[&(run, Policy::Greedy)];
        worst = (worst.0.min(gm - om), worst.1.min(gt - ot));
        if om > gm || ot > gt {
            failures.push(format!(
                "run {run}: makespan {om} vs {gm}, tcd {ot} vs {gt}"
            ));
        }
    }
    let runs = keys(&res).len();
    let detail = if failures.is_empty() {
        format!(
            "{runs} runs; smallest run-mean greedy-ours gap: makespan {:.3}s, TCD {:.3}s",
            worst.0 as f64 / 50_000.0,
            worst.1 as f64 / 50_000.0
        )
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty() && runs == 20, detail)
}

fn fig8_all_baselines() -> Outcome {
    let res = preset("fig8", &[]);
    let s = sums(&res);
    let ns: Vec<usize> = keys(&res).into_iter().collect();
    let mut failures = Vec::new();
    for &n in &ns {
        let ours = s[&(n, Policy::Ours)].0;
        for p in [Policy::Random, Policy::Fifo, Policy::Greedy] {
            if s[&(n, p)].0 < ours {
                failures.push(format!("n={n} {p} below ours"));
            }
        }
    }
    let q = ns.len() / 4;
    let gap = |p: Policy, range: &[usize]| {
        range
            .iter()
            .map(|n| (s[&(*n, p)].0 - s[&(*n, Policy::Ours)].0) as f64)
            .sum::<f64>()
            / range.len() as f64
            / 200_000.0
    };
    let mut notes = Vec::new();
    for p in [Policy::Fifo, Policy::Random] {
        let (first, last) = (gap(p, &ns[..q]), gap(p, &ns[ns.len() - q..]));
        notes.push(format!("{p} gap {first:.2}s -> {last:.2}s"));
        if last <= first {
            failures.push(format!("{p} gap does not grow ({first:.3} -> {last:.3})"));
        }
    }
    let detail = if failures.is_empty() {
        format!(
            "ours lowest at all {} arrival counts; {}",
            ns.len(),
            notes.join(", ")
        )
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn relation_algebra() -> Outcome {
    let mut windows = Vec::new();
    for a in 0..=6 {
        for b in a..=6 {
            windows.push(TimeWindow::secs(a, b));
        }
    }
    let oriented: Vec<OrientedRelation> = RelationKind::GEOMETRIC
        .iter()
        .flat_map(|k| {
            let fwd = OrientedRelation::forward(*k);
            if k.is_symmetric() {
                vec![fwd]
            } else {
                vec![fwd, fwd.reversed()]
            }
        })
        .collect();
    let mut bad = 0;
    let mut pairs = 0;
    for w1 in &windows {
        for w2 in &windows {
            pairs += 1;
            let r = classify(w1, w2);
            let degenerate = w1.length() == Some(Time::ZERO) || w2.length() == Some(Time::ZERO);
            let holding = oriented.iter().filter(|o| o.holds(w1, w2)).count();
            if !r.holds(w1, w2)
                || r.kind == RelationKind::Unconstrained
                || classify(w2, w1) != r.reversed()
                || (!degenerate && holding != 1)
            {
                bad += 1;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut partition_bad = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=12);
        let window = |rng: &mut ChaCha8Rng| {
            let a = rng.gen_range(0..20);
            TimeWindow::secs(a, a + rng.gen_range(0..8))
        };
        let reference = window(&mut rng);
        let items: Vec<(u32, TimeWindow, bool)> = (1..=n)
            .map(|k| (k, window(&mut rng), rng.gen_bool(0.7)))
            .collect();
        let part = relation_partition((&0, &reference), items.clone());
        let mut seen = BTreeSet::new();
        let mut ok = part.len() == items.len();
        for (kind, members) in part.iter() {
            for m in members {
                ok &= seen.insert(m.key);
                let (_, w, constrained) = items[m.key as usize - 1];
                let expected = if constrained {
                    classify(&reference, &w)
                } else {
                    OrientedRelation::UNCONSTRAINED
                };
                ok &= expected == OrientedRelation::new(kind, m.swapped);
            }
        }
        ok &= seen.len() == items.len();
        if !ok {
            partition_bad += 1;
        }
    }
    outcome(
        bad == 0 && partition_bad == 0,
        format!("{pairs} window pairs, {bad} misclassified; 1000 partitions, {partition_bad} not a disjoint cover"),
    )
}

fn scheduler_invariants() -> Outcome {
    let robots = [(RobotId(1), 4), (RobotId(2), 6), (RobotId(3), 9)];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures: Vec<String> = Vec::new();
    let (mut branch1, mut branch2) = (0, 0);
    for case in 0..500 {
        let tasks = common::random_task_set(&mut rng, 8);
        let mut ids: Vec<TaskId> = tasks.ids().cloned().collect();
        let mut state =
            ScheduleState::new(tasks.clone(), &robots, ExecutionProfile::default()).unwrap();
        if case % 2 == 0 {
            state.register_batch(&ids, &[]).unwrap();
        }
        for i in (1..ids.len()).rev() {
            ids.swap(i, rng.gen_range(0..=i));
        }
        for id in &ids {
            let before: BTreeMap<(RobotId, usize), Time> = state
                .robots()
                .iter()
                .flat_map(|r| {
                    r.streams
                        .iter()
                        .enumerate()
                        .map(move |(j, s)| ((r.id, j), s.finishing_time()))
                })
                .collect();
            let report = match state.allocate(id) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("case {case}: {id}: {e}"));
                    break;
                }
            };
            match &report.branch {
                Branch::Filled { .. } => branch1 += 1,
                Branch::Placed { rows, .. } => {
                    branch2 += 1;
                    for row in rows {
                        let chosen = before[&(row.robot, row.stream)];
                        let min = row.candidates.iter().map(|c| c.2).min();
                        let snapshot_ok = row.candidates.iter().all(|c| before[&(c.0, c.1)] == c.2);
                        if min != Some(chosen) || !snapshot_ok {
                            failures.push(format!(
                                "case {case}: row {} not on a minimal stream",
                                row.row
                            ));
                        }
                    }
                }
            }
        }

        let placed = state.placements();
        for a in placed.keys() {
            for b in placed.keys().filter(|b| a < *b) {
                let declared = tasks.relation(a, b);
                if declared.kind == RelationKind::Unconstrained {
                    continue;
                }
                let actual = classify(&placed[a].window, &placed[b].window);
                if actual != declared {
                    failures.push(format!(
                        "case {case}: {a} {declared} {b} realized as {actual}"
                    ));
                }
            }
        }
        for members in tasks.classes().classes() {
            let robots: BTreeSet<RobotId> = members
                .iter()
                .filter_map(|m| placed.get(m))
                .map(|p| p.robot)
                .collect();
            if robots.len() > 1 {
                failures.push(format!("case {case}: equal class split over {robots:?}"));
            }
        }
        for r in state.robots() {
            for s in &r.streams {
                let slots = s.slots();
                let contiguous = slots.first().is_none_or(|x| x.start == Time::ZERO)
                    && slots.windows(2).all(|p| p[0].end == p[1].start);
                let frame = time_frame(s, &tasks, state.profile(), r.id);
                let stored: Vec<(Time, Time)> = slots.iter().map(|x| (x.start, x.end)).collect();
                if !contiguous || frame != stored {
                    failures.push(format!(
                        "case {case}: robot {} stream breaks the idle suffix",
                        r.id
                    ));
                }
            }
        }
    }
    failures.dedup();
    let detail = if failures.is_empty() {
        format!("500 constraint sets; {branch1} slot fills, {branch2} grid placements")
    } else {
        format!("{} problems, first: {}", failures.len(), failures[0])
    };
    outcome(failures.is_empty(), detail)
}

fn determinism() -> Outcome {
    let mut mismatched = Vec::new();
    for name in ["fig1-2-3", "fig4-5-6-7", "fig8", "custom"] {
        let run = || {
            let dir = tempfile::tempdir().unwrap();
            let out = dir.path().to_str().unwrap().to_owned();
            let args = parse_args([
                "twsched",
                "--preset",
                name,
                "--seed",
                SEED,
                "--out-dir",
                &out,
            ])
            .unwrap();
            cli::run(&args).unwrap();
            std::fs::read(dir.path().join("results.csv")).unwrap()
        };
        if run() != run() {
            mismatched.push(name);
        }
    }
    outcome(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            "results.csv byte-identical across two runs of every preset".to_owned()
        } else {
            format!("differs for {mismatched:?}")
        },
    )
}

fn poisson_sampler() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 1_000_000;
    let (mut sum, mut sum_sq) = (0f64, 0f64);
    for _ in 0..n {
        let k = sample_poisson(7.0, &mut rng).unwrap() as f64;
        sum += k;
        sum_sq += k * k;
    }
    let mean = sum / n as f64;
    let var = sum_sq / n as f64 - mean * mean;
    outcome(
        (6.95..=7.05).contains(&mean) && (6.8..=7.2).contains(&var),
        format!("mean {mean:.4}, variance {var:.4} over {n} draws"),
    )
}

fn main() {
    type Criterion = fn() -> Outcome;
    let criteria: [(&str, Criterion); 10] = [
        ("balancing oracle suite", balancing_oracle_suite),
        ("documented gap {3,3,2,2,2}", documented_gap),
        ("greedy makespan >= ours", fig2_makespan),
        ("greedy TCD >= ours", fig3_tcd),
        ("Poisson runs", figs4_to_7),
        ("ours lowest makespan", fig8_all_baselines),
        ("relation algebra", relation_algebra),
        ("scheduler invariants", scheduler_invariants),
        ("determinism", determinism),
        ("Poisson sampler", poisson_sampler),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({}) [{:.1}s]",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            name,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
