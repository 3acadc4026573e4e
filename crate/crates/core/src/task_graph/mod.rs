//! Tasks, declared relations between them, and the parallel/serial rules
//! derived from those relations.

mod ingest;

pub use ingest::{format_tasks, parse_tasks, relation_token, ParseError, TaskRecord};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scheduler::RobotId;
use crate::time::Time;
use crate::time_windows::{
    classify, relation_partition, Finish, OrientedRelation, RelationKind, RelationPartition,
    TimeWindow,
};

/// Task identifier: non-empty ASCII letters, digits, `_`, `.` or `-`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskId(String);

/// Reserved by the grid dump format.
pub const IDLE_TOKEN: &str = "IDLE";

impl TaskId {
    pub fn new(id: impl Into<String>) -> Result<Self, TaskError> {
        let id = id.into();
        let valid = !id.is_empty()
            && id != IDLE_TOKEN
            && id
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'));
        if valid {
            Ok(TaskId(id))
        } else {
            Err(TaskError::InvalidId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for TaskId {
    type Err = TaskError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskId::new(s)
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaskError {
    #[error("invalid task id `{0}`")]
    InvalidId(String),
    #[error("duplicate task `{0}`")]
    DuplicateTask(TaskId),
    #[error("unknown task `{0}`")]
    UnknownTask(TaskId),
    #[error("task `{0}` is related to itself")]
    SelfRelation(TaskId),
    #[error("task `{0}` has non-positive execution time {1}")]
    NonPositiveExec(TaskId, Time),
    #[error("task `{id}` needs {exec} but its window {window} is shorter")]
    ExecExceedsWindow {
        id: TaskId,
        exec: Time,
        window: TimeWindow,
    },
    #[error("conflicting declarations between `{0}` and `{1}`")]
    ConflictingDeclaration(TaskId, TaskId),
    #[error("equal classes of `{a}` and `{b}` are related by both {first} and {second}")]
    ConsistencyViolation {
        a: TaskId,
        b: TaskId,
        first: OrientedRelation,
        second: OrientedRelation,
    },
    #[error("`{a}` {declared} `{b}` is declared but their windows give {actual}")]
    GeometryMismatch {
        a: TaskId,
        b: TaskId,
        declared: OrientedRelation,
        actual: OrientedRelation,
    },
    #[error(
        "system not compatible to perform the tasks: equal class of size {class_size} \
         needs a robot with more than {class_size} streams (largest has {max_streams})"
    )]
    Incompatible {
        class_size: usize,
        max_streams: usize,
    },
}

/// A task with its time window, nominal execution time and declared
/// relations. Relations are stored from this task towards the partner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    id: TaskId,
    window: TimeWindow,
    exec: Time,
    constraints: BTreeMap<TaskId, OrientedRelation>,
    equal_class: Option<usize>,
}

impl Task {
    pub fn new(id: TaskId, window: TimeWindow, exec: Time) -> Result<Self, TaskError> {
        if !exec.is_positive() {
            return Err(TaskError::NonPositiveExec(id, exec));
        }
        if let Some(len) = window.length() {
            if len < exec {
                return Err(TaskError::ExecExceedsWindow { id, exec, window });
            }
        }
        Ok(Task {
            id,
            window,
            exec,
            constraints: BTreeMap::new(),
            equal_class: None,
        })
    }

    pub fn id(&self) -> &TaskId {
        &self.id
    }

    pub fn window(&self) -> &TimeWindow {
        &self.window
    }

    pub fn exec(&self) -> Time {
        self.exec
    }

    /// Interval the task reserves in a grid row: its window when the deadline
    /// is finite, otherwise `[start, start + exec]`.
    pub fn occupied(&self) -> TimeWindow {
        match self.window.finish() {
            Finish::At(_) => self.window,
            Finish::Unbounded => {
                let start = self.window.start();
                TimeWindow::bounded(start, start + self.exec).expect("positive exec")
            }
        }
    }

    pub fn constraints(&self) -> &BTreeMap<TaskId, OrientedRelation> {
        &self.constraints
    }

    pub fn is_constrained_with(&self, other: &TaskId) -> bool {
        self.constraints.contains_key(other)
    }

    pub fn equal_class(&self) -> Option<usize> {
        self.equal_class
    }
}

/// Whether two tasks must run on different streams or may share one.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ParallelSerial {
    Parallel,
    Serial,
}

/// Equals, overlaps, finishes-with, starts-with and during force different
/// streams; before, meets and unconstrained pairs may share a stream.
pub fn parallel_or_serial(kind: RelationKind) -> ParallelSerial {
    match kind {
        RelationKind::Equals
        | RelationKind::Overlaps
        | RelationKind::FinishesWith
        | RelationKind::StartsWith
        | RelationKind::During => ParallelSerial::Parallel,
        RelationKind::Before | RelationKind::Meets | RelationKind::Unconstrained => {
            ParallelSerial::Serial
        }
    }
}

/// A robot with `streams` streams can host an equal class of `class_size`
/// tasks only when it has strictly more streams than the class has members.
pub fn robot_compatible(streams: usize, class_size: usize) -> bool {
    streams > class_size
}

pub fn system_compatible(capacities: &[usize], class_size: usize) -> bool {
    capacities.iter().any(|c| robot_compatible(*c, class_size))
}

/// Equal classes of a task set and the single relation induced between
/// each pair of classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqualClasses {
    class_of: BTreeMap<TaskId, usize>,
    members: Vec<Vec<TaskId>>,
    induced: BTreeMap<(usize, usize), OrientedRelation>,
}

impl EqualClasses {
    pub fn class_of(&self, id: &TaskId) -> Option<usize> {
        self.class_of.get(id).copied()
    }

    pub fn members(&self, class: usize) -> &[TaskId] {
        &self.members[class]
    }

    pub fn classes(&self) -> impl Iterator<Item = &[TaskId]> {
        self.members.iter().map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Relation induced between two classes, read from `a` towards `b`.
    pub fn between(&self, a: usize, b: usize) -> OrientedRelation {
        if a == b {
            return OrientedRelation::forward(RelationKind::Equals);
        }
        let (key, flip) = if a < b {
            ((a, b), false)
        } else {
            ((b, a), true)
        };
        match self.induced.get(&key) {
            Some(rel) if flip => rel.reversed(),
            Some(rel) => *rel,
            None => OrientedRelation::UNCONSTRAINED,
        }
    }

    /// Lifted relation between two tasks.
    pub fn relation(&self, a: &TaskId, b: &TaskId) -> OrientedRelation {
        match (self.class_of(a), self.class_of(b)) {
            (Some(ca), Some(cb)) => self.between(ca, cb),
            _ => OrientedRelation::UNCONSTRAINED,
        }
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Merges tasks linked by declared equality into classes, then lifts every
/// declared cross-class relation to all members of both classes. Two
/// different relations between the same pair of classes are rejected.
pub fn merge_equal_classes<'a, I>(tasks: I) -> Result<EqualClasses, TaskError>
where
    I: IntoIterator<Item = &'a Task>,
{
    let tasks: Vec<&Task> = tasks.into_iter().collect();
    let index: BTreeMap<&TaskId, usize> =
        tasks.iter().enumerate().map(|(i, t)| (&t.id, i)).collect();

    let mut parent: Vec<usize> = (0..tasks.len()).collect();
    for (i, t) in tasks.iter().enumerate() {
        for (partner, rel) in &t.constraints {
            if rel.kind != RelationKind::Equals {
                continue;
            }
            let Some(&j) = index.get(partner) else {
                return Err(TaskError::UnknownTask(partner.clone()));
            };
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            parent[ri.max(rj)] = ri.min(rj);
        }
    }

    // Classes numbered by their smallest member, which `tasks` order fixes.
    let mut root_to_class: BTreeMap<usize, usize> = BTreeMap::new();
    let mut members: Vec<Vec<TaskId>> = Vec::new();
    let mut class_of = BTreeMap::new();
    for (i, t) in tasks.iter().enumerate() {
        let root = find(&mut parent, i);
        let class = *root_to_class.entry(root).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[class].push(t.id.clone());
        class_of.insert(t.id.clone(), class);
    }

    let mut induced: BTreeMap<(usize, usize), (OrientedRelation, TaskId, TaskId)> = BTreeMap::new();
    for t in &tasks {
        let ca = class_of[&t.id];
        for (partner, rel) in &t.constraints {
            let Some(&cb) = class_of.get(partner) else {
                return Err(TaskError::UnknownTask(partner.clone()));
            };
            if rel.kind == RelationKind::Unconstrained {
                continue;
            }
            if ca == cb {
                if rel.kind != RelationKind::Equals {
                    return Err(TaskError::ConsistencyViolation {
                        a: t.id.clone(),
                        b: partner.clone(),
                        first: OrientedRelation::forward(RelationKind::Equals),
                        second: *rel,
                    });
                }
                continue;
            }
            let (key, rel) = if ca < cb {
                ((ca, cb), *rel)
            } else {
                ((cb, ca), rel.reversed())
            };
            match induced.get(&key) {
                Some((existing, a, b)) if *existing != rel => {
                    return Err(TaskError::ConsistencyViolation {
                        a: a.clone(),
                        b: b.clone(),
                        first: *existing,
                        second: rel,
                    });
                }
                Some(_) => {}
                None => {
                    induced.insert(key, (rel, t.id.clone(), partner.clone()));
                }
            }
        }
    }

    Ok(EqualClasses {
        class_of,
        members,
        induced: induced.into_iter().map(|(k, (r, _, _))| (k, r)).collect(),
    })
}

/// Collects tasks and declared relations, then validates them as a whole.
#[derive(Debug, Default)]
pub struct TaskSetBuilder {
    tasks: BTreeMap<TaskId, Task>,
    error: Option<TaskError>,
}

impl TaskSetBuilder {
    pub fn add(&mut self, task: Task) -> &mut Self {
        if self.error.is_none() && self.tasks.contains_key(&task.id) {
            self.error = Some(TaskError::DuplicateTask(task.id.clone()));
        }
        self.tasks.entry(task.id.clone()).or_insert(task);
        self
    }

    /// Declares `a rel b`. Unconstrained declarations are accepted and ignored.
    pub fn relate(&mut self, a: &TaskId, rel: OrientedRelation, b: &TaskId) -> &mut Self {
        if self.error.is_some() {
            return self;
        }
        if let Err(e) = self.try_relate(a, rel, b) {
            self.error = Some(e);
        }
        self
    }

    fn try_relate(
        &mut self,
        a: &TaskId,
        rel: OrientedRelation,
        b: &TaskId,
    ) -> Result<(), TaskError> {
        if a == b {
            return Err(TaskError::SelfRelation(a.clone()));
        }
        for id in [a, b] {
            if !self.tasks.contains_key(id) {
                return Err(TaskError::UnknownTask(id.clone()));
            }
        }
        if rel.kind == RelationKind::Unconstrained {
            return Ok(());
        }
        let rel = OrientedRelation::new(rel.kind, rel.swapped);
        for (from, to, r) in [(a, b, rel), (b, a, rel.reversed())] {
            let task = self.tasks.get_mut(from).expect("checked");
            match task.constraints.get(to) {
                Some(existing) if *existing != r => {
                    return Err(TaskError::ConflictingDeclaration(a.clone(), b.clone()));
                }
                _ => {
                    task.constraints.insert(to.clone(), r);
                }
            }
        }
        Ok(())
    }

    pub fn build(self) -> Result<TaskSet, TaskError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let mut tasks = self.tasks;
        let classes = merge_equal_classes(tasks.values())?;
        for t in tasks.values_mut() {
            t.equal_class = classes.class_of(&t.id);
        }
        let set = TaskSet { tasks, classes };
        set.check_geometry()?;
        Ok(set)
    }
}

/// A validated set of tasks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskSet {
    tasks: BTreeMap<TaskId, Task>,
    classes: EqualClasses,
}

impl TaskSet {
    pub fn builder() -> TaskSetBuilder {
        TaskSetBuilder::default()
    }

    pub fn get(&self, id: &TaskId) -> Option<&Task> {
        self.tasks.get(id)
    }

    pub fn task(&self, id: &TaskId) -> Result<&Task, TaskError> {
        self.get(id)
            .ok_or_else(|| TaskError::UnknownTask(id.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Task> {
        self.tasks.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &TaskId> {
        self.tasks.keys()
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn classes(&self) -> &EqualClasses {
        &self.classes
    }

    /// Effective relation from `a` to `b`: declared, or lifted through equal
    /// classes, else unconstrained.
    pub fn relation(&self, a: &TaskId, b: &TaskId) -> OrientedRelation {
        if a == b {
            return OrientedRelation::forward(RelationKind::Equals);
        }
        if let Some(rel) = self.tasks.get(a).and_then(|t| t.constraints.get(b)) {
            return *rel;
        }
        self.classes.relation(a, b)
    }

    pub fn parallel_or_serial(&self, a: &TaskId, b: &TaskId) -> ParallelSerial {
        parallel_or_serial(self.relation(a, b).kind)
    }

    pub fn equal_class_size(&self, id: &TaskId) -> usize {
        self.classes
            .class_of(id)
            .map(|c| self.classes.members(c).len())
            .unwrap_or(1)
    }

    /// Partition of all other tasks around `reference`, using occupied windows.
    pub fn partition(&self, reference: &TaskId) -> Result<RelationPartition<TaskId>, TaskError> {
        let r = self.task(reference)?;
        let items = self.tasks.values().map(|t| {
            let constrained = self.relation(reference, &t.id).kind != RelationKind::Unconstrained;
            (t.id.clone(), t.occupied(), constrained)
        });
        Ok(relation_partition((&r.id, &r.occupied()), items))
    }

    /// All tasks reachable from `id` through declared relations and equal
    /// classes, including `id`, sorted.
    pub fn component(&self, id: &TaskId) -> Result<Vec<TaskId>, TaskError> {
        self.task(id)?;
        let mut seen = BTreeSet::new();
        let mut stack = vec![id.clone()];
        while let Some(cur) = stack.pop() {
            if !seen.insert(cur.clone()) {
                continue;
            }
            let task = &self.tasks[&cur];
            stack.extend(task.constraints.keys().cloned());
            if let Some(c) = task.equal_class {
                stack.extend(self.classes.members(c).iter().cloned());
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// Every equal class with two or more members needs a robot with more
    /// streams than the class has members.
    pub fn check_compatible(&self, capacities: &[usize]) -> Result<(), TaskError> {
        for members in self.classes.classes() {
            let k = members.len();
            if k >= 2 && !system_compatible(capacities, k) {
                return Err(TaskError::Incompatible {
                    class_size: k,
                    max_streams: capacities.iter().copied().max().unwrap_or(0),
                });
            }
        }
        Ok(())
    }

    fn check_geometry(&self) -> Result<(), TaskError> {
        let ids: Vec<&TaskId> = self.tasks.keys().collect();
        for (i, a) in ids.iter().enumerate() {
            for b in &ids[i + 1..] {
                let declared = self.relation(a, b);
                if declared.kind == RelationKind::Unconstrained {
                    continue;
                }
                let actual = classify(&self.tasks[*a].occupied(), &self.tasks[*b].occupied());
                if actual != declared {
                    return Err(TaskError::GeometryMismatch {
                        a: (*a).clone(),
                        b: (*b).clone(),
                        declared,
                        actual,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Per-robot execution times and dispatch offsets. Tasks without an entry
/// use their nominal execution time and a zero offset.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExecutionProfile {
    exec: BTreeMap<(TaskId, RobotId), Time>,
    dispatch: BTreeMap<(TaskId, RobotId), Time>,
}

impl ExecutionProfile {
    pub fn set_exec(&mut self, task: TaskId, robot: RobotId, time: Time) -> &mut Self {
        assert!(!time.is_negative(), "execution time must be non-negative");
        self.exec.insert((task, robot), time);
        self
    }

    pub fn set_dispatch(&mut self, task: TaskId, robot: RobotId, offset: Time) -> &mut Self {
        assert!(
            !offset.is_negative(),
            "dispatch offset must be non-negative"
        );
        self.dispatch.insert((task, robot), offset);
        self
    }

    pub fn exec_time(&self, task: &Task, robot: RobotId) -> Time {
        self.exec
            .get(&(task.id.clone(), robot))
            .copied()
            .unwrap_or(task.exec)
    }

    pub fn dispatch_offset(&self, task: &TaskId, robot: RobotId) -> Time {
        self.dispatch
            .get(&(task.clone(), robot))
            .copied()
            .unwrap_or(Time::ZERO)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use RelationKind::*;

    pub(crate) fn id(s: &str) -> TaskId {
        TaskId::new(s).unwrap()
    }

    fn task(name: &str, a: i64, b: i64) -> Task {
        Task::new(id(name), TimeWindow::secs(a, b), Time::from_secs(1)).unwrap()
    }

    fn fwd(k: RelationKind) -> OrientedRelation {
        OrientedRelation::forward(k)
    }

    #[test]
    fn parallel_or_serial_examples() {
        let mut b = TaskSet::builder();
        b.add(task("a", 2, 7))
            .add(task("b", 2, 7))
            .add(task("c", 0, 5))
            .add(task("d", 6, 10))
            .add(task("e", 1, 3));
        b.relate(&id("a"), fwd(Equals), &id("b"))
            .relate(&id("c"), fwd(Before), &id("d"));
        let set = b.build().unwrap();
        assert_eq!(
            set.parallel_or_serial(&id("a"), &id("b")),
            ParallelSerial::Parallel
        );
        assert_eq!(
            set.parallel_or_serial(&id("c"), &id("d")),
            ParallelSerial::Serial
        );
        assert_eq!(
            set.parallel_or_serial(&id("a"), &id("e")),
            ParallelSerial::Serial
        );
        for x in set.ids() {
            for y in set.ids() {
                assert_eq!(set.parallel_or_serial(x, y), set.parallel_or_serial(y, x));
            }
        }
    }

    #[test]
    fn equal_chain_merges_into_one_class() {
        let mut b = TaskSet::builder();
        b.add(task("t1", 0, 4))
            .add(task("t2", 0, 4))
            .add(task("t3", 0, 4));
        b.relate(&id("t1"), fwd(Equals), &id("t2"))
            .relate(&id("t2"), fwd(Equals), &id("t3"));
        let set = b.build().unwrap();
        assert_eq!(set.classes().len(), 1);
        assert_eq!(set.equal_class_size(&id("t1")), 3);
        assert_eq!(set.relation(&id("t1"), &id("t3")), fwd(Equals));
    }

    #[test]
    fn cross_class_relation_is_lifted() {
        let mut b = TaskSet::builder();
        b.add(task("a1", 0, 4))
            .add(task("a2", 0, 4))
            .add(task("b1", 6, 9))
            .add(task("b2", 6, 9));
        b.relate(&id("a1"), fwd(Equals), &id("a2"))
            .relate(&id("b1"), fwd(Equals), &id("b2"))
            .relate(&id("a1"), fwd(Before), &id("b1"));
        let set = b.build().unwrap();
        assert_eq!(set.relation(&id("a2"), &id("b2")), fwd(Before));
        assert_eq!(
            set.relation(&id("b2"), &id("a1")),
            OrientedRelation::new(Before, true)
        );
        // every cross pair carries the class relation
        for x in ["a1", "a2"] {
            for y in ["b1", "b2"] {
                assert_eq!(set.relation(&id(x), &id(y)), fwd(Before));
            }
        }
    }

    #[test]
    fn conflicting_class_relations_are_rejected() {
        let mut tasks = vec![
            task("a1", 0, 4),
            task("a2", 0, 4),
            task("b1", 6, 9),
            task("b2", 6, 9),
        ];
        let mut declare = |x: usize, y: usize, r: OrientedRelation| {
            let yid = tasks[y].id.clone();
            let xid = tasks[x].id.clone();
            tasks[x].constraints.insert(yid, r);
            tasks[y].constraints.insert(xid, r.reversed());
        };
        declare(0, 1, fwd(Equals));
        declare(2, 3, fwd(Equals));
        declare(0, 2, fwd(Before));
        declare(1, 3, fwd(Overlaps));
        assert!(matches!(
            merge_equal_classes(&tasks),
            Err(TaskError::ConsistencyViolation { .. })
        ));

        // the builder reports the same violation before looking at windows
        let mut b = TaskSet::builder();
        b.add(task("a1", 0, 4))
            .add(task("a2", 0, 4))
            .add(task("b1", 6, 9))
            .add(task("b2", 6, 9));
        b.relate(&id("a1"), fwd(Equals), &id("a2"))
            .relate(&id("b1"), fwd(Equals), &id("b2"))
            .relate(&id("a1"), fwd(Before), &id("b1"))
            .relate(&id("a2"), fwd(Overlaps), &id("b2"));
        assert!(matches!(
            b.build(),
            Err(TaskError::ConsistencyViolation { .. })
        ));
    }

    #[test]
    fn declared_relation_must_match_windows() {
        let mut b = TaskSet::builder();
        b.add(task("a", 0, 5)).add(task("b", 3, 8));
        b.relate(&id("a"), fwd(Before), &id("b"));
        assert!(matches!(b.build(), Err(TaskError::GeometryMismatch { .. })));
    }

    #[test]
    fn builder_rejects_bad_input() {
        let mut b = TaskSet::builder();
        b.add(task("a", 0, 5)).add(task("a", 0, 5));
        assert_eq!(b.build(), Err(TaskError::DuplicateTask(id("a"))));

        let mut b = TaskSet::builder();
        b.add(task("a", 0, 5));
        b.relate(&id("a"), fwd(Before), &id("zz"));
        assert_eq!(b.build(), Err(TaskError::UnknownTask(id("zz"))));

        let mut b = TaskSet::builder();
        b.add(task("a", 0, 5));
        b.relate(&id("a"), fwd(Equals), &id("a"));
        assert_eq!(b.build(), Err(TaskError::SelfRelation(id("a"))));

        let mut b = TaskSet::builder();
        b.add(task("a", 0, 5)).add(task("b", 6, 9));
        b.relate(&id("a"), fwd(Before), &id("b"))
            .relate(&id("b"), fwd(Before), &id("a"));
        assert!(matches!(
            b.build(),
            Err(TaskError::ConflictingDeclaration(..))
        ));

        assert!(TaskId::new("IDLE").is_err());
        assert!(TaskId::new("a:b").is_err());
        assert!(TaskId::new("").is_err());
        assert!(Task::new(id("x"), TimeWindow::secs(0, 2), Time::from_secs(3)).is_err());
        assert!(Task::new(id("x"), TimeWindow::secs(0, 2), Time::ZERO).is_err());
    }

    #[test]
    fn robot_compatibility_is_strict() {
        assert!(robot_compatible(3, 2));
        assert!(!robot_compatible(2, 2));
        assert!(!system_compatible(&[2, 1, 2], 2));
        assert!(system_compatible(&[2, 3], 2));

        let mut b = TaskSet::builder();
        b.add(task("a", 0, 4)).add(task("b", 0, 4));
        b.relate(&id("a"), fwd(Equals), &id("b"));
        let set = b.build().unwrap();
        assert_eq!(
            set.check_compatible(&[2, 2]),
            Err(TaskError::Incompatible {
                class_size: 2,
                max_streams: 2
            })
        );
        assert!(set.check_compatible(&[1, 3]).is_ok());
        // singleton classes never need a multi-stream robot
        let mut b = TaskSet::builder();
        b.add(task("solo", 0, 4));
        assert!(b.build().unwrap().check_compatible(&[1]).is_ok());
    }

    #[test]
    fn component_follows_relations_and_classes() {
        let mut b = TaskSet::builder();
        b.add(task("a", 0, 4))
            .add(task("b", 0, 4))
            .add(task("c", 5, 9))
            .add(task("d", 20, 30));
        b.relate(&id("a"), fwd(Equals), &id("b"))
            .relate(&id("b"), fwd(Before), &id("c"));
        let set = b.build().unwrap();
        assert_eq!(
            set.component(&id("c")).unwrap(),
            vec![id("a"), id("b"), id("c")]
        );
        assert_eq!(set.component(&id("d")).unwrap(), vec![id("d")]);
    }

    #[test]
    fn partition_through_task_set() {
        let mut b = TaskSet::builder();
        b.add(task("r", 0, 5))
            .add(task("x", 6, 10))
            .add(task("y", 5, 9))
            .add(task("z", 0, 5))
            .add(task("w", 3, 8));
        b.relate(&id("r"), fwd(Before), &id("x"))
            .relate(&id("r"), fwd(Meets), &id("y"))
            .relate(&id("r"), fwd(Equals), &id("z"));
        let set = b.build().unwrap();
        let p = set.partition(&id("r")).unwrap();
        assert_eq!(p.class(Before)[0].key, id("x"));
        assert_eq!(p.class(Meets)[0].key, id("y"));
        assert_eq!(p.class(Equals)[0].key, id("z"));
        assert_eq!(p.class(Unconstrained)[0].key, id("w"));
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn profile_defaults() {
        let t = task("a", 0, 10);
        let mut p = ExecutionProfile::default();
        assert_eq!(p.exec_time(&t, RobotId(1)), Time::from_secs(1));
        assert_eq!(p.dispatch_offset(t.id(), RobotId(1)), Time::ZERO);
        p.set_exec(id("a"), RobotId(2), Time::from_secs(4));
        p.set_dispatch(id("a"), RobotId(2), Time::from_secs(2));
        assert_eq!(p.exec_time(&t, RobotId(2)), Time::from_secs(4));
        assert_eq!(p.dispatch_offset(t.id(), RobotId(2)), Time::from_secs(2));
    }

    #[test]
    fn unbounded_window_occupies_exec_time() {
        let t = Task::new(
            id("u"),
            TimeWindow::unbounded(Time::from_secs(3)).unwrap(),
            Time::from_secs(7),
        )
        .unwrap();
        assert_eq!(t.occupied(), TimeWindow::secs(3, 10));
    }
}
