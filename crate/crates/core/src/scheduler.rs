//! Robots, streams and dynamic allocation of tasks onto streams.
//!
//! A stream is a contiguous run of slots starting at time 0: tasks, forced
//! idle waits and nothing else. Everything after the last slot is idle, so
//! the idle-suffix property holds by construction.
//!
//! A new task first tries to fill a forced idle slot of an active grid
//! (the smallest one that accepts it). Otherwise the grid of its batch is
//! masked down to the task and placed row by row: the smallest row on the
//! stream that finishes first, and so on, with every row delayed by the
//! same amount so the grid keeps its shape.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::grid::{build_grid, compute_mnst, mask, Grid, GridError, SlotContent, SlotRef};
use crate::task_graph::{robot_compatible, ExecutionProfile, Task, TaskError, TaskId, TaskSet};
use crate::time::Time;
use crate::time_windows::TimeWindow;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RobotId(pub u32);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Grid(GridError),
    #[error("task `{0}` is already scheduled")]
    AlreadyScheduled(TaskId),
    #[error("no robot can host task `{task}` (equal class of {class_size})")]
    NoCompatibleRobot { task: TaskId, class_size: usize },
    #[error(
        "robotic system is not suitable: {rows} rows needed but only {streams} streams are usable"
    )]
    SystemUnsuitable { rows: usize, streams: usize },
    #[error("robot {0} needs at least one stream")]
    NoStreams(RobotId),
    #[error("robot {0} is declared twice")]
    DuplicateRobot(RobotId),
    #[error("a schedule needs at least one robot")]
    NoRobots,
}

impl From<GridError> for ScheduleError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::SystemUnsuitable { rows, streams } => {
                ScheduleError::SystemUnsuitable { rows, streams }
            }
            GridError::Task(t) => ScheduleError::Task(t),
            other => ScheduleError::Grid(other),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamSlot {
    pub content: SlotContent,
    pub start: Time,
    pub end: Time,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stream {
    slots: Vec<StreamSlot>,
}

impl Stream {
    pub fn slots(&self) -> &[StreamSlot] {
        &self.slots
    }

    /// End of the last task or forced idle slot.
    pub fn finishing_time(&self) -> Time {
        self.slots.last().map_or(Time::ZERO, |s| s.end)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &TaskId> {
        self.slots.iter().filter_map(|s| s.content.task())
    }

    fn push(&mut self, content: SlotContent, len: Time) {
        if len.is_positive() {
            let start = self.finishing_time();
            self.slots.push(StreamSlot {
                content,
                start,
                end: start + len,
            });
        }
    }

    fn pad_to(&mut self, t: Time) {
        let gap = t - self.finishing_time();
        self.push(SlotContent::PADDING, gap);
    }

    /// Replaces the idle slot spanning exactly `[start, end]` with `pieces`.
    fn splice_idle(&mut self, start: Time, end: Time, pieces: Vec<StreamSlot>) {
        let pos = self
            .slots
            .iter()
            .position(|s| s.start == start && s.end == end && s.content.is_idle())
            .expect("placed grid slots mirror stream slots");
        self.slots.splice(pos..=pos, pieces);
    }
}

/// `(start, end)` of every slot, accumulated from execution times on
/// `robot` for tasks and from lengths for forced idle. Zero-length entries
/// are dropped.
pub fn time_frame(
    stream: &Stream,
    tasks: &TaskSet,
    profile: &ExecutionProfile,
    robot: RobotId,
) -> Vec<(Time, Time)> {
    let mut out = Vec::new();
    let mut t = Time::ZERO;
    for slot in &stream.slots {
        let len = match slot.content.task().and_then(|id| tasks.get(id)) {
            Some(task) => profile.exec_time(task, robot),
            None => slot.end - slot.start,
        };
        if len.is_positive() {
            out.push((t, t + len));
            t += len;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Robot {
    pub id: RobotId,
    pub streams: Vec<Stream>,
}

impl Robot {
    pub fn capacity(&self) -> usize {
        self.streams.len()
    }
}

/// Where a task ended up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub robot: RobotId,
    pub stream: usize,
    /// Window reserved for the task on its stream.
    pub window: TimeWindow,
    /// When the task actually runs.
    pub run: TimeWindow,
}

/// One row of a newly placed grid and the streams it could have taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowAssignment {
    pub row: usize,
    pub robot: RobotId,
    pub stream: usize,
    /// `(robot, stream, finishing time)` of every eligible stream at the time
    /// of the choice.
    pub candidates: Vec<(RobotId, usize, Time)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Filled a forced idle slot of an existing grid.
    Filled { grid: u64 },
    /// Placed a new masked grid.
    Placed {
        grid: u64,
        delay: Time,
        rows: Vec<RowAssignment>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacementReport {
    pub task: TaskId,
    pub placement: Placement,
    pub branch: Branch,
}

#[derive(Clone, Debug)]
struct ActiveGrid {
    grid: Grid,
    delay: Time,
    /// `(robot index, stream index)` of each row.
    streams: Vec<(usize, usize)>,
}

impl ActiveGrid {
    fn deadline(&self) -> Time {
        let w = self.grid.window();
        w.start() + w.length().expect("bounded") + self.delay
    }
}

/// Robots, their streams and the grids still open for new tasks.
#[derive(Clone, Debug)]
pub struct ScheduleState {
    tasks: TaskSet,
    profile: ExecutionProfile,
    robots: Vec<Robot>,
    templates: Vec<Grid>,
    template_of: BTreeMap<TaskId, usize>,
    active: Vec<ActiveGrid>,
    placements: BTreeMap<TaskId, Placement>,
    clock: Time,
    next_grid: u64,
}

impl ScheduleState {
    /// `robots` lists `(id, stream count)`; robots are kept in id order.
    pub fn new(
        tasks: TaskSet,
        robots: &[(RobotId, usize)],
        profile: ExecutionProfile,
    ) -> Result<Self, ScheduleError> {
        if robots.is_empty() {
            return Err(ScheduleError::NoRobots);
        }
        let mut seen = BTreeSet::new();
        let mut list = Vec::with_capacity(robots.len());
        for (id, streams) in robots {
            if *streams == 0 {
                return Err(ScheduleError::NoStreams(*id));
            }
            if !seen.insert(*id) {
                return Err(ScheduleError::DuplicateRobot(*id));
            }
            list.push(Robot {
                id: *id,
                streams: vec![Stream::default(); *streams],
            });
        }
        list.sort_by_key(|r| r.id);
        Ok(ScheduleState {
            tasks,
            profile,
            robots: list,
            templates: Vec::new(),
            template_of: BTreeMap::new(),
            active: Vec::new(),
            placements: BTreeMap::new(),
            clock: Time::ZERO,
            next_grid: 0,
        })
    }

    pub fn tasks(&self) -> &TaskSet {
        &self.tasks
    }

    pub fn profile(&self) -> &ExecutionProfile {
        &self.profile
    }

    pub fn robots(&self) -> &[Robot] {
        &self.robots
    }

    pub fn capacities(&self) -> Vec<usize> {
        self.robots.iter().map(Robot::capacity).collect()
    }

    pub fn total_streams(&self) -> usize {
        self.robots.iter().map(Robot::capacity).sum()
    }

    pub fn placement(&self, id: &TaskId) -> Option<&Placement> {
        self.placements.get(id)
    }

    pub fn placements(&self) -> &BTreeMap<TaskId, Placement> {
        &self.placements
    }

    pub fn active_grids(&self) -> usize {
        self.active.len()
    }

    pub fn clock(&self) -> Time {
        self.clock
    }

    /// Moves the clock forward and retires grids whose deadline has passed.
    pub fn advance_clock(&mut self, to: Time) {
        self.clock = self.clock.max(to);
        self.evict();
    }

    /// Finishing time of every stream, robot by robot.
    pub fn finishing_times(&self) -> Vec<Time> {
        self.robots
            .iter()
            .flat_map(|r| r.streams.iter().map(Stream::finishing_time))
            .collect()
    }

    /// Largest number of tasks queued on one stream.
    pub fn mnst(&self) -> usize {
        let sts: Vec<Vec<Option<&TaskId>>> = self
            .robots
            .iter()
            .flat_map(|r| &r.streams)
            .map(|s| s.tasks().map(Some).collect())
            .collect();
        compute_mnst(&sts)
    }

    /// Builds the grid for `batch` plus `backlog`; later allocations of
    /// these tasks use it as their template.
    pub fn register_batch(
        &mut self,
        batch: &[TaskId],
        backlog: &[TaskId],
    ) -> Result<(), ScheduleError> {
        let grid = build_grid(&self.tasks, batch, backlog, &self.capacities())?;
        let index = self.templates.len();
        for id in batch.iter().chain(backlog) {
            self.template_of.insert(id.clone(), index);
        }
        self.templates.push(grid);
        Ok(())
    }

    /// Template grid for `id`, building one from its connected component if
    /// none was registered. Tasks with no relations get a one-slot grid.
    fn template(&mut self, id: &TaskId) -> Result<Grid, ScheduleError> {
        if let Some(i) = self.template_of.get(id) {
            return Ok(self.templates[*i].clone());
        }
        let component = self.tasks.component(id)?;
        if component.len() > 1 {
            self.register_batch(&component, &[])?;
            return Ok(self.templates[self.template_of[id]].clone());
        }
        Ok(build_grid(
            &self.tasks,
            std::slice::from_ref(id),
            &[],
            &self.capacities(),
        )?)
    }

    pub fn allocate(&mut self, id: &TaskId) -> Result<PlacementReport, ScheduleError> {
        if self.placements.contains_key(id) {
            return Err(ScheduleError::AlreadyScheduled(id.clone()));
        }
        let task = self.tasks.task(id)?.clone();
        let k = self.tasks.equal_class_size(id);
        if k >= 2
            && !self
                .robots
                .iter()
                .any(|r| robot_compatible(r.capacity(), k))
        {
            return Err(ScheduleError::NoCompatibleRobot {
                task: id.clone(),
                class_size: k,
            });
        }
        if !self.template_of.contains_key(id) && self.tasks.component(id)?.len() > 1 {
            self.template(id)?;
        }
        let report = match self.fill_existing(&task) {
            Some(report) => report,
            None => {
                let template = self.template(id)?;
                let masked = mask(&template, id)?;
                self.place_masked(&task, masked)?
            }
        };
        self.placements.insert(id.clone(), report.placement.clone());
        self.evict();
        Ok(report)
    }

    /// Places a grid as is, with no task of its own. Returns its index.
    pub fn place_grid(&mut self, grid: Grid) -> Result<u64, ScheduleError> {
        let order = grid_row_order(&grid);
        let groups = self.row_groups(&grid);
        let (assignments, delay) = self.assign_rows(&grid, &order, &groups, None)?;
        Ok(self.commit(grid, assignments, delay, None).0)
    }

    fn fill_existing(&mut self, task: &Task) -> Option<PlacementReport> {
        let id = task.id();
        let own = self.template_of.contains_key(id);
        let mut order: Vec<usize> = (0..self.active.len()).collect();
        order.sort_by_key(|i| self.active[*i].grid.order_key());
        for gi in order {
            let active = &self.active[gi];
            let found = active.grid.slots().find_map(|(at, slot)| {
                let eligible = match slot.content.owner() {
                    Some(owner) => owner == id && slot.content.is_idle(),
                    None => !own && slot.content.is_idle(),
                };
                if !eligible {
                    return None;
                }
                let (ri, si) = active.streams[at.row];
                let robot = self.robots[ri].id;
                let exec = self.profile.exec_time(task, robot);
                let w = task
                    .occupied()
                    .shifted(self.profile.dispatch_offset(id, robot))
                    .ok()?;
                let len = w.length().expect("bounded");
                (slot.window().contains(&w) && exec <= len).then_some((at, ri, si, w, exec))
            });
            if let Some((at, ri, si, w, exec)) = found {
                return Some(self.fill(gi, at, ri, si, task, w, exec));
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn fill(
        &mut self,
        gi: usize,
        at: SlotRef,
        ri: usize,
        si: usize,
        task: &Task,
        w: TimeWindow,
        exec: Time,
    ) -> PlacementReport {
        let active = &mut self.active[gi];
        let delay = active.delay;
        let slot = active.grid.slot(at).clone();
        active
            .grid
            .fill(at, task.id().clone(), w)
            .expect("slot checked by fill_existing");
        let shift = |t: Time| t + delay;
        let window = w.shifted(delay).expect("non-negative");
        let run_end = shift(w.start()) + exec;
        let mut pieces = Vec::new();
        let mut push = |content: SlotContent, start: Time, end: Time| {
            if start < end {
                pieces.push(StreamSlot {
                    content,
                    start,
                    end,
                });
            }
        };
        push(SlotContent::PADDING, shift(slot.start), shift(w.start()));
        push(
            SlotContent::Task(task.id().clone()),
            shift(w.start()),
            run_end,
        );
        push(SlotContent::PADDING, run_end, shift(slot.end));
        self.robots[ri].streams[si].splice_idle(shift(slot.start), shift(slot.end), pieces);
        let grid = active.grid.creation_index();
        PlacementReport {
            task: task.id().clone(),
            placement: Placement {
                robot: self.robots[ri].id,
                stream: si,
                window,
                run: TimeWindow::bounded(shift(w.start()), run_end).expect("ordered"),
            },
            branch: Branch::Filled { grid },
        }
    }

    /// Rows linked through equal classes, as `(rows, largest class)`.
    fn row_groups(&self, grid: &Grid) -> Vec<(Vec<usize>, usize)> {
        let n = grid.row_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut class_rows: BTreeMap<usize, usize> = BTreeMap::new();
        let mut kmax = vec![1usize; n];
        for (at, slot) in grid.slots() {
            let Some(owner) = slot.content.owner() else {
                continue;
            };
            let k = self.tasks.equal_class_size(owner);
            if k < 2 {
                continue;
            }
            kmax[at.row] = kmax[at.row].max(k);
            let class = self.tasks.classes().class_of(owner).expect("k >= 2");
            match class_rows.get(&class) {
                Some(&r) => {
                    let (a, b) = (find(&mut parent, r), find(&mut parent, at.row));
                    parent[a.max(b)] = a.min(b);
                }
                None => {
                    class_rows.insert(class, at.row);
                }
            }
        }
        let mut groups: BTreeMap<usize, (Vec<usize>, usize)> = BTreeMap::new();
        for (row, k) in kmax.iter().enumerate() {
            let root = find(&mut parent, row);
            let g = groups.entry(root).or_insert((Vec::new(), 1));
            g.0.push(row);
            g.1 = g.1.max(*k);
        }
        groups.into_values().collect()
    }

    /// Chooses a stream per row and the common delay.
    fn assign_rows(
        &self,
        grid: &Grid,
        order: &[usize],
        groups: &[(Vec<usize>, usize)],
        task: Option<(&Task, SlotRef)>,
    ) -> Result<(Vec<RowChoice>, Time), ScheduleError> {
        let group_of: BTreeMap<usize, usize> = groups
            .iter()
            .enumerate()
            .flat_map(|(g, (rows, _))| rows.iter().map(move |r| (*r, g)))
            .collect();
        let fits_task = |ri: usize, rows: &[usize]| match task {
            Some((t, at)) if rows.contains(&at.row) => {
                let exec = self.profile.exec_time(t, self.robots[ri].id);
                exec <= grid.slot(at).length()
            }
            _ => true,
        };
        let static_ok = |ri: usize, g: usize| {
            let (rows, k) = &groups[g];
            (*k < 2 || robot_compatible(self.robots[ri].capacity(), *k)) && fits_task(ri, rows)
        };
        if let Some((t, _)) = task {
            let g = groups
                .iter()
                .position(|(rows, _)| task.is_some_and(|(_, at)| rows.contains(&at.row)))
                .expect("task row is grouped");
            if !(0..self.robots.len()).any(|ri| static_ok(ri, g)) {
                return Err(ScheduleError::NoCompatibleRobot {
                    task: t.id().clone(),
                    class_size: self.tasks.equal_class_size(t.id()),
                });
            }
        }

        let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut robot_of_group: BTreeMap<usize, usize> = BTreeMap::new();
        let mut out = Vec::with_capacity(order.len());
        for &row in order {
            let g = group_of[&row];
            let unplaced = |g: usize| {
                groups[g]
                    .0
                    .iter()
                    .filter(|r| !out.iter().any(|o: &(usize, usize, usize, _)| o.0 == **r))
                    .count()
            };
            let free = |ri: usize| {
                (0..self.robots[ri].capacity())
                    .filter(|si| !used.contains(&(ri, *si)))
                    .count()
            };
            // Streams still owed to groups already bound to a robot.
            let owed = |ri: usize| -> usize {
                robot_of_group
                    .iter()
                    .filter(|(other, r)| **r == ri && **other != g)
                    .map(|(other, _)| unplaced(*other))
                    .sum()
            };
            let robots: Vec<usize> = match robot_of_group.get(&g) {
                Some(&ri) => vec![ri],
                None => (0..self.robots.len())
                    .filter(|ri| static_ok(*ri, g) && free(*ri) >= owed(*ri) + unplaced(g))
                    .collect(),
            };
            let used_ref = &used;
            let candidates: Vec<(usize, usize, Time)> = robots
                .iter()
                .flat_map(|&ri| {
                    self.robots[ri]
                        .streams
                        .iter()
                        .enumerate()
                        .filter(move |(si, _)| !used_ref.contains(&(ri, *si)))
                        .map(move |(si, s)| (ri, si, s.finishing_time()))
                })
                .collect();
            let Some(&(ri, si, _)) = candidates.iter().min_by_key(|(ri, si, f)| (*f, *ri, *si))
            else {
                return Err(ScheduleError::SystemUnsuitable {
                    rows: grid.row_count(),
                    streams: self.total_streams(),
                });
            };
            used.insert((ri, si));
            robot_of_group.insert(g, ri);
            let listed = candidates
                .iter()
                .map(|(r, s, f)| (self.robots[*r].id, *s, *f))
                .collect();
            out.push((row, ri, si, listed));
        }

        let a = grid.window().start();
        let mut ready = self.clock;
        for (row, ri, si, _) in &out {
            let mut f = self.robots[*ri].streams[*si].finishing_time();
            if let Some((t, at)) = task {
                if at.row == *row {
                    f += self.profile.dispatch_offset(t.id(), self.robots[*ri].id);
                }
            }
            ready = ready.max(f);
        }
        let delay = (ready - a).max(Time::ZERO);
        Ok((out, delay))
    }

    fn place_masked(
        &mut self,
        task: &Task,
        masked: Grid,
    ) -> Result<PlacementReport, ScheduleError> {
        let at = masked
            .slot_of(task.id())
            .expect("masked grid holds the task");
        let order = grid_row_order(&masked);
        let groups = self.row_groups(&masked);
        let (assignments, delay) = self.assign_rows(&masked, &order, &groups, Some((task, at)))?;
        let (grid, placement) = self.commit(masked, assignments, delay, Some((task, at)));
        let placement = placement.expect("task placed");
        Ok(PlacementReport {
            task: task.id().clone(),
            placement: placement.0,
            branch: Branch::Placed {
                grid,
                delay,
                rows: placement.1,
            },
        })
    }

    #[allow(clippy::type_complexity)]
    fn commit(
        &mut self,
        grid: Grid,
        assignments: Vec<(usize, usize, usize, Vec<(RobotId, usize, Time)>)>,
        delay: Time,
        task: Option<(&Task, SlotRef)>,
    ) -> (u64, Option<(Placement, Vec<RowAssignment>)>) {
        let index = self.next_grid;
        self.next_grid += 1;
        let grid = grid.with_creation_index(index);
        let a = grid.window().start();
        let mut streams = vec![(0, 0); grid.row_count()];
        let mut placement = None;
        let mut rows = Vec::with_capacity(assignments.len());
        for (row, ri, si, candidates) in assignments {
            streams[row] = (ri, si);
            let robot = self.robots[ri].id;
            let stream = &mut self.robots[ri].streams[si];
            stream.pad_to(a + delay);
            for (slot_index, slot) in grid.rows()[row].iter().enumerate() {
                let start = slot.start + delay;
                stream.pad_to(start);
                match (&slot.content, task) {
                    (SlotContent::Task(id), Some((t, at)))
                        if id == t.id()
                            && at
                                == (SlotRef {
                                    row,
                                    slot: slot_index,
                                }) =>
                    {
                        let exec = self.profile.exec_time(t, robot);
                        stream.push(slot.content.clone(), exec);
                        stream.push(SlotContent::PADDING, slot.length() - exec);
                        placement = Some(Placement {
                            robot,
                            stream: si,
                            window: slot.window().shifted(delay).expect("non-negative"),
                            run: TimeWindow::bounded(start, start + exec).expect("ordered"),
                        });
                    }
                    _ => stream.push(slot.content.clone(), slot.length()),
                }
            }
            rows.push(RowAssignment {
                row,
                robot,
                stream: si,
                candidates,
            });
        }
        if !grid.is_filled() {
            self.active.push(ActiveGrid {
                grid,
                delay,
                streams,
            });
        }
        (index, placement.map(|p| (p, rows)))
    }

    fn evict(&mut self) {
        let clock = self.clock;
        self.active
            .retain(|g| !g.grid.is_filled() && g.deadline() >= clock);
    }

    /// One line per stream: `robot=<id> stream=<j> tasks=<id:...> finish=<t>`,
    /// streams numbered from 1.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in &self.robots {
            for (j, s) in r.streams.iter().enumerate() {
                let tasks: Vec<&str> = s.tasks().map(TaskId::as_str).collect();
                writeln!(
                    out,
                    "robot={} stream={} tasks={} finish={}",
                    r.id,
                    j + 1,
                    tasks.join(":"),
                    s.finishing_time()
                )
                .expect("write to string");
            }
        }
        out
    }
}

/// Row, robot index, stream index and the candidates considered.
type RowChoice = (usize, usize, usize, Vec<(RobotId, usize, Time)>);

/// Rows ordered smallest first: earliest busy start, then least busy time.
fn grid_row_order(grid: &Grid) -> Vec<usize> {
    let mut order: Vec<usize> = (0..grid.row_count()).collect();
    order.sort_by_key(|r| {
        (
            grid.row_first_busy_start(*r)
                .unwrap_or(grid.window().start()),
            grid.row_busy(*r),
            *r,
        )
    });
    order
}

/// One parsed line of a schedule dump.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamSummary {
    pub robot: RobotId,
    pub stream: usize,
    pub tasks: Vec<TaskId>,
    pub finish: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("schedule dump line {line}: {message}")]
pub struct DumpError {
    pub line: usize,
    pub message: String,
}

pub fn parse_schedule_dump(text: &str) -> Result<Vec<StreamSummary>, DumpError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| DumpError {
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [robot, stream, tasks, finish] = fields[..] else {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        };
        let value = |field: &'static str, s: &'_ str| -> Result<String, DumpError> {
            s.strip_prefix(field)
                .and_then(|s| s.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| err(format!("expected `{field}=`")))
        };
        let robot = value("robot", robot)?
            .parse::<u32>()
            .map_err(|e| err(format!("robot: {e}")))?;
        let stream = value("stream", stream)?
            .parse::<usize>()
            .map_err(|e| err(format!("stream: {e}")))?;
        if stream == 0 {
            return Err(err("streams are numbered from 1".into()));
        }
        let tasks = value("tasks", tasks)?;
        let tasks = if tasks.is_empty() {
            Vec::new()
        } else {
            tasks
                .split(':')
                .map(TaskId::new)
                .collect::<Result<_, _>>()
                .map_err(|e| err(e.to_string()))?
        };
        let finish = value("finish", finish)?
            .parse::<Time>()
            .map_err(|e| err(format!("finish: {e}")))?;
        out.push(StreamSummary {
            robot: RobotId(robot),
            stream,
            tasks,
            finish,
        });
    }
    Ok(out)
}
