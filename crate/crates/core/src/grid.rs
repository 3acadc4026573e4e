//! The grid of all tasks: rows of task windows and forced idle waits that
//! together respect every declared relation among a batch of tasks.
//!
//! Rows are built from the batch by repeatedly taking the earliest remaining
//! task, placing it in the open row with the smallest deadline and its
//! parallel partners on further rows. Backlog tasks are then packed with the
//! balancing rule, reusing idle gaps where their windows fit. Finally every
//! row is padded with forced idle slots so it spans the whole grid window.

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::balancing::scaled_variance;
use crate::task_graph::{ParallelSerial, TaskError, TaskId, TaskSet, IDLE_TOKEN};
use crate::time::Time;
use crate::time_windows::TimeWindow;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("a grid needs at least one task")]
    EmptyBatch,
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error("task `{0}` appears more than once")]
    DuplicateTask(TaskId),
    #[error("robotic system is not suitable: {rows} rows needed but only {streams} streams exist")]
    SystemUnsuitable { rows: usize, streams: usize },
    #[error("row {row}: slots must be non-empty, ordered and non-overlapping")]
    MalformedRow { row: usize },
    #[error("task `{0}` has no slot in this grid")]
    TaskNotInGrid(TaskId),
    #[error("slot ({row},{slot}) cannot take window {window}")]
    SlotUnavailable {
        row: usize,
        slot: usize,
        window: TimeWindow,
    },
    #[error("grid dump line {line}: {message}")]
    Dump { line: usize, message: String },
}

/// What occupies a grid slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SlotContent {
    Task(TaskId),
    /// A wait. `reserved_for` names the task whose position this is when the
    /// grid has been masked; padding has no reservation.
    ForcedIdle {
        reserved_for: Option<TaskId>,
    },
}

impl SlotContent {
    pub const PADDING: SlotContent = SlotContent::ForcedIdle { reserved_for: None };

    pub fn is_idle(&self) -> bool {
        matches!(self, SlotContent::ForcedIdle { .. })
    }

    pub fn task(&self) -> Option<&TaskId> {
        match self {
            SlotContent::Task(id) => Some(id),
            SlotContent::ForcedIdle { .. } => None,
        }
    }

    /// The task this slot holds or is reserved for.
    pub fn owner(&self) -> Option<&TaskId> {
        match self {
            SlotContent::Task(id) => Some(id),
            SlotContent::ForcedIdle { reserved_for } => reserved_for.as_ref(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridSlot {
    pub start: Time,
    pub end: Time,
    pub content: SlotContent,
}

impl GridSlot {
    pub fn new(window: TimeWindow, content: SlotContent) -> Self {
        let end = window
            .length()
            .map(|l| window.start() + l)
            .expect("bounded slot window");
        GridSlot {
            start: window.start(),
            end,
            content,
        }
    }

    pub fn task(id: TaskId, window: TimeWindow) -> Self {
        Self::new(window, SlotContent::Task(id))
    }

    pub fn idle(window: TimeWindow) -> Self {
        Self::new(window, SlotContent::PADDING)
    }

    pub fn window(&self) -> TimeWindow {
        TimeWindow::bounded(self.start, self.end).expect("slot invariant")
    }

    pub fn length(&self) -> Time {
        self.end - self.start
    }
}

impl fmt::Display for GridSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.content.task() {
            Some(id) => write!(f, "[{},{}:{}]", self.start, self.end, id),
            None => write!(f, "[{},{}:{}]", self.start, self.end, IDLE_TOKEN),
        }
    }
}

/// Position of a slot inside a grid.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotRef {
    pub row: usize,
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    rows: Vec<Vec<GridSlot>>,
    start: Time,
    end: Time,
    creation_index: u64,
}

fn row_is_well_formed(row: &[GridSlot]) -> bool {
    !row.is_empty()
        && row
            .iter()
            .all(|s| s.start < s.end && !s.start.is_negative())
        && row.windows(2).all(|p| p[0].end <= p[1].start)
}

impl Grid {
    /// Grid from explicit rows. Rows are kept as given.
    pub fn new(rows: Vec<Vec<GridSlot>>) -> Result<Grid, GridError> {
        if rows.is_empty() {
            return Err(GridError::EmptyBatch);
        }
        if let Some(row) = rows.iter().position(|r| !row_is_well_formed(r)) {
            return Err(GridError::MalformedRow { row });
        }
        let mut seen = BTreeSet::new();
        for slot in rows.iter().flatten() {
            if let Some(id) = slot.content.owner() {
                if !seen.insert(id.clone()) {
                    return Err(GridError::DuplicateTask(id.clone()));
                }
            }
        }
        let start = rows
            .iter()
            .flatten()
            .map(|s| s.start)
            .min()
            .expect("non-empty");
        let end = rows
            .iter()
            .flatten()
            .map(|s| s.end)
            .max()
            .expect("non-empty");
        Ok(Grid {
            rows,
            start,
            end,
            creation_index: 0,
        })
    }

    pub fn rows(&self) -> &[Vec<GridSlot>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn slot(&self, at: SlotRef) -> &GridSlot {
        &self.rows[at.row][at.slot]
    }

    /// `(a, b)`: earliest slot start and latest slot end.
    pub fn window(&self) -> TimeWindow {
        TimeWindow::bounded(self.start, self.end).expect("grid invariant")
    }

    pub fn creation_index(&self) -> u64 {
        self.creation_index
    }

    pub fn with_creation_index(mut self, index: u64) -> Self {
        self.creation_index = index;
        self
    }

    /// Grids order by window start, then by age.
    pub fn order_key(&self) -> (Time, u64) {
        (self.start, self.creation_index)
    }

    /// Tasks placed or reserved in the grid, row-major.
    pub fn task_ids(&self) -> impl Iterator<Item = &TaskId> {
        self.rows.iter().flatten().filter_map(|s| s.content.owner())
    }

    pub fn slot_of(&self, id: &TaskId) -> Option<SlotRef> {
        self.slots()
            .find(|(_, s)| s.content.owner() == Some(id))
            .map(|(r, _)| r)
    }

    pub fn slots(&self) -> impl Iterator<Item = (SlotRef, &GridSlot)> {
        self.rows.iter().enumerate().flat_map(|(row, slots)| {
            slots
                .iter()
                .enumerate()
                .map(move |(slot, s)| (SlotRef { row, slot }, s))
        })
    }

    /// Sum of slot lengths that hold or are reserved for a task.
    pub fn row_busy(&self, row: usize) -> Time {
        self.rows[row]
            .iter()
            .filter(|s| s.content.owner().is_some())
            .map(GridSlot::length)
            .sum()
    }

    /// Start of the first slot that holds or is reserved for a task.
    pub fn row_first_busy_start(&self, row: usize) -> Option<Time> {
        self.rows[row]
            .iter()
            .find(|s| s.content.owner().is_some())
            .map(|s| s.start)
    }

    /// True once no forced idle slot is left.
    pub fn is_filled(&self) -> bool {
        self.rows.iter().flatten().all(|s| !s.content.is_idle())
    }

    /// Where `id` with window `w` can go: its own reserved idle slot if the
    /// grid has one for it, otherwise the first padding slot containing `w`.
    pub fn find_slot(&self, id: &TaskId, w: &TimeWindow) -> Option<SlotRef> {
        if let Some(at) = self.slot_of(id) {
            let slot = self.slot(at);
            return (slot.content.is_idle() && slot.window().contains(w)).then_some(at);
        }
        self.slots()
            .find(|(_, s)| s.content == SlotContent::PADDING && s.window().contains(w))
            .map(|(at, _)| at)
    }

    /// Puts `id` into the idle slot `at` over window `w`, leaving padding
    /// before and after it.
    pub fn fill(&mut self, at: SlotRef, id: TaskId, w: TimeWindow) -> Result<(), GridError> {
        let unavailable = GridError::SlotUnavailable {
            row: at.row,
            slot: at.slot,
            window: w,
        };
        let slot = self
            .rows
            .get(at.row)
            .and_then(|r| r.get(at.slot))
            .ok_or_else(|| unavailable.clone())?;
        if !slot.content.is_idle() || !slot.window().contains(&w) || !w.is_bounded() {
            return Err(unavailable);
        }
        let pieces = split_idle(slot, id, &w);
        self.rows[at.row].splice(at.slot..=at.slot, pieces);
        Ok(())
    }

    /// Plain-text dump, one row per line: `[a,b:id]` or `[a,b:IDLE]`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(out, "{}", line.join(" ")).expect("write to string");
        }
        out
    }

    /// Reads a dump back. Idle slots come back as unreserved padding.
    pub fn parse_dump(text: &str) -> Result<Grid, GridError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let err = |message: String| GridError::Dump {
                line: i + 1,
                message,
            };
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for token in line.split_whitespace() {
                let inner = token
                    .strip_prefix('[')
                    .and_then(|t| t.strip_suffix(']'))
                    .ok_or_else(|| err(format!("slot `{token}` is not bracketed")))?;
                let (span, name) = inner
                    .split_once(':')
                    .ok_or_else(|| err(format!("slot `{token}` has no `:`")))?;
                let (a, b) = span
                    .split_once(',')
                    .ok_or_else(|| err(format!("slot `{token}` has no `,`")))?;
                let a: Time = a.parse().map_err(|e| err(format!("{e}")))?;
                let b: Time = b.parse().map_err(|e| err(format!("{e}")))?;
                let window = TimeWindow::bounded(a, b).map_err(|e| err(e.to_string()))?;
                let content = if name == IDLE_TOKEN {
                    SlotContent::PADDING
                } else {
                    SlotContent::Task(TaskId::new(name).map_err(|e| err(e.to_string()))?)
                };
                row.push(GridSlot::new(window, content));
            }
            rows.push(row);
        }
        Grid::new(rows)
    }
}

fn split_idle(slot: &GridSlot, id: TaskId, w: &TimeWindow) -> Vec<GridSlot> {
    let w_end = slot.start.max(w.start()) + w.length().expect("bounded");
    let mut pieces = Vec::with_capacity(3);
    if slot.start < w.start() {
        pieces.push(GridSlot {
            start: slot.start,
            end: w.start(),
            content: SlotContent::PADDING,
        });
    }
    pieces.push(GridSlot {
        start: w.start(),
        end: w_end,
        content: SlotContent::Task(id),
    });
    if w_end < slot.end {
        pieces.push(GridSlot {
            start: w_end,
            end: slot.end,
            content: SlotContent::PADDING,
        });
    }
    pieces
}

/// `(a, b)` of a grid: smallest earliest start and largest deadline.
pub fn grid_window(g: &Grid) -> TimeWindow {
    g.window()
}

/// Same shape and window, with every task except `id` replaced by a forced
/// idle slot reserved for it.
pub fn mask(g: &Grid, id: &TaskId) -> Result<Grid, GridError> {
    if g.slot_of(id).is_none() {
        return Err(GridError::TaskNotInGrid(id.clone()));
    }
    let mut out = g.clone();
    for slot in out.rows.iter_mut().flatten() {
        slot.content = match slot.content.owner() {
            Some(owner) if owner == id => SlotContent::Task(owner.clone()),
            Some(owner) => SlotContent::ForcedIdle {
                reserved_for: Some(owner.clone()),
            },
            None => SlotContent::PADDING,
        };
    }
    Ok(out)
}

/// Whether `g` can take `id` with window `w`.
pub fn accepts(g: &Grid, id: &TaskId, w: &TimeWindow) -> bool {
    g.find_slot(id, w).is_some()
}

/// Largest count of non-idle entries before the first idle over all
/// streams; `None` marks an idle entry.
pub fn compute_mnst<T>(streams: &[Vec<Option<T>>]) -> usize {
    let mut best = 0;
    for stream in streams {
        for (k, entry) in stream.iter().enumerate() {
            let next_idle = stream.get(k + 1).is_none_or(Option::is_none);
            if entry.is_some() && next_idle {
                best = best.max(k + 1);
            }
        }
    }
    best
}

/// `k | NT`. Otherwise `NT mod k` streams stay idle whenever the grid is
/// replicated across all streams.
pub fn divisibility_ok(rows: usize, streams: usize) -> bool {
    assert!(rows >= 1, "a grid has at least one row");
    streams.is_multiple_of(rows)
}

pub fn always_idle_streams(rows: usize, streams: usize) -> usize {
    assert!(rows >= 1, "a grid has at least one row");
    streams % rows
}

struct Builder<'a> {
    tasks: &'a TaskSet,
    rows: Vec<Vec<(TaskId, TimeWindow)>>,
    streams: usize,
}

impl Builder<'_> {
    fn fits(&self, row: usize, id: &TaskId, w: &TimeWindow) -> bool {
        self.rows[row].iter().all(|(other, ow)| {
            !ow.overlaps(w) && self.tasks.parallel_or_serial(id, other) == ParallelSerial::Serial
        })
    }

    fn deadline(&self, row: usize) -> Time {
        self.rows[row]
            .last()
            .map(|(_, w)| slot_end(w))
            .unwrap_or(Time::ZERO)
    }

    fn load(&self, row: usize) -> Time {
        self.rows[row]
            .iter()
            .map(|(_, w)| w.length().expect("bounded"))
            .sum()
    }

    fn insert(&mut self, row: usize, id: TaskId, w: TimeWindow) {
        let r = &mut self.rows[row];
        let pos = r.partition_point(|(_, x)| x.start() <= w.start());
        r.insert(pos, (id, w));
    }

    fn open_row(&mut self, id: TaskId, w: TimeWindow) -> Result<usize, GridError> {
        if self.rows.len() >= self.streams {
            return Err(GridError::SystemUnsuitable {
                rows: self.rows.len() + 1,
                streams: self.streams,
            });
        }
        self.rows.push(vec![(id, w)]);
        Ok(self.rows.len() - 1)
    }

    fn window(&self) -> (Time, Time) {
        let all = self.rows.iter().flatten();
        let a = all
            .clone()
            .map(|(_, w)| w.start())
            .min()
            .unwrap_or(Time::ZERO);
        let b = all.map(|(_, w)| slot_end(w)).max().unwrap_or(Time::ZERO);
        (a, b)
    }

    /// Idle stretches of `row` inside `[a, b]`.
    fn gaps(&self, row: usize, a: Time, b: Time) -> Vec<TimeWindow> {
        let mut out = Vec::new();
        let mut cursor = a;
        for (_, w) in &self.rows[row] {
            if w.start() > cursor {
                out.push(TimeWindow::bounded(cursor, w.start()).expect("ordered"));
            }
            cursor = cursor.max(slot_end(w));
        }
        if cursor < b {
            out.push(TimeWindow::bounded(cursor, b).expect("ordered"));
        }
        out
    }
}

fn slot_end(w: &TimeWindow) -> Time {
    w.start() + w.length().expect("bounded")
}

/// Builds the grid for `batch` and packs `backlog` around it.
///
/// `capacities` lists the stream count of every robot; the grid may use at
/// most their sum as rows.
pub fn build_grid(
    tasks: &TaskSet,
    batch: &[TaskId],
    backlog: &[TaskId],
    capacities: &[usize],
) -> Result<Grid, GridError> {
    if batch.is_empty() {
        return Err(GridError::EmptyBatch);
    }
    let mut seen = BTreeSet::new();
    for id in batch.iter().chain(backlog) {
        tasks.task(id)?;
        if !seen.insert(id) {
            return Err(GridError::DuplicateTask(id.clone()));
        }
    }
    for id in batch.iter().chain(backlog) {
        let k = tasks.equal_class_size(id);
        if k >= 2 && !crate::task_graph::system_compatible(capacities, k) {
            return Err(TaskError::Incompatible {
                class_size: k,
                max_streams: capacities.iter().copied().max().unwrap_or(0),
            }
            .into());
        }
    }

    let occupied = |id: &TaskId| tasks.get(id).expect("checked").occupied();
    let mut b = Builder {
        tasks,
        rows: Vec::new(),
        streams: capacities.iter().sum(),
    };

    let mut remaining: Vec<(TaskId, TimeWindow)> =
        batch.iter().map(|id| (id.clone(), occupied(id))).collect();
    remaining.sort_by(|(x, wx), (y, wy)| {
        (wx.start(), slot_end(wx), x).cmp(&(wy.start(), slot_end(wy), y))
    });

    let mut first = true;
    while !remaining.is_empty() {
        // The earliest-starting task has no remaining predecessor.
        let (lead, lead_w) = remaining.remove(0);
        let mut partners: Vec<(TaskId, TimeWindow)> = Vec::new();
        remaining.retain(|(id, w)| {
            let parallel = tasks.parallel_or_serial(&lead, id) == ParallelSerial::Parallel;
            if parallel {
                partners.push((id.clone(), *w));
            }
            !parallel
        });
        partners.sort_by(|(x, wx), (y, wy)| {
            (slot_end(wx), wx.start(), x).cmp(&(slot_end(wy), wy.start(), y))
        });

        let group = std::iter::once((lead, lead_w)).chain(partners);
        if first {
            for (id, w) in group {
                b.open_row(id, w)?;
            }
            first = false;
            continue;
        }
        let mut used = BTreeSet::new();
        for (id, w) in group {
            let row = (0..b.rows.len())
                .filter(|r| !used.contains(r) && b.fits(*r, &id, &w))
                .min_by_key(|r| (b.deadline(*r), *r));
            let row = match row {
                Some(r) => {
                    b.insert(r, id, w);
                    r
                }
                None => b.open_row(id, w)?,
            };
            used.insert(row);
        }
    }

    // Backlog: largest first, each into an idle gap if one holds it, else by
    // the balancing rule over row loads.
    let mut backlog: Vec<(TaskId, TimeWindow)> = backlog
        .iter()
        .map(|id| (id.clone(), occupied(id)))
        .collect();
    backlog.sort_by(|(x, wx), (y, wy)| (Reverse(wx.length()), x).cmp(&(Reverse(wy.length()), y)));
    for (id, w) in backlog {
        let (a, end) = b.window();
        let span = w.length().expect("bounded");
        let in_gap = (0..b.rows.len())
            .filter(|r| b.fits(*r, &id, &w) && b.gaps(*r, a, end).iter().any(|g| g.contains(&w)))
            .min_by_key(|r| (b.load(*r), *r));
        if let Some(r) = in_gap {
            b.insert(r, id, w);
            continue;
        }
        let best = (0..b.rows.len())
            .filter(|r| b.fits(*r, &id, &w))
            .min_by_key(|r| (b.load(*r), *r));
        let loads: Vec<Time> = (0..b.rows.len()).map(|r| b.load(r)).collect();
        let new_row_better = |row: usize| {
            let mut existing = loads.clone();
            existing[row] += span;
            let mut extended = loads.clone();
            extended.push(span);
            // Compare variances with different place counts exactly:
            // sv(x)/m² against sv(y)/(m+1)².
            let m = loads.len() as i128;
            scaled_variance(&extended) * m * m < scaled_variance(&existing) * (m + 1) * (m + 1)
        };
        match best {
            Some(r) if b.rows.len() >= b.streams || !new_row_better(r) => b.insert(r, id, w),
            _ => {
                b.open_row(id, w)?;
            }
        }
    }

    let (a, end) = b.window();
    let mut order: Vec<usize> = (0..b.rows.len()).collect();
    order.sort_by_key(|r| {
        let row = &b.rows[*r];
        (row[0].1.start(), b.deadline(*r), *r)
    });
    let rows = order
        .into_iter()
        .map(|r| {
            let gaps = b.gaps(r, a, end);
            let mut slots: Vec<GridSlot> = b.rows[r]
                .iter()
                .map(|(id, w)| GridSlot::task(id.clone(), *w))
                .chain(gaps.into_iter().map(GridSlot::idle))
                .collect();
            slots.sort_by_key(|s| s.start);
            slots
        })
        .collect();
    Grid::new(rows)
}
