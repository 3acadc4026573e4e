//! Time windows and the eight pairwise window relations.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::time::Time;

/// Latest finish of a window; `Unbounded` sorts after every finite time.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Finish {
    At(Time),
    Unbounded,
}

impl Finish {
    pub fn finite(self) -> Option<Time> {
        match self {
            Finish::At(t) => Some(t),
            Finish::Unbounded => None,
        }
    }
}

impl From<Time> for Finish {
    fn from(t: Time) -> Self {
        Finish::At(t)
    }
}

impl fmt::Display for Finish {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finish::At(t) => t.fmt(f),
            Finish::Unbounded => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WindowError {
    #[error("window start {0} is negative")]
    NegativeStart(Time),
    #[error("window start {start} is after its finish {finish}")]
    Inverted { start: Time, finish: Time },
}

/// Half-open interval `[start, finish)`: earliest start and latest finish.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct TimeWindow {
    start: Time,
    finish: Finish,
}

impl TimeWindow {
    pub fn new(start: Time, finish: Finish) -> Result<Self, WindowError> {
        if start.is_negative() {
            return Err(WindowError::NegativeStart(start));
        }
        if let Finish::At(end) = finish {
            if end < start {
                return Err(WindowError::Inverted { start, finish: end });
            }
        }
        Ok(TimeWindow { start, finish })
    }

    pub fn bounded(start: Time, finish: Time) -> Result<Self, WindowError> {
        Self::new(start, Finish::At(finish))
    }

    pub fn unbounded(start: Time) -> Result<Self, WindowError> {
        Self::new(start, Finish::Unbounded)
    }

    /// Whole-second constructor for tests and examples. Panics on an invalid window.
    pub fn secs(start: i64, finish: i64) -> Self {
        Self::bounded(Time::from_secs(start), Time::from_secs(finish)).expect("valid window")
    }

    pub fn start(&self) -> Time {
        self.start
    }

    pub fn finish(&self) -> Finish {
        self.finish
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.finish, Finish::At(_))
    }

    /// Length of a bounded window.
    pub fn length(&self) -> Option<Time> {
        self.finish.finite().map(|end| end - self.start)
    }

    /// `other` lies entirely inside `self`.
    pub fn contains(&self, other: &TimeWindow) -> bool {
        self.start <= other.start && other.finish <= self.finish
    }

    /// The interiors intersect. Touching endpoints do not overlap.
    pub fn overlaps(&self, other: &TimeWindow) -> bool {
        Finish::At(self.start) < other.finish && Finish::At(other.start) < self.finish
    }

    /// Translates the window; the result must start at or after zero.
    pub fn shifted(&self, by: Time) -> Result<TimeWindow, WindowError> {
        let finish = match self.finish {
            Finish::At(t) => Finish::At(t + by),
            Finish::Unbounded => Finish::Unbounded,
        };
        TimeWindow::new(self.start + by, finish)
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.finish)
    }
}

/// The eight relation kinds between two task windows.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    /// `a2 > b1`
    Before,
    /// `a2 = b1`
    Meets,
    /// `a1 > a2` and `b1 < b2`
    During,
    /// `a1 = a2` and `b1 < b2`
    StartsWith,
    /// `a1 < a2` and `b1 = b2`
    FinishesWith,
    /// `a1 = a2` and `b1 = b2`
    Equals,
    /// `a1 < a2 < b1 < b2`
    Overlaps,
    /// No ordering requirement; declared, never derived from geometry.
    Unconstrained,
}

impl RelationKind {
    pub const ALL: [RelationKind; 8] = [
        RelationKind::Before,
        RelationKind::Meets,
        RelationKind::During,
        RelationKind::StartsWith,
        RelationKind::FinishesWith,
        RelationKind::Equals,
        RelationKind::Overlaps,
        RelationKind::Unconstrained,
    ];

    /// The seven kinds with a geometric definition.
    pub const GEOMETRIC: [RelationKind; 7] = [
        RelationKind::Before,
        RelationKind::Meets,
        RelationKind::During,
        RelationKind::StartsWith,
        RelationKind::FinishesWith,
        RelationKind::Equals,
        RelationKind::Overlaps,
    ];

    // Equality patterns first: on zero-length windows they coincide with
    // limits of the strict patterns and must take precedence.
    const PRECEDENCE: [RelationKind; 7] = [
        RelationKind::Equals,
        RelationKind::StartsWith,
        RelationKind::FinishesWith,
        RelationKind::Meets,
        RelationKind::Before,
        RelationKind::During,
        RelationKind::Overlaps,
    ];

    pub fn is_symmetric(self) -> bool {
        matches!(self, RelationKind::Equals | RelationKind::Unconstrained)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelationKind::Before => "<",
            RelationKind::Meets => "∧",
            RelationKind::During => "⇒",
            RelationKind::StartsWith => "⊢",
            RelationKind::FinishesWith => "⊣",
            RelationKind::Equals => "=",
            RelationKind::Overlaps => "∨",
            RelationKind::Unconstrained => "≀",
        }
    }

    /// Raw defining inequality for the ordered pair `(w1, w2)`.
    /// `Unconstrained` has no geometric definition and never holds.
    pub fn holds(self, w1: &TimeWindow, w2: &TimeWindow) -> bool {
        let (a1, b1) = (Finish::At(w1.start), w1.finish);
        let (a2, b2) = (Finish::At(w2.start), w2.finish);
        match self {
            RelationKind::Before => a2 > b1,
            RelationKind::Meets => a2 == b1,
            RelationKind::During => a1 > a2 && b1 < b2,
            RelationKind::StartsWith => a1 == a2 && b1 < b2,
            RelationKind::FinishesWith => a1 < a2 && b1 == b2,
            RelationKind::Equals => a1 == a2 && b1 == b2,
            RelationKind::Overlaps => a1 < a2 && a2 < b1 && b1 < b2,
            RelationKind::Unconstrained => false,
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A relation kind together with the direction in which it holds.
///
/// `swapped == false` reads `w1 kind w2`; `swapped == true` reads `w2 kind w1`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrientedRelation {
    pub kind: RelationKind,
    pub swapped: bool,
}

impl OrientedRelation {
    pub const UNCONSTRAINED: OrientedRelation = OrientedRelation {
        kind: RelationKind::Unconstrained,
        swapped: false,
    };

    pub fn forward(kind: RelationKind) -> Self {
        OrientedRelation {
            kind,
            swapped: false,
        }
    }

    /// Normalizes `swapped` to false for the symmetric kinds.
    pub fn new(kind: RelationKind, swapped: bool) -> Self {
        OrientedRelation {
            kind,
            swapped: swapped && !kind.is_symmetric(),
        }
    }

    /// The same relation read from the other side of the pair.
    pub fn reversed(self) -> Self {
        Self::new(self.kind, !self.swapped)
    }

    /// Checks the relation against a concrete pair of windows.
    pub fn holds(self, w1: &TimeWindow, w2: &TimeWindow) -> bool {
        if self.swapped {
            self.kind.holds(w2, w1)
        } else {
            self.kind.holds(w1, w2)
        }
    }
}

impl fmt::Display for OrientedRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.swapped {
            write!(f, "{}⁻¹", self.kind)
        } else {
            write!(f, "{}", self.kind)
        }
    }
}

/// Classifies an ordered pair of windows into exactly one oriented relation.
pub fn classify(w1: &TimeWindow, w2: &TimeWindow) -> OrientedRelation {
    for kind in RelationKind::PRECEDENCE {
        if kind.holds(w1, w2) {
            return OrientedRelation::forward(kind);
        }
        if !kind.is_symmetric() && kind.holds(w2, w1) {
            return OrientedRelation::new(kind, true);
        }
    }
    OrientedRelation::UNCONSTRAINED
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionMember<K> {
    pub key: K,
    pub swapped: bool,
}

/// Relation classes of a set of items around one reference item.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationPartition<K> {
    classes: BTreeMap<RelationKind, Vec<PartitionMember<K>>>,
}

impl<K> RelationPartition<K> {
    pub fn class(&self, kind: RelationKind) -> &[PartitionMember<K>] {
        self.classes.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Non-empty classes in `RelationKind` order.
    pub fn iter(&self) -> impl Iterator<Item = (RelationKind, &[PartitionMember<K>])> {
        self.classes.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.classes.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Splits `items` into relation classes relative to `reference`.
///
/// Each item is `(key, window, constrained)`. Items not declared constrained
/// with the reference land in `Unconstrained` whatever their windows. An item
/// whose key equals the reference key is skipped.
pub fn relation_partition<K, I>(reference: (&K, &TimeWindow), items: I) -> RelationPartition<K>
where
    K: Ord,
    I: IntoIterator<Item = (K, TimeWindow, bool)>,
{
    let (ref_key, ref_window) = reference;
    let mut classes: BTreeMap<RelationKind, Vec<PartitionMember<K>>> = BTreeMap::new();
    for (key, window, constrained) in items {
        if key.cmp(ref_key) == Ordering::Equal {
            continue;
        }
        let rel = if constrained {
            classify(ref_window, &window)
        } else {
            OrientedRelation::UNCONSTRAINED
        };
        classes.entry(rel.kind).or_default().push(PartitionMember {
            key,
            swapped: rel.swapped,
        });
    }
    RelationPartition { classes }
}
