//! Line-oriented task records.
//!
//! ```text
//! # comment
//! task <id> [window=<start>,<finish|inf>] exec=<seconds> [rel=<kind>:<partner>]...
//! ```
//!
//! Times are decimal seconds with at most three fractional digits. An empty
//! start means `0` and an empty finish means `inf`; a missing `window` field
//! means `[0,inf]`. `rel` reads from the record's task towards the partner:
//! `rel=before:b` on task `a` declares `a < b`.
//!
//! | token | relation | token | relation |
//! |-------|----------|-------|----------|
//! | `before` | `a < b` | `after` | `b < a` |
//! | `meets` | `a ∧ b` | `met-by` | `b ∧ a` |
//! | `during` | `a ⇒ b` | `contains` | `b ⇒ a` |
//! | `starts` | `a ⊢ b` | `started-by` | `b ⊢ a` |
//! | `finishes` | `a ⊣ b` | `finished-by` | `b ⊣ a` |
//! | `overlaps` | `a ∨ b` | `overlapped-by` | `b ∨ a` |
//! | `equals` | `a = b` | `independent` | `a ≀ b` |

use std::fmt::Write as _;

use thiserror::Error;

use super::{Task, TaskError, TaskId, TaskSet};
use crate::time::Time;
use crate::time_windows::{Finish, OrientedRelation, RelationKind, TimeWindow};

/// One parsed `task` line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskRecord {
    pub id: TaskId,
    pub window: TimeWindow,
    pub exec: Time,
    pub relations: Vec<(OrientedRelation, TaskId)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

const TOKENS: [(&str, RelationKind, bool); 13] = [
    ("before", RelationKind::Before, false),
    ("after", RelationKind::Before, true),
    ("meets", RelationKind::Meets, false),
    ("met-by", RelationKind::Meets, true),
    ("during", RelationKind::During, false),
    ("contains", RelationKind::During, true),
    ("starts", RelationKind::StartsWith, false),
    ("started-by", RelationKind::StartsWith, true),
    ("finishes", RelationKind::FinishesWith, false),
    ("finished-by", RelationKind::FinishesWith, true),
    ("overlaps", RelationKind::Overlaps, false),
    ("overlapped-by", RelationKind::Overlaps, true),
    ("equals", RelationKind::Equals, false),
];

/// Record token for an oriented relation.
pub fn relation_token(rel: OrientedRelation) -> &'static str {
    if rel.kind == RelationKind::Unconstrained {
        return "independent";
    }
    TOKENS
        .iter()
        .find(|(_, k, s)| *k == rel.kind && *s == (rel.swapped && !rel.kind.is_symmetric()))
        .map(|(t, _, _)| *t)
        .expect("every kind has a token")
}

fn parse_relation_token(s: &str) -> Option<OrientedRelation> {
    if s == "independent" {
        return Some(OrientedRelation::UNCONSTRAINED);
    }
    TOKENS
        .iter()
        .find(|(t, _, _)| *t == s)
        .map(|(_, k, swapped)| OrientedRelation::new(*k, *swapped))
}

fn parse_window(value: &str) -> Result<TimeWindow, String> {
    let (start, finish) = value
        .split_once(',')
        .ok_or_else(|| format!("window `{value}` must be <start>,<finish>"))?;
    let start = if start.is_empty() {
        Time::ZERO
    } else {
        start.parse::<Time>().map_err(|e| e.to_string())?
    };
    let finish = match finish {
        "" | "inf" => Finish::Unbounded,
        f => Finish::At(f.parse::<Time>().map_err(|e| e.to_string())?),
    };
    TimeWindow::new(start, finish).map_err(|e| e.to_string())
}

fn parse_line(line: &str) -> Result<Option<TaskRecord>, String> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let mut fields = line.split_whitespace();
    match fields.next() {
        Some("task") => {}
        Some(other) => return Err(format!("expected `task`, found `{other}`")),
        None => return Ok(None),
    }
    let id = fields.next().ok_or("missing task id")?;
    let id = TaskId::new(id).map_err(|e| e.to_string())?;

    let mut window = None;
    let mut exec = None;
    let mut relations = Vec::new();
    for field in fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| format!("field `{field}` is not key=value"))?;
        match key {
            "window" => {
                if window.replace(parse_window(value)?).is_some() {
                    return Err("duplicate `window` field".into());
                }
            }
            "exec" => {
                let t = value.parse::<Time>().map_err(|e| e.to_string())?;
                if exec.replace(t).is_some() {
                    return Err("duplicate `exec` field".into());
                }
            }
            "rel" => {
                let (kind, partner) = value
                    .split_once(':')
                    .ok_or_else(|| format!("relation `{value}` must be <kind>:<partner>"))?;
                let rel = parse_relation_token(kind)
                    .ok_or_else(|| format!("unknown relation kind `{kind}`"))?;
                let partner = TaskId::new(partner).map_err(|e| e.to_string())?;
                relations.push((rel, partner));
            }
            other => return Err(format!("unknown field `{other}`")),
        }
    }
    let exec = exec.ok_or("missing `exec` field")?;
    let window = match window {
        Some(w) => w,
        None => TimeWindow::unbounded(Time::ZERO).expect("valid"),
    };
    Ok(Some(TaskRecord {
        id,
        window,
        exec,
        relations,
    }))
}

/// Parses task records; blank lines and `#` comments are skipped.
pub fn parse_tasks(input: &str) -> Result<Vec<TaskRecord>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        match parse_line(line) {
            Ok(Some(rec)) => out.push(rec),
            Ok(None) => {}
            Err(message) => {
                return Err(ParseError {
                    line: i + 1,
                    message,
                })
            }
        }
    }
    Ok(out)
}

/// Canonical text form; `parse_tasks` reads it back unchanged.
pub fn format_tasks(records: &[TaskRecord]) -> String {
    let mut out = String::new();
    for r in records {
        write!(
            out,
            "task {} window={},{} exec={}",
            r.id,
            r.window.start(),
            r.window.finish(),
            r.exec
        )
        .expect("write to string");
        for (rel, partner) in &r.relations {
            write!(out, " rel={}:{}", relation_token(*rel), partner).expect("write to string");
        }
        out.push('\n');
    }
    out
}

impl TaskSet {
    /// Builds and validates a task set from parsed records.
    pub fn from_records(records: &[TaskRecord]) -> Result<TaskSet, TaskError> {
        let mut builder = TaskSet::builder();
        for r in records {
            builder.add(Task::new(r.id.clone(), r.window, r.exec)?);
        }
        for r in records {
            for (rel, partner) in &r.relations {
                builder.relate(&r.id, *rel, partner);
            }
        }
        builder.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAMPLE: &str = "\
# two equal tasks followed by a third
task a window=0,5 exec=3 rel=equals:b rel=meets:c
task b window=0,5 exec=4.5
task c window=5,9 exec=2
task d window=,12 exec=1
task e window=3, exec=2 rel=independent:a
task f exec=7
";

    #[test]
    fn parses_sample() {
        let recs = parse_tasks(SAMPLE).unwrap();
        assert_eq!(recs.len(), 6);
        assert_eq!(recs[0].relations.len(), 2);
        assert_eq!(recs[1].exec, Time::from_millis(4500));
        assert_eq!(recs[3].window, TimeWindow::secs(0, 12));
        assert_eq!(recs[4].window.finish(), Finish::Unbounded);
        assert_eq!(recs[5].window, TimeWindow::unbounded(Time::ZERO).unwrap());

        let set = TaskSet::from_records(&recs).unwrap();
        let a = TaskId::new("a").unwrap();
        let c = TaskId::new("c").unwrap();
        let e = TaskId::new("e").unwrap();
        assert_eq!(
            set.relation(&c, &a),
            OrientedRelation::new(RelationKind::Meets, true)
        );
        assert_eq!(set.relation(&a, &e).kind, RelationKind::Unconstrained);
        assert_eq!(set.equal_class_size(&a), 2);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_tasks("task a exec=1\n\ntask b exec=x\n").unwrap_err();
        assert_eq!(err.line, 3);
        for bad in [
            "job a exec=1",
            "task",
            "task a",
            "task a exec=1 exec=2",
            "task a exec=1 window=5",
            "task a exec=1 window=5,2",
            "task a exec=1 rel=before",
            "task a exec=1 rel=sideways:b",
            "task a exec=1 colour=red",
            "task a exec=1 stray",
            "task IDLE exec=1",
        ] {
            assert!(parse_tasks(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn every_token_round_trips() {
        for (token, kind, swapped) in TOKENS {
            let rel = OrientedRelation::new(kind, swapped);
            assert_eq!(relation_token(rel), token);
            assert_eq!(parse_relation_token(token), Some(rel));
        }
    }

    fn record_strategy() -> impl Strategy<Value = TaskRecord> {
        let kinds = prop::sample::select(
            TOKENS
                .iter()
                .map(|(_, k, s)| OrientedRelation::new(*k, *s))
                .chain(std::iter::once(OrientedRelation::UNCONSTRAINED))
                .collect::<Vec<_>>(),
        );
        (
            "[a-z][a-z0-9_.-]{0,6}",
            0i64..100_000,
            prop::option::of(0i64..100_000),
            1i64..50_000,
            prop::collection::vec((kinds, "[A-Z][a-z0-9]{0,4}"), 0..4),
        )
            .prop_map(|(id, start, len, exec, rels)| {
                let start = Time::from_millis(start);
                let window = match len {
                    Some(l) => TimeWindow::bounded(start, start + Time::from_millis(l)).unwrap(),
                    None => TimeWindow::unbounded(start).unwrap(),
                };
                TaskRecord {
                    id: TaskId::new(id).unwrap(),
                    window,
                    exec: Time::from_millis(exec),
                    relations: rels
                        .into_iter()
                        .map(|(r, p)| (r, TaskId::new(p).unwrap()))
                        .collect(),
                }
            })
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(recs in prop::collection::vec(record_strategy(), 0..6)) {
            let text = format_tasks(&recs);
            prop_assert_eq!(parse_tasks(&text).unwrap(), recs);
        }

        #[test]
        fn parser_never_panics(input in "\\PC{0,200}") {
            let _ = parse_tasks(&input);
        }
    }
}
