//! Iterating a map from a start point.

use std::collections::HashMap;

use crate::cone::LatticeVector;
use crate::error::{Error, Result};
use crate::exact::{format_rational, round_sig, to_f64, Rational};
use crate::map::IntegerMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    FixedPoint,
    /// The state repeats the one `period` steps earlier.
    Cycle { period: usize },
    DomainExit { reason: String },
}

impl Event {
    pub fn label(&self) -> String {
        match self {
            Event::FixedPoint => "fixed_point".into(),
            Event::Cycle { period } => format!("cycle:{period}"),
            Event::DomainExit { reason } => format!("domain_exit:{reason}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub state: LatticeVector,
    pub l1: u64,
    /// `‖x(n)/‖x(n)‖₁ − x(n−1)/‖x(n−1)‖₁‖₂`, when both states are nonzero.
    pub direction_change: Option<f64>,
    /// AIMD increase duration that produced this state.
    pub t: Option<Rational>,
    pub event: Option<Event>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub d: usize,
    pub rows: Vec<TrajectoryRow>,
    /// Set when the map could not be applied to the last state.
    pub exit: Option<Event>,
    pub with_t: bool,
}

fn direction_change(prev: &LatticeVector, next: &LatticeVector) -> Option<f64> {
    if prev.is_zero() || next.is_zero() {
        return None;
    }
    let diff = prev.normalized().abs_diff(&next.normalized());
    Some(to_f64(&diff.l2_squared()).sqrt())
}

/// Runs `steps` iterations of `map` from `x0`. Repeated states are flagged
/// but do not stop the run; leaving the domain does.
pub fn simulate(map: &IntegerMap, x0: &LatticeVector, steps: usize) -> Result<Trajectory> {
    if x0.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: x0.dim(),
        });
    }
    let with_t = matches!(map, IntegerMap::Aimd(_));
    let mut rows = vec![TrajectoryRow {
        step: 0,
        state: x0.clone(),
        l1: x0.l1(),
        direction_change: None,
        t: None,
        event: None,
    }];
    let mut last_seen: HashMap<LatticeVector, usize> = HashMap::from([(x0.clone(), 0)]);
    let mut exit = None;
    for step in 1..=steps {
        let current = &rows.last().expect("nonempty").state;
        let result = match map {
            IntegerMap::Aimd(m) => m.step(current).map(|s| (s.next, Some(s.t))),
            _ => map.evaluate(current).map(|v| (v, None)),
        };
        let (next, t) = match result {
            Ok(v) => v,
            Err(e @ (Error::Domain { .. }
            | Error::InfeasibleStep { .. }
            | Error::UnboundedStep { .. }
            | Error::Overflow(_))) => {
                exit = Some(Event::DomainExit {
                    reason: e.to_string(),
                });
                break;
            }
            Err(e) => return Err(e),
        };
        let event = if &next == current {
            Some(Event::FixedPoint)
        } else {
            last_seen
                .get(&next)
                .map(|&earlier| Event::Cycle { period: step - earlier })
        };
        last_seen.insert(next.clone(), step);
        rows.push(TrajectoryRow {
            step,
            direction_change: direction_change(current, &next),
            l1: next.l1(),
            state: next,
            t,
            event,
        });
    }
    Ok(Trajectory {
        d: map.dim(),
        rows,
        exit,
        with_t,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Trajectory {
    /// `step,x1,…,xd,l1norm,direction_change[,t],events`.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["step".to_string()];
        header.extend((1..=self.d).map(|i| format!("x{i}")));
        header.extend(["l1norm".into(), "direction_change".into()]);
        if self.with_t {
            header.push("t".into());
        }
        header.push("events".into());
        let mut out = header.join(",") + "\n";
        let last = self.rows.len() - 1;
        for (n, row) in self.rows.iter().enumerate() {
            let mut fields = vec![row.step.to_string()];
            fields.extend(row.state.entries().iter().map(u64::to_string));
            fields.push(row.l1.to_string());
            fields.push(
                row.direction_change
                    .map(|v| round_sig(v, 12).to_string())
                    .unwrap_or_default(),
            );
            if self.with_t {
                fields.push(row.t.as_ref().map(format_rational).unwrap_or_default());
            }
            let mut events: Vec<String> = row.event.iter().map(Event::label).collect();
            if n == last {
                events.extend(self.exit.iter().map(Event::label));
            }
            fields.push(csv_field(&events.join(";")));
            out += &fields.join(",");
            out.push('\n');
        }
        out
    }
}
