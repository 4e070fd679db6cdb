//! Slot queries, per-window verdicts and committing a chosen slot.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::ans::Move;
use crate::model::{ModelError, Order, OrderId, Schedule, WindowId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("order {0} is already scheduled")]
    AlreadyScheduled(OrderId),
    #[error("the schedule is not feasible")]
    InfeasibleSchedule,
    #[error("order {0} is unknown to the travel time provider")]
    NoTravel(OrderId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommitError {
    #[error("witness does not replay to a feasible schedule: {0}")]
    Replay(String),
    #[error("window {0} has no witness to commit")]
    NotAvailable(WindowId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Simple,
    Tsptw,
    Ans,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Simple, Method::Tsptw, Method::Ans];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Simple => "simple",
            Method::Tsptw => "tsptw",
            Method::Ans => "ans",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "simple" => Ok(Method::Simple),
            "tsptw" => Ok(Method::Tsptw),
            "ans" => Ok(Method::Ans),
            other => Err(format!("unknown method `{other}` (simple, tsptw, ans)")),
        }
    }
}

/// A prospective order and the windows to test it against.
#[derive(Clone, Debug)]
pub struct SlotQuery<'s> {
    pub schedule: &'s Schedule,
    pub candidate: Order,
    pub windows: Vec<WindowId>,
}

impl<'s> SlotQuery<'s> {
    /// Queries every window of the schedule's window set.
    pub fn new(schedule: &'s Schedule, candidate: Order) -> Result<Self, QueryError> {
        let windows = schedule.context().windows().ids().collect();
        Self::with_windows(schedule, candidate, windows)
    }

    pub fn with_windows(
        schedule: &'s Schedule,
        candidate: Order,
        windows: Vec<WindowId>,
    ) -> Result<Self, QueryError> {
        let ctx = schedule.context();
        candidate.validate(ctx.windows())?;
        if ctx.contains(candidate.id) {
            return Err(QueryError::AlreadyScheduled(candidate.id));
        }
        if !ctx.travel_provider().covers(&candidate) {
            return Err(QueryError::NoTravel(candidate.id));
        }
        for w in &windows {
            ctx.window(*w)?;
        }
        if !schedule.is_feasible() {
            return Err(QueryError::InfeasibleSchedule);
        }
        Ok(SlotQuery {
            schedule,
            candidate,
            windows,
        })
    }
}

/// How an available window can be realized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Insert after `position` of `tour`, nothing else changes.
    Position { tour: usize, position: usize },
    /// Resequence `tour` to `visits` (which include the candidate).
    Sequence { tour: usize, visits: Vec<OrderId> },
    /// Apply `moves` in order, then insert after `position` of `tour`.
    Moves {
        tour: usize,
        moves: Vec<Move>,
        position: usize,
    },
}

impl Witness {
    pub fn tour(&self) -> usize {
        match self {
            Witness::Position { tour, .. }
            | Witness::Sequence { tour, .. }
            | Witness::Moves { tour, .. } => *tour,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Available(Witness),
    Unavailable,
    /// No tour accepted the window and at least one tour could not be
    /// decided (search limits). Treated as unavailable.
    Undecided(String),
}

#[derive(Clone, Debug)]
pub struct WindowOutcome {
    pub window: WindowId,
    pub verdict: Verdict,
    pub elapsed: Duration,
}

impl WindowOutcome {
    pub fn is_available(&self) -> bool {
        matches!(self.verdict, Verdict::Available(_))
    }
}

#[derive(Clone, Debug)]
pub struct SlotResult {
    pub method: Method,
    pub outcomes: Vec<WindowOutcome>,
    pub elapsed: Duration,
}

impl SlotResult {
    pub fn available(&self) -> BTreeSet<WindowId> {
        self.outcomes
            .iter()
            .filter(|o| o.is_available())
            .map(|o| o.window)
            .collect()
    }

    pub fn outcome(&self, window: WindowId) -> Option<&WindowOutcome> {
        self.outcomes.iter().find(|o| o.window == window)
    }

    pub fn witness(&self, window: WindowId) -> Option<&Witness> {
        match &self.outcome(window)?.verdict {
            Verdict::Available(w) => Some(w),
            _ => None,
        }
    }
}

/// Applies a witness: the candidate is booked into `window` and the returned
/// schedule is checked for feasibility.
pub fn commit(
    schedule: &Schedule,
    candidate: &Order,
    window: WindowId,
    witness: &Witness,
) -> Result<Schedule, CommitError> {
    let order = candidate.in_window(window);
    let mut next = schedule.clone();
    match witness {
        Witness::Position { tour, position } => {
            next.insert_order(*tour, *position, order)?;
        }
        Witness::Sequence { tour, visits } => {
            next.insert_order(*tour, 0, order)?;
            next.resequence(*tour, visits.clone())?;
        }
        Witness::Moves {
            tour,
            moves,
            position,
        } => {
            for mv in moves {
                crate::ans::apply_move(&mut next, mv)
                    .map_err(|e| CommitError::Replay(e.to_string()))?;
            }
            next.insert_order(*tour, *position, order)?;
        }
    }
    if !next.is_feasible() {
        return Err(CommitError::Replay("result violates time windows or capacity".into()));
    }
    Ok(next)
}

/// Commits the witness a solver found for `window`.
pub fn commit_result(
    schedule: &Schedule,
    candidate: &Order,
    window: WindowId,
    result: &SlotResult,
) -> Result<Schedule, CommitError> {
    let witness = result
        .witness(window)
        .ok_or(CommitError::NotAvailable(window))?;
    commit(schedule, candidate, window, witness)
}
