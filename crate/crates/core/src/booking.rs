//! Booking simulation: offer every pool customer their preferred window,
//! accept when plain insertion finds room, optionally re-optimize travel time
//! after each acceptance.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ans::{apply_move, Move, MoveError};
use crate::instance::Instance;
use crate::model::{ModelError, OrderId, Schedule, Seconds, Stop};
use crate::simple::first_fit;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BookingError {
    #[error("fill level {0} outside (0, 1]")]
    FillLevel(String),
    #[error("order {0} is not in the instance pool")]
    UnknownOrder(OrderId),
    #[error("replay: {0}")]
    Move(#[from] MoveError),
    #[error("replay: {0}")]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    NonOptimized,
    Optimized,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::NonOptimized, Scenario::Optimized];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::NonOptimized => "plain",
            Scenario::Optimized => "optimized",
        })
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" | "non-optimized" => Ok(Scenario::NonOptimized),
            "optimized" => Ok(Scenario::Optimized),
            other => Err(format!("unknown scenario `{other}` (plain, optimized)")),
        }
    }
}

/// One entry of the replay log.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FillEvent {
    /// Pool order `order` booked into its preferred window after `position`
    /// of `tour`.
    Accept { order: OrderId, tour: usize, position: usize },
    Move(Move),
}

/// Replay log of a booking run. Snapshots are rebuilt on demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FillTrajectory {
    pub scenario: Scenario,
    pub events: Vec<FillEvent>,
}

impl FillTrajectory {
    /// Accepted orders after the whole pool was offered.
    pub fn p_hat(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, FillEvent::Accept { .. }))
            .count()
    }

    /// `ceil(f * p_hat)`.
    pub fn orders_at(&self, fill: f64) -> Result<usize, BookingError> {
        if !(fill > 0.0 && fill <= 1.0) {
            return Err(BookingError::FillLevel(fill.to_string()));
        }
        // Guard against 0.85 * 400 = 340.00000000000006 style round-up.
        let exact = fill * self.p_hat() as f64;
        let p = (exact - 1e-9).ceil().max(0.0) as usize;
        Ok(p.min(self.p_hat()))
    }
}

/// Books the pool in order. Each customer is offered only their preferred
/// window; acceptance takes the first tour and position plain insertion
/// finds.
pub fn fill_schedule(instance: &Instance, scenario: Scenario) -> FillTrajectory {
    let mut schedule = instance.empty_schedule();
    let mut events = Vec::new();
    for order in &instance.pool {
        let window = schedule.context().window(order.window).expect("pool windows valid");
        let Some((tour, position)) = first_fit(&schedule, order, window) else {
            continue;
        };
        schedule
            .insert_order(tour, position, *order)
            .expect("pool ids are unique");
        debug_assert!(schedule.is_feasible());
        events.push(FillEvent::Accept {
            order: order.id,
            tour,
            position,
        });
        if scenario == Scenario::Optimized {
            events.extend(optimize_travel_time(&mut schedule).into_iter().map(FillEvent::Move));
        }
    }
    FillTrajectory { scenario, events }
}

/// The schedule right after the `ceil(f * p_hat)`-th acceptance, including
/// the optimization that followed it.
pub fn snapshot_at_fill(
    instance: &Instance,
    trajectory: &FillTrajectory,
    fill: f64,
) -> Result<Schedule, BookingError> {
    let p = trajectory.orders_at(fill)?;
    replay(instance, trajectory, p)
}

/// Rebuilds the schedule holding the first `accepted` acceptances.
pub fn replay(instance: &Instance, trajectory: &FillTrajectory, accepted: usize) -> Result<Schedule, BookingError> {
    let mut schedule = instance.empty_schedule();
    let mut seen = 0;
    for event in &trajectory.events {
        match event {
            FillEvent::Accept { order, tour, position } => {
                if seen == accepted {
                    break;
                }
                let o = instance
                    .pool
                    .get((order.0 as usize).wrapping_sub(1))
                    .filter(|o| o.id == *order)
                    .ok_or(BookingError::UnknownOrder(*order))?;
                schedule.insert_order(*tour, *position, *o)?;
                seen += 1;
            }
            FillEvent::Move(mv) => apply_move(&mut schedule, mv)?,
        }
    }
    Ok(schedule)
}

/// Travel saved by removing the visit at zero-based index `k`.
fn removal_saving(schedule: &Schedule, tour: usize, k: usize) -> Seconds {
    let route = schedule.route(tour);
    let ctx = schedule.context();
    let (prev, here, next) = (route.stop(k), route.stop(k + 1), route.stop(k + 2));
    ctx.travel(prev, here) + ctx.travel(here, next) - ctx.travel(prev, next)
}

/// Best improving 1-move by total travel time, if any. Ties go to the
/// first (source tour, source position, target tour, target position).
fn best_travel_move(schedule: &Schedule) -> Option<Move> {
    let ctx = schedule.context();
    let mut best: Option<(Seconds, Move)> = None;
    for source in 0..schedule.len() {
        let route = schedule.route(source);
        for k in 0..route.len() {
            let order = route.stops[k];
            let window = ctx.window_of(order);
            let saving = removal_saving(schedule, source, k);
            let mut removal_checked = None;
            for target in (0..schedule.len()).filter(|&t| t != source) {
                let troute = schedule.route(target);
                let profile = schedule.profile(target);
                for i in troute.insertion_range(profile, order, window).positions() {
                    let (a, b) = (troute.stop(i), troute.stop(i + 1));
                    let added = ctx.travel(a, Stop::Customer(order)) + ctx.travel(Stop::Customer(order), b)
                        - ctx.travel(a, b);
                    let delta = added - saving;
                    if delta >= 0 || best.is_some_and(|(d, _)| delta >= d) {
                        continue;
                    }
                    if !troute.check_insertion(profile, i, order, window, ctx) {
                        continue;
                    }
                    // Dropping a visit can break the source when travel times
                    // violate the triangle inequality.
                    let ok = *removal_checked.get_or_insert_with(|| {
                        let reduced = route.without_visit(k);
                        reduced.is_feasible(ctx)
                    });
                    if !ok {
                        break;
                    }
                    best = Some((
                        delta,
                        Move {
                            order: order.id,
                            source,
                            target,
                            target_pos: i,
                            swap: None,
                        },
                    ));
                }
                if removal_checked == Some(false) {
                    break;
                }
            }
        }
    }
    best.map(|(_, mv)| mv)
}

/// Applies best improving 1-moves until none is left. Returns the moves;
/// total travel time strictly drops with each.
pub fn optimize_travel_time(schedule: &mut Schedule) -> Vec<Move> {
    let mut moves = Vec::new();
    while let Some(mv) = best_travel_move(schedule) {
        let before = schedule.total_travel_time();
        apply_move(schedule, &mv).expect("checked move");
        debug_assert!(schedule.total_travel_time() < before);
        moves.push(mv);
    }
    moves
}
