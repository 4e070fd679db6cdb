//! Adaptive neighborhood search: relocate other orders away from a target
//! tour until the candidate fits into it.
//!
//! Four steps run in sequence on a private copy of the schedule:
//!
//! 1. reduce the tour's weight until the candidate fits by capacity,
//! 2. raise the window's free time by moving customers inside the window
//!    until the infeasibility condition no longer holds,
//! 3. cut the window's loss time by moving customers outside the window,
//! 4. raise the free time further until the candidate can be inserted.
//!
//! Every step applies the best improving move of its neighborhood and stops
//! at a local optimum. Moved orders always stay in their own window.

use std::time::Instant;

use thiserror::Error;

use crate::metrics::{free_time, WindowEval};
use crate::model::{
    is_tour_feasible, ArrivalProfile, Context, ModelError, Order, OrderId, Route, Schedule, Seconds,
    TimeWindow, WindowId,
};
use crate::simple::{simple_insert, simple_insert_into};
use crate::slots::{Method, SlotQuery, SlotResult, Verdict, Witness, WindowOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("order {0} is not on tour {1}")]
    NotOnTour(OrderId, usize),
    #[error("source and target tour are both {0}")]
    SameTour(usize),
    #[error("move leaves tour {0} infeasible")]
    Infeasible(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveKind {
    OneMove,
    OneSwap,
}

/// The order that travels the other way in a swap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SwapPartner {
    pub order: OrderId,
    /// Insertion position in the source tour once `Move::order` has left it.
    pub source_pos: usize,
}

/// Relocation of `order` from tour `source` to tour `target`, inserted after
/// `target_pos` of the target (with the partner already removed for a swap).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub order: OrderId,
    pub source: usize,
    pub target: usize,
    pub target_pos: usize,
    pub swap: Option<SwapPartner>,
}

impl Move {
    pub fn kind(&self) -> MoveKind {
        if self.swap.is_some() {
            MoveKind::OneSwap
        } else {
            MoveKind::OneMove
        }
    }
}

/// Replays a move. Both resulting tours are checked in full; on error the
/// schedule is left untouched.
pub fn apply_move(schedule: &mut Schedule, mv: &Move) -> Result<(), MoveError> {
    if mv.source == mv.target {
        return Err(MoveError::SameTour(mv.source));
    }
    if mv.source >= schedule.len() || mv.target >= schedule.len() {
        return Err(ModelError::PositionOutOfRange {
            pos: mv.source.max(mv.target),
            max: schedule.len().saturating_sub(1),
        }
        .into());
    }
    let at = schedule
        .tour(mv.source)
        .position_of(mv.order)
        .ok_or(MoveError::NotOnTour(mv.order, mv.source))?;
    let mut source = schedule.tour(mv.source).without_visit(at);
    let mut target = schedule.tour(mv.target).clone();
    if let Some(partner) = mv.swap {
        let k = target
            .position_of(partner.order)
            .ok_or(MoveError::NotOnTour(partner.order, mv.target))?;
        target = target.without_visit(k);
        source = source.insert_at(partner.source_pos, partner.order)?;
    }
    let target = target.insert_at(mv.target_pos, mv.order)?;
    let ctx = schedule.context();
    if !is_tour_feasible(&source, ctx) {
        return Err(MoveError::Infeasible(mv.source));
    }
    if !is_tour_feasible(&target, ctx) {
        return Err(MoveError::Infeasible(mv.target));
    }
    schedule.replace_tours(vec![(mv.source, source), (mv.target, target)]);
    Ok(())
}

fn own_window(ctx: &Context, id: OrderId) -> Option<(Order, TimeWindow)> {
    let order = *ctx.order(id).ok()?;
    let window = *ctx.window(order.window).ok()?;
    Some((order, window))
}

/// Moves `order` to tour `target`, into its own window at the first feasible
/// position. `None` if either resulting tour would be infeasible.
pub fn one_move(schedule: &Schedule, order: OrderId, target: usize) -> Option<Move> {
    let (source, _) = schedule.locate(order)?;
    if source == target || target >= schedule.len() {
        return None;
    }
    let (o, window) = own_window(schedule.context(), order)?;
    let target_pos = simple_insert_into(schedule, target, &o, &window)?;
    let mv = Move {
        order,
        source,
        target,
        target_pos,
        swap: None,
    };
    // The source loses a visit; without the triangle inequality that alone
    // can break it, so the trial replays the move in full.
    let mut trial = schedule.clone();
    apply_move(&mut trial, &mv).ok().map(|_| mv)
}

/// Exchanges `order` with the first visit of tour `target` (in position
/// order) for which both tours stay feasible.
pub fn one_swap(schedule: &Schedule, order: OrderId, target: usize) -> Option<Move> {
    let (source, at) = schedule.locate(order)?;
    if source == target || target >= schedule.len() {
        return None;
    }
    let ctx = schedule.context();
    let (o, o_window) = own_window(ctx, order)?;
    let reduced_source = schedule.route(source).without_visit(at);
    let rs_profile = reduced_source.profile(ctx);
    if !reduced_source.is_feasible_with(&rs_profile, ctx) {
        return None;
    }
    let target_route = schedule.route(target);
    for k in 0..target_route.len() {
        let partner = *target_route.stops[k];
        let p_window = *ctx.window_of(&partner);
        let Some(source_pos) = simple_insert(&reduced_source, &rs_profile, &partner, &p_window, ctx) else {
            continue;
        };
        let reduced_target = target_route.without_visit(k);
        let rt_profile = reduced_target.profile(ctx);
        if !reduced_target.is_feasible_with(&rt_profile, ctx) {
            continue;
        }
        let Some(target_pos) = simple_insert(&reduced_target, &rt_profile, &o, &o_window, ctx) else {
            continue;
        };
        let mv = Move {
            order,
            source,
            target,
            target_pos,
            swap: Some(SwapPartner {
                order: partner.id,
                source_pos,
            }),
        };
        let mut trial = schedule.clone();
        if apply_move(&mut trial, &mv).is_ok() {
            return Some(mv);
        }
    }
    None
}

/// Order in which tours are offered the candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TourOrder {
    /// Schedule order.
    #[default]
    Declaration,
    /// Most spare capacity first, ties in schedule order.
    SpareCapacity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct AnsConfig {
    pub enable_swap: bool,
    /// Moves allowed per step; `None` means customers times tours.
    pub max_moves_per_step: Option<usize>,
    pub tour_order: TourOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnsStep {
    Capacity,
    FreeTime,
    LossTime,
    FinalFreeTime,
}

/// Reported to the observer after every committed move.
pub struct AnsEvent<'s> {
    pub step: AnsStep,
    pub mv: &'s Move,
    pub schedule: &'s Schedule,
}

#[derive(Clone, Debug)]
pub struct AnsSuccess {
    /// The private copy with all moves applied and the candidate inserted.
    pub schedule: Schedule,
    pub tour: usize,
    pub position: usize,
    pub moves: Vec<Move>,
}

struct Run<'o, 'f> {
    schedule: Schedule,
    tour: usize,
    candidate: Order,
    window: TimeWindow,
    config: AnsConfig,
    moves: Vec<Move>,
    observer: &'o mut (dyn FnMut(&AnsEvent<'_>) + 'f),
}

impl Run<'_, '_> {
    fn capacity_ok(&self, load: u64) -> bool {
        load + self.candidate.weight as u64 <= self.schedule.tour(self.tour).capacity as u64
    }

    fn insertion(&self) -> Option<usize> {
        simple_insert_into(&self.schedule, self.tour, &self.candidate, &self.window)
    }

    fn infeasible(&self) -> bool {
        let route = self.schedule.route(self.tour);
        let profile = self.schedule.profile(self.tour);
        WindowEval::new(&route, profile, &self.candidate, &self.window, self.schedule.context()).infeasible()
    }

    fn loss(&self) -> Option<Seconds> {
        let route = self.schedule.route(self.tour);
        let profile = self.schedule.profile(self.tour);
        WindowEval::new(&route, profile, &self.candidate, &self.window, self.schedule.context())
            .loss()
            .map(|l| l.total)
    }

    fn keep_going(&self, step: AnsStep) -> bool {
        match step {
            AnsStep::Capacity => !self.capacity_ok(self.schedule.profile(self.tour).load),
            AnsStep::FreeTime => self.infeasible(),
            AnsStep::LossTime => self.insertion().is_none() && self.loss().is_some_and(|l| l > 0),
            AnsStep::FinalFreeTime => self.insertion().is_none(),
        }
    }

    /// Step objective, larger is better. With `gate`, `None` marks a tour
    /// state the step may not move into.
    fn score(&self, step: AnsStep, route: &Route<'_>, profile: &ArrivalProfile, gate: bool) -> Option<i64> {
        let ctx = self.schedule.context();
        if gate && step != AnsStep::Capacity && !self.capacity_ok(profile.load) {
            return None;
        }
        match step {
            AnsStep::Capacity => Some(-(profile.load as i64)),
            AnsStep::FreeTime | AnsStep::FinalFreeTime => Some(free_time(route, &self.window, ctx)),
            AnsStep::LossTime => {
                let eval = WindowEval::new(route, profile, &self.candidate, &self.window, ctx);
                if gate && eval.infeasible() {
                    return None;
                }
                eval.loss().map(|l| -l.total)
            }
        }
    }

    fn neighborhood(&self, step: AnsStep) -> Vec<usize> {
        let route = self.schedule.route(self.tour);
        let span = crate::metrics::span_of(&route, &self.window, self.schedule.context());
        (1..=route.len())
            .filter(|&p| match step {
                AnsStep::Capacity => true,
                AnsStep::FreeTime | AnsStep::FinalFreeTime => span.contains(p),
                AnsStep::LossTime => !span.contains(p),
            })
            .collect()
    }

    fn targets(&self) -> impl Iterator<Item = usize> {
        let own = self.tour;
        (0..self.schedule.len()).filter(move |&t| t != own)
    }

    /// Best improving move of the step's neighborhood. Ties go to the
    /// smallest source position, then target tour, then target position.
    fn best_move(&self, step: AnsStep) -> Option<Move> {
        let ctx = self.schedule.context();
        let route = self.schedule.route(self.tour);
        let current = self.score(step, &route, self.schedule.profile(self.tour), false)?;
        let positions = self.neighborhood(step);
        let mut best: Option<(i64, Move)> = None;

        for &p in &positions {
            let order = route.stops[p - 1];
            let reduced = route.without_visit(p - 1);
            let profile = reduced.profile(ctx);
            if !reduced.is_feasible_with(&profile, ctx) {
                continue;
            }
            let Some(score) = self.score(step, &reduced, &profile, true) else {
                continue;
            };
            let gain = score - current;
            if gain <= 0 || best.is_some_and(|(g, _)| gain <= g) {
                continue;
            }
            let window = ctx.window_of(order);
            let placed = self.targets().find_map(|t| {
                simple_insert_into(&self.schedule, t, order, window).map(|pos| (t, pos))
            });
            if let Some((target, target_pos)) = placed {
                best = Some((
                    gain,
                    Move {
                        order: order.id,
                        source: self.tour,
                        target,
                        target_pos,
                        swap: None,
                    },
                ));
            }
        }
        if best.is_some() || !self.config.enable_swap {
            return best.map(|(_, mv)| mv);
        }

        for &p in &positions {
            let order = route.stops[p - 1].id;
            for target in self.targets() {
                let Some(mv) = one_swap(&self.schedule, order, target) else {
                    continue;
                };
                let mut trial = self.schedule.clone();
                if apply_move(&mut trial, &mv).is_err() {
                    continue;
                }
                let after = trial.route(self.tour);
                let Some(score) = self.score(step, &after, trial.profile(self.tour), true) else {
                    continue;
                };
                let gain = score - current;
                if gain > 0 && best.is_none_or(|(g, _)| gain > g) {
                    best = Some((gain, mv));
                }
            }
        }
        best.map(|(_, mv)| mv)
    }

    fn improve(&mut self, step: AnsStep) {
        let bound = self
            .config
            .max_moves_per_step
            .unwrap_or_else(|| self.schedule.order_count().max(1) * self.schedule.len().max(1));
        let mut made = 0;
        while made < bound && self.keep_going(step) {
            let Some(mv) = self.best_move(step) else {
                break;
            };
            apply_move(&mut self.schedule, &mv).expect("selected moves replay");
            debug_assert!(self.schedule.is_feasible());
            (self.observer)(&AnsEvent {
                step,
                mv: &mv,
                schedule: &self.schedule,
            });
            self.moves.push(mv);
            made += 1;
        }
    }

    fn run(mut self) -> Option<AnsSuccess> {
        self.improve(AnsStep::Capacity);
        if !self.capacity_ok(self.schedule.profile(self.tour).load) {
            return None;
        }
        self.improve(AnsStep::FreeTime);
        if self.infeasible() {
            return None;
        }
        self.improve(AnsStep::LossTime);
        self.improve(AnsStep::FinalFreeTime);
        let position = self.insertion()?;
        self.schedule
            .insert_order(self.tour, position, self.candidate)
            .expect("candidate is new to the schedule");
        debug_assert!(self.schedule.is_feasible());
        Some(AnsSuccess {
            schedule: self.schedule,
            tour: self.tour,
            position,
            moves: self.moves,
        })
    }
}

/// Tries to make room for `candidate` in `window` on tour `tour`. The input
/// schedule is never modified.
pub fn ans_insert(
    schedule: &Schedule,
    tour: usize,
    candidate: &Order,
    window: WindowId,
    config: &AnsConfig,
) -> Option<AnsSuccess> {
    ans_insert_observed(schedule, tour, candidate, window, config, &mut |_| {})
}

/// [`ans_insert`] with a callback after every committed move.
pub fn ans_insert_observed(
    schedule: &Schedule,
    tour: usize,
    candidate: &Order,
    window: WindowId,
    config: &AnsConfig,
    observer: &mut dyn FnMut(&AnsEvent<'_>),
) -> Option<AnsSuccess> {
    let window = *schedule.context().window(window).ok()?;
    if tour >= schedule.len() {
        return None;
    }
    Run {
        schedule: schedule.clone(),
        tour,
        candidate: candidate.in_window(window.id),
        window,
        config: *config,
        moves: Vec::new(),
        observer,
    }
    .run()
}

/// Tours in the order the configuration offers them the candidate.
pub fn tour_sequence(schedule: &Schedule, order: TourOrder) -> Vec<usize> {
    let mut tours: Vec<usize> = (0..schedule.len()).collect();
    if order == TourOrder::SpareCapacity {
        tours.sort_by_key(|&t| {
            let spare = schedule.tour(t).capacity as i64 - schedule.profile(t).load as i64;
            (-spare, t)
        });
    }
    tours
}

/// Verdict for one window; each tour starts from the unmodified schedule.
pub fn ans_window(schedule: &Schedule, candidate: &Order, window: WindowId, config: &AnsConfig) -> Verdict {
    for tour in tour_sequence(schedule, config.tour_order) {
        if let Some(found) = ans_insert(schedule, tour, candidate, window, config) {
            let witness = if found.moves.is_empty() {
                Witness::Position {
                    tour,
                    position: found.position,
                }
            } else {
                Witness::Moves {
                    tour,
                    moves: found.moves,
                    position: found.position,
                }
            };
            return Verdict::Available(witness);
        }
    }
    Verdict::Unavailable
}

pub fn solve_sop_ans(query: &SlotQuery<'_>, config: &AnsConfig) -> SlotResult {
    let started = Instant::now();
    let outcomes = query
        .windows
        .iter()
        .map(|&w| {
            let t0 = Instant::now();
            let verdict = ans_window(query.schedule, &query.candidate, w, config);
            WindowOutcome {
                window: w,
                verdict,
                elapsed: t0.elapsed(),
            }
        })
        .collect();
    SlotResult {
        method: Method::Ans,
        outcomes,
        elapsed: started.elapsed(),
    }
}
