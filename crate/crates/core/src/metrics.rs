//! Per-window tour quantities: first/last index, inside/outside partition,
//! entrance/exit/loss time and free time, and the two insertion conditions
//! built from them.

use thiserror::Error;

use crate::model::{
    ArrivalProfile, Context, InsertionRange, ModelError, Order, Route, Seconds, Stop, TimeWindow,
    Tour, WindowId,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("the feasibility condition only holds for non-overlapping windows")]
    OverlappingWindows,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// First and last (1-based) positions whose assigned window lies within
/// `window`. `bounds` is `None` when no such position exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowSpan {
    pub window: WindowId,
    pub bounds: Option<(usize, usize)>,
}

impl WindowSpan {
    pub fn first(&self) -> Option<usize> {
        self.bounds.map(|b| b.0)
    }

    pub fn last(&self) -> Option<usize> {
        self.bounds.map(|b| b.1)
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.bounds.is_some_and(|(f, l)| f <= pos && pos <= l)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InsideOutside {
    pub inside: Vec<usize>,
    pub outside: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LossTime {
    pub entrance: Seconds,
    pub exit: Seconds,
    pub total: Seconds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotMetrics {
    pub free: Seconds,
    /// `None` when the insertion range is empty.
    pub loss: Option<LossTime>,
}

/// Evaluates one (route, candidate, window) triple against a precomputed
/// arrival profile.
pub struct WindowEval<'r, 'a> {
    pub route: &'r Route<'a>,
    pub profile: &'r ArrivalProfile,
    pub ctx: &'r Context,
    pub window: TimeWindow,
    pub candidate: Order,
    pub range: InsertionRange,
}

impl<'r, 'a> WindowEval<'r, 'a> {
    pub fn new(
        route: &'r Route<'a>,
        profile: &'r ArrivalProfile,
        candidate: &Order,
        window: &TimeWindow,
        ctx: &'r Context,
    ) -> Self {
        let candidate = candidate.in_window(window.id);
        let range = route.insertion_range(profile, &candidate, window);
        WindowEval {
            route,
            profile,
            ctx,
            window: *window,
            candidate,
            range,
        }
    }

    pub fn span(&self) -> WindowSpan {
        span_of(self.route, &self.window, self.ctx)
    }

    pub fn free(&self) -> Seconds {
        free_time(self.route, &self.window, self.ctx)
    }

    /// Free time of the route with the candidate inserted after `i`.
    pub fn free_after_insertion(&self, i: usize) -> Seconds {
        free_time(&self.route.with_inserted(i, &self.candidate), &self.window, self.ctx)
    }

    /// Maximum over the insertion range; `None` when the range is empty.
    pub fn max_free_after_insertion(&self) -> Option<Seconds> {
        if self.range.is_empty() {
            return None;
        }
        self.range.positions().map(|i| self.free_after_insertion(i)).max()
    }

    fn earliest(&self, i: usize) -> Seconds {
        self.route
            .candidate_earliest(self.profile, i, &self.candidate, &self.window, self.ctx)
    }

    fn latest(&self, i: usize) -> Seconds {
        self.route
            .candidate_latest(self.profile, i, &self.candidate, &self.window, self.ctx)
    }

    pub fn loss(&self) -> Option<LossTime> {
        if self.range.is_empty() {
            return None;
        }
        let (s, e) = (self.window.start, self.window.end);
        match self.span().bounds {
            Some((f, l)) => {
                let enter = self
                    .range
                    .positions()
                    .filter(|&i| i <= f)
                    .map(|i| self.earliest(i))
                    .fold(self.profile.alpha[f], Seconds::max);
                let leave = self
                    .range
                    .positions()
                    .filter(|&i| i >= l)
                    .map(|i| self.latest(i))
                    .fold(self.profile.beta[l], Seconds::min);
                let entrance = enter - s;
                let exit = e - leave;
                Some(LossTime {
                    entrance,
                    exit,
                    total: entrance + exit,
                })
            }
            None => {
                let mut best: Option<LossTime> = None;
                for i in self.range.positions() {
                    let entrance = self.earliest(i) - s;
                    let exit = e - self.latest(i);
                    if best.is_none_or(|b| entrance + exit > b.total) {
                        best = Some(LossTime {
                            entrance,
                            exit,
                            total: entrance + exit,
                        });
                    }
                }
                best
            }
        }
    }

    pub fn metrics(&self) -> SlotMetrics {
        SlotMetrics {
            free: self.free(),
            loss: self.loss(),
        }
    }

    /// Necessary condition for infeasibility: no insertion point leaves
    /// non-negative free time. An empty insertion range also counts.
    pub fn infeasible(&self) -> bool {
        self.max_free_after_insertion().is_none_or(|m| m < 0)
    }

    /// Sufficient condition for feasibility on non-overlapping windows.
    pub fn feasible(&self) -> Result<bool, MetricsError> {
        if self.ctx.windows().is_overlapping() {
            return Err(MetricsError::OverlappingWindows);
        }
        Ok(match (self.max_free_after_insertion(), self.loss()) {
            (Some(free), Some(loss)) => free - loss.total >= 0,
            _ => false,
        })
    }

    /// Some position in the insertion range passes the constant-time check.
    pub fn insertable(&self) -> bool {
        self.range
            .positions()
            .any(|i| self.route.check_insertion(self.profile, i, &self.candidate, &self.window, self.ctx))
    }
}

pub fn span_of(route: &Route<'_>, window: &TimeWindow, ctx: &Context) -> WindowSpan {
    let mut nested = route
        .stops
        .iter()
        .enumerate()
        .filter(|(_, o)| window.encloses(ctx.window_of(o)))
        .map(|(k, _)| k + 1);
    let first = nested.next();
    let last = nested.last().or(first);
    WindowSpan {
        window: window.id,
        bounds: first.zip(last),
    }
}

pub fn free_time(route: &Route<'_>, window: &TimeWindow, ctx: &Context) -> Seconds {
    let load = match span_of(route, window, ctx).bounds {
        Some((f, l)) => (f..l)
            .map(|k| {
                let here = route.stop(k);
                here.service() + ctx.travel(here, route.stop(k + 1))
            })
            .sum(),
        None => 0,
    };
    window.length() - load
}

pub fn window_span(tour: &Tour, window: &TimeWindow, ctx: &Context) -> Result<WindowSpan, ModelError> {
    Ok(span_of(&tour.resolve(ctx)?, window, ctx))
}

pub fn partition_inside_outside(
    tour: &Tour,
    window: &TimeWindow,
    ctx: &Context,
) -> Result<InsideOutside, ModelError> {
    let span = window_span(tour, window, ctx)?;
    let (inside, outside) = (1..=tour.len()).partition(|&p| span.contains(p));
    Ok(InsideOutside { inside, outside })
}

pub fn slot_metrics(
    tour: &Tour,
    candidate: &Order,
    window: &TimeWindow,
    ctx: &Context,
) -> Result<SlotMetrics, ModelError> {
    let route = tour.resolve(ctx)?;
    let profile = route.profile(ctx);
    Ok(WindowEval::new(&route, &profile, candidate, window, ctx).metrics())
}

pub fn infeasibility_condition(
    tour: &Tour,
    candidate: &Order,
    window: &TimeWindow,
    ctx: &Context,
) -> Result<bool, ModelError> {
    let route = tour.resolve(ctx)?;
    let profile = route.profile(ctx);
    Ok(WindowEval::new(&route, &profile, candidate, window, ctx).infeasible())
}

pub fn feasibility_condition(
    tour: &Tour,
    candidate: &Order,
    window: &TimeWindow,
    ctx: &Context,
) -> Result<bool, MetricsError> {
    let route = tour.resolve(ctx)?;
    let profile = route.profile(ctx);
    WindowEval::new(&route, &profile, candidate, window, ctx).feasible()
}

/// Service plus travel that inserting the candidate after `i` adds between
/// the first and last index, for `i` in `[f - 1, l]` on non-overlapping
/// windows.
pub fn added_inside_load(route: &Route<'_>, i: usize, candidate: &Order, window: &TimeWindow, ctx: &Context) -> Option<Seconds> {
    let (f, l) = span_of(route, window, ctx).bounds?;
    let cand = Stop::Customer(candidate);
    let t = |a: Stop<'_>, b: Stop<'_>| ctx.travel(a, b);
    if i + 1 == f {
        Some(candidate.service + t(cand, route.stop(f)))
    } else if i == l {
        Some(route.stop(l).service() + t(route.stop(l), cand))
    } else if f <= i && i < l {
        let (a, b) = (route.stop(i), route.stop(i + 1));
        Some(candidate.service + t(a, cand) + t(cand, b) - t(a, b))
    } else {
        None
    }
}
