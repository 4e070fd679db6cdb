use std::ops::RangeInclusive;

use super::travel::Stop;
use super::types::{Order, OrderId, Seconds, TimeWindow};
use super::{Context, ModelError};

/// One vehicle's visit sequence. The start and end depot are implicit and
/// never part of `visits`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tour {
    pub vehicle: u32,
    pub shift_start: Seconds,
    pub shift_end: Seconds,
    pub capacity: u32,
    visits: Vec<OrderId>,
}

impl Tour {
    pub fn new(
        vehicle: u32,
        shift_start: Seconds,
        shift_end: Seconds,
        capacity: u32,
    ) -> Result<Self, ModelError> {
        Self::with_visits(vehicle, shift_start, shift_end, capacity, Vec::new())
    }

    pub fn with_visits(
        vehicle: u32,
        shift_start: Seconds,
        shift_end: Seconds,
        capacity: u32,
        visits: Vec<OrderId>,
    ) -> Result<Self, ModelError> {
        if shift_start >= shift_end {
            return Err(ModelError::InvalidShift {
                start: shift_start,
                end: shift_end,
            });
        }
        if capacity == 0 {
            return Err(ModelError::InvalidCapacity);
        }
        Ok(Tour {
            vehicle,
            shift_start,
            shift_end,
            capacity,
            visits,
        })
    }

    pub fn visits(&self) -> &[OrderId] {
        &self.visits
    }

    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    pub fn position_of(&self, id: OrderId) -> Option<usize> {
        self.visits.iter().position(|v| *v == id)
    }

    /// `self +_i order`: a new tour with `order` visited right after the
    /// `i`-th stop (`i = 0` is the start depot).
    pub fn insert_at(&self, i: usize, order: OrderId) -> Result<Tour, ModelError> {
        if i > self.visits.len() {
            return Err(ModelError::PositionOutOfRange {
                pos: i,
                max: self.visits.len(),
            });
        }
        let mut next = self.clone();
        next.visits.insert(i, order);
        Ok(next)
    }

    /// A new tour without the visit at zero-based index `k`.
    pub fn without_visit(&self, k: usize) -> Tour {
        let mut next = self.clone();
        next.visits.remove(k);
        next
    }

    pub(crate) fn with_sequence(&self, visits: Vec<OrderId>) -> Tour {
        Tour {
            visits,
            ..self.clone()
        }
    }

    /// Resolves visit ids against the context.
    pub fn resolve<'a>(&self, ctx: &'a Context) -> Result<Route<'a>, ModelError> {
        let stops = self
            .visits
            .iter()
            .map(|id| ctx.order(*id))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Route {
            stops,
            shift_start: self.shift_start,
            shift_end: self.shift_end,
            capacity: self.capacity,
        })
    }
}

/// Earliest (`alpha`) and latest (`beta`) arrival per position `0..=n+1`,
/// plus the tour load.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrivalProfile {
    pub alpha: Vec<Seconds>,
    pub beta: Vec<Seconds>,
    pub load: u64,
}

/// Insertion points `[lo, hi]`; empty when `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InsertionRange {
    pub lo: usize,
    pub hi: usize,
}

impl InsertionRange {
    pub const EMPTY: InsertionRange = InsertionRange { lo: 1, hi: 0 };

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, i: usize) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn positions(&self) -> RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

/// A tour with its orders resolved. Customers sit at positions `1..=n`;
/// positions `0` and `n + 1` are the depot.
#[derive(Clone, Debug)]
pub struct Route<'a> {
    pub stops: Vec<&'a Order>,
    pub shift_start: Seconds,
    pub shift_end: Seconds,
    pub capacity: u32,
}

impl<'a> Route<'a> {
    pub fn len(&self) -> usize {
        self.stops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    pub fn stop(&self, pos: usize) -> Stop<'a> {
        if pos == 0 || pos > self.stops.len() {
            Stop::Depot
        } else {
            Stop::Customer(self.stops[pos - 1])
        }
    }

    pub fn load(&self) -> u64 {
        self.stops.iter().map(|o| o.weight as u64).sum()
    }

    pub fn profile(&self, ctx: &Context) -> ArrivalProfile {
        let n = self.stops.len();
        let mut alpha = vec![0; n + 2];
        let mut beta = vec![0; n + 2];

        alpha[0] = self.shift_start;
        for j in 0..n {
            let here = self.stop(j);
            let next = self.stops[j];
            let reach = alpha[j] + here.service() + ctx.travel(here, Stop::Customer(next));
            alpha[j + 1] = reach.max(ctx.window_of(next).start);
        }
        let last = self.stop(n);
        alpha[n + 1] = alpha[n] + last.service() + ctx.travel(last, Stop::Depot);

        beta[n + 1] = self.shift_end;
        for j in (1..=n).rev() {
            let here = self.stops[j - 1];
            let latest =
                beta[j + 1] - here.service - ctx.travel(Stop::Customer(here), self.stop(j + 1));
            beta[j] = latest.min(ctx.window_of(here).end);
        }
        beta[0] = beta[1] - ctx.travel(Stop::Depot, self.stop(1));

        ArrivalProfile {
            alpha,
            beta,
            load: self.load(),
        }
    }

    pub fn is_feasible(&self, ctx: &Context) -> bool {
        self.is_feasible_with(&self.profile(ctx), ctx)
    }

    /// Time windows at every customer, return before shift end, capacity.
    pub fn is_feasible_with(&self, profile: &ArrivalProfile, ctx: &Context) -> bool {
        let n = self.stops.len();
        profile.load <= self.capacity as u64
            && profile.alpha[n + 1] <= self.shift_end
            && self.stops.iter().enumerate().all(|(k, o)| {
                let w = ctx.window_of(o);
                let a = profile.alpha[k + 1];
                w.start <= a && a <= w.end
            })
    }

    pub fn with_inserted(&self, i: usize, order: &'a Order) -> Route<'a> {
        let mut stops = self.stops.clone();
        stops.insert(i, order);
        self.with_stops(stops)
    }

    fn with_stops(&self, stops: Vec<&'a Order>) -> Route<'a> {
        Route {
            stops,
            shift_start: self.shift_start,
            shift_end: self.shift_end,
            capacity: self.capacity,
        }
    }

    pub fn without_visit(&self, k: usize) -> Route<'a> {
        let mut stops = self.stops.clone();
        stops.remove(k);
        self.with_stops(stops)
    }

    /// Earliest arrival at `candidate` when inserted after position `i`.
    pub fn candidate_earliest(
        &self,
        profile: &ArrivalProfile,
        i: usize,
        candidate: &Order,
        window: &TimeWindow,
        ctx: &Context,
    ) -> Seconds {
        let prev = self.stop(i);
        let reach = profile.alpha[i] + prev.service() + ctx.travel(prev, Stop::Customer(candidate));
        reach.max(window.start)
    }

    /// Latest arrival at `candidate` when inserted after position `i`.
    pub fn candidate_latest(
        &self,
        profile: &ArrivalProfile,
        i: usize,
        candidate: &Order,
        window: &TimeWindow,
        ctx: &Context,
    ) -> Seconds {
        let next = self.stop(i + 1);
        let latest =
            profile.beta[i + 1] - candidate.service - ctx.travel(Stop::Customer(candidate), next);
        latest.min(window.end)
    }

    /// Constant-time check of inserting `candidate` into `window` after
    /// position `i` of this (feasible) route.
    pub fn check_insertion(
        &self,
        profile: &ArrivalProfile,
        i: usize,
        candidate: &Order,
        window: &TimeWindow,
        ctx: &Context,
    ) -> bool {
        assert!(i <= self.stops.len(), "insertion position {i} out of range");
        profile.load + candidate.weight as u64 <= self.capacity as u64
            && self.candidate_earliest(profile, i, candidate, window, ctx)
                <= self.candidate_latest(profile, i, candidate, window, ctx)
    }

    pub fn insertion_range(
        &self,
        profile: &ArrivalProfile,
        candidate: &Order,
        window: &TimeWindow,
    ) -> InsertionRange {
        let n = self.stops.len();
        let lo = (0..=n).find(|&i| window.start + candidate.service <= profile.beta[i + 1]);
        let hi = (0..=n)
            .rev()
            .find(|&i| profile.alpha[i] + self.stop(i).service() <= window.end);
        match (lo, hi) {
            (Some(lo), Some(hi)) => InsertionRange { lo, hi },
            _ => InsertionRange::EMPTY,
        }
    }

    /// Sum of leg travel times including both depot legs.
    pub fn travel_time(&self, ctx: &Context) -> Seconds {
        (0..=self.stops.len())
            .map(|p| ctx.travel(self.stop(p), self.stop(p + 1)))
            .sum()
    }
}

pub fn compute_arrival_profile(tour: &Tour, ctx: &Context) -> Result<ArrivalProfile, ModelError> {
    Ok(tour.resolve(ctx)?.profile(ctx))
}

/// TFEAS and CFEAS. Tours referencing unknown orders are infeasible.
pub fn is_tour_feasible(tour: &Tour, ctx: &Context) -> bool {
    tour.resolve(ctx).is_ok_and(|r| r.is_feasible(ctx))
}

pub fn insertion_range(
    tour: &Tour,
    profile: &ArrivalProfile,
    candidate: &Order,
    window: &TimeWindow,
    ctx: &Context,
) -> InsertionRange {
    let n = tour.len();
    let service_at = |i: usize| {
        if i == 0 {
            0
        } else {
            ctx.order(tour.visits()[i - 1]).map(|o| o.service).unwrap_or(0)
        }
    };
    let lo = (0..=n).find(|&i| window.start + candidate.service <= profile.beta[i + 1]);
    let hi = (0..=n)
        .rev()
        .find(|&i| profile.alpha[i] + service_at(i) <= window.end);
    match (lo, hi) {
        (Some(lo), Some(hi)) => InsertionRange { lo, hi },
        _ => InsertionRange::EMPTY,
    }
}

/// O(1) given the cached profile: looks up only the two neighbours of `i`.
pub fn check_insertion_feasible(
    tour: &Tour,
    profile: &ArrivalProfile,
    i: usize,
    candidate: &Order,
    window: &TimeWindow,
    ctx: &Context,
) -> bool {
    let n = tour.len();
    assert!(i <= n, "insertion position {i} out of range");
    let neighbour = |pos: usize| -> Option<Stop<'_>> {
        if pos == 0 || pos > n {
            Some(Stop::Depot)
        } else {
            ctx.order(tour.visits()[pos - 1]).ok().map(Stop::Customer)
        }
    };
    let (Some(prev), Some(next)) = (neighbour(i), neighbour(i + 1)) else {
        return false;
    };
    if profile.load + candidate.weight as u64 > tour.capacity as u64 {
        return false;
    }
    let earliest = (profile.alpha[i] + prev.service() + ctx.travel(prev, Stop::Customer(candidate)))
        .max(window.start);
    let latest = (profile.beta[i + 1] - candidate.service - ctx.travel(Stop::Customer(candidate), next))
        .min(window.end);
    earliest <= latest
}
