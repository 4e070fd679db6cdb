use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use super::tour::{ArrivalProfile, Route, Tour};
use super::types::{Order, OrderId, Seconds};
use super::{Context, ModelError};

/// A set of tours over one context. Arrival profiles are cached per tour and
/// dropped whenever that tour is replaced.
#[derive(Clone, Debug)]
pub struct Schedule {
    ctx: Context,
    tours: Vec<Tour>,
    profiles: Vec<OnceLock<ArrivalProfile>>,
}

impl Schedule {
    /// Every context order must be on exactly one tour and every visit must
    /// be a context order.
    pub fn new(ctx: Context, tours: Vec<Tour>) -> Result<Self, ModelError> {
        let mut seen = HashSet::with_capacity(ctx.order_count());
        for tour in &tours {
            for id in tour.visits() {
                ctx.order(*id)?;
                if !seen.insert(*id) {
                    return Err(ModelError::DuplicateOrder(*id));
                }
            }
        }
        if let Some(missing) = ctx.orders().find(|o| !seen.contains(&o.id)) {
            return Err(ModelError::Unscheduled(missing.id));
        }
        let profiles = tours.iter().map(|_| OnceLock::new()).collect();
        Ok(Schedule {
            ctx,
            tours,
            profiles,
        })
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn tours(&self) -> &[Tour] {
        &self.tours
    }

    pub fn tour(&self, idx: usize) -> &Tour {
        &self.tours[idx]
    }

    pub fn len(&self) -> usize {
        self.tours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tours.is_empty()
    }

    pub fn order_count(&self) -> usize {
        self.ctx.order_count()
    }

    pub fn route(&self, idx: usize) -> Route<'_> {
        self.tours[idx]
            .resolve(&self.ctx)
            .expect("schedule visits validated on construction")
    }

    pub fn profile(&self, idx: usize) -> &ArrivalProfile {
        self.profiles[idx].get_or_init(|| self.route(idx).profile(&self.ctx))
    }

    /// (tour index, zero-based visit index) of a scheduled order.
    pub fn locate(&self, id: OrderId) -> Option<(usize, usize)> {
        self.tours
            .iter()
            .enumerate()
            .find_map(|(t, tour)| tour.position_of(id).map(|k| (t, k)))
    }

    /// Replaces tours in place. The caller keeps the set of visited orders
    /// unchanged.
    pub(crate) fn replace_tours(&mut self, changes: Vec<(usize, Tour)>) {
        for (idx, tour) in changes {
            self.tours[idx] = tour;
            self.profiles[idx] = OnceLock::new();
        }
        debug_assert_eq!(
            self.tours.iter().map(Tour::len).sum::<usize>(),
            self.ctx.order_count()
        );
    }

    /// Adds a new order to the context and visits it after position `pos` of
    /// tour `tour_idx`. Feasibility is not checked.
    pub fn insert_order(&mut self, tour_idx: usize, pos: usize, order: Order) -> Result<(), ModelError> {
        if tour_idx >= self.tours.len() {
            return Err(ModelError::PositionOutOfRange {
                pos: tour_idx,
                max: self.tours.len().saturating_sub(1),
            });
        }
        let tour = self.tours[tour_idx].insert_at(pos, order.id)?;
        self.ctx.add_order(order)?;
        self.replace_tours(vec![(tour_idx, tour)]);
        Ok(())
    }

    /// Reorders the visits of one tour. `visits` must be a permutation of the
    /// tour's current visits. Feasibility is not checked.
    pub fn resequence(&mut self, tour_idx: usize, visits: Vec<OrderId>) -> Result<(), ModelError> {
        let tour = self.tours.get(tour_idx).ok_or(ModelError::PositionOutOfRange {
            pos: tour_idx,
            max: self.tours.len().saturating_sub(1),
        })?;
        let mut have = tour.visits().to_vec();
        let mut want = visits.clone();
        have.sort();
        want.sort();
        if have != want {
            let odd = visits
                .iter()
                .find(|v| !tour.visits().contains(v))
                .or_else(|| tour.visits().iter().find(|v| !visits.contains(v)))
                .copied()
                .unwrap_or(OrderId(u32::MAX));
            return Err(ModelError::UnknownOrder(odd));
        }
        let next = tour.with_sequence(visits);
        self.replace_tours(vec![(tour_idx, next)]);
        Ok(())
    }

    pub fn is_feasible(&self) -> bool {
        (0..self.tours.len()).all(|t| self.route(t).is_feasible_with(self.profile(t), &self.ctx))
    }

    pub fn total_travel_time(&self) -> Seconds {
        (0..self.tours.len())
            .map(|t| self.route(t).travel_time(&self.ctx))
            .sum()
    }

    /// Hash over tours and scheduled orders, stable within a process.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.tours.hash(&mut h);
        let mut orders: Vec<&Order> = self.ctx.orders().collect();
        orders.sort_by_key(|o| o.id);
        orders.hash(&mut h);
        h.finish()
    }
}

impl PartialEq for Schedule {
    fn eq(&self, other: &Self) -> bool {
        self.tours == other.tours
            && self.ctx.order_count() == other.ctx.order_count()
            && self
                .ctx
                .orders()
                .all(|o| other.ctx.order(o.id).is_ok_and(|p| p == o))
    }
}

pub fn is_schedule_feasible(schedule: &Schedule) -> bool {
    schedule.is_feasible()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::model::{EuclideanTravel, Location, WindowId, WindowSet};

    fn ctx() -> Context {
        let depot = Location::new(0, 0);
        Context::new(
            depot,
            WindowSet::new([(28800, 32400), (32400, 36000)]).unwrap(),
            Arc::new(EuclideanTravel::new(depot)),
        )
    }

    fn order(id: u32, x: i64, window: u32) -> Order {
        Order {
            id: OrderId(id),
            location: Location::new(x, 0),
            weight: 5,
            service: 300,
            window: WindowId(window),
        }
    }

    #[test]
    fn two_empty_tours_are_feasible() {
        let tours = vec![
            Tour::new(0, 27000, 66600, 200).unwrap(),
            Tour::new(1, 27000, 66600, 200).unwrap(),
        ];
        let s = Schedule::new(ctx(), tours).unwrap();
        assert!(s.is_feasible());
        assert!(is_schedule_feasible(&s));
        assert_eq!(s.total_travel_time(), 0);
    }

    #[test]
    fn one_bad_tour_makes_schedule_infeasible() {
        let mut c = ctx();
        c.add_order(order(1, 1000, 0)).unwrap();
        c.add_order(order(2, 1000, 1)).unwrap();
        let good = Tour::with_visits(0, 27000, 66600, 200, vec![OrderId(1)]).unwrap();
        // Shift starts after the 09:00-10:00 window closes.
        let bad = Tour::with_visits(1, 36500, 66600, 200, vec![OrderId(2)]).unwrap();
        let s = Schedule::new(c, vec![good, bad]).unwrap();
        assert!(s.route(0).is_feasible(s.context()));
        assert!(!s.is_feasible());
    }

    #[test]
    fn construction_validates_membership() {
        let mut c = ctx();
        c.add_order(order(1, 1000, 0)).unwrap();
        let t = Tour::new(0, 27000, 66600, 200).unwrap();
        assert_eq!(
            Schedule::new(c.clone(), vec![t.clone()]).unwrap_err(),
            ModelError::Unscheduled(OrderId(1))
        );
        let twice = Tour::with_visits(0, 27000, 66600, 200, vec![OrderId(1), OrderId(1)]).unwrap();
        assert_eq!(
            Schedule::new(c, vec![twice]).unwrap_err(),
            ModelError::DuplicateOrder(OrderId(1))
        );
    }

    #[test]
    fn insert_order_refreshes_profile() {
        let t = Tour::new(0, 27000, 66600, 200).unwrap();
        let mut s = Schedule::new(ctx(), vec![t]).unwrap();
        assert_eq!(s.profile(0).alpha.len(), 2);
        let before = s.fingerprint();
        s.insert_order(0, 0, order(1, 1000, 0)).unwrap();
        assert_eq!(s.profile(0).alpha.len(), 3);
        assert_ne!(before, s.fingerprint());
        assert_eq!(s.locate(OrderId(1)), Some((0, 0)));
        assert!(s.insert_order(0, 0, order(1, 1000, 0)).is_err());
    }
}
