//! Domain types, arrival-time propagation and insertion feasibility.

mod schedule;
mod tour;
mod travel;
mod types;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

pub use schedule::{is_schedule_feasible, Schedule};
pub use tour::{
    check_insertion_feasible, compute_arrival_profile, insertion_range, is_tour_feasible,
    ArrivalProfile, InsertionRange, Route, Tour,
};
pub use travel::{EuclideanTravel, MatrixTravel, Stop, TravelTime};
pub use types::{Location, Order, OrderId, Seconds, TimeWindow, WindowId, WindowSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("time window [{start}, {end}] is empty or reversed")]
    InvalidWindow { start: Seconds, end: Seconds },
    #[error("time window [{start}, {end}] listed twice")]
    DuplicateWindow { start: Seconds, end: Seconds },
    #[error("unknown window {0}")]
    UnknownWindow(WindowId),
    #[error("unknown order {0}")]
    UnknownOrder(OrderId),
    #[error("order {0} needs positive weight and service time")]
    InvalidOrder(OrderId),
    #[error("order {0} is already scheduled")]
    DuplicateOrder(OrderId),
    #[error("order {0} is not on any tour")]
    Unscheduled(OrderId),
    #[error("position {pos} outside 0..={max}")]
    PositionOutOfRange { pos: usize, max: usize },
    #[error("tour shift [{start}, {end}] is empty or reversed")]
    InvalidShift { start: Seconds, end: Seconds },
    #[error("tour capacity must be positive")]
    InvalidCapacity,
    #[error("travel matrix: {0}")]
    Matrix(String),
}

/// Everything a tour needs to be evaluated: the scheduled orders, the slot
/// set, the depot and the travel times. Cheap to clone.
#[derive(Clone, Debug)]
pub struct Context {
    depot: Location,
    windows: Arc<WindowSet>,
    orders: Arc<HashMap<OrderId, Order>>,
    travel: Arc<dyn TravelTime>,
}

impl Context {
    pub fn new(depot: Location, windows: WindowSet, travel: Arc<dyn TravelTime>) -> Self {
        Context {
            depot,
            windows: Arc::new(windows),
            orders: Arc::new(HashMap::new()),
            travel,
        }
    }

    pub fn depot(&self) -> Location {
        self.depot
    }

    pub fn windows(&self) -> &WindowSet {
        &self.windows
    }

    pub fn travel_provider(&self) -> &Arc<dyn TravelTime> {
        &self.travel
    }

    pub fn orders(&self) -> impl Iterator<Item = &Order> + '_ {
        self.orders.values()
    }

    pub fn order_count(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self, id: OrderId) -> Result<&Order, ModelError> {
        self.orders.get(&id).ok_or(ModelError::UnknownOrder(id))
    }

    pub fn contains(&self, id: OrderId) -> bool {
        self.orders.contains_key(&id)
    }

    pub fn window(&self, id: WindowId) -> Result<&TimeWindow, ModelError> {
        self.windows.get(id).ok_or(ModelError::UnknownWindow(id))
    }

    /// Window of an order already validated against this context.
    pub(crate) fn window_of(&self, order: &Order) -> &TimeWindow {
        self.windows
            .get(order.window)
            .expect("order window validated on entry")
    }

    pub fn travel(&self, from: Stop<'_>, to: Stop<'_>) -> Seconds {
        self.travel.travel(from, to)
    }

    pub(crate) fn add_order(&mut self, order: Order) -> Result<(), ModelError> {
        order.validate(&self.windows)?;
        if self.orders.contains_key(&order.id) {
            return Err(ModelError::DuplicateOrder(order.id));
        }
        Arc::make_mut(&mut self.orders).insert(order.id, order);
        Ok(())
    }
}
