use std::any::Any;
use std::collections::HashMap;
use std::fmt;

use super::types::{Location, Order, OrderId, Seconds};
use super::ModelError;

/// An endpoint of a leg: the depot or a customer.
#[derive(Clone, Copy, Debug)]
pub enum Stop<'a> {
    Depot,
    Customer(&'a Order),
}

impl Stop<'_> {
    pub fn service(&self) -> Seconds {
        match self {
            Stop::Depot => 0,
            Stop::Customer(o) => o.service,
        }
    }
}

/// Travel time between stops.
///
/// Implementations must return 0 for a stop to itself. Callers never assume
/// symmetry or the triangle inequality.
pub trait TravelTime: Send + Sync + fmt::Debug {
    fn travel(&self, from: Stop<'_>, to: Stop<'_>) -> Seconds;

    /// Whether `order` can be routed at all. Matrices only know their nodes.
    fn covers(&self, _order: &Order) -> bool {
        true
    }

    /// For serializers that need the concrete provider.
    fn as_any(&self) -> &dyn Any;
}

/// Travel proportional to the euclidean distance, scaled by a detour factor
/// and rounded to whole seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EuclideanTravel {
    pub depot: Location,
    pub correction: f64,
    pub speed_kmh: f64,
}

impl EuclideanTravel {
    pub const DEFAULT_CORRECTION: f64 = 1.5;
    pub const DEFAULT_SPEED_KMH: f64 = 20.0;

    pub fn new(depot: Location) -> Self {
        EuclideanTravel {
            depot,
            correction: Self::DEFAULT_CORRECTION,
            speed_kmh: Self::DEFAULT_SPEED_KMH,
        }
    }

    pub fn between(&self, a: &Location, b: &Location) -> Seconds {
        if a == b {
            return 0;
        }
        // meters * correction / (km/h * 1000 / 3600)
        (a.distance(b) * self.correction * 3600.0 / (self.speed_kmh * 1000.0)).round() as Seconds
    }

    fn locate(&self, stop: Stop<'_>) -> Location {
        match stop {
            Stop::Depot => self.depot,
            Stop::Customer(o) => o.location,
        }
    }
}

impl TravelTime for EuclideanTravel {
    fn travel(&self, from: Stop<'_>, to: Stop<'_>) -> Seconds {
        self.between(&self.locate(from), &self.locate(to))
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Explicit, possibly asymmetric travel matrix over the depot (row 0) and a
/// fixed list of orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixTravel {
    nodes: Vec<OrderId>,
    index: HashMap<OrderId, usize>,
    times: Vec<Seconds>,
}

impl MatrixTravel {
    /// `times` is row-major over `[depot, nodes...]`.
    pub fn new(nodes: Vec<OrderId>, times: Vec<Seconds>) -> Result<Self, ModelError> {
        let dim = nodes.len() + 1;
        if times.len() != dim * dim {
            return Err(ModelError::Matrix(format!(
                "expected {} entries for {} nodes, got {}",
                dim * dim,
                dim,
                times.len()
            )));
        }
        for k in 0..dim {
            if times[k * dim + k] != 0 {
                return Err(ModelError::Matrix(format!("non-zero diagonal at node {k}")));
            }
        }
        if let Some(t) = times.iter().find(|t| **t < 0) {
            return Err(ModelError::Matrix(format!("negative travel time {t}")));
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (k, id) in nodes.iter().enumerate() {
            if index.insert(*id, k + 1).is_some() {
                return Err(ModelError::Matrix(format!("duplicate node {id}")));
            }
        }
        Ok(MatrixTravel {
            nodes,
            index,
            times,
        })
    }

    pub fn nodes(&self) -> &[OrderId] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.nodes.len() + 1
    }

    pub fn contains(&self, id: OrderId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn row(&self, k: usize) -> &[Seconds] {
        let dim = self.dim();
        &self.times[k * dim..(k + 1) * dim]
    }

    fn slot(&self, stop: Stop<'_>) -> usize {
        match stop {
            Stop::Depot => 0,
            Stop::Customer(o) => *self
                .index
                .get(&o.id)
                .unwrap_or_else(|| panic!("order {} missing from travel matrix", o.id)),
        }
    }
}

impl TravelTime for MatrixTravel {
    fn travel(&self, from: Stop<'_>, to: Stop<'_>) -> Seconds {
        self.times[self.slot(from) * self.dim() + self.slot(to)]
    }

    fn covers(&self, order: &Order) -> bool {
        self.contains(order.id)
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WindowId;

    fn order_at(id: u32, x: i64, y: i64) -> Order {
        Order {
            id: OrderId(id),
            location: Location::new(x, y),
            weight: 1,
            service: 300,
            window: WindowId(0),
        }
    }

    #[test]
    fn euclidean_3_4_5() {
        let t = EuclideanTravel::new(Location::new(0, 0));
        let b = order_at(1, 3000, 4000);
        // 1.5 * 5000 m at 20 km/h
        let expected = (1.5f64 * 5000.0 / (20000.0 / 3600.0)).round() as i64;
        assert_eq!(expected, 1350);
        assert_eq!(t.travel(Stop::Depot, Stop::Customer(&b)), 1350);
        assert_eq!(t.travel(Stop::Customer(&b), Stop::Depot), 1350);
    }

    #[test]
    fn colocated_points_are_zero() {
        let t = EuclideanTravel::new(Location::new(7, 7));
        let a = order_at(1, 7, 7);
        let b = order_at(2, 7, 7);
        assert_eq!(t.travel(Stop::Customer(&a), Stop::Customer(&b)), 0);
        assert_eq!(t.travel(Stop::Customer(&b), Stop::Customer(&a)), 0);
        assert_eq!(t.travel(Stop::Depot, Stop::Customer(&a)), 0);
    }

    #[test]
    fn matrix_is_asymmetric_and_checked() {
        let m = MatrixTravel::new(vec![OrderId(5)], vec![0, 10, 99, 0]).unwrap();
        let a = order_at(5, 0, 0);
        assert_eq!(m.travel(Stop::Depot, Stop::Customer(&a)), 10);
        assert_eq!(m.travel(Stop::Customer(&a), Stop::Depot), 99);
        assert!(MatrixTravel::new(vec![OrderId(5)], vec![1, 10, 99, 0]).is_err());
        assert!(MatrixTravel::new(vec![OrderId(5)], vec![0, 10, 99]).is_err());
    }
}
