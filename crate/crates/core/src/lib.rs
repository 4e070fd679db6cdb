//! Delivery slot availability for attended home delivery.
//!
//! Given a feasible schedule of vehicle tours and a prospective order, the
//! solvers in this crate decide which delivery time windows can still be
//! offered. Three methods of increasing power are provided:
//!
//! * [`simple`]: insertion into an existing tour without reordering,
//! * [`tsptw`]: exact resequencing of a single tour,
//! * [`ans`]: adaptive neighborhood search that relocates other orders
//!   between tours to free time and capacity.
//!
//! [`instance`], [`booking`] and [`bench`] generate benchmark instances,
//! fill schedules and run experiment grids.

pub mod ans;
pub mod bench;
pub mod booking;
pub mod instance;
pub mod io;
pub mod metrics;
pub mod model;
pub mod simple;
pub mod slots;
pub mod tsptw;

#[doc(hidden)]
pub mod testkit;
