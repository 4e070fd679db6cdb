//! Exact single-tour resequencing: can the candidate join a tour if that
//! tour's visits may be reordered freely?
//!
//! The search is a depth-first enumeration of visit sequences in window
//! order, pruned by arrival bounds and a dominance table. It is complete: an
//! `Infeasible` answer means no sequence exists.

use std::collections::HashMap;
use std::time::Instant;

use thiserror::Error;

use crate::model::{Context, ModelError, Order, OrderId, Schedule, Seconds, Stop, TimeWindow};
use crate::simple::simple_insert_into;
use crate::slots::{Method, SlotQuery, SlotResult, Verdict, Witness, WindowOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TsptwError {
    #[error("{orders} orders exceed the search limit of {cap}")]
    TooLarge { orders: usize, cap: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Largest instance accepted, at most 64.
    pub max_orders: usize,
    /// Node expansions before giving up.
    pub node_budget: u64,
    /// Disabling pruning must never change a verdict, only the run time.
    pub prune: bool,
    pub memo_capacity: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_orders: 64,
            node_budget: 10_000_000,
            prune: true,
            memo_capacity: 1 << 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TsptwOutcome {
    Feasible(Vec<OrderId>),
    Infeasible,
    BudgetExhausted { nodes: u64 },
}

/// One tour's orders plus the candidate, with travel times tabulated.
/// Node 0 is the depot; order `k` is node `k + 1`.
#[derive(Clone, Debug)]
pub struct TsptwInstance {
    orders: Vec<Order>,
    windows: Vec<(Seconds, Seconds)>,
    travel: Vec<Seconds>,
    shift_start: Seconds,
    shift_end: Seconds,
    capacity: u32,
}

impl TsptwInstance {
    /// `orders` carry their own window assignment, resolved against `ctx`.
    pub fn new(
        ctx: &Context,
        mut orders: Vec<Order>,
        shift_start: Seconds,
        shift_end: Seconds,
        capacity: u32,
    ) -> Result<Self, ModelError> {
        let mut windows = Vec::with_capacity(orders.len());
        for o in &orders {
            ctx.window(o.window)?;
        }
        orders.sort_by_key(|o| (ctx.window_of(o).start, o.id));
        for o in &orders {
            let w = ctx.window_of(o);
            windows.push((w.start, w.end));
        }
        let dim = orders.len() + 1;
        let node = |k: usize| {
            if k == 0 {
                Stop::Depot
            } else {
                Stop::Customer(&orders[k - 1])
            }
        };
        let mut travel = vec![0; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                if a != b {
                    travel[a * dim + b] = ctx.travel(node(a), node(b));
                }
            }
        }
        Ok(TsptwInstance {
            orders,
            windows,
            travel,
            shift_start,
            shift_end,
            capacity,
        })
    }

    /// Visits of tour `tour` plus `candidate` assigned to `window`.
    pub fn from_tour(
        schedule: &Schedule,
        tour: usize,
        candidate: &Order,
        window: &TimeWindow,
    ) -> Result<Self, ModelError> {
        let ctx = schedule.context();
        let t = schedule.tour(tour);
        let mut orders = t
            .visits()
            .iter()
            .map(|id| ctx.order(*id).copied())
            .collect::<Result<Vec<_>, _>>()?;
        orders.push(candidate.in_window(window.id));
        Self::new(ctx, orders, t.shift_start, t.shift_end, t.capacity)
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    fn dim(&self) -> usize {
        self.orders.len() + 1
    }

    fn t(&self, a: usize, b: usize) -> Seconds {
        self.travel[a * self.dim() + b]
    }

    fn service(&self, node: usize) -> Seconds {
        if node == 0 {
            0
        } else {
            self.orders[node - 1].service
        }
    }
}

struct Search<'i> {
    inst: &'i TsptwInstance,
    limits: SearchLimits,
    nodes: u64,
    /// Cheapest travel into each order from any other order.
    min_in: Vec<Seconds>,
    /// (visited, last) -> earliest departure already shown to fail.
    failed: HashMap<(u64, usize), Seconds>,
    path: Vec<usize>,
}

enum Step {
    Found,
    Dead,
    Budget,
}

impl Search<'_> {
    fn run(&mut self) -> Step {
        self.extend(0, 0, self.inst.shift_start)
    }

    /// `depart` is the time the vehicle leaves `last` (service included).
    fn extend(&mut self, visited: u64, last: usize, depart: Seconds) -> Step {
        let inst = self.inst;
        let n = inst.len();
        if visited.count_ones() as usize == n {
            return if depart + inst.t(last, 0) <= inst.shift_end {
                Step::Found
            } else {
                Step::Dead
            };
        }
        if self.limits.prune {
            if self.dominated(visited, last, depart) || !self.bounds_hold(visited, last, depart) {
                return Step::Dead;
            }
        }
        for k in 1..=n {
            let bit = 1u64 << (k - 1);
            if visited & bit != 0 {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.limits.node_budget {
                return Step::Budget;
            }
            let (start, end) = inst.windows[k - 1];
            let arrive = (depart + inst.t(last, k)).max(start);
            if arrive > end {
                continue;
            }
            self.path.push(k);
            match self.extend(visited | bit, k, arrive + inst.service(k)) {
                Step::Found => return Step::Found,
                Step::Budget => return Step::Budget,
                Step::Dead => {
                    self.path.pop();
                }
            }
        }
        if self.limits.prune {
            self.remember(visited, last, depart);
        }
        Step::Dead
    }

    fn dominated(&self, visited: u64, last: usize, depart: Seconds) -> bool {
        self.failed
            .get(&(visited, last))
            .is_some_and(|&seen| seen <= depart)
    }

    fn remember(&mut self, visited: u64, last: usize, depart: Seconds) {
        let key = (visited, last);
        if let Some(seen) = self.failed.get_mut(&key) {
            *seen = (*seen).min(depart);
        } else if self.failed.len() < self.limits.memo_capacity {
            self.failed.insert(key, depart);
        }
    }

    /// Lower bounds that any completion must satisfy: every remaining order
    /// is still reachable before its window closes, and the remaining service
    /// and entry legs fit before the shift ends.
    fn bounds_hold(&self, visited: u64, last: usize, depart: Seconds) -> bool {
        let inst = self.inst;
        let mut work = 0;
        let mut back = Seconds::MAX;
        for k in 1..=inst.len() {
            if visited & (1u64 << (k - 1)) != 0 {
                continue;
            }
            let entry = self.min_in[k].min(inst.t(last, k));
            if depart + entry > inst.windows[k - 1].1 {
                return false;
            }
            work += inst.service(k) + entry;
            back = back.min(inst.t(k, 0));
        }
        depart + work + back <= inst.shift_end
    }
}

/// Finds a feasible ordering of all instance orders or proves none exists.
pub fn tsptw_feasible(inst: &TsptwInstance, limits: &SearchLimits) -> Result<TsptwOutcome, TsptwError> {
    let cap = limits.max_orders.min(64);
    if inst.len() > cap {
        return Err(TsptwError::TooLarge {
            orders: inst.len(),
            cap,
        });
    }
    let load: u64 = inst.orders.iter().map(|o| o.weight as u64).sum();
    if load > inst.capacity as u64 {
        return Ok(TsptwOutcome::Infeasible);
    }
    let n = inst.len();
    // The depot only precedes the first visit; bounds_hold() covers that
    // leg through `last`.
    let min_in = (0..=n)
        .map(|k| {
            (1..=n)
                .filter(|&a| a != k)
                .map(|a| inst.t(a, k))
                .min()
                .unwrap_or(Seconds::MAX / 4)
        })
        .collect();
    let mut search = Search {
        inst,
        limits: *limits,
        nodes: 0,
        min_in,
        failed: HashMap::new(),
        path: Vec::with_capacity(n),
    };
    Ok(match search.run() {
        Step::Found => TsptwOutcome::Feasible(search.path.iter().map(|&k| inst.orders[k - 1].id).collect()),
        Step::Dead => TsptwOutcome::Infeasible,
        Step::Budget => TsptwOutcome::BudgetExhausted { nodes: search.nodes },
    })
}

/// Per window, per tour: accept the window on the first tour that can be
/// resequenced to take the candidate. Tours where plain insertion already
/// works are accepted without searching.
pub fn solve_sop_tsptw(query: &SlotQuery<'_>, limits: &SearchLimits) -> SlotResult {
    let started = Instant::now();
    let schedule = query.schedule;
    let ctx = schedule.context();
    let outcomes = query
        .windows
        .iter()
        .map(|&w| {
            let t0 = Instant::now();
            let window = ctx.window(w).expect("query windows validated");
            let verdict = window_verdict(schedule, &query.candidate, window, limits);
            WindowOutcome {
                window: w,
                verdict,
                elapsed: t0.elapsed(),
            }
        })
        .collect();
    SlotResult {
        method: Method::Tsptw,
        outcomes,
        elapsed: started.elapsed(),
    }
}

fn window_verdict(schedule: &Schedule, candidate: &Order, window: &TimeWindow, limits: &SearchLimits) -> Verdict {
    let mut undecided = Vec::new();
    for tour in 0..schedule.len() {
        if let Some(position) = simple_insert_into(schedule, tour, candidate, window) {
            return Verdict::Available(Witness::Position { tour, position });
        }
        let inst = match TsptwInstance::from_tour(schedule, tour, candidate, window) {
            Ok(inst) => inst,
            Err(e) => {
                undecided.push(format!("tour {tour}: {e}"));
                continue;
            }
        };
        match tsptw_feasible(&inst, limits) {
            Ok(TsptwOutcome::Feasible(visits)) => {
                return Verdict::Available(Witness::Sequence { tour, visits });
            }
            Ok(TsptwOutcome::Infeasible) => {}
            Ok(TsptwOutcome::BudgetExhausted { nodes }) => {
                undecided.push(format!("tour {tour}: budget exhausted after {nodes} nodes"));
            }
            Err(e) => undecided.push(format!("tour {tour}: {e}")),
        }
    }
    if undecided.is_empty() {
        Verdict::Unavailable
    } else {
        Verdict::Undecided(undecided.join("; "))
    }
}
