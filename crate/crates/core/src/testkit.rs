//! Randomized fixtures and brute-force oracles shared by unit, integration and
//! acceptance tests. Nothing here calls into the solvers; feasibility is
//! judged by straight forward simulation of a visit sequence.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    Context, Location, MatrixTravel, Order, OrderId, Route, Schedule, Seconds, Stop, TimeWindow,
    Tour, WindowId, WindowSet,
};

/// Forward simulation: wait for window openings, reject late arrivals,
/// late returns and overload.
pub fn simulate_feasible(route: &Route<'_>, ctx: &Context) -> bool {
    if route.load() > route.capacity as u64 {
        return false;
    }
    simulate_from(route, ctx, 0, route.shift_start).is_some()
}

/// Simulates from position `pos` (arriving there at `arrival`, with no
/// waiting applied at `pos` itself). Returns the depot return time.
fn simulate_from(route: &Route<'_>, ctx: &Context, pos: usize, arrival: Seconds) -> Option<Seconds> {
    let n = route.len();
    let mut here = route.stop(pos);
    if let Stop::Customer(o) = here {
        if arrival > ctx.window(o.window).unwrap().end {
            return None;
        }
    }
    let mut clock = arrival;
    for next in pos + 1..=n {
        let o = route.stops[next - 1];
        let w = ctx.window(o.window).unwrap();
        let reach = clock + here.service() + ctx.travel(here, Stop::Customer(o));
        let at = reach.max(w.start);
        if at > w.end {
            return None;
        }
        clock = at;
        here = Stop::Customer(o);
    }
    let back = clock + here.service() + ctx.travel(here, Stop::Depot);
    (back <= route.shift_end).then_some(back)
}

/// Earliest arrivals by simulation, positions `0..=n+1`.
pub fn simulated_alpha(route: &Route<'_>, ctx: &Context) -> Vec<Seconds> {
    let mut out = vec![route.shift_start];
    let mut clock = route.shift_start;
    let mut here = Stop::Depot;
    for o in &route.stops {
        let w = ctx.window(o.window).unwrap();
        clock = (clock + here.service() + ctx.travel(here, Stop::Customer(o))).max(w.start);
        out.push(clock);
        here = Stop::Customer(o);
    }
    out.push(clock + here.service() + ctx.travel(here, Stop::Depot));
    out
}

/// Latest arrival at position `pos` that keeps the remainder feasible, found by
/// bisection over the simulated suffix.
pub fn searched_beta(route: &Route<'_>, ctx: &Context, pos: usize) -> Seconds {
    if pos == route.len() + 1 {
        return route.shift_end;
    }
    let mut lo: Seconds = -1_000_000;
    let mut hi: Seconds = route.shift_end;
    if simulate_from(route, ctx, pos, lo).is_none() {
        return lo;
    }
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        if simulate_from(route, ctx, pos, mid).is_some() {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// The two insertion-point set comprehensions, evaluated literally with
/// simulated arrival times. `(1, 0)` when either set is empty.
pub fn brute_force_theta(
    tour: &Tour,
    candidate: &Order,
    window: &TimeWindow,
    ctx: &Context,
) -> (usize, usize) {
    let route = tour.resolve(ctx).unwrap();
    let n = route.len();
    let alpha = simulated_alpha(&route, ctx);
    let lo = (0..=n).find(|&i| window.start + candidate.service <= searched_beta(&route, ctx, i + 1));
    let hi = (0..=n)
        .filter(|&i| alpha[i] + route.stop(i).service() <= window.end)
        .max();
    match (lo, hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => (1, 0),
    }
}

/// All positions at which `candidate` (bound to `window`) can be inserted,
/// by simulation.
pub fn feasible_positions(tour: &Tour, candidate: &Order, window: WindowId, ctx: &Context) -> Vec<usize> {
    let route = tour.resolve(ctx).unwrap();
    let cand = candidate.in_window(window);
    (0..=route.len())
        .filter(|&i| simulate_feasible(&route.with_inserted(i, &cand), ctx))
        .collect()
}

/// Calls `visit` with every permutation of `items` (Heap's algorithm).
pub fn for_each_permutation<T: Clone>(items: &[T], mut visit: impl FnMut(&[T]) -> bool) -> bool {
    let mut a = items.to_vec();
    let n = a.len();
    let mut c = vec![0usize; n];
    if visit(&a) {
        return true;
    }
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            if visit(&a) {
                return true;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    false
}

/// Back-to-back hourly windows from 08:00, or staggered 90-minute
/// windows overlapping by 30 minutes.
pub fn small_window_set(rng: &mut impl Rng, count: usize) -> WindowSet {
    let base = 8 * 3600;
    if rng.gen_bool(0.5) {
        WindowSet::new((0..count as i64).map(|k| (base + k * 3600, base + (k + 1) * 3600))).unwrap()
    } else {
        WindowSet::new((0..count as i64).map(|k| (base + k * 3600, base + k * 3600 + 5400))).unwrap()
    }
}

/// Uniform travel times in `[0, max]`: asymmetric, with frequent
/// triangle-inequality violations. A few entries are zero.
pub fn random_matrix(rng: &mut impl Rng, nodes: Vec<OrderId>, max: Seconds) -> MatrixTravel {
    let dim = nodes.len() + 1;
    let mut times = vec![0; dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            if a != b {
                times[a * dim + b] = if rng.gen_bool(0.05) { 0 } else { rng.gen_range(1..=max) };
            }
        }
    }
    MatrixTravel::new(nodes, times).unwrap()
}

pub fn random_order(rng: &mut impl Rng, id: u32, windows: &WindowSet) -> Order {
    Order {
        id: OrderId(id),
        location: Location::new(rng.gen_range(0..1000), rng.gen_range(0..1000)),
        weight: rng.gen_range(1..=8),
        service: rng.gen_range(60..=600),
        window: WindowId(rng.gen_range(0..windows.len() as u32)),
    }
}

/// A single feasible tour plus a prospective order not on it.
pub struct TourCase {
    pub ctx: Context,
    pub tour: Tour,
    pub candidate: Order,
}

/// A feasible tour of at most `max_n` visits over an asymmetric,
/// triangle-violating matrix.
pub fn random_feasible_case(seed: u64, max_n: usize) -> TourCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(2..=5);
    let windows = small_window_set(&mut rng, count);
    let pool: Vec<Order> = (0..max_n as u32 + 1).map(|k| random_order(&mut rng, k + 1, &windows)).collect();
    let candidate = pool[max_n];
    let ids: Vec<OrderId> = pool.iter().map(|o| o.id).collect();
    let max_travel = *[300, 900, 1800].choose(&mut rng).unwrap();
    let travel = random_matrix(&mut rng, ids, max_travel);
    let mut ctx = Context::new(Location::new(500, 500), windows, Arc::new(travel));

    let mut members: Vec<(Seconds, u32, Order)> = pool[..max_n]
        .iter()
        .map(|o| (ctx.window(o.window).unwrap().start, rng.gen_range(0..4), *o))
        .collect();
    members.sort_by_key(|(start, jitter, o)| (*start, *jitter, o.id));
    let capacity = rng.gen_range(10..=40);
    let shift_end = rng.gen_range(12 * 3600..=14 * 3600);
    let mut tour = Tour::new(0, 7 * 3600 + 1800, shift_end, capacity).unwrap();

    // Greedy: keep each order if appending it stays feasible.
    let mut kept: Vec<Order> = Vec::new();
    for (_, _, o) in members {
        let mut trial: Vec<&Order> = kept.iter().collect();
        trial.push(&o);
        let route = Route {
            stops: trial,
            shift_start: tour.shift_start,
            shift_end: tour.shift_end,
            capacity: tour.capacity,
        };
        if simulate_feasible(&route, &ctx) {
            kept.push(o);
        }
    }
    for o in &kept {
        ctx.add_order(*o).unwrap();
    }
    tour = tour.with_sequence(kept.iter().map(|o| o.id).collect());
    debug_assert!(simulate_feasible(&tour.resolve(&ctx).unwrap(), &ctx));
    TourCase {
        ctx,
        tour,
        candidate,
    }
}

/// A feasible multi-tour schedule plus a prospective order.
pub struct ScheduleCase {
    pub schedule: Schedule,
    pub candidate: Order,
}

/// Orders are offered one by one and placed at the first feasible (tour,
/// position) found by simulation; rejected orders are dropped.
pub fn random_schedule_case(seed: u64, tours: usize, offered: usize) -> ScheduleCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(2..=4);
    let windows = small_window_set(&mut rng, count);
    let pool: Vec<Order> = (0..offered as u32 + 1).map(|k| random_order(&mut rng, k + 1, &windows)).collect();
    let candidate = pool[offered];
    let ids: Vec<OrderId> = pool.iter().map(|o| o.id).collect();
    let max_travel = *[300, 600, 1200].choose(&mut rng).unwrap();
    let travel = random_matrix(&mut rng, ids, max_travel);
    let mut ctx = Context::new(Location::new(500, 500), windows, Arc::new(travel));
    let capacity = rng.gen_range(12..=30);
    let shift_end = rng.gen_range(11 * 3600..=13 * 3600);
    let mut plan: Vec<Vec<Order>> = vec![Vec::new(); tours];

    for o in &pool[..offered] {
        'placed: for seq in plan.iter_mut() {
            for i in 0..=seq.len() {
                let mut trial: Vec<&Order> = seq.iter().collect();
                trial.insert(i, o);
                let route = Route {
                    stops: trial,
                    shift_start: 7 * 3600 + 1800,
                    shift_end,
                    capacity,
                };
                if simulate_feasible(&route, &ctx) {
                    seq.insert(i, *o);
                    break 'placed;
                }
            }
        }
    }
    let mut built = Vec::with_capacity(tours);
    for (v, seq) in plan.iter().enumerate() {
        for o in seq {
            ctx.add_order(*o).unwrap();
        }
        built.push(
            Tour::with_visits(v as u32, 7 * 3600 + 1800, shift_end, capacity, seq.iter().map(|o| o.id).collect())
                .unwrap(),
        );
    }
    ScheduleCase {
        schedule: Schedule::new(ctx, built).unwrap(),
        candidate,
    }
}

pub struct ThreeCustomerFixture {
    pub ctx: Context,
    pub tour: Tour,
    pub candidate: Order,
}

/// Windows 08-09, 09-10, 10-11 with one customer each, 600 s between any two
/// stops, 300 s service. The candidate shares the same travel times.
pub fn hourly_three_customer_fixture() -> ThreeCustomerFixture {
    let windows = WindowSet::new([(28800, 32400), (32400, 36000), (36000, 39600)]).unwrap();
    let ids: Vec<OrderId> = (1..=4).map(OrderId).collect();
    let dim = ids.len() + 1;
    let times = (0..dim * dim)
        .map(|k| if k / dim == k % dim { 0 } else { 600 })
        .collect();
    let travel = MatrixTravel::new(ids, times).unwrap();
    let mut ctx = Context::new(Location::new(0, 0), windows, Arc::new(travel));
    for k in 0..3u32 {
        ctx.add_order(Order {
            id: OrderId(k + 1),
            location: Location::new(k as i64, 0),
            weight: 3,
            service: 300,
            window: WindowId(k),
        })
        .unwrap();
    }
    let tour = Tour::with_visits(0, 27000, 39600 + 1800, 50, vec![OrderId(1), OrderId(2), OrderId(3)]).unwrap();
    let candidate = Order {
        id: OrderId(4),
        location: Location::new(9, 9),
        weight: 3,
        service: 300,
        window: WindowId(1),
    };
    ThreeCustomerFixture {
        ctx,
        tour,
        candidate,
    }
}
