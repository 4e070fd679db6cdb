//! Versioned plain-text formats for instances, schedules and booking
//! trajectories.
//!
//! Every file starts with `<kind> <version>`, holds one record per line and
//! ends with `end`. Blank lines and `#` comments are ignored. Lengths are
//! meters, times seconds, weights integer units. Floats are written in
//! shortest round-trip form, so `write(read(text)) == text` for any file this
//! module wrote.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::ans::{Move, SwapPartner};
use crate::booking::{FillEvent, FillTrajectory, Scenario};
use crate::instance::{Cluster, DepotPlacement, GenConfig, GenError, Instance, Setup, WeightDist};
use crate::model::{
    Context, EuclideanTravel, Location, MatrixTravel, ModelError, Order, OrderId, Schedule, Seconds,
    Tour, TravelTime, WindowId, WindowSet,
};

pub const FORMAT_VERSION: u32 = 1;

const INSTANCE: &str = "sop-instance";
const SCHEDULE: &str = "sop-schedule";
const TRAJECTORY: &str = "sop-trajectory";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("expected a `{expected}` file, found `{found}`")]
    Kind { expected: &'static str, found: String },
    #[error("{kind} format version {found} is not supported (this build reads {FORMAT_VERSION})")]
    Version { kind: &'static str, found: u32 },
    #[error("line {line}: {source}")]
    Model { line: usize, source: ModelError },
    #[error("instance: {0}")]
    Gen(#[from] GenError),
    #[error("travel provider {0} has no file representation")]
    Travel(String),
}

// ---------------------------------------------------------------- reading

struct Lines<'a> {
    inner: Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, Vec<&'a str>)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("")))
                .map(|(k, l)| (k, l.split_whitespace().collect::<Vec<_>>()))
                .filter(|(_, t)| !t.is_empty()),
        );
        Lines {
            inner: it,
            last: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FormatError> {
        Err(FormatError::Syntax {
            line: self.last,
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Result<Vec<&'a str>, FormatError> {
        match self.inner.next() {
            Some((line, toks)) => {
                self.last = line;
                Ok(toks)
            }
            None => self.err("unexpected end of file"),
        }
    }

    /// Next record, which must start with `key`; returns the remaining fields.
    fn record(&mut self, key: &str) -> Result<Vec<&'a str>, FormatError> {
        let toks = self.next()?;
        if toks[0] != key {
            return self.err(format!("expected `{key}`, found `{}`", toks[0]));
        }
        Ok(toks[1..].to_vec())
    }

    /// Like `record` but also checks the field count.
    fn fields(&mut self, key: &str, n: usize) -> Result<Vec<&'a str>, FormatError> {
        let f = self.record(key)?;
        if f.len() != n {
            return self.err(format!("`{key}` takes {n} fields, found {}", f.len()));
        }
        Ok(f)
    }

    fn value<T: FromStr>(&mut self, key: &str) -> Result<T, FormatError> {
        let f = self.fields(key, 1)?;
        self.parse(f[0])
    }

    fn parse<T: FromStr>(&self, tok: &str) -> Result<T, FormatError> {
        match tok.parse() {
            Ok(v) => Ok(v),
            Err(_) => self.err(format!("cannot parse `{tok}`")),
        }
    }

    fn header(&mut self, kind: &'static str) -> Result<(), FormatError> {
        let toks = self.next()?;
        if toks[0] != kind {
            return Err(FormatError::Kind {
                expected: kind,
                found: toks[0].to_string(),
            });
        }
        if toks.len() != 2 {
            return self.err("header is `<kind> <version>`");
        }
        let found: u32 = self.parse(toks[1])?;
        if found != FORMAT_VERSION {
            return Err(FormatError::Version { kind, found });
        }
        Ok(())
    }

    fn end(&mut self) -> Result<(), FormatError> {
        self.fields("end", 0)?;
        if let Some((line, toks)) = self.inner.next() {
            self.last = line;
            return self.err(format!("trailing `{}` after `end`", toks[0]));
        }
        Ok(())
    }

    fn model<T>(&self, r: Result<T, ModelError>) -> Result<T, FormatError> {
        r.map_err(|source| FormatError::Model {
            line: self.last,
            source,
        })
    }
}

fn read_windows(lines: &mut Lines<'_>) -> Result<WindowSet, FormatError> {
    let n: usize = lines.value("windows")?;
    let mut spans = Vec::with_capacity(n);
    for k in 0..n {
        let f = lines.fields("window", 3)?;
        let id: u32 = lines.parse(f[0])?;
        if id as usize != k {
            return lines.err(format!("window ids must run 0..{n}, found {id}"));
        }
        spans.push((lines.parse::<Seconds>(f[1])?, lines.parse::<Seconds>(f[2])?));
    }
    lines.model(WindowSet::new(spans))
}

fn read_order(lines: &mut Lines<'_>) -> Result<Order, FormatError> {
    let f = lines.fields("order", 6)?;
    Ok(Order {
        id: OrderId(lines.parse(f[0])?),
        location: Location::new(lines.parse(f[1])?, lines.parse(f[2])?),
        weight: lines.parse(f[3])?,
        service: lines.parse(f[4])?,
        window: WindowId(lines.parse(f[5])?),
    })
}

fn read_location(lines: &mut Lines<'_>, key: &str) -> Result<Location, FormatError> {
    let f = lines.fields(key, 2)?;
    Ok(Location::new(lines.parse(f[0])?, lines.parse(f[1])?))
}

// ---------------------------------------------------------------- writing

fn write_windows(out: &mut String, windows: &WindowSet) {
    writeln!(out, "windows {}", windows.len()).unwrap();
    for w in windows.iter() {
        writeln!(out, "window {} {} {}", w.id.0, w.start, w.end).unwrap();
    }
}

fn write_order(out: &mut String, o: &Order) {
    writeln!(
        out,
        "order {} {} {} {} {} {}",
        o.id.0, o.location.x, o.location.y, o.weight, o.service, o.window.0
    )
    .unwrap();
}

// ---------------------------------------------------------------- instances

pub fn write_instance(inst: &Instance) -> String {
    let c = &inst.config;
    let mut out = String::new();
    writeln!(out, "{INSTANCE} {FORMAT_VERSION}").unwrap();
    writeln!(out, "# units: meters, seconds, weight units").unwrap();
    writeln!(out, "seed {}", c.seed).unwrap();
    writeln!(out, "grid {}", c.grid_size).unwrap();
    writeln!(out, "clustered-fraction {}", c.clustered_fraction).unwrap();
    writeln!(out, "variance {} {}", c.variance.0, c.variance.1).unwrap();
    writeln!(out, "vehicles {}", c.vehicles).unwrap();
    writeln!(out, "capacity {}", c.capacity).unwrap();
    writeln!(out, "shift {} {}", c.shift_start, c.shift_end).unwrap();
    writeln!(out, "service {}", c.service).unwrap();
    let w = &c.weight;
    writeln!(out, "weight {} {} {} {}", w.mean, w.sd, w.lo, w.hi).unwrap();
    writeln!(out, "setup {}", c.setup).unwrap();
    writeln!(out, "depot {} {} {}", c.depot, inst.depot.x, inst.depot.y).unwrap();
    writeln!(out, "travel derive-euclidean {} {}", c.distance_correction, c.speed_kmh).unwrap();
    write_windows(&mut out, &inst.windows);
    writeln!(out, "clusters {}", inst.clusters.len()).unwrap();
    for k in &inst.clusters {
        writeln!(
            out,
            "cluster {} {} {} {} {}",
            k.center.0, k.center.1, k.sd.0, k.sd.1, k.angle
        )
        .unwrap();
    }
    writeln!(out, "pool {}", inst.pool.len()).unwrap();
    for o in &inst.pool {
        write_order(&mut out, o);
    }
    out.push_str("end\n");
    out
}

pub fn read_instance(text: &str) -> Result<Instance, FormatError> {
    let mut lines = Lines::new(text);
    lines.header(INSTANCE)?;
    let seed = lines.value("seed")?;
    let grid_size = lines.value("grid")?;
    let clustered_fraction = lines.value("clustered-fraction")?;
    let f = lines.fields("variance", 2)?;
    let variance = (lines.parse(f[0])?, lines.parse(f[1])?);
    let vehicles = lines.value("vehicles")?;
    let capacity = lines.value("capacity")?;
    let f = lines.fields("shift", 2)?;
    let (shift_start, shift_end) = (lines.parse(f[0])?, lines.parse(f[1])?);
    let service = lines.value("service")?;
    let f = lines.fields("weight", 4)?;
    let weight = WeightDist {
        mean: lines.parse(f[0])?,
        sd: lines.parse(f[1])?,
        lo: lines.parse(f[2])?,
        hi: lines.parse(f[3])?,
    };
    let setup: Setup = lines.value("setup")?;
    let f = lines.fields("depot", 3)?;
    let depot_placement: DepotPlacement = lines.parse(f[0])?;
    let depot = Location::new(lines.parse(f[1])?, lines.parse(f[2])?);
    let f = lines.fields("travel", 3)?;
    if f[0] != "derive-euclidean" {
        return lines.err("instances only support `travel derive-euclidean <correction> <km/h>`");
    }
    let (distance_correction, speed_kmh) = (lines.parse(f[1])?, lines.parse(f[2])?);
    let windows = read_windows(&mut lines)?;

    let n: usize = lines.value("clusters")?;
    let mut clusters = Vec::with_capacity(n);
    for _ in 0..n {
        let f = lines.fields("cluster", 5)?;
        clusters.push(Cluster {
            center: (lines.parse(f[0])?, lines.parse(f[1])?),
            sd: (lines.parse(f[2])?, lines.parse(f[3])?),
            angle: lines.parse(f[4])?,
        });
    }
    let n: usize = lines.value("pool")?;
    let mut pool = Vec::with_capacity(n);
    for _ in 0..n {
        let o = read_order(&mut lines)?;
        lines.model(o.validate(&windows))?;
        pool.push(o);
    }
    lines.end()?;

    let config = GenConfig {
        seed,
        grid_size,
        clusters: clusters.len(),
        clustered_fraction,
        variance,
        pool_size: pool.len(),
        vehicles,
        depot: depot_placement,
        speed_kmh,
        distance_correction,
        service,
        weight,
        capacity,
        setup,
        shift_start,
        shift_end,
    };
    config.validate()?;
    let mut ids: Vec<OrderId> = pool.iter().map(|o| o.id).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(FormatError::Model {
            line: 0,
            source: ModelError::DuplicateOrder(w[0]),
        });
    }
    Ok(Instance {
        config,
        depot,
        windows,
        clusters,
        pool,
    })
}

// ---------------------------------------------------------------- schedules

/// Fails only for travel providers other than [`EuclideanTravel`] and
/// [`MatrixTravel`].
pub fn write_schedule(schedule: &Schedule) -> Result<String, FormatError> {
    let ctx = schedule.context();
    let mut out = String::new();
    writeln!(out, "{SCHEDULE} {FORMAT_VERSION}").unwrap();
    writeln!(out, "# units: meters, seconds, weight units").unwrap();
    writeln!(out, "depot {} {}", ctx.depot().x, ctx.depot().y).unwrap();
    let travel = ctx.travel_provider().as_any();
    if let Some(e) = travel.downcast_ref::<EuclideanTravel>() {
        if e.depot != ctx.depot() {
            return Err(FormatError::Travel("with a depot other than the schedule's".into()));
        }
        writeln!(out, "travel derive-euclidean {} {}", e.correction, e.speed_kmh).unwrap();
    } else if let Some(m) = travel.downcast_ref::<MatrixTravel>() {
        writeln!(out, "travel matrix {}", m.nodes().len()).unwrap();
        for k in 0..m.dim() {
            let label = if k == 0 { "depot".to_string() } else { m.nodes()[k - 1].0.to_string() };
            write!(out, "row {label}").unwrap();
            for t in m.row(k) {
                write!(out, " {t}").unwrap();
            }
            out.push('\n');
        }
    } else {
        return Err(FormatError::Travel(format!("{:?}", ctx.travel_provider())));
    }
    write_windows(&mut out, ctx.windows());

    let mut orders: Vec<&Order> = ctx.orders().collect();
    orders.sort_by_key(|o| o.id);
    writeln!(out, "orders {}", orders.len()).unwrap();
    for o in orders {
        write_order(&mut out, o);
    }
    writeln!(out, "tours {}", schedule.len()).unwrap();
    for t in schedule.tours() {
        write!(out, "tour {} {} {} {} :", t.vehicle, t.shift_start, t.shift_end, t.capacity).unwrap();
        for id in t.visits() {
            write!(out, " {}", id.0).unwrap();
        }
        out.push('\n');
    }
    out.push_str("end\n");
    Ok(out)
}

fn read_travel(lines: &mut Lines<'_>, depot: Location) -> Result<Arc<dyn TravelTime>, FormatError> {
    let f = lines.record("travel")?;
    match f.first().copied() {
        Some("derive-euclidean") if f.len() == 3 => Ok(Arc::new(EuclideanTravel {
            depot,
            correction: lines.parse(f[1])?,
            speed_kmh: lines.parse(f[2])?,
        })),
        Some("matrix") if f.len() == 2 => {
            let n: usize = lines.parse(f[1])?;
            let mut nodes = Vec::with_capacity(n);
            let mut times = Vec::with_capacity((n + 1) * (n + 1));
            for k in 0..=n {
                let r = lines.record("row")?;
                if r.len() != n + 2 {
                    return lines.err(format!("matrix row needs a label and {} times", n + 1));
                }
                if k == 0 {
                    if r[0] != "depot" {
                        return lines.err("the first matrix row is `row depot ...`");
                    }
                } else {
                    nodes.push(OrderId(lines.parse(r[0])?));
                }
                for t in &r[1..] {
                    times.push(lines.parse(t)?);
                }
            }
            Ok(Arc::new(lines.model(MatrixTravel::new(nodes, times))?))
        }
        _ => lines.err("expected `travel derive-euclidean <correction> <km/h>` or `travel matrix <n>`"),
    }
}

/// Parses and validates a schedule. Infeasible schedules are accepted; the
/// caller decides whether that matters.
pub fn read_schedule(text: &str) -> Result<Schedule, FormatError> {
    let mut lines = Lines::new(text);
    lines.header(SCHEDULE)?;
    let depot = read_location(&mut lines, "depot")?;
    let travel = read_travel(&mut lines, depot)?;
    let windows = read_windows(&mut lines)?;
    let mut ctx = Context::new(depot, windows, travel.clone());
    let matrix = travel.as_any().downcast_ref::<MatrixTravel>();

    let n: usize = lines.value("orders")?;
    for _ in 0..n {
        let o = read_order(&mut lines)?;
        if matrix.is_some_and(|m| !m.contains(o.id)) {
            return lines.err(format!("order {} has no travel matrix row", o.id));
        }
        lines.model(ctx.add_order(o))?;
    }
    let n: usize = lines.value("tours")?;
    let mut tours = Vec::with_capacity(n);
    for _ in 0..n {
        let f = lines.record("tour")?;
        if f.len() < 5 || f[4] != ":" {
            return lines.err("tour is `tour <vehicle> <shift start> <shift end> <capacity> : <orders>`");
        }
        let visits = f[5..]
            .iter()
            .map(|t| lines.parse(t).map(OrderId))
            .collect::<Result<Vec<_>, _>>()?;
        let tour = Tour::with_visits(
            lines.parse(f[0])?,
            lines.parse(f[1])?,
            lines.parse(f[2])?,
            lines.parse(f[3])?,
            visits,
        );
        tours.push(lines.model(tour)?);
    }
    let schedule = lines.model(Schedule::new(ctx, tours))?;
    lines.end()?;
    Ok(schedule)
}

// ---------------------------------------------------------------- trajectories

pub fn write_trajectory(traj: &FillTrajectory) -> String {
    let mut out = String::new();
    writeln!(out, "{TRAJECTORY} {FORMAT_VERSION}").unwrap();
    writeln!(out, "scenario {}", traj.scenario).unwrap();
    writeln!(out, "accepted {}", traj.p_hat()).unwrap();
    writeln!(out, "events {}", traj.events.len()).unwrap();
    for e in &traj.events {
        match e {
            FillEvent::Accept { order, tour, position } => {
                writeln!(out, "accept {} {tour} {position}", order.0).unwrap()
            }
            FillEvent::Move(m) => {
                write!(out, "move {} {} {} {}", m.order.0, m.source, m.target, m.target_pos).unwrap();
                if let Some(s) = m.swap {
                    write!(out, " swap {} {}", s.order.0, s.source_pos).unwrap();
                }
                out.push('\n');
            }
        }
    }
    out.push_str("end\n");
    out
}

pub fn read_trajectory(text: &str) -> Result<FillTrajectory, FormatError> {
    let mut lines = Lines::new(text);
    lines.header(TRAJECTORY)?;
    let scenario: Scenario = lines.value("scenario")?;
    let accepted: usize = lines.value("accepted")?;
    let n: usize = lines.value("events")?;
    let mut events = Vec::with_capacity(n);
    for _ in 0..n {
        let toks = lines.next()?;
        let f = &toks[1..];
        let event = match (toks[0], f.len()) {
            ("accept", 3) => FillEvent::Accept {
                order: OrderId(lines.parse(f[0])?),
                tour: lines.parse(f[1])?,
                position: lines.parse(f[2])?,
            },
            ("move", 4) | ("move", 7) => {
                let swap = if f.len() == 7 {
                    if f[4] != "swap" {
                        return lines.err("expected `swap <order> <source position>`");
                    }
                    Some(SwapPartner {
                        order: OrderId(lines.parse(f[5])?),
                        source_pos: lines.parse(f[6])?,
                    })
                } else {
                    None
                };
                FillEvent::Move(Move {
                    order: OrderId(lines.parse(f[0])?),
                    source: lines.parse(f[1])?,
                    target: lines.parse(f[2])?,
                    target_pos: lines.parse(f[3])?,
                    swap,
                })
            }
            (key, _) => return lines.err(format!("malformed event `{key}`")),
        };
        events.push(event);
    }
    lines.end()?;
    let traj = FillTrajectory { scenario, events };
    if traj.p_hat() != accepted {
        return Err(FormatError::Syntax {
            line: 0,
            msg: format!("header says {accepted} acceptances, log has {}", traj.p_hat()),
        });
    }
    Ok(traj)
}
