//! Experiment grid: generate instances, book them to the requested fill
//! levels, probe each snapshot with fresh customers and average what every
//! method finds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io;
use std::time::Duration;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::ans::{solve_sop_ans, AnsConfig};
use crate::booking::{fill_schedule, snapshot_at_fill, BookingError, Scenario};
use crate::instance::{generate_instance, DepotPlacement, GenConfig, GenError, Instance, Setup};
use crate::model::{Order, OrderId, Schedule, WindowId};
use crate::simple::solve_sop_simple;
use crate::slots::{Method, QueryError, SlotQuery, SlotResult, Verdict};
use crate::tsptw::{solve_sop_tsptw, SearchLimits};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Booking(#[from] BookingError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Per-method tuning shared by every query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Solvers {
    pub tsptw: SearchLimits,
    pub ans: AnsConfig,
}

impl Solvers {
    pub fn solve(&self, query: &SlotQuery<'_>, method: Method) -> SlotResult {
        match method {
            Method::Simple => solve_sop_simple(query),
            Method::Tsptw => solve_sop_tsptw(query, &self.tsptw),
            Method::Ans => solve_sop_ans(query, &self.ans),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub setups: Vec<Setup>,
    pub scenarios: Vec<Scenario>,
    pub vehicles: Vec<usize>,
    pub fills: Vec<f64>,
    pub methods: Vec<Method>,
    pub instances: usize,
    /// Probe customers per instance and fill level.
    pub probes: usize,
    pub seed: u64,
    /// Everything not varied by the grid. Seed, vehicles, setup and depot
    /// are overwritten per instance.
    pub base: GenConfig,
    pub solvers: Solvers,
    /// Worker threads across instances; 0 lets rayon decide. Each solve call
    /// runs on one thread regardless.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    /// Desk scale: 10 instances per cell, 5 and 10 vehicles, 1000 customers.
    fn default() -> Self {
        ExperimentConfig {
            setups: Setup::ALL.to_vec(),
            scenarios: vec![Scenario::NonOptimized, Scenario::Optimized],
            vehicles: vec![5, 10],
            fills: vec![0.85, 0.90, 0.95, 0.99],
            methods: Method::ALL.to_vec(),
            instances: 10,
            probes: 1,
            seed: 1,
            base: GenConfig {
                pool_size: 1000,
                ..GenConfig::default()
            },
            solvers: Solvers::default(),
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    /// 100 instances per cell, 20/40/60 vehicles, 5000 customers.
    pub fn full() -> Self {
        ExperimentConfig {
            vehicles: vec![20, 40, 60],
            instances: 100,
            base: GenConfig::default(),
            ..ExperimentConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Config(m.to_string()));
        if self.setups.is_empty() || self.scenarios.is_empty() || self.vehicles.is_empty() {
            return bad("setups, scenarios and vehicle counts must be non-empty");
        }
        if self.fills.is_empty() || self.methods.is_empty() {
            return bad("fill levels and methods must be non-empty");
        }
        if let Some(f) = self.fills.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(BenchError::Config(format!("fill level {f} outside (0, 1]")));
        }
        if self.instances == 0 || self.probes == 0 {
            return bad("need at least one instance and one probe per cell");
        }
        if self.vehicles.contains(&0) {
            return bad("vehicle counts must be positive");
        }
        Ok(())
    }

    /// Seed of instance `k` in the (setup, vehicles) block. Scenarios share
    /// instances so their rows are paired.
    pub fn instance_seed(&self, setup: Setup, vehicles: usize, k: usize) -> u64 {
        let s = Setup::ALL.iter().position(|x| *x == setup).unwrap() as u64;
        stream(self.seed, (s << 56) ^ ((vehicles as u64) << 32) ^ k as u64)
    }

    pub fn instance_config(&self, setup: Setup, vehicles: usize, k: usize) -> GenConfig {
        GenConfig {
            seed: self.instance_seed(setup, vehicles, k),
            vehicles,
            setup,
            depot: DepotPlacement::for_index(k),
            ..self.base.clone()
        }
    }
}

fn stream(seed: u64, id: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng.next_u64()
}

/// `k` fresh customers from the instance's distributions, numbered above
/// every id in the pool and the schedule.
pub fn probe_customers(instance: &Instance, schedule: &Schedule, k: usize, seed: u64) -> Vec<Order> {
    let top = instance
        .pool
        .iter()
        .map(|o| o.id.0)
        .chain(schedule.context().orders().map(|o| o.id.0))
        .max()
        .unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=k as u32)
        .map(|j| instance.sample_customer(&mut rng, OrderId(top + j)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub setup: Setup,
    pub scenario: Scenario,
    pub vehicles: usize,
    pub fill: f64,
}

/// One probe customer answered by every configured method.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryRecord {
    pub cell: Cell,
    pub instance: usize,
    pub probe: usize,
    pub p_hat: usize,
    pub orders: usize,
    pub slots: BTreeMap<Method, usize>,
    pub elapsed: BTreeMap<Method, Duration>,
    pub combined: usize,
    pub undecided: usize,
}

/// Answers one probe with every method. The combined count is the union of
/// available windows.
pub fn probe_methods(
    schedule: &Schedule,
    candidate: Order,
    methods: &[Method],
    solvers: &Solvers,
) -> Result<(BTreeMap<Method, SlotResult>, BTreeSet<WindowId>), QueryError> {
    let query = SlotQuery::new(schedule, candidate)?;
    let mut results = BTreeMap::new();
    let mut union = BTreeSet::new();
    for &m in methods {
        let r = solvers.solve(&query, m);
        union.extend(r.available());
        results.insert(m, r);
    }
    Ok((results, union))
}

fn run_block(
    cfg: &ExperimentConfig,
    setup: Setup,
    vehicles: usize,
    k: usize,
    scenario: Scenario,
) -> Result<Vec<QueryRecord>, BenchError> {
    let gen = cfg.instance_config(setup, vehicles, k);
    let instance = generate_instance(&gen)?;
    let traj = fill_schedule(&instance, scenario);
    let mut out = Vec::new();
    for (fi, &fill) in cfg.fills.iter().enumerate() {
        let schedule = snapshot_at_fill(&instance, &traj, fill)?;
        let probes = probe_customers(&instance, &schedule, cfg.probes, stream(gen.seed, fi as u64 + 1));
        for (j, probe) in probes.into_iter().enumerate() {
            let (results, union) = probe_methods(&schedule, probe, &cfg.methods, &cfg.solvers)?;
            let undecided = results
                .values()
                .flat_map(|r| &r.outcomes)
                .filter(|o| matches!(o.verdict, Verdict::Undecided(_)))
                .count();
            out.push(QueryRecord {
                cell: Cell {
                    setup,
                    scenario,
                    vehicles,
                    fill,
                },
                instance: k,
                probe: j,
                p_hat: traj.p_hat(),
                orders: schedule.order_count(),
                slots: results.iter().map(|(m, r)| (*m, r.available().len())).collect(),
                elapsed: results.iter().map(|(m, r)| (*m, r.elapsed)).collect(),
                combined: union.len(),
                undecided,
            });
        }
    }
    Ok(out)
}

/// Every query of the grid, in grid order regardless of thread count.
pub fn run_queries(cfg: &ExperimentConfig) -> Result<Vec<QueryRecord>, BenchError> {
    cfg.validate()?;
    let mut blocks = Vec::new();
    for &setup in &cfg.setups {
        for &scenario in &cfg.scenarios {
            for &vehicles in &cfg.vehicles {
                for k in 0..cfg.instances {
                    blocks.push((setup, scenario, vehicles, k));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| BenchError::Config(e.to_string()))?;
    let per_block: Vec<Result<Vec<QueryRecord>, BenchError>> = pool.install(|| {
        blocks
            .par_iter()
            .map(|&(setup, scenario, vehicles, k)| run_block(cfg, setup, vehicles, k, scenario))
            .collect()
    });
    let mut records = Vec::new();
    for r in per_block {
        records.extend(r?);
    }
    // Blocks run fill levels innermost; rows want instances innermost.
    let key = |r: &QueryRecord| {
        let c = &r.cell;
        let s = cfg.setups.iter().position(|x| *x == c.setup);
        let sc = cfg.scenarios.iter().position(|x| *x == c.scenario);
        let v = cfg.vehicles.iter().position(|x| *x == c.vehicles);
        let f = cfg.fills.iter().position(|x| *x == c.fill);
        (s, sc, v, f, r.instance, r.probe)
    };
    records.sort_by_key(key);
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MethodStats {
    pub slots: f64,
    pub seconds: f64,
}

/// Averages over all queries of one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub cell: Cell,
    pub queries: usize,
    pub p_hat: f64,
    pub orders: f64,
    pub methods: BTreeMap<Method, MethodStats>,
    pub combined: f64,
    pub undecided: usize,
}

pub fn aggregate(records: &[QueryRecord]) -> Vec<ResultRow> {
    let mut rows: Vec<ResultRow> = Vec::new();
    for chunk in records.chunk_by(|a, b| a.cell == b.cell) {
        let n = chunk.len() as f64;
        let mean = |f: &dyn Fn(&QueryRecord) -> f64| chunk.iter().map(f).sum::<f64>() / n;
        let methods = chunk[0]
            .slots
            .keys()
            .map(|&m| {
                let stats = MethodStats {
                    slots: mean(&|r| r.slots[&m] as f64),
                    seconds: mean(&|r| r.elapsed[&m].as_secs_f64()),
                };
                (m, stats)
            })
            .collect();
        rows.push(ResultRow {
            cell: chunk[0].cell,
            queries: chunk.len(),
            p_hat: mean(&|r| r.p_hat as f64),
            orders: mean(&|r| r.orders as f64),
            methods,
            combined: mean(&|r| r.combined as f64),
            undecided: chunk.iter().map(|r| r.undecided).sum(),
        });
    }
    rows
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, BenchError> {
    Ok(aggregate(&run_queries(cfg)?))
}

// ---------------------------------------------------------------- output

pub const CSV_COLUMNS: [&str; 16] = [
    "setup",
    "scenario",
    "vehicles",
    "fill",
    "queries",
    "avg_orders",
    "avg_p_hat",
    "simple_slots",
    "simple_seconds",
    "tsptw_slots",
    "tsptw_seconds",
    "ans_slots",
    "ans_seconds",
    "combined_slots",
    "undecided",
    "windows",
];

/// Whether timing columns are filled in. Without them the output is a pure
/// function of the experiment config.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Timing {
    Include,
    Omit,
}

pub fn write_csv<W: io::Write>(rows: &[ResultRow], timing: Timing, out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        let mut rec = vec![
            r.cell.setup.to_string(),
            r.cell.scenario.to_string(),
            r.cell.vehicles.to_string(),
            format!("{:.2}", r.cell.fill),
            r.queries.to_string(),
            format!("{:.2}", r.orders),
            format!("{:.2}", r.p_hat),
        ];
        for m in Method::ALL {
            match r.methods.get(&m) {
                Some(s) => {
                    rec.push(format!("{:.4}", s.slots));
                    rec.push(match timing {
                        Timing::Include => format!("{:.6}", s.seconds),
                        Timing::Omit => String::new(),
                    });
                }
                None => rec.extend([String::new(), String::new()]),
            }
        }
        rec.push(format!("{:.4}", r.combined));
        rec.push(r.undecided.to_string());
        rec.push(r.cell.setup.windows().len().to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<ResultRow>, BenchError> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(BenchError::Config(format!(
            "unexpected csv header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let bad = |col: &str| BenchError::Config(format!("csv row {}: bad `{col}`", k + 2));
        let num = |i: usize| -> Result<f64, BenchError> { rec[i].parse().map_err(|_| bad(CSV_COLUMNS[i])) };
        let mut methods = BTreeMap::new();
        for (j, m) in Method::ALL.into_iter().enumerate() {
            let (si, ti) = (7 + 2 * j, 8 + 2 * j);
            if rec[si].is_empty() {
                continue;
            }
            let seconds = if rec[ti].is_empty() { f64::NAN } else { num(ti)? };
            methods.insert(m, MethodStats { slots: num(si)?, seconds });
        }
        rows.push(ResultRow {
            cell: Cell {
                setup: rec[0].parse().map_err(|_| bad("setup"))?,
                scenario: rec[1].parse().map_err(|_| bad("scenario"))?,
                vehicles: rec[2].parse().map_err(|_| bad("vehicles"))?,
                fill: num(3)?,
            },
            queries: rec[4].parse().map_err(|_| bad("queries"))?,
            orders: num(5)?,
            p_hat: num(6)?,
            methods,
            combined: num(13)?,
            undecided: rec[14].parse().map_err(|_| bad("undecided"))?,
        });
    }
    Ok(rows)
}

/// `m:ss.mmm`; unknown durations print as `-`.
pub fn format_duration(seconds: f64) -> String {
    if !seconds.is_finite() {
        return "-".into();
    }
    let ms = (seconds * 1000.0).round() as u64;
    format!("{}:{:02}.{:03}", ms / 60_000, ms / 1000 % 60, ms % 1000)
}

/// One aligned table per (setup, scenario, vehicles), fill levels as rows.
pub fn render_report(rows: &[ResultRow], timing: Timing) -> String {
    let mut out = String::new();
    let methods: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|m| rows.iter().any(|r| r.methods.contains_key(m)))
        .collect();
    for block in rows.chunk_by(|a, b| {
        (a.cell.setup, a.cell.scenario, a.cell.vehicles) == (b.cell.setup, b.cell.scenario, b.cell.vehicles)
    }) {
        let c = block[0].cell;
        writeln!(
            out,
            "Setup {} | {} | {} vehicles | {} windows",
            c.setup,
            c.scenario,
            c.vehicles,
            c.setup.windows().len()
        )
        .unwrap();
        let mut head = format!("{:>5} {:>8} {:>8}", "fill", "orders", "p_hat");
        for m in &methods {
            if timing == Timing::Include {
                write!(head, " {:>10}", format!("{m} time")).unwrap();
            }
            write!(head, " {:>8}", format!("{m} #")).unwrap();
        }
        write!(head, " {:>8}", "combined").unwrap();
        writeln!(out, "{head}").unwrap();
        writeln!(out, "{}", "-".repeat(head.len())).unwrap();
        for r in block {
            let mut line = format!(
                "{:>4.0}% {:>8.1} {:>8.1}",
                r.cell.fill * 100.0,
                r.orders,
                r.p_hat
            );
            for m in &methods {
                let s = r.methods.get(m);
                if timing == Timing::Include {
                    let t = s.map_or("-".to_string(), |s| format_duration(s.seconds));
                    write!(line, " {t:>10}").unwrap();
                }
                let n = s.map_or("-".to_string(), |s| format!("{:.2}", s.slots));
                write!(line, " {n:>8}").unwrap();
            }
            write!(line, " {:>8.2}", r.combined).unwrap();
            writeln!(out, "{line}").unwrap();
        }
        out.push('\n');
    }
    out
}
