//! `sop`: generate instances, book them, answer slot queries and run the
//! benchmark grid.
//!
//! Exit codes: 0 success, 1 usage, 2 bad input data.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sop_core::ans::AnsConfig;
use sop_core::bench::{self, ExperimentConfig, Solvers, Timing};
use sop_core::booking::{fill_schedule, snapshot_at_fill, Scenario};
use sop_core::instance::{generate_instance, DepotPlacement, GenConfig, Setup};
use sop_core::io::{read_instance, read_schedule, read_trajectory, write_instance, write_schedule, write_trajectory};
use sop_core::metrics::WindowEval;
use sop_core::model::{Location, Order, OrderId, Seconds, WindowId};
use sop_core::slots::{Method, SlotQuery, Verdict};
use sop_core::tsptw::SearchLimits;

#[derive(Parser)]
#[command(name = "sop", version, about = "Delivery slot availability for attended home delivery")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated instance file.
    Generate(GenerateArgs),
    /// Book an instance's pool and write the trajectory.
    Fill(FillArgs),
    /// Decide which windows a new order can be offered.
    Solve(SolveArgs),
    /// Run the experiment grid and write per-cell averages as CSV.
    Bench(BenchArgs),
    /// Render a bench CSV as aligned tables.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5000)]
    pool: usize,
    #[arg(long, default_value_t = 20)]
    vehicles: usize,
    #[arg(long, default_value = "I")]
    setup: Setup,
    #[arg(long, default_value = "center")]
    depot: DepotPlacement,
    #[arg(long, default_value_t = 200)]
    capacity: u32,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FillArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "plain")]
    scenario: Scenario,
    /// Trajectory output; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Reuse an existing trajectory instead of booking again.
    #[arg(long, conflicts_with = "scenario")]
    trajectory: Option<PathBuf>,
    /// Also write the schedule at this fill level.
    #[arg(long, requires = "schedule_out")]
    snapshot: Option<f64>,
    #[arg(long, requires = "snapshot")]
    schedule_out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    x: i64,
    #[arg(long, allow_hyphen_values = true)]
    y: i64,
    #[arg(long)]
    weight: u32,
    #[arg(long, default_value_t = 300)]
    service: Seconds,
    /// Order id; defaults to one above the largest scheduled id.
    #[arg(long)]
    id: Option<u32>,
    #[arg(long, value_delimiter = ',', default_value = "simple,tsptw,ans")]
    methods: Vec<Method>,
    /// Restrict the query to these window ids.
    #[arg(long, value_delimiter = ',')]
    windows: Vec<u32>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SolverArgs {
    /// Let the neighborhood search try 1-swaps when no 1-move helps.
    #[arg(long)]
    swap: bool,
    #[arg(long, default_value_t = SearchLimits::default().node_budget)]
    node_budget: u64,
}

impl SolverArgs {
    fn solvers(&self) -> Solvers {
        Solvers {
            tsptw: SearchLimits {
                node_budget: self.node_budget,
                ..SearchLimits::default()
            },
            ans: AnsConfig {
                enable_swap: self.swap,
                ..AnsConfig::default()
            },
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Start from the full grid (100 instances, 20/40/60 vehicles, 5000
    /// customers) instead of desk scale.
    #[arg(long)]
    full: bool,
    #[arg(long, value_delimiter = ',')]
    setups: Vec<Setup>,
    #[arg(long, value_delimiter = ',')]
    scenarios: Vec<Scenario>,
    #[arg(long, value_delimiter = ',')]
    vehicles: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    fills: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    probes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pool: Option<usize>,
    /// Worker threads across instances; 0 picks the core count.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Leave timing columns empty so the output depends only on the config.
    #[arg(long)]
    no_timings: bool,
    /// CSV output; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write the aligned text report here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Bench CSV; stdin when absent.
    input: Option<PathBuf>,
    #[arg(long, default_value = "text", value_parser = ["text", "csv"])]
    format: String,
    #[arg(long)]
    no_timings: bool,
}

/// Failure after argument parsing: bad files, bad values, I/O.
struct DataError(String);

impl<E: std::fmt::Display> From<E> for DataError {
    fn from(e: E) -> Self {
        DataError(e.to_string())
    }
}

type Res<T = ()> = Result<T, DataError>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| DataError(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Res {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| DataError(format!("{}: {e}", p.display()))),
        None => Ok(io::stdout().lock().write_all(text.as_bytes())?),
    }
}

fn generate(a: GenerateArgs) -> Res {
    let cfg = GenConfig {
        seed: a.seed,
        pool_size: a.pool,
        vehicles: a.vehicles,
        setup: a.setup,
        depot: a.depot,
        capacity: a.capacity,
        ..GenConfig::default()
    };
    emit(a.out.as_deref(), &write_instance(&generate_instance(&cfg)?))
}

fn fill(a: FillArgs) -> Res {
    let instance = read_instance(&read(&a.instance)?)?;
    let traj = match &a.trajectory {
        Some(p) => read_trajectory(&read(p)?)?,
        None => {
            let t = fill_schedule(&instance, a.scenario);
            emit(a.out.as_deref(), &write_trajectory(&t))?;
            t
        }
    };
    eprintln!("{} scenario: {} of {} orders accepted", traj.scenario, traj.p_hat(), instance.pool.len());
    if let (Some(f), Some(out)) = (a.snapshot, &a.schedule_out) {
        let s = snapshot_at_fill(&instance, &traj, f)?;
        eprintln!("fill {f}: {} orders", s.order_count());
        emit(Some(out), &write_schedule(&s)?)?;
    }
    Ok(())
}

fn clock(t: Seconds) -> String {
    format!("{:02}:{:02}", t / 3600, t % 3600 / 60)
}

fn solve(a: SolveArgs) -> Res {
    let schedule = read_schedule(&read(&a.schedule)?)?;
    let ctx = schedule.context();
    let id = a
        .id
        .unwrap_or_else(|| ctx.orders().map(|o| o.id.0).max().unwrap_or(0) + 1);
    let candidate = Order {
        id: OrderId(id),
        location: Location::new(a.x, a.y),
        weight: a.weight,
        service: a.service,
        window: WindowId(0),
    };
    let query = if a.windows.is_empty() {
        SlotQuery::new(&schedule, candidate)?
    } else {
        SlotQuery::with_windows(&schedule, candidate, a.windows.iter().map(|&w| WindowId(w)).collect())?
    };
    let solvers = a.solver.solvers();
    let results: Vec<_> = a.methods.iter().map(|&m| (m, solvers.solve(&query, m))).collect();

    let mut out = String::new();
    let mut head = format!("{:<6} {:<11}", "window", "span");
    for (m, _) in &results {
        head += &format!(" {:>6}", m.name());
    }
    head += &format!(" {:>6} {:>6} {:>9}", "cond1", "cond2", "max-free");
    out += &head;
    out.push('\n');
    let overlapping = ctx.windows().is_overlapping();
    for &w in &query.windows {
        let win = *ctx.window(w)?;
        let mut line = format!("{:<6} {:<11}", w.0, format!("{}-{}", clock(win.start), clock(win.end)));
        for (_, r) in &results {
            let mark = match r.outcome(w).map(|o| &o.verdict) {
                Some(Verdict::Available(_)) => "yes",
                Some(Verdict::Unavailable) => "no",
                Some(Verdict::Undecided(_)) => "?",
                None => "-",
            };
            line += &format!(" {mark:>6}");
        }
        // Per-tour conditions: how many tours each one settles.
        let (mut cond1, mut cond2, mut best) = (0, 0, None::<Seconds>);
        for t in 0..schedule.len() {
            let route = schedule.route(t);
            let eval = WindowEval::new(&route, schedule.profile(t), &query.candidate, &win, ctx);
            cond1 += eval.infeasible() as usize;
            cond2 += matches!(eval.feasible(), Ok(true)) as usize;
            best = best.max(eval.max_free_after_insertion());
        }
        let n = schedule.len();
        let c2 = if overlapping { "n/a".to_string() } else { format!("{cond2}/{n}") };
        let free = best.map_or("-".to_string(), |f| f.to_string());
        line += &format!(" {:>6} {c2:>6} {free:>9}", format!("{cond1}/{n}"));
        out += &line;
        out.push('\n');
    }
    for (m, r) in &results {
        out += &format!("{}: {} of {} windows in {}\n", m, r.available().len(), query.windows.len(), bench::format_duration(r.elapsed.as_secs_f64()));
    }
    emit(None, &out)
}

fn bench_cmd(a: BenchArgs) -> Res {
    let mut cfg = if a.full { ExperimentConfig::full() } else { ExperimentConfig::default() };
    if !a.setups.is_empty() {
        cfg.setups = a.setups;
    }
    if !a.scenarios.is_empty() {
        cfg.scenarios = a.scenarios;
    }
    if !a.vehicles.is_empty() {
        cfg.vehicles = a.vehicles;
    }
    if !a.fills.is_empty() {
        cfg.fills = a.fills;
    }
    if !a.methods.is_empty() {
        cfg.methods = a.methods;
    }
    cfg.instances = a.instances.unwrap_or(cfg.instances);
    cfg.probes = a.probes.unwrap_or(cfg.probes);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.base.pool_size = a.pool.unwrap_or(cfg.base.pool_size);
    cfg.threads = a.threads;
    cfg.solvers = a.solver.solvers();

    let rows = bench::run_experiment(&cfg)?;
    let timing = if a.no_timings { Timing::Omit } else { Timing::Include };
    let mut csv = Vec::new();
    bench::write_csv(&rows, timing, &mut csv)?;
    emit(a.out.as_deref(), std::str::from_utf8(&csv)?)?;
    if let Some(p) = &a.report {
        emit(Some(p), &bench::render_report(&rows, timing))?;
    }
    Ok(())
}

fn report(a: ReportArgs) -> Res {
    let rows = match &a.input {
        Some(p) => bench::read_csv(read(p)?.as_bytes())?,
        None => bench::read_csv(io::stdin().lock())?,
    };
    let timing = if a.no_timings { Timing::Omit } else { Timing::Include };
    if a.format == "csv" {
        let mut buf = Vec::new();
        bench::write_csv(&rows, timing, &mut buf)?;
        return emit(None, std::str::from_utf8(&buf)?);
    }
    emit(None, &bench::render_report(&rows, timing))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.cmd {
        Cmd::Generate(a) => generate(a),
        Cmd::Fill(a) => fill(a),
        Cmd::Solve(a) => solve(a),
        Cmd::Bench(a) => bench_cmd(a),
        Cmd::Report(a) => report(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(DataError(msg)) => {
            eprintln!("sop: {msg}");
            ExitCode::from(2)
        }
    }
}
