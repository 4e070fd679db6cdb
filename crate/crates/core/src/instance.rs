//! Seeded generation of clustered benchmark instances and the three window
//! setups.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use thiserror::Error;

use crate::model::{
    Context, EuclideanTravel, Location, ModelError, Order, OrderId, Schedule, Seconds, Tour, WindowId,
    WindowSet,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generator setting: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

const HOUR: Seconds = 3600;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Setup {
    /// Ten back-to-back one-hour windows, 08:00 to 18:00.
    I,
    /// Windows start hourly from 08:00; nine last 90 minutes, the final one
    /// runs 17:00 to 18:00.
    II,
    /// Nine one-hour windows 08:00 to 17:00 plus three 3-hour windows.
    III,
}

impl Setup {
    pub const ALL: [Setup; 3] = [Setup::I, Setup::II, Setup::III];

    pub fn windows(self) -> WindowSet {
        window_setup(self)
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setup::I => "I",
            Setup::II => "II",
            Setup::III => "III",
        })
    }
}

impl FromStr for Setup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Setup::I),
            "II" | "2" => Ok(Setup::II),
            "III" | "3" => Ok(Setup::III),
            other => Err(format!("unknown setup `{other}` (I, II, III)")),
        }
    }
}

pub fn window_setup(kind: Setup) -> WindowSet {
    let at = |h: i64| h * HOUR;
    let spans: Vec<(Seconds, Seconds)> = match kind {
        Setup::I => (8..18).map(|h| (at(h), at(h + 1))).collect(),
        Setup::II => (8..17)
            .map(|h| (at(h), at(h) + 90 * 60))
            .chain([(at(17), at(18))])
            .collect(),
        Setup::III => (8..17)
            .map(|h| (at(h), at(h + 1)))
            .chain([(at(8), at(11)), (at(11), at(14)), (at(14), at(17))])
            .collect(),
    };
    WindowSet::new(spans).expect("setup windows are distinct and non-empty")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DepotPlacement {
    Center,
    /// Center of the top-left quadrant, y growing upwards.
    TopLeftQuadrant,
}

impl DepotPlacement {
    pub fn location(self, grid: i64) -> Location {
        match self {
            DepotPlacement::Center => Location::new(grid / 2, grid / 2),
            DepotPlacement::TopLeftQuadrant => Location::new(grid / 4, 3 * grid / 4),
        }
    }

    /// Alternates by instance index so a cell holds both placements equally.
    pub fn for_index(k: usize) -> Self {
        if k % 2 == 0 {
            DepotPlacement::Center
        } else {
            DepotPlacement::TopLeftQuadrant
        }
    }
}

impl fmt::Display for DepotPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DepotPlacement::Center => "center",
            DepotPlacement::TopLeftQuadrant => "top-left",
        })
    }
}

impl FromStr for DepotPlacement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "center" => Ok(DepotPlacement::Center),
            "top-left" => Ok(DepotPlacement::TopLeftQuadrant),
            other => Err(format!("unknown depot placement `{other}` (center, top-left)")),
        }
    }
}

/// Normal distribution truncated to `[lo, hi]`, sampled by rejection and
/// rounded to an integer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightDist {
    pub mean: f64,
    pub sd: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Default for WeightDist {
    fn default() -> Self {
        WeightDist {
            mean: 7.0,
            sd: 2.0,
            lo: 1.0,
            hi: 15.0,
        }
    }
}

impl WeightDist {
    pub fn sample(&self, rng: &mut impl Rng) -> u32 {
        let normal = Normal::new(self.mean, self.sd).expect("validated sd");
        loop {
            let x: f64 = normal.sample(rng);
            if (self.lo..=self.hi).contains(&x) {
                return x.round() as u32;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub grid_size: i64,
    pub clusters: usize,
    pub clustered_fraction: f64,
    /// Range of the per-axis cluster variances, square meters.
    pub variance: (f64, f64),
    pub pool_size: usize,
    pub vehicles: usize,
    pub depot: DepotPlacement,
    pub speed_kmh: f64,
    pub distance_correction: f64,
    pub service: Seconds,
    pub weight: WeightDist,
    pub capacity: u32,
    pub setup: Setup,
    pub shift_start: Seconds,
    pub shift_end: Seconds,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            grid_size: 20_000,
            clusters: 15,
            clustered_fraction: 0.8,
            variance: (100.0 * 100.0, 2000.0 * 2000.0),
            pool_size: 5000,
            vehicles: 20,
            depot: DepotPlacement::Center,
            speed_kmh: EuclideanTravel::DEFAULT_SPEED_KMH,
            distance_correction: EuclideanTravel::DEFAULT_CORRECTION,
            service: 300,
            weight: WeightDist::default(),
            capacity: 200,
            setup: Setup::I,
            shift_start: 7 * HOUR + 1800,
            shift_end: 18 * HOUR + 1800,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::Config(m.to_string()));
        if self.grid_size <= 0 {
            return bad("grid size must be positive");
        }
        if !(0.0..=1.0).contains(&self.clustered_fraction) {
            return bad("clustered fraction must lie in [0, 1]");
        }
        if self.clusters == 0 && self.clustered_fraction > 0.0 {
            return bad("clustered customers need at least one cluster");
        }
        let (lo, hi) = self.variance;
        if !(lo > 0.0 && lo <= hi) {
            return bad("variance range must be positive and ordered");
        }
        if self.vehicles == 0 {
            return bad("need at least one vehicle");
        }
        if !(self.speed_kmh > 0.0) || !(self.distance_correction > 0.0) {
            return bad("speed and distance correction must be positive");
        }
        if self.service <= 0 {
            return bad("service time must be positive");
        }
        let w = &self.weight;
        if !(w.sd > 0.0) || !(1.0 <= w.lo && w.lo <= w.hi) {
            return bad("weight distribution needs sd > 0 and 1 <= lo <= hi");
        }
        if self.capacity == 0 {
            return bad("capacity must be positive");
        }
        if self.shift_start >= self.shift_end {
            return bad("shift must start before it ends");
        }
        Ok(())
    }
}

/// Rotated axis-aligned normal around `center`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cluster {
    pub center: (f64, f64),
    pub sd: (f64, f64),
    pub angle: f64,
}

impl Cluster {
    fn sample(&self, rng: &mut impl Rng) -> (f64, f64) {
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        let (dx, dy) = (zx * self.sd.0, zy * self.sd.1);
        let (sin, cos) = self.angle.sin_cos();
        (
            self.center.0 + cos * dx - sin * dy,
            self.center.1 + sin * dx + cos * dy,
        )
    }
}

/// A generated customer pool with everything needed to book it.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub config: GenConfig,
    pub depot: Location,
    pub windows: WindowSet,
    pub clusters: Vec<Cluster>,
    /// Booking order; ids are `1..=pool_size` in this order.
    pub pool: Vec<Order>,
}

impl Instance {
    pub fn travel(&self) -> EuclideanTravel {
        EuclideanTravel {
            depot: self.depot,
            correction: self.config.distance_correction,
            speed_kmh: self.config.speed_kmh,
        }
    }

    pub fn context(&self) -> Context {
        Context::new(self.depot, self.windows.clone(), Arc::new(self.travel()))
    }

    /// One empty tour per vehicle.
    pub fn empty_schedule(&self) -> Schedule {
        let c = &self.config;
        let tours = (0..c.vehicles as u32)
            .map(|v| Tour::new(v, c.shift_start, c.shift_end, c.capacity).expect("validated shift"))
            .collect();
        Schedule::new(self.context(), tours).expect("no orders yet")
    }

    pub fn clamp(&self, (x, y): (f64, f64)) -> Location {
        let g = self.config.grid_size;
        Location::new((x.round() as i64).clamp(0, g), (y.round() as i64).clamp(0, g))
    }

    /// A fresh customer from the instance's spatial, weight and window
    /// distributions. The caller picks an unused id.
    pub fn sample_customer(&self, rng: &mut impl Rng, id: OrderId) -> Order {
        let c = &self.config;
        let point = if !self.clusters.is_empty() && rng.gen_bool(c.clustered_fraction) {
            self.clusters.choose(rng).expect("non-empty").sample(rng)
        } else {
            uniform_point(rng, c.grid_size)
        };
        Order {
            id,
            location: self.clamp(point),
            weight: c.weight.sample(rng),
            service: c.service,
            window: WindowId(rng.gen_range(0..self.windows.len() as u32)),
        }
    }
}

fn uniform_point(rng: &mut impl Rng, grid: i64) -> (f64, f64) {
    (rng.gen_range(0.0..=grid as f64), rng.gen_range(0.0..=grid as f64))
}

pub fn generate_instance(config: &GenConfig) -> Result<Instance, GenError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let grid = config.grid_size;
    let (vlo, vhi) = config.variance;
    let clusters: Vec<Cluster> = (0..config.clusters)
        .map(|_| Cluster {
            center: uniform_point(&mut rng, grid),
            sd: (rng.gen_range(vlo..=vhi).sqrt(), rng.gen_range(vlo..=vhi).sqrt()),
            angle: rng.gen_range(0.0..TAU),
        })
        .collect();

    let mut instance = Instance {
        config: config.clone(),
        depot: config.depot.location(grid),
        windows: window_setup(config.setup),
        clusters,
        pool: Vec::with_capacity(config.pool_size),
    };

    let clustered = (config.clustered_fraction * config.pool_size as f64).round() as usize;
    let mut points: Vec<(f64, f64)> = (0..config.pool_size)
        .map(|k| {
            if k < clustered {
                instance.clusters.choose(&mut rng).expect("validated").sample(&mut rng)
            } else {
                uniform_point(&mut rng, grid)
            }
        })
        .collect();
    points.shuffle(&mut rng);

    let q = instance.windows.len() as u32;
    instance.pool = points
        .into_iter()
        .enumerate()
        .map(|(k, p)| Order {
            id: OrderId(k as u32 + 1),
            location: instance.clamp(p),
            weight: config.weight.sample(&mut rng),
            service: config.service,
            window: WindowId(rng.gen_range(0..q)),
        })
        .collect();
    Ok(instance)
}
