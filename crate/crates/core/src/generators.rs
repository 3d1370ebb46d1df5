//! Seeded instance generators.
//!
//! * `random`: every admissible pair `(j, i)` with `0 < j - i <= d` is an edge
//!   independently with probability `p`.
//! * `geometric`: each vertex is a ride with a pickup and a dropoff drawn
//!   uniformly from the unit square. Two rides inside the window are joined
//!   when sharing a vehicle saves distance (see [`shared_route_length`]).
//! * `adversarial`: fixed hard instances from [`ADVERSARIAL_CATALOG`].
//!
//! A config has a compact textual form, e.g.
//! `random:n=8,d=2,p=0.5,mode=edge,weights=int:1:10,seed=3`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::model::{Instance, VertexId, WeightMode};
use crate::random::seeded;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("unknown adversarial instance {0:?}")]
    UnknownAdversarial(String),
    #[error("cannot parse generator spec: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightDist {
    Uniform { lo: f64, hi: f64 },
    /// Integers drawn uniformly from `lo..=hi`.
    UniformInt { lo: u32, hi: u32 },
    Constant(f64),
}

impl WeightDist {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            WeightDist::Uniform { lo, hi } if lo < hi => rng.gen_range(lo..=hi),
            WeightDist::Uniform { lo, .. } => lo,
            WeightDist::UniformInt { lo, hi } => f64::from(rng.gen_range(lo..=hi)),
            WeightDist::Constant(c) => c,
        }
    }

    fn check(&self) -> Result<(), GenError> {
        let ok = match *self {
            WeightDist::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi,
            WeightDist::UniformInt { lo, hi } => lo <= hi,
            WeightDist::Constant(c) => c.is_finite() && c >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(GenError::InvalidConfig(format!("weight distribution {self}")))
        }
    }
}

impl fmt::Display for WeightDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightDist::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            WeightDist::UniformInt { lo, hi } => write!(f, "int:{lo}:{hi}"),
            WeightDist::Constant(c) => write!(f, "const:{c}"),
        }
    }
}

impl FromStr for WeightDist {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, GenError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || GenError::Parse(format!("weights {s:?}"));
        let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
        let int = |x: &str| x.parse::<u32>().map_err(|_| bad());
        match parts.as_slice() {
            ["uniform", lo, hi] => Ok(WeightDist::Uniform {
                lo: num(lo)?,
                hi: num(hi)?,
            }),
            ["int", lo, hi] => Ok(WeightDist::UniformInt {
                lo: int(lo)?,
                hi: int(hi)?,
            }),
            ["const", c] => Ok(WeightDist::Constant(num(c)?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorKind {
    Random { p: f64 },
    Geometric { tau: f64 },
    Adversarial { name: String, eps: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    pub n: usize,
    pub d: usize,
    pub mode: WeightMode,
    pub weights: WeightDist,
    pub seed: u64,
}

pub const DEFAULT_TRAP_EPS: f64 = 1.0 / 64.0;

impl GeneratorConfig {
    pub fn random(n: usize, d: usize, p: f64, mode: WeightMode, weights: WeightDist, seed: u64) -> Self {
        GeneratorConfig {
            kind: GeneratorKind::Random { p },
            n,
            d,
            mode,
            weights,
            seed,
        }
    }

    pub fn geometric(n: usize, d: usize, tau: f64, mode: WeightMode, seed: u64) -> Self {
        GeneratorConfig {
            kind: GeneratorKind::Geometric { tau },
            n,
            d,
            mode,
            weights: WeightDist::Constant(1.0),
            seed,
        }
    }

    pub fn adversarial(name: &str, n: usize, d: usize, mode: WeightMode) -> Self {
        GeneratorConfig {
            kind: GeneratorKind::Adversarial {
                name: name.to_owned(),
                eps: DEFAULT_TRAP_EPS,
            },
            n,
            d,
            mode,
            weights: WeightDist::Constant(1.0),
            seed: 0,
        }
    }

    pub fn check(&self) -> Result<(), GenError> {
        if self.n == 0 {
            return Err(GenError::InvalidConfig("n must be positive".into()));
        }
        self.weights.check()?;
        match &self.kind {
            GeneratorKind::Random { p } if !(0.0..=1.0).contains(p) => {
                Err(GenError::InvalidConfig(format!("p={p} outside [0, 1]")))
            }
            GeneratorKind::Geometric { tau } if !(tau.is_finite() && *tau >= 1.0) => {
                Err(GenError::InvalidConfig(format!("tau={tau} must be at least 1")))
            }
            GeneratorKind::Adversarial { eps, .. } if !(eps.is_finite() && *eps >= 0.0) => {
                Err(GenError::InvalidConfig(format!("eps={eps} must be non-negative")))
            }
            _ => Ok(()),
        }
    }

    pub fn generate(&self) -> Result<Instance, GenError> {
        match self.kind {
            GeneratorKind::Random { .. } => gen_random(self),
            GeneratorKind::Geometric { .. } => gen_geometric_rides(self),
            GeneratorKind::Adversarial { .. } => gen_adversarial(self),
        }
    }
}

impl fmt::Display for GeneratorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GeneratorKind::Random { p } => write!(
                f,
                "random:n={},d={},p={p},mode={},weights={},seed={}",
                self.n, self.d, self.mode, self.weights, self.seed
            ),
            GeneratorKind::Geometric { tau } => write!(
                f,
                "geometric:n={},d={},tau={tau},mode={},seed={}",
                self.n, self.d, self.mode, self.seed
            ),
            GeneratorKind::Adversarial { name, eps } => write!(
                f,
                "adversarial:name={name},n={},d={},mode={},eps={eps}",
                self.n, self.d, self.mode
            ),
        }
    }
}

impl FromStr for GeneratorConfig {
    type Err = GenError;

    /// Missing keys fall back to `n=8, d=2, p=0.5, tau=1.5, mode=edge,
    /// weights=int:1:10, seed=0`.
    fn from_str(s: &str) -> Result<Self, GenError> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut n = 8;
        let mut d = 2;
        let mut p = 0.5;
        let mut tau = 1.5;
        let mut eps = DEFAULT_TRAP_EPS;
        let mut name = None;
        let mut mode = WeightMode::Edge;
        let mut weights = WeightDist::UniformInt { lo: 1, hi: 10 };
        let mut seed = 0;
        let bad = |k: &str, v: &str| GenError::Parse(format!("{k}={v}"));
        for pair in rest.split(',').filter(|x| !x.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| GenError::Parse(format!("expected key=value, got {pair:?}")))?;
            match k {
                "n" => n = v.parse().map_err(|_| bad(k, v))?,
                "d" => d = v.parse().map_err(|_| bad(k, v))?,
                "p" => p = v.parse().map_err(|_| bad(k, v))?,
                "tau" => tau = v.parse().map_err(|_| bad(k, v))?,
                "eps" => eps = v.parse().map_err(|_| bad(k, v))?,
                "seed" => seed = v.parse().map_err(|_| bad(k, v))?,
                "name" => name = Some(v.to_owned()),
                "weights" => weights = v.parse()?,
                "mode" => {
                    mode = match v {
                        "edge" => WeightMode::Edge,
                        "vertex" => WeightMode::Vertex,
                        _ => return Err(bad(k, v)),
                    }
                }
                _ => return Err(GenError::Parse(format!("unknown key {k:?}"))),
            }
        }
        let kind = match kind {
            "random" => GeneratorKind::Random { p },
            "geometric" => GeneratorKind::Geometric { tau },
            "adversarial" => GeneratorKind::Adversarial {
                name: name.ok_or_else(|| GenError::Parse("adversarial needs name=".into()))?,
                eps,
            },
            other => return Err(GenError::Parse(format!("unknown kind {other:?}"))),
        };
        let cfg = GeneratorConfig {
            kind,
            n,
            d,
            mode,
            weights,
            seed,
        };
        cfg.check()?;
        Ok(cfg)
    }
}

fn assemble(
    n: usize,
    d: usize,
    mode: WeightMode,
    vertex_weights: Vec<f64>,
    edges: Vec<(VertexId, VertexId, f64)>,
) -> Instance {
    match mode {
        WeightMode::Edge => Instance::edge_weighted(n, d, edges),
        WeightMode::Vertex => {
            Instance::vertex_weighted(n, d, vertex_weights, edges.into_iter().map(|(j, i, _)| (j, i)))
        }
    }
}

/// Admissible pairs `(j, i)` in origin-then-terminal order.
fn window_pairs(n: usize, d: usize) -> impl Iterator<Item = (VertexId, VertexId)> {
    (2..=n).flat_map(move |j| (j.saturating_sub(d).max(1)..j).map(move |i| (j, i)))
}

pub fn gen_random(cfg: &GeneratorConfig) -> Result<Instance, GenError> {
    cfg.check()?;
    let GeneratorKind::Random { p } = cfg.kind else {
        return Err(GenError::InvalidConfig("not a random config".into()));
    };
    let mut rng = seeded(cfg.seed);
    let vertex_weights = match cfg.mode {
        WeightMode::Vertex => (0..cfg.n).map(|_| cfg.weights.sample(&mut rng)).collect(),
        WeightMode::Edge => Vec::new(),
    };
    let mut edges = Vec::new();
    for (j, i) in window_pairs(cfg.n, cfg.d) {
        if rng.gen_bool(p) {
            let w = match cfg.mode {
                WeightMode::Edge => cfg.weights.sample(&mut rng),
                WeightMode::Vertex => 0.0,
            };
            edges.push((j, i, w));
        }
    }
    Ok(assemble(cfg.n, cfg.d, cfg.mode, vertex_weights, edges))
}

pub type Point = (f64, f64);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ride {
    pub pickup: Point,
    pub dropoff: Point,
}

fn dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

impl Ride {
    pub fn solo(&self) -> f64 {
        dist(self.pickup, self.dropoff)
    }
}

/// Shortest single-vehicle route serving both rides with both pickups first:
/// the best of `PaPbQaQb`, `PaPbQbQa`, `PbPaQaQb` and `PbPaQbQa`.
pub fn shared_route_length(a: &Ride, b: &Ride) -> f64 {
    let route = |stops: [Point; 4]| dist(stops[0], stops[1]) + dist(stops[1], stops[2]) + dist(stops[2], stops[3]);
    [
        route([a.pickup, b.pickup, a.dropoff, b.dropoff]),
        route([a.pickup, b.pickup, b.dropoff, a.dropoff]),
        route([b.pickup, a.pickup, a.dropoff, b.dropoff]),
        route([b.pickup, a.pickup, b.dropoff, a.dropoff]),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

/// Distance saved by sharing; symmetric in the two rides.
pub fn saving(a: &Ride, b: &Ride) -> f64 {
    a.solo() + b.solo() - shared_route_length(a, b)
}

/// Builds an instance from explicit rides (vertex `r` is `rides[r - 1]`).
pub fn rides_to_instance(rides: &[Ride], d: usize, tau: f64, mode: WeightMode) -> Instance {
    let n = rides.len();
    let vertex_weights = rides.iter().map(Ride::solo).collect();
    let mut edges = Vec::new();
    for (j, i) in window_pairs(n, d) {
        let (a, b) = (&rides[j - 1], &rides[i - 1]);
        let s = saving(a, b);
        if s > 0.0 && shared_route_length(a, b) <= tau * (a.solo() + b.solo()) {
            edges.push((j, i, s));
        }
    }
    assemble(n, d, mode, vertex_weights, edges)
}

pub fn gen_rides(n: usize, seed: u64) -> Vec<Ride> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| Ride {
            pickup: (rng.gen(), rng.gen()),
            dropoff: (rng.gen(), rng.gen()),
        })
        .collect()
}

pub fn gen_geometric_rides(cfg: &GeneratorConfig) -> Result<Instance, GenError> {
    cfg.check()?;
    let GeneratorKind::Geometric { tau } = cfg.kind else {
        return Err(GenError::InvalidConfig("not a geometric config".into()));
    };
    Ok(rides_to_instance(&gen_rides(cfg.n, cfg.seed), cfg.d, tau, cfg.mode))
}

/// Name and description of every fixed adversarial instance.
pub const ADVERSARIAL_CATALOG: &[(&str, &str)] = &[
    (
        "greedy-trap",
        "edge mode, n=4, d=2: (3,1) w=1, (3,2) w=1+eps, (4,2) w=1; greedy allocation gets 1+eps of an optimal 2",
    ),
    (
        "path-chain",
        "unit-weight path (2,1), (3,2), ..., (n,n-1); one long semi-matching path",
    ),
    (
        "clique-window",
        "every admissible pair within the window, unit weights",
    ),
];

/// The greedy trap: item 3 goes to bidder 2 for `1 + eps`, after which item 4
/// has no positive marginal, while giving 3 to bidder 1 and 4 to bidder 2
/// values 2.
pub fn greedy_trap(eps: f64) -> Instance {
    Instance::edge_weighted(4, 2, [(3, 1, 1.0), (3, 2, 1.0 + eps), (4, 2, 1.0)])
}

pub fn gen_adversarial(cfg: &GeneratorConfig) -> Result<Instance, GenError> {
    cfg.check()?;
    let GeneratorKind::Adversarial { name, eps } = &cfg.kind else {
        return Err(GenError::InvalidConfig("not an adversarial config".into()));
    };
    let unit = |edges: Vec<(VertexId, VertexId)>| {
        let edges = edges.into_iter().map(|(j, i)| (j, i, 1.0)).collect();
        assemble(cfg.n, cfg.d, cfg.mode, vec![1.0; cfg.n], edges)
    };
    match name.as_str() {
        "greedy-trap" => match cfg.mode {
            WeightMode::Edge => Ok(greedy_trap(*eps)),
            WeightMode::Vertex => Err(GenError::InvalidConfig("greedy-trap is edge-weighted only".into())),
        },
        "path-chain" => {
            if cfg.d == 0 && cfg.n > 1 {
                return Err(GenError::InvalidConfig("path-chain needs d >= 1".into()));
            }
            Ok(unit((2..=cfg.n).map(|j| (j, j - 1)).collect()))
        }
        "clique-window" => Ok(unit(window_pairs(cfg.n, cfg.d).collect())),
        other => Err(GenError::UnknownAdversarial(other.to_owned())),
    }
}
