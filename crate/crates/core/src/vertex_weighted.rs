//! Vertex-weighted pipeline.
//!
//! A fair coin picks one of two perturbed-greedy branches, each of which
//! builds a semi-matching online:
//!
//! * destination: when `j` arrives it takes the white terminal `k` of one of
//!   its edges maximising `w_k (1 - e^{Y_k - 1})`, and blackens it;
//! * origin: at step `t` the terminal `i = t - d` takes the white origin `k`
//!   of one of its incoming edges maximising the same score, and blackens the
//!   origin. `d` weightless dummy steps flush the timeline.
//!
//! The semi-matching is a union of paths that descend in vertex index. A
//! [`PathChain`] turns it into a 3-matching online: each set is a contiguous
//! piece of a path, pairs grow into triples, and when the head of a triple
//! gains an incoming edge it is removed from the triple and re-paired.
//! No matched vertex is ever dropped, so the 3-matching weighs at least the
//! half-weight of the semi-matching.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::model::{
    validate_semi_matching, validate_three_matching, Instance, ModelError, Pick, SemiMatching,
    ThreeMatchAction, ThreeMatchEvent, ThreeMatching, ValidationReport, VertexId, WeightMode,
    WindowedGraph,
};
use crate::random::{seeded, RandomSource};
use crate::scalar::{total, Weight};

#[derive(Debug, thiserror::Error)]
pub enum VertexError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("perturbation {0} is outside [0, 1]")]
    PerturbationRange(f64),
    #[error("expected step {expected}, got {got}")]
    OutOfOrder { expected: usize, got: usize },
    #[error("{called} step called on a {branch:?} run")]
    WrongBranch { called: Branch, branch: Branch },
    #[error("3-matching construction broke an invariant: {0}")]
    Structural(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Origin,
    Destination,
}

impl Branch {
    /// Coin `true` selects the origin branch.
    pub fn from_coin(coin: bool) -> Self {
        if coin {
            Branch::Origin
        } else {
            Branch::Destination
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Origin => f.write_str("origin"),
            Branch::Destination => f.write_str("destination"),
        }
    }
}

/// `w · (1 - e^{y - 1})` for `y ∈ [0, 1]`.
pub fn perturbed_score<F: Float>(weight: F, y: F) -> Result<F, VertexError> {
    if !(y >= F::zero() && y <= F::one()) {
        return Err(VertexError::PerturbationRange(y.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(weight * (F::one() - (y - F::one()).exp()))
}

/// Branch, colours and perturbations of one run.
#[derive(Clone, Debug)]
pub struct VwState {
    branch: Branch,
    black: Vec<bool>,
    draws: Vec<f64>,
    horizon: usize,
}

impl VwState {
    pub fn new(n: usize, d: usize, branch: Branch) -> Self {
        let horizon = match branch {
            Branch::Destination => n,
            Branch::Origin => n + d,
        };
        VwState {
            branch,
            black: vec![false; n + 1],
            draws: Vec::with_capacity(horizon),
            horizon,
        }
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Perturbation drawn at step `t` (vertex `t`, or a dummy past `n`).
    pub fn y(&self, t: usize) -> Option<f64> {
        t.checked_sub(1).and_then(|k| self.draws.get(k)).copied()
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn is_black(&self, v: VertexId) -> bool {
        self.black.get(v).copied().unwrap_or(false)
    }

    fn advance<R: RandomSource + ?Sized>(&mut self, called: Branch, t: usize, rng: &mut R) -> Result<(), VertexError> {
        if called != self.branch {
            return Err(VertexError::WrongBranch {
                called,
                branch: self.branch,
            });
        }
        let expected = self.draws.len() + 1;
        if t != expected || t > self.horizon {
            return Err(VertexError::OutOfOrder { expected, got: t });
        }
        let y = rng.unit();
        if !(0.0..=1.0).contains(&y) {
            return Err(VertexError::PerturbationRange(y));
        }
        self.draws.push(y);
        Ok(())
    }

    /// Highest-scoring white candidate, lowest id on ties.
    fn best<W: Weight>(
        &self,
        graph: &WindowedGraph<'_, W>,
        candidates: impl Iterator<Item = VertexId>,
    ) -> Result<Option<VertexId>, VertexError> {
        let mut best: Option<(VertexId, f64)> = None;
        for k in candidates {
            if self.black[k] {
                continue;
            }
            let y = self
                .y(k)
                .ok_or_else(|| VertexError::Structural(format!("vertex {k} has no perturbation yet")))?;
            let score = perturbed_score(graph.vertex_weight(k).as_f64(), y)?;
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((k, score));
            }
        }
        Ok(best.map(|(k, _)| k))
    }

    /// Destination branch, vertex `j` arriving at time `j`.
    pub fn destination_step<W: Weight, R: RandomSource + ?Sized>(
        &mut self,
        graph: &WindowedGraph<'_, W>,
        j: VertexId,
        rng: &mut R,
    ) -> Result<Option<Pick>, VertexError> {
        self.advance(Branch::Destination, j, rng)?;
        let terminals = graph.out_edges(j).iter().map(|&(k, _)| k);
        let Some(i) = self.best(graph, terminals)? else {
            return Ok(None);
        };
        self.black[i] = true;
        Ok(Some(Pick::new(j, i, j)))
    }

    /// Origin branch, step `t ∈ 1..=n+d`, serving terminal `t - d`.
    pub fn origin_step<W: Weight, R: RandomSource + ?Sized>(
        &mut self,
        graph: &WindowedGraph<'_, W>,
        t: usize,
        rng: &mut R,
    ) -> Result<Option<Pick>, VertexError> {
        self.advance(Branch::Origin, t, rng)?;
        let d = graph.d();
        if t <= d {
            return Ok(None);
        }
        let i = t - d;
        let origins = graph.in_edges(i).iter().map(|&(k, _)| k);
        let Some(j) = self.best(graph, origins)? else {
            return Ok(None);
        };
        self.black[j] = true;
        Ok(Some(Pick::new(j, i, t)))
    }
}

/// Sum of origin weights (origin branch) or terminal weights (destination
/// branch) over the semi-matching.
pub fn half_weight<W: Weight>(graph: &WindowedGraph<'_, W>, semi: &SemiMatching, branch: Branch) -> W {
    total(semi.entries.iter().map(|p| match branch {
        Branch::Origin => graph.vertex_weight(p.origin),
        Branch::Destination => graph.vertex_weight(p.terminal),
    }))
}

/// Online 3-matching built from a semi-matching, one terminal at a time.
///
/// Set members are stored head first, in decreasing vertex order; the head
/// is the vertex whose outgoing edge joined it to the set.
#[derive(Clone, Debug)]
pub struct PathChain {
    set_of: Vec<Option<usize>>,
    sets: Vec<Vec<VertexId>>,
    events: Vec<ThreeMatchEvent>,
    last: VertexId,
}

impl PathChain {
    pub fn new(n: usize) -> Self {
        PathChain {
            set_of: vec![None; n + 1],
            sets: Vec::new(),
            events: Vec::new(),
            last: 0,
        }
    }

    pub fn set_of(&self, v: VertexId) -> Option<usize> {
        self.set_of.get(v).copied().flatten()
    }

    pub fn set(&self, id: usize) -> Option<&[VertexId]> {
        self.sets.get(id).map(Vec::as_slice)
    }

    /// Whether `v` heads a triple and would be removed if it gained an
    /// incoming edge.
    pub fn is_removable_head(&self, v: VertexId) -> bool {
        self.set_of(v)
            .is_some_and(|s| self.sets[s].len() == 3 && self.sets[s][0] == v)
    }

    pub fn events(&self) -> &[ThreeMatchEvent] {
        &self.events
    }

    fn create_pair(&mut self, origin: VertexId, terminal: VertexId, time: usize) {
        let id = self.sets.len();
        self.sets.push(vec![origin, terminal]);
        self.set_of[origin] = Some(id);
        self.set_of[terminal] = Some(id);
        self.events.push(ThreeMatchEvent {
            time,
            action: ThreeMatchAction::CreatePair,
            set: id,
            origin,
            terminal,
        });
    }

    /// Processes vertex `i` at `time`, given the origin `j` of its incoming
    /// semi-matching edge. Returns the events this step produced.
    pub fn three_match_step(
        &mut self,
        i: VertexId,
        incoming: Option<VertexId>,
        time: usize,
    ) -> Result<&[ThreeMatchEvent], VertexError> {
        if i >= self.set_of.len() || i <= self.last {
            return Err(VertexError::OutOfOrder {
                expected: self.last + 1,
                got: i,
            });
        }
        self.last = i;
        let start = self.events.len();
        let Some(j) = incoming else {
            return Ok(&self.events[start..]);
        };
        if j >= self.set_of.len() || j <= i {
            return Err(VertexError::Structural(format!("({j},{i}) is not a backward edge")));
        }
        if self.set_of[j].is_some() {
            return Err(VertexError::Structural(format!(
                "origin {j} placed before its edge to {i} was processed"
            )));
        }
        match self.set_of[i] {
            None => self.create_pair(j, i, time),
            Some(s) => {
                if self.sets[s][0] != i {
                    return Err(VertexError::Structural(format!("{i} is not the head of set {s}")));
                }
                match self.sets[s].len() {
                    2 => {
                        self.sets[s].insert(0, j);
                        self.set_of[j] = Some(s);
                        self.events.push(ThreeMatchEvent {
                            time,
                            action: ThreeMatchAction::ExtendToTriple,
                            set: s,
                            origin: j,
                            terminal: i,
                        });
                    }
                    3 => {
                        self.sets[s].remove(0);
                        self.set_of[i] = None;
                        self.events.push(ThreeMatchEvent {
                            time,
                            action: ThreeMatchAction::DeleteEdgeAndRepair,
                            set: s,
                            origin: i,
                            terminal: self.sets[s][0],
                        });
                        self.create_pair(j, i, time);
                    }
                    len => {
                        return Err(VertexError::Structural(format!("set {s} has {len} members")));
                    }
                }
            }
        }
        Ok(&self.events[start..])
    }

    pub fn finish(self) -> ThreeMatching {
        ThreeMatching {
            sets: self.sets,
            events: self.events,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VertexRun<W> {
    pub branch: Branch,
    /// Perturbations in draw order; past `n` they belong to dummies.
    pub draws: Vec<f64>,
    pub semi: SemiMatching,
    pub three: ThreeMatching,
    pub half_weight: W,
    pub three_weight: W,
}

impl<W: Weight> VertexRun<W> {
    /// Picks later than `terminal + d`, plus deletions of `(j, x)` later
    /// than `j + d`.
    pub fn deadline_violations(&self, d: usize) -> usize {
        let picks = self.semi.entries.iter().filter(|p| p.time > p.terminal + d).count();
        let three = self
            .three
            .events
            .iter()
            .filter(|e| match e.action {
                ThreeMatchAction::DeleteEdgeAndRepair => e.time > e.origin + d,
                _ => e.time > e.terminal + d,
            })
            .count();
        picks + three
    }

    pub fn log(&self, seed: Option<u64>) -> VertexRunLog {
        VertexRunLog {
            pipeline: "vertex".into(),
            seed,
            branch: self.branch,
            y_draws: self.draws.clone(),
            semi_matching: self.semi.clone(),
            three_matching: self.three.clone(),
            half_weight: self.half_weight.as_f64(),
            three_weight: self.three_weight.as_f64(),
        }
    }
}

/// JSON run log of one vertex pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexRunLog {
    pub pipeline: String,
    pub seed: Option<u64>,
    pub branch: Branch,
    pub y_draws: Vec<f64>,
    pub semi_matching: SemiMatching,
    pub three_matching: ThreeMatching,
    pub half_weight: f64,
    pub three_weight: f64,
}

#[derive(Clone, Debug)]
pub struct VertexPipeline<'a, W> {
    graph: WindowedGraph<'a, W>,
}

impl<'a, W: Weight> VertexPipeline<'a, W> {
    pub fn new(inst: &'a Instance<W>) -> Result<Self, VertexError> {
        let graph = inst.index()?;
        graph.require_mode(WeightMode::Vertex)?;
        Ok(VertexPipeline { graph })
    }

    pub fn graph(&self) -> &WindowedGraph<'a, W> {
        &self.graph
    }

    pub fn run(&self, seed: u64) -> Result<VertexRun<W>, VertexError> {
        self.run_with(&mut seeded(seed))
    }

    /// One coin for the branch, then one uniform draw per step in step
    /// order. At step `t` the branch step runs first, then terminal `t - d`
    /// is handed to the 3-matching.
    pub fn run_with<R: RandomSource + ?Sized>(&self, rng: &mut R) -> Result<VertexRun<W>, VertexError> {
        let g = &self.graph;
        let (n, d) = (g.n(), g.d());
        let branch = Branch::from_coin(rng.coin());
        let mut state = VwState::new(n, d, branch);
        let mut chain = PathChain::new(n);
        let mut semi = SemiMatching::default();
        let mut incoming: Vec<Option<VertexId>> = vec![None; n + 1];

        for t in 1..=n + d {
            let pick = match branch {
                Branch::Destination if t <= n => state.destination_step(g, t, rng)?,
                Branch::Destination => None,
                Branch::Origin => state.origin_step(g, t, rng)?,
            };
            if let Some(p) = pick {
                incoming[p.terminal] = Some(p.origin);
                semi.entries.push(p);
            }
            if t > d {
                let i = t - d;
                chain.three_match_step(i, incoming[i], t)?;
            }
        }

        let three = chain.finish();
        let half = half_weight(g, &semi, branch);
        let three_weight = total(three.sets.iter().flatten().map(|&v| g.vertex_weight(v)));
        Ok(VertexRun {
            branch,
            draws: state.draws,
            semi,
            three,
            half_weight: half,
            three_weight,
        })
    }

    pub fn validate(&self, run: &VertexRun<W>) -> ValidationReport {
        let mut report = validate_semi_matching(&self.graph, &run.semi);
        report.merge(validate_three_matching(&self.graph, &run.three));
        report
    }
}

pub fn run_vertex_pipeline<W: Weight>(inst: &Instance<W>, seed: u64) -> Result<VertexRun<W>, VertexError> {
    VertexPipeline::new(inst)?.run(seed)
}
