//! Edge-weighted pipeline.
//!
//! Every vertex `i` is both a bidder and an item of a combinatorial auction in
//! which bidder `i` values a bundle `S` at the heaviest edge `(j, i)` with
//! `j ∈ S`. Items are allocated greedily by marginal valuation as they arrive.
//! A bidder's bundle cannot change once `i + d` has passed, so at that step
//! its heaviest edge is frozen into a semi-matching. The semi-matching is then
//! rounded to a matching: walking vertices in increasing order, a terminal
//! takes the colour opposite to the terminal of its own outgoing edge, or a
//! fair coin if it has none, and its incoming edge is kept iff it is green.

use serde::{Deserialize, Serialize};

use crate::model::{
    validate_matching, validate_semi_matching, Instance, Matching, ModelError, Pick,
    SemiMatching, ValidationReport, VertexId, WeightMode, WindowedGraph,
};
use crate::random::{seeded, RandomSource};
use crate::scalar::{total, Weight};

#[derive(Debug, thiserror::Error)]
pub enum EdgeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("vertex {0} is out of range")]
    UnknownVertex(VertexId),
    #[error("item {0} has already been processed")]
    DoubleAllocation(VertexId),
    #[error("expected vertex {expected} next, got {got}")]
    OutOfOrder { expected: VertexId, got: VertexId },
    #[error("bidder {bidder} is not frozen at time {now} (freezes at {freeze})")]
    NotFrozen {
        bidder: VertexId,
        now: usize,
        freeze: usize,
    },
    #[error("vertex {partner} is uncolored while processing {vertex}; input is not a semi-matching")]
    PartnerUncolored { vertex: VertexId, partner: VertexId },
}

/// `max(0, max_{j ∈ items, (j, bidder) ∈ E} w(j, bidder))`.
pub fn valuation<W: Weight>(
    graph: &WindowedGraph<'_, W>,
    bidder: VertexId,
    items: &[VertexId],
) -> Result<W, EdgeError> {
    if !graph.contains(bidder) {
        return Err(EdgeError::UnknownVertex(bidder));
    }
    items.iter().try_fold(W::zero(), |best, &j| {
        if !graph.contains(j) {
            return Err(EdgeError::UnknownVertex(j));
        }
        Ok(graph.edge_weight(j, bidder).map_or(best, |w| best.max_with(w)))
    })
}

/// Greedy allocation state.
#[derive(Clone, Debug)]
pub struct AuctionState<W> {
    bundles: Vec<Vec<VertexId>>,
    values: Vec<W>,
    owner: Vec<Option<VertexId>>,
    time: usize,
}

impl<W: Weight> AuctionState<W> {
    pub fn new(n: usize) -> Self {
        AuctionState {
            bundles: vec![Vec::new(); n + 1],
            values: vec![W::zero(); n + 1],
            owner: vec![None; n + 1],
            time: 0,
        }
    }

    /// Number of items allocated (or passed over) so far.
    pub fn time(&self) -> usize {
        self.time
    }

    pub fn bundle(&self, bidder: VertexId) -> &[VertexId] {
        self.bundles.get(bidder).map_or(&[], Vec::as_slice)
    }

    pub fn value(&self, bidder: VertexId) -> W {
        self.values.get(bidder).copied().unwrap_or_else(W::zero)
    }

    pub fn owner(&self, item: VertexId) -> Option<VertexId> {
        self.owner.get(item).copied().flatten()
    }

    pub fn total_valuation(&self) -> W {
        total(self.values.iter().copied())
    }

    /// `val_i(item | S_i)`. Zero for bidders that have not arrived and for
    /// bidders without an edge from `item`.
    pub fn marginal_valuation(&self, graph: &WindowedGraph<'_, W>, bidder: VertexId, item: VertexId) -> W {
        if bidder > self.time.max(item) {
            return W::zero();
        }
        match graph.edge_weight(item, bidder) {
            Some(w) if w > self.value(bidder) => w - self.value(bidder),
            _ => W::zero(),
        }
    }

    /// Gives `item` to the bidder with the largest positive marginal
    /// valuation, lowest index on ties. Items with no positive marginal stay
    /// unallocated.
    pub fn allocate_item(
        &mut self,
        graph: &WindowedGraph<'_, W>,
        item: VertexId,
    ) -> Result<Option<VertexId>, EdgeError> {
        if !graph.contains(item) {
            return Err(EdgeError::UnknownVertex(item));
        }
        if item <= self.time {
            return Err(EdgeError::DoubleAllocation(item));
        }
        if item != self.time + 1 {
            return Err(EdgeError::OutOfOrder {
                expected: self.time + 1,
                got: item,
            });
        }
        self.time = item;

        let mut best: Option<(VertexId, W)> = None;
        for &(bidder, _) in graph.out_edges(item) {
            let gain = self.marginal_valuation(graph, bidder, item);
            if gain > W::zero() && best.is_none_or(|(_, g)| gain > g) {
                best = Some((bidder, gain));
            }
        }
        let Some((bidder, gain)) = best else {
            return Ok(None);
        };
        self.bundles[bidder].push(item);
        self.values[bidder] = self.values[bidder] + gain;
        self.owner[item] = Some(bidder);
        Ok(Some(bidder))
    }

    /// Freezes bidder `i` at `now >= i + d` (or once every item has arrived)
    /// and returns the heaviest edge of its bundle, if its value is positive.
    pub fn finalize_bidder(
        &self,
        graph: &WindowedGraph<'_, W>,
        bidder: VertexId,
        now: usize,
    ) -> Result<Option<Pick>, EdgeError> {
        if !graph.contains(bidder) {
            return Err(EdgeError::UnknownVertex(bidder));
        }
        let freeze = bidder + graph.d();
        let stream_over = self.time == graph.n();
        if (now < freeze && !stream_over) || self.time < freeze.min(graph.n()) {
            return Err(EdgeError::NotFrozen { bidder, now, freeze });
        }
        if self.value(bidder) <= W::zero() {
            return Ok(None);
        }
        let mut best: Option<(VertexId, W)> = None;
        let mut items = self.bundles[bidder].clone();
        items.sort_unstable();
        for j in items {
            let w = graph.edge_weight(j, bidder).unwrap_or_else(W::zero);
            if best.is_none_or(|(_, b)| w > b) {
                best = Some((j, w));
            }
        }
        Ok(best.map(|(j, _)| Pick::new(j, bidder, now)))
    }

    /// Bundles disjoint, every item owned at most once, and each stored value
    /// equal to the recomputed valuation of its bundle.
    pub fn is_consistent(&self, graph: &WindowedGraph<'_, W>) -> bool {
        let mut seen = vec![false; self.owner.len()];
        for (bidder, bundle) in self.bundles.iter().enumerate().skip(1) {
            for &item in bundle {
                if seen[item] || self.owner[item] != Some(bidder) {
                    return false;
                }
                seen[item] = true;
            }
            match valuation(graph, bidder, bundle) {
                Ok(v) if v == self.values[bidder] => {}
                _ => return false,
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Green,
    Red,
}

impl Color {
    pub fn opposite(self) -> Self {
        match self {
            Color::Green => Color::Red,
            Color::Red => Color::Green,
        }
    }
}

/// Colours assigned by the rounding step.
#[derive(Clone, Debug)]
pub struct ColoringState {
    colors: Vec<Option<Color>>,
    last: VertexId,
}

impl ColoringState {
    pub fn new(n: usize) -> Self {
        ColoringState {
            colors: vec![None; n + 1],
            last: 0,
        }
    }

    pub fn color(&self, v: VertexId) -> Option<Color> {
        self.colors.get(v).copied().flatten()
    }

    /// Processes vertex `i` at `time`. Coin `true` is green.
    pub fn color_and_round<R: RandomSource + ?Sized>(
        &mut self,
        semi: &SemiMatching,
        vertex: VertexId,
        time: usize,
        rng: &mut R,
    ) -> Result<Option<Pick>, EdgeError> {
        if vertex >= self.colors.len() {
            return Err(EdgeError::UnknownVertex(vertex));
        }
        if vertex <= self.last {
            return Err(EdgeError::OutOfOrder {
                expected: self.last + 1,
                got: vertex,
            });
        }
        self.last = vertex;
        let Some(incoming) = semi.incoming(vertex) else {
            return Ok(None);
        };
        let color = match semi.outgoing(vertex) {
            Some(out) => match self.color(out.terminal) {
                Some(c) => c.opposite(),
                None => {
                    return Err(EdgeError::PartnerUncolored {
                        vertex,
                        partner: out.terminal,
                    })
                }
            },
            None => {
                if rng.coin() {
                    Color::Green
                } else {
                    Color::Red
                }
            }
        };
        self.colors[vertex] = Some(color);
        Ok((color == Color::Green).then(|| Pick::new(incoming.origin, vertex, time)))
    }
}

/// One entry of the edge pipeline's run log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeEvent {
    pub time: usize,
    #[serde(flatten)]
    pub kind: EdgeEventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EdgeEventKind {
    Allocate {
        item: VertexId,
        bidder: Option<VertexId>,
    },
    Finalize {
        bidder: VertexId,
        origin: Option<VertexId>,
        value: f64,
    },
    Color {
        vertex: VertexId,
        color: Color,
    },
    Emit {
        origin: VertexId,
        terminal: VertexId,
    },
}

#[derive(Clone, Debug)]
pub struct EdgeRun<W> {
    pub semi: SemiMatching,
    pub matching: Matching,
    pub allocation_value: W,
    pub semi_weight: W,
    pub matching_weight: W,
    pub events: Vec<EdgeEvent>,
}

impl<W: Weight> EdgeRun<W> {
    /// Picks in either structure made after `terminal + d`.
    pub fn deadline_violations(&self, d: usize) -> usize {
        self.semi
            .entries
            .iter()
            .chain(&self.matching.entries)
            .filter(|p| p.time > p.terminal + d)
            .count()
    }

    pub fn log(&self, seed: Option<u64>) -> EdgeRunLog {
        EdgeRunLog {
            pipeline: "edge".into(),
            seed,
            events: self.events.clone(),
            semi_matching: self.semi.clone(),
            matching: self.matching.clone(),
            semi_weight: self.semi_weight.as_f64(),
            matching_weight: self.matching_weight.as_f64(),
        }
    }
}

/// JSON run log of one edge pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRunLog {
    pub pipeline: String,
    pub seed: Option<u64>,
    pub events: Vec<EdgeEvent>,
    pub semi_matching: SemiMatching,
    pub matching: Matching,
    pub semi_weight: f64,
    pub matching_weight: f64,
}

/// A validated edge-mode instance ready for repeated runs.
#[derive(Clone, Debug)]
pub struct EdgePipeline<'a, W> {
    graph: WindowedGraph<'a, W>,
}

impl<'a, W: Weight> EdgePipeline<'a, W> {
    pub fn new(inst: &'a Instance<W>) -> Result<Self, EdgeError> {
        let graph = inst.index()?;
        graph.require_mode(WeightMode::Edge)?;
        Ok(EdgePipeline { graph })
    }

    pub fn graph(&self) -> &WindowedGraph<'a, W> {
        &self.graph
    }

    pub fn run(&self, seed: u64) -> Result<EdgeRun<W>, EdgeError> {
        self.run_with(&mut seeded(seed))
    }

    /// Drives the timeline `1..=n+d`. At step `t`, item `t` is allocated
    /// (while `t <= n`), then bidder `t - d` is frozen and rounded.
    pub fn run_with<R: RandomSource + ?Sized>(&self, rng: &mut R) -> Result<EdgeRun<W>, EdgeError> {
        let g = &self.graph;
        let (n, d) = (g.n(), g.d());
        let mut auction = AuctionState::new(n);
        let mut coloring = ColoringState::new(n);
        let mut semi = SemiMatching::default();
        let mut matching = Matching::default();
        let mut events = Vec::new();

        for t in 1..=n + d {
            if t <= n {
                let bidder = auction.allocate_item(g, t)?;
                events.push(EdgeEvent {
                    time: t,
                    kind: EdgeEventKind::Allocate { item: t, bidder },
                });
            }
            if t <= d {
                continue;
            }
            let i = t - d;
            let frozen = auction.finalize_bidder(g, i, t)?;
            events.push(EdgeEvent {
                time: t,
                kind: EdgeEventKind::Finalize {
                    bidder: i,
                    origin: frozen.map(|p| p.origin),
                    value: auction.value(i).as_f64(),
                },
            });
            if let Some(pick) = frozen {
                semi.entries.push(pick);
            }
            let kept = coloring.color_and_round(&semi, i, t, rng)?;
            if let Some(color) = coloring.color(i) {
                events.push(EdgeEvent {
                    time: t,
                    kind: EdgeEventKind::Color { vertex: i, color },
                });
            }
            if let Some(pick) = kept {
                events.push(EdgeEvent {
                    time: t,
                    kind: EdgeEventKind::Emit {
                        origin: pick.origin,
                        terminal: pick.terminal,
                    },
                });
                matching.entries.push(pick);
            }
        }

        let weight_of = |picks: &[Pick]| {
            total(picks.iter().map(|p| g.edge_weight(p.origin, p.terminal).unwrap_or_else(W::zero)))
        };
        Ok(EdgeRun {
            allocation_value: auction.total_valuation(),
            semi_weight: weight_of(&semi.entries),
            matching_weight: weight_of(&matching.entries),
            semi,
            matching,
            events,
        })
    }

    /// Runs both structure validators on a run's output.
    pub fn validate(&self, run: &EdgeRun<W>) -> ValidationReport {
        let mut report = validate_semi_matching(&self.graph, &run.semi);
        report.merge(validate_matching(&self.graph, &run.matching));
        report
    }
}

pub fn run_edge_pipeline<W: Weight>(inst: &Instance<W>, seed: u64) -> Result<EdgeRun<W>, EdgeError> {
    EdgePipeline::new(inst)?.run(seed)
}
