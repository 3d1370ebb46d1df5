//! Exact offline optimum for desk-scale instances.
//!
//! Exhaustive search branches on the lowest undecided vertex (leave it
//! unmatched, or match it to each free later neighbour), so every matching is
//! visited exactly once. Branch-and-bound scans edges heaviest first and
//! prunes with the sum of the heaviest remaining compatible edges that could
//! still fit.

use serde::{Deserialize, Serialize};

use crate::model::{Edge, Instance, Matching, ModelError, Pick, VertexId, WeightMode, WindowedGraph};
use crate::scalar::Weight;

pub const DEFAULT_EXHAUSTIVE_CAP: usize = 26;
pub const ENUMERATION_CAP: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{edges} edges exceed the cap of {cap}; enable branch-and-bound")]
    CapExceeded { edges: usize, cap: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    Exhaustive,
    BranchAndBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub method: OracleMethod,
    pub exhaustive_cap: usize,
    /// Fall back to branch-and-bound instead of failing when an exhaustive
    /// request exceeds the cap.
    pub allow_branch_and_bound: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            method: OracleMethod::Exhaustive,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            allow_branch_and_bound: false,
        }
    }
}

impl OracleConfig {
    /// Exhaustive below the cap, branch-and-bound above it.
    pub fn auto() -> Self {
        OracleConfig {
            allow_branch_and_bound: true,
            ..Self::default()
        }
    }

    pub fn exhaustive_uncapped() -> Self {
        OracleConfig {
            exhaustive_cap: usize::MAX,
            ..Self::default()
        }
    }

    pub fn branch_and_bound() -> Self {
        OracleConfig {
            method: OracleMethod::BranchAndBound,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<W> {
    pub weight: W,
    pub witness: Matching,
    pub method: OracleMethod,
    pub nodes: u64,
}

impl<W: Weight> OracleResult<W> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "weight": self.weight.as_f64(),
            "witness": self.witness,
            "method": self.method,
            "nodes": self.nodes,
        })
    }
}

struct Search<'g, 'a, W> {
    graph: &'g WindowedGraph<'a, W>,
    weights: Vec<W>,
    used: Vec<bool>,
    current: Vec<usize>,
    current_weight: W,
    best: Vec<usize>,
    best_weight: W,
    nodes: u64,
}

impl<'g, 'a, W: Weight> Search<'g, 'a, W> {
    fn new(graph: &'g WindowedGraph<'a, W>, weights: Vec<W>) -> Self {
        Search {
            graph,
            weights,
            used: vec![false; graph.n() + 1],
            current: Vec::new(),
            current_weight: W::zero(),
            best: Vec::new(),
            best_weight: W::zero(),
            nodes: 0,
        }
    }

    fn record(&mut self) {
        if self.current_weight > self.best_weight {
            self.best_weight = self.current_weight;
            self.best = self.current.clone();
        }
    }

    fn exhaustive(&mut self, from: VertexId) {
        self.nodes += 1;
        let Some(v) = (from..=self.graph.n()).find(|&v| !self.used[v]) else {
            self.record();
            return;
        };
        self.used[v] = true;
        self.exhaustive(v + 1);
        for &(u, idx) in self.graph.in_edges(v) {
            if self.used[u] {
                continue;
            }
            self.used[u] = true;
            self.current.push(idx);
            let before = self.current_weight;
            self.current_weight = before + self.weights[idx];
            self.exhaustive(v + 1);
            self.current_weight = before;
            self.current.pop();
            self.used[u] = false;
        }
        self.used[v] = false;
    }

    /// `order` lists edge indices by non-increasing weight.
    fn bound(&self, order: &[usize], pos: usize) -> W {
        let free = self.used.iter().skip(1).filter(|u| !**u).count();
        let mut slots = free / 2;
        let mut sum = W::zero();
        for &idx in &order[pos..] {
            if slots == 0 {
                break;
            }
            let e = &self.graph.instance().edges[idx];
            if !self.used[e.origin] && !self.used[e.terminal] {
                sum = sum + self.weights[idx];
                slots -= 1;
            }
        }
        sum
    }

    fn branch_and_bound(&mut self, order: &[usize], pos: usize) {
        self.nodes += 1;
        self.record();
        if pos == order.len() {
            return;
        }
        if self.current_weight + self.bound(order, pos) <= self.best_weight {
            return;
        }
        let idx = order[pos];
        let e = self.graph.instance().edges[idx];
        if !self.used[e.origin] && !self.used[e.terminal] {
            self.used[e.origin] = true;
            self.used[e.terminal] = true;
            self.current.push(idx);
            let before = self.current_weight;
            self.current_weight = before + self.weights[idx];
            self.branch_and_bound(order, pos + 1);
            self.current_weight = before;
            self.current.pop();
            self.used[e.origin] = false;
            self.used[e.terminal] = false;
        }
        self.branch_and_bound(order, pos + 1);
    }

    fn into_result(self, method: OracleMethod) -> OracleResult<W> {
        let edges = &self.graph.instance().edges;
        let mut entries: Vec<Pick> = self
            .best
            .iter()
            .map(|&idx| Pick::new(edges[idx].origin, edges[idx].terminal, edges[idx].origin))
            .collect();
        entries.sort_by_key(|p| (p.terminal, p.origin));
        OracleResult {
            weight: self.best_weight,
            witness: Matching { entries },
            method,
            nodes: self.nodes,
        }
    }
}

fn solve<W: Weight>(
    graph: &WindowedGraph<'_, W>,
    weights: Vec<W>,
    config: &OracleConfig,
) -> Result<OracleResult<W>, OracleError> {
    let edges = weights.len();
    let method = match config.method {
        OracleMethod::Exhaustive if edges <= config.exhaustive_cap => OracleMethod::Exhaustive,
        OracleMethod::Exhaustive if config.allow_branch_and_bound => OracleMethod::BranchAndBound,
        OracleMethod::Exhaustive => {
            return Err(OracleError::CapExceeded {
                edges,
                cap: config.exhaustive_cap,
            })
        }
        OracleMethod::BranchAndBound => OracleMethod::BranchAndBound,
    };
    let mut search = Search::new(graph, weights);
    match method {
        OracleMethod::Exhaustive => search.exhaustive(1),
        OracleMethod::BranchAndBound => {
            let mut order: Vec<usize> = (0..edges).collect();
            order.sort_by(|&a, &b| {
                search.weights[b]
                    .partial_cmp(&search.weights[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            search.branch_and_bound(&order, 0);
        }
    }
    Ok(search.into_result(method))
}

/// Maximum of `Σ w_e` over all matchings.
pub fn opt_edge_weighted<W: Weight>(
    inst: &Instance<W>,
    config: &OracleConfig,
) -> Result<OracleResult<W>, OracleError> {
    let graph = inst.index()?;
    graph.require_mode(WeightMode::Edge)?;
    let weights = inst.edges.iter().map(|e| e.weight.unwrap_or_else(W::zero)).collect();
    solve(&graph, weights, config)
}

/// The edge-weighted instance with `w(j, i) = w_j + w_i`.
pub fn reduce_to_edge_weighted<W: Weight>(inst: &Instance<W>) -> Result<Instance<W>, OracleError> {
    let graph = inst.index()?;
    graph.require_mode(WeightMode::Vertex)?;
    Ok(Instance {
        n: inst.n,
        d: inst.d,
        mode: WeightMode::Edge,
        vertex_weights: None,
        edges: inst
            .edges
            .iter()
            .map(|e| Edge {
                origin: e.origin,
                terminal: e.terminal,
                weight: Some(graph.vertex_weight(e.origin) + graph.vertex_weight(e.terminal)),
            })
            .collect(),
    })
}

/// Maximum of `Σ (w_u + w_v)` over all matchings, by reduction.
pub fn opt_vertex_weighted<W: Weight>(
    inst: &Instance<W>,
    config: &OracleConfig,
) -> Result<OracleResult<W>, OracleError> {
    opt_edge_weighted(&reduce_to_edge_weighted(inst)?, config)
}

/// Optimum under the instance's own objective.
pub fn opt<W: Weight>(inst: &Instance<W>, config: &OracleConfig) -> Result<OracleResult<W>, OracleError> {
    match inst.mode {
        WeightMode::Edge => opt_edge_weighted(inst, config),
        WeightMode::Vertex => opt_vertex_weighted(inst, config),
    }
}

/// Every matching of an instance, as ascending lists of edge indices, in
/// lexicographic order starting with the empty matching.
#[derive(Clone, Debug)]
pub struct Matchings {
    ends: Vec<(VertexId, VertexId)>,
    used: Vec<bool>,
    chosen: Vec<usize>,
    started: bool,
    done: bool,
}

impl Matchings {
    fn fits(&self, idx: usize) -> bool {
        let (a, b) = self.ends[idx];
        !self.used[a] && !self.used[b]
    }

    fn take(&mut self, idx: usize) {
        let (a, b) = self.ends[idx];
        self.used[a] = true;
        self.used[b] = true;
        self.chosen.push(idx);
    }

    fn drop_last(&mut self) -> Option<usize> {
        let idx = self.chosen.pop()?;
        let (a, b) = self.ends[idx];
        self.used[a] = false;
        self.used[b] = false;
        Some(idx)
    }

    fn first_fit_after(&self, after: Option<usize>) -> Option<usize> {
        let start = after.map_or(0, |a| a + 1);
        (start..self.ends.len()).find(|&k| self.fits(k))
    }
}

impl Iterator for Matchings {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(Vec::new());
        }
        // Extend by the first compatible edge after the last one chosen,
        // otherwise backtrack and advance.
        if let Some(k) = self.first_fit_after(self.chosen.last().copied()) {
            self.take(k);
            return Some(self.chosen.clone());
        }
        while let Some(last) = self.drop_last() {
            if let Some(k) = self.first_fit_after(Some(last)) {
                self.take(k);
                return Some(self.chosen.clone());
            }
        }
        self.done = true;
        None
    }
}

pub fn enumerate_matchings<W: Weight>(inst: &Instance<W>) -> Result<Matchings, OracleError> {
    enumerate_matchings_capped(inst, ENUMERATION_CAP)
}

pub fn enumerate_matchings_capped<W: Weight>(inst: &Instance<W>, cap: usize) -> Result<Matchings, OracleError> {
    inst.index()?;
    if inst.edges.len() > cap {
        return Err(OracleError::CapExceeded {
            edges: inst.edges.len(),
            cap,
        });
    }
    Ok(Matchings {
        ends: inst.edges.iter().map(|e| (e.origin, e.terminal)).collect(),
        used: vec![false; inst.n + 1],
        chosen: Vec::new(),
        started: false,
        done: false,
    })
}
