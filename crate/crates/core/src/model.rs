//! Instance model, arrival stream, matching structures and their validators.
//!
//! Vertices are numbered `1..=n` in arrival order and vertex `t` arrives at
//! time step `t`. A directed edge `(origin, terminal)` always points backwards
//! in time: `terminal < origin <= terminal + d`. Any pick of an edge must
//! happen no later than `terminal + d`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::{total, Weight};

pub type VertexId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Edge,
    Vertex,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightMode::Edge => f.write_str("edge"),
            WeightMode::Vertex => f.write_str("vertex"),
        }
    }
}

/// A directed edge. `weight` is present exactly in edge mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge<W> {
    pub origin: VertexId,
    pub terminal: VertexId,
    pub weight: Option<W>,
}

/// An OWNBM instance as plain data.
///
/// Construction never fails; call [`Instance::validate`] for a report or
/// [`Instance::index`] to obtain a checked, indexed view.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<W = f64> {
    pub n: usize,
    pub d: usize,
    pub mode: WeightMode,
    pub vertex_weights: Option<Vec<W>>,
    pub edges: Vec<Edge<W>>,
}

impl<W: Weight> Instance<W> {
    pub fn edge_weighted(
        n: usize,
        d: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId, W)>,
    ) -> Self {
        Instance {
            n,
            d,
            mode: WeightMode::Edge,
            vertex_weights: None,
            edges: edges
                .into_iter()
                .map(|(origin, terminal, w)| Edge {
                    origin,
                    terminal,
                    weight: Some(w),
                })
                .collect(),
        }
    }

    pub fn vertex_weighted(
        n: usize,
        d: usize,
        weights: Vec<W>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Self {
        Instance {
            n,
            d,
            mode: WeightMode::Vertex,
            vertex_weights: Some(weights),
            edges: edges
                .into_iter()
                .map(|(origin, terminal)| Edge {
                    origin,
                    terminal,
                    weight: None,
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_instance(self)
    }

    /// Validates and builds adjacency lists.
    pub fn index(&self) -> Result<WindowedGraph<'_, W>, ModelError> {
        WindowedGraph::new(self)
    }

    /// Converts every weight through `f64`. Returns `None` if a weight has no
    /// representation in the target type.
    pub fn cast<V: Weight>(&self) -> Option<Instance<V>> {
        let conv = |w: W| V::from_f64(w.as_f64());
        let vertex_weights = match &self.vertex_weights {
            Some(ws) => Some(ws.iter().map(|&w| conv(w)).collect::<Option<Vec<_>>>()?),
            None => None,
        };
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let weight = match e.weight {
                    Some(w) => Some(conv(w)?),
                    None => None,
                };
                Some(Edge {
                    origin: e.origin,
                    terminal: e.terminal,
                    weight,
                })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Instance {
            n: self.n,
            d: self.d,
            mode: self.mode,
            vertex_weights,
            edges,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid instance:\n{0}")]
    Invalid(ValidationReport),
    #[error("expected a {expected}-weighted instance, found {found}-weighted")]
    ModeMismatch {
        expected: WeightMode,
        found: WeightMode,
    },
    #[error("cannot measure a {structure} on a {mode}-weighted instance")]
    MeasureMismatch {
        structure: &'static str,
        mode: WeightMode,
    },
    #[error("({origin},{terminal}) is not an edge of the instance")]
    NotAnEdge { origin: VertexId, terminal: VertexId },
    #[error("vertex {0} is out of range")]
    UnknownVertex(VertexId),
}

/// One invariant violation. Violations are data, not failures.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("vertex count must be positive")]
    NoVertices,
    #[error("edge ({origin},{terminal}): vertex id out of range 1..={n}")]
    VertexOutOfRange {
        origin: VertexId,
        terminal: VertexId,
        n: usize,
    },
    #[error("edge ({origin},{terminal}): origin must exceed terminal")]
    Orientation { origin: VertexId, terminal: VertexId },
    #[error("edge ({origin},{terminal}): window: gap {gap} > d={d}")]
    Window {
        origin: VertexId,
        terminal: VertexId,
        gap: usize,
        d: usize,
    },
    #[error("edge ({origin},{terminal}): duplicate edge")]
    DuplicateEdge { origin: VertexId, terminal: VertexId },
    #[error("{what}: weight {value} is not a finite non-negative number")]
    BadWeight { what: String, value: String },
    #[error("edge ({origin},{terminal}): missing weight in edge mode")]
    MissingEdgeWeight { origin: VertexId, terminal: VertexId },
    #[error("edge ({origin},{terminal}): weight given in vertex mode")]
    UnexpectedEdgeWeight { origin: VertexId, terminal: VertexId },
    #[error("vertex mode requires vertex_weights")]
    MissingVertexWeights,
    #[error("vertex_weights given in edge mode")]
    UnexpectedVertexWeights,
    #[error("expected {expected} vertex weights, found {found}")]
    VertexWeightCount { expected: usize, found: usize },

    #[error("({origin},{terminal}) is not an edge of the instance")]
    NotAnEdge { origin: VertexId, terminal: VertexId },
    #[error("vertex {vertex} is the origin of two entries")]
    DuplicateOrigin { vertex: VertexId },
    #[error("vertex {vertex} is the terminal of two entries")]
    DuplicateTerminal { vertex: VertexId },
    #[error("vertex {vertex} incident twice")]
    VertexReused { vertex: VertexId },
    #[error("({origin},{terminal}) picked at {time}, after deadline {deadline}")]
    PickAfterDeadline {
        origin: VertexId,
        terminal: VertexId,
        time: usize,
        deadline: usize,
    },
    #[error("({origin},{terminal}) picked at {time}, before its origin arrived")]
    PickBeforeReveal {
        origin: VertexId,
        terminal: VertexId,
        time: usize,
    },
    #[error("set {set}: size {size}, must be 2 or 3")]
    SetSize { set: usize, size: usize },
    #[error("set {set}: vertex {vertex} out of range or repeated")]
    BadMember { set: usize, vertex: VertexId },
    #[error("vertex {vertex} belongs to more than one set")]
    SetsOverlap { vertex: VertexId },
    #[error("set {set}: 2-set is not an edge")]
    PairNotEdge { set: usize },
    #[error("set {set}: 3-set needs ≥2 induced edges, has {induced}")]
    TripleUnderConnected { set: usize, induced: usize },
    #[error("({origin},{terminal}) deleted at {time}, after deadline {deadline}")]
    DeletionAfterDeadline {
        origin: VertexId,
        terminal: VertexId,
        time: usize,
        deadline: usize,
    },
    #[error("event log: {0}")]
    EventLog(String),
}

/// A violation together with the position of the offending item (edge index
/// for instances, entry index for structures) when there is one.
#[derive(Clone, Debug, PartialEq)]
pub struct Finding {
    pub position: Option<usize>,
    pub violation: Violation,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn violations(&self) -> impl Iterator<Item = &Violation> {
        self.findings.iter().map(|f| &f.violation)
    }

    fn push(&mut self, position: Option<usize>, violation: Violation) {
        self.findings.push(Finding {
            position,
            violation,
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.findings.extend(other.findings);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (k, finding) in self.findings.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", finding.violation)?;
        }
        Ok(())
    }
}

fn check_weight<W: Weight>(report: &mut ValidationReport, pos: Option<usize>, what: String, w: W) {
    if !w.is_admissible() {
        report.push(
            pos,
            Violation::BadWeight {
                what,
                value: w.to_string(),
            },
        );
    }
}

/// Reports every violated instance invariant.
pub fn validate_instance<W: Weight>(inst: &Instance<W>) -> ValidationReport {
    let mut report = ValidationReport::default();
    if inst.n == 0 {
        report.push(None, Violation::NoVertices);
    }
    match (inst.mode, &inst.vertex_weights) {
        (WeightMode::Vertex, None) => report.push(None, Violation::MissingVertexWeights),
        (WeightMode::Edge, Some(_)) => report.push(None, Violation::UnexpectedVertexWeights),
        (WeightMode::Vertex, Some(ws)) => {
            if ws.len() != inst.n {
                report.push(
                    None,
                    Violation::VertexWeightCount {
                        expected: inst.n,
                        found: ws.len(),
                    },
                );
            }
            for (k, &w) in ws.iter().enumerate() {
                check_weight(&mut report, None, format!("vertex {}", k + 1), w);
            }
        }
        (WeightMode::Edge, None) => {}
    }

    let mut seen = HashSet::new();
    for (idx, e) in inst.edges.iter().enumerate() {
        let pos = Some(idx);
        let (j, i) = (e.origin, e.terminal);
        if j == 0 || i == 0 || j > inst.n || i > inst.n {
            report.push(
                pos,
                Violation::VertexOutOfRange {
                    origin: j,
                    terminal: i,
                    n: inst.n,
                },
            );
        }
        if j <= i {
            report.push(pos, Violation::Orientation { origin: j, terminal: i });
        } else if j - i > inst.d {
            report.push(
                pos,
                Violation::Window {
                    origin: j,
                    terminal: i,
                    gap: j - i,
                    d: inst.d,
                },
            );
        }
        if !seen.insert((j, i)) {
            report.push(pos, Violation::DuplicateEdge { origin: j, terminal: i });
        }
        match (inst.mode, e.weight) {
            (WeightMode::Edge, None) => {
                report.push(pos, Violation::MissingEdgeWeight { origin: j, terminal: i })
            }
            (WeightMode::Vertex, Some(_)) => {
                report.push(pos, Violation::UnexpectedEdgeWeight { origin: j, terminal: i })
            }
            (WeightMode::Edge, Some(w)) => {
                check_weight(&mut report, pos, format!("edge ({j},{i})"), w)
            }
            (WeightMode::Vertex, None) => {}
        }
    }
    report
}

/// A validated instance with adjacency lists in both directions.
///
/// Neighbour lists are sorted by vertex id, so iterating them visits
/// candidates in tie-break order.
#[derive(Clone, Debug)]
pub struct WindowedGraph<'a, W = f64> {
    inst: &'a Instance<W>,
    outgoing: Vec<Vec<(VertexId, usize)>>,
    incoming: Vec<Vec<(VertexId, usize)>>,
}

impl<'a, W: Weight> WindowedGraph<'a, W> {
    pub fn new(inst: &'a Instance<W>) -> Result<Self, ModelError> {
        let report = validate_instance(inst);
        if !report.is_ok() {
            return Err(ModelError::Invalid(report));
        }
        let mut outgoing = vec![Vec::new(); inst.n + 1];
        let mut incoming = vec![Vec::new(); inst.n + 1];
        for (idx, e) in inst.edges.iter().enumerate() {
            outgoing[e.origin].push((e.terminal, idx));
            incoming[e.terminal].push((e.origin, idx));
        }
        for list in outgoing.iter_mut().chain(incoming.iter_mut()) {
            list.sort_unstable();
        }
        Ok(WindowedGraph {
            inst,
            outgoing,
            incoming,
        })
    }

    pub fn instance(&self) -> &'a Instance<W> {
        self.inst
    }

    pub fn n(&self) -> usize {
        self.inst.n
    }

    pub fn d(&self) -> usize {
        self.inst.d
    }

    pub fn mode(&self) -> WeightMode {
        self.inst.mode
    }

    pub fn require_mode(&self, expected: WeightMode) -> Result<(), ModelError> {
        if self.mode() == expected {
            Ok(())
        } else {
            Err(ModelError::ModeMismatch {
                expected,
                found: self.mode(),
            })
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        (1..=self.n()).contains(&v)
    }

    /// Terminals of edges leaving `origin`, ascending, with edge indices.
    pub fn out_edges(&self, origin: VertexId) -> &[(VertexId, usize)] {
        self.outgoing.get(origin).map_or(&[], Vec::as_slice)
    }

    /// Origins of edges entering `terminal`, ascending, with edge indices.
    pub fn in_edges(&self, terminal: VertexId) -> &[(VertexId, usize)] {
        self.incoming.get(terminal).map_or(&[], Vec::as_slice)
    }

    pub fn edge_index(&self, origin: VertexId, terminal: VertexId) -> Option<usize> {
        self.out_edges(origin)
            .iter()
            .find(|&&(t, _)| t == terminal)
            .map(|&(_, idx)| idx)
    }

    pub fn has_edge(&self, origin: VertexId, terminal: VertexId) -> bool {
        self.edge_index(origin, terminal).is_some()
    }

    /// Whether `u` and `v` are adjacent in either orientation.
    pub fn adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.has_edge(u.max(v), u.min(v))
    }

    /// Weight of `(origin, terminal)` in edge mode.
    pub fn edge_weight(&self, origin: VertexId, terminal: VertexId) -> Option<W> {
        self.edge_index(origin, terminal)
            .and_then(|idx| self.inst.edges[idx].weight)
    }

    /// Weight of `v` in vertex mode; zero in edge mode or out of range.
    pub fn vertex_weight(&self, v: VertexId) -> W {
        match &self.inst.vertex_weights {
            Some(ws) if v >= 1 && v <= ws.len() => ws[v - 1],
            _ => W::zero(),
        }
    }
}

/// Everything revealed when a vertex arrives.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrivalEvent<W> {
    pub time: usize,
    pub vertex: VertexId,
    pub revealed: Vec<Edge<W>>,
    pub vertex_weight: Option<W>,
}

/// The arrival sequence of a valid instance, one event per time step.
pub fn stream<W: Weight>(inst: &Instance<W>) -> Result<Vec<ArrivalEvent<W>>, ModelError> {
    let graph = inst.index()?;
    Ok((1..=inst.n)
        .map(|t| ArrivalEvent {
            time: t,
            vertex: t,
            revealed: graph
                .out_edges(t)
                .iter()
                .map(|&(_, idx)| inst.edges[idx])
                .collect(),
            vertex_weight: inst.vertex_weights.as_ref().map(|ws| ws[t - 1]),
        })
        .collect())
}

/// An edge committed at time step `time`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pick {
    pub origin: VertexId,
    pub terminal: VertexId,
    pub time: usize,
}

impl Pick {
    pub fn new(origin: VertexId, terminal: VertexId, time: usize) -> Self {
        Pick {
            origin,
            terminal,
            time,
        }
    }
}

/// At most one outgoing and at most one incoming entry per vertex.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiMatching {
    pub entries: Vec<Pick>,
}

impl SemiMatching {
    pub fn incoming(&self, terminal: VertexId) -> Option<&Pick> {
        self.entries.iter().find(|p| p.terminal == terminal)
    }

    pub fn outgoing(&self, origin: VertexId) -> Option<&Pick> {
        self.entries.iter().find(|p| p.origin == origin)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Every vertex appears in at most one entry.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Matching {
    pub entries: Vec<Pick>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThreeMatchAction {
    CreatePair,
    ExtendToTriple,
    DeleteEdgeAndRepair,
}

/// One step of the online 3-matching construction. `origin`/`terminal` name
/// the edge being added to (or deleted from) set `set`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeMatchEvent {
    pub time: usize,
    pub action: ThreeMatchAction,
    pub set: usize,
    pub origin: VertexId,
    pub terminal: VertexId,
}

/// Disjoint 2- and 3-sets. `sets[k]` is the final content of set id `k`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeMatching {
    pub sets: Vec<Vec<VertexId>>,
    pub events: Vec<ThreeMatchEvent>,
}

fn validate_picks<W: Weight>(
    graph: &WindowedGraph<'_, W>,
    picks: &[Pick],
    report: &mut ValidationReport,
) {
    for (k, p) in picks.iter().enumerate() {
        if !graph.has_edge(p.origin, p.terminal) {
            report.push(
                Some(k),
                Violation::NotAnEdge {
                    origin: p.origin,
                    terminal: p.terminal,
                },
            );
            continue;
        }
        let deadline = p.terminal + graph.d();
        if p.time > deadline {
            report.push(
                Some(k),
                Violation::PickAfterDeadline {
                    origin: p.origin,
                    terminal: p.terminal,
                    time: p.time,
                    deadline,
                },
            );
        }
        if p.time < p.origin {
            report.push(
                Some(k),
                Violation::PickBeforeReveal {
                    origin: p.origin,
                    terminal: p.terminal,
                    time: p.time,
                },
            );
        }
    }
}

pub fn validate_semi_matching<W: Weight>(
    graph: &WindowedGraph<'_, W>,
    semi: &SemiMatching,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    validate_picks(graph, &semi.entries, &mut report);
    let mut origins = HashSet::new();
    let mut terminals = HashSet::new();
    for (k, p) in semi.entries.iter().enumerate() {
        if !origins.insert(p.origin) {
            report.push(Some(k), Violation::DuplicateOrigin { vertex: p.origin });
        }
        if !terminals.insert(p.terminal) {
            report.push(Some(k), Violation::DuplicateTerminal { vertex: p.terminal });
        }
    }
    report
}

pub fn validate_matching<W: Weight>(
    graph: &WindowedGraph<'_, W>,
    matching: &Matching,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    validate_picks(graph, &matching.entries, &mut report);
    let mut used = HashSet::new();
    for (k, p) in matching.entries.iter().enumerate() {
        for v in [p.origin, p.terminal] {
            if !used.insert(v) {
                report.push(Some(k), Violation::VertexReused { vertex: v });
            }
        }
    }
    report
}

fn induced_edges<W: Weight>(graph: &WindowedGraph<'_, W>, set: &[VertexId]) -> usize {
    let mut count = 0;
    for (a, &u) in set.iter().enumerate() {
        for &v in &set[a + 1..] {
            if graph.adjacent(u, v) {
                count += 1;
            }
        }
    }
    count
}

/// Checks the final sets and replays the event log: the replay must rebuild
/// exactly the final sets, every intermediate pair must be an edge, every
/// addition must meet the pick deadline of its edge and every deletion of
/// `(j, x)` must happen no later than `j + d`.
pub fn validate_three_matching<W: Weight>(
    graph: &WindowedGraph<'_, W>,
    three: &ThreeMatching,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let d = graph.d();

    let mut owner: Vec<Option<usize>> = vec![None; graph.n() + 1];
    for (s, set) in three.sets.iter().enumerate() {
        if set.len() != 2 && set.len() != 3 {
            report.push(Some(s), Violation::SetSize { set: s, size: set.len() });
        }
        let mut local = HashSet::new();
        for &v in set {
            if !graph.contains(v) || !local.insert(v) {
                report.push(Some(s), Violation::BadMember { set: s, vertex: v });
                continue;
            }
            if owner[v].is_some() {
                report.push(Some(s), Violation::SetsOverlap { vertex: v });
            }
            owner[v] = Some(s);
        }
        match set.len() {
            2 if !graph.adjacent(set[0], set[1]) => {
                report.push(Some(s), Violation::PairNotEdge { set: s })
            }
            3 => {
                let induced = induced_edges(graph, set);
                if induced < 2 {
                    report.push(Some(s), Violation::TripleUnderConnected { set: s, induced });
                }
            }
            _ => {}
        }
    }

    // Replay.
    let mut replay: Vec<BTreeSet<VertexId>> = Vec::new();
    let mut placed: Vec<Option<usize>> = vec![None; graph.n() + 1];
    let mut last_time = 0;
    for (k, ev) in three.events.iter().enumerate() {
        let pos = Some(k);
        let (j, i) = (ev.origin, ev.terminal);
        if ev.time < last_time {
            report.push(pos, Violation::EventLog(format!("event {k} goes back in time")));
        }
        last_time = ev.time;
        if !graph.has_edge(j, i) {
            report.push(pos, Violation::NotAnEdge { origin: j, terminal: i });
            continue;
        }
        match ev.action {
            ThreeMatchAction::CreatePair | ThreeMatchAction::ExtendToTriple => {
                let deadline = i + d;
                if ev.time > deadline {
                    report.push(
                        pos,
                        Violation::PickAfterDeadline {
                            origin: j,
                            terminal: i,
                            time: ev.time,
                            deadline,
                        },
                    );
                }
                if ev.time < j {
                    report.push(
                        pos,
                        Violation::PickBeforeReveal {
                            origin: j,
                            terminal: i,
                            time: ev.time,
                        },
                    );
                }
            }
            ThreeMatchAction::DeleteEdgeAndRepair => {
                let deadline = j + d;
                if ev.time > deadline {
                    report.push(
                        pos,
                        Violation::DeletionAfterDeadline {
                            origin: j,
                            terminal: i,
                            time: ev.time,
                            deadline,
                        },
                    );
                }
            }
        }
        match ev.action {
            ThreeMatchAction::CreatePair => {
                if ev.set != replay.len() {
                    report.push(
                        pos,
                        Violation::EventLog(format!("event {k}: new set must take id {}", replay.len())),
                    );
                    continue;
                }
                if placed[j].is_some() || placed[i].is_some() {
                    report.push(
                        pos,
                        Violation::EventLog(format!("event {k}: pair ({j},{i}) reuses a placed vertex")),
                    );
                    continue;
                }
                placed[j] = Some(ev.set);
                placed[i] = Some(ev.set);
                replay.push([j, i].into_iter().collect());
            }
            ThreeMatchAction::ExtendToTriple => {
                let ok = replay.get(ev.set).is_some_and(|s| s.len() == 2 && s.contains(&i))
                    && placed[j].is_none();
                if !ok {
                    report.push(
                        pos,
                        Violation::EventLog(format!("event {k}: cannot extend set {} with ({j},{i})", ev.set)),
                    );
                    continue;
                }
                placed[j] = Some(ev.set);
                replay[ev.set].insert(j);
            }
            ThreeMatchAction::DeleteEdgeAndRepair => {
                let ok = replay
                    .get(ev.set)
                    .is_some_and(|s| s.len() == 3 && s.contains(&i) && s.contains(&j));
                if !ok {
                    report.push(
                        pos,
                        Violation::EventLog(format!("event {k}: cannot delete ({j},{i}) from set {}", ev.set)),
                    );
                    continue;
                }
                placed[j] = None;
                let set = &mut replay[ev.set];
                set.remove(&j);
                let rest: Vec<_> = set.iter().copied().collect();
                if !graph.adjacent(rest[0], rest[1]) {
                    report.push(
                        pos,
                        Violation::EventLog(format!("event {k}: residual pair of set {} is not an edge", ev.set)),
                    );
                }
            }
        }
    }
    let finals: Vec<BTreeSet<VertexId>> = three
        .sets
        .iter()
        .map(|s| s.iter().copied().collect())
        .collect();
    if finals != replay {
        report.push(
            None,
            Violation::EventLog("replaying the events does not reproduce the final sets".into()),
        );
    }
    report
}

/// A structure whose weight can be measured.
#[derive(Clone, Copy, Debug)]
pub enum Structure<'s> {
    SemiMatching(&'s SemiMatching),
    Matching(&'s Matching),
    ThreeMatching(&'s ThreeMatching),
}

/// Weight of a structure under the instance's objective.
///
/// Edge mode sums edge weights of a matching or semi-matching. Vertex mode
/// sums `w_u + w_v` over a matching, or every member vertex of a 3-matching.
pub fn measure<W: Weight>(graph: &WindowedGraph<'_, W>, structure: Structure<'_>) -> Result<W, ModelError> {
    let edge_sum = |picks: &[Pick]| -> Result<W, ModelError> {
        picks.iter().try_fold(W::zero(), |acc, p| {
            graph
                .edge_weight(p.origin, p.terminal)
                .map(|w| acc + w)
                .ok_or(ModelError::NotAnEdge {
                    origin: p.origin,
                    terminal: p.terminal,
                })
        })
    };
    match (graph.mode(), structure) {
        (WeightMode::Edge, Structure::Matching(m)) => edge_sum(&m.entries),
        (WeightMode::Edge, Structure::SemiMatching(s)) => edge_sum(&s.entries),
        (WeightMode::Vertex, Structure::Matching(m)) => m.entries.iter().try_fold(W::zero(), |acc, p| {
            if !graph.has_edge(p.origin, p.terminal) {
                return Err(ModelError::NotAnEdge {
                    origin: p.origin,
                    terminal: p.terminal,
                });
            }
            Ok(acc + graph.vertex_weight(p.origin) + graph.vertex_weight(p.terminal))
        }),
        (WeightMode::Vertex, Structure::ThreeMatching(t)) => {
            for &v in t.sets.iter().flatten() {
                if !graph.contains(v) {
                    return Err(ModelError::UnknownVertex(v));
                }
            }
            Ok(total(t.sets.iter().flatten().map(|&v| graph.vertex_weight(v))))
        }
        (mode, Structure::ThreeMatching(_)) => Err(ModelError::MeasureMismatch {
            structure: "3-matching",
            mode,
        }),
        (mode, Structure::SemiMatching(_)) => Err(ModelError::MeasureMismatch {
            structure: "semi-matching",
            mode,
        }),
    }
}
