//! Reduction of a packet-erasure relay network and a cut `(A, W_A)` to a
//! multi-input broadcast channel whose outer bound constrains the rates of
//! the destinations inside `A`.
//!
//! Stages: [`build_star_sets`] deletes cut-side nodes fed only by `W_A` (or
//! not fed at all) until nothing changes, [`components`] merges the
//! survivors into super nodes, and [`split_transmitters`] turns every
//! transmitter on the cut into at most two subchannels.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundOptions, WeightVector, WeightedBound};
use crate::erasure::{ChannelSpec, ErasureModel, MultiInputPEC, ProbText, HARD_MAX_DESTINATIONS};
use crate::error::{Error, Result};
use crate::lp::{total_rate, ConstraintSystem, Row};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Source,
    Relay,
    Dest,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dest_index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub eps: ProbText,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub eps: Rational,
}

/// Directed erasure graph with one source and indexed destinations. Node
/// indices follow declaration order.
#[derive(Clone, Debug, PartialEq)]
pub struct RelayGraph {
    ids: Vec<String>,
    kinds: Vec<NodeKind>,
    dest_index: Vec<Option<usize>>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
}

impl RelayGraph {
    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let mut index = HashMap::new();
        let mut dests = BTreeSet::new();
        let mut sources = 0;
        for (n, node) in spec.nodes.iter().enumerate() {
            if index.insert(node.id.clone(), n).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate node id {:?}", node.id)));
            }
            match (node.kind, node.dest_index) {
                (NodeKind::Dest, Some(j)) if j >= 1 => {
                    if !dests.insert(j) {
                        return Err(Error::InvalidGraph(format!("destination index {j} used twice")));
                    }
                }
                (NodeKind::Dest, _) => {
                    return Err(Error::InvalidGraph(format!("destination {:?} needs a dest_index >= 1", node.id)))
                }
                (_, Some(_)) => {
                    return Err(Error::InvalidGraph(format!("only destinations carry a dest_index ({:?})", node.id)))
                }
                (NodeKind::Source, None) => sources += 1,
                (NodeKind::Relay, None) => {}
            }
        }
        if sources != 1 {
            return Err(Error::InvalidGraph(format!("expected exactly one source, found {sources}")));
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::InvalidGraph(format!("edge references unknown node {id:?}")))
        };
        let mut edges = Vec::with_capacity(spec.edges.len());
        let mut seen = BTreeSet::new();
        for e in &spec.edges {
            let (from, to) = (lookup(&e.from)?, lookup(&e.to)?);
            if from == to {
                return Err(Error::InvalidGraph(format!("self-loop on {:?}", e.from)));
            }
            if !seen.insert((from, to)) {
                return Err(Error::InvalidGraph(format!("duplicate edge {:?} -> {:?}", e.from, e.to)));
            }
            rational::check_probability(&e.eps.0)?;
            edges.push(Edge { from, to, eps: e.eps.0.clone() });
        }
        Ok(RelayGraph {
            ids: spec.nodes.iter().map(|n| n.id.clone()).collect(),
            kinds: spec.nodes.iter().map(|n| n.kind).collect(),
            dest_index: spec.nodes.iter().map(|n| n.dest_index).collect(),
            edges,
            index,
        })
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            nodes: (0..self.ids.len())
                .map(|n| NodeSpec { id: self.ids[n].clone(), kind: self.kinds[n], dest_index: self.dest_index[n] })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    from: self.ids[e.from].clone(),
                    to: self.ids[e.to].clone(),
                    eps: ProbText(e.eps.clone()),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GraphSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        RelayGraph::from_spec(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("graph spec serializes")
    }

    /// Two-relay network whose cut `A = {t1, t2, r_d}`, `W_A = {r_b}`
    /// reduces to [`MultiInputPEC::xor_example`].
    pub fn two_relay_example(eps1: Rational, eps2: Rational) -> Result<Self> {
        let node = |id: &str, kind, dest_index| NodeSpec { id: id.into(), kind, dest_index };
        let edge = |from: &str, to: &str, eps: &Rational| EdgeSpec { from: from.into(), to: to.into(), eps: ProbText(eps.clone()) };
        let zero = rational::int(0);
        RelayGraph::from_spec(&GraphSpec {
            nodes: vec![
                node("s", NodeKind::Source, None),
                node("r_c", NodeKind::Relay, None),
                node("r_b", NodeKind::Relay, None),
                node("r_d", NodeKind::Relay, None),
                node("t1", NodeKind::Dest, Some(1)),
                node("t2", NodeKind::Dest, Some(2)),
            ],
            edges: vec![
                edge("s", "r_c", &zero),
                edge("s", "r_b", &zero),
                edge("r_c", "t1", &eps1),
                edge("r_c", "t2", &eps1),
                edge("r_b", "r_d", &eps2),
                edge("r_d", "t1", &zero),
                edge("r_d", "t2", &zero),
            ],
        })
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn id(&self, n: usize) -> &str {
        &self.ids[n]
    }

    pub fn node(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn dest_index(&self, n: usize) -> Option<usize> {
        self.dest_index[n]
    }

    fn source(&self) -> usize {
        self.kinds.iter().position(|k| *k == NodeKind::Source).expect("validated")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutFile {
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "W_A")]
    pub w_a: Vec<String>,
}

/// A validated cut: `A` excludes the source and `W_A ⊆ V_A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutSpec {
    a: BTreeSet<usize>,
    w_a: BTreeSet<usize>,
}

impl CutSpec {
    pub fn new(graph: &RelayGraph, a: &[&str], w_a: &[&str]) -> Result<Self> {
        let resolve = |ids: &[&str]| -> Result<BTreeSet<usize>> {
            ids.iter()
                .map(|id| graph.node(id).ok_or_else(|| Error::InvalidCut(format!("unknown node {id:?}"))))
                .collect()
        };
        let a = resolve(a)?;
        let w_a = resolve(w_a)?;
        if a.contains(&graph.source()) {
            return Err(Error::InvalidCut("the source cannot be inside A".into()));
        }
        let cut = CutSpec { a, w_a };
        let v_a = cut.frontier(graph);
        if let Some(&w) = cut.w_a.iter().find(|w| !v_a.contains(w)) {
            return Err(Error::InvalidCut(format!("W_A member {:?} has no edge into A", graph.id(w))));
        }
        Ok(cut)
    }

    pub fn from_file(graph: &RelayGraph, file: &CutFile) -> Result<Self> {
        let a: Vec<&str> = file.a.iter().map(String::as_str).collect();
        let w: Vec<&str> = file.w_a.iter().map(String::as_str).collect();
        CutSpec::new(graph, &a, &w)
    }

    pub fn from_json(graph: &RelayGraph, text: &str) -> Result<Self> {
        let file: CutFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        CutSpec::from_file(graph, &file)
    }

    pub fn contains(&self, n: usize) -> bool {
        self.a.contains(&n)
    }

    /// Edge indices of `E_A`: edges entering `A` from outside.
    pub fn cut_edges(&self, graph: &RelayGraph) -> Vec<usize> {
        (0..graph.edges.len())
            .filter(|&e| !self.a.contains(&graph.edges[e].from) && self.a.contains(&graph.edges[e].to))
            .collect()
    }

    /// `V_A`: tails of the cut edges.
    pub fn frontier(&self, graph: &RelayGraph) -> BTreeSet<usize> {
        self.cut_edges(graph).into_iter().map(|e| graph.edges[e].from).collect()
    }

    /// Destination indices inside `A`.
    pub fn destinations(&self, graph: &RelayGraph) -> BTreeSet<usize> {
        self.a.iter().filter_map(|&n| graph.dest_index[n]).collect()
    }
}

/// Output of the deletion stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarSets {
    /// Edge indices moved into `E*`.
    pub e_star: BTreeSet<usize>,
    /// Destination nodes deleted along the way, in deletion order.
    pub v_star: Vec<usize>,
    /// Cut-side nodes that were never deleted.
    pub survivors: BTreeSet<usize>,
}

/// Repeats two deletion rules on the nodes of `A` until neither applies:
/// a node whose incoming edges all come from `W_A` moves those edges into
/// `E*`; a node with no incoming edges is dropped. Deleted destinations are
/// recorded in `V*`. Nodes are visited in declaration order.
pub fn build_star_sets(graph: &RelayGraph, cut: &CutSpec) -> StarSets {
    let mut alive_edges: BTreeSet<usize> = (0..graph.edges.len()).collect();
    let mut survivors = cut.a.clone();
    let mut e_star = BTreeSet::new();
    let mut v_star = Vec::new();
    loop {
        let mut changed = false;
        for w in survivors.clone() {
            let incoming: Vec<usize> = alive_edges.iter().copied().filter(|&e| graph.edges[e].to == w).collect();
            let fed_by_w_a = !incoming.is_empty() && incoming.iter().all(|&e| cut.w_a.contains(&graph.edges[e].from));
            if !(fed_by_w_a || incoming.is_empty()) {
                continue;
            }
            e_star.extend(incoming.iter().copied());
            if graph.dest_index[w].is_some() {
                v_star.push(w);
            }
            survivors.remove(&w);
            alive_edges.retain(|&e| graph.edges[e].from != w && graph.edges[e].to != w);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    StarSets { e_star, v_star, survivors }
}

/// A merged connected component of surviving nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperNode {
    pub nodes: Vec<usize>,
    /// `J_i`: destination indices inside the component.
    pub destinations: Vec<usize>,
}

/// Undirected connected components of the survivors, ordered by their
/// first node; components without a destination are dropped.
pub fn components(graph: &RelayGraph, survivors: &BTreeSet<usize>) -> Vec<SuperNode> {
    let mut parent: BTreeMap<usize, usize> = survivors.iter().map(|&n| (n, n)).collect();
    fn root(parent: &mut BTreeMap<usize, usize>, mut n: usize) -> usize {
        while parent[&n] != n {
            let up = parent[&parent[&n]];
            parent.insert(n, up);
            n = up;
        }
        n
    }
    for e in &graph.edges {
        if survivors.contains(&e.from) && survivors.contains(&e.to) {
            let (a, b) = (root(&mut parent, e.from), root(&mut parent, e.to));
            if a != b {
                parent.insert(a.max(b), a.min(b));
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &n in survivors {
        let r = root(&mut parent, n);
        groups.entry(r).or_default().push(n);
    }
    groups
        .into_values()
        .filter_map(|nodes| {
            let mut destinations: Vec<usize> = nodes.iter().filter_map(|&n| graph.dest_index[n]).collect();
            destinations.sort_unstable();
            (!destinations.is_empty()).then_some(SuperNode { nodes, destinations })
        })
        .collect()
}

/// Which half of a split transmitter a subchannel came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitPart {
    /// Fully correlated links built from the transmitter's `E*` edges.
    V1,
    /// Independent links to super nodes built from the remaining cut edges.
    V2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitRecord {
    pub node: usize,
    pub part: SplitPart,
    /// 1-based subchannel index in the reduced channel.
    pub subchannel: usize,
    /// Original edges whose erasure probabilities multiply into each link,
    /// one list per sink.
    pub provenance: Vec<Vec<usize>>,
}

/// One sink of the reduced channel with the destinations it stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMapping {
    pub destinations: Vec<usize>,
    pub nodes: Vec<usize>,
}

impl QMapping {
    /// `"R1"` or `"R1+R3"`.
    pub fn expression(&self) -> String {
        self.destinations.iter().map(|j| format!("R{j}")).collect::<Vec<_>>().join("+")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionResult {
    pub channel: MultiInputPEC,
    /// Entry `i` describes sink `d_{i+1}` (`Q_{i+1}`).
    pub q_mapping: Vec<QMapping>,
    pub e_star: Vec<usize>,
    pub v_star: Vec<usize>,
    pub components: Vec<SuperNode>,
    pub splits: Vec<SplitRecord>,
    pub assumptions: Vec<String>,
}

const V2_INDEPENDENCE: &str =
    "links of a v2 split node to different super nodes are modeled as mutually independent";

/// Builds the reduced channel: sinks are the `V*` destinations followed by
/// the super nodes; each transmitter `v ∈ V_A` contributes a correlated
/// subchannel from its `E*` edges and an independent one from the rest.
pub fn split_transmitters(
    graph: &RelayGraph,
    cut: &CutSpec,
    star: &StarSets,
    supers: &[SuperNode],
) -> Result<ReductionResult> {
    let mut q_mapping: Vec<QMapping> = star
        .v_star
        .iter()
        .map(|&n| QMapping { destinations: vec![graph.dest_index[n].expect("destination")], nodes: vec![n] })
        .collect();
    q_mapping.extend(supers.iter().map(|s| QMapping { destinations: s.destinations.clone(), nodes: s.nodes.clone() }));
    let sinks = q_mapping.len();
    if sinks == 0 {
        return Err(Error::InvalidCut("no destination of A survives the reduction".into()));
    }
    let v_star_count = star.v_star.len();
    let component_of: HashMap<usize, usize> = supers
        .iter()
        .enumerate()
        .flat_map(|(c, s)| s.nodes.iter().map(move |&n| (n, c)))
        .collect();

    let cut_edges = cut.cut_edges(graph);
    let mut subchannels = Vec::new();
    let mut splits = Vec::new();
    for v in cut.frontier(graph) {
        let mine: Vec<usize> = cut_edges.iter().copied().filter(|&e| graph.edges[e].from == v).collect();
        let (e1, e2): (Vec<usize>, Vec<usize>) = mine.iter().partition(|e| star.e_star.contains(e));

        if !e1.is_empty() {
            let eps: Rational = e1.iter().map(|&e| graph.edges[e].eps.clone()).product();
            subchannels.push(ErasureModel::identical(eps));
            splits.push(SplitRecord {
                node: v,
                part: SplitPart::V1,
                subchannel: subchannels.len(),
                provenance: vec![e1.clone(); sinks],
            });
        }

        let mut links = vec![Rational::one(); sinks];
        let mut provenance = vec![Vec::new(); sinks];
        for &e in &e2 {
            if let Some(&c) = component_of.get(&graph.edges[e].to) {
                links[v_star_count + c] *= &graph.edges[e].eps;
                provenance[v_star_count + c].push(e);
            }
        }
        if links.iter().any(|p| !p.is_one()) {
            subchannels.push(ErasureModel::independent(links));
            splits.push(SplitRecord { node: v, part: SplitPart::V2, subchannel: subchannels.len(), provenance });
        }
    }
    let channel = MultiInputPEC::with_limit(sinks, subchannels, HARD_MAX_DESTINATIONS)?;
    Ok(ReductionResult {
        channel,
        q_mapping,
        e_star: star.e_star.iter().copied().collect(),
        v_star: star.v_star.clone(),
        components: supers.to_vec(),
        splits,
        assumptions: vec![V2_INDEPENDENCE.to_string()],
    })
}

/// All three stages.
pub fn reduce(graph: &RelayGraph, cut: &CutSpec) -> Result<ReductionResult> {
    let star = build_star_sets(graph, cut);
    let supers = components(graph, &star.survivors);
    split_transmitters(graph, cut, &star, &supers)
}

/// Outer bound on the rates of the destinations in `A`: the reduced
/// channel's joint outer-bound system with each `Q_i` replaced by the sum of
/// the rates it stands for. Totals are named `R[j]` by original
/// destination index; split variables keep their sink-indexed names.
pub fn network_rate_bound(graph: &RelayGraph, cut: &CutSpec, opts: &BoundOptions) -> Result<(ReductionResult, ConstraintSystem)> {
    let reduction = reduce(graph, cut)?;
    let q_system = bounds::outer_joint_system(&reduction.channel, opts)?;
    let sinks = reduction.q_mapping.len();

    let mut sys = ConstraintSystem::new();
    let dests: BTreeSet<usize> = reduction.q_mapping.iter().flat_map(|q| q.destinations.iter().copied()).collect();
    let r_var: BTreeMap<usize, usize> = dests
        .iter()
        .map(|&j| Ok((j, sys.add_variable(total_rate(j), true)?)))
        .collect::<Result<_>>()?;
    // Q variables occupy the first `sinks` slots of the reduced system.
    let mut remap: Vec<Vec<usize>> = reduction
        .q_mapping
        .iter()
        .map(|q| q.destinations.iter().map(|j| r_var[j]).collect())
        .collect();
    for name in &q_system.variables()[sinks..] {
        let v = sys.add_variable(name.clone(), true)?;
        remap.push(vec![v]);
    }
    for row in q_system.rows() {
        let coeffs = row
            .coeffs
            .iter()
            .flat_map(|(v, c)| remap[*v].iter().map(move |&w| (w, c.clone())));
        sys.add_row(Row::new(coeffs, row.relation, row.rhs.clone()))?;
    }
    Ok((reduction, sys))
}

/// `max Σ μ_j R_j` over the network bound, with `μ` indexed by the sorted
/// destinations of `A`. Because each `Q_i` is a sum of nonnegative rates,
/// the optimum equals the reduced channel's optimum with weight
/// `max_{j ∈ J_i} μ̃_j` on `Q_i`.
pub fn network_max_weighted(
    reduction: &ReductionResult,
    mu: &BTreeMap<usize, Rational>,
    opts: &BoundOptions,
) -> Result<WeightedBound> {
    let mut weights = Vec::with_capacity(reduction.q_mapping.len());
    for q in &reduction.q_mapping {
        let mut best = rational::int(0);
        for j in &q.destinations {
            let w = mu
                .get(j)
                .ok_or_else(|| Error::InvalidModel(format!("no weight for destination {j}")))?;
            if *w > best {
                best = w.clone();
            }
        }
        weights.push(best);
    }
    bounds::outer_max_weighted(&reduction.channel, &WeightVector(weights), opts)
}

/// Serializable view of a [`ReductionResult`].
#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub channel: ChannelSpec,
    pub q_mapping: BTreeMap<String, String>,
    pub e_star: Vec<(String, String)>,
    pub v_star: Vec<String>,
    pub components: Vec<Vec<String>>,
    pub splits: Vec<SplitReport>,
    pub assumptions: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitReport {
    pub node: String,
    pub part: SplitPart,
    pub subchannel: usize,
    pub provenance: Vec<Vec<(String, String)>>,
}

impl ReductionResult {
    pub fn report(&self, graph: &RelayGraph) -> ReductionReport {
        let edge = |e: usize| (graph.id(graph.edges[e].from).to_string(), graph.id(graph.edges[e].to).to_string());
        let names = |ns: &[usize]| ns.iter().map(|&n| graph.id(n).to_string()).collect::<Vec<_>>();
        ReductionReport {
            channel: self.channel.to_spec(),
            q_mapping: self
                .q_mapping
                .iter()
                .enumerate()
                .map(|(i, q)| (format!("d{}", i + 1), q.expression()))
                .collect(),
            e_star: self.e_star.iter().map(|&e| edge(e)).collect(),
            v_star: names(&self.v_star),
            components: self.components.iter().map(|c| names(&c.nodes)).collect(),
            splits: self
                .splits
                .iter()
                .map(|s| SplitReport {
                    node: graph.id(s.node).to_string(),
                    part: s.part,
                    subchannel: s.subchannel,
                    provenance: s.provenance.iter().map(|es| es.iter().map(|&e| edge(e)).collect()).collect(),
                })
                .collect(),
            assumptions: self.assumptions.clone(),
        }
    }
}
