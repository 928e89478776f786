//! Immutable directed-arc model of an optical network.
//!
//! Topologies are built from undirected edge lists; every undirected edge
//! expands into a pair of antiparallel arcs, one per fiber direction. All
//! indices are 0-based internally; files and reports use 1-based labels.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

/// Index of a node within its owning [`Topology`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    /// 1-based index used in files and reports.
    pub fn external(&self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.external())
    }
}

/// A directed fiber link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub id: usize,
    pub tail: NodeId,
    pub head: NodeId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("node index {0} out of range for {1} nodes")]
    NodeOutOfRange(usize, usize),
    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(usize),
    #[error("duplicate undirected edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("topology name must be a single non-empty token, got {0:?}")]
    InvalidName(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Directed graph of an optical network plus adjacency indexes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    name: String,
    node_count: usize,
    node_labels: Vec<String>,
    arcs: Vec<Arc>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl Topology {
    /// Builds a topology from an undirected edge list (0-based endpoints).
    /// Each edge yields two antiparallel arcs. Arc ids are assigned after
    /// sorting the normalized edge list, so identical inputs always produce
    /// identical topologies.
    pub fn from_undirected_edges(
        node_count: usize,
        undirected_edges: &[(usize, usize)],
        name: &str,
    ) -> Result<Self, TopologyError> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(TopologyError::InvalidName(name.to_string()));
        }
        let mut seen = HashSet::new();
        let mut edges = Vec::with_capacity(undirected_edges.len());
        for &(u, v) in undirected_edges {
            if u >= node_count {
                return Err(TopologyError::NodeOutOfRange(u, node_count));
            }
            if v >= node_count {
                return Err(TopologyError::NodeOutOfRange(v, node_count));
            }
            if u == v {
                return Err(TopologyError::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(TopologyError::DuplicateEdge(key.0 + 1, key.1 + 1));
            }
            edges.push(key);
        }
        edges.sort_unstable();

        let mut arcs = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in &edges {
            let id = arcs.len();
            arcs.push(Arc { id, tail: NodeId(u), head: NodeId(v) });
            arcs.push(Arc { id: id + 1, tail: NodeId(v), head: NodeId(u) });
        }

        let mut out_adj = vec![Vec::new(); node_count];
        let mut in_adj = vec![Vec::new(); node_count];
        for arc in &arcs {
            out_adj[arc.tail.0].push(arc.id);
            in_adj[arc.head.0].push(arc.id);
        }
        // neighbor iteration order defines lexicographic tie-breaks downstream
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_unstable();
        }

        let node_labels = (1..=node_count).map(|i| i.to_string()).collect();
        Ok(Topology { name: name.to_string(), node_count, node_labels, arcs, out_adj, in_adj })
    }

    /// Replaces the default numeric labels.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, TopologyError> {
        if labels.len() != self.node_count {
            return Err(TopologyError::NodeOutOfRange(labels.len(), self.node_count));
        }
        self.node_labels = labels;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count).map(NodeId)
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> &Arc {
        &self.arcs[id]
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.node_labels[v.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.node_labels
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.0 < self.node_count
    }

    /// Arc ids leaving `v`, sorted ascending.
    pub fn out_arcs(&self, v: NodeId) -> &[usize] {
        &self.out_adj[v.0]
    }

    /// Arc ids entering `v`, sorted ascending.
    pub fn in_arcs(&self, v: NodeId) -> &[usize] {
        &self.in_adj[v.0]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_adj[v.0].len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_adj[v.0].len()
    }

    /// Looks up the arc tail -> head, if present.
    pub fn arc_between(&self, tail: NodeId, head: NodeId) -> Option<usize> {
        self.out_adj[tail.0]
            .iter()
            .copied()
            .find(|&a| self.arcs[a].head == head)
    }

    /// Hop distances from `src` to every node (None = unreachable).
    pub fn dist_from(&self, src: NodeId) -> Vec<Option<u32>> {
        self.bfs(src, |t, v| &t.out_adj[v.0], |t, a| t.arcs[a].head)
    }

    /// Hop distances from every node to `dst`.
    pub fn dist_to(&self, dst: NodeId) -> Vec<Option<u32>> {
        self.bfs(dst, |t, v| &t.in_adj[v.0], |t, a| t.arcs[a].tail)
    }

    fn bfs(
        &self,
        start: NodeId,
        adj: impl Fn(&Self, NodeId) -> &[usize],
        step: impl Fn(&Self, usize) -> NodeId,
    ) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count];
        dist[start.0] = Some(0);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            let d = dist[v.0].unwrap();
            for &a in adj(self, v) {
                let w = step(self, a);
                if dist[w.0].is_none() {
                    dist[w.0] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Renders a path using node labels, e.g. "3-8-1".
    pub fn format_path(&self, path: &Path) -> String {
        path.nodes()
            .iter()
            .map(|&v| self.label(v))
            .collect::<Vec<_>>()
            .join("-")
    }

    /// Serializes to the topology file format. Edges are emitted sorted by
    /// their 1-based (u, v) pair; label lines appear only for nodes whose
    /// label differs from the default numeric one.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("topology {} {}\n", self.name, self.node_count));
        for (i, label) in self.node_labels.iter().enumerate() {
            if *label != (i + 1).to_string() {
                out.push_str(&format!("label {} {}\n", i + 1, label));
            }
        }
        for arc in &self.arcs {
            if arc.tail.0 < arc.head.0 {
                out.push_str(&format!("edge {} {}\n", arc.tail.external(), arc.head.external()));
            }
        }
        out
    }

    /// Parses the topology file format (see [`Topology::serialize`]).
    pub fn parse(text: &str) -> Result<Self, TopologyError> {
        let mut header: Option<(String, usize)> = None;
        let mut labels: Vec<(usize, String)> = Vec::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let keyword = tokens.next().unwrap();
            let parse_err = |msg: String| TopologyError::Parse { line: lineno, msg };
            match keyword {
                "topology" => {
                    if header.is_some() {
                        return Err(parse_err("duplicate topology header".into()));
                    }
                    let name = tokens
                        .next()
                        .ok_or_else(|| parse_err("missing topology name".into()))?;
                    let count: usize = tokens
                        .next()
                        .ok_or_else(|| parse_err("missing node count".into()))?
                        .parse()
                        .map_err(|_| parse_err("node count is not a number".into()))?;
                    if count == 0 {
                        return Err(parse_err("node count must be positive".into()));
                    }
                    header = Some((name.to_string(), count));
                }
                "label" => {
                    let idx: usize = tokens
                        .next()
                        .ok_or_else(|| parse_err("missing label index".into()))?
                        .parse()
                        .map_err(|_| parse_err("label index is not a number".into()))?;
                    let text = tokens.collect::<Vec<_>>().join(" ");
                    if text.is_empty() {
                        return Err(parse_err("missing label text".into()));
                    }
                    labels.push((idx, text));
                }
                "edge" => {
                    let u: usize = tokens
                        .next()
                        .ok_or_else(|| parse_err("missing edge endpoint".into()))?
                        .parse()
                        .map_err(|_| parse_err("edge endpoint is not a number".into()))?;
                    let v: usize = tokens
                        .next()
                        .ok_or_else(|| parse_err("missing edge endpoint".into()))?
                        .parse()
                        .map_err(|_| parse_err("edge endpoint is not a number".into()))?;
                    if u == 0 || v == 0 {
                        return Err(parse_err("edge endpoints are 1-based".into()));
                    }
                    if u == v {
                        return Err(parse_err(format!("self-loop edge {u} {v}")));
                    }
                    edges.push((u - 1, v - 1));
                }
                other => {
                    return Err(parse_err(format!("unknown keyword {other:?}")));
                }
            }
        }

        let (name, node_count) =
            header.ok_or(TopologyError::Parse { line: 0, msg: "missing topology header".into() })?;
        let mut topo = Topology::from_undirected_edges(node_count, &edges, &name)?;
        for (idx, text) in labels {
            if idx == 0 || idx > node_count {
                return Err(TopologyError::NodeOutOfRange(idx, node_count));
            }
            topo.node_labels[idx - 1] = text;
        }
        Ok(topo)
    }
}

/// The 26 undirected edges of the shipped COST239 topology, 1-based.
///
/// The numbering is calibrated so the benchmark routes used in the bundled
/// instances are all valid; it can be overridden with a topology file.
pub const COST239_EDGES: [(usize, usize); 26] = [
    (1, 2),
    (1, 6),
    (1, 7),
    (1, 8),
    (2, 3),
    (2, 8),
    (2, 10),
    (2, 11),
    (3, 4),
    (3, 8),
    (3, 9),
    (3, 10),
    (4, 5),
    (4, 9),
    (4, 10),
    (5, 6),
    (5, 7),
    (5, 9),
    (5, 11),
    (6, 7),
    (6, 11),
    (7, 8),
    (7, 9),
    (8, 9),
    (9, 11),
    (10, 11),
];

/// The shipped 11-node, 52-arc COST239 reference topology.
pub fn builtin_cost239() -> Topology {
    let edges: Vec<(usize, usize)> =
        COST239_EDGES.iter().map(|&(u, v)| (u - 1, v - 1)).collect();
    Topology::from_undirected_edges(11, &edges, "cost239").expect("builtin cost239 is valid")
}

/// A simple directed route: an alternating node/arc walk with no repeated node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    nodes: Vec<NodeId>,
    arcs: Vec<usize>,
}

impl Path {
    /// Builds a path from a node sequence, resolving arcs against `topo`.
    pub fn from_nodes(topo: &Topology, nodes: Vec<NodeId>) -> Result<Self, PathError> {
        if nodes.len() < 2 {
            return Err(PathError::TooShort);
        }
        let mut seen = HashSet::new();
        for &v in &nodes {
            if !topo.contains(v) {
                return Err(PathError::UnknownNode(v));
            }
            if !seen.insert(v) {
                return Err(PathError::RepeatedNode(v));
            }
        }
        let mut arcs = Vec::with_capacity(nodes.len() - 1);
        for pair in nodes.windows(2) {
            let arc = topo
                .arc_between(pair[0], pair[1])
                .ok_or(PathError::MissingArc(pair[0], pair[1]))?;
            arcs.push(arc);
        }
        Ok(Path { nodes, arcs })
    }

    /// Internal constructor for walks already known to be simple and connected.
    pub(crate) fn from_walk_unchecked(nodes: Vec<NodeId>, arcs: Vec<usize>) -> Self {
        debug_assert_eq!(nodes.len(), arcs.len() + 1);
        Path { nodes, arcs }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[usize] {
        &self.arcs
    }

    pub fn src(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn dst(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    /// Length in links.
    pub fn hops(&self) -> usize {
        self.arcs.len()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("a path needs at least two nodes")]
    TooShort,
    #[error("node {0} is not in the topology")]
    UnknownNode(NodeId),
    #[error("node {0} repeats; paths must be simple")]
    RepeatedNode(NodeId),
    #[error("no arc {0} -> {1} in the topology")]
    MissingArc(NodeId, NodeId),
}

/// Up to `k` distinct simple paths from `src` to `dst`, in nondecreasing hop
/// count; ties are broken by lexicographic node-sequence order. Paths are
/// enumerated level by level (all routes of L hops before any of L+1), so the
/// result is identical across runs. Returns an empty list when no path exists.
pub fn k_shortest_simple_paths(
    topo: &Topology,
    src: NodeId,
    dst: NodeId,
    k: usize,
) -> Vec<Path> {
    assert!(src != dst, "k_shortest_simple_paths requires src != dst");
    assert!(k >= 1, "k_shortest_simple_paths requires k >= 1");
    let dist_to = topo.dist_to(dst);
    let Some(shortest) = dist_to[src.0] else {
        return Vec::new();
    };

    let mut found = Vec::with_capacity(k);
    let max_len = topo.node_count() - 1;
    for target_len in shortest as usize..=max_len {
        let mut visited = vec![false; topo.node_count()];
        visited[src.0] = true;
        let mut nodes = vec![src];
        let mut arcs = Vec::new();
        extend_paths(
            topo, dst, target_len, &dist_to, &mut visited, &mut nodes, &mut arcs, &mut found, k,
        );
        if found.len() >= k {
            break;
        }
    }
    found
}

#[allow(clippy::too_many_arguments)]
fn extend_paths(
    topo: &Topology,
    dst: NodeId,
    target_len: usize,
    dist_to: &[Option<u32>],
    visited: &mut Vec<bool>,
    nodes: &mut Vec<NodeId>,
    arcs: &mut Vec<usize>,
    found: &mut Vec<Path>,
    k: usize,
) {
    if found.len() >= k {
        return;
    }
    let cur = *nodes.last().unwrap();
    if cur == dst {
        if arcs.len() == target_len {
            found.push(Path::from_walk_unchecked(nodes.clone(), arcs.clone()));
        }
        return;
    }
    let remaining = target_len - arcs.len();
    if remaining == 0 {
        return;
    }
    // out_arcs are sorted by arc id; heads of a node's out arcs ascend with
    // the sorted edge list, giving lexicographic exploration order
    let mut next: Vec<usize> = topo.out_arcs(cur).to_vec();
    next.sort_by_key(|&a| topo.arc(a).head);
    for a in next {
        let head = topo.arc(a).head;
        if visited[head.0] {
            continue;
        }
        match dist_to[head.0] {
            Some(d) if (d as usize) < remaining => {}
            _ => continue,
        }
        visited[head.0] = true;
        nodes.push(head);
        arcs.push(a);
        extend_paths(topo, dst, target_len, dist_to, visited, nodes, arcs, found, k);
        arcs.pop();
        nodes.pop();
        visited[head.0] = false;
        if found.len() >= k {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy5() -> Topology {
        // A and B feed X; X reaches C through I
        let labels = ["A", "B", "C", "I", "X"].iter().map(|s| s.to_string()).collect();
        Topology::from_undirected_edges(5, &[(0, 4), (1, 4), (4, 3), (3, 2)], "toy5")
            .unwrap()
            .with_labels(labels)
            .unwrap()
    }

    #[test]
    fn undirected_edges_expand_to_arc_pairs() {
        let t = toy5();
        assert_eq!(t.arcs().len(), 8);
        for arc in t.arcs() {
            assert!(t.arc_between(arc.head, arc.tail).is_some());
        }
    }

    #[test]
    fn cost239_has_11_nodes_and_52_arcs() {
        let t = builtin_cost239();
        assert_eq!(t.node_count(), 11);
        assert_eq!(t.arcs().len(), 52);
    }

    #[test]
    fn cost239_contains_benchmark_adjacencies() {
        let t = builtin_cost239();
        for (u, v) in [
            (1, 2),
            (1, 6),
            (1, 7),
            (1, 8),
            (2, 3),
            (2, 10),
            (3, 8),
            (4, 10),
            (5, 7),
            (6, 11),
            (8, 9),
        ] {
            assert!(
                t.arc_between(NodeId(u - 1), NodeId(v - 1)).is_some(),
                "missing arc {u}->{v}"
            );
            assert!(
                t.arc_between(NodeId(v - 1), NodeId(u - 1)).is_some(),
                "missing arc {v}->{u}"
            );
        }
    }

    #[test]
    fn cost239_destination_one_has_in_degree_four() {
        let t = builtin_cost239();
        assert_eq!(t.in_degree(NodeId(0)), 4);
    }

    #[test]
    fn rejects_self_loop() {
        let err = Topology::from_undirected_edges(3, &[(1, 1)], "bad").unwrap_err();
        assert_eq!(err, TopologyError::SelfLoop(1));
    }

    #[test]
    fn rejects_duplicate_edge_regardless_of_orientation() {
        let err = Topology::from_undirected_edges(3, &[(0, 1), (1, 0)], "bad").unwrap_err();
        assert_eq!(err, TopologyError::DuplicateEdge(1, 2));
    }

    #[test]
    fn rejects_out_of_range_endpoint() {
        let err = Topology::from_undirected_edges(3, &[(0, 3)], "bad").unwrap_err();
        assert_eq!(err, TopologyError::NodeOutOfRange(3, 3));
    }

    #[test]
    fn serialize_parse_round_trip() {
        for t in [toy5(), builtin_cost239()] {
            let text = t.serialize();
            let back = Topology::parse(&text).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn parse_rejects_self_loop_line() {
        let text = "topology bad 3\nedge 1 1\n";
        match Topology::parse(text) {
            Err(TopologyError::Parse { line: 2, .. }) => {}
            other => panic!("expected parse error on line 2, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_out_of_range_node() {
        let text = "topology bad 11\nedge 1 12\n";
        match Topology::parse(text) {
            Err(TopologyError::NodeOutOfRange(11, 11)) => {}
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn parse_reports_line_numbers_for_syntax_errors() {
        let text = "topology bad 3\n# fine\nedge 1 x\n";
        match Topology::parse(text) {
            Err(TopologyError::Parse { line: 3, .. }) => {}
            other => panic!("expected syntax error on line 3, got {other:?}"),
        }
    }

    #[test]
    fn toy_unique_route_a_to_c() {
        let t = toy5();
        let paths = k_shortest_simple_paths(&t, NodeId(0), NodeId(2), 1);
        assert_eq!(paths.len(), 1);
        assert_eq!(t.format_path(&paths[0]), "A-X-I-C");
        assert_eq!(paths[0].hops(), 3);
    }

    #[test]
    fn toy_a_to_b_has_single_simple_path() {
        let t = toy5();
        let paths = k_shortest_simple_paths(&t, NodeId(0), NodeId(1), 2);
        assert_eq!(paths.len(), 1);
        assert_eq!(t.format_path(&paths[0]), "A-X-B");
        assert_eq!(paths[0].hops(), 2);
    }

    #[test]
    fn cost239_3_to_1_shortest_has_two_hops() {
        // oracle: breadth-first distance on the shipped topology
        let t = builtin_cost239();
        let dist = t.dist_from(NodeId(2));
        assert_eq!(dist[0], Some(2));
        let paths = k_shortest_simple_paths(&t, NodeId(2), NodeId(0), 2);
        assert_eq!(paths[0].hops(), 2);
        assert_eq!(paths[1].hops(), 2);
        // lexicographic tie-break puts 3-2-1 before 3-8-1
        assert_eq!(t.format_path(&paths[0]), "3-2-1");
        assert_eq!(t.format_path(&paths[1]), "3-8-1");
    }

    #[test]
    fn paths_sorted_by_hops_and_simple() {
        let t = builtin_cost239();
        let paths = k_shortest_simple_paths(&t, NodeId(3), NodeId(0), 20);
        assert!(!paths.is_empty());
        let mut prev = 0;
        for p in &paths {
            assert!(p.hops() >= prev);
            prev = p.hops();
            let mut seen = HashSet::new();
            for v in p.nodes() {
                assert!(seen.insert(*v));
            }
            for (i, &a) in p.arcs().iter().enumerate() {
                assert_eq!(t.arc(a).tail, p.nodes()[i]);
                assert_eq!(t.arc(a).head, p.nodes()[i + 1]);
            }
        }
    }

    #[test]
    fn no_path_yields_empty_list() {
        let t = Topology::from_undirected_edges(4, &[(0, 1), (2, 3)], "split").unwrap();
        assert!(k_shortest_simple_paths(&t, NodeId(0), NodeId(3), 3).is_empty());
    }

    #[test]
    fn deterministic_path_enumeration() {
        let t = builtin_cost239();
        let a = k_shortest_simple_paths(&t, NodeId(4), NodeId(1), 12);
        let b = k_shortest_simple_paths(&t, NodeId(4), NodeId(1), 12);
        assert_eq!(a, b);
    }

    #[test]
    fn path_from_nodes_validates() {
        let t = toy5();
        let ok = Path::from_nodes(&t, vec![NodeId(0), NodeId(4), NodeId(3)]).unwrap();
        assert_eq!(ok.hops(), 2);
        assert_eq!(
            Path::from_nodes(&t, vec![NodeId(0), NodeId(2)]),
            Err(PathError::MissingArc(NodeId(0), NodeId(2)))
        );
        assert_eq!(
            Path::from_nodes(&t, vec![NodeId(0), NodeId(4), NodeId(0)]),
            Err(PathError::RepeatedNode(NodeId(0)))
        );
    }
}
