//! Simple undirected graphs: edge-list I/O, standard families, and vertex
//! connectivity.
//!
//! Nodes are indexed `0..n` inside the library. Every textual surface (edge
//! lists, certificates, CLI reports) uses 1-based labels; the conversion
//! happens at those boundaries only.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

/// Largest graph accepted by [`brute_force_connectivity`].
pub const BRUTE_FORCE_MAX_NODES: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: malformed line {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: duplicate edge {{{i}, {j}}}")]
    DuplicateEdge { line: usize, i: usize, j: usize },
    #[error("line {line}: self-loop at node {node}")]
    SelfLoop { line: usize, node: usize },
    #[error("line {line}: node {node} out of range 1..={n}")]
    NodeOutOfRange { line: usize, node: usize, n: usize },
    #[error("missing header line \"n m\"")]
    MissingHeader,
    #[error("header announces {expected} edges but {found} were listed")]
    EdgeCountMismatch { expected: usize, found: usize },
    #[error("invalid edge {{{i}, {j}}} for a graph on {n} nodes")]
    InvalidEdge { i: usize, j: usize, n: usize },
    #[error("invalid parameters for {family}: {reason}")]
    InvalidParams { family: String, reason: String },
    #[error("unknown graph family {0:?}")]
    UnknownFamily(String),
    #[error("operation needs at least {needed} nodes, graph has {n}")]
    TooFewNodes { needed: usize, n: usize },
    #[error("brute-force enumeration limited to {max} nodes, graph has {n}")]
    TooManyNodes { max: usize, n: usize },
    #[error("complete graph has no separating node set")]
    Complete,
}

/// Simple undirected graph on nodes `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<bool>>,
    edges: BTreeSet<(usize, usize)>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges)
            .finish()
    }
}

impl Graph {
    /// Edgeless graph on `n` nodes.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adj: vec![vec![false; n]; n],
            edges: BTreeSet::new(),
        }
    }

    /// Builds a graph from 0-based edges, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (i, j) in edges {
            if i == j || i >= n || j >= n || g.has_edge(i, j) {
                return Err(GraphError::InvalidEdge { i, j, n });
            }
            g.insert(i, j);
        }
        Ok(g)
    }

    fn insert(&mut self, i: usize, j: usize) {
        self.adj[i][j] = true;
        self.adj[j][i] = true;
        self.edges.insert((i.min(j), i.max(j)));
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.adj[i][j]
    }

    /// Edges as sorted pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Pairs `i < j` that are not edges, in lexicographic order.
    pub fn non_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n)
            .tuple_combinations()
            .filter(move |&(i, j)| !self.adj[i][j])
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.adj[i][j])
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].iter().filter(|&&a| a).count()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).min().unwrap_or(0)
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * self.n.saturating_sub(1) / 2
    }

    pub fn is_connected(&self) -> bool {
        self.components_without(&[]).len() <= 1
    }

    /// Connected components of the graph with `removed` deleted, each sorted,
    /// ordered by smallest member.
    pub fn components_without(&self, removed: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        for &v in removed {
            seen[v] = true;
        }
        let mut components = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            let mut comp = vec![start];
            while let Some(u) = queue.pop_front() {
                for v in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }

    /// Whether any triangle exists.
    pub fn has_triangle(&self) -> bool {
        self.edges
            .iter()
            .any(|&(i, j)| (0..self.n).any(|k| self.adj[i][k] && self.adj[j][k]))
    }

    /// Edge-list text (1-based labels, LF newlines).
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for (i, j) in self.edges() {
            out.push_str(&format!("{} {}\n", i + 1, j + 1));
        }
        out
    }
}

impl FromStr for Graph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_graph(s)
    }
}

/// Parses the edge-list format: a header `n m`, then `m` lines `i j` with
/// 1-based labels. Blank lines and lines starting with `#` are skipped.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(idx, l)| (idx + 1, l.trim_end_matches('\r').trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(GraphError::MissingHeader)?;
    let (n, m) = parse_pair(hline, header)?;
    let mut g = Graph::empty(n);
    let mut found = 0;
    for (line, text) in lines {
        let (i, j) = parse_pair(line, text)?;
        for node in [i, j] {
            if node == 0 || node > n {
                return Err(GraphError::NodeOutOfRange { line, node, n });
            }
        }
        if i == j {
            return Err(GraphError::SelfLoop { line, node: i });
        }
        if g.has_edge(i - 1, j - 1) {
            return Err(GraphError::DuplicateEdge { line, i, j });
        }
        g.insert(i - 1, j - 1);
        found += 1;
    }
    if found != m {
        return Err(GraphError::EdgeCountMismatch { expected: m, found });
    }
    Ok(g)
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize), GraphError> {
    let malformed = || GraphError::Malformed {
        line,
        text: text.to_string(),
    };
    let mut fields = text.split_whitespace();
    let a = fields.next().and_then(|f| f.parse().ok()).ok_or_else(malformed)?;
    let b = fields.next().and_then(|f| f.parse().ok()).ok_or_else(malformed)?;
    if fields.next().is_some() {
        return Err(malformed());
    }
    Ok((a, b))
}

/// Graph families with analytically known connectivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Cycle,
    Path,
    Complete,
    CompleteBipartite,
    Circulant,
}

impl FromStr for Family {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cycle" => Ok(Family::Cycle),
            "path" => Ok(Family::Path),
            "complete" => Ok(Family::Complete),
            "complete_bipartite" => Ok(Family::CompleteBipartite),
            "circulant" => Ok(Family::Circulant),
            other => Err(GraphError::UnknownFamily(other.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Cycle => "cycle",
            Family::Path => "path",
            Family::Complete => "complete",
            Family::CompleteBipartite => "complete_bipartite",
            Family::Circulant => "circulant",
        })
    }
}

/// Builds a member of `family`.
///
/// `cycle(n)` needs n ≥ 3, `path(n)` and `complete(n)` need n ≥ 1,
/// `complete_bipartite(a, b)` needs a, b ≥ 1 with parts `0..a` and `a..a+b`,
/// and `circulant(n, k)` needs 1 ≤ k < n/2; node i is joined to i±1, …, i±k
/// modulo n.
pub fn generate(family: Family, params: &[usize]) -> Result<Graph, GraphError> {
    let invalid = |reason: &str| GraphError::InvalidParams {
        family: family.to_string(),
        reason: reason.to_string(),
    };
    let arity = match family {
        Family::CompleteBipartite | Family::Circulant => 2,
        _ => 1,
    };
    if params.len() != arity {
        return Err(invalid(&format!("expected {arity} parameter(s)")));
    }
    match family {
        Family::Cycle => {
            let n = params[0];
            if n < 3 {
                return Err(invalid("cycle needs n >= 3"));
            }
            Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
        }
        Family::Path => {
            let n = params[0];
            if n < 1 {
                return Err(invalid("path needs n >= 1"));
            }
            Graph::from_edges(n, (1..n).map(|i| (i - 1, i)))
        }
        Family::Complete => {
            let n = params[0];
            if n < 1 {
                return Err(invalid("complete needs n >= 1"));
            }
            Graph::from_edges(n, (0..n).tuple_combinations())
        }
        Family::CompleteBipartite => {
            let (a, b) = (params[0], params[1]);
            if a < 1 || b < 1 {
                return Err(invalid("both parts must be nonempty"));
            }
            Graph::from_edges(a + b, (0..a).cartesian_product(a..a + b))
        }
        Family::Circulant => {
            let (n, k) = (params[0], params[1]);
            if k < 1 || 2 * k >= n {
                return Err(invalid("circulant(n, k) needs 1 <= k < n/2"));
            }
            Graph::from_edges(
                n,
                (0..n).flat_map(|i| (1..=k).map(move |d| (i, (i + d) % n))),
            )
        }
    }
}

/// Erdős–Rényi G(n, p) sample from a seeded ChaCha20 stream.
pub fn random_gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut g = Graph::empty(n);
    for (i, j) in (0..n).tuple_combinations() {
        if rng.random_bool(p.clamp(0.0, 1.0)) {
            g.insert(i, j);
        }
    }
    g
}

/// Minimum node separator together with the two sides it splits apart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separator {
    pub nodes: Vec<usize>,
    /// Side containing the flow source; no edge joins `part_one` to `part_two`.
    pub part_one: Vec<usize>,
    pub part_two: Vec<usize>,
}

/// Vertex connectivity κ(g): n−1 for complete graphs, otherwise the size of
/// a smallest node set whose deletion disconnects g (0 if g is disconnected).
pub fn vertex_connectivity(g: &Graph) -> Result<usize, GraphError> {
    Ok(even_sweep(g)?.0)
}

/// A minimum separator of a non-complete graph.
pub fn min_separator(g: &Graph) -> Result<Separator, GraphError> {
    match even_sweep(g)? {
        (_, Some((s, t))) => Ok(FlowNetwork::split(g, s, t).min_cut(g)),
        (_, None) => Err(GraphError::Complete),
    }
}

/// Even's scheme: with v_0, …, v_{n-1} in index order, κ equals the minimum
/// local connectivity over non-adjacent pairs (v_i, v_j), j > i, for
/// i = 0..=κ. Returns κ and the pair attaining it.
fn even_sweep(g: &Graph) -> Result<(usize, Option<(usize, usize)>), GraphError> {
    let n = g.node_count();
    if n < 2 {
        return Err(GraphError::TooFewNodes { needed: 2, n });
    }
    if g.is_complete() {
        return Ok((n - 1, None));
    }
    let mut best = n - 1;
    let mut witness = None;
    let mut i = 0;
    while i <= best && i < n {
        for j in i + 1..n {
            if g.has_edge(i, j) {
                continue;
            }
            let flow = FlowNetwork::split(g, i, j).max_flow_bounded(best);
            if flow < best || witness.is_none() {
                best = flow;
                witness = Some((i, j));
            }
        }
        i += 1;
    }
    Ok((best, witness))
}

/// Exhaustive κ(g), testing node subsets in increasing size.
pub fn brute_force_connectivity(g: &Graph) -> Result<usize, GraphError> {
    Ok(brute_force_separator(g)?.map_or(g.node_count() - 1, |s| s.len()))
}

/// Smallest disconnecting node set found by exhaustive enumeration
/// (lexicographically first among those of minimum size), or `None` for
/// complete graphs.
pub fn brute_force_separator(g: &Graph) -> Result<Option<Vec<usize>>, GraphError> {
    let n = g.node_count();
    if n < 2 {
        return Err(GraphError::TooFewNodes { needed: 2, n });
    }
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(GraphError::TooManyNodes {
            max: BRUTE_FORCE_MAX_NODES,
            n,
        });
    }
    for size in 0..n.saturating_sub(1) {
        for subset in (0..n).combinations(size) {
            if g.components_without(&subset).len() >= 2 {
                return Ok(Some(subset));
            }
        }
    }
    Ok(None)
}

const UNBOUNDED: u32 = u32::MAX;

/// Node-split flow network: node v becomes v_in = 2v and v_out = 2v+1 joined
/// by a unit arc (unbounded for the terminals); each edge {u, v} becomes
/// unbounded arcs u_out → v_in and v_out → u_in.
struct FlowNetwork {
    source: usize,
    sink: usize,
    arcs: Vec<Arc>,
    // arc indices leaving each vertex, in insertion (node-index) order
    out: Vec<Vec<usize>>,
}

struct Arc {
    head: usize,
    cap: u32,
}

impl FlowNetwork {
    fn split(g: &Graph, s: usize, t: usize) -> Self {
        let n = g.node_count();
        let mut net = FlowNetwork {
            source: 2 * s + 1,
            sink: 2 * t,
            arcs: Vec::new(),
            out: vec![Vec::new(); 2 * n],
        };
        for v in 0..n {
            let cap = if v == s || v == t { UNBOUNDED } else { 1 };
            net.add_arc(2 * v, 2 * v + 1, cap);
        }
        for u in 0..n {
            for v in g.neighbors(u) {
                net.add_arc(2 * u + 1, 2 * v, UNBOUNDED);
            }
        }
        net
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: u32) {
        self.out[from].push(self.arcs.len());
        self.arcs.push(Arc { head: to, cap });
        self.out[to].push(self.arcs.len());
        self.arcs.push(Arc { head: from, cap: 0 });
    }

    /// Edmonds–Karp with BFS over arcs in node-index order, stopping once the
    /// flow reaches `bound` (the caller only needs to know whether it beats
    /// the current best).
    fn max_flow_bounded(&mut self, bound: usize) -> usize {
        let mut flow = 0;
        while flow < bound {
            let Some(pred) = self.augmenting_path() else {
                break;
            };
            let mut v = self.sink;
            while v != self.source {
                let a = pred[v].expect("path arc");
                if self.arcs[a].cap != UNBOUNDED {
                    self.arcs[a].cap -= 1;
                }
                let back = a ^ 1;
                if self.arcs[back].cap != UNBOUNDED {
                    self.arcs[back].cap += 1;
                }
                v = self.arcs[back].head;
            }
            flow += 1;
        }
        flow
    }

    fn augmenting_path(&self) -> Option<Vec<Option<usize>>> {
        let reach = self.residual_bfs();
        reach[self.sink].is_some().then_some(reach)
    }

    // pred[v] = arc used to reach v; the source marks itself with a sentinel.
    fn residual_bfs(&self) -> Vec<Option<usize>> {
        let mut pred = vec![None; self.out.len()];
        pred[self.source] = Some(usize::MAX);
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.out[u] {
                let arc = &self.arcs[a];
                if arc.cap > 0 && pred[arc.head].is_none() {
                    pred[arc.head] = Some(a);
                    if arc.head == self.sink {
                        return pred;
                    }
                    queue.push_back(arc.head);
                }
            }
        }
        pred
    }

    /// Saturates the flow, then reads the separator off the residual cut:
    /// nodes whose in-copy is reachable from the source but whose out-copy
    /// is not.
    fn min_cut(mut self, g: &Graph) -> Separator {
        self.max_flow_bounded(usize::MAX);
        let reach = self.residual_bfs();
        let n = g.node_count();
        let mut nodes = Vec::new();
        let mut part_one = Vec::new();
        let mut part_two = Vec::new();
        for v in 0..n {
            match (reach[2 * v].is_some(), reach[2 * v + 1].is_some()) {
                (true, false) => nodes.push(v),
                (_, true) => part_one.push(v),
                (false, false) => part_two.push(v),
            }
        }
        Separator {
            nodes,
            part_one,
            part_two,
        }
    }
}
