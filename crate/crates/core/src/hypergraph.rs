//! Hypergraphs with multiset edges, stars, projections and the canonical
//! edge-copy coordinate system.
//!
//! Vertices are `1..=m`. Edge order is construction (or file) order and is
//! observable: it fixes the coordinate order of every bit vector, and so the
//! bits of every key.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = u32;

/// A hyperedge: strictly ascending vertex list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hyperedge(Vec<Vertex>);

impl Hyperedge {
    /// Sorts the vertices; rejects repeats and edges with fewer than 2 vertices.
    pub fn new(mut vertices: Vec<Vertex>) -> Result<Self> {
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidHypergraph(format!(
                "edge {vertices:?} repeats a vertex"
            )));
        }
        if vertices.len() < 2 {
            return Err(Error::InvalidHypergraph(format!(
                "edge {vertices:?} has fewer than 2 vertices"
            )));
        }
        Ok(Hyperedge(vertices))
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Bit `v - 1` set for each member `v`. Requires `m <= 64`.
    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0, |acc, &v| acc | 1u64 << (v - 1))
    }
}

impl fmt::Display for Hyperedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// The `j`-th fictitious copy `e(j)` of edge `edge_index`; `copy` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeCopy {
    pub edge: usize,
    pub copy: u32,
}

impl EdgeCopy {
    pub fn new(edge: usize, copy: u32) -> Self {
        EdgeCopy { edge, copy }
    }

    /// Position in `canonical_coordinates(h, n)`.
    pub fn coordinate(&self, n: u32) -> usize {
        self.edge * n as usize + (self.copy as usize - 1)
    }
}

impl fmt::Display for EdgeCopy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.edge, self.copy)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    m: u32,
    edges: Vec<Hyperedge>,
}

impl Hypergraph {
    pub fn new(m: u32, edges: Vec<Hyperedge>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidHypergraph(format!("m = {m}, need m >= 2")));
        }
        for e in &edges {
            if let Some(&v) = e.vertices().iter().find(|&&v| v == 0 || v > m) {
                return Err(Error::VertexOutOfRange { vertex: v, m });
            }
        }
        Ok(Hypergraph { m, edges })
    }

    /// Convenience constructor from raw vertex lists.
    pub fn from_lists(m: u32, lists: &[&[Vertex]]) -> Result<Self> {
        let edges = lists
            .iter()
            .map(|l| Hyperedge::new(l.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, edges)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        1..=self.m
    }

    /// `Some(t)` when every edge has exactly `t` vertices.
    pub fn uniformity(&self) -> Option<usize> {
        let t = self.edges.first()?.size();
        self.edges.iter().all(|e| e.size() == t).then_some(t)
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v == 0 || v > self.m {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                m: self.m,
            });
        }
        Ok(())
    }

    /// Hypergraph on the same vertex set made of the edges behind `copies`,
    /// in the order given.
    pub fn sub_hypergraph(&self, copies: &[EdgeCopy]) -> Hypergraph {
        Hypergraph {
            m: self.m,
            edges: copies.iter().map(|c| self.edges[c.edge].clone()).collect(),
        }
    }
}

impl fmt::Display for Hypergraph {
    /// `.hg` text form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m {}", self.m)?;
        for e in &self.edges {
            let parts: Vec<String> = e.vertices().iter().map(|v| v.to_string()).collect();
            writeln!(f, "e {}", parts.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for Hypergraph {
    type Err = Error;

    /// Parses the `.hg` format: `m <int>` once, then `e <v1> ... <vt>` per
    /// edge, `#` comment lines and blank lines ignored.
    fn from_str(s: &str) -> Result<Self> {
        let mut m = None;
        let mut edges = Vec::new();
        for (k, raw) in s.lines().enumerate() {
            let line = k + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let mut tokens = text.split_whitespace();
            let err = |message: String| Error::Parse { line, message };
            match tokens.next() {
                Some("m") => {
                    if m.is_some() {
                        return Err(err("duplicate `m` line".into()));
                    }
                    let value = tokens
                        .next()
                        .and_then(|t| t.parse::<u32>().ok())
                        .ok_or_else(|| err("expected `m <integer>`".into()))?;
                    if tokens.next().is_some() {
                        return Err(err("trailing tokens after `m`".into()));
                    }
                    m = Some(value);
                }
                Some("e") => {
                    if m.is_none() {
                        return Err(err("edge before `m` line".into()));
                    }
                    let vs = tokens
                        .map(|t| t.parse::<Vertex>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| err(format!("bad vertex: {e}")))?;
                    let bound = m.expect("checked above");
                    if let Some(v) = vs.iter().find(|&&v| v == 0 || v > bound) {
                        return Err(err(format!("vertex {v} out of range 1..={bound}")));
                    }
                    if vs.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(err("edge vertices must be strictly ascending".into()));
                    }
                    edges.push(Hyperedge::new(vs).map_err(|e| err(e.to_string()))?);
                }
                Some(other) => return Err(err(format!("unknown directive {other:?}"))),
                None => unreachable!(),
            }
        }
        let m = m.ok_or(Error::Parse {
            line: 0,
            message: "missing `m` line".into(),
        })?;
        Hypergraph::new(m, edges)
    }
}

/// `K_{m,t}`: all `t`-subsets of `1..=m` in lexicographic order.
pub fn complete_uniform(m: u32, t: usize) -> Result<Hypergraph> {
    if t < 2 || t > m as usize {
        return Err(Error::InvalidParameters(format!(
            "need 2 <= t <= m, got m = {m}, t = {t}"
        )));
    }
    let mut edges = Vec::new();
    let mut current: Vec<Vertex> = (1..=t as Vertex).collect();
    loop {
        edges.push(Hyperedge(current.clone()));
        // Advance to the next combination in lexicographic order.
        let mut k = t;
        while k > 0 && current[k - 1] == m - (t - k) as Vertex {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        current[k - 1] += 1;
        for j in k..t {
            current[j] = current[j - 1] + 1;
        }
    }
    Hypergraph::new(m, edges)
}

/// Indices of the edges meeting `a`, in edge order.
pub fn incident_edges(h: &Hypergraph, a: &[Vertex]) -> Result<Vec<usize>> {
    for &v in a {
        h.check_vertex(v)?;
    }
    Ok(h.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| a.iter().any(|&v| e.contains(v)))
        .map(|(k, _)| k)
        .collect())
}

/// The star `S_{h,i}`: same vertices, only the edges containing `i`.
pub fn star(h: &Hypergraph, i: Vertex) -> Result<Hypergraph> {
    h.check_vertex(i)?;
    Ok(Hypergraph {
        m: h.m,
        edges: h.edges.iter().filter(|e| e.contains(i)).cloned().collect(),
    })
}

/// A multigraph on labelled vertices. Edges are unordered pairs `(a, b)`
/// with `a < b`; repeats are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    vertex_labels: Vec<Vertex>,
    edges: Vec<(Vertex, Vertex)>,
}

impl Graph {
    pub fn new(mut vertex_labels: Vec<Vertex>, edges: Vec<(Vertex, Vertex)>) -> Result<Self> {
        vertex_labels.sort_unstable();
        vertex_labels.dedup();
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidParameters(format!("self-loop at {a}")));
            }
            for v in [a, b] {
                if vertex_labels.binary_search(&v).is_err() {
                    return Err(Error::InvalidParameters(format!(
                        "edge ({a},{b}) uses unlabelled vertex {v}"
                    )));
                }
            }
            normalized.push((a.min(b), a.max(b)));
        }
        Ok(Graph {
            vertex_labels,
            edges: normalized,
        })
    }

    /// Complete graph on the given labels.
    pub fn complete(labels: Vec<Vertex>) -> Graph {
        let mut labels = labels;
        labels.sort_unstable();
        let mut edges = Vec::new();
        for (k, &a) in labels.iter().enumerate() {
            for &b in &labels[k + 1..] {
                edges.push((a, b));
            }
        }
        Graph {
            vertex_labels: labels,
            edges,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn vertex_labels(&self) -> &[Vertex] {
        &self.vertex_labels
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Multiplicity of every distinct pair.
    pub fn multiplicities(&self) -> BTreeMap<(Vertex, Vertex), usize> {
        let mut out = BTreeMap::new();
        for &e in &self.edges {
            *out.entry(e).or_insert(0) += 1;
        }
        out
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_labels.len();
        if n == 0 {
            return true;
        }
        let idx = |v: Vertex| self.vertex_labels.binary_search(&v).expect("labelled");
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(a, b) in &self.edges {
                let (ia, ib) = (idx(a), idx(b));
                let next = if ia == u {
                    ib
                } else if ib == u {
                    ia
                } else {
                    continue;
                };
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// True iff the graph is one cycle through every labelled vertex.
    pub fn is_hamiltonian_cycle(&self) -> bool {
        self.vertex_count() >= 3
            && self.edges.len() == self.vertex_count()
            && self.vertex_labels.iter().all(|&v| self.degree(v) == 2)
            && self.is_connected()
    }

    /// Vertex order around the cycle starting at the smallest label and
    /// stepping to its smaller neighbour. `None` unless the graph is a
    /// Hamiltonian cycle.
    pub fn cycle_order(&self) -> Option<Vec<Vertex>> {
        if !self.is_hamiltonian_cycle() {
            return None;
        }
        let neighbours = |v: Vertex| -> Vec<Vertex> {
            self.edges
                .iter()
                .filter_map(|&(a, b)| {
                    if a == v {
                        Some(b)
                    } else if b == v {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect()
        };
        let start = self.vertex_labels[0];
        let mut order = vec![start];
        let mut prev = start;
        let mut cur = *neighbours(start).iter().min()?;
        while cur != start {
            order.push(cur);
            let next = neighbours(cur).into_iter().find(|&x| x != prev)?;
            prev = cur;
            cur = next;
        }
        (order.len() == self.vertex_count()).then_some(order)
    }
}

/// Projection `P_{h,i}`: vertex set `1..=m` minus `i`, one pair `e \ {i}` per
/// edge containing `i` (repeats kept). Fails if some such edge does not
/// shrink to a pair.
pub fn projection(h: &Hypergraph, i: Vertex) -> Result<Graph> {
    Ok(projection_with_sources(h, i)?.0)
}

/// The projection together with the index in `h` of the edge behind each
/// projected pair.
pub fn projection_with_sources(h: &Hypergraph, i: Vertex) -> Result<(Graph, Vec<usize>)> {
    h.check_vertex(i)?;
    let mut pairs = Vec::new();
    let mut sources = Vec::new();
    for (k, e) in h.edges.iter().enumerate() {
        if !e.contains(i) {
            continue;
        }
        let rest: Vec<Vertex> = e.vertices().iter().copied().filter(|&v| v != i).collect();
        if rest.len() != 2 {
            return Err(Error::NotUniform(3));
        }
        pairs.push((rest[0], rest[1]));
        sources.push(k);
    }
    let labels = h.vertices().filter(|&v| v != i).collect();
    Ok((Graph::new(labels, pairs)?, sources))
}

/// Smallest anchor `i` such that every edge contains `i` and the projection
/// at `i` is a single cycle through all other vertices. Needs `m >= 4`.
pub fn is_cycle_inducing(h: &Hypergraph) -> Result<Option<Vertex>> {
    if h.edge_count() > 0 && h.uniformity() != Some(3) {
        return Err(Error::NotUniform(3));
    }
    if h.m() < 4 || h.edge_count() != h.m() as usize - 1 {
        return Ok(None);
    }
    for i in h.vertices() {
        if !h.edges.iter().all(|e| e.contains(i)) {
            continue;
        }
        if projection(h, i)?.is_hamiltonian_cycle() {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// All `n·|E|` edge copies sorted by `(edge, copy)`: the column order of
/// every matrix over this source.
pub fn canonical_coordinates(h: &Hypergraph, n: u32) -> Vec<EdgeCopy> {
    (0..h.edge_count())
        .flat_map(|e| (1..=n).map(move |j| EdgeCopy::new(e, j)))
        .collect()
}

/// The `cycle-star` family: anchor `m` joined to the cycle `1, 2, ..., m-1`.
pub fn cycle_star(m: u32) -> Result<Hypergraph> {
    if m < 4 {
        return Err(Error::InvalidParameters(format!(
            "cycle-star needs m >= 4, got {m}"
        )));
    }
    let k = m - 1;
    let edges = (1..=k)
        .map(|j| Hyperedge::new(vec![j, j % k + 1, m]))
        .collect::<Result<Vec<_>>>()?;
    Hypergraph::new(m, edges)
}
