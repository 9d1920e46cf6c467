//! Hamiltonian cycle packings of (copies of) graphs: Walecki's
//! decomposition of odd complete graphs, the hard-coded double covers of
//! `K_4` and `K_6`, the standard decomposition of `K_{2r,2r}`, and a
//! backtracking search for double covers of `K_q` with `q >= 8`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Graph, Vertex};

/// Largest `q` the double-cover search accepts by default.
pub const DEFAULT_SEARCH_CAP: u32 = 10;

/// Hamiltonian cycles drawn from `copies` copies of `base`. Each cycle is
/// a cyclic vertex sequence; the closing edge back to the first vertex is
/// implicit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclePacking {
    pub base: Graph,
    pub copies: u32,
    pub cycles: Vec<Vec<Vertex>>,
}

/// Outcome of [`verify_cycle_packing`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub valid: bool,
    /// Every base edge is used exactly `copies` times (a decomposition).
    pub exact_cover: bool,
    pub diagnostic: Option<String>,
}

impl Verdict {
    fn fail(diagnostic: String) -> Verdict {
        Verdict {
            valid: false,
            exact_cover: false,
            diagnostic: Some(diagnostic),
        }
    }
}

fn pair(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    (a.min(b), a.max(b))
}

/// Edges of a cyclic vertex sequence, closing edge last.
pub fn cycle_edges(cycle: &[Vertex]) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
    (0..cycle.len()).map(move |k| pair(cycle[k], cycle[(k + 1) % cycle.len()]))
}

impl CyclePacking {
    /// Total usage of each base pair across all cycles.
    pub fn usage(&self) -> BTreeMap<(Vertex, Vertex), usize> {
        let mut used = BTreeMap::new();
        for c in &self.cycles {
            for e in cycle_edges(c) {
                *used.entry(e).or_insert(0) += 1;
            }
        }
        used
    }

    /// Re-expresses a packing whose vertices are positions `1..=q` on the
    /// sorted labels of `target`, which must have `q` vertices. The base
    /// becomes `target`.
    pub fn relabel_onto(&self, target: &Graph) -> Result<CyclePacking> {
        let labels = target.vertex_labels();
        if labels.len() != self.base.vertex_count() {
            return Err(Error::InvalidCyclePacking(format!(
                "packing has {} vertices, target graph has {}",
                self.base.vertex_count(),
                labels.len()
            )));
        }
        let map = |v: Vertex| -> Result<Vertex> {
            labels
                .get((v as usize).wrapping_sub(1))
                .copied()
                .ok_or_else(|| {
                    Error::InvalidCyclePacking(format!("position {v} outside 1..={}", labels.len()))
                })
        };
        let cycles = self
            .cycles
            .iter()
            .map(|c| c.iter().map(|&v| map(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(CyclePacking {
            base: target.clone(),
            copies: self.copies,
            cycles,
        })
    }
}

/// Checks that every cycle is Hamiltonian on the base vertex set, uses only
/// base edges, and that no base pair is used more than `copies` times its
/// multiplicity. The diagnostic names the first violation.
pub fn verify_cycle_packing(c: &CyclePacking) -> Verdict {
    let labels = c.base.vertex_labels();
    let mult = c.base.multiplicities();
    for (k, cycle) in c.cycles.iter().enumerate() {
        let mut sorted = cycle.clone();
        sorted.sort_unstable();
        if sorted != labels {
            return Verdict::fail(format!(
                "cycle {} {:?} does not visit every vertex exactly once",
                k + 1,
                cycle
            ));
        }
        if cycle.len() < 3 {
            return Verdict::fail(format!("cycle {} has fewer than 3 vertices", k + 1));
        }
        if let Some((a, b)) = cycle_edges(cycle).find(|e| !mult.contains_key(e)) {
            return Verdict::fail(format!("cycle {} uses non-edge {{{a},{b}}}", k + 1));
        }
    }
    let used = c.usage();
    for (&(a, b), &count) in &used {
        let allowed = mult[&(a, b)] * c.copies as usize;
        if count > allowed {
            return Verdict::fail(format!(
                "edge {{{a},{b}}} used {count} times, allowed {allowed}"
            ));
        }
    }
    let exact_cover = mult
        .iter()
        .all(|(e, &mu)| used.get(e).copied().unwrap_or(0) == mu * c.copies as usize);
    Verdict {
        valid: true,
        exact_cover,
        diagnostic: None,
    }
}

/// Walecki's decomposition of `K_q`, `q` odd, into `(q-1)/2` Hamiltonian
/// cycles. Vertex `q` is the hub; the others zigzag around `Z_{q-1}`.
pub fn walecki_decomposition(q: u32) -> Result<CyclePacking> {
    if q < 3 || q.is_multiple_of(2) {
        return Err(Error::InvalidParameters(format!(
            "Walecki decomposition needs odd q >= 3, got {q}"
        )));
    }
    let ring = q - 1;
    let half = ring / 2;
    let cycles = (0..half)
        .map(|i| {
            let mut cycle = vec![q];
            cycle.push(i + 1);
            for step in 1..=half {
                cycle.push((i + step) % ring + 1);
                if step < half {
                    cycle.push((i + ring - step) % ring + 1);
                }
            }
            cycle
        })
        .collect();
    Ok(CyclePacking {
        base: Graph::complete((1..=q).collect()),
        copies: 1,
        cycles,
    })
}

/// The three Hamiltonian cycles of `K_4`; together they use every edge
/// twice. Any double cover must consist of exactly these three.
pub fn double_k4_decomposition() -> CyclePacking {
    CyclePacking {
        base: Graph::complete(vec![1, 2, 3, 4]),
        copies: 2,
        cycles: vec![vec![1, 2, 3, 4], vec![1, 3, 2, 4], vec![1, 2, 4, 3]],
    }
}

/// The five cycles covering two copies of `K_6`.
pub fn double_k6_decomposition() -> CyclePacking {
    CyclePacking {
        base: Graph::complete((1..=6).collect()),
        copies: 2,
        cycles: vec![
            vec![1, 4, 3, 5, 2, 6],
            vec![1, 5, 6, 4, 2, 3],
            vec![1, 2, 4, 3, 6, 5],
            vec![1, 6, 4, 5, 2, 3],
            vec![1, 4, 5, 3, 6, 2],
        ],
    }
}

/// `K_{2r,2r}` with sides `a_j = j + 1` and `b_j = 2r + j + 1`.
pub fn complete_bipartite(r: u32) -> Graph {
    let side = 2 * r;
    let edges = (0..side)
        .flat_map(|a| (0..side).map(move |b| (a + 1, side + b + 1)))
        .collect();
    Graph::new((1..=2 * side).collect(), edges).expect("valid by construction")
}

/// `r` Hamiltonian cycles decomposing `K_{2r,2r}`. Cycle `s` visits
/// `a_0, b_{2s}, a_1, b_{2s+1}, ...`, so it uses exactly the edges whose
/// index difference `b - a mod 2r` is `2s` or `2s - 1`.
pub fn bipartite_decomposition(r: u32) -> Result<CyclePacking> {
    if r == 0 {
        return Err(Error::InvalidParameters(
            "bipartite decomposition needs r >= 1".into(),
        ));
    }
    let side = 2 * r;
    let cycles = (0..r)
        .map(|s| {
            (0..side)
                .flat_map(|j| [j + 1, side + (2 * s + j) % side + 1])
                .collect()
        })
        .collect();
    Ok(CyclePacking {
        base: complete_bipartite(r),
        copies: 1,
        cycles,
    })
}

/// Double cover of `K_q` (`q` even, `8 <= q <= cap`) by `q - 1`
/// Hamiltonian cycles. Results are memoized for the process.
pub fn tillson_double_decomposition(q: u32) -> Result<CyclePacking> {
    tillson_double_decomposition_with_cap(q, DEFAULT_SEARCH_CAP)
}

pub fn tillson_double_decomposition_with_cap(q: u32, cap: u32) -> Result<CyclePacking> {
    check_tillson_range(q, cap)?;
    static MEMO: OnceLock<Mutex<HashMap<u32, CyclePacking>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = memo.lock().expect("memo lock").get(&q) {
        return Ok(hit.clone());
    }
    let found = search_decomposition(&Graph::complete((1..=q).collect()), 2)?;
    memo.lock().expect("memo lock").insert(q, found.clone());
    Ok(found)
}

/// Like [`tillson_double_decomposition`], consulting and filling a file
/// cache. Cached entries are re-verified before use.
pub fn tillson_double_decomposition_cached(
    q: u32,
    cap: u32,
    cache: &mut CycleCache,
) -> Result<CyclePacking> {
    check_tillson_range(q, cap)?;
    if let Some(cycles) = cache.get(q) {
        let candidate = CyclePacking {
            base: Graph::complete((1..=q).collect()),
            copies: 2,
            cycles: cycles.to_vec(),
        };
        let verdict = verify_cycle_packing(&candidate);
        if verdict.valid && verdict.exact_cover {
            return Ok(candidate);
        }
    }
    let found = tillson_double_decomposition_with_cap(q, cap)?;
    cache.insert(q, found.cycles.clone());
    Ok(found)
}

fn check_tillson_range(q: u32, cap: u32) -> Result<()> {
    if q < 8 || q % 2 == 1 {
        return Err(Error::InvalidParameters(format!(
            "double-cover search needs even q >= 8, got {q} (use the figure decompositions for 4 and 6)"
        )));
    }
    if q > cap {
        return Err(Error::CapExceeded {
            required: q as usize,
            cap: cap as usize,
            flag: "search cap",
        });
    }
    Ok(())
}

/// Deterministic backtracking search for a Hamiltonian decomposition of
/// `copies` copies of `graph`: every base pair is used exactly
/// `copies × multiplicity` times.
///
/// Every cycle starts at the smallest vertex, is oriented so its second
/// vertex is smaller than its last, and cycles appear in non-decreasing
/// lexicographic order. Candidates are tried in ascending vertex order.
pub fn search_decomposition(graph: &Graph, copies: u32) -> Result<CyclePacking> {
    let q = graph.vertex_count();
    if q < 3 {
        return Err(Error::InvalidParameters(format!(
            "Hamiltonian cycles need at least 3 vertices, got {q}"
        )));
    }
    let labels = graph.vertex_labels();
    let index = |v: Vertex| labels.binary_search(&v).expect("labelled");
    let mut cap = vec![vec![0u32; q]; q];
    for &(a, b) in graph.edges() {
        let (i, j) = (index(a), index(b));
        cap[i][j] += copies;
        cap[j][i] += copies;
    }
    let slots = graph.edges().len() * copies as usize;
    if !slots.is_multiple_of(q) {
        return Err(Error::SearchFailed(format!(
            "{slots} edge slots are not a multiple of {q}"
        )));
    }
    let mut search = Search {
        q,
        cap,
        cycles: Vec::new(),
        total: slots / q,
        nodes: 0,
    };
    if !search.next_cycle() {
        return Err(Error::SearchFailed(format!(
            "{copies} copies of the graph on {q} vertices have no Hamiltonian decomposition"
        )));
    }
    Ok(CyclePacking {
        base: graph.clone(),
        copies,
        cycles: search
            .cycles
            .iter()
            .map(|c| c.iter().map(|&i| labels[i]).collect())
            .collect(),
    })
}

struct Search {
    q: usize,
    cap: Vec<Vec<u32>>,
    cycles: Vec<Vec<usize>>,
    total: usize,
    nodes: u64,
}

impl Search {
    fn next_cycle(&mut self) -> bool {
        if self.cycles.len() == self.total {
            return true;
        }
        if !self.remaining_connected() {
            return false;
        }
        let mut path = vec![0usize];
        let mut visited = vec![false; self.q];
        visited[0] = true;
        let lower = self.cycles.last().cloned();
        self.extend(&mut path, &mut visited, lower.as_deref(), true)
    }

    /// `tight` is true while `path` equals the prefix of `lower`.
    fn extend(
        &mut self,
        path: &mut Vec<usize>,
        visited: &mut [bool],
        lower: Option<&[usize]>,
        tight: bool,
    ) -> bool {
        self.nodes += 1;
        let last = *path.last().expect("nonempty");
        if path.len() == self.q {
            if self.cap[last][0] == 0 || path[1] > path[self.q - 1] {
                return false;
            }
            self.take(last, 0);
            self.cycles.push(path.clone());
            if self.next_cycle() {
                return true;
            }
            self.cycles.pop();
            self.give(last, 0);
            return false;
        }
        let floor = match (tight, lower) {
            (true, Some(l)) => l[path.len()],
            _ => 0,
        };
        for next in floor..self.q {
            if visited[next] || self.cap[last][next] == 0 {
                continue;
            }
            self.take(last, next);
            visited[next] = true;
            path.push(next);
            let still_tight = tight && lower.is_some_and(|l| l[path.len() - 1] == next);
            if self.feasible(path, visited) && self.extend(path, visited, lower, still_tight) {
                return true;
            }
            path.pop();
            visited[next] = false;
            self.give(last, next);
        }
        false
    }

    /// Every unvisited vertex still needs two usable edges inside this cycle.
    fn feasible(&self, path: &[usize], visited: &[bool]) -> bool {
        let end = *path.last().expect("nonempty");
        (0..self.q).filter(|&v| !visited[v]).all(|v| {
            let usable = (0..self.q)
                .filter(|&u| u != v && self.cap[v][u] > 0 && (!visited[u] || u == end || u == 0))
                .count();
            usable >= 2
        })
    }

    fn remaining_connected(&self) -> bool {
        let mut seen = vec![false; self.q];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for (v, s) in seen.iter_mut().enumerate() {
                if !*s && self.cap[u][v] > 0 {
                    *s = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn take(&mut self, a: usize, b: usize) {
        self.cap[a][b] -= 1;
        self.cap[b][a] -= 1;
    }

    fn give(&mut self, a: usize, b: usize) {
        self.cap[a][b] += 1;
        self.cap[b][a] += 1;
    }
}

/// Persistent search results, one line per entry:
/// `q=<int> cycles=<v,v,...;v,v,...>`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleCache {
    entries: BTreeMap<u32, Vec<Vec<Vertex>>>,
}

impl CycleCache {
    pub fn parse(text: &str) -> Result<CycleCache> {
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let (q, cycles) =
                parse_cache_line(text).map_err(|message| Error::Parse { line, message })?;
            entries.insert(q, cycles);
        }
        Ok(CycleCache { entries })
    }

    /// A missing file is an empty cache.
    pub fn load(path: &Path) -> Result<CycleCache> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::parse(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(CycleCache::default()),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string())?;
        Ok(())
    }

    pub fn get(&self, q: u32) -> Option<&[Vec<Vertex>]> {
        self.entries.get(&q).map(|c| c.as_slice())
    }

    pub fn insert(&mut self, q: u32, cycles: Vec<Vec<Vertex>>) {
        self.entries.insert(q, cycles);
    }
}

fn parse_cache_line(text: &str) -> std::result::Result<(u32, Vec<Vec<Vertex>>), String> {
    let mut q = None;
    let mut cycles = None;
    for token in text.split_whitespace() {
        if let Some(v) = token.strip_prefix("q=") {
            q = Some(v.parse::<u32>().map_err(|e| format!("bad q: {e}"))?);
        } else if let Some(v) = token.strip_prefix("cycles=") {
            cycles = Some(parse_cycle_list(v)?);
        } else {
            return Err(format!("unexpected token {token:?}"));
        }
    }
    match (q, cycles) {
        (Some(q), Some(c)) => Ok((q, c)),
        _ => Err("expected `q=<int> cycles=<lists>`".into()),
    }
}

/// Parses `1,2,3;1,3,2` into vertex lists.
pub fn parse_cycle_list(text: &str) -> std::result::Result<Vec<Vec<Vertex>>, String> {
    text.split(';')
        .filter(|c| !c.is_empty())
        .map(|c| {
            c.split(',')
                .map(|v| {
                    v.parse::<Vertex>()
                        .map_err(|e| format!("bad vertex {v:?}: {e}"))
                })
                .collect()
        })
        .collect()
}

pub fn format_cycle_list(cycles: &[Vec<Vertex>]) -> String {
    cycles
        .iter()
        .map(|c| {
            c.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join(";")
}

impl std::fmt::Display for CycleCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut out = String::new();
        for (q, cycles) in &self.entries {
            let _ = writeln!(out, "q={q} cycles={}", format_cycle_list(cycles));
        }
        f.write_str(&out)
    }
}
