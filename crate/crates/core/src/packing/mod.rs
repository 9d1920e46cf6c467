//! Packings of fictitious edge copies into sub-hypergraphs.
//!
//! Two constructions live here. The star packing of `K_{m,t}` uses
//! blocklength `t` and gives the copy `e(l)` of `e = {v_1 < ... < v_t}` to
//! the star anchored at `v_l`. The 3-uniform assembler turns Hamiltonian
//! cycle packings of projections into cycle-inducing parts, spending the
//! copies of each edge anchor by anchor in ascending anchor order.

mod directive;
mod hamiltonian;

pub use directive::{anchor_request, CycleSource, ResolveOptions};

pub use hamiltonian::{
    bipartite_decomposition, complete_bipartite, cycle_edges, double_k4_decomposition,
    double_k6_decomposition, format_cycle_list, parse_cycle_list, search_decomposition,
    tillson_double_decomposition, tillson_double_decomposition_cached,
    tillson_double_decomposition_with_cap, verify_cycle_packing, walecki_decomposition, CycleCache,
    CyclePacking, Verdict, DEFAULT_SEARCH_CAP,
};

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{
    complete_uniform, projection_with_sources, EdgeCopy, Hyperedge, Hypergraph, Vertex,
};

/// Identifies the sub-hypergraph a part stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartLabel {
    pub anchor: Vertex,
    /// 1-based cycle index for assembled 3-uniform parts.
    pub cycle: Option<u32>,
}

impl fmt::Display for PartLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.cycle {
            Some(c) => write!(f, "anchor={} cycle={}", self.anchor, c),
            None => write!(f, "anchor={}", self.anchor),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanPart {
    pub label: PartLabel,
    /// Sorted in canonical `(edge, copy)` order.
    pub copies: Vec<EdgeCopy>,
}

/// Disjoint sets of edge copies of `hypergraph` at blocklength `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingPlan {
    pub hypergraph: Hypergraph,
    pub n: u32,
    pub parts: Vec<PlanPart>,
}

impl PackingPlan {
    /// The hypergraph made of one part's edges, in the part's copy order.
    pub fn part_hypergraph(&self, part: usize) -> Hypergraph {
        self.hypergraph.sub_hypergraph(&self.parts[part].copies)
    }
}

/// Checks that parts are pairwise disjoint and every copy is in range.
/// `exact_cover` reports whether every copy of every edge is used.
pub fn verify_packing_plan(p: &PackingPlan) -> Verdict {
    let fail = |d: String| Verdict {
        valid: false,
        exact_cover: false,
        diagnostic: Some(d),
    };
    let edges = p.hypergraph.edge_count();
    let mut seen = HashSet::new();
    for part in &p.parts {
        for c in &part.copies {
            if c.edge >= edges {
                return fail(format!(
                    "part {}: edge index {} out of range",
                    part.label, c.edge
                ));
            }
            if c.copy == 0 || c.copy > p.n {
                return fail(format!(
                    "part {}: copy {} outside 1..={}",
                    part.label, c, p.n
                ));
            }
            if !seen.insert(*c) {
                return fail(format!(
                    "copy {c} assigned twice (again in part {})",
                    part.label
                ));
            }
        }
    }
    Verdict {
        valid: true,
        exact_cover: seen.len() == edges * p.n as usize,
        diagnostic: None,
    }
}

/// Star packing of `K_{m,t}` at blocklength `t`: part `v` receives one copy
/// of every edge containing `v`.
pub fn star_packing_kmt(m: u32, t: u32) -> Result<PackingPlan> {
    let h = complete_uniform(m, t as usize)?;
    let mut parts: Vec<PlanPart> = (1..=m)
        .map(|v| PlanPart {
            label: PartLabel {
                anchor: v,
                cycle: None,
            },
            copies: Vec::new(),
        })
        .collect();
    for (k, e) in h.edges().iter().enumerate() {
        for (l, &v) in e.vertices().iter().enumerate() {
            parts[v as usize - 1]
                .copies
                .push(EdgeCopy::new(k, l as u32 + 1));
        }
    }
    Ok(PackingPlan {
        hypergraph: h,
        n: t,
        parts,
    })
}

/// Hollow kite on `m = 4r + 1` vertices: every `{i, j, k}` with
/// `{i, j} ⊆ V_1 = {1..2r+1}` and `k ∈ V_2 = {2r+2..4r+1}`, in
/// lexicographic order.
pub fn hollow_kite(r: u32) -> Result<Hypergraph> {
    if r == 0 {
        return Err(Error::InvalidParameters("hollow kite needs r >= 1".into()));
    }
    let m = 4 * r + 1;
    let v1 = 2 * r + 1;
    let mut edges = Vec::new();
    for i in 1..=v1 {
        for j in i + 1..=v1 {
            for k in v1 + 1..=m {
                edges.push(Hyperedge::new(vec![i, j, k])?);
            }
        }
    }
    Hypergraph::new(m, edges)
}

/// One anchor of a 3-uniform packing: a Hamiltonian packing of
/// `packing.copies` copies of the projection at `anchor`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnchorRequest {
    pub anchor: Vertex,
    pub packing: CyclePacking,
}

/// Edge reuse numbers `t_e = Σ_{i∈A} k_i [i ∈ e]`; the blocklength is
/// their maximum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeReuseTable {
    pub reuse: Vec<u32>,
}

impl EdgeReuseTable {
    pub fn new(h: &Hypergraph, copies_by_anchor: &BTreeMap<Vertex, u32>) -> EdgeReuseTable {
        EdgeReuseTable {
            reuse: h
                .edges()
                .iter()
                .map(|e| {
                    copies_by_anchor
                        .iter()
                        .filter(|(&a, _)| e.contains(a))
                        .map(|(_, &k)| k)
                        .sum()
                })
                .collect(),
        }
    }

    /// `max_e t_e`, at least 1.
    pub fn n(&self) -> u32 {
        self.reuse.iter().copied().max().unwrap_or(0).max(1)
    }
}

/// Builds the fictitious-copy packing for a 3-uniform hypergraph.
///
/// Anchors are processed in ascending order. For an edge `e` and anchor
/// `u`, the copies reserved are `offset + 1 ..= offset + k_u` where
/// `offset` sums `k` over the anchors of `e` below `u`; the `s`-th cycle of
/// `u` that passes through `e` takes copy `offset + s`. Each (anchor, cycle)
/// pair becomes one cycle-inducing part.
pub fn assemble_3unif_packing(h: &Hypergraph, requests: &[AnchorRequest]) -> Result<PackingPlan> {
    if h.uniformity() != Some(3) {
        return Err(Error::NotUniform(3));
    }
    let mut sorted: Vec<&AnchorRequest> = requests.iter().collect();
    sorted.sort_by_key(|r| r.anchor);
    if let Some(w) = sorted.windows(2).find(|w| w[0].anchor == w[1].anchor) {
        return Err(Error::InvalidParameters(format!(
            "anchor {} requested twice",
            w[0].anchor
        )));
    }
    let mut copies_by_anchor = BTreeMap::new();
    for r in &sorted {
        h.check_vertex(r.anchor)?;
        if r.packing.copies == 0 {
            return Err(Error::InvalidParameters(format!(
                "anchor {}: copy count must be positive",
                r.anchor
            )));
        }
        copies_by_anchor.insert(r.anchor, r.packing.copies);
    }
    let table = EdgeReuseTable::new(h, &copies_by_anchor);
    let n = table.n();

    let mut parts = Vec::new();
    for r in &sorted {
        let (graph, sources) = projection_with_sources(h, r.anchor)?;
        if graph != r.packing.base {
            return Err(Error::InvalidCyclePacking(format!(
                "anchor {}: packing base is not the projection at the anchor",
                r.anchor
            )));
        }
        let verdict = verify_cycle_packing(&r.packing);
        if !verdict.valid {
            return Err(Error::InvalidCyclePacking(format!(
                "anchor {}: {}",
                r.anchor,
                verdict.diagnostic.unwrap_or_default()
            )));
        }
        let k = r.packing.copies;
        // Hyperedges behind each projected pair, in edge order.
        let mut behind: BTreeMap<(Vertex, Vertex), Vec<usize>> = BTreeMap::new();
        for (pair, &edge) in graph.edges().iter().zip(&sources) {
            behind.entry(*pair).or_default().push(edge);
        }
        let mut used: BTreeMap<usize, u32> = BTreeMap::new();
        for (j, cycle) in r.packing.cycles.iter().enumerate() {
            let mut copies = Vec::with_capacity(cycle.len());
            for pair in cycle_edges(cycle) {
                let edge = *behind[&pair]
                    .iter()
                    .find(|e| used.get(e).copied().unwrap_or(0) < k)
                    .expect("usage bounded by verify_cycle_packing");
                let count = used.entry(edge).or_insert(0);
                *count += 1;
                let offset: u32 = copies_by_anchor
                    .range(..r.anchor)
                    .filter(|(&a, _)| h.edges()[edge].contains(a))
                    .map(|(_, &k)| k)
                    .sum();
                copies.push(EdgeCopy::new(edge, offset + *count));
            }
            copies.sort_unstable();
            parts.push(PlanPart {
                label: PartLabel {
                    anchor: r.anchor,
                    cycle: Some(j as u32 + 1),
                },
                copies,
            });
        }
    }
    let plan = PackingPlan {
        hypergraph: h.clone(),
        n,
        parts,
    };
    let verdict = verify_packing_plan(&plan);
    if !verdict.valid {
        return Err(Error::InvalidPlan(verdict.diagnostic.unwrap_or_default()));
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::binomial;
    use crate::hypergraph::{incident_edges, is_cycle_inducing, projection, star};

    #[test]
    fn star_packing_example_from_assignment_rule() {
        let plan = star_packing_kmt(4, 3).unwrap();
        assert_eq!(plan.n, 3);
        // Edge {1,2,4} is index 1 in lexicographic order.
        let owner = |c: EdgeCopy| {
            plan.parts
                .iter()
                .find(|p| p.copies.contains(&c))
                .map(|p| p.label.anchor)
        };
        assert_eq!(owner(EdgeCopy::new(1, 1)), Some(1));
        assert_eq!(owner(EdgeCopy::new(1, 2)), Some(2));
        assert_eq!(owner(EdgeCopy::new(1, 3)), Some(4));
    }

    #[test]
    fn star_packing_parts_are_stars() {
        for m in 2..=7u32 {
            for t in 2..=m {
                let plan = star_packing_kmt(m, t).unwrap();
                let v = verify_packing_plan(&plan);
                assert!(v.valid && v.exact_cover, "{m},{t}: {:?}", v.diagnostic);
                let total: usize = plan.parts.iter().map(|p| p.copies.len()).sum();
                assert_eq!(total as u64, t as u64 * binomial(m as u64, t as u64));
                for part in &plan.parts {
                    assert_eq!(
                        part.copies.len() as u64,
                        binomial(m as u64 - 1, t as u64 - 1)
                    );
                    let edges: Vec<usize> = part.copies.iter().map(|c| c.edge).collect();
                    assert_eq!(
                        edges,
                        incident_edges(&plan.hypergraph, &[part.label.anchor]).unwrap()
                    );
                }
            }
        }
        assert!(star_packing_kmt(3, 4).is_err());
    }

    #[test]
    fn verify_plan_flags_overlap_and_range() {
        let mut plan = star_packing_kmt(4, 3).unwrap();
        let first = plan.parts[0].copies[0];
        plan.parts[1].copies.push(first);
        let v = verify_packing_plan(&plan);
        assert!(!v.valid);
        assert!(v.diagnostic.unwrap().contains("twice"));

        let mut plan = star_packing_kmt(4, 3).unwrap();
        plan.parts[0].copies.push(EdgeCopy::new(0, 4));
        assert!(!verify_packing_plan(&plan).valid);

        let plan = star_packing_kmt(5, 3).unwrap();
        assert!(verify_packing_plan(&plan).valid);
    }

    #[test]
    fn hollow_kite_shape() {
        let h = hollow_kite(1).unwrap();
        assert_eq!(h.m(), 5);
        assert_eq!(h.edge_count(), 6);
        for r in 1..=3u32 {
            let h = hollow_kite(r).unwrap();
            let v1 = 2 * r + 1;
            assert_eq!(h.edge_count() as u64, binomial(v1 as u64, 2) * 2 * r as u64);
            for e in h.edges() {
                assert_eq!(e.vertices().iter().filter(|&&v| v <= v1).count(), 2);
            }
            for i in 1..=v1 {
                let p = projection(&star(&h, i).unwrap(), i).unwrap();
                let a: Vec<Vertex> = (1..=v1).filter(|&v| v != i).collect();
                let expected: Vec<(Vertex, Vertex)> = a
                    .iter()
                    .flat_map(|&x| (v1 + 1..=4 * r + 1).map(move |y| (x, y)))
                    .collect();
                let mut got = p.edges().to_vec();
                got.sort_unstable();
                assert_eq!(got, expected);
            }
        }
    }

    fn walecki_requests(h: &Hypergraph) -> Vec<AnchorRequest> {
        (1..=h.m())
            .map(|i| {
                let p = projection(h, i).unwrap();
                let w = walecki_decomposition(p.vertex_count() as u32).unwrap();
                AnchorRequest {
                    anchor: i,
                    packing: w.relabel_onto(&p).unwrap(),
                }
            })
            .collect()
    }

    #[test]
    fn assembler_single_anchor_triangle() {
        let h = complete_uniform(4, 3).unwrap();
        let p = projection(&h, 4).unwrap();
        let req = AnchorRequest {
            anchor: 4,
            packing: walecki_decomposition(3).unwrap().relabel_onto(&p).unwrap(),
        };
        let plan = assemble_3unif_packing(&h, &[req]).unwrap();
        assert_eq!(plan.n, 1);
        assert_eq!(plan.parts.len(), 1);
        let edges: Vec<usize> = plan.parts[0].copies.iter().map(|c| c.edge).collect();
        assert_eq!(edges, incident_edges(&h, &[4]).unwrap());
        assert_eq!(
            is_cycle_inducing(&plan.part_hypergraph(0)).unwrap(),
            Some(4)
        );
    }

    #[test]
    fn assembler_complete_even_uses_three_copies() {
        for m in [4u32, 6, 8] {
            let h = complete_uniform(m, 3).unwrap();
            let requests = walecki_requests(&h);
            let plan = assemble_3unif_packing(&h, &requests).unwrap();
            assert_eq!(plan.n, 3);
            let v = verify_packing_plan(&plan);
            assert!(v.valid && v.exact_cover);
            for (k, part) in plan.parts.iter().enumerate() {
                assert_eq!(
                    is_cycle_inducing(&plan.part_hypergraph(k)).unwrap(),
                    Some(part.label.anchor)
                );
            }
            let p_total: usize = requests.iter().map(|r| r.packing.cycles.len()).sum();
            let copies: usize = plan.parts.iter().map(|p| p.copies.len()).sum();
            assert_eq!(copies, p_total * (m as usize - 1));
        }
    }

    #[test]
    fn assembler_respects_reuse_numbers() {
        let h = hollow_kite(2).unwrap();
        let requests: Vec<AnchorRequest> = (1..=5)
            .map(|i| {
                let p = projection(&h, i).unwrap();
                AnchorRequest {
                    anchor: i,
                    packing: bipartite_decomposition(2)
                        .unwrap()
                        .relabel_onto(&p)
                        .unwrap(),
                }
            })
            .collect();
        let plan = assemble_3unif_packing(&h, &requests).unwrap();
        assert_eq!(plan.n, 2);
        let copies = requests
            .iter()
            .map(|r| (r.anchor, r.packing.copies))
            .collect();
        let table = EdgeReuseTable::new(&h, &copies);
        assert!(table.reuse.iter().all(|&t| t == 2));
        let mut max_copy = vec![0u32; h.edge_count()];
        for part in &plan.parts {
            for c in &part.copies {
                max_copy[c.edge] = max_copy[c.edge].max(c.copy);
            }
        }
        assert_eq!(max_copy, table.reuse);
        for (k, part) in plan.parts.iter().enumerate() {
            assert_eq!(
                is_cycle_inducing(&plan.part_hypergraph(k)).unwrap(),
                Some(part.label.anchor)
            );
        }
    }

    #[test]
    fn assembler_handles_double_covers_and_repeated_edges() {
        // Two copies of K_4 at anchor 5 with the figure cycles.
        let h = complete_uniform(5, 3).unwrap();
        let p = projection(&h, 5).unwrap();
        let req = AnchorRequest {
            anchor: 5,
            packing: double_k4_decomposition().relabel_onto(&p).unwrap(),
        };
        let plan = assemble_3unif_packing(&h, &[req]).unwrap();
        assert_eq!(plan.n, 2);
        assert_eq!(plan.parts.len(), 3);

        // Repeated hyperedges: two copies of {1,2,4} and one copy each of
        // the other triangle edges with anchor 4; a single copy (k = 1)
        // of the projection holds the pair {1,2} twice.
        let h = Hypergraph::from_lists(
            4,
            &[
                &[1, 2, 4],
                &[2, 3, 4],
                &[1, 3, 4],
                &[1, 2, 4],
                &[2, 3, 4],
                &[1, 3, 4],
            ],
        )
        .unwrap();
        let p = projection(&h, 4).unwrap();
        let req = AnchorRequest {
            anchor: 4,
            packing: CyclePacking {
                base: p,
                copies: 1,
                cycles: vec![vec![1, 2, 3], vec![1, 2, 3]],
            },
        };
        let plan = assemble_3unif_packing(&h, &[req]).unwrap();
        assert_eq!(plan.n, 1);
        assert!(verify_packing_plan(&plan).exact_cover);
    }

    #[test]
    fn assembler_rejects_bad_requests() {
        let h = complete_uniform(4, 3).unwrap();
        let p = projection(&h, 4).unwrap();
        let tri = walecki_decomposition(3).unwrap().relabel_onto(&p).unwrap();
        let dup = vec![
            AnchorRequest {
                anchor: 4,
                packing: tri.clone(),
            },
            AnchorRequest {
                anchor: 4,
                packing: tri.clone(),
            },
        ];
        assert!(assemble_3unif_packing(&h, &dup).is_err());

        let mut over = tri.clone();
        over.cycles.push(over.cycles[0].clone());
        assert!(matches!(
            assemble_3unif_packing(
                &h,
                &[AnchorRequest {
                    anchor: 4,
                    packing: over
                }]
            ),
            Err(Error::InvalidCyclePacking(_))
        ));

        // Labels {1,2,3} while the projection at 1 lives on {2,3,4}.
        let wrong_base = walecki_decomposition(3).unwrap();
        assert!(assemble_3unif_packing(
            &h,
            &[AnchorRequest {
                anchor: 1,
                packing: wrong_base
            }]
        )
        .is_err());

        let k44 = complete_uniform(4, 4).unwrap();
        assert!(matches!(
            assemble_3unif_packing(&k44, &[]),
            Err(Error::NotUniform(3))
        ));
    }
}
