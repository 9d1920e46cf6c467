use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use hyperkey::audit::rank_audit;
use hyperkey::capacity::{
    capacity_kmt, closed_form_uniform, csk_brute_force, is_type_s, partition_info, Partition,
};
use hyperkey::gf2::{in_span, BitMatrix};
use hyperkey::hypergraph::{
    complete_uniform, incident_edges, is_cycle_inducing, projection, star, Hypergraph, Vertex,
};
use hyperkey::packing::{
    anchor_request, assemble_3unif_packing, hollow_kite, star_packing_kmt, CycleSource,
    ResolveOptions,
};
use hyperkey::protocol::{
    check_omniscience, default_reference, party_knowledge, run_3unif_pipeline, run_kmt_pipeline,
    star_key, star_scheme,
};
use hyperkey::source::{enumerate_all_with_cap, party_view, sample, view_coordinates};
use hyperkey::Rate;

fn choose(n: u32, k: u32) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) as usize / (i as usize + 1))
}

fn arb_hypergraph(max_m: u32, max_edges: usize) -> impl Strategy<Value = Hypergraph> {
    (3..=max_m).prop_flat_map(move |m| {
        let edge = proptest::sample::subsequence((1..=m).collect::<Vec<_>>(), 2..=m as usize);
        proptest::collection::vec(edge, 1..=max_edges).prop_map(move |lists| {
            let refs: Vec<&[Vertex]> = lists.iter().map(Vec::as_slice).collect();
            Hypergraph::from_lists(m, &refs).unwrap()
        })
    })
}

fn arb_3unif(max_m: u32) -> impl Strategy<Value = Hypergraph> {
    (4..=max_m).prop_flat_map(|m| {
        let edge = proptest::sample::subsequence((1..=m).collect::<Vec<_>>(), 3);
        proptest::collection::vec(edge, 1..=12).prop_map(move |lists| {
            let refs: Vec<&[Vertex]> = lists.iter().map(Vec::as_slice).collect();
            Hypergraph::from_lists(m, &refs).unwrap()
        })
    })
}

/// Brute force: some vertex lies in all `m - 1` edges and the leftover
/// pairs form one cycle through every other vertex.
fn cycle_inducing_oracle(h: &Hypergraph) -> Option<Vertex> {
    let m = h.m();
    if h.uniformity() != Some(3) || h.edge_count() != m as usize - 1 || m < 4 {
        return None;
    }
    (1..=m).find(|&a| {
        let mut adj: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
        for e in h.edges() {
            if !e.contains(a) {
                return false;
            }
            let rest: Vec<Vertex> = e.vertices().iter().copied().filter(|&v| v != a).collect();
            adj.entry(rest[0]).or_default().push(rest[1]);
            adj.entry(rest[1]).or_default().push(rest[0]);
        }
        if adj.len() != m as usize - 1 || adj.values().any(|n| n.len() != 2) {
            return false;
        }
        let start = *adj.keys().next().unwrap();
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &adj[&u] {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen.len() == adj.len()
    })
}

#[test]
fn kmt_star_counts() {
    for m in 2..=8u32 {
        for t in 2..=m {
            let h = complete_uniform(m, t as usize).unwrap();
            for i in 1..=m {
                let inc = incident_edges(&h, &[i]).unwrap();
                assert_eq!(inc.len(), choose(m - 1, t - 1));
                for j in (1..=m).filter(|&j| j != i) {
                    let without_j = inc.iter().filter(|&&e| !h.edges()[e].contains(j)).count();
                    assert_eq!(without_j, choose(m - 1, t - 1) - choose(m - 2, t - 2));
                }
            }
        }
    }
}

#[test]
fn kmt_capacity_closed_form_matches_brute_force() {
    for m in 2..=8u32 {
        for t in 2..=m {
            let h = complete_uniform(m, t as usize).unwrap();
            assert_eq!(
                capacity_kmt(m, t).unwrap(),
                csk_brute_force(&h).unwrap().0,
                "({m},{t})"
            );
        }
    }
}

#[test]
fn star_packing_covers_every_copy_once() {
    for m in 2..=8u32 {
        for t in 2..=m {
            let plan = star_packing_kmt(m, t).unwrap();
            let h = &plan.hypergraph;
            let mut all: Vec<(usize, u32)> = plan
                .parts
                .iter()
                .flat_map(|p| p.copies.iter().map(|c| (c.edge, c.copy)))
                .collect();
            assert_eq!(all.len(), t as usize * choose(m, t));
            all.sort_unstable();
            all.dedup();
            assert_eq!(
                all.len(),
                t as usize * choose(m, t),
                "({m},{t}) repeats a copy"
            );
            for part in &plan.parts {
                let i = part.label.anchor;
                let edges: Vec<usize> = part.copies.iter().map(|c| c.edge).collect();
                assert_eq!(
                    edges,
                    incident_edges(h, &[i]).unwrap(),
                    "({m},{t}) part {i}"
                );
            }
        }
    }
}

#[test]
fn star_schemes_are_single_sender_with_expected_rows() {
    for m in 3..=7u32 {
        for t in 2..=m - 1 {
            for i in 1..=m {
                let j = default_reference(i);
                let s = star_scheme(m, t, i, j).unwrap();
                assert_eq!(s.len(), choose(m - 1, t - 1) - choose(m - 2, t - 2));
                assert!(s.senders().iter().all(|&v| v == i));
                let k = star_key(m, t, i, j).unwrap();
                let r = rank_audit(&s, &k).unwrap();
                assert_eq!(r.verdicts(), (true, true, true), "({m},{t}) anchor {i}");
                assert!(check_omniscience(&s).unwrap().achieved);
            }
        }
    }
}

#[test]
fn kmt_pipeline_reaches_capacity_for_small_sizes() {
    for m in 2..=7u32 {
        for t in 2..=m {
            let p = run_kmt_pipeline(m, t).unwrap();
            let r = rank_audit(&p.scheme, &p.key).unwrap();
            assert_eq!(r.verdicts(), (true, true, true), "({m},{t})");
            assert_eq!(r.rate, capacity_kmt(m, t).unwrap(), "({m},{t})");
            assert_eq!(r.rate, Rate::new(r.key_bits as i64, i64::from(r.n)));
        }
    }
}

fn plan_for(
    h: &Hypergraph,
    anchors: &[Vertex],
    src: CycleSource,
) -> hyperkey::packing::PackingPlan {
    let mut opts = ResolveOptions::default();
    let requests: Vec<_> = anchors
        .iter()
        .map(|&a| anchor_request(h, a, &src, None, &mut opts).unwrap().0)
        .collect();
    assemble_3unif_packing(h, &requests).unwrap()
}

#[test]
fn assembled_parts_are_cycle_inducing_and_fit_blocklength() {
    let all = |m: u32| (1..=m).collect::<Vec<_>>();
    for (h, anchors, src) in [
        (complete_uniform(5, 3).unwrap(), all(5), CycleSource::Figure),
        (
            complete_uniform(6, 3).unwrap(),
            all(6),
            CycleSource::Walecki,
        ),
        (complete_uniform(7, 3).unwrap(), all(7), CycleSource::Auto),
        (hollow_kite(1).unwrap(), all(3), CycleSource::Auto),
        (hollow_kite(2).unwrap(), all(5), CycleSource::Auto),
    ] {
        let plan = plan_for(&h, &anchors, src);
        let m = h.m() as usize;
        let total: usize = plan.parts.iter().map(|p| p.copies.len()).sum();
        let expected: usize = plan
            .parts
            .iter()
            .map(|p| {
                let deg = projection(&h, p.label.anchor).unwrap().vertex_count();
                assert!(deg < m);
                deg
            })
            .sum();
        assert_eq!(total, expected);
        for (l, part) in plan.parts.iter().enumerate() {
            assert_eq!(
                is_cycle_inducing(&plan.part_hypergraph(l)).unwrap(),
                Some(part.label.anchor)
            );
            assert!(part.copies.iter().all(|c| c.copy >= 1 && c.copy <= plan.n));
        }
    }
}

#[test]
fn three_unif_pipeline_keys_are_perfect() {
    let h = complete_uniform(6, 3).unwrap();
    let mut opts = ResolveOptions::default();
    let requests: Vec<_> = h
        .vertices()
        .map(|a| {
            anchor_request(&h, a, &CycleSource::Walecki, None, &mut opts)
                .unwrap()
                .0
        })
        .collect();
    let p = run_3unif_pipeline(&h, &requests).unwrap();
    for i in h.vertices() {
        let known = party_knowledge(&p.scheme, i).unwrap();
        assert!(
            p.key.rows().rows().iter().all(|r| known.contains(r)),
            "party {i}"
        );
    }
    assert!(rank_audit(&p.scheme, &p.key).unwrap().passed());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn star_keeps_incident_edges_in_order(h in arb_hypergraph(6, 10), i in 1u32..=6) {
        prop_assume!(i <= h.m());
        let s = star(&h, i).unwrap();
        let picked: Vec<_> = incident_edges(&h, &[i]).unwrap().into_iter().map(|e| h.edges()[e].clone()).collect();
        prop_assert_eq!(s.edges(), picked.as_slice());
    }

    #[test]
    fn projection_keeps_one_pair_per_star_edge(h in arb_3unif(7), i in 1u32..=7) {
        prop_assume!(i <= h.m());
        let inc = incident_edges(&h, &[i]).unwrap();
        prop_assume!(!inc.is_empty());
        let p = projection(&star(&h, i).unwrap(), i).unwrap();
        prop_assert_eq!(p.edges().len(), inc.len());
    }

    #[test]
    fn cycle_inducing_matches_brute_force(h in arb_3unif(8)) {
        prop_assert_eq!(is_cycle_inducing(&h).unwrap(), cycle_inducing_oracle(&h));
    }

    #[test]
    fn party_views_hold_exactly_incident_coordinates(h in arb_hypergraph(6, 8), n in 1u32..=3) {
        let r = sample(&h, n, 1).unwrap();
        for i in h.vertices() {
            let coords = view_coordinates(&h, n, i).unwrap();
            for c in 0..n as usize * h.edge_count() {
                let edge = c / n as usize;
                prop_assert_eq!(coords.contains(&c), h.edges()[edge].contains(i));
            }
            let v = party_view(&r, i).unwrap();
            for (k, &c) in v.coordinates.iter().enumerate() {
                prop_assert_eq!(v.bits.get(k), r.bits.get(c));
            }
        }
    }

    #[test]
    fn enumeration_is_complete_and_distinct(h in arb_hypergraph(4, 6), n in 1u32..=2) {
        let width = n as usize * h.edge_count();
        prop_assume!(width <= 12);
        let seen: BTreeSet<String> = enumerate_all_with_cap(&h, n, 16)
            .unwrap()
            .map(|r| r.bits.to_string())
            .collect();
        prop_assert_eq!(seen.len(), 1usize << width);
    }

    #[test]
    fn capacity_triangle_for_uniform(h in arb_3unif(6)) {
        let (csk, _) = csk_brute_force(&h).unwrap();
        let single = partition_info(&h, &Partition::singletons(h.m())).unwrap();
        prop_assert!(csk <= single);
        prop_assert_eq!(closed_form_uniform(&h).unwrap(), single);
        prop_assert_eq!(is_type_s(&h).unwrap(), csk == single);
    }

    #[test]
    fn partition_info_invariant_under_relabelling(
        h in arb_hypergraph(6, 8),
        perm_seed in any::<u64>(),
        labels in proptest::collection::vec(0usize..3, 6),
    ) {
        let m = h.m() as usize;
        let mut perm: Vec<Vertex> = (1..=h.m()).collect();
        // Fisher-Yates from the seed.
        let mut s = perm_seed;
        for k in (1..m).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(k, (s >> 33) as usize % (k + 1));
        }
        let map = |v: Vertex| perm[v as usize - 1];
        let lists: Vec<Vec<Vertex>> = h.edges().iter().map(|e| e.vertices().iter().map(|&v| map(v)).collect()).collect();
        let refs: Vec<&[Vertex]> = lists.iter().map(Vec::as_slice).collect();
        let g = Hypergraph::from_lists(h.m(), &refs).unwrap();
        let mut blocks: BTreeMap<usize, Vec<Vertex>> = BTreeMap::new();
        for v in 1..=h.m() {
            blocks.entry(labels[v as usize - 1]).or_default().push(v);
        }
        prop_assume!(blocks.len() >= 2);
        let p = Partition::new(blocks.values().cloned().collect()).unwrap();
        let mut reversed: Vec<Vec<Vertex>> = blocks.values().cloned().collect();
        reversed.reverse();
        let q = Partition::new(reversed).unwrap();
        let moved = Partition::new(blocks.values().map(|b| b.iter().map(|&v| map(v)).collect()).collect()).unwrap();
        let base = partition_info(&h, &p).unwrap();
        prop_assert_eq!(partition_info(&h, &q).unwrap(), base);
        prop_assert_eq!(partition_info(&g, &moved).unwrap(), base);
    }

    #[test]
    fn view_rows_span_their_own_coordinates(h in arb_hypergraph(5, 6)) {
        // Sanity link between the source and linear-algebra layers.
        let n = 1;
        let width = h.edge_count();
        for i in h.vertices() {
            let coords = view_coordinates(&h, n, i).unwrap();
            let rows = coords.iter().map(|&c| hyperkey::gf2::BitVector::unit(width, c)).collect();
            let m = BitMatrix::from_rows(width, rows).unwrap();
            prop_assert_eq!(m.rank(), coords.len());
            for c in 0..width {
                let unit = hyperkey::gf2::BitVector::unit(width, c);
                prop_assert_eq!(in_span(&m, &unit).unwrap(), coords.contains(&c));
            }
        }
    }
}
