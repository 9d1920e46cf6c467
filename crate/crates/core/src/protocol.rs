//! Linear one-shot communication schemes and their key extractors.
//!
//! Every matrix here has one column per canonical edge copy of
//! `(hypergraph, n)`. A scheme row is a parity broadcast by a single sender
//! and may only touch copies of edges the sender observes.
//!
//! Parties are modelled as linear decoders: a coordinate is recoverable by
//! party `i` exactly when its unit vector lies in the span of the broadcast
//! rows and the unit vectors of `i`'s own coordinates. With independent
//! uniform coordinates this is equivalent to recovery with probability one,
//! which the exhaustive audit confirms on small instances.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{extend_to_basis, mat_vec_mul, rank, row_reduce, BitMatrix, BitVector, Echelon};
use crate::hypergraph::{
    complete_uniform, is_cycle_inducing, projection, star, Hypergraph, Vertex,
};
use crate::packing::{assemble_3unif_packing, star_packing_kmt, AnchorRequest, PackingPlan};
use crate::rate::Rate;
use crate::source::{view_coordinates, SourceRealization};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeRow {
    pub sender: Vertex,
    pub mask: BitVector,
}

/// Public communication `F = M·ξ`, row by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearScheme {
    hypergraph: Hypergraph,
    n: u32,
    rows: Vec<SchemeRow>,
}

impl LinearScheme {
    /// Checks widths and locality: a row from `i` is supported on copies of
    /// edges containing `i` only.
    pub fn new(hypergraph: Hypergraph, n: u32, rows: Vec<SchemeRow>) -> Result<LinearScheme> {
        if n == 0 {
            return Err(Error::InvalidParameters("blocklength must be >= 1".into()));
        }
        let width = n as usize * hypergraph.edge_count();
        for (k, row) in rows.iter().enumerate() {
            hypergraph.check_vertex(row.sender)?;
            if row.mask.width() != width {
                return Err(Error::WidthMismatch {
                    expected: width,
                    actual: row.mask.width(),
                });
            }
            if let Some(c) = row
                .mask
                .ones()
                .find(|&c| !hypergraph.edges()[c / n as usize].contains(row.sender))
            {
                return Err(Error::InvalidScheme(format!(
                    "row {} from party {} touches coordinate {c}, which the sender does not observe",
                    k + 1,
                    row.sender
                )));
            }
        }
        Ok(LinearScheme {
            hypergraph,
            n,
            rows,
        })
    }

    pub fn empty(hypergraph: Hypergraph, n: u32) -> Result<LinearScheme> {
        LinearScheme::new(hypergraph, n, Vec::new())
    }

    pub fn hypergraph(&self) -> &Hypergraph {
        &self.hypergraph
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn width(&self) -> usize {
        self.n as usize * self.hypergraph.edge_count()
    }

    pub fn rows(&self) -> &[SchemeRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn matrix(&self) -> BitMatrix {
        BitMatrix::from_rows(
            self.width(),
            self.rows.iter().map(|r| r.mask.clone()).collect(),
        )
        .expect("widths checked on construction")
    }

    /// Distinct senders in ascending order.
    pub fn senders(&self) -> Vec<Vertex> {
        let mut s: Vec<Vertex> = self.rows.iter().map(|r| r.sender).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// A copy without row `k`.
    pub fn without_row(&self, k: usize) -> LinearScheme {
        let mut rows = self.rows.clone();
        rows.remove(k);
        LinearScheme {
            rows,
            ..self.clone()
        }
    }
}

/// Key extractor `K = M'·ξ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeySpec {
    hypergraph: Hypergraph,
    n: u32,
    key_rows: BitMatrix,
}

impl KeySpec {
    /// Rejects dependent rows.
    pub fn new(hypergraph: Hypergraph, n: u32, key_rows: BitMatrix) -> Result<KeySpec> {
        let key = KeySpec::new_unchecked(hypergraph, n, key_rows)?;
        if rank(&key.key_rows) != key.key_rows.len() {
            return Err(Error::InvalidScheme(
                "key rows are linearly dependent".into(),
            ));
        }
        Ok(key)
    }

    /// Checks only the width. Audits use this to examine arbitrary
    /// extractors, including broken ones.
    pub fn new_unchecked(hypergraph: Hypergraph, n: u32, key_rows: BitMatrix) -> Result<KeySpec> {
        let width = n as usize * hypergraph.edge_count();
        if key_rows.width() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                actual: key_rows.width(),
            });
        }
        Ok(KeySpec {
            hypergraph,
            n,
            key_rows,
        })
    }

    pub fn hypergraph(&self) -> &Hypergraph {
        &self.hypergraph
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn rows(&self) -> &BitMatrix {
        &self.key_rows
    }

    pub fn len(&self) -> usize {
        self.key_rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.key_rows.is_empty()
    }

    /// Key bits per source symbol.
    pub fn rate(&self) -> Rate {
        Rate::new(self.len() as i64, self.n as i64)
    }
}

/// Communication and key evaluated on one realization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolRun {
    pub communication: BitVector,
    pub key: BitVector,
}

impl ProtocolRun {
    pub fn execute(
        scheme: &LinearScheme,
        key: &KeySpec,
        realization: &SourceRealization<'_>,
    ) -> Result<ProtocolRun> {
        Ok(ProtocolRun {
            communication: mat_vec_mul(&scheme.matrix(), &realization.bits)?,
            key: mat_vec_mul(key.rows(), &realization.bits)?,
        })
    }
}

fn check_star_params(m: u32, t: u32, i: Vertex, j: Vertex) -> Result<()> {
    if t < 2 || t > m {
        return Err(Error::InvalidParameters(format!(
            "need 2 <= t <= m, got m = {m}, t = {t}"
        )));
    }
    for v in [i, j] {
        if v == 0 || v > m {
            return Err(Error::VertexOutOfRange { vertex: v, m });
        }
    }
    if i == j {
        return Err(Error::InvalidParameters(format!(
            "anchor and reference vertex must differ, both are {i}"
        )));
    }
    Ok(())
}

fn star_of_kmt(m: u32, t: u32, i: Vertex) -> Result<Hypergraph> {
    star(&complete_uniform(m, t as usize)?, i)
}

/// The anchor's broadcast on `star(K_{m,t}, i)` at blocklength 1: for each
/// edge `e` containing `i` but not `j`, the parity of `ξ_e` and the
/// `ξ_{(e ∪ {j}) \ {k}}` for `k ∈ e \ {i}`.
pub fn star_scheme(m: u32, t: u32, i: Vertex, j: Vertex) -> Result<LinearScheme> {
    check_star_params(m, t, i, j)?;
    let h = star_of_kmt(m, t, i)?;
    let index: HashMap<&[Vertex], usize> = h
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| (e.vertices(), k))
        .collect();
    let width = h.edge_count();
    let mut rows = Vec::new();
    for (k, e) in h.edges().iter().enumerate() {
        if e.contains(j) {
            continue;
        }
        let mut mask = BitVector::unit(width, k);
        for &v in e.vertices().iter().filter(|&&v| v != i) {
            let mut other: Vec<Vertex> = e
                .vertices()
                .iter()
                .copied()
                .filter(|&x| x != v)
                .chain([j])
                .collect();
            other.sort_unstable();
            mask.flip(index[other.as_slice()]);
        }
        rows.push(SchemeRow { sender: i, mask });
    }
    LinearScheme::new(h, 1, rows)
}

/// Unit vectors of the star edges containing both `i` and `j`.
pub fn star_key(m: u32, t: u32, i: Vertex, j: Vertex) -> Result<KeySpec> {
    check_star_params(m, t, i, j)?;
    let h = star_of_kmt(m, t, i)?;
    let width = h.edge_count();
    let rows = h
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.contains(j))
        .map(|(k, _)| BitVector::unit(width, k))
        .collect();
    let key_rows = BitMatrix::from_rows(width, rows)?;
    KeySpec::new(h, 1, key_rows)
}

/// Canonical cycle order of the projection at `anchor`: starts at the
/// smallest non-anchor vertex and steps to its smaller neighbour.
pub fn canonical_cycle_order(h: &Hypergraph, anchor: Vertex) -> Result<Vec<Vertex>> {
    check_cycle_inducing_at(h, anchor)?;
    Ok(projection(h, anchor)?
        .cycle_order()
        .expect("checked to be a Hamiltonian cycle"))
}

fn check_cycle_inducing_at(h: &Hypergraph, anchor: Vertex) -> Result<()> {
    h.check_vertex(anchor)?;
    if h.m() < 4 {
        return Err(Error::NotCycleInducing(format!(
            "m = {} but m >= 4 is required",
            h.m()
        )));
    }
    if is_cycle_inducing(h)?.is_none() {
        return Err(Error::NotCycleInducing(
            "projection is not a single cycle through all other vertices".into(),
        ));
    }
    if let Some(e) = h.edges().iter().find(|e| !e.contains(anchor)) {
        return Err(Error::NotCycleInducing(format!(
            "edge {e} misses anchor {anchor}"
        )));
    }
    if !projection(h, anchor)?.is_hamiltonian_cycle() {
        return Err(Error::NotCycleInducing(format!(
            "projection at {anchor} is not a Hamiltonian cycle"
        )));
    }
    Ok(())
}

/// The anchor's `m - 3` parities for a cycle-inducing hypergraph at
/// blocklength 1. With `e_l = {anchor, c_l, c_{l+1}}` (indices mod `k`):
/// `m = 4` sends `e_1 ⊕ e_2 ⊕ e_3`; otherwise windows
/// `e_l ⊕ e_{l+1} ⊕ e_{l+2}` for `l = 1..=k-2`, except that for
/// `k ≡ 1 (mod 3)` the last window is replaced by `e_{k-1} ⊕ e_k ⊕ e_1`.
pub fn cycle_scheme(
    h: &Hypergraph,
    anchor: Vertex,
    cycle_order: &[Vertex],
) -> Result<LinearScheme> {
    check_cycle_inducing_at(h, anchor)?;
    let k = h.m() as usize - 1;
    let mut sorted = cycle_order.to_vec();
    sorted.sort_unstable();
    let expected: Vec<Vertex> = h.vertices().filter(|&v| v != anchor).collect();
    if sorted != expected {
        return Err(Error::InvalidParameters(format!(
            "cycle order {cycle_order:?} is not a permutation of the non-anchor vertices"
        )));
    }
    // e_l for l = 1..=k, as indices into h.
    let mut e = Vec::with_capacity(k);
    for l in 0..k {
        let (a, b) = (cycle_order[l], cycle_order[(l + 1) % k]);
        let idx = h
            .edges()
            .iter()
            .position(|x| x.contains(a) && x.contains(b))
            .ok_or_else(|| {
                Error::InvalidParameters(format!(
                    "cycle order steps {a} -> {b}, which is not a projected edge"
                ))
            })?;
        e.push(idx);
    }
    let width = h.edge_count();
    let parity = |ls: [usize; 3]| -> SchemeRow {
        let mut mask = BitVector::zeros(width);
        for l in ls {
            mask.flip(e[l - 1]);
        }
        SchemeRow {
            sender: anchor,
            mask,
        }
    };
    let rows = if k == 3 {
        vec![parity([1, 2, 3])]
    } else if k % 3 == 1 {
        let mut rows: Vec<SchemeRow> = (1..=k - 3).map(|l| parity([l, l + 1, l + 2])).collect();
        rows.push(parity([k - 1, k, 1]));
        rows
    } else {
        (1..=k - 2).map(|l| parity([l, l + 1, l + 2])).collect()
    };
    LinearScheme::new(h.clone(), 1, rows)
}

/// Completes the row space of the scheme with unit vectors; those unit
/// vectors are the key. Meets the communication span only in zero and has
/// full rank by construction.
pub fn extract_key(scheme: &LinearScheme) -> Result<KeySpec> {
    let m = scheme.matrix();
    let width = scheme.width();
    if rank(&m) == width {
        return Err(Error::NoKeyPossible(width));
    }
    let key_rows = extend_to_basis(&row_reduce(&m));
    KeySpec::new(scheme.hypergraph.clone(), scheme.n, key_rows)
}

/// Per-party result of [`check_omniscience`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyDecoding {
    pub party: Vertex,
    /// Rank of the party's known functionals.
    pub rank: usize,
    /// Coordinates the party cannot determine, ascending.
    pub missing: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Omniscience {
    pub achieved: bool,
    pub parties: Vec<PartyDecoding>,
}

impl Omniscience {
    /// One line per party that cannot decode everything.
    pub fn diagnostics(&self) -> Vec<String> {
        self.parties
            .iter()
            .filter(|p| !p.missing.is_empty())
            .map(|p| {
                format!(
                    "party {} has rank {} and misses {} coordinate(s), first {}",
                    p.party,
                    p.rank,
                    p.missing.len(),
                    p.missing[0]
                )
            })
            .collect()
    }
}

/// The span known to party `i`: scheme rows plus `i`'s own coordinates.
pub fn party_knowledge(scheme: &LinearScheme, i: Vertex) -> Result<Echelon> {
    let width = scheme.width();
    let mut acc = Echelon::from_matrix(&scheme.matrix());
    for c in view_coordinates(&scheme.hypergraph, scheme.n, i)? {
        acc.insert(BitVector::unit(width, c));
    }
    Ok(acc)
}

/// Whether every party can reconstruct every coordinate.
pub fn check_omniscience(scheme: &LinearScheme) -> Result<Omniscience> {
    let width = scheme.width();
    let mut parties = Vec::new();
    for i in scheme.hypergraph.vertices() {
        let acc = party_knowledge(scheme, i)?;
        let missing = if acc.rank() == width {
            Vec::new()
        } else {
            (0..width)
                .filter(|&c| !acc.contains(&BitVector::unit(width, c)))
                .collect()
        };
        parties.push(PartyDecoding {
            party: i,
            rank: acc.rank(),
            missing,
        });
    }
    Ok(Omniscience {
        achieved: parties.iter().all(|p| p.missing.is_empty()),
        parties,
    })
}

/// Embeds per-part schemes and keys into the coordinates of
/// `(plan.hypergraph, plan.n)` and concatenates them in part order.
///
/// Each part's scheme and key live on `plan.part_hypergraph(l)` at
/// blocklength 1, so local coordinate `c` is the part's `c`-th copy.
pub fn combine_keys(
    plan: &PackingPlan,
    per_part: &[(LinearScheme, KeySpec)],
) -> Result<(LinearScheme, KeySpec)> {
    let verdict = crate::packing::verify_packing_plan(plan);
    if !verdict.valid {
        return Err(Error::InvalidPlan(verdict.diagnostic.unwrap_or_default()));
    }
    if per_part.len() != plan.parts.len() {
        return Err(Error::InvalidParameters(format!(
            "{} parts in the plan but {} schemes supplied",
            plan.parts.len(),
            per_part.len()
        )));
    }
    let n = plan.n;
    let width = n as usize * plan.hypergraph.edge_count();
    let mut rows = Vec::new();
    let mut key_rows = BitMatrix::new(width);
    for (l, ((scheme, key), part)) in per_part.iter().zip(&plan.parts).enumerate() {
        let local = plan.part_hypergraph(l);
        for (what, h, bn) in [
            ("scheme", &scheme.hypergraph, scheme.n),
            ("key", &key.hypergraph, key.n),
        ] {
            if *h != local || bn != 1 {
                return Err(Error::PartLeak {
                    part: l,
                    reason: format!("{what} is not defined on the part's own copies"),
                });
            }
        }
        let targets: Vec<usize> = part.copies.iter().map(|c| c.coordinate(n)).collect();
        let embed = |v: &BitVector| BitVector::from_support(width, v.ones().map(|c| targets[c]));
        for row in &scheme.rows {
            rows.push(SchemeRow {
                sender: row.sender,
                mask: embed(&row.mask),
            });
        }
        for row in key.key_rows.rows() {
            key_rows.push(embed(row))?;
        }
    }
    let scheme = LinearScheme::new(plan.hypergraph.clone(), n, rows)?;
    let key = KeySpec::new_unchecked(plan.hypergraph.clone(), n, key_rows)?;
    Ok((scheme, key))
}

/// Scheme, key and the packing they were built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pipeline {
    pub scheme: LinearScheme,
    pub key: KeySpec,
    pub plan: PackingPlan,
}

/// Smallest vertex other than `i`.
pub fn default_reference(i: Vertex) -> Vertex {
    if i == 1 {
        2
    } else {
        1
    }
}

/// Star packing of `K_{m,t}` with one star scheme and star key per
/// anchor; reaches rate `(t-1)/(m-1)·C(m,t)`.
pub fn run_kmt_pipeline(m: u32, t: u32) -> Result<Pipeline> {
    let plan = star_packing_kmt(m, t)?;
    let mut per_part = Vec::with_capacity(plan.parts.len());
    for (l, part) in plan.parts.iter().enumerate() {
        let i = part.label.anchor;
        let j = default_reference(i);
        let scheme = star_scheme(m, t, i, j)?;
        let key = star_key(m, t, i, j)?;
        debug_assert_eq!(*scheme.hypergraph(), plan.part_hypergraph(l));
        per_part.push((scheme, key));
    }
    let (scheme, key) = combine_keys(&plan, &per_part)?;
    Ok(Pipeline { scheme, key, plan })
}

/// 3-uniform pipeline: assemble cycle-inducing parts, run the
/// cycle scheme on each and take its 2-bit key.
pub fn run_3unif_pipeline(h: &Hypergraph, requests: &[AnchorRequest]) -> Result<Pipeline> {
    let plan = assemble_3unif_packing(h, requests)?;
    let mut per_part = Vec::with_capacity(plan.parts.len());
    for (l, part) in plan.parts.iter().enumerate() {
        let local = plan.part_hypergraph(l);
        let anchor = part.label.anchor;
        let order = canonical_cycle_order(&local, anchor)?;
        let scheme = cycle_scheme(&local, anchor, &order)?;
        let key = extract_key(&scheme)?;
        per_part.push((scheme, key));
    }
    let (scheme, key) = combine_keys(&plan, &per_part)?;
    Ok(Pipeline { scheme, key, plan })
}
