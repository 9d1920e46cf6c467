//! Exact secret-key capacity of hypergraphical sources.
//!
//! For a hypergraphical source, `H(X_C)` is the number of edges meeting `C`
//! and `H(X_M) = |E|` (bits per symbol), so the partition information of
//! `P` reduces to `Σ_e (blocks touched by e − 1) / (|P| − 1)`. Capacity is
//! its minimum over all partitions with at least two blocks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex};
use crate::rate::Rate;

/// Default cap on `m` for partition enumeration (Bell(12) ≈ 4.2M).
pub const DEFAULT_PARTITION_CAP: u32 = 12;

/// A set partition of `1..=m`. Blocks are sorted internally and ordered by
/// their smallest vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    blocks: Vec<Vec<Vertex>>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<Vertex>>) -> Result<Partition> {
        let mut blocks: Vec<Vec<Vertex>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        if blocks.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Partition { blocks })
    }

    pub fn singletons(m: u32) -> Partition {
        Partition {
            blocks: (1..=m).map(|v| vec![v]).collect(),
        }
    }

    /// From a restricted-growth string: `labels[v - 1]` is the block of `v`.
    pub fn from_rgs(labels: &[usize]) -> Partition {
        let count = labels.iter().max().map_or(0, |&x| x + 1);
        let mut blocks = vec![Vec::new(); count];
        for (k, &b) in labels.iter().enumerate() {
            blocks[b].push(k as Vertex + 1);
        }
        Partition { blocks }
    }

    pub fn blocks(&self) -> &[Vec<Vertex>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block index of each vertex, indexed by `v - 1`; checks coverage.
    fn block_of(&self, m: u32) -> Result<Vec<usize>> {
        let mut of = vec![usize::MAX; m as usize];
        for (b, block) in self.blocks.iter().enumerate() {
            for &v in block {
                if v == 0 || v > m {
                    return Err(Error::InvalidPartition(format!(
                        "vertex {v} not in 1..={m}"
                    )));
                }
                if of[v as usize - 1] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("vertex {v} in two blocks")));
                }
                of[v as usize - 1] = b;
            }
        }
        if let Some(missing) = of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidPartition(format!(
                "vertex {} not covered",
                missing + 1
            )));
        }
        Ok(of)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let vs: Vec<String> = b.iter().map(|v| v.to_string()).collect();
                format!("{{{}}}", vs.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// `I_P(X_M) = (Σ_C |E_C| − |E|) / (|P| − 1)`.
pub fn partition_info(h: &Hypergraph, p: &Partition) -> Result<Rate> {
    if p.len() < 2 {
        return Err(Error::InvalidPartition("need at least two blocks".into()));
    }
    let of = p.block_of(h.m())?;
    let mut excess = 0i64;
    let mut touched = Vec::new();
    for e in h.edges() {
        touched.clear();
        touched.extend(e.vertices().iter().map(|&v| of[v as usize - 1]));
        touched.sort_unstable();
        touched.dedup();
        excess += touched.len() as i64 - 1;
    }
    Ok(Rate::new(excess, p.len() as i64 - 1))
}

pub fn csk_brute_force(h: &Hypergraph) -> Result<(Rate, Partition)> {
    csk_brute_force_with_cap(h, DEFAULT_PARTITION_CAP)
}

/// Minimum of the partition information over every partition with at least
/// two blocks, and the first minimizer in restricted-growth-string order.
pub fn csk_brute_force_with_cap(h: &Hypergraph, cap: u32) -> Result<(Rate, Partition)> {
    let m = h.m();
    if m > cap || m > 64 {
        return Err(Error::CapExceeded {
            required: m as usize,
            cap: cap as usize,
            flag: "--max-partition-m",
        });
    }
    let masks: Vec<u64> = h.edges().iter().map(|e| e.mask()).collect();
    let m = m as usize;
    let mut labels = vec![0usize; m];
    // prefix_max[k] = max(labels[..=k])
    let mut prefix_max = vec![0usize; m];
    let mut block_masks = vec![0u64; m];
    let mut best: Option<(Rate, Vec<usize>)> = None;
    loop {
        let blocks = prefix_max[m - 1] + 1;
        if blocks >= 2 {
            block_masks[..blocks].iter_mut().for_each(|b| *b = 0);
            for (v, &b) in labels.iter().enumerate() {
                block_masks[b] |= 1 << v;
            }
            let excess: i64 = masks
                .iter()
                .map(|&e| {
                    block_masks[..blocks]
                        .iter()
                        .filter(|&&b| b & e != 0)
                        .count() as i64
                        - 1
                })
                .sum();
            let value = Rate::new(excess, blocks as i64 - 1);
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                best = Some((value, labels.clone()));
            }
        }
        // Next restricted-growth string in lexicographic order.
        let mut k = m - 1;
        loop {
            if k == 0 {
                let (value, rgs) = best.expect("m >= 2 yields a two-block partition");
                return Ok((value, Partition::from_rgs(&rgs)));
            }
            if labels[k] <= prefix_max[k - 1] {
                labels[k] += 1;
                prefix_max[k] = prefix_max[k - 1].max(labels[k]);
                for j in k + 1..m {
                    labels[j] = 0;
                    prefix_max[j] = prefix_max[k];
                }
                break;
            }
            k -= 1;
        }
    }
}

/// The singleton partition information `I_S(X_M)`.
pub fn singleton_info(h: &Hypergraph) -> Result<Rate> {
    partition_info(h, &Partition::singletons(h.m()))
}

pub fn is_type_s(h: &Hypergraph) -> Result<bool> {
    is_type_s_with_cap(h, DEFAULT_PARTITION_CAP)
}

pub fn is_type_s_with_cap(h: &Hypergraph, cap: u32) -> Result<bool> {
    let (csk, _) = csk_brute_force_with_cap(h, cap)?;
    Ok(singleton_info(h)? == csk)
}

/// `(t − 1)·|E| / (m − 1)` for a `t`-uniform hypergraph.
pub fn closed_form_uniform(h: &Hypergraph) -> Result<Rate> {
    let t = h
        .uniformity()
        .ok_or_else(|| Error::InvalidParameters("hypergraph is not uniform".into()))?;
    Ok(Rate::new(
        (t as i64 - 1) * h.edge_count() as i64,
        h.m() as i64 - 1,
    ))
}

/// Capacity of the complete `t`-uniform hypergraph: `(t−1)/(m−1)·C(m,t)`.
pub fn capacity_kmt(m: u32, t: u32) -> Result<Rate> {
    if t < 2 || t > m {
        return Err(Error::InvalidParameters(format!(
            "need 2 <= t <= m, got m = {m}, t = {t}"
        )));
    }
    Ok(Rate::new(
        (t as i64 - 1) * binomial(m as u64, t as u64) as i64,
        m as i64 - 1,
    ))
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}
