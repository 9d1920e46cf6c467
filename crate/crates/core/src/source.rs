//! The hypergraphical source: one uniform bit per edge copy.
//!
//! Sampling uses ChaCha8 seeded from a `u64`, so a `(hypergraph, n, seed)`
//! triple always yields the same realization on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::hypergraph::{canonical_coordinates, EdgeCopy, Hypergraph, Vertex};

/// Default bound on `n·|E|` for exhaustive enumeration.
pub const DEFAULT_ENUM_CAP_BITS: usize = 24;

/// One draw of `ξ^n` over the canonical coordinates of `(h, n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceRealization<'h> {
    pub hypergraph: &'h Hypergraph,
    pub n: u32,
    pub bits: BitVector,
}

/// What party `i` observes: every copy of every edge containing `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyView {
    pub party: Vertex,
    /// Canonical coordinate indices, ascending.
    pub coordinates: Vec<usize>,
    pub bits: BitVector,
}

/// Coordinates observed by party `i` under blocklength `n`.
pub fn view_coordinates(h: &Hypergraph, n: u32, i: Vertex) -> Result<Vec<usize>> {
    h.check_vertex(i)?;
    Ok(canonical_coordinates(h, n)
        .iter()
        .enumerate()
        .filter(|(_, c): &(usize, &EdgeCopy)| h.edges()[c.edge].contains(i))
        .map(|(k, _)| k)
        .collect())
}

pub fn sample(h: &Hypergraph, n: u32, seed: u64) -> Result<SourceRealization<'_>> {
    if n == 0 {
        return Err(Error::InvalidParameters("blocklength must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_with(h, n, &mut rng))
}

/// Draws a realization from an existing generator, for repeated sampling.
pub fn sample_with<'h, R: Rng>(h: &'h Hypergraph, n: u32, rng: &mut R) -> SourceRealization<'h> {
    let width = n as usize * h.edge_count();
    let mut bits = BitVector::zeros(width);
    for i in 0..width {
        if rng.gen::<bool>() {
            bits.set(i, true);
        }
    }
    SourceRealization {
        hypergraph: h,
        n,
        bits,
    }
}

pub fn party_view(r: &SourceRealization<'_>, i: Vertex) -> Result<PartyView> {
    let coordinates = view_coordinates(r.hypergraph, r.n, i)?;
    let bits = r.bits.select(&coordinates);
    Ok(PartyView {
        party: i,
        coordinates,
        bits,
    })
}

/// Every realization exactly once, in ascending binary order with
/// coordinate 0 as the most significant bit.
pub fn enumerate_all(h: &Hypergraph, n: u32) -> Result<Enumeration<'_>> {
    enumerate_all_with_cap(h, n, DEFAULT_ENUM_CAP_BITS)
}

pub fn enumerate_all_with_cap(h: &Hypergraph, n: u32, cap: usize) -> Result<Enumeration<'_>> {
    if n == 0 {
        return Err(Error::InvalidParameters("blocklength must be >= 1".into()));
    }
    let width = n as usize * h.edge_count();
    if width > cap || width >= 64 {
        return Err(Error::CapExceeded {
            required: width,
            cap,
            flag: "--max-enum-bits",
        });
    }
    Ok(Enumeration {
        hypergraph: h,
        n,
        width,
        next: 0,
        end: 1u64 << width,
    })
}

/// Iterator returned by [`enumerate_all`]. [`Enumeration::split`] hands out
/// disjoint index ranges for parallel workers.
#[derive(Clone, Debug)]
pub struct Enumeration<'h> {
    hypergraph: &'h Hypergraph,
    n: u32,
    width: usize,
    next: u64,
    end: u64,
}

impl<'h> Enumeration<'h> {
    pub fn total(&self) -> u64 {
        1u64 << self.width
    }

    /// Splits the remaining range into `parts` contiguous pieces.
    pub fn split(self, parts: u64) -> Vec<Enumeration<'h>> {
        let parts = parts.max(1);
        let len = self.end - self.next;
        (0..parts)
            .map(|p| Enumeration {
                next: self.next + len * p / parts,
                end: self.next + len * (p + 1) / parts,
                ..self.clone()
            })
            .collect()
    }
}

impl<'h> Iterator for Enumeration<'h> {
    type Item = SourceRealization<'h>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let bits = BitVector::from_index(self.width, self.next);
        self.next += 1;
        Some(SourceRealization {
            hypergraph: self.hypergraph,
            n: self.n,
            bits,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::complete_uniform;
    use std::collections::HashSet;

    #[test]
    fn sampling_is_deterministic_and_sized() {
        let h = complete_uniform(4, 3).unwrap();
        assert_eq!(sample(&h, 3, 11).unwrap(), sample(&h, 3, 11).unwrap());
        assert_ne!(
            sample(&h, 3, 11).unwrap().bits,
            sample(&h, 3, 12).unwrap().bits
        );
        assert_eq!(sample(&h, 3, 0).unwrap().bits.width(), 12);
        assert!(sample(&h, 0, 0).is_err());
    }

    #[test]
    fn empirical_means_are_near_one_half() {
        let h = complete_uniform(4, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trials = 10_000;
        let mut ones = vec![0usize; 12];
        for _ in 0..trials {
            let r = sample_with(&h, 3, &mut rng);
            for i in r.bits.ones() {
                ones[i] += 1;
            }
        }
        for c in ones {
            let mean = c as f64 / trials as f64;
            assert!((mean - 0.5).abs() <= 0.02, "mean {mean}");
        }
    }

    #[test]
    fn party_view_examples() {
        let h = complete_uniform(4, 3).unwrap();
        let r = sample(&h, 2, 5).unwrap();
        let v = party_view(&r, 1).unwrap();
        assert_eq!(v.coordinates, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(v.bits, r.bits.select(&[0, 1, 2, 3, 4, 5]));

        let one = Hypergraph::from_lists(3, &[&[1, 2, 3]]).unwrap();
        let r = sample(&one, 4, 1).unwrap();
        assert_eq!(party_view(&r, 2).unwrap().bits, r.bits);

        let isolated = Hypergraph::from_lists(3, &[&[1, 2]]).unwrap();
        let r = sample(&isolated, 1, 1).unwrap();
        assert_eq!(party_view(&r, 3).unwrap().bits.width(), 0);
        assert!(party_view(&r, 4).is_err());
    }

    #[test]
    fn views_follow_incidence_on_random_hypergraphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let m = rng.gen_range(2..=7u32);
            let count = rng.gen_range(1..=6);
            let mut lists = Vec::new();
            for _ in 0..count {
                let mut e: Vec<u32> = (1..=m).filter(|_| rng.gen_bool(0.5)).collect();
                if e.len() < 2 {
                    e = vec![1, 2];
                }
                lists.push(e);
            }
            let refs: Vec<&[u32]> = lists.iter().map(|l| l.as_slice()).collect();
            let h = Hypergraph::from_lists(m, &refs).unwrap();
            let n = rng.gen_range(1..=3);
            let coords = canonical_coordinates(&h, n);
            for i in 1..=m {
                let view: HashSet<usize> =
                    view_coordinates(&h, n, i).unwrap().into_iter().collect();
                for (k, c) in coords.iter().enumerate() {
                    assert_eq!(view.contains(&k), h.edges()[c.edge].contains(i));
                }
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        let one = Hypergraph::from_lists(2, &[&[1, 2]]).unwrap();
        let all: Vec<String> = enumerate_all(&one, 1)
            .unwrap()
            .map(|r| r.bits.to_string())
            .collect();
        assert_eq!(all, vec!["0", "1"]);
        let two = Hypergraph::from_lists(3, &[&[1, 2], &[2, 3]]).unwrap();
        let all: Vec<String> = enumerate_all(&two, 1)
            .unwrap()
            .map(|r| r.bits.to_string())
            .collect();
        assert_eq!(all, vec!["00", "01", "10", "11"]);
        assert_eq!(
            enumerate_all(&complete_uniform(4, 3).unwrap(), 1)
                .unwrap()
                .count(),
            16
        );
    }

    #[test]
    fn enumeration_is_exhaustive_and_distinct() {
        let h = complete_uniform(4, 3).unwrap();
        let seen: HashSet<BitVector> = enumerate_all(&h, 4).unwrap().map(|r| r.bits).collect();
        assert_eq!(seen.len(), 1 << 16);
    }

    #[test]
    fn enumeration_cap_and_split() {
        let h = complete_uniform(6, 3).unwrap();
        assert!(matches!(
            enumerate_all(&h, 2),
            Err(Error::CapExceeded {
                required: 40,
                cap: 24,
                ..
            })
        ));
        let h = complete_uniform(4, 3).unwrap();
        let whole: Vec<BitVector> = enumerate_all(&h, 2).unwrap().map(|r| r.bits).collect();
        let pieces: Vec<BitVector> = enumerate_all(&h, 2)
            .unwrap()
            .split(3)
            .into_iter()
            .flatten()
            .map(|r| r.bits)
            .collect();
        assert_eq!(whole, pieces);
    }
}
