//! Dense linear algebra over GF(2).
//!
//! Vectors are packed into `u64` words. Coordinate `i` lives in word `i / 64`
//! at bit `i % 64`; the text form prints coordinate 0 first. Every
//! communication matrix and key extractor in the crate is a [`BitMatrix`]
//! whose columns follow the canonical edge-copy order of the hypergraph.
//!
//! The secrecy certificates rest on two facts about uniform `Y` over
//! `{0,1}^s`: `H(AY) = rank(A)`, and `I(AY; BY) = rank(A) + rank(B) - rank(A ∥ B)`.
//! So [`spans_intersect_trivially`] is exactly the zero-leakage test.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(width: usize) -> usize {
    width.div_ceil(WORD)
}

/// A vector over GF(2).
///
/// Width 0 is allowed: empty party views, empty keys and the product of a
/// row-less matrix all need it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    width: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(width: usize) -> Self {
        BitVector {
            width,
            words: vec![0; words_for(width)],
        }
    }

    /// Standard unit vector `e_index`.
    pub fn unit(width: usize, index: usize) -> Self {
        let mut v = Self::zeros(width);
        v.set(index, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Vector with ones at the given coordinates.
    pub fn from_support(width: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(width);
        for i in ones {
            v.flip(i);
        }
        v
    }

    /// Reads the low `width` bits of `value` so that coordinate 0 is the most
    /// significant of them. This matches ascending binary enumeration order.
    pub fn from_index(width: usize, value: u64) -> Self {
        assert!(width <= WORD, "from_index supports at most 64 coordinates");
        let mut v = Self::zeros(width);
        for i in 0..width {
            if (value >> (width - 1 - i)) & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.width, "coordinate {i} out of width {}", self.width);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.width, "coordinate {i} out of width {}", self.width);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.width, "coordinate {i} out of width {}", self.width);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.width, other.width);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    /// Inner product over GF(2): parity of the masked bits.
    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.width, other.width);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the first set coordinate.
    pub fn leading(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * WORD + w.trailing_zeros() as usize)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(move |&i| self.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.width).map(move |i| self.get(i))
    }

    /// Coordinates `indices` of `self`, in the given order.
    pub fn select(&self, indices: &[usize]) -> BitVector {
        let mut out = BitVector::zeros(indices.len());
        for (k, &i) in indices.iter().enumerate() {
            if self.get(i) {
                out.set(k, true);
            }
        }
        out
    }

    /// Concatenation `self ∥ other`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.width + other.width);
        for i in self.ones() {
            out.set(i, true);
        }
        for i in other.ones() {
            out.set(self.width + i, true);
        }
        out
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut v = BitVector::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                other => {
                    return Err(Error::InvalidParameters(format!(
                        "bit string contains {other:?}"
                    )))
                }
            }
        }
        Ok(v)
    }
}

impl Serialize for BitVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An ordered list of rows of equal width. Zero and repeated rows are fine.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct BitMatrix {
    width: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn new(width: usize) -> Self {
        BitMatrix {
            width,
            rows: Vec::new(),
        }
    }

    pub fn from_rows(width: usize, rows: Vec<BitVector>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.width() != width) {
            return Err(Error::WidthMismatch {
                expected: width,
                actual: bad.width(),
            });
        }
        Ok(BitMatrix { width, rows })
    }

    /// Parses rows such as `["110", "011"]`. All rows must share a width.
    pub fn parse(width: usize, rows: &[&str]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.parse())
            .collect::<Result<Vec<BitVector>>>()?;
        Self::from_rows(width, rows)
    }

    pub fn identity(width: usize) -> Self {
        BitMatrix {
            width,
            rows: (0..width).map(|i| BitVector::unit(width, i)).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn push(&mut self, row: BitVector) -> Result<()> {
        if row.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                actual: row.width(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Vertical stacking `self ∥ other`.
    pub fn stack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        check_width(self.width, other.width)?;
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(BitMatrix {
            width: self.width,
            rows,
        })
    }

    pub fn rank(&self) -> usize {
        rank(self)
    }
}

fn check_width(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::WidthMismatch { expected, actual });
    }
    Ok(())
}

/// Incremental row-echelon basis. Rows are kept sorted by leading coordinate
/// and each row is zero before its leading coordinate.
#[derive(Clone, Debug)]
pub struct Echelon {
    width: usize,
    rows: Vec<BitVector>,
}

impl Echelon {
    pub fn new(width: usize) -> Self {
        Echelon {
            width,
            rows: Vec::new(),
        }
    }

    pub fn from_matrix(m: &BitMatrix) -> Self {
        let mut e = Echelon::new(m.width());
        for r in m.rows() {
            e.insert(r.clone());
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the span.
    pub fn reduce(&self, mut v: BitVector) -> BitVector {
        for row in &self.rows {
            let lead = row.leading().expect("basis rows are nonzero");
            if v.get(lead) {
                v.xor_assign(row);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v.clone()).is_zero()
    }

    /// Adds `v` to the basis. Returns false when it was already in the span.
    pub fn insert(&mut self, v: BitVector) -> bool {
        debug_assert_eq!(v.width(), self.width);
        let v = self.reduce(v);
        match v.leading() {
            None => false,
            Some(lead) => {
                let at = self
                    .rows
                    .partition_point(|r| r.leading().expect("nonzero") < lead);
                self.rows.insert(at, v);
                true
            }
        }
    }

    /// Reduced row-echelon form: zero rows dropped, rows ordered by pivot.
    pub fn into_reduced(mut self) -> BitMatrix {
        for k in (0..self.rows.len()).rev() {
            let lead = self.rows[k].leading().expect("nonzero");
            let pivot = self.rows[k].clone();
            for row in self.rows[..k].iter_mut() {
                if row.get(lead) {
                    row.xor_assign(&pivot);
                }
            }
        }
        BitMatrix {
            width: self.width,
            rows: self.rows,
        }
    }
}

/// Dimension of the row space.
pub fn rank(m: &BitMatrix) -> usize {
    Echelon::from_matrix(m).rank()
}

/// Reduced row-echelon form with zero rows dropped.
pub fn row_reduce(m: &BitMatrix) -> BitMatrix {
    Echelon::from_matrix(m).into_reduced()
}

pub fn in_span(m: &BitMatrix, v: &BitVector) -> Result<bool> {
    check_width(m.width(), v.width())?;
    Ok(Echelon::from_matrix(m).contains(v))
}

/// Completes the row space of `m` to all of `{0,1}^width` with unit vectors,
/// scanning coordinates in ascending order.
pub fn extend_to_basis(m: &BitMatrix) -> BitMatrix {
    let mut acc = Echelon::from_matrix(m);
    let mut out = BitMatrix::new(m.width());
    for i in 0..m.width() {
        let e = BitVector::unit(m.width(), i);
        if acc.insert(e.clone()) {
            out.rows.push(e);
        }
    }
    out
}

/// True iff the row spaces of `a` and `b` meet only in zero, i.e.
/// `rank(a ∥ b) = rank(a) + rank(b)`.
pub fn spans_intersect_trivially(a: &BitMatrix, b: &BitMatrix) -> Result<bool> {
    check_width(a.width(), b.width())?;
    Ok(rank(&a.stack(b)?) == rank(a) + rank(b))
}

/// `m · x`, one output bit per row.
pub fn mat_vec_mul(m: &BitMatrix, x: &BitVector) -> Result<BitVector> {
    check_width(m.width(), x.width())?;
    let mut out = BitVector::zeros(m.len());
    for (k, row) in m.rows().iter().enumerate() {
        if row.dot(x) {
            out.set(k, true);
        }
    }
    Ok(out)
}

/// Finds coefficients `c` with `Σ c_k · generators[k] = target`, if any.
pub fn solve_combination(generators: &[BitVector], target: &BitVector) -> Option<BitVector> {
    let width = target.width();
    let g = generators.len();
    // Each row carries its value and the combination of generators producing it.
    let mut basis: Vec<(BitVector, BitVector)> = Vec::new();
    for (k, row) in generators.iter().enumerate() {
        let mut v = row.clone();
        let mut c = BitVector::unit(g, k);
        for (bv, bc) in &basis {
            let lead = bv.leading().expect("nonzero");
            if v.get(lead) {
                v.xor_assign(bv);
                c.xor_assign(bc);
            }
        }
        if let Some(lead) = v.leading() {
            let at = basis.partition_point(|(r, _)| r.leading().expect("nonzero") < lead);
            basis.insert(at, (v, c));
        }
    }
    let mut v = target.clone();
    let mut c = BitVector::zeros(g);
    debug_assert_eq!(v.width(), width);
    for (bv, bc) in &basis {
        let lead = bv.leading().expect("nonzero");
        if v.get(lead) {
            v.xor_assign(bv);
            c.xor_assign(bc);
        }
    }
    v.is_zero().then_some(c)
}
