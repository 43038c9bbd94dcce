//! Hypergraphs, k-XOR instances, even covers and assignments.
//!
//! Vertices are `0..n` internally; the text formats in [`crate::io`] are
//! 1-based and convert at the boundary.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

/// A k-uniform hypergraph on `0..n` with an ordered edge list. Every edge is
/// a strictly increasing list of `k` vertices; repeated edges are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    n: u32,
    k: usize,
    edges: Vec<Vec<u32>>,
}

impl Hypergraph {
    /// Builds a hypergraph, sorting each edge. Rejects wrong arity, repeated
    /// vertices inside an edge, and out-of-range ids.
    pub fn new(n: u32, k: usize, edges: Vec<Vec<u32>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidHypergraph("n must be positive".into()));
        }
        if k < 1 {
            return Err(Error::InvalidHypergraph("k must be positive".into()));
        }
        let mut sorted = Vec::with_capacity(edges.len());
        for (i, mut e) in edges.into_iter().enumerate() {
            if e.len() != k {
                return Err(Error::Arity(format!(
                    "edge {i} has {} vertices, expected {k}",
                    e.len()
                )));
            }
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {i} repeats a vertex"
                )));
            }
            if let Some(&v) = e.last() {
                if v >= n {
                    return Err(Error::InvalidHypergraph(format!(
                        "edge {i} has vertex {v} outside 0..{n}"
                    )));
                }
            }
            sorted.push(e);
        }
        Ok(Hypergraph {
            n,
            k,
            edges: sorted,
        })
    }

    /// Builds from 1-based vertex ids.
    pub fn from_one_based(n: u32, k: usize, edges: &[Vec<u32>]) -> Result<Self> {
        let mut shifted = Vec::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            let mut out = Vec::with_capacity(e.len());
            for &v in e {
                if v == 0 || v > n {
                    return Err(Error::InvalidHypergraph(format!(
                        "edge {i} has vertex {v} outside 1..{n}"
                    )));
                }
                out.push(v - 1);
            }
            shifted.push(out);
        }
        Hypergraph::new(n, k, shifted)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &[u32] {
        &self.edges[i]
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Drops repeated edges, keeping the first occurrence.
    pub fn deduplicated(&self) -> Hypergraph {
        let mut seen = BTreeSet::new();
        let edges = self
            .edges
            .iter()
            .filter(|e| seen.insert((*e).clone()))
            .cloned()
            .collect();
        Hypergraph {
            n: self.n,
            k: self.k,
            edges,
        }
    }

    pub fn has_duplicate_edges(&self) -> bool {
        let mut seen = BTreeSet::new();
        !self.edges.iter().all(|e| seen.insert(e))
    }

    /// Number of edges containing each vertex.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n as usize];
        for e in &self.edges {
            for &v in e {
                deg[v as usize] += 1;
            }
        }
        deg
    }

    /// Sub-hypergraph on a subset of edge indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Hypergraph> {
        let mut edges = Vec::with_capacity(indices.len());
        for &i in indices {
            edges.push(self.edges.get(i).cloned().ok_or(Error::IndexOutOfRange {
                index: i,
                m: self.m(),
            })?);
        }
        Ok(Hypergraph {
            n: self.n,
            k: self.k,
            edges,
        })
    }

    pub(crate) fn from_sorted_unchecked(n: u32, k: usize, edges: Vec<Vec<u32>>) -> Self {
        Hypergraph { n, k, edges }
    }
}

/// A set of edge indices whose edges should sum to zero over F2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct EvenCover {
    pub edge_indices: BTreeSet<usize>,
}

impl EvenCover {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        EvenCover {
            edge_indices: indices.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.edge_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.edge_indices.iter().copied()
    }
}

/// True iff every vertex lies in an even number of the selected edges. The
/// empty selection returns true; callers that report covers reject it.
pub fn verify_even_cover(h: &Hypergraph, cover: &EvenCover) -> Result<bool> {
    let mut parity: BTreeMap<u32, bool> = BTreeMap::new();
    for i in cover.iter() {
        let e = h.edges.get(i).ok_or(Error::IndexOutOfRange { index: i, m: h.m() })?;
        for &v in e {
            *parity.entry(v).or_insert(false) ^= true;
        }
    }
    Ok(parity.values().all(|odd| !odd))
}

/// F2 sum of a multiset of edges: the vertices appearing an odd number of times.
pub fn symmetric_difference<'a>(edges: impl IntoIterator<Item = &'a [u32]>) -> Vec<u32> {
    let mut odd = BTreeSet::new();
    for e in edges {
        for &v in e {
            if !odd.insert(v) {
                odd.remove(&v);
            }
        }
    }
    odd.into_iter().collect()
}

/// A ±1 value.
pub type Sign = i8;

/// A hypergraph with one ±1 right-hand side per edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct XorInstance {
    hypergraph: Hypergraph,
    signs: Vec<Sign>,
}

impl XorInstance {
    pub fn new(hypergraph: Hypergraph, signs: Vec<Sign>) -> Result<Self> {
        if signs.len() != hypergraph.m() {
            return Err(Error::Shape(format!(
                "{} signs for {} clauses",
                signs.len(),
                hypergraph.m()
            )));
        }
        if let Some(i) = signs.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::Shape(format!("sign {i} is not ±1")));
        }
        Ok(XorInstance { hypergraph, signs })
    }

    pub fn hypergraph(&self) -> &Hypergraph {
        &self.hypergraph
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn n(&self) -> u32 {
        self.hypergraph.n()
    }

    pub fn k(&self) -> usize {
        self.hypergraph.k()
    }

    pub fn m(&self) -> usize {
        self.hypergraph.m()
    }
}

/// A ±1 assignment to the `n` variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub values: Vec<Sign>,
}

impl Assignment {
    pub fn new(values: Vec<Sign>) -> Result<Self> {
        if let Some(i) = values.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::Shape(format!("assignment entry {i} is not ±1")));
        }
        Ok(Assignment { values })
    }

    /// Bit `v` of `bits` set means `x_v = -1`.
    pub fn from_bits(n: u32, bits: u64) -> Self {
        Assignment {
            values: (0..n)
                .map(|v| if bits >> v & 1 == 1 { -1 } else { 1 })
                .collect(),
        }
    }

    pub fn negated(&self) -> Self {
        Assignment {
            values: self.values.iter().map(|&s| -s).collect(),
        }
    }

    /// `x_S = prod_{v in S} x_v`.
    pub fn monomial(&self, set: &[u32]) -> Sign {
        set.iter().fold(1, |acc, &v| acc * self.values[v as usize])
    }
}

/// Sum over clauses of `b_C x_C` as an integer.
pub fn xor_sum(inst: &XorInstance, x: &Assignment) -> Result<i64> {
    if x.values.len() != inst.n() as usize {
        return Err(Error::Shape(format!(
            "assignment has {} entries, instance has n = {}",
            x.values.len(),
            inst.n()
        )));
    }
    Ok(inst
        .hypergraph
        .edges
        .iter()
        .zip(&inst.signs)
        .map(|(e, &b)| (b * x.monomial(e)) as i64)
        .sum())
}

/// `psi(x) = (1/m) sum_C b_C x_C`, exactly.
pub fn eval_xor(inst: &XorInstance, x: &Assignment) -> Result<BigRational> {
    if inst.m() == 0 {
        return Err(Error::EmptyInstance);
    }
    let s = xor_sum(inst, x)?;
    Ok(BigRational::new(BigInt::from(s), BigInt::from(inst.m())))
}
