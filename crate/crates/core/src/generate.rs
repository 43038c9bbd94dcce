//! Seeded instance generators and a few named graphs used by the audits.
//!
//! All randomness comes from one `ChaCha8Rng` seeded with the caller's seed,
//! so the same parameters always give the same instance.

use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{binomial, colex_unrank};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Sign, XorInstance};

/// How hyperedges are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeMode {
    /// Distinct uniformly random k-sets.
    WithoutReplacement,
    /// Independent uniformly random k-sets; repeats possible.
    WithReplacement,
}

/// Output of [`gen_random`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generated {
    Hypergraph(Hypergraph),
    Xor(XorInstance),
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_k_set(rng: &mut ChaCha8Rng, n: u32, k: usize) -> Vec<u32> {
    let mut e: Vec<u32> = index::sample(rng, n as usize, k)
        .into_iter()
        .map(|v| v as u32)
        .collect();
    e.sort_unstable();
    e
}

fn draw_edges(rng: &mut ChaCha8Rng, n: u32, k: usize, m: usize, mode: EdgeMode) -> Result<Vec<Vec<u32>>> {
    if n == 0 || k == 0 {
        return Err(Error::Parameter("n and k must be positive".into()));
    }
    if k as u32 > n {
        return Err(Error::Parameter(format!("k = {k} exceeds n = {n}")));
    }
    match mode {
        EdgeMode::WithReplacement => Ok((0..m).map(|_| random_k_set(rng, n, k)).collect()),
        EdgeMode::WithoutReplacement => {
            let total = binomial(n as u64, k as u64);
            if let Some(total) = total {
                if m as u128 > total {
                    return Err(Error::Parameter(format!(
                        "m = {m} exceeds C({n}, {k}) = {total} distinct edges"
                    )));
                }
                if total <= 4_000_000 && 2 * m as u128 > total {
                    return Ok(index::sample(rng, total as usize, m)
                        .into_iter()
                        .map(|r| colex_unrank(r as u128, k))
                        .collect());
                }
            }
            let mut seen = HashSet::with_capacity(m);
            let mut edges = Vec::with_capacity(m);
            while edges.len() < m {
                let e = random_k_set(rng, n, k);
                if seen.insert(e.clone()) {
                    edges.push(e);
                }
            }
            Ok(edges)
        }
    }
}

pub fn random_hypergraph(n: u32, k: usize, m: usize, seed: u64, mode: EdgeMode) -> Result<Hypergraph> {
    let mut rng = rng_from_seed(seed);
    let edges = draw_edges(&mut rng, n, k, m, mode)?;
    Ok(Hypergraph::from_sorted_unchecked(n, k, edges))
}

/// Uniform ±1 signs from the given generator.
pub fn random_signs(rng: &mut ChaCha8Rng, m: usize) -> Vec<Sign> {
    (0..m).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect()
}

/// A semirandom-style instance: random edges, then uniform signs drawn from
/// the same stream.
pub fn random_xor(n: u32, k: usize, m: usize, seed: u64, mode: EdgeMode) -> Result<XorInstance> {
    let mut rng = rng_from_seed(seed);
    let edges = draw_edges(&mut rng, n, k, m, mode)?;
    let signs = random_signs(&mut rng, m);
    XorInstance::new(Hypergraph::from_sorted_unchecked(n, k, edges), signs)
}

/// Attaches fresh uniform signs to a fixed hypergraph.
pub fn with_random_signs(h: Hypergraph, seed: u64) -> XorInstance {
    let mut rng = rng_from_seed(seed);
    let signs = random_signs(&mut rng, h.m());
    XorInstance::new(h, signs).expect("sign count matches")
}

pub fn gen_random(n: u32, k: usize, m: usize, seed: u64, mode: EdgeMode, signed: bool) -> Result<Generated> {
    if signed {
        random_xor(n, k, m, seed, mode).map(Generated::Xor)
    } else {
        random_hypergraph(n, k, m, seed, mode).map(Generated::Hypergraph)
    }
}

fn graph(n: u32, edges: Vec<(u32, u32)>) -> Hypergraph {
    Hypergraph::new(n, 2, edges.into_iter().map(|(a, b)| vec![a, b]).collect())
        .expect("named graph is well formed")
}

pub fn cycle(n: u32) -> Hypergraph {
    graph(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
}

pub fn path(n: u32) -> Hypergraph {
    graph(n, (1..n).map(|i| (i - 1, i)).collect())
}

pub fn complete(n: u32) -> Hypergraph {
    graph(
        n,
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect(),
    )
}

/// The Petersen graph: outer 5-cycle, inner pentagram, spokes.
pub fn petersen() -> Hypergraph {
    let mut e = Vec::new();
    for i in 0..5 {
        e.push((i, (i + 1) % 5));
        e.push((5 + i, 5 + (i + 2) % 5));
        e.push((i, 5 + i));
    }
    graph(10, e)
}

/// The Heawood graph (3-regular, 14 vertices, girth 6).
pub fn heawood() -> Hypergraph {
    let mut e: Vec<(u32, u32)> = (0..14).map(|i| (i, (i + 1) % 14)).collect();
    for i in (0..14).step_by(2) {
        e.push((i, (i + 5) % 14));
    }
    graph(14, e)
}

/// Uniform simple graph with `m` distinct edges.
pub fn random_graph(n: u32, m: usize, seed: u64) -> Result<Hypergraph> {
    random_hypergraph(n, 2, m, seed, EdgeMode::WithoutReplacement)
}

/// Random `d`-regular-ish simple graph from the union of `d/2` random
/// Hamiltonian cycles (duplicate edges dropped).
pub fn random_cycle_union(n: u32, cycles: usize, seed: u64) -> Hypergraph {
    let mut rng = rng_from_seed(seed);
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for _ in 0..cycles {
        let perm: Vec<u32> = index::sample(&mut rng, n as usize, n as usize)
            .into_iter()
            .map(|v| v as u32)
            .collect();
        for i in 0..n as usize {
            let (a, b) = (perm[i], perm[(i + 1) % n as usize]);
            let e = if a < b { vec![a, b] } else { vec![b, a] };
            if seen.insert(e.clone()) {
                edges.push(e);
            }
        }
    }
    Hypergraph::from_sorted_unchecked(n, 2, edges)
}
