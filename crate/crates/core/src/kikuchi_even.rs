//! The level-`r` Kikuchi graph of an even-arity hypergraph: vertices are the
//! `r`-subsets of `[n]` (indexed by colex rank), and `S ~ T` whenever `S xor T`
//! is a clause. Every edge keeps the index of the clause that produced it.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::combinatorics::{binomial, colex_rank, combinations, for_each_colex_subset};
use crate::error::{Error, Result};
use crate::hypergraph::{Assignment, EvenCover, Hypergraph, Sign, XorInstance};

/// Hard limits on explicit enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_vertices: u128,
    pub max_edges: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_vertices: 5_000_000,
            max_edges: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KikuchiEdge {
    /// Smaller endpoint rank.
    pub s: u32,
    pub t: u32,
    pub clause: usize,
}

/// Compressed adjacency: `neighbors[offsets[v]..offsets[v+1]]` holds
/// `(neighbor, edge index)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    pub offsets: Vec<usize>,
    pub neighbors: Vec<(u32, usize)>,
}

impl Adjacency {
    pub fn from_edges(num_vertices: usize, ends: impl Iterator<Item = (u32, u32)> + Clone) -> Self {
        let mut deg = vec![0usize; num_vertices + 1];
        for (s, t) in ends.clone() {
            deg[s as usize] += 1;
            deg[t as usize] += 1;
        }
        let mut offsets = vec![0usize; num_vertices + 1];
        for v in 0..num_vertices {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![(0u32, 0usize); offsets[num_vertices]];
        for (e, (s, t)) in ends.enumerate() {
            neighbors[fill[s as usize]] = (t, e);
            fill[s as usize] += 1;
            neighbors[fill[t as usize]] = (s, e);
            fill[t as usize] += 1;
        }
        Adjacency { offsets, neighbors }
    }

    pub fn of(&self, v: usize) -> &[(u32, usize)] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvenKikuchiGraph {
    n: u32,
    k: usize,
    r: usize,
    m: usize,
    num_vertices: usize,
    edges: Vec<KikuchiEdge>,
    degree: Vec<u32>,
    alpha: u128,
    adjacency: Adjacency,
}

/// Closed-form edge count per clause: `C(k, k/2)/2 * C(n-k, r-k/2)`.
pub fn even_alpha(n: u32, k: usize, r: usize) -> u128 {
    if r < k / 2 || k > n as usize {
        return 0;
    }
    let splits = binomial(k as u64, (k / 2) as u64).unwrap_or(0) / 2;
    let rest = binomial(n as u64 - k as u64, (r - k / 2) as u64).unwrap_or(u128::MAX);
    splits.saturating_mul(rest)
}

/// The edges contributed by one clause, with `S` the side holding the
/// clause's smallest vertex (so each unordered edge appears once).
fn clause_edges(n: u32, clause: &[u32], r: usize, index: usize) -> Vec<KikuchiEdge> {
    let k = clause.len();
    let half = k / 2;
    let outside: Vec<u32> = (0..n).filter(|v| clause.binary_search(v).is_err()).collect();
    let rests = combinations(&outside, r - half);
    let mut out = Vec::new();
    for a in combinations(&clause[1..], half - 1) {
        let mut side_s = Vec::with_capacity(half);
        side_s.push(clause[0]);
        side_s.extend_from_slice(&a);
        let side_t: Vec<u32> = clause.iter().copied().filter(|v| !side_s.contains(v)).collect();
        for rest in &rests {
            let s = merge(&side_s, rest);
            let t = merge(&side_t, rest);
            let (rs, rt) = (colex_rank(&s) as u32, colex_rank(&t) as u32);
            let (lo, hi) = if rs < rt { (rs, rt) } else { (rt, rs) };
            out.push(KikuchiEdge { s: lo, t: hi, clause: index });
        }
    }
    out
}

pub(crate) fn merge(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut v: Vec<u32> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v
}

pub fn build_even_kikuchi(h: &Hypergraph, r: usize, caps: Caps) -> Result<EvenKikuchiGraph> {
    let (n, k, m) = (h.n(), h.k(), h.m());
    if k % 2 == 1 {
        return Err(Error::Arity(format!(
            "k = {k} is odd; use the colored Kikuchi graph for odd arity"
        )));
    }
    if r < k / 2 || r > n as usize {
        return Err(Error::Parameter(format!(
            "r = {r} must satisfy k/2 = {} <= r <= n = {n}",
            k / 2
        )));
    }
    let nv = binomial(n as u64, r as u64).unwrap_or(u128::MAX);
    let alpha = even_alpha(n, k, r);
    let ne = alpha.saturating_mul(m as u128);
    if nv > caps.max_vertices || ne > caps.max_edges {
        return Err(Error::Capacity(format!(
            "Kikuchi graph has C({n}, {r}) = {nv} vertices and {ne} edges; caps are {} and {}",
            caps.max_vertices, caps.max_edges
        )));
    }
    let mut edges: Vec<KikuchiEdge> = h
        .edges()
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, c)| clause_edges(n, c, r, i))
        .collect();
    edges.par_sort_unstable();
    let num_vertices = nv as usize;
    let mut degree = vec![0u32; num_vertices];
    for e in &edges {
        degree[e.s as usize] += 1;
        degree[e.t as usize] += 1;
    }
    let adjacency = Adjacency::from_edges(num_vertices, edges.iter().map(|e| (e.s, e.t)));
    Ok(EvenKikuchiGraph {
        n,
        k,
        r,
        m,
        num_vertices,
        edges,
        degree,
        alpha,
        adjacency,
    })
}

impl EvenKikuchiGraph {
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }
    pub fn edges(&self) -> &[KikuchiEdge] {
        &self.edges
    }
    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }
    pub fn alpha(&self) -> u128 {
        self.alpha
    }
    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    /// `d = 2|E| / C(n, r)`.
    pub fn avg_degree(&self) -> BigRational {
        BigRational::new(
            BigInt::from(2 * self.edges.len()),
            BigInt::from(self.num_vertices),
        )
    }

    /// `d` from the closed form `C(k,k/2) C(n-k, r-k/2) m / C(n,r)`.
    pub fn avg_degree_formula(&self) -> BigRational {
        BigRational::new(
            BigInt::from(2 * self.alpha) * BigInt::from(self.m),
            BigInt::from(self.num_vertices),
        )
    }

    /// Diagonal of `Gamma = D + d I`.
    pub fn gamma(&self) -> Vec<BigRational> {
        let d = self.avg_degree();
        self.degree
            .iter()
            .map(|&x| BigRational::from_integer(x.into()) + &d)
            .collect()
    }

    /// `tr(Gamma) = 2|E| + N d = 4|E|`.
    pub fn gamma_trace(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(4 * self.edges.len()))
    }

    /// The subset with the given rank.
    pub fn vertex(&self, rank: usize) -> Vec<u32> {
        crate::combinatorics::colex_unrank(rank as u128, self.r)
    }

    /// Attaches the clause signs of `inst`, which must be built on the same hypergraph.
    pub fn signed(self, inst: &XorInstance) -> Result<SignedEvenKikuchi> {
        if inst.m() != self.m || inst.n() != self.n || inst.k() != self.k {
            return Err(Error::Shape("instance does not match the Kikuchi graph".into()));
        }
        let edge_signs = self.edges.iter().map(|e| inst.signs()[e.clause]).collect();
        Ok(SignedEvenKikuchi {
            graph: self,
            edge_signs,
        })
    }

    pub fn stats(&self) -> KikuchiStats {
        let mut degree_histogram = BTreeMap::new();
        for &x in &self.degree {
            *degree_histogram.entry(x).or_insert(0u64) += 1;
        }
        let d = self.avg_degree();
        KikuchiStats {
            alpha: self.alpha,
            num_vertices: self.num_vertices,
            num_edges: self.edges.len(),
            degenerate: d.is_zero(),
            d,
            degree_histogram,
        }
    }

    /// Text dump: header `kikuchi-even n r m`, then `S_rank T_rank clause_index`.
    pub fn dump(&self) -> String {
        let mut out = format!("kikuchi-even {} {} {}\n", self.n, self.r, self.m);
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.s, e.t, e.clause).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KikuchiStats {
    pub alpha: u128,
    pub num_vertices: usize,
    pub num_edges: usize,
    pub d: BigRational,
    /// degree -> number of vertices; the Gamma entry of a degree-`x` vertex is `x + d`.
    pub degree_histogram: BTreeMap<u32, u64>,
    /// `d = 0`, so Gamma vanishes.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedEvenKikuchi {
    pub graph: EvenKikuchiGraph,
    pub edge_signs: Vec<Sign>,
}

impl SignedEvenKikuchi {
    /// `x^T A_b x` for a `+-1` vector over the vertices, exact.
    pub fn quadratic_form(&self, lifted: &[Sign]) -> BigInt {
        let s: i64 = self
            .graph
            .edges
            .iter()
            .zip(&self.edge_signs)
            .map(|(e, &b)| 2 * (b * lifted[e.s as usize] * lifted[e.t as usize]) as i64)
            .sum();
        BigInt::from(s)
    }
}

/// `x^{(r)}` with `x_S = prod_{v in S} x_{v mod n}`, indexed by colex rank of
/// `r`-subsets of `0..universe`. Odd graphs use `universe = 2n`.
pub fn lift_assignment(x: &Assignment, universe: u32, r: usize) -> Vec<Sign> {
    let n = x.values.len() as u32;
    let mut out = Vec::new();
    for_each_colex_subset(universe, r, |s| {
        out.push(s.iter().map(|&v| x.values[(v % n) as usize]).product());
    });
    out
}

/// A walk given by its vertices and the edges between consecutive vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedWalk {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl ClosedWalk {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Builds a walk from a vertex sequence, using the first edge between
    /// each consecutive pair.
    pub fn from_vertices(g: &EvenKikuchiGraph, vertices: Vec<usize>) -> Result<ClosedWalk> {
        let mut edges = Vec::with_capacity(vertices.len().saturating_sub(1));
        for w in vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a >= g.num_vertices || b >= g.num_vertices {
                return Err(Error::InvalidWalk(format!("vertex out of range in step {a} -> {b}")));
            }
            let e = g
                .adjacency
                .of(a)
                .iter()
                .find(|&&(nb, _)| nb as usize == b)
                .map(|&(_, e)| e)
                .ok_or_else(|| Error::InvalidWalk(format!("{a} and {b} are not adjacent")))?;
            edges.push(e);
        }
        Ok(ClosedWalk { vertices, edges })
    }
}

/// The clauses used an odd number of times along a closed walk. Their
/// symmetric difference is empty, so the result is an even cover (possibly
/// empty, for a trivial walk).
pub fn extract_cover_from_closed_walk(g: &EvenKikuchiGraph, walk: &ClosedWalk) -> Result<EvenCover> {
    if walk.vertices.len() != walk.edges.len() + 1 {
        return Err(Error::InvalidWalk("need one more vertex than edges".into()));
    }
    if walk.vertices.first() != walk.vertices.last() {
        return Err(Error::InvalidWalk("walk is not closed".into()));
    }
    let mut odd: BTreeMap<usize, bool> = BTreeMap::new();
    for (i, &e) in walk.edges.iter().enumerate() {
        let edge = g
            .edges
            .get(e)
            .ok_or_else(|| Error::InvalidWalk(format!("edge index {e} out of range")))?;
        let (a, b) = (walk.vertices[i] as u32, walk.vertices[i + 1] as u32);
        if !((edge.s == a && edge.t == b) || (edge.s == b && edge.t == a)) {
            return Err(Error::InvalidWalk(format!(
                "step {i}: edge {e} does not join {a} and {b}"
            )));
        }
        *odd.entry(edge.clause).or_insert(false) ^= true;
    }
    Ok(EvenCover::new(
        odd.into_iter().filter(|&(_, o)| o).map(|(c, _)| c),
    ))
}

/// Result of the Kikuchi walk search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkCover {
    pub walk: ClosedWalk,
    pub cover: EvenCover,
}

impl WalkCover {
    pub fn length(&self) -> usize {
        self.walk.len()
    }
}

/// Shortest closed walk in the Kikuchi graph whose clause labels do not
/// cancel, found from fundamental cycles of BFS trees rooted at every vertex.
/// Parity of labels is linear over the cycle space, so if any non-trivial
/// closed walk exists in a component, one of these cycles is non-trivial.
pub fn shortest_even_cover_via_kikuchi(h: &Hypergraph, r: usize, caps: Caps) -> Result<Option<WalkCover>> {
    let g = build_even_kikuchi(h, r, caps)?;
    Ok(shortest_nontrivial_walk(&g))
}

pub fn shortest_nontrivial_walk(g: &EvenKikuchiGraph) -> Option<WalkCover> {
    let nv = g.num_vertices;
    let adj = &g.adjacency;
    let mut best: Option<(usize, usize, ClosedWalk, EvenCover)> = None;
    let mut dist = vec![usize::MAX; nv];
    let mut parent = vec![(usize::MAX, usize::MAX); nv];
    for root in 0..nv {
        if adj.of(root).is_empty() {
            continue;
        }
        let mut touched = vec![root];
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            // any cycle found from here on is at least 2 dist(u) + 1 long
            if let Some((len, ..)) = &best {
                if 2 * dist[u] + 1 > *len {
                    break;
                }
            }
            for &(w, e) in adj.of(u) {
                let w = w as usize;
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = (u, e);
                    touched.push(w);
                    queue.push_back(w);
                    continue;
                }
                if parent[u].1 == e || (parent[w].1 == e) {
                    continue;
                }
                // each non-tree edge is seen from both ends; take it once
                if (dist[w], w) < (dist[u], u) {
                    continue;
                }
                let len = dist[u] + dist[w] + 1;
                if best.as_ref().is_some_and(|(l, ..)| len > *l) {
                    continue;
                }
                let walk = fundamental_walk(root, u, w, e, &parent);
                let cover = extract_cover_from_closed_walk(g, &walk).expect("tree walk is valid");
                if cover.is_empty() {
                    continue;
                }
                let key = (len, cover.len());
                if best.as_ref().is_none_or(|(l, c, ..)| key < (*l, *c)) {
                    best = Some((len, cover.len(), walk, cover));
                }
            }
        }
        for v in touched {
            dist[v] = usize::MAX;
            parent[v] = (usize::MAX, usize::MAX);
        }
    }
    best.map(|(_, _, walk, cover)| WalkCover { walk, cover })
}

fn fundamental_walk(root: usize, u: usize, w: usize, e: usize, parent: &[(usize, usize)]) -> ClosedWalk {
    let up = |mut x: usize| {
        let mut vs = vec![x];
        let mut es = Vec::new();
        while x != root {
            let (p, pe) = parent[x];
            es.push(pe);
            vs.push(p);
            x = p;
        }
        (vs, es)
    };
    // root -> u, then e, then w -> root
    let (mut vu, mut eu) = up(u);
    vu.reverse();
    eu.reverse();
    let (vw, ew) = up(w);
    let mut vertices = vu;
    vertices.extend(vw);
    let mut edges = eu;
    edges.push(e);
    edges.extend(ew);
    ClosedWalk { vertices, edges }
}

/// Clause labels per vertex pair, for tests and small audits.
pub fn edge_label_map(g: &EvenKikuchiGraph) -> HashMap<(u32, u32), Vec<usize>> {
    let mut map: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for e in &g.edges {
        map.entry((e.s, e.t)).or_default().push(e.clause);
    }
    map
}

/// `tr((Gamma^{-1} A)^l)` next to the walk-counting bound for a hypergraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceAudit {
    pub trace: BigRational,
    pub bound: crate::spectral::TraceBound,
}

impl TraceAudit {
    pub fn holds(&self) -> bool {
        self.trace <= self.bound.displayed
    }
}

pub fn trace_audit(h: &Hypergraph, r: usize, ell: u32, caps: Caps) -> Result<TraceAudit> {
    let g = build_even_kikuchi(h, r, caps)?;
    if g.edges().is_empty() {
        return Err(Error::Precondition("the Kikuchi graph has no edges".into()));
    }
    let pairs: Vec<(usize, usize, i64)> = g.edges().iter().map(|e| (e.s as usize, e.t as usize, 1)).collect();
    let m = crate::spectral::RationalMatrix::gamma_inverse_times(g.num_vertices(), &pairs, &g.gamma())?;
    let trace = crate::spectral::exact_trace_power(&m, ell as usize)?;
    let bound = crate::spectral::trace_bound_rhs(&crate::spectral::TraceBoundParams {
        base: h.n() as u64,
        r: r as u64,
        ell,
        d: g.avg_degree(),
        eta: None,
    })?;
    Ok(TraceAudit { trace, bound })
}
