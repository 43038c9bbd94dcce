//! Colored Kikuchi graphs for odd arity. A vertex is an `r`-subset of
//! `[n] x [2]`, encoded as ranks of subsets of `0..2n` where green `v` is `v`
//! and blue `v` is `v + n`. Clauses `C != C'` of one group (sharing a center
//! `U`) join `S` and `T` when `S xor T` is `C~` in green plus `C'~` in blue
//! (`C~ = C \ U`) and the intersection sizes are balanced.
//!
//! Also here: the heavy-edge deletion process, equalization of per-pair edge
//! counts, the predicted deletion rate, and the chaining reduction for groups
//! whose clauses meet only in their center.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::combinatorics::{binomial, colex_rank, colex_unrank, combinations, pow, rational_int};
use crate::decomposition::Group;
use crate::error::{Error, Result};
use crate::hypergraph::{EvenCover, Hypergraph, Sign, XorInstance};
use crate::kikuchi_even::{merge, Adjacency, Caps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OddEdge {
    /// Smaller endpoint rank.
    pub s: u32,
    pub t: u32,
    /// Position of the group in the level.
    pub group: u32,
    /// Clause colored green.
    pub c: usize,
    /// Clause colored blue.
    pub c2: usize,
}

impl OddEdge {
    pub fn pair(&self) -> PairKey {
        (self.group, self.c, self.c2)
    }
}

/// `(group, green clause, blue clause)`.
pub type PairKey = (u32, usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredKikuchiGraph {
    n: u32,
    k: usize,
    r: usize,
    t: usize,
    groups: Vec<Group>,
    centers_removed: Vec<Vec<Vec<u32>>>,
    num_vertices: usize,
    edges: Vec<OddEdge>,
    alpha: u64,
    pair_count: usize,
    degree: Vec<u32>,
}

/// The closed form `C(w, floor(w/2)) C(w, ceil(w/2)) C(2n - 2w, r - w) 2^[w odd]`
/// with `w = k - t`. It counts ordered endpoint choices; every unordered edge
/// is reached from both of its endpoints, so the measured count is half.
pub fn closed_form_alpha(n: u32, k: usize, t: usize, r: usize) -> u128 {
    let w = (k - t) as u64;
    if (r as u64) < w || (2 * n as u64) < 2 * w {
        return 0;
    }
    let a = binomial(w, w / 2).unwrap_or(0);
    let b = binomial(w, w.div_ceil(2)).unwrap_or(0);
    let c = binomial(2 * n as u64 - 2 * w, r as u64 - w).unwrap_or(u128::MAX);
    let odd = if w % 2 == 1 { 2 } else { 1 };
    a.saturating_mul(b).saturating_mul(c).saturating_mul(odd)
}

/// Splits `(a, b)` of `w` with `a` the green intersection size on the `S` side.
fn balanced_splits(w: usize) -> Vec<(usize, usize)> {
    let (lo, hi) = (w / 2, w.div_ceil(2));
    if lo == hi {
        vec![(lo, hi)]
    } else {
        vec![(hi, lo), (lo, hi)]
    }
}

fn strip(clause: &[u32], center: &[u32]) -> Vec<u32> {
    clause.iter().copied().filter(|v| center.binary_search(v).is_err()).collect()
}

fn pair_edges(
    n: u32,
    r: usize,
    green: &[u32],
    blue: &[u32],
    key: PairKey,
) -> Vec<OddEdge> {
    let w = green.len();
    let blue_shift: Vec<u32> = blue.iter().map(|v| v + n).collect();
    let used = merge(green, &blue_shift);
    let outside: Vec<u32> = (0..2 * n).filter(|v| used.binary_search(v).is_err()).collect();
    let rests = combinations(&outside, r - w);
    let mut out = Vec::new();
    for (a, b) in balanced_splits(w) {
        for ga in combinations(green, a) {
            let g_rest: Vec<u32> = green.iter().copied().filter(|v| !ga.contains(v)).collect();
            for bb in combinations(&blue_shift, b) {
                let b_rest: Vec<u32> = blue_shift.iter().copied().filter(|v| !bb.contains(v)).collect();
                let s_fixed = merge(&ga, &bb);
                let t_fixed = merge(&g_rest, &b_rest);
                for rest in &rests {
                    let rs = colex_rank(&merge(&s_fixed, rest));
                    let rt = colex_rank(&merge(&t_fixed, rest));
                    // each edge is generated from both endpoints; keep one
                    if rs < rt {
                        out.push(OddEdge {
                            s: rs as u32,
                            t: rt as u32,
                            group: key.0,
                            c: key.1,
                            c2: key.2,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Checks that the groups share one level, contain their centers and are disjoint.
fn check_groups(h: &Hypergraph, groups: &[Group]) -> Result<usize> {
    let t = groups.first().map(|g| g.center.len()).unwrap_or(1);
    let mut seen = BTreeSet::new();
    for (gi, g) in groups.iter().enumerate() {
        if g.center.len() != t {
            return Err(Error::Precondition(format!(
                "group {gi} has a center of size {}, expected {t}",
                g.center.len()
            )));
        }
        for &c in &g.clause_indices {
            if c >= h.m() {
                return Err(Error::IndexOutOfRange { index: c, m: h.m() });
            }
            if !seen.insert(c) {
                return Err(Error::Precondition(format!("clause {c} appears in two groups")));
            }
            if !g.center.iter().all(|v| h.edge(c).binary_search(v).is_ok()) {
                return Err(Error::Precondition(format!(
                    "clause {c} does not contain the center of group {gi}"
                )));
            }
        }
    }
    Ok(t)
}

pub fn build_colored_kikuchi(
    h: &Hypergraph,
    groups: &[Group],
    r: usize,
    caps: Caps,
) -> Result<ColoredKikuchiGraph> {
    let (n, k) = (h.n(), h.k());
    let t = check_groups(h, groups)?;
    if t == 0 || t >= k {
        return Err(Error::Parameter(format!("center size t = {t} must satisfy 1 <= t <= k - 1")));
    }
    if r > 2 * n as usize {
        return Err(Error::Parameter(format!("r = {r} exceeds 2n = {}", 2 * n)));
    }
    let nv = binomial(2 * n as u64, r as u64).unwrap_or(u128::MAX);
    let pair_count: usize = groups.iter().map(|g| g.len() * g.len().saturating_sub(1)).sum();
    let per_pair = closed_form_alpha(n, k, t, r) / 2;
    let ne = per_pair.saturating_mul(pair_count as u128);
    if nv > caps.max_vertices || ne > caps.max_edges {
        return Err(Error::Capacity(format!(
            "colored Kikuchi graph has C({}, {r}) = {nv} vertices and {ne} edges; caps are {} and {}",
            2 * n,
            caps.max_vertices,
            caps.max_edges
        )));
    }
    let w = k - t;
    let centers_removed: Vec<Vec<Vec<u32>>> = groups
        .iter()
        .map(|g| g.clause_indices.iter().map(|&c| strip(h.edge(c), &g.center)).collect())
        .collect();
    let mut jobs = Vec::with_capacity(pair_count);
    for (gi, g) in groups.iter().enumerate() {
        for (a, &c) in g.clause_indices.iter().enumerate() {
            for (b, &c2) in g.clause_indices.iter().enumerate() {
                if a != b {
                    jobs.push((gi, a, b, (gi as u32, c, c2)));
                }
            }
        }
    }
    let mut edges: Vec<OddEdge> = if r < w {
        Vec::new()
    } else {
        jobs.par_iter()
            .flat_map_iter(|&(gi, a, b, key)| {
                pair_edges(n, r, &centers_removed[gi][a], &centers_removed[gi][b], key)
            })
            .collect()
    };
    edges.par_sort_unstable();
    let mut counts: BTreeMap<PairKey, u64> = jobs.iter().map(|j| (j.3, 0)).collect();
    for e in &edges {
        *counts.get_mut(&e.pair()).expect("edge from a known pair") += 1;
    }
    let mut distinct = counts.values().copied().collect::<BTreeSet<_>>().into_iter();
    let alpha = distinct.next().unwrap_or(per_pair as u64);
    if distinct.next().is_some() {
        return Err(Error::Precondition("per-pair edge counts are not constant".into()));
    }
    let num_vertices = nv as usize;
    let mut degree = vec![0u32; num_vertices];
    for e in &edges {
        degree[e.s as usize] += 1;
        degree[e.t as usize] += 1;
    }
    Ok(ColoredKikuchiGraph {
        n,
        k,
        r,
        t,
        groups: groups.to_vec(),
        centers_removed,
        num_vertices,
        edges,
        alpha,
        pair_count,
        degree,
    })
}

impl ColoredKikuchiGraph {
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn t(&self) -> usize {
        self.t
    }
    pub fn groups(&self) -> &[Group] {
        &self.groups
    }
    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }
    pub fn edges(&self) -> &[OddEdge] {
        &self.edges
    }
    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }
    /// Measured unordered edges per ordered clause pair.
    pub fn alpha(&self) -> u64 {
        self.alpha
    }
    pub fn closed_form_alpha(&self) -> u128 {
        closed_form_alpha(self.n, self.k, self.t, self.r)
    }
    /// Number of ordered pairs `(C, C')`, `C != C'`, within groups.
    pub fn pair_count(&self) -> usize {
        self.pair_count
    }

    pub fn avg_degree(&self) -> BigRational {
        BigRational::new(BigInt::from(2 * self.edges.len()), BigInt::from(self.num_vertices))
    }

    /// `(green, blue)` parts of a vertex, as subsets of `0..n`.
    pub fn vertex(&self, rank: usize) -> (Vec<u32>, Vec<u32>) {
        let s = colex_unrank(rank as u128, self.r);
        let green = s.iter().copied().filter(|&v| v < self.n).collect();
        let blue = s.iter().copied().filter(|&v| v >= self.n).map(|v| v - self.n).collect();
        (green, blue)
    }

    /// Type-`i` degree: clauses `C` of group `i` with `|C~ ∩ S1|` or
    /// `|C~ ∩ S2|` in `{floor((k-t)/2), ceil((k-t)/2)}`.
    pub fn typed_degree(&self, rank: usize, group: usize) -> usize {
        let (green, blue) = self.vertex(rank);
        let w = self.k - self.t;
        let ok = |x: usize| x == w / 2 || x == w.div_ceil(2);
        let meet = |a: &[u32], b: &[u32]| a.iter().filter(|v| b.binary_search(v).is_ok()).count();
        self.centers_removed[group]
            .iter()
            .filter(|c| ok(meet(c, &green)) || ok(meet(c, &blue)))
            .count()
    }

    /// The two-sided window `(r/2n)^{k-t} P <= d <= 4^k (r/2n)^{k-t} P` with
    /// `P = sum_i C(|H_i|, 2)`, evaluated on the measured average degree.
    pub fn degree_window(&self) -> DegreeWindow {
        let p: u128 = self
            .groups
            .iter()
            .map(|g| binomial(g.len() as u64, 2).unwrap_or(0))
            .sum();
        let base = BigRational::new(BigInt::from(self.r), BigInt::from(2 * self.n));
        let low = pow(&base, (self.k - self.t) as i32) * rational_int(BigInt::from(p));
        let high = &low * rational_int(num_traits::pow(BigInt::from(4), self.k));
        let d = self.avg_degree();
        DegreeWindow {
            within: low <= d && d <= high,
            low,
            d,
            high,
        }
    }

    /// Edges at each vertex that involve a given clause, keyed by `(vertex, clause)`.
    pub fn incidence(&self) -> BTreeMap<(u32, usize), u64> {
        let mut inc = BTreeMap::new();
        for e in &self.edges {
            for v in [e.s, e.t] {
                *inc.entry((v, e.c)).or_insert(0) += 1;
                *inc.entry((v, e.c2)).or_insert(0) += 1;
            }
        }
        inc
    }

    /// Text dump: header `kikuchi-odd n r t p`, then
    /// `S_rank T_rank group C_index C'_index`.
    pub fn dump(&self) -> String {
        let mut out = format!(
            "kikuchi-odd {} {} {} {}\n",
            self.n,
            self.r,
            self.t,
            self.groups.len()
        );
        for e in &self.edges {
            writeln!(out, "{} {} {} {} {}", e.s, e.t, e.group, e.c, e.c2).unwrap();
        }
        out
    }

    /// Edge signs `b_C b_C'`.
    pub fn edge_signs(&self, inst: &XorInstance) -> Vec<Sign> {
        self.edges
            .iter()
            .map(|e| inst.signs()[e.c] * inst.signs()[e.c2])
            .collect()
    }

    /// `x^T A_b x` restricted to the listed edges, exact.
    pub fn quadratic_form(&self, signs: &[Sign], edges: &[usize], lifted: &[Sign]) -> BigInt {
        let s: i64 = edges
            .iter()
            .map(|&i| {
                let e = &self.edges[i];
                2 * (signs[i] * lifted[e.s as usize] * lifted[e.t as usize]) as i64
            })
            .sum();
        BigInt::from(s)
    }

    pub fn adjacency(&self, edges: &[usize]) -> Adjacency {
        Adjacency::from_edges(
            self.num_vertices,
            edges.iter().map(|&i| (self.edges[i].s, self.edges[i].t)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeWindow {
    pub low: BigRational,
    pub d: BigRational,
    pub high: BigRational,
    pub within: bool,
}

/// Deletion threshold; `Unbounded` deletes nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Eta {
    Finite(u64),
    Unbounded,
}

impl Eta {
    fn exceeded_by(&self, x: u64) -> bool {
        match self {
            Eta::Finite(eta) => x > *eta,
            Eta::Unbounded => false,
        }
    }
}

impl std::fmt::Display for Eta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Eta::Finite(x) => write!(f, "{x}"),
            Eta::Unbounded => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeletionResult {
    /// Indices of surviving edges, increasing.
    pub survivors: Vec<usize>,
    /// Surviving edges per ordered pair.
    pub pair_survival: BTreeMap<PairKey, u64>,
    /// Edges per pair before deletion.
    pub alpha: u64,
    /// Minimum survival count over pairs (`None` when there are no pairs).
    pub kappa: Option<u64>,
    /// `1 - kappa / alpha`.
    pub rho: BigRational,
    pub eta: Eta,
    pub equalized: bool,
}

impl DeletionResult {
    /// Pairs exist but none of their edges can be kept.
    pub fn degenerate(&self) -> bool {
        matches!(self.kappa, Some(0)) || (self.kappa.is_some() && self.alpha == 0)
    }

    /// Largest per-pair deleted fraction.
    pub fn max_pair_deletion_fraction(&self) -> BigRational {
        if self.alpha == 0 {
            return BigRational::zero();
        }
        let min = self.pair_survival.values().copied().min().unwrap_or(self.alpha);
        BigRational::new(BigInt::from(self.alpha - min), BigInt::from(self.alpha))
    }
}

fn survival_counts(g: &ColoredKikuchiGraph, survivors: &[usize]) -> BTreeMap<PairKey, u64> {
    let mut counts: BTreeMap<PairKey, u64> = BTreeMap::new();
    for (gi, grp) in g.groups.iter().enumerate() {
        for &c in &grp.clause_indices {
            for &c2 in &grp.clause_indices {
                if c != c2 {
                    counts.insert((gi as u32, c, c2), 0);
                }
            }
        }
    }
    for &i in survivors {
        *counts.get_mut(&g.edges[i].pair()).unwrap() += 1;
    }
    counts
}

fn rho_of(alpha: u64, kappa: Option<u64>) -> BigRational {
    match kappa {
        Some(kp) if alpha > 0 => BigRational::one() - BigRational::new(kp.into(), alpha.into()),
        _ => BigRational::zero(),
    }
}

/// Removes, all at once, every edge `{S, T}` from a pair `(C, C')` where `S`
/// or `T` meets more than `eta` edges involving `C` or `C'`. Counts come from
/// the graph before any deletion.
pub fn delete_heavy_edges(g: &ColoredKikuchiGraph, eta: Eta) -> DeletionResult {
    let inc = g.incidence();
    let heavy = |v: u32, c: usize| eta.exceeded_by(inc[&(v, c)]);
    let survivors: Vec<usize> = (0..g.edges.len())
        .filter(|&i| {
            let e = &g.edges[i];
            !(heavy(e.s, e.c) || heavy(e.s, e.c2) || heavy(e.t, e.c) || heavy(e.t, e.c2))
        })
        .collect();
    let pair_survival = survival_counts(g, &survivors);
    let kappa = pair_survival.values().copied().min();
    DeletionResult {
        survivors,
        pair_survival,
        alpha: g.alpha,
        rho: rho_of(g.alpha, kappa),
        kappa,
        eta,
        equalized: false,
    }
}

/// Cuts every pair down to the minimum survival count `kappa`, dropping the
/// largest `(S, T)` edges first, so each pair keeps exactly `kappa` edges.
pub fn equalize_deletion(g: &ColoredKikuchiGraph, pre: &DeletionResult) -> DeletionResult {
    let kappa = pre.pair_survival.values().copied().min();
    let mut keep_left: BTreeMap<PairKey, u64> = pre
        .pair_survival
        .keys()
        .map(|&p| (p, kappa.unwrap_or(0)))
        .collect();
    // survivors are in increasing edge order; keep the first kappa per pair
    let survivors: Vec<usize> = pre
        .survivors
        .iter()
        .copied()
        .filter(|&i| {
            let left = keep_left.get_mut(&g.edges[i].pair()).unwrap();
            if *left > 0 {
                *left -= 1;
                true
            } else {
                false
            }
        })
        .collect();
    let pair_survival = survival_counts(g, &survivors);
    DeletionResult {
        survivors,
        pair_survival,
        alpha: pre.alpha,
        rho: rho_of(pre.alpha, kappa),
        kappa,
        eta: pre.eta,
        equalized: true,
    }
}

/// `c_s` = the largest number of the given clauses containing one `s`-set,
/// for `s = 0..=k`.
pub fn measured_caps(h: &Hypergraph, clauses: &[usize]) -> Vec<u64> {
    let k = h.k();
    let mut caps = vec![0u64; k + 1];
    caps[0] = clauses.len() as u64;
    for (s, cap) in caps.iter_mut().enumerate().skip(1) {
        let mut counts: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for &c in clauses {
            for u in combinations(h.edge(c), s) {
                *counts.entry(u).or_insert(0) += 1;
            }
        }
        *cap = counts.values().copied().max().unwrap_or(0);
    }
    caps
}

/// `(4^k / eta) * sum_{s=i}^{floor((k+i)/2)} c_s (r/n)^{floor((k+i)/2) - s}`.
/// `caps[s]` bounds how many level-`i` clauses contain any `s`-set.
pub fn predicted_deletion_fraction(k: usize, i: usize, n: u32, r: usize, eta: Eta, caps: &[u64]) -> BigRational {
    let eta = match eta {
        Eta::Finite(x) => x,
        Eta::Unbounded => return BigRational::zero(),
    };
    let top = (k + i) / 2;
    let ratio = BigRational::new(BigInt::from(r), BigInt::from(n));
    let mut sum = BigRational::zero();
    for s in i..=top {
        let c = caps.get(s).copied().unwrap_or(0);
        sum += rational_int(BigInt::from(c)) * pow(&ratio, (top - s) as i32);
    }
    sum * BigRational::new(num_traits::pow(BigInt::from(4), k), BigInt::from(eta))
}

/// The chained hypergraph `H^` with provenance of each emitted edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LargeIntersectionReduction {
    pub hypergraph: Hypergraph,
    /// Source clause indices `(C_s, C_{s+1})` of each emitted edge.
    pub provenance: Vec<(usize, usize)>,
}

impl LargeIntersectionReduction {
    /// Lifts an even cover of `H^` to the clauses used an odd number of times;
    /// the result is an even cover of the original hypergraph.
    pub fn back_map(&self, cover: &EvenCover) -> Result<EvenCover> {
        let mut odd: BTreeMap<usize, bool> = BTreeMap::new();
        for i in cover.iter() {
            let &(a, b) = self
                .provenance
                .get(i)
                .ok_or(Error::IndexOutOfRange { index: i, m: self.provenance.len() })?;
            *odd.entry(a).or_insert(false) ^= true;
            *odd.entry(b).or_insert(false) ^= true;
        }
        Ok(EvenCover::new(odd.into_iter().filter(|&(_, o)| o).map(|(c, _)| c)))
    }
}

/// Orders each group by clause index and emits `C_s xor C_{s+1}`. Every pair
/// within a group must meet exactly in the center.
pub fn reduce_large_intersection(h: &Hypergraph, groups: &[Group]) -> Result<LargeIntersectionReduction> {
    let i = check_groups(h, groups)?;
    let k = h.k();
    for g in groups {
        for (a, &c) in g.clause_indices.iter().enumerate() {
            for &c2 in &g.clause_indices[a + 1..] {
                let meet = h.edge(c).iter().filter(|v| h.edge(c2).binary_search(v).is_ok()).count();
                if meet != i {
                    return Err(Error::Precondition(format!(
                        "clauses {c} and {c2} share {meet} vertices, more than the center size {i}"
                    )));
                }
            }
        }
    }
    let mut edges = Vec::new();
    let mut provenance = Vec::new();
    for g in groups {
        let mut order = g.clause_indices.clone();
        order.sort_unstable();
        for w in order.windows(2) {
            edges.push(crate::hypergraph::symmetric_difference([h.edge(w[0]), h.edge(w[1])]));
            provenance.push((w[0], w[1]));
        }
    }
    let hypergraph = Hypergraph::new(h.n(), 2 * (k - i), edges)?;
    Ok(LargeIntersectionReduction { hypergraph, provenance })
}
